// SPDX-License-Identifier: Apache-2.0

#include "qmcev/estimator.hpp"

#include "qmcev/fem.hpp"
#include "qmcev/numerics.hpp"
#include "qmcev/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace qmcev
{

namespace
{

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t mc_domain = 0x6d6f6e7465636172ULL;

double seconds_since(std::chrono::steady_clock::time_point start)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string format_y(const ParamRef& y)
{
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (Eigen::Index j = 0; j < y.size(); ++j) os << (j ? ", " : "") << y[j];
  os << ']';
  return os.str();
}

struct EigenSetup
{
  TriMesh mesh;
  std::unique_ptr<PencilAssembler> assembler;
  // ground state at y = 0: a fixed start vector shared by every evaluation
  Eigen::VectorXd start;
};

class EigenIntegrand final : public Integrand
{
public:
  EigenIntegrand(std::shared_ptr<const EigenSetup> setup, Quantity quantity, const SolverConfig& solver)
      : setup_(std::move(setup)), quantity_(quantity), solver_(solver), A_(setup_->assembler->pattern()),
        M_(setup_->assembler->pattern())
  {
  }

  double operator()(const ParamRef& y) override
  {
    setup_->assembler->assemble(y, A_, M_);
    std::vector<EigenPair> pairs;
    try {
      pairs = solver_.solve(A_, M_, setup_->start);
    } catch (const SolverError& e) {
      throw SolverError(std::string(e.what()) + " at y = " + format_y(y));
    }
    const EigenPair& pair = pairs.front();
    stats_.solves += pair.iterations;
    stats_.max_solves = std::max(stats_.max_solves, pair.iterations);
    stats_.max_residual = std::max(stats_.max_residual, pair.residual);
    return quantity_ == Quantity::eigenvalue ? pair.lambda : functional_G(pair.vector, setup_->mesh);
  }

  SolverStats stats() const override { return stats_; }

private:
  std::shared_ptr<const EigenSetup> setup_;
  Quantity quantity_;
  PencilSolver solver_;
  SparseSym A_, M_;
  SolverStats stats_;
};

class FunctionIntegrand final : public Integrand
{
public:
  explicit FunctionIntegrand(std::shared_ptr<const std::function<double(const ParamRef&)>> f) : f_(std::move(f)) {}
  double operator()(const ParamRef& y) override { return (*f_)(y); }

private:
  std::shared_ptr<const std::function<double(const ParamRef&)>> f_;
};

// Per-shift averages of values laid out shift-major (R blocks of N).
std::vector<double> block_means(const std::vector<double>& values, int R, std::uint64_t N)
{
  std::vector<double> means(static_cast<std::size_t>(R));
  for (int r = 0; r < R; ++r) {
    const std::span<const double> block(values.data() + std::size_t(r) * N, N);
    means[r] = pairwise_sum(block) / double(N);
  }
  return means;
}

// Lattice points for all shifts, shift-major.
Eigen::MatrixXd shifted_points(const GeneratingVector& gen, const std::vector<Eigen::VectorXd>& shifts)
{
  const auto N = Eigen::Index(gen.N);
  Eigen::MatrixXd points(gen.dimension(), N * Eigen::Index(shifts.size()));
  for (std::size_t r = 0; r < shifts.size(); ++r) points.middleCols(Eigen::Index(r) * N, N) = generate_points(gen, shifts[r]);
  return points;
}

RunResult run_points(const IntegrandFactory& factory, const Eigen::MatrixXd& points, int R, std::uint64_t N,
                     int threads)
{
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  const std::vector<double> values = evaluate_points(factory, points, threads, &result.solver);
  result.evaluations = static_cast<long long>(values.size());
  result.per_shift = block_means(values, R, N);
  summarize(result);
  result.wall_time = seconds_since(start);
  return result;
}

// Mean of the integrand over one shifted lattice.
double single_shift_mean(const IntegrandFactory& factory, const GeneratingVector& gen, const Eigen::VectorXd& shift,
                         int threads, SolverStats& stats)
{
  const std::vector<double> values = evaluate_points(factory, generate_points(gen, shift), threads, &stats);
  return pairwise_sum(std::span<const double>(values)) / double(gen.N);
}

void finish_fit(StudyResult& study)
{
  std::vector<double> x, err;
  for (const StudyRow& row : study.rows) {
    x.push_back(row.value);
    err.push_back(row.error);
  }
  const bool usable = std::all_of(err.begin(), err.end(), [](double e) { return e > 0.0 && std::isfinite(e); });
  if (!usable) {
    study.rate = study.tail_rate = nan;
    study.note = "degenerate data";
    return;
  }
  study.rate = fit_rate(x, err);
  study.tail_rate = nan;
  if (x.size() >= 5) {
    const std::size_t off = x.size() - 5;
    study.tail_rate = fit_rate(std::span<const double>(x).subspan(off), std::span<const double>(err).subspan(off));
  }
}

void require_rows(std::size_t n)
{
  if (n < 3) throw std::invalid_argument("a study needs at least 3 rows to fit a rate");
}

}  // namespace

std::string to_string(Quantity q) { return q == Quantity::eigenvalue ? "eigenvalue" : "functional"; }

Quantity quantity_from_string(const std::string& name)
{
  if (name == "eigenvalue") return Quantity::eigenvalue;
  if (name == "functional") return Quantity::functional;
  throw std::invalid_argument("unknown quantity '" + name + "' (expected eigenvalue or functional)");
}

void RunConfig::validate() const
{
  if (s < 1) throw std::invalid_argument("s must be >= 1");
  if (m < 2) throw std::invalid_argument("m must be >= 2");
  if (R < 1) throw std::invalid_argument("R must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (!is_prime(N)) {
    const auto [below, above] = neighbouring_primes(N);
    throw std::invalid_argument("N = " + std::to_string(N) + " is not prime; nearest primes are " +
                                (below ? std::to_string(below) + " and " : std::string()) + std::to_string(above));
  }
  if (field.family() == Family::Problem2 && m % 8 != 0)
    throw std::invalid_argument("problem2 needs m divisible by 8 (got " + std::to_string(m) + ")");
  if (quantity == Quantity::functional && m % 8 != 0)
    throw std::invalid_argument("the functional needs m divisible by 8 (got " + std::to_string(m) + ")");
  solver.validate();
}

void SolverStats::merge(const SolverStats& other)
{
  solves += other.solves;
  max_solves = std::max(max_solves, other.max_solves);
  max_residual = std::max(max_residual, other.max_residual);
}

IntegrandFactory eigen_integrand_factory(const RunConfig& cfg)
{
  cfg.validate();
  auto setup = std::make_shared<EigenSetup>();
  setup->mesh = build_mesh(cfg.m);
  setup->assembler = std::make_unique<PencilAssembler>(setup->mesh, cfg.field, cfg.s);
  SparseSym A = setup->assembler->pattern(), M = setup->assembler->pattern();
  setup->assembler->assemble(ParamVector::Zero(cfg.s), A, M);
  try {
    setup->start = PencilSolver().solve(A, M).front().vector;
  } catch (const SolverError&) {
    setup->start = Eigen::VectorXd::Ones(A.rows());
  }
  std::shared_ptr<const EigenSetup> shared = std::move(setup);
  const Quantity quantity = cfg.quantity;
  const SolverConfig solver = cfg.solver;
  return [shared, quantity, solver]() -> std::unique_ptr<Integrand> {
    return std::make_unique<EigenIntegrand>(shared, quantity, solver);
  };
}

IntegrandFactory function_integrand_factory(std::function<double(const ParamRef&)> f)
{
  auto shared = std::make_shared<const std::function<double(const ParamRef&)>>(std::move(f));
  return [shared]() -> std::unique_ptr<Integrand> { return std::make_unique<FunctionIntegrand>(shared); };
}

double evaluate_integrand(const RunConfig& cfg, const ParamRef& y)
{
  if (y.size() != cfg.s) throw std::invalid_argument("parameter vector length does not match s");
  return (*eigen_integrand_factory(cfg)())(y);
}

std::vector<double> evaluate_points(const IntegrandFactory& factory, const Eigen::MatrixXd& points, int threads,
                                    SolverStats* stats)
{
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  const Eigen::Index n = points.cols();
  std::vector<double> values(std::size_t(n), 0.0);
  std::atomic<Eigen::Index> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mutex;
  SolverStats total;

  const auto worker = [&]() {
    try {
      std::unique_ptr<Integrand> f = factory();
      for (Eigen::Index k = next++; k < n && !failed; k = next++) values[std::size_t(k)] = (*f)(points.col(k));
      const std::lock_guard lock(mutex);
      total.merge(f->stats());
    } catch (...) {
      const std::lock_guard lock(mutex);
      if (!error) error = std::current_exception();
      failed = true;
    }
  };

  const int workers = int(std::min<Eigen::Index>(threads, std::max<Eigen::Index>(n, 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  if (stats) stats->merge(total);
  return values;
}

void summarize(RunResult& result)
{
  const std::size_t R = result.per_shift.size();
  if (R == 0) throw std::invalid_argument("no shift estimates to summarise");
  double sum = 0.0;
  for (double q : result.per_shift) sum += q;
  result.mean = sum / double(R);
  if (R == 1) {
    result.rms = result.single_rule_rms = nan;
    return;
  }
  double sq = 0.0;
  for (double q : result.per_shift) sq += (q - result.mean) * (q - result.mean);
  result.rms = std::sqrt(sq / double(R * (R - 1)));
  result.single_rule_rms = result.rms * std::sqrt(double(R));
}

RunResult qmc_estimate(const RunConfig& cfg, const GeneratingVector& gen)
{
  return qmc_estimate(cfg, gen, eigen_integrand_factory(cfg));
}

RunResult qmc_estimate(const RunConfig& cfg, const GeneratingVector& gen, const IntegrandFactory& factory)
{
  cfg.validate();
  gen.validate();
  if (gen.N != cfg.N || gen.dimension() != cfg.s)
    throw std::invalid_argument("generating vector does not match the configured N and s");
  const ShiftedLattice lattice{gen, cfg.master_seed, cfg.R};
  std::vector<Eigen::VectorXd> shifts;
  for (int r = 0; r < cfg.R; ++r) shifts.push_back(lattice.shift(r));
  return run_points(factory, shifted_points(gen, shifts), cfg.R, cfg.N, cfg.threads);
}

RunResult mc_estimate(const RunConfig& cfg) { return mc_estimate(cfg, eigen_integrand_factory(cfg)); }

RunResult mc_estimate(const RunConfig& cfg, const IntegrandFactory& factory)
{
  cfg.validate();
  const std::uint64_t key = mix64(cfg.master_seed ^ mc_domain);
  const auto total = Eigen::Index(cfg.N) * cfg.R;
  Eigen::MatrixXd points(cfg.s, total);
  for (Eigen::Index k = 0; k < total; ++k)
    for (int j = 0; j < cfg.s; ++j) points(j, k) = uniform01(key, std::uint64_t(k), std::uint64_t(j)) - 0.5;
  return run_points(factory, points, cfg.R, cfg.N, cfg.threads);
}

double fit_rate(std::span<const double> x, std::span<const double> err)
{
  if (x.size() != err.size()) throw std::invalid_argument("fit_rate: x and err differ in length");
  if (x.size() < 3) throw std::invalid_argument("fit_rate needs at least 3 points");
  Eigen::ArrayXd lx(Eigen::Index(x.size())), le(Eigen::Index(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(err[i] > 0.0) || !std::isfinite(err[i]))
      throw std::invalid_argument("fit_rate needs positive, finite values");
    lx[Eigen::Index(i)] = std::log(x[i]);
    le[Eigen::Index(i)] = std::log(err[i]);
  }
  const Eigen::ArrayXd dx = lx - lx.mean();
  const double sxx = dx.square().sum();
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_rate needs at least two distinct x values");
  return (dx * (le - le.mean())).sum() / sxx;
}

StudyResult truncation_study(const RunConfig& cfg, const std::vector<int>& s_list, int s_ref,
                             const IntegrandBuilder& builder)
{
  require_rows(s_list.size());
  for (int s : s_list) {
    if (s < 1) throw std::invalid_argument("truncation dimensions must be >= 1");
    if (s >= s_ref) throw std::invalid_argument("s_ref must exceed every s in the list");
  }
  const auto start = std::chrono::steady_clock::now();
  RunConfig ref = cfg;
  ref.s = s_ref;
  ref.validate();

  StudyResult study;
  study.kind = "truncation";
  const GeneratingVector gen = cbc_construct(cfg.N, s_ref, pod_weights_from_field(cfg.field, s_ref)).gen;
  const Eigen::VectorXd shift = ShiftedLattice{gen, cfg.master_seed, 1}.shift(0);
  const double q_ref = single_shift_mean(builder(ref), gen, shift, cfg.threads, study.solver);

  for (int s : s_list) {
    RunConfig row_cfg = cfg;
    row_cfg.s = s;
    const double q = single_shift_mean(builder(row_cfg), gen.truncated(s), shift.head(s), cfg.threads, study.solver);
    study.rows.push_back({"s", double(s), std::abs(q - q_ref), q, q_ref});
  }
  finish_fit(study);
  study.wall_time = seconds_since(start);
  return study;
}

StudyResult fe_study(const RunConfig& cfg, const std::vector<int>& m_list, int m_ref, const IntegrandBuilder& builder)
{
  require_rows(m_list.size());
  for (int m : m_list)
    if (m >= m_ref) throw std::invalid_argument("m_ref must exceed every m in the list");
  const auto start = std::chrono::steady_clock::now();
  RunConfig ref = cfg;
  ref.m = m_ref;
  ref.validate();

  StudyResult study;
  study.kind = "fe";
  const GeneratingVector gen = cbc_construct(cfg.N, cfg.s, pod_weights_from_field(cfg.field, cfg.s)).gen;
  const Eigen::VectorXd shift = ShiftedLattice{gen, cfg.master_seed, 1}.shift(0);
  const double q_ref = single_shift_mean(builder(ref), gen, shift, cfg.threads, study.solver);

  for (int m : m_list) {
    RunConfig row_cfg = cfg;
    row_cfg.m = m;
    row_cfg.validate();
    const double q = single_shift_mean(builder(row_cfg), gen, shift, cfg.threads, study.solver);
    study.rows.push_back({"h", 1.0 / m, std::abs(q - q_ref), q, q_ref});
  }
  finish_fit(study);
  study.wall_time = seconds_since(start);
  return study;
}

StudyResult qmc_convergence_study(const RunConfig& cfg, const std::vector<std::uint64_t>& N_list,
                                  const IntegrandBuilder& builder)
{
  require_rows(N_list.size());
  const auto start = std::chrono::steady_clock::now();
  StudyResult study;
  study.kind = "qmc";
  const PODWeights weights = pod_weights_from_field(cfg.field, cfg.s);
  for (std::uint64_t N : N_list) {
    RunConfig row_cfg = cfg;
    row_cfg.N = N;
    row_cfg.validate();
    const GeneratingVector gen = cbc_construct(N, cfg.s, weights).gen;
    const RunResult run = qmc_estimate(row_cfg, gen, builder(row_cfg));
    study.solver.merge(run.solver);
    study.rows.push_back({"N", double(N), run.single_rule_rms, run.mean, nan});
  }
  finish_fit(study);
  study.wall_time = seconds_since(start);
  return study;
}

StudyResult mc_convergence_study(const RunConfig& cfg, const std::vector<std::uint64_t>& N_list,
                                 const IntegrandBuilder& builder)
{
  require_rows(N_list.size());
  const auto start = std::chrono::steady_clock::now();
  StudyResult study;
  study.kind = "mc";
  for (std::uint64_t N : N_list) {
    RunConfig row_cfg = cfg;
    row_cfg.N = N;
    row_cfg.validate();
    const RunResult run = mc_estimate(row_cfg, builder(row_cfg));
    study.solver.merge(run.solver);
    study.rows.push_back({"N", double(N), run.single_rule_rms, run.mean, nan});
  }
  finish_fit(study);
  study.wall_time = seconds_since(start);
  return study;
}

void write_study_csv(std::ostream& os, const StudyResult& study, std::uint64_t seed,
                     const std::vector<std::string>& comments)
{
  const auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const std::string& line : comments) os << "# " << line << '\n';
  os << "# study = " << study.kind << '\n';
  os << "# rate = " << num(study.rate) << '\n';
  os << "# tail_rate = " << num(study.tail_rate) << '\n';
  if (!study.note.empty()) os << "# note = " << study.note << '\n';
  os << "var,value,error,mean,reference,seed\n";
  for (const StudyRow& row : study.rows)
    os << row.var << ',' << num(row.value) << ',' << num(row.error) << ',' << num(row.mean) << ','
       << num(row.reference) << ',' << seed << '\n';
}

}  // namespace qmcev
