// SPDX-License-Identifier: Apache-2.0

#include "qmcev/validate.hpp"

#include "qmcev/fem.hpp"
#include "qmcev/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace qmcev
{

namespace
{

constexpr std::uint64_t sample_domain = 0x76616c6964617465ULL;
constexpr double chi1 = 2.0 * std::numbers::pi * std::numbers::pi;

// Runs task indices 0..n-1 on `threads` workers; make() builds one worker
// callable per thread.
template <class Make>
void run_parallel(int n, int threads, const Make& make)
{
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mutex;
  const auto body = [&]() {
    try {
      auto work = make();
      for (int i = next++; i < n && !failed; i = next++) work(i);
    } catch (...) {
      const std::lock_guard lock(mutex);
      if (!error) error = std::current_exception();
      failed = true;
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::min(threads, n); ++t) pool.emplace_back(body);
  body();
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Solver plus matrices for repeated solves on one assembly plan.
class PencilWorker
{
public:
  PencilWorker(const PencilAssembler& plan, const SolverConfig& cfg)
      : plan_(plan), solver_(cfg), A_(plan.pattern()), M_(plan.pattern())
  {
  }

  std::vector<EigenPair> operator()(const ParamRef& y)
  {
    plan_.assemble(y, A_, M_);
    return solver_.solve(A_, M_);
  }

private:
  const PencilAssembler& plan_;
  PencilSolver solver_;
  SparseSym A_, M_;
};

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

}  // namespace

ParamVector sample_parameter(std::uint64_t seed, int i, int s)
{
  const std::uint64_t key = mix64(seed ^ sample_domain);
  ParamVector y(s);
  for (int j = 0; j < s; ++j) y[j] = uniform01(key, std::uint64_t(i), std::uint64_t(j)) - 0.5;
  return y;
}

BoundsReport check_bounds(const CoefficientField& field, const SampleConfig& cfg)
{
  BoundsReport report;
  report.chi1 = chi1;
  if (field.family() == Family::Problem2) {
    report.skipped = true;
    report.notice = "Assumption A1 violated: " + field.name() +
                    " has c = 0 outside the fuel and piecewise-discontinuous coefficients";
    return report;
  }
  const UniformBounds b = field.uniform_bounds();
  if (!(b.a_min > 0.0)) {
    report.skipped = true;
    report.notice = "Assumption A1 violated: a_min <= 0 for " + field.name();
    return report;
  }
  const double h = 1.0 / cfg.m;
  report.lower = b.a_min / b.a_max * chi1;
  report.upper = b.a_max / b.a_min * (chi1 + 1.0);
  report.slack = 10.0 * h * h * report.upper;

  const TriMesh mesh = build_mesh(cfg.m);
  const PencilAssembler plan(mesh, field, cfg.s);
  SolverConfig solver = cfg.solver;
  solver.n_pairs = 1;
  report.lambda.assign(std::size_t(cfg.n_samples), 0.0);
  run_parallel(cfg.n_samples, cfg.threads, [&]() {
    return [&, worker = std::make_shared<PencilWorker>(plan, solver)](int i) {
      report.lambda[i] = (*worker)(sample_parameter(cfg.seed, i, cfg.s)).front().lambda;
    };
  });
  for (double l : report.lambda)
    if (!(l >= report.lower && l <= report.upper + report.slack)) ++report.violations;
  return report;
}

GapReport check_gap(const CoefficientField& field, const SampleConfig& cfg)
{
  const TriMesh mesh = build_mesh(cfg.m);
  if (!compatible(mesh, field)) throw std::invalid_argument("mesh does not resolve the field's material regions");
  const PencilAssembler plan(mesh, field, cfg.s);
  SolverConfig solver = cfg.solver;
  solver.n_pairs = 2;

  GapReport report;
  report.samples = cfg.n_samples;
  report.lambda1.assign(std::size_t(cfg.n_samples), 0.0);
  report.lambda2.assign(std::size_t(cfg.n_samples), 0.0);
  run_parallel(cfg.n_samples, cfg.threads, [&]() {
    return [&, worker = std::make_shared<PencilWorker>(plan, solver)](int i) {
      const std::vector<EigenPair> pairs = (*worker)(sample_parameter(cfg.seed, i, cfg.s));
      report.lambda1[i] = pairs[0].lambda;
      report.lambda2[i] = pairs[1].lambda;
    };
  });

  report.min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cfg.n_samples; ++i) {
    const double gap = report.lambda2[i] - report.lambda1[i];
    if (gap < report.min_gap) {
      report.min_gap = gap;
      report.argmin = sample_parameter(cfg.seed, i, cfg.s);
    }
  }
  return report;
}

DerivProfile fd_derivative_profile(const CoefficientField& field, int m, const ParamVector& y,
                                   const std::vector<int>& j_list, double step, const SolverConfig& solver)
{
  if (!(step >= 1e-6 && step <= 1e-3)) throw std::invalid_argument("FD step must lie in [1e-6, 1e-3]");
  const int s = int(y.size());
  check_param(y);
  for (int j : j_list) {
    if (j < 1 || j > s) throw std::invalid_argument("probe coordinate " + std::to_string(j) + " outside 1..s");
    if (std::abs(y[j - 1]) + step > 0.5)
      throw std::invalid_argument("y_" + std::to_string(j) + " lies within one FD step of the boundary");
  }

  const TriMesh mesh = build_mesh(m);
  const PencilAssembler plan(mesh, field, s);
  SolverConfig cfg = solver;
  cfg.n_pairs = 1;
  PencilWorker worker(plan, cfg);

  DerivProfile profile;
  profile.lambda = worker(y).front().lambda;
  if (!(step * step * std::abs(profile.lambda) > 100.0 * cfg.tol))
    throw std::invalid_argument("FD step too small for the solver tolerance");
  // eigenvalue accuracy tol |lambda| divided by the FD stencil width
  profile.noise_floor = 10.0 * cfg.tol * std::abs(profile.lambda) / step;

  for (int j : j_list) {
    ParamVector yp = y, ym = y;
    yp[j - 1] += step;
    ym[j - 1] -= step;
    DerivProbe probe;
    probe.j = j;
    probe.step = step;
    probe.fd_value = (worker(yp).front().lambda - worker(ym).front().lambda) / (2.0 * step);
    probe.norm = std::max(field.basis_norm(Which::a, j), field.basis_norm(Which::b, j));
    profile.probes.push_back(probe);
  }

  for (const DerivProbe& p : profile.probes)
    if (p.j <= 3 && p.norm > 0.0) profile.K = std::max(profile.K, std::abs(p.fd_value) / p.norm);
  for (const DerivProbe& p : profile.probes)
    if (!(std::abs(p.fd_value) <= profile.K * p.norm + profile.noise_floor)) profile.failures.push_back(p.j);
  return profile;
}

FeChainReport fe_from_above(const CoefficientField& field, const ParamVector& y, const std::vector<int>& m_list,
                            int m_ref, const SolverConfig& solver)
{
  for (std::size_t i = 1; i < m_list.size(); ++i)
    if (m_list[i] <= m_list[i - 1]) throw std::invalid_argument("m_list must be strictly increasing");
  if (!m_list.empty() && m_ref <= m_list.back()) throw std::invalid_argument("m_ref must exceed every m in the list");

  SolverConfig cfg = solver;
  cfg.n_pairs = 1;
  const auto lambda_at = [&](int m) {
    const TriMesh mesh = build_mesh(m);
    if (!compatible(mesh, field)) throw std::invalid_argument("mesh does not resolve the field's material regions");
    const PencilAssembler plan(mesh, field, int(y.size()));
    PencilWorker worker(plan, cfg);
    return worker(y).front().lambda;
  };

  FeChainReport report;
  report.m = m_list;
  report.m_ref = m_ref;
  report.reference = lambda_at(m_ref);
  const double allowance = 10.0 * cfg.tol * std::abs(report.reference);
  for (int m : m_list) report.lambda.push_back(lambda_at(m));
  for (std::size_t i = 0; i < report.lambda.size(); ++i) {
    if (i > 0 && report.lambda[i] > report.lambda[i - 1] + allowance) report.monotone = false;
    if (report.lambda[i] < report.reference - allowance) report.above_reference = false;
  }
  return report;
}

void write_report(std::ostream& os, const BoundsReport& r)
{
  os << "check_bounds: ";
  if (r.skipped) {
    os << "SKIPPED (" << r.notice << ")\n";
    return;
  }
  const auto [lo, hi] = std::minmax_element(r.lambda.begin(), r.lambda.end());
  os << r.lambda.size() << " samples, interval [" << r.lower << ", " << r.upper << " + " << r.slack << "]";
  if (!r.lambda.empty()) os << ", observed [" << *lo << ", " << *hi << "]";
  os << ", violations " << r.violations << ": " << verdict(r.passed()) << '\n';
}

void write_report(std::ostream& os, const GapReport& r)
{
  os << "check_gap: " << r.samples << " samples, min gap " << r.min_gap << ": " << verdict(r.passed()) << '\n';
}

void write_report(std::ostream& os, const DerivProfile& r)
{
  os << "fd_derivative_profile: lambda " << r.lambda << ", K " << r.K << ", noise floor " << r.noise_floor << '\n';
  for (const DerivProbe& p : r.probes)
    os << "  j = " << p.j << ": fd = " << p.fd_value << ", norm = " << p.norm << ", bound = " << r.K * p.norm + r.noise_floor
       << '\n';
  os << "fd_derivative_profile: " << verdict(r.passed()) << '\n';
}

void write_report(std::ostream& os, const FeChainReport& r)
{
  os << "fe_from_above:";
  for (std::size_t i = 0; i < r.m.size(); ++i) os << " m=" << r.m[i] << ":" << r.lambda[i];
  os << " ref m=" << r.m_ref << ":" << r.reference << ": " << verdict(r.passed()) << '\n';
}

void write_samples_csv(std::ostream& os, const BoundsReport& bounds, const GapReport& gap)
{
  const std::size_t n = std::max(bounds.lambda.size(), gap.lambda1.size());
  const auto cell = [](const std::vector<double>& v, std::size_t i) {
    if (i >= v.size()) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    return std::string(buf);
  };
  os << "sample,bounds_lambda1,gap_lambda1,gap_lambda2\n";
  for (std::size_t i = 0; i < n; ++i)
    os << i << ',' << cell(bounds.lambda, i) << ',' << cell(gap.lambda1, i) << ',' << cell(gap.lambda2, i) << '\n';
}

}  // namespace qmcev
