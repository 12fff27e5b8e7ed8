// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS/FAIL line per criterion; exit status 1 if
// any criterion fails. Arguments select a subset of criteria, e.g. `acceptance 1 2 7`.

#include "qmcev/coeff.hpp"
#include "qmcev/eig.hpp"
#include "qmcev/estimator.hpp"
#include "qmcev/fem.hpp"
#include "qmcev/lattice.hpp"
#include "qmcev/numerics.hpp"
#include "qmcev/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace qmcev;

namespace
{

// Tolerances and budgets.
constexpr double c1_order_lo = 1.9, c1_order_hi = 2.1, c1_budget = 30;
constexpr double c2_tol = 1e-13;
constexpr double c3_slope = 2.0, c3_slack = 0.2, c3_budget = 300;
constexpr double c4_slope_max = -2.5, c4_budget = 300;
constexpr double c5_slope_q2 = -0.85, c5_slope_q43 = -0.75, c5_budget = 900;
constexpr double c5_anchor = 1.4e-6, c5_anchor_factor = 10;  // q = 2, N = 251
constexpr double c6_slope = -0.5, c6_slack = 0.15, c6_ratio = 5;
constexpr double c7_tol = 1e-13, c7_budget = 10;
constexpr double c8_budget = 600;
constexpr std::uint64_t seed = 20240917;

const int threads = std::max(1u, std::thread::hardware_concurrency());

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* format, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

struct Verdict
{
  bool pass = true;
  std::string summary;
};

void note(const std::string& line)
{
  std::printf("    %s\n", line.c_str());
  std::fflush(stdout);
}

void print_study(const StudyResult& st)
{
  for (const StudyRow& row : st.rows)
    note(row.var + " = " + fmt("%-8g", row.value) + " error = " + fmt("%.4e", row.error) + "  mean = " +
         fmt("%.12g", row.mean));
  note("rate = " + fmt("%.4f", st.rate) + ", last-5 rate = " + fmt("%.4f", st.tail_rate) + ", " +
       std::to_string(st.solver.solves) + " solves, " + fmt("%.1f", st.wall_time) + " s");
}

bool within_budget(double elapsed, double budget, std::string& summary)
{
  summary += "; runtime " + fmt("%.1f", elapsed) + " s (budget " + fmt("%.0f", budget) + " s)";
  return elapsed < budget;
}

Verdict criterion1()
{
  const auto start = Clock::now();
  std::vector<double> h, err;
  bool above = true;
  for (int m : {8, 16, 32, 64}) {
    const Pencil p = assemble_pencil(build_mesh(m), CoefficientField::constant_laplace(), ParamVector::Zero(1));
    const double lambda = smallest_eigenpairs(p.A, p.M)[0].lambda;
    above = above && lambda - two_pi_squared > 0.0;
    h.push_back(1.0 / m);
    err.push_back(std::abs(lambda - two_pi_squared));
    note("m = " + std::to_string(m) + ": lambda - 2 pi^2 = " + fmt("%.6e", lambda - two_pi_squared));
  }
  const double order = fit_rate(h, err);
  Verdict v;
  v.pass = above && order >= c1_order_lo && order <= c1_order_hi;
  v.summary = std::string(above ? "all above 2 pi^2" : "NOT above 2 pi^2") + ", order " + fmt("%.4f", order) +
              " in [" + fmt("%.1f", c1_order_lo) + ", " + fmt("%.1f", c1_order_hi) + "]";
  v.pass = within_budget(seconds_since(start), c1_budget, v.summary) && v.pass;
  return v;
}

Verdict criterion2()
{
  const Pencil p = assemble_pencil(build_mesh(2), CoefficientField::constant_laplace(), ParamVector::Zero(1));
  const double a = p.A.coeff(0, 0), m = p.M.coeff(0, 0);
  const double lambda = smallest_eigenpairs(p.A, p.M)[0].lambda;
  Verdict v;
  v.pass = p.A.rows() == 1 && std::abs(a - 4.0) <= c2_tol && std::abs(m - 0.125) <= c2_tol &&
           std::abs(lambda - 32.0) <= c2_tol * 32.0;
  v.summary = "A = " + fmt("%.17g", a) + ", M = " + fmt("%.17g", m) + ", lambda = " + fmt("%.17g", lambda);
  return v;
}

Verdict criterion3()
{
  RunConfig cfg;
  cfg.field = CoefficientField::problem1(4.0 / 3.0);
  cfg.s = 32;
  cfg.N = 997;
  cfg.R = 1;
  cfg.master_seed = seed;
  cfg.threads = threads;
  const StudyResult st = fe_study(cfg, {8, 16, 32, 64}, 128);
  print_study(st);
  Verdict v;
  v.pass = std::abs(st.rate - c3_slope) <= c3_slack;
  v.summary = "FE slope " + fmt("%.4f", st.rate) + " within " + fmt("%.1f", c3_slope) + " +- " + fmt("%.1f", c3_slack);
  v.pass = within_budget(st.wall_time, c3_budget, v.summary) && v.pass;
  return v;
}

Verdict criterion4()
{
  RunConfig cfg;
  cfg.field = CoefficientField::problem1(2.0);
  cfg.m = 64;
  cfg.N = 997;
  cfg.R = 1;
  cfg.master_seed = seed;
  cfg.threads = threads;
  const StudyResult st = truncation_study(cfg, {2, 4, 8, 16, 32}, 128);
  print_study(st);
  Verdict v;
  v.pass = st.rate <= c4_slope_max;
  v.summary = "truncation slope " + fmt("%.4f", st.rate) + " <= " + fmt("%.1f", c4_slope_max);
  v.pass = within_budget(st.wall_time, c4_budget, v.summary) && v.pass;
  return v;
}

const std::vector<std::uint64_t> rate_N{251, 503, 997, 1999, 4001};

RunConfig rate_config(double q)
{
  RunConfig cfg;
  cfg.field = CoefficientField::problem1(q);
  cfg.s = 64;
  cfg.m = 64;
  cfg.R = 8;
  cfg.master_seed = seed;
  cfg.threads = threads;
  return cfg;
}

StudyResult qmc_q2;  // shared with criterion 6

Verdict criterion5()
{
  const auto start = Clock::now();
  note("q = 2");
  qmc_q2 = qmc_convergence_study(rate_config(2.0), rate_N);
  print_study(qmc_q2);
  note("q = 4/3");
  const StudyResult q43 = qmc_convergence_study(rate_config(4.0 / 3.0), rate_N);
  print_study(q43);

  const double anchor = qmc_q2.rows.front().error / std::sqrt(8.0);
  const bool anchor_ok = anchor <= c5_anchor * c5_anchor_factor && anchor >= c5_anchor / c5_anchor_factor;
  note("anchor q = 2, N = 251: rms of the 8-shift mean " + fmt("%.3e", anchor) + " vs 1.4e-6 (factor " +
       fmt("%.2f", anchor / c5_anchor) + ")");

  Verdict v;
  v.pass = qmc_q2.rate <= c5_slope_q2 && q43.rate <= c5_slope_q43 && anchor_ok;
  v.summary = "slope q=2 " + fmt("%.4f", qmc_q2.rate) + " <= " + fmt("%.2f", c5_slope_q2) + ", q=4/3 " +
              fmt("%.4f", q43.rate) + " <= " + fmt("%.2f", c5_slope_q43) + ", anchor within 10x " +
              (anchor_ok ? "yes" : "no");
  v.pass = within_budget(seconds_since(start), c5_budget, v.summary) && v.pass;
  return v;
}

Verdict criterion6()
{
  if (qmc_q2.rows.empty()) qmc_q2 = qmc_convergence_study(rate_config(2.0), rate_N);
  const StudyResult mc = mc_convergence_study(rate_config(2.0), rate_N);
  print_study(mc);
  const double ratio = mc.rows.back().error / qmc_q2.rows.back().error;
  Verdict v;
  v.pass = std::abs(mc.rate - c6_slope) <= c6_slack && ratio >= c6_ratio;
  v.summary = "MC slope " + fmt("%.4f", mc.rate) + " within " + fmt("%.1f", c6_slope) + " +- " +
              fmt("%.2f", c6_slack) + ", MC/QMC rms at N = 4001 " + fmt("%.1f", ratio) + " >= " +
              fmt("%.0f", c6_ratio) + "; runtime " + fmt("%.1f", mc.wall_time) + " s";
  return v;
}

double subset_sum(const GeneratingVector& gen, const PODWeights& w)
{
  const int s = gen.dimension();
  double total = 0.0;
  for (unsigned mask = 1; mask < (1u << s); ++mask) {
    std::vector<int> u;
    for (int j = 0; j < s; ++j)
      if (mask & (1u << j)) u.push_back(j + 1);
    double mean = 0.0;
    for (std::uint64_t k = 0; k < gen.N; ++k) {
      double prod = 1.0;
      for (int j : u) prod *= bernoulli_b2(double((k * gen.z[j - 1]) % gen.N) / double(gen.N));
      mean += prod;
    }
    total += w.gamma(u) * mean / double(gen.N);
  }
  return total;
}

Verdict criterion7()
{
  const auto start = Clock::now();
  int mismatches = 0, checks = 0;
  double worst = 0.0;
  for (std::uint64_t N : {13ull, 31ull})
    for (int s : {2, 3, 4}) {
      const PODWeights w = pod_weights_from_field(CoefficientField::problem1(2.0), s);
      const CbcResult cbc = cbc_construct(N, s, w);
      for (int d = 1; d <= s; ++d) {
        GeneratingVector trial = cbc.gen.truncated(d);
        PODWeights wd = w;
        wd.product.resize(std::size_t(d));
        double best = std::numeric_limits<double>::infinity();
        std::uint64_t arg = 0;
        for (std::uint64_t z = 1; z < N; ++z) {
          trial.z[d - 1] = z;
          const double e = subset_sum(trial, wd);
          if (e < best * (1 - 1e-12)) {
            best = e;
            arg = z;
          }
        }
        ++checks;
        if (arg != cbc.gen.z[d - 1]) ++mismatches;
      }
      const double oracle = subset_sum(cbc.gen, w);
      worst = std::max(worst, std::abs(worst_case_error_sq(cbc.gen, w) - oracle) / oracle);
    }
  Verdict v;
  v.pass = mismatches == 0 && worst <= c7_tol;
  v.summary = std::to_string(checks - mismatches) + "/" + std::to_string(checks) +
              " components match the exhaustive minimiser, recursion vs enumeration " + fmt("%.1e", worst) +
              " <= " + fmt("%.0e", c7_tol);
  v.pass = within_budget(seconds_since(start), c7_budget, v.summary) && v.pass;
  return v;
}

Verdict criterion8()
{
  const auto start = Clock::now();
  SampleConfig sample;
  sample.m = 64;
  sample.s = 64;
  sample.n_samples = 100;
  sample.seed = seed;
  sample.threads = threads;
  bool ok = true;
  std::vector<int> js;
  for (int j = 1; j <= 16; ++j) js.push_back(j);

  for (double q : {4.0 / 3.0, 2.0, 3.0}) {
    const CoefficientField field = CoefficientField::problem1(q);
    const BoundsReport bounds = check_bounds(field, sample);
    const auto [lo, hi] = std::minmax_element(bounds.lambda.begin(), bounds.lambda.end());
    note(field.name() + ": bounds [" + fmt("%.4f", bounds.lower) + ", " + fmt("%.4f", bounds.upper + bounds.slack) +
         "], observed [" + fmt("%.4f", *lo) + ", " + fmt("%.4f", *hi) + "], violations " +
         std::to_string(bounds.violations));
    ok = ok && bounds.passed();
    const GapReport gap = check_gap(field, sample);
    note(field.name() + ": min gap " + fmt("%.4f", gap.min_gap));
    ok = ok && gap.passed();
    for (int t = 0; t < 3; ++t) {
      const ParamVector y = t == 0 ? ParamVector::Zero(64)
                                   : ParamVector(sample_parameter(seed, 1000 + t, 64).cwiseMax(-0.49).cwiseMin(0.49));
      const DerivProfile profile = fd_derivative_profile(field, 64, y, js);
      note(field.name() + (t == 0 ? ": y = 0" : ": random y #" + std::to_string(t)) + ", K = " +
           fmt("%.4g", profile.K) + ", decay-shape failures " + std::to_string(profile.failures.size()));
      ok = ok && profile.passed();
    }
  }
  const CoefficientField p2 = CoefficientField::problem2(2, 2, 2, 2);
  const GapReport gap2 = check_gap(p2, sample);
  note(p2.name() + ": min gap " + fmt("%.4g", gap2.min_gap));
  ok = ok && gap2.passed();

  Verdict v;
  v.pass = ok;
  v.summary = std::string("bounds, gaps and derivative decay ") + (ok ? "hold" : "FAIL");
  v.pass = within_budget(seconds_since(start), c8_budget, v.summary) && v.pass;
  return v;
}

std::string data_section(const std::string& csv)
{
  std::istringstream in(csv);
  std::string out;
  for (std::string line; std::getline(in, line);)
    if (line.empty() || line[0] != '#') out += line + '\n';
  return out;
}

Verdict criterion9()
{
  RunConfig cfg = rate_config(2.0);
  cfg.s = 16;
  cfg.m = 16;
  cfg.R = 4;
  const std::vector<std::uint64_t> N_list{31, 61, 127};
  const auto csv = [&](const StudyResult& st) {
    std::ostringstream os;
    write_study_csv(os, st, seed, {"wall time " + fmt("%.6f", st.wall_time)});
    return os.str();
  };
  RunConfig serial = cfg;
  serial.threads = 1;
  RunConfig parallel = cfg;
  parallel.threads = std::max(2, threads);
  const std::string a = csv(qmc_convergence_study(serial, N_list));
  const std::string b = csv(qmc_convergence_study(parallel, N_list));
  const std::string c = csv(mc_convergence_study(serial, N_list));
  const std::string d = csv(mc_convergence_study(parallel, N_list));
  RunConfig tr = cfg;
  tr.R = 1;
  const std::string e = csv(truncation_study(tr, {2, 4, 8}, 16));
  const std::string f = csv(truncation_study(tr, {2, 4, 8}, 16));
  Verdict v;
  v.pass = data_section(a) == data_section(b) && data_section(c) == data_section(d) && data_section(e) == data_section(f);
  v.summary = std::string("qmc, mc and truncation reruns ") + (v.pass ? "byte-identical" : "DIFFER") +
              " (1 vs " + std::to_string(parallel.threads) + " threads)";
  return v;
}

}  // namespace

int main(int argc, char** argv)
{
  const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  std::printf("acceptance: %d worker thread(s)\n", threads);
  const auto start = Clock::now();
  int failed = 0;
  for (int i = 1; i <= int(criteria.size()); ++i) {
    if (!selected.empty() && !selected.count(i)) continue;
    std::printf("criterion %d\n", i);
    std::fflush(stdout);
    Verdict v;
    try {
      v = criteria[std::size_t(i - 1)]();
    } catch (const std::exception& e) {
      v.pass = false;
      v.summary = std::string("exception: ") + e.what();
    }
    if (!v.pass) ++failed;
    std::printf("criterion %d: %s  %s\n", i, v.pass ? "PASS" : "FAIL", v.summary.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %d failed, total runtime %.1f s\n", failed, seconds_since(start));
  return failed == 0 ? 0 : 1;
}
