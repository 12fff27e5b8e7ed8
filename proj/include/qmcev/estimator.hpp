// SPDX-License-Identifier: Apache-2.0

#ifndef QMCEV_ESTIMATOR_HPP
#define QMCEV_ESTIMATOR_HPP

#include "qmcev/coeff.hpp"
#include "qmcev/eig.hpp"
#include "qmcev/lattice.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace qmcev
{

enum class Quantity
{
  eigenvalue,  // lambda_1
  functional   // mean of u_1 over [1/8, 3/8]^2
};

std::string to_string(Quantity q);
Quantity quantity_from_string(const std::string& name);

struct RunConfig
{
  CoefficientField field = CoefficientField::constant_laplace();
  int s = 1;
  int m = 8;
  std::uint64_t N = 31;
  int R = 8;
  std::uint64_t master_seed = 0;
  Quantity quantity = Quantity::eigenvalue;
  int threads = 1;
  SolverConfig solver;

  /// Throws std::invalid_argument on a non-prime N, R < 1, s < 1, threads < 1
  /// or a mesh that does not resolve the field.
  void validate() const;
};

struct SolverStats
{
  long long solves = 0;
  int max_solves = 0;
  double max_residual = 0.0;

  void merge(const SolverStats& other);
};

struct RunResult
{
  std::vector<double> per_shift;
  double mean = 0.0;
  double rms = 0.0;              // NaN for a single shift
  double single_rule_rms = 0.0;  // rms * sqrt(R)
  double wall_time = 0.0;        // seconds
  long long evaluations = 0;
  SolverStats solver;
};

/// Function of y in [-1/2, 1/2]^s. Instances are used by one thread at a time
/// and may keep scratch state between calls.
class Integrand
{
public:
  virtual ~Integrand() = default;
  virtual double operator()(const ParamRef& y) = 0;
  virtual SolverStats stats() const { return {}; }
};

/// Creates one integrand per worker thread.
using IntegrandFactory = std::function<std::unique_ptr<Integrand>()>;
/// Builds a factory for a run configuration (studies vary s or m per row).
using IntegrandBuilder = std::function<IntegrandFactory(const RunConfig&)>;

/// The eigenvalue or island functional of the discretised problem. The mesh
/// and assembly plan are built once and shared by all instances.
IntegrandFactory eigen_integrand_factory(const RunConfig& cfg);
/// Wraps a thread-safe plain function of y.
IntegrandFactory function_integrand_factory(std::function<double(const ParamRef&)> f);

double evaluate_integrand(const RunConfig& cfg, const ParamRef& y);

/// Integrand values at the columns of `points`, by column index.
std::vector<double> evaluate_points(const IntegrandFactory& factory, const Eigen::MatrixXd& points, int threads,
                                    SolverStats* stats = nullptr);

/// Mean, rms and single-rule rms from per-shift estimates.
void summarize(RunResult& result);

/// R-shift randomly shifted lattice estimate with shifts keyed by cfg.master_seed.
RunResult qmc_estimate(const RunConfig& cfg, const GeneratingVector& gen);
RunResult qmc_estimate(const RunConfig& cfg, const GeneratingVector& gen, const IntegrandFactory& factory);

/// Plain Monte Carlo with the same budget: R batches of N uniform samples.
RunResult mc_estimate(const RunConfig& cfg);
RunResult mc_estimate(const RunConfig& cfg, const IntegrandFactory& factory);

struct StudyRow
{
  std::string var;  // "s", "h" or "N"
  double value = 0.0;
  double error = 0.0;
  double mean = 0.0;
  double reference = 0.0;  // NaN when the error is a sampling estimate
};

struct StudyResult
{
  std::string kind;
  std::vector<StudyRow> rows;
  double rate = 0.0;       // slope of log error against log value
  double tail_rate = 0.0;  // same over the last five rows, NaN with fewer
  std::string note;        // set when the data admit no fit
  double wall_time = 0.0;
  SolverStats solver;
};

/// Ordinary least-squares slope of log err against log x. Throws
/// std::invalid_argument with fewer than 3 points or a nonpositive value.
double fit_rate(std::span<const double> x, std::span<const double> err);

/// |Q_s - Q_{s_ref}| with one generating vector built at s_ref and truncated,
/// and a single shift shared by all s.
StudyResult truncation_study(const RunConfig& cfg, const std::vector<int>& s_list, int s_ref,
                             const IntegrandBuilder& builder = eigen_integrand_factory);

/// |Q_h - Q_{h_ref}| at fixed s, N and a single shift.
StudyResult fe_study(const RunConfig& cfg, const std::vector<int>& m_list, int m_ref,
                     const IntegrandBuilder& builder = eigen_integrand_factory);

/// Single-rule RMS against N with a fresh generating vector per N.
StudyResult qmc_convergence_study(const RunConfig& cfg, const std::vector<std::uint64_t>& N_list,
                                  const IntegrandBuilder& builder = eigen_integrand_factory);

/// Single-batch RMS of plain Monte Carlo against N.
StudyResult mc_convergence_study(const RunConfig& cfg, const std::vector<std::uint64_t>& N_list,
                                 const IntegrandBuilder& builder = eigen_integrand_factory);

/// CSV with `# ` comment lines first, then `var,value,error,mean,reference,seed`.
void write_study_csv(std::ostream& os, const StudyResult& study, std::uint64_t seed,
                     const std::vector<std::string>& comments = {});

}  // namespace qmcev

#endif  // QMCEV_ESTIMATOR_HPP
