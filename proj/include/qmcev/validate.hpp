// SPDX-License-Identifier: Apache-2.0

#ifndef QMCEV_VALIDATE_HPP
#define QMCEV_VALIDATE_HPP

#include "qmcev/coeff.hpp"
#include "qmcev/eig.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qmcev
{

/// Common sampling setup for the checks: y is i.i.d. uniform on [-1/2, 1/2]^s.
struct SampleConfig
{
  int m = 64;
  int s = 64;
  int n_samples = 100;
  std::uint64_t seed = 0;
  int threads = 1;
  SolverConfig solver;
};

/// Sample y_i (i = 0, 1, ...) of a check; identical across checks with the same seed.
ParamVector sample_parameter(std::uint64_t seed, int i, int s);

struct BoundsReport
{
  bool skipped = false;
  std::string notice;
  double chi1 = 0.0;  // 2 pi^2
  double lower = 0.0;
  double upper = 0.0;
  double slack = 0.0;  // 10 h^2 upper
  std::vector<double> lambda;
  int violations = 0;

  bool passed() const { return !skipped && violations == 0; }
};

/// (a_min / a_max) chi1 <= lambda_1,h(y) <= (a_max / a_min)(chi1 + 1) + slack.
/// Fields without a positive uniform lower bound on a are skipped with a notice.
BoundsReport check_bounds(const CoefficientField& field, const SampleConfig& cfg);

struct GapReport
{
  int samples = 0;
  double min_gap = 0.0;
  ParamVector argmin;
  std::vector<double> lambda1;
  std::vector<double> lambda2;

  bool passed() const { return samples > 0 && min_gap > 0.0; }
};

/// lambda_2 - lambda_1 over the samples, with the two-pair solver.
GapReport check_gap(const CoefficientField& field, const SampleConfig& cfg);

struct DerivProbe
{
  int j = 0;
  double fd_value = 0.0;
  double step = 0.0;
  double norm = 0.0;  // max(||a_j||, ||b_j||)
};

struct DerivProfile
{
  std::vector<DerivProbe> probes;
  double lambda = 0.0;
  double K = 0.0;            // max |fd_j| / norm_j over j <= 3
  double noise_floor = 0.0;  // FD resolution implied by the solver tolerance
  std::vector<int> failures;

  bool passed() const { return failures.empty(); }
};

/// Central differences of lambda_1 in the coordinates j_list (1-based) and the
/// decay-shape check |fd_j| <= K norm_j + noise_floor for every probed j.
/// Throws std::invalid_argument for a step outside [1e-6, 1e-3], a point
/// within one step of the boundary, or a step too small for the solver tolerance.
DerivProfile fd_derivative_profile(const CoefficientField& field, int m, const ParamVector& y,
                                   const std::vector<int>& j_list, double step = 1e-4,
                                   const SolverConfig& solver = {});

struct FeChainReport
{
  std::vector<int> m;
  std::vector<double> lambda;
  double reference = 0.0;
  int m_ref = 0;
  bool monotone = true;
  bool above_reference = true;

  bool passed() const { return monotone && above_reference; }
};

/// lambda_1,h(y) nonincreasing along m_list and above the m_ref value up to the solver tolerance.
FeChainReport fe_from_above(const CoefficientField& field, const ParamVector& y, const std::vector<int>& m_list,
                            int m_ref, const SolverConfig& solver = {});

/// Plain-text summaries, one check per block, each ending in PASS or FAIL.
void write_report(std::ostream& os, const BoundsReport& r);
void write_report(std::ostream& os, const GapReport& r);
void write_report(std::ostream& os, const DerivProfile& r);
void write_report(std::ostream& os, const FeChainReport& r);

/// Per-sample CSV `sample,bounds_lambda1,gap_lambda1,gap_lambda2`; missing cells are empty.
void write_samples_csv(std::ostream& os, const BoundsReport& bounds, const GapReport& gap);

}  // namespace qmcev

#endif  // QMCEV_VALIDATE_HPP
