// SPDX-License-Identifier: Apache-2.0

#ifndef QMCEV_LATTICE_HPP
#define QMCEV_LATTICE_HPP

#include "qmcev/coeff.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace qmcev
{

/// Rank-1 lattice generating vector for a prime number of points.
struct GeneratingVector
{
  std::uint64_t N = 0;
  std::vector<std::uint64_t> z;

  int dimension() const { return int(z.size()); }
  /// Leading `s` components (the rule for the truncated problem).
  GeneratingVector truncated(int s) const;
  /// Throws std::invalid_argument unless N is prime and 1 <= z_j < N.
  void validate() const;

  friend bool operator==(const GeneratingVector&, const GeneratingVector&) = default;
};

/// Text form: `N s` on the first line, the s components on the second.
/// Lines starting with '#' are comments and are skipped when reading.
void write_generating_vector(std::ostream& os, const GeneratingVector& gen);
GeneratingVector read_generating_vector(std::istream& is);

/// Product and order dependent weights gamma_u = Gamma_|u| prod_{j in u} beta_j.
/// Orders above max_order() are treated as having zero weight.
struct PODWeights
{
  std::vector<double> order;    // order[l - 1] = Gamma_l
  std::vector<double> product;  // product[j - 1] = beta_j

  int dimension() const { return int(product.size()); }
  int max_order() const { return int(order.size()); }
  double gamma(std::span<const int> u) const;  // u holds 1-based coordinates

  /// Gamma_l = l!, orders capped at min(s, 40).
  static PODWeights pod(std::vector<double> product);
  /// Gamma_l = 1: plain product weights.
  static PODWeights product_weights(std::vector<double> product);
};

/// Exponent applied to the basis-norm sequence: 4/3 when the summability
/// exponent 1/q is at most 2/3, else 2 - 1/q.
double weight_exponent(double q);

/// Gamma_l = l!, beta_j = max(||a_j||, ||b_j||)^eta with eta from the field's
/// smallest decay.
PODWeights pod_weights_from_field(const CoefficientField& field, int s);

/// Shift-averaged squared worst-case error of the rank-1 rule in the
/// unanchored weighted Sobolev space (kernel B_2), computed with the
/// order-dependent recursion in O(s N max_order).
double worst_case_error_sq(const GeneratingVector& gen, const PODWeights& w);

struct CbcResult
{
  GeneratingVector gen;
  std::vector<double> error_sq;  // e^2 of the leading d components, d = 1..s
};

/// Component-by-component construction: z_d minimises e^2 with z_1..z_{d-1}
/// fixed. Each component scans all candidates (O(N^2) per dimension, using
/// the symmetry z ~ N - z); ties go to the smallest candidate.
CbcResult cbc_construct(std::uint64_t N, int s, const PODWeights& w);

/// Randomly shifted lattice: R shifts drawn from a counter-based generator
/// keyed by (master_seed, shift index, coordinate).
struct ShiftedLattice
{
  GeneratingVector gen;
  std::uint64_t master_seed = 0;
  int R = 1;

  Eigen::VectorXd shift(int r) const;
};

/// Points {k z / N + shift} - 1/2, k = 0..N-1, stored one per column (s x N).
Eigen::MatrixXd generate_points(const GeneratingVector& gen, const Eigen::VectorXd& shift);
Eigen::MatrixXd generate_points(const ShiftedLattice& lat, int r);

/// A-priori RMS error bound factor for the weights, valid for eta in (1/2, 1].
double rms_error_bound(const PODWeights& w, std::uint64_t N, double eta);

/// Euler totient; for a prime N this is N - 1.
std::uint64_t euler_phi(std::uint64_t n);

}  // namespace qmcev

#endif  // QMCEV_LATTICE_HPP
