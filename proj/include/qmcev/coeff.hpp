// SPDX-License-Identifier: Apache-2.0

#ifndef QMCEV_COEFF_HPP
#define QMCEV_COEFF_HPP

#include <Eigen/Core>

#include <array>
#include <string>

namespace qmcev
{

using Point = Eigen::Vector2d;

/// Parameter vector y in [-1/2, 1/2]^s. Entries beyond s are implicitly 0.
using ParamVector = Eigen::VectorXd;
using ParamRef = Eigen::Ref<const Eigen::VectorXd>;

/// Throws std::invalid_argument unless s >= 1 and every entry is in [-1/2, 1/2].
void check_param(const ParamRef& y);

enum class Family
{
  ConstantLaplace,
  Problem1,
  Problem2,
};

enum class Which
{
  a,
  b,
  c,
};

/// Fuel region D_f (four closed squares) versus the surrounding moderator.
enum class Region
{
  fuel,
  moderator,
};

/// Closed-union membership test for D_f; boundary points count as fuel.
bool in_fuel(const Point& x);

struct UniformBounds
{
  double a_min;
  double a_max;
};

/// Affine parametric coefficients a, b, c = c0(x) + sum_j y_j c_j(x).
///
/// ConstantLaplace: a = 1, b = 0, c = 1.
/// Problem1: a = 1 + sum_j y_j sin(j pi x1) sin((j+1) pi x2) / (1 + (j pi)^q),
///           b = 0, c = 1.
/// Problem2: piecewise fuel/moderator expansions built from the trigonometric
///           families w_k, w'_k whose zeros align with the island boundaries.
class CoefficientField
{
public:
  static CoefficientField constant_laplace();
  static CoefficientField problem1(double q);
  /// Decays for a in fuel, a in moderator, b in fuel, b in moderator.
  static CoefficientField problem2(double q_a, double q_a_mod, double q_b, double q_b_mod);

  /// Fixed cross-section constants of the reactor model.
  static constexpr double sigma_a = 0.01;
  static constexpr double sigma_a_mod = 0.011;
  static constexpr double sigma_b = 2.0;
  static constexpr double sigma_b_mod = 0.3;
  static constexpr double sigma_c = 2.5;
  /// Decay used by every fission basis function.
  static constexpr double q_c = 2.0;

  Family family() const { return family_; }
  const std::array<double, 4>& decays() const { return decays_; }
  /// Smallest decay exponent (0 for ConstantLaplace).
  double min_decay() const;
  std::string name() const;

  /// Whether the coefficient actually depends on y.
  bool is_parametric(Which which) const;

  Region region(const Point& x) const { return in_fuel(x) ? Region::fuel : Region::moderator; }

  /// Mean term a_0(x) (resp. b_0, c_0) inside a known region.
  double mean(Which which, Region region) const;
  /// j-th basis function (j >= 1) at x inside a known region.
  double basis(Which which, int j, const Point& x, Region region) const;

  /// Every basis function is a product of one-dimensional waves:
  /// basis(which, j, x, region) = basis_weight(which, j, region) * wave_x(j, x1) * wave_y(j, x2).
  double basis_weight(Which which, int j, Region region) const;
  double wave_x(int j, double x1) const;
  double wave_y(int j, double x2) const;

  /// Full evaluation a_0(x) + sum_{j<=s} y_j a_j(x) with the region taken from x.
  double eval(Which which, const Point& x, const ParamRef& y) const;
  /// Same, with the material region supplied by the caller (used by
  /// assembly, where quadrature points may lie on an island boundary).
  double eval(Which which, const Point& x, const ParamRef& y, Region region) const;

  /// Closed-form sup-norm of the j-th basis function (j >= 1).
  double basis_norm(Which which, int j) const;

  UniformBounds uniform_bounds() const;

private:
  CoefficientField(Family family, std::array<double, 4> decays) : family_(family), decays_(decays) {}

  Family family_;
  std::array<double, 4> decays_;
};

/// Convenience wrappers mirroring the member functions.
double eval_coeff(const CoefficientField& field, Which which, const Point& x, const ParamRef& y);
double basis_norm(const CoefficientField& field, Which which, int j);
UniformBounds uniform_bounds(const CoefficientField& field);

}  // namespace qmcev

#endif  // QMCEV_COEFF_HPP
