// SPDX-License-Identifier: Apache-2.0

#include "qmcev/coeff.hpp"

#include "qmcev/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qmcev
{

namespace
{

constexpr double pi = std::numbers::pi;
constexpr double min_admissible_decay = 4.0 / 3.0;

void check_decay(double q)
{
  // 1e-12 leeway so that a decimal "1.3333333333333333" is accepted for 4/3.
  if (!std::isfinite(q) || q < min_admissible_decay - 1e-12)
    throw std::invalid_argument("decay exponent must be >= 4/3");
}

double decay_factor(int k, double q) { return 1.0 / (1.0 + std::pow(double(k) * pi, q)); }

bool in_closed(double t, double lo, double hi) { return t >= lo && t <= hi; }

}  // namespace

void check_param(const ParamRef& y)
{
  if (y.size() < 1) throw std::invalid_argument("parameter vector must have s >= 1");
  for (Eigen::Index j = 0; j < y.size(); ++j)
    if (!(std::abs(y[j]) <= 0.5))
      throw std::invalid_argument("parameter y_" + std::to_string(j + 1) + " outside [-1/2, 1/2]");
}

bool in_fuel(const Point& x)
{
  const auto band = [](double t) {
    return in_closed(t, 1.0 / 8.0, 3.0 / 8.0) || in_closed(t, 5.0 / 8.0, 7.0 / 8.0);
  };
  return band(x.x()) && band(x.y());
}

CoefficientField CoefficientField::constant_laplace() { return {Family::ConstantLaplace, {0, 0, 0, 0}}; }

CoefficientField CoefficientField::problem1(double q)
{
  check_decay(q);
  return {Family::Problem1, {q, q, q, q}};
}

CoefficientField CoefficientField::problem2(double q_a, double q_a_mod, double q_b, double q_b_mod)
{
  for (double q : {q_a, q_a_mod, q_b, q_b_mod}) check_decay(q);
  return {Family::Problem2, {q_a, q_a_mod, q_b, q_b_mod}};
}

double CoefficientField::min_decay() const
{
  if (family_ == Family::ConstantLaplace) return 0.0;
  return *std::min_element(decays_.begin(), decays_.end());
}

std::string CoefficientField::name() const
{
  std::ostringstream os;
  os.precision(17);
  switch (family_) {
  case Family::ConstantLaplace: return "constant";
  case Family::Problem1: os << "problem1(q=" << decays_[0] << ")"; break;
  case Family::Problem2:
    os << "problem2(q_a=" << decays_[0] << ",q_a_mod=" << decays_[1] << ",q_b=" << decays_[2]
       << ",q_b_mod=" << decays_[3] << ")";
    break;
  }
  return os.str();
}

bool CoefficientField::is_parametric(Which which) const
{
  switch (family_) {
  case Family::ConstantLaplace: return false;
  case Family::Problem1: return which == Which::a;
  case Family::Problem2: return true;
  }
  return false;
}

double CoefficientField::mean(Which which, Region region) const
{
  const bool fuel = region == Region::fuel;
  switch (family_) {
  case Family::ConstantLaplace:
  case Family::Problem1:
    return which == Which::b ? 0.0 : 1.0;
  case Family::Problem2:
    switch (which) {
    case Which::a: return fuel ? sigma_a : sigma_a_mod;
    case Which::b: return fuel ? sigma_b : sigma_b_mod;
    case Which::c: return fuel ? sigma_c : 0.0;
    }
  }
  throw std::logic_error("unknown coefficient family");
}

double CoefficientField::basis(Which which, int j, const Point& x, Region region) const
{
  return basis_weight(which, j, region) * wave_x(j, x.x()) * wave_y(j, x.y());
}

double CoefficientField::basis_weight(Which which, int j, Region region) const
{
  if (j < 1) throw std::invalid_argument("basis index must be >= 1");
  switch (family_) {
  case Family::ConstantLaplace: return 0.0;
  case Family::Problem1: return which == Which::a ? decay_factor(j, decays_[0]) : 0.0;
  case Family::Problem2: {
    // odd j: fuel wave w_{(j+1)/2}; even j: moderator wave w'_{j/2}
    const bool odd = j % 2 == 1;
    if (odd != (region == Region::fuel)) return 0.0;
    return basis_norm(which, j);
  }
  }
  throw std::logic_error("unknown coefficient family");
}

double CoefficientField::wave_x(int j, double x1) const
{
  switch (family_) {
  case Family::ConstantLaplace: return 0.0;
  case Family::Problem1: return std::sin(j * pi * x1);
  case Family::Problem2: return std::sin(8.0 * ((j + 1) / 2) * pi * x1);
  }
  throw std::logic_error("unknown coefficient family");
}

double CoefficientField::wave_y(int j, double x2) const
{
  switch (family_) {
  case Family::ConstantLaplace: return 0.0;
  case Family::Problem1: return std::sin((j + 1) * pi * x2);
  case Family::Problem2: return std::sin(8.0 * ((j + 1) / 2 + 1) * pi * x2);
  }
  throw std::logic_error("unknown coefficient family");
}

double CoefficientField::eval(Which which, const Point& x, const ParamRef& y) const
{
  return eval(which, x, y, region(x));
}

double CoefficientField::eval(Which which, const Point& x, const ParamRef& y, Region region) const
{
  check_param(y);
  double v = mean(which, region);
  if (!is_parametric(which)) return v;
  for (Eigen::Index j = 0; j < y.size(); ++j)
    if (y[j] != 0.0) v += y[j] * basis(which, int(j) + 1, x, region);
  return v;
}

double CoefficientField::basis_norm(Which which, int j) const
{
  if (j < 1) throw std::invalid_argument("basis index must be >= 1");
  switch (family_) {
  case Family::ConstantLaplace: return 0.0;
  case Family::Problem1: return which == Which::a ? decay_factor(j, decays_[0]) : 0.0;
  case Family::Problem2: {
    const bool odd = j % 2 == 1;
    const int k = odd ? (j + 1) / 2 : j / 2;
    switch (which) {
    case Which::a: return odd ? sigma_a * decay_factor(k, decays_[0]) : sigma_a_mod * decay_factor(k, decays_[1]);
    case Which::b: return odd ? sigma_b * decay_factor(k, decays_[2]) : sigma_b_mod * decay_factor(k, decays_[3]);
    case Which::c: return odd ? sigma_c * decay_factor(k, q_c) : 0.0;
    }
  }
  }
  throw std::logic_error("unknown coefficient family");
}

UniformBounds CoefficientField::uniform_bounds() const
{
  switch (family_) {
  case Family::ConstantLaplace: return {1.0, 1.0};
  case Family::Problem1: {
    const double q = decays_[0];
    const double r = zeta(q) / std::pow(pi, q);
    return {1.0 - r, 1.0 + r};
  }
  case Family::Problem2: {
    // Coarse bound; the lower value is vacuous (<= 0) for decays near 4/3.
    const double q = min_decay();
    const double r = zeta(q) * std::pow(2.0 / pi, q);
    return {sigma_a * (1.0 - r), sigma_c * (1.0 + r)};
  }
  }
  throw std::logic_error("unknown coefficient family");
}

double eval_coeff(const CoefficientField& field, Which which, const Point& x, const ParamRef& y)
{
  return field.eval(which, x, y);
}

double basis_norm(const CoefficientField& field, Which which, int j) { return field.basis_norm(which, j); }

UniformBounds uniform_bounds(const CoefficientField& field) { return field.uniform_bounds(); }

}  // namespace qmcev
