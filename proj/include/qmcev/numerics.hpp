// SPDX-License-Identifier: Apache-2.0

#ifndef QMCEV_NUMERICS_HPP
#define QMCEV_NUMERICS_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>

namespace qmcev
{

/// Riemann zeta function for real x > 1. Direct summation of the first
/// terms followed by an Euler-Maclaurin tail; relative accuracy ~1e-15.
double zeta(double x);

bool is_prime(std::uint64_t n);

/// Largest prime below n and smallest prime above n (0 when none below).
std::pair<std::uint64_t, std::uint64_t> neighbouring_primes(std::uint64_t n);

/// Second Bernoulli polynomial, the shift-averaged kernel of the
/// unanchored Sobolev space.
template <typename Scalar>
constexpr Scalar bernoulli_b2(Scalar x)
{
  return x * x - x + Scalar(1) / Scalar(6);
}

/// Pairwise (cascade) summation in fixed index order.
template <typename Scalar>
Scalar pairwise_sum(std::span<const Scalar> v)
{
  if (v.size() <= 8) {
    Scalar s(0);
    for (const Scalar& x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline constexpr double two_pi_squared = 2.0 * std::numbers::pi * std::numbers::pi;

}  // namespace qmcev

#endif  // QMCEV_NUMERICS_HPP
