// SPDX-License-Identifier: Apache-2.0

#include "qmcev/numerics.hpp"

#include <array>
#include <stdexcept>

namespace qmcev
{

double zeta(double x)
{
  if (!(x > 1.0)) throw std::domain_error("zeta: argument must exceed 1");

  constexpr int n = 16;
  double head = 0.0;
  for (int k = n - 1; k >= 1; --k) head += std::pow(double(k), -x);

  // B_{2i} / (2i)!
  constexpr std::array<double, 7> coef = {
      1.0 / 6.0 / 2.0,
      -1.0 / 30.0 / 24.0,
      1.0 / 42.0 / 720.0,
      -1.0 / 30.0 / 40320.0,
      5.0 / 66.0 / 3628800.0,
      -691.0 / 2730.0 / 479001600.0,
      7.0 / 6.0 / 87178291200.0,
  };

  const double nd = n;
  double tail = std::pow(nd, 1.0 - x) / (x - 1.0) + 0.5 * std::pow(nd, -x);
  // rising factorial x (x+1) ... (x+2i-2) times n^{-x-2i+1}
  double rising = x;
  double power = std::pow(nd, -x - 1.0);
  for (std::size_t i = 0; i < coef.size(); ++i) {
    tail += coef[i] * rising * power;
    rising *= (x + 2.0 * double(i) + 1.0) * (x + 2.0 * double(i) + 2.0);
    power /= nd * nd;
  }
  return head + tail;
}

bool is_prime(std::uint64_t n)
{
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint64_t d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

std::pair<std::uint64_t, std::uint64_t> neighbouring_primes(std::uint64_t n)
{
  std::uint64_t below = 0;
  for (std::uint64_t k = n; k-- > 2;)
    if (is_prime(k)) {
      below = k;
      break;
    }
  std::uint64_t above = n + 1;
  while (!is_prime(above)) ++above;
  return {below, above};
}

}  // namespace qmcev
