// SPDX-License-Identifier: Apache-2.0

#ifndef QMCEV_RNG_HPP
#define QMCEV_RNG_HPP

#include <cstdint>

namespace qmcev
{

/// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z)
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: a pure function of (key, stream, counter), so
/// any draw can be reproduced independently of evaluation order.
constexpr std::uint64_t counter_random(std::uint64_t key, std::uint64_t stream, std::uint64_t counter)
{
  return mix64(mix64(mix64(key) ^ stream) ^ mix64(counter + 0x632be59bd9b4e019ULL));
}

/// Uniform double in [0, 1) with 53 random bits.
constexpr double uniform01(std::uint64_t key, std::uint64_t stream, std::uint64_t counter)
{
  return double(counter_random(key, stream, counter) >> 11) * 0x1.0p-53;
}

}  // namespace qmcev

#endif  // QMCEV_RNG_HPP
