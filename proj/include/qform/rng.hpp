#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace qform {

/// SplitMix64 finalizer. Used to decorrelate (seed, stream index) pairs.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using Engine = std::mt19937_64;

/// Stream splitting: trial `index` under base `seed` draws from
/// mt19937_64 seeded with splitmix64(splitmix64(seed) ^ splitmix64(index + 1)).
/// The same (seed, index) pair always reproduces the same stream, independent
/// of how many other streams were opened or in which order.
inline Engine make_stream(std::uint64_t seed, std::uint64_t index) {
  return Engine(splitmix64(splitmix64(seed) ^ splitmix64(index + 1)));
}

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
inline double uniform01(Engine& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Box-Muller on raw engine bits instead of std::normal_distribution, whose
// algorithm is implementation-defined. Keeps streams stable across stdlibs.
inline std::complex<double> complex_normal(Engine& g) {
  const double u1 = 1.0 - uniform01(g);  // (0, 1]
  const double u2 = uniform01(g);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

inline double standard_normal(Engine& g) { return complex_normal(g).real(); }

}  // namespace qform
