#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace spagg {

// SplitMix64 mixing step. Used to derive independent child seeds from a
// (base seed, job index) pair so parallel jobs get uncorrelated streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

// The std:: distributions are implementation-defined, so sampling goes
// through these helpers to keep results reproducible across toolchains.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n) via rejection.
inline int uniform_int(std::mt19937_64& rng, int n) {
  const auto un = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return static_cast<int>(v % un);
}

// Standard normal via Box-Muller; exactly two uniforms per call.
inline double normal(std::mt19937_64& rng) {
  constexpr double two_pi = 6.283185307179586476925287;
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace spagg
