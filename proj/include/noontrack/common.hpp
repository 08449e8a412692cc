#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace noontrack {

inline constexpr double kPi = std::numbers::pi;

// The coincidence fringe cos(8*theta + 2*phi) repeats with period pi/4 in the
// analyzer angle and period pi in the sample phase.
inline constexpr double kThetaPeriod = kPi / 4.0;
inline constexpr double kPhasePeriod = kPi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Reduce x into [lo, lo + period).
inline double wrap_into(double x, double lo, double period) {
  double y = std::fmod(x - lo, period);
  if (y < 0.0) y += period;
  return lo + y;
}

/// Signed representative of x modulo period, in (-period/2, period/2].
inline double wrap_signed(double x, double period) {
  return std::remainder(x, period);
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Deterministic child generator for (seed, stream, index). Distinct streams
/// decouple e.g. count statistics from visibility drift so that changing one
/// consumer never perturbs another.
inline std::mt19937_64 child_rng(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t index) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ull * (stream + 1));
  const std::uint64_t a = splitmix64(s);
  s ^= index * 0xda942042e4dd58b5ull + 0x2545f4914f6cdd1dull;
  const std::uint64_t b = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace noontrack
