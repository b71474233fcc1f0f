#pragma once

#include <cmath>
#include <cstdint>

namespace selfservo::rng {

// SplitMix64 finalizer. All randomness in the project is counter-based:
// a draw is a pure function of a (seed, stream, counters...) key, so runs
// are reproducible bit-for-bit regardless of evaluation order or threads.
constexpr std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return mix(mix(a) + b);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix(mix(a, b), c);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                            std::uint64_t d) {
  return mix(mix(a, b, c), d);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                            std::uint64_t d, std::uint64_t e) {
  return mix(mix(a, b, c, d), e);
}

/// Uniform in (0, 1); never returns 0 or 1, so log() is always safe.
inline double u01(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform(std::uint64_t h, double lo, double hi) {
  return lo + (hi - lo) * u01(h);
}

/// One standard-normal draw per key (Box-Muller).
inline double normal(std::uint64_t h) {
  const double u1 = u01(mix(h, 0x8e9c5f1a2b3d4e57ULL));
  const double u2 = u01(mix(h, 0x1f2e3d4c5b6a7988ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Stream tags keep independent uses of the same seed decorrelated.
namespace stream {
inline constexpr std::uint64_t kActions = 0xA1;
inline constexpr std::uint64_t kActuation = 0xA2;
inline constexpr std::uint64_t kDecoyActions = 0xA3;
inline constexpr std::uint64_t kBrokenJoint = 0xA4;
inline constexpr std::uint64_t kPixelNoise = 0xA5;
inline constexpr std::uint64_t kJitter = 0xA6;
inline constexpr std::uint64_t kDropout = 0xA7;
inline constexpr std::uint64_t kShake = 0xA8;
inline constexpr std::uint64_t kParticleSeed = 0xA9;
inline constexpr std::uint64_t kLooseTool = 0xAA;
inline constexpr std::uint64_t kReplayNoise = 0xAB;
inline constexpr std::uint64_t kMiNoise = 0xAC;
inline constexpr std::uint64_t kMiJitter = 0xAD;
inline constexpr std::uint64_t kKmeans = 0xAE;
inline constexpr std::uint64_t kScoring = 0xAF;
inline constexpr std::uint64_t kMeasurement = 0xB0;
}  // namespace stream

}  // namespace selfservo::rng
