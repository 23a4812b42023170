#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdm {

using Vec = std::vector<double>;

// Invalid inputs (bad specs, dimension mismatches, out-of-range ids).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal inconsistency (e.g. removing stats that were never merged in).
class InconsistencyError : public std::runtime_error {
 public:
  explicit InconsistencyError(const std::string& msg) : std::runtime_error(msg) {}
};

// Using a session outside its lifetime.
class StateError : public std::runtime_error {
 public:
  explicit StateError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double squared_distance(const Vec& a, const Vec& b) {
  if (a.size() != b.size())
    throw ValidationError("dimension mismatch: " + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()));
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return d2;
}

inline double euclidean_distance(const Vec& a, const Vec& b) {
  return std::sqrt(squared_distance(a, b));
}

// All randomness in the library flows through Rng (mt19937_64) with the
// uniform/normal draws below, so a seed pins every output bit-for-bit.
using Rng = std::mt19937_64;

// Uniform double in [0,1) from the top 53 bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Standard normal via Box-Muller; one value per call, fully specified.
inline double normal01(Rng& rng) {
  double u1;
  do {
    u1 = uniform01(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace gdm
