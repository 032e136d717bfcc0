#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

#include "finsler/vec.hpp"

namespace finsler {

/// Deterministic unit directions in R^n.
///
/// n = 1 alternates +1 and -1, n = 2 uses equally spaced angles, n = 3 a
/// Fibonacci sphere, and n > 3 normalized Halton points mapped to [-1, 1]^n.
inline std::vector<Vec> unit_directions(std::size_t n, std::size_t count) {
  std::vector<Vec> dirs;
  dirs.reserve(count);
  if (n == 0) throw std::invalid_argument("unit_directions: n must be positive");
  if (n == 1) {
    for (std::size_t i = 0; i < count; ++i) dirs.push_back({i % 2 == 0 ? 1.0 : -1.0});
    return dirs;
  }
  if (n == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      const double a = 2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / count;
      dirs.push_back({std::cos(a), std::sin(a)});
    }
    return dirs;
  }
  if (n == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * static_cast<double>(i);
      dirs.push_back({r * std::cos(a), r * std::sin(a), z});
    }
    return dirs;
  }
  static constexpr std::array<int, 16> primes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  if (n > primes.size()) throw std::invalid_argument("unit_directions: dimension too large");
  auto radical_inverse = [](std::uint64_t i, int base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
      f /= base;
      r += f * static_cast<double>(i % base);
      i /= base;
    }
    return r;
  };
  for (std::uint64_t i = 1; dirs.size() < count; ++i) {
    Vec v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = 2.0 * radical_inverse(i, primes[k]) - 1.0;
    const double len = norm(v);
    if (len < 1e-3) continue;
    for (double& c : v) c /= len;
    dirs.push_back(std::move(v));
  }
  return dirs;
}

/// Seeded sampler. std::mt19937_64 is fully specified by the standard and the
/// conversions below are explicit, so sample sequences are identical across
/// platforms for a given seed.
class SeededSampler {
 public:
  explicit SeededSampler(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vec direction(std::size_t n) {
    Vec v(n);
    double len = 0.0;
    while (len < 1e-12) {
      for (double& c : v) c = normal();
      len = norm(v);
    }
    for (double& c : v) c /= len;
    return v;
  }

  /// Uniform in the open ball of radius r.
  Vec in_ball(std::size_t n, double r) {
    Vec v = direction(n);
    const double s = r * std::pow(uniform(), 1.0 / static_cast<double>(n));
    for (double& c : v) c *= s;
    return v;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace finsler
