#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "sliceeig/vecops.hpp"

// Seeded random vector generation.  Distributions are written out explicitly
// (instead of std::*_distribution) so a given seed produces the same stream on
// every standard library; reproducibility of reports depends on it.

namespace sliceeig {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0,1).
  double uniform() {
    return double(gen_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do { u1 = uniform(); } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // +1/-1 with equal probability.
  double rademacher() { return (gen_() & 1u) ? 1.0 : -1.0; }

  Vec normal_vec(int n) {
    Vec v(n);
    for (auto& x : v) x = normal();
    return v;
  }

  Vec rademacher_vec(int n) {
    Vec v(n);
    for (auto& x : v) x = rademacher();
    return v;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sliceeig
