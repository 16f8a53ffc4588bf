#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace framekit {

// Deterministic random source. std::mt19937_64 produces a portable bit
// stream; the distribution helpers below avoid std::*_distribution, whose
// output is implementation-defined, so that seeded runs are byte-identical
// across standard libraries.
class rng {
 public:
  explicit rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0,1) with 53 bits of mantissa.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  std::complex<double> complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re, im};
  }

  // Draws an index with the given (normalized) probabilities.
  std::size_t category(const std::vector<double>& probabilities) {
    const double u = uniform();
    double cumulative = 0.0;
    for (std::size_t k = 0; k + 1 < probabilities.size(); ++k) {
      cumulative += probabilities[k];
      if (u < cumulative) return k;
    }
    return probabilities.empty() ? 0 : probabilities.size() - 1;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace framekit
