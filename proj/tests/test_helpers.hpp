#pragma once

#include <cmath>
#include <vector>

#include "framekit/complex_linalg.hpp"
#include "framekit/frame_system.hpp"
#include "framekit/random.hpp"

namespace fktest {

using framekit::complex;
using framekit::cvector;
using framekit::hermitian_matrix;
using framekit::rng;

inline cvector random_vector(rng& r, std::size_t d) {
  cvector v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = r.complex_normal();
  return v;
}

inline hermitian_matrix random_hermitian(rng& r, std::size_t d) {
  std::vector<complex> entries(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    entries[i * d + i] = complex{r.normal(), 0.0};
    for (std::size_t j = i + 1; j < d; ++j) {
      const complex z = r.complex_normal();
      entries[i * d + j] = z;
      entries[j * d + i] = std::conj(z);
    }
  }
  return hermitian_matrix::from_entries(d, entries);
}

inline framekit::frame_system random_system(rng& r, std::size_t d, std::size_t m) {
  std::vector<cvector> cols;
  cols.reserve(m);
  for (std::size_t i = 0; i < m; ++i) cols.push_back(random_vector(r, d));
  return framekit::frame_system(std::move(cols));
}

// Canonical transform of a random Gaussian system: Parseval with probability 1.
inline framekit::frame_system random_parseval_frame(rng& r, std::size_t d, std::size_t m) {
  return framekit::canonical_parseval(random_system(r, d, m));
}

// Random tight frame with all vectors in the closed unit ball and the largest
// vector on the sphere; the tight constant is then automatically >= 1.
inline std::pair<framekit::frame_system, double> random_unit_ball_tight_frame(rng& r,
                                                                              std::size_t d,
                                                                              std::size_t m) {
  const auto parseval = random_parseval_frame(r, d, m);
  double max_norm = 0.0;
  for (std::size_t i = 0; i < parseval.size(); ++i)
    max_norm = std::max(max_norm, parseval.vector_at(i).norm());
  const auto tight = parseval.scaled(1.0 / max_norm);
  return {tight, 1.0 / (max_norm * max_norm)};
}

// General (non-Hermitian) product of two Hermitian matrices, row-major.
inline std::vector<complex> general_product(const hermitian_matrix& a, const hermitian_matrix& b) {
  const std::size_t d = a.dimension();
  std::vector<complex> out(d * d, complex{0.0, 0.0});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const complex aik = a.entry(i, k);
      for (std::size_t j = 0; j < d; ++j) out[i * d + j] += aik * b.entry(k, j);
    }
  return out;
}

// ||AB - BA||: the commutator of Hermitian matrices is anti-Hermitian, so
// i*(AB - BA) is Hermitian and shares the spectral norm.
inline double commutator_norm(const hermitian_matrix& a, const hermitian_matrix& b) {
  const std::size_t d = a.dimension();
  const auto ab = general_product(a, b);
  const auto ba = general_product(b, a);
  std::vector<complex> h(d * d);
  const complex unit_i{0.0, 1.0};
  for (std::size_t k = 0; k < d * d; ++k) h[k] = unit_i * (ab[k] - ba[k]);
  return framekit::operator_norm(hermitian_matrix::from_entries(d, h));
}

}  // namespace fktest
