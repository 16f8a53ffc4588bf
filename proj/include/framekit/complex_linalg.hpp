#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "framekit/errors.hpp"

namespace framekit {

using complex = std::complex<double>;

inline bool is_finite(const complex& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// ---------------------------------------------------------------------------
// Dense complex vector in C^d.
// ---------------------------------------------------------------------------

class cvector {
 public:
  cvector() = default;
  explicit cvector(std::size_t dim) : entries_(dim, complex{0.0, 0.0}) {}
  cvector(std::initializer_list<complex> init) : entries_(init) {}
  explicit cvector(std::vector<complex> entries) : entries_(std::move(entries)) {}

  static cvector basis(std::size_t dim, std::size_t index) {
    cvector v(dim);
    v[index] = complex{1.0, 0.0};
    return v;
  }

  std::size_t dimension() const { return entries_.size(); }
  complex& operator[](std::size_t i) { return entries_[i]; }
  const complex& operator[](std::size_t i) const { return entries_[i]; }

  double norm_squared() const {
    double s = 0.0;
    for (const complex& z : entries_) s += std::norm(z);
    return s;
  }
  double norm() const { return std::sqrt(norm_squared()); }

  bool finite() const {
    for (const complex& z : entries_)
      if (!is_finite(z)) return false;
    return true;
  }

  cvector scaled(complex factor) const {
    cvector out(*this);
    for (complex& z : out.entries_) z *= factor;
    return out;
  }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const cvector&, const cvector&) = default;

 private:
  std::vector<complex> entries_;
};

inline complex inner_product(const cvector& f, const cvector& g) {
  // <f, g> = sum_i f_i * conj(g_i), linear in the first argument.
  if (f.dimension() != g.dimension())
    throw shape_error("inner_product: dimension mismatch");
  complex s{0.0, 0.0};
  for (std::size_t i = 0; i < f.dimension(); ++i) s += f[i] * std::conj(g[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Dense Hermitian d x d matrix.  Construction paths keep the representation
// exactly Hermitian: diagonals real, (j,i) = conj((i,j)).
// ---------------------------------------------------------------------------

class hermitian_matrix {
 public:
  hermitian_matrix() = default;
  explicit hermitian_matrix(std::size_t dim)
      : dim_(dim), entries_(dim * dim, complex{0.0, 0.0}) {}

  static hermitian_matrix identity(std::size_t dim) {
    hermitian_matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.entry_ref(i, i) = 1.0;
    return m;
  }

  static hermitian_matrix diagonal(const std::vector<double>& values) {
    hermitian_matrix m(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m.entry_ref(i, i) = values[i];
    return m;
  }

  // Validates conjugate symmetry within 1e-12 relative to the largest entry
  // magnitude, then symmetrizes so downstream spectral code sees an exactly
  // Hermitian matrix.
  static hermitian_matrix from_entries(std::size_t dim, const std::vector<complex>& row_major) {
    if (row_major.size() != dim * dim)
      throw shape_error("hermitian_matrix: entry count does not match dimension");
    double max_mag = 0.0;
    for (const complex& z : row_major) {
      if (!is_finite(z)) throw invalid_input_error("hermitian_matrix: non-finite entry");
      max_mag = std::max(max_mag, std::abs(z));
    }
    const double tol = 1e-12 * std::max(1.0, max_mag);
    hermitian_matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = i; j < dim; ++j) {
        const complex a = row_major[i * dim + j];
        const complex b = row_major[j * dim + i];
        if (std::abs(a - std::conj(b)) > tol)
          throw shape_error("hermitian_matrix: input is not Hermitian within tolerance");
        if (i == j) {
          m.entry_ref(i, i) = complex{a.real(), 0.0};
        } else {
          const complex avg = 0.5 * (a + std::conj(b));
          m.entry_ref(i, j) = avg;
          m.entry_ref(j, i) = std::conj(avg);
        }
      }
    }
    return m;
  }

  std::size_t dimension() const { return dim_; }

  const complex& entry(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }

  // Accumulates weight * v v^*; the diagonal is written as an exact real.
  void add_scaled_outer(const cvector& v, double weight) {
    if (v.dimension() != dim_) throw shape_error("add_scaled_outer: dimension mismatch");
    if (weight == 0.0) return;
    for (std::size_t i = 0; i < dim_; ++i) {
      entry_ref(i, i) += weight * std::norm(v[i]);
      for (std::size_t j = i + 1; j < dim_; ++j) {
        const complex t = weight * (v[i] * std::conj(v[j]));
        entry_ref(i, j) += t;
        entry_ref(j, i) += std::conj(t);
      }
    }
  }

  hermitian_matrix& operator+=(const hermitian_matrix& other) {
    require_same_dim(other);
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += other.entries_[k];
    return *this;
  }
  hermitian_matrix& operator-=(const hermitian_matrix& other) {
    require_same_dim(other);
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= other.entries_[k];
    return *this;
  }
  hermitian_matrix& operator*=(double factor) {
    for (complex& z : entries_) z *= factor;
    return *this;
  }

  friend hermitian_matrix operator+(hermitian_matrix a, const hermitian_matrix& b) { return a += b; }
  friend hermitian_matrix operator-(hermitian_matrix a, const hermitian_matrix& b) { return a -= b; }
  friend hermitian_matrix operator*(double f, hermitian_matrix m) { return m *= f; }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += entry(i, i).real();
    return t;
  }

  double max_abs_entry() const {
    double m = 0.0;
    for (const complex& z : entries_) m = std::max(m, std::abs(z));
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const complex& z : entries_) s += std::norm(z);
    return std::sqrt(s);
  }

  cvector apply(const cvector& v) const {
    if (v.dimension() != dim_) throw shape_error("apply: dimension mismatch");
    cvector out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      complex s{0.0, 0.0};
      for (std::size_t j = 0; j < dim_; ++j) s += entry(i, j) * v[j];
      out[i] = s;
    }
    return out;
  }

  friend bool operator==(const hermitian_matrix&, const hermitian_matrix&) = default;

 private:
  void require_same_dim(const hermitian_matrix& other) const {
    if (other.dim_ != dim_) throw shape_error("hermitian_matrix: dimension mismatch");
  }
  complex& entry_ref(std::size_t i, std::size_t j) { return entries_[i * dim_ + j]; }

  std::size_t dim_ = 0;
  std::vector<complex> entries_;
};

// phi phi^*: rank <= 1, positive semidefinite, trace ||phi||^2.
inline hermitian_matrix outer_product(const cvector& phi) {
  if (phi.dimension() == 0) throw invalid_input_error("outer_product: dimension-zero input");
  if (!phi.finite()) throw invalid_input_error("outer_product: non-finite entries");
  hermitian_matrix m(phi.dimension());
  m.add_scaled_outer(phi, 1.0);
  return m;
}

// ---------------------------------------------------------------------------
// Spectral decomposition via cyclic Jacobi rotations on the complex
// Hermitian matrix.  Quadratically convergent and accurate to a few ulps at
// the dense desk scale (d <= ~64) this library targets.
// ---------------------------------------------------------------------------

struct spectral_decomposition {
  std::vector<double> eigenvalues;    // ascending
  std::vector<cvector> eigenvectors;  // orthonormal, eigenvectors[k] pairs with eigenvalues[k]
};

namespace detail {

// Off-diagonal Frobenius mass of the working matrix.
inline double off_diagonal_norm(const std::vector<complex>& a, std::size_t d) {
  double s = 0.0;
  for (std::size_t p = 0; p < d; ++p)
    for (std::size_t q = p + 1; q < d; ++q) s += 2.0 * std::norm(a[p * d + q]);
  return std::sqrt(s);
}

}  // namespace detail

inline spectral_decomposition spectral_decompose(const hermitian_matrix& matrix) {
  const std::size_t d = matrix.dimension();
  if (d == 0) throw invalid_input_error("spectral_decompose: dimension-zero input");

  std::vector<complex> a(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a[i * d + j] = matrix.entry(i, j);
  std::vector<complex> v(d * d, complex{0.0, 0.0});
  for (std::size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;

  const double frob = matrix.frobenius_norm();
  const double stop = 1e-15 * std::max(1e-300, frob);
  constexpr int max_sweeps = 128;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (detail::off_diagonal_norm(a, d) <= stop) break;
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const complex apq = a[p * d + q];
        const double beta = std::abs(apq);
        if (beta == 0.0) continue;
        const complex phase = apq / beta;
        const double app = a[p * d + p].real();
        const double aqq = a[q * d + q].real();
        // Zero a_pq with the unitary plane rotation R = [[c, s], [-conj(s), c]]
        // acting on columns p and q; s = t*c*phase with
        // t^2 + 2*tau*t - 1 = 0, tau = (a_qq - a_pp) / (2|a_pq|).
        const double tau = (aqq - app) / (2.0 * beta);
        const double sign = tau >= 0.0 ? 1.0 : -1.0;
        const double t = sign / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sigma = t * c;
        const complex s = sigma * phase;
        const complex s_conj = std::conj(s);

        for (std::size_t k = 0; k < d; ++k) {
          if (k == p || k == q) continue;
          const complex akp = a[k * d + p];
          const complex akq = a[k * d + q];
          const complex new_kp = c * akp - s_conj * akq;
          const complex new_kq = s * akp + c * akq;
          a[k * d + p] = new_kp;
          a[p * d + k] = std::conj(new_kp);
          a[k * d + q] = new_kq;
          a[q * d + k] = std::conj(new_kq);
        }
        const double new_pp = app * c * c + aqq * sigma * sigma - 2.0 * c * sigma * beta;
        const double new_qq = app * sigma * sigma + aqq * c * c + 2.0 * c * sigma * beta;
        a[p * d + p] = new_pp;
        a[q * d + q] = new_qq;
        a[p * d + q] = 0.0;
        a[q * d + p] = 0.0;

        for (std::size_t k = 0; k < d; ++k) {
          const complex vkp = v[k * d + p];
          const complex vkq = v[k * d + q];
          v[k * d + p] = c * vkp - s_conj * vkq;
          v[k * d + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  spectral_decomposition out;
  out.eigenvalues.resize(d);
  out.eigenvectors.resize(d, cvector(d));
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);

  std::vector<cvector> columns(d, cvector(d));
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < d; ++i) columns[k][i] = v[i * d + k];
    // Reproducible phase: largest-magnitude entry made real positive.
    std::size_t pivot = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double mag = std::abs(columns[k][i]);
      if (mag > best * (1.0 + 1e-12)) {
        best = mag;
        pivot = i;
      }
    }
    if (best > 0.0) {
      const complex rot = std::abs(columns[k][pivot]) / columns[k][pivot];
      columns[k] = columns[k].scaled(rot);
      columns[k][pivot] = complex{std::abs(columns[k][pivot]), 0.0};
    }
  }

  // Ascending eigenvalues; exact ties broken by eigenvector lexicographic
  // order so certificates are reproducible.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const double lx = a[x * d + x].real();
    const double ly = a[y * d + y].real();
    if (lx != ly) return lx < ly;
    const cvector& cx = columns[x];
    const cvector& cy = columns[y];
    for (std::size_t i = 0; i < d; ++i) {
      if (cx[i].real() != cy[i].real()) return cx[i].real() < cy[i].real();
      if (cx[i].imag() != cy[i].imag()) return cx[i].imag() < cy[i].imag();
    }
    return false;
  });
  for (std::size_t k = 0; k < d; ++k) {
    out.eigenvalues[k] = a[order[k] * d + order[k]].real();
    out.eigenvectors[k] = columns[order[k]];
  }
  return out;
}

inline hermitian_matrix reconstruct(const spectral_decomposition& decomp,
                                    const std::vector<double>& mapped_eigenvalues) {
  const std::size_t d = decomp.eigenvectors.empty() ? 0 : decomp.eigenvectors[0].dimension();
  hermitian_matrix out(d);
  for (std::size_t k = 0; k < decomp.eigenvalues.size(); ++k)
    out.add_scaled_outer(decomp.eigenvectors[k], mapped_eigenvalues[k]);
  return out;
}

inline double max_eigenvalue(const hermitian_matrix& m) {
  const auto decomp = spectral_decompose(m);
  return decomp.eigenvalues.back();
}

inline double min_eigenvalue(const hermitian_matrix& m) {
  const auto decomp = spectral_decompose(m);
  return decomp.eigenvalues.front();
}

// Spectral norm, i.e. max |eigenvalue|.
inline double operator_norm(const hermitian_matrix& m) {
  const auto decomp = spectral_decompose(m);
  return std::max(std::abs(decomp.eigenvalues.front()), std::abs(decomp.eigenvalues.back()));
}

inline double operator_norm_diff(const hermitian_matrix& a, const hermitian_matrix& b) {
  return operator_norm(a - b);
}

inline double default_power_floor(const hermitian_matrix& m) {
  return 1e-10 * operator_norm(m);
}

// Spectral power: eigenvalues >= floor map to lambda^p, the rest to 0.  The
// cutoff plays the role of restricting to the invertible part of the
// operator when p < 0.
inline hermitian_matrix power(const hermitian_matrix& m, double p, double floor_value) {
  const auto decomp = spectral_decompose(m);
  const double norm = std::max(std::abs(decomp.eigenvalues.front()), std::abs(decomp.eigenvalues.back()));
  const bool p_is_integer = (p == std::round(p));
  if (!p_is_integer) {
    for (double lambda : decomp.eigenvalues)
      if (lambda < -1e-10 * std::max(1e-300, norm))
        throw domain_error("power: negative eigenvalue under a fractional exponent");
  }
  std::vector<double> mapped(decomp.eigenvalues.size());
  for (std::size_t k = 0; k < mapped.size(); ++k) {
    const double lambda = decomp.eigenvalues[k];
    if (lambda < floor_value) {
      mapped[k] = 0.0;
    } else {
      if (lambda <= 0.0 && p < 0.0)
        throw domain_error("power: non-positive eigenvalue above floor under a negative exponent");
      mapped[k] = std::pow(lambda, p);
    }
  }
  return reconstruct(decomp, mapped);
}

inline hermitian_matrix power(const hermitian_matrix& m, double p) {
  return power(m, p, default_power_floor(m));
}

// Orthogonal projection onto the span of eigenvectors with eigenvalue in the
// closed interval [lo, hi].
inline hermitian_matrix spectral_projection(const hermitian_matrix& m, double lo, double hi) {
  if (lo > hi) throw invalid_range_error("spectral_projection: lo > hi");
  const auto decomp = spectral_decompose(m);
  std::vector<double> mapped(decomp.eigenvalues.size());
  for (std::size_t k = 0; k < mapped.size(); ++k)
    mapped[k] = (decomp.eigenvalues[k] >= lo && decomp.eigenvalues[k] <= hi) ? 1.0 : 0.0;
  return reconstruct(decomp, mapped);
}

}  // namespace framekit
