#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "framekit/complex_linalg.hpp"
#include "framekit/errors.hpp"

namespace framekit {

// Finite family {phi_i} in C^d with optional nonnegative weights.  A weight
// w_i is the squared scalar of a scalable system: the frame operator is
// S = sum_i w_i phi_i phi_i^*, i.e. the plain frame operator of {sqrt(w_i) phi_i}.
// Zero vectors are retained (they never affect bounds) but can be listed.
class frame_system {
 public:
  frame_system() = default;

  frame_system(std::vector<cvector> vectors,
               std::optional<std::vector<double>> weights = std::nullopt,
               std::string label = "")
      : vectors_(std::move(vectors)), weights_(std::move(weights)), label_(std::move(label)) {
    if (!vectors_.empty()) dimension_ = vectors_[0].dimension();
    validate();
  }

  // Empty system with a known ambient dimension (e.g. an empty partition block).
  frame_system(std::size_t dimension, std::vector<cvector> vectors,
               std::optional<std::vector<double>> weights = std::nullopt,
               std::string label = "")
      : dimension_(dimension), vectors_(std::move(vectors)), weights_(std::move(weights)),
        label_(std::move(label)) {
    validate();
  }

  std::size_t size() const { return vectors_.size(); }
  std::size_t dimension() const { return dimension_; }
  bool empty() const { return vectors_.empty(); }

  const cvector& vector_at(std::size_t i) const { return vectors_[i]; }
  const std::vector<cvector>& vectors() const { return vectors_; }
  double weight_at(std::size_t i) const { return weights_ ? (*weights_)[i] : 1.0; }
  bool has_weights() const { return weights_.has_value(); }
  const std::optional<std::vector<double>>& weights() const { return weights_; }
  const std::string& label() const { return label_; }

  // delta = max_i w_i ||phi_i||^2, the largest weighted norm square.
  double delta() const {
    double d = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      d = std::max(d, weight_at(i) * vectors_[i].norm_squared());
    return d;
  }

  std::vector<std::size_t> zero_vector_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i)
      if (vectors_[i].norm_squared() == 0.0) out.push_back(i);
    return out;
  }

  frame_system subset(const std::vector<std::size_t>& indices, std::string label = "") const {
    std::vector<cvector> vecs;
    vecs.reserve(indices.size());
    std::optional<std::vector<double>> w;
    if (weights_) w.emplace();
    for (std::size_t i : indices) {
      if (i >= size()) throw invalid_input_error("frame_system::subset: index out of range");
      vecs.push_back(vectors_[i]);
      if (w) w->push_back((*weights_)[i]);
    }
    return frame_system(dimension_, std::move(vecs), std::move(w), std::move(label));
  }

  // Scales every vector by the (real) factor; weights are untouched.
  frame_system scaled(double factor, std::string label = "") const {
    std::vector<cvector> vecs;
    vecs.reserve(size());
    for (const cvector& v : vectors_) vecs.push_back(v.scaled(factor));
    return frame_system(dimension_, std::move(vecs), weights_, std::move(label));
  }

 private:
  void validate() const {
    for (const cvector& v : vectors_) {
      if (v.dimension() != dimension_)
        throw shape_error("frame_system: vectors of mixed dimension");
      if (!v.finite()) throw invalid_input_error("frame_system: non-finite vector entry");
    }
    if (weights_) {
      if (weights_->size() != vectors_.size())
        throw shape_error("frame_system: weight count does not match vector count");
      for (double w : *weights_)
        if (!(w >= 0.0) || !std::isfinite(w))
          throw invalid_weight_error("frame_system: weights must be finite and >= 0");
    }
  }

  std::size_t dimension_ = 0;
  std::vector<cvector> vectors_;
  std::optional<std::vector<double>> weights_;
  std::string label_;
};

// S = sum_i w_i phi_i phi_i^*.
inline hermitian_matrix frame_operator(const frame_system& f) {
  if (f.empty()) throw invalid_input_error("frame_operator: empty system");
  hermitian_matrix s(f.dimension());
  for (std::size_t i = 0; i < f.size(); ++i) s.add_scaled_outer(f.vector_at(i), f.weight_at(i));
  return s;
}

struct frame_bounds_report {
  double lower = 0.0;       // A = lambda_min(S)
  double upper = 0.0;       // B = lambda_max(S)
  double delta = 0.0;       // max_i w_i ||phi_i||^2
  bool is_parseval = false; // |A-1| <= 1e-8 and |B-1| <= 1e-8
  bool is_tight = false;    // B - A <= 1e-8 * max(1, B)
};

inline constexpr double parseval_tolerance = 1e-8;

inline frame_bounds_report frame_bounds(const frame_system& f) {
  const auto decomp = spectral_decompose(frame_operator(f));
  frame_bounds_report report;
  report.lower = decomp.eigenvalues.front();
  report.upper = decomp.eigenvalues.back();
  report.delta = f.delta();
  report.is_parseval = std::abs(report.lower - 1.0) <= parseval_tolerance &&
                       std::abs(report.upper - 1.0) <= parseval_tolerance;
  report.is_tight = (report.upper - report.lower) <= parseval_tolerance * std::max(1.0, report.upper);
  return report;
}

// {S^{-1/2} phi_i}: the canonical Parseval frame of a frame.  Weights carry
// over, so the weighted frame operator of the output is the identity.
inline frame_system canonical_parseval(const frame_system& f) {
  const auto s = frame_operator(f);
  const auto decomp = spectral_decompose(s);
  const double upper = decomp.eigenvalues.back();
  const double lower = decomp.eigenvalues.front();
  if (lower <= 1e-10 * std::max(1.0, upper))
    throw not_a_frame_error("canonical_parseval: lower frame bound is numerically zero");
  std::vector<double> inv_sqrt(decomp.eigenvalues.size());
  for (std::size_t k = 0; k < inv_sqrt.size(); ++k)
    inv_sqrt[k] = 1.0 / std::sqrt(decomp.eigenvalues[k]);
  const auto root = reconstruct(decomp, inv_sqrt);
  std::vector<cvector> vecs;
  vecs.reserve(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) vecs.push_back(root.apply(f.vector_at(i)));
  return frame_system(f.dimension(), std::move(vecs), f.weights(), f.label());
}

// sum_i tau_i w_i phi_i phi_i^* for pointwise weights tau_i in [0,1].
inline hermitian_matrix weighted_frame_operator(const frame_system& f, std::span<const double> tau) {
  if (tau.size() != f.size())
    throw invalid_weight_error("weighted_frame_operator: tau length mismatch");
  for (double t : tau)
    if (!(t >= 0.0 && t <= 1.0))
      throw invalid_weight_error("weighted_frame_operator: tau outside [0,1]");
  if (f.empty()) throw invalid_input_error("weighted_frame_operator: empty system");
  hermitian_matrix s(f.dimension());
  for (std::size_t i = 0; i < f.size(); ++i)
    s.add_scaled_outer(f.vector_at(i), tau[i] * f.weight_at(i));
  return s;
}

}  // namespace framekit
