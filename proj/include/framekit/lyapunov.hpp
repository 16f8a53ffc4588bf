#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "framekit/complex_linalg.hpp"
#include "framekit/continuous_frame.hpp"
#include "framekit/errors.hpp"
#include "framekit/frame_system.hpp"
#include "framekit/partition.hpp"

namespace framekit {

// Constants used in reported targets C eps^{1/4} (scalar weight) and
// C0 eps^{1/8} (general weights).  Neither is pinned sharply by the theory;
// the defaults follow the constant chain of the projection argument
// (2 sqrt(2) eps^{1/4} + 6 sqrt(eps) <= 9 eps^{1/4} for eps <= 1, plus one
// quantization term for the bucketed case) and are recorded in every
// certificate.
struct lyapunov_config {
  double scalar_constant = 9.0;   // C
  double weights_constant = 10.0; // C0
};

// ---------------------------------------------------------------------------
// Scalar weight t: find I0 with || sum_{I0} phi phi^* - t S || small.  The
// construction projects away the near-null part of S with P = 1_{[sqrt(eps),
// 1]}(S), renormalizes with B = S^{-1/2} P, and splits {B phi_i} by a
// two-block Weaver search with proportions (t, 1-t).
// ---------------------------------------------------------------------------

struct scalar_subset_certificate {
  std::vector<std::size_t> selected;  // I0
  double t = 0.0;
  double epsilon = 0.0;
  double measured_deviation = 0.0;    // || sum_{I0} w phi phi^* - t S ||
  double reported_target = 0.0;       // C eps^{1/4}
  double core_deviation = 0.0;        // || sum_{I0} psi psi^* - t P ||
  double tail_norm = 0.0;             // largest eigenvalue of S below the cut
  double projection_cut = 0.0;        // sqrt(eps)
  bool satisfied = false;             // inner search satisfied
  partition_certificate search;
};

namespace detail {

inline void check_lyapunov_preconditions(const frame_system& f, double epsilon, double bessel) {
  if (!(epsilon > 0.0)) throw invalid_input_error("lyapunov: epsilon must be > 0");
  if (bessel > 1.0 + certificate_tolerance)
    throw hypothesis_error("lyapunov: Bessel bound exceeds 1");
  if (f.delta() > epsilon + certificate_tolerance)
    throw hypothesis_error("lyapunov: vector norm squares exceed epsilon");
}

inline hermitian_matrix subset_operator(const frame_system& f,
                                        const std::vector<std::size_t>& subset) {
  hermitian_matrix sum(f.dimension());
  for (std::size_t i : subset) sum.add_scaled_outer(f.vector_at(i), f.weight_at(i));
  return sum;
}

}  // namespace detail

inline scalar_subset_certificate subset_for_scalar(const frame_system& f, double epsilon,
                                                   double t, const lyapunov_config& config = {},
                                                   const search_options& options = {}) {
  if (!(t >= 0.0 && t <= 1.0)) throw invalid_weight_error("subset_for_scalar: t outside [0,1]");
  if (f.empty()) throw invalid_input_error("subset_for_scalar: empty system");
  const auto s = frame_operator(f);
  const auto decomp = spectral_decompose(s);
  const double bessel = std::max(std::abs(decomp.eigenvalues.front()),
                                 std::abs(decomp.eigenvalues.back()));
  detail::check_lyapunov_preconditions(f, epsilon, bessel);

  scalar_subset_certificate cert;
  cert.t = t;
  cert.epsilon = epsilon;
  cert.projection_cut = std::sqrt(epsilon);
  cert.reported_target = config.scalar_constant * std::pow(epsilon, 0.25);

  if (t == 0.0 || t == 1.0) {
    if (t == 1.0)
      for (std::size_t i = 0; i < f.size(); ++i) cert.selected.push_back(i);
    cert.measured_deviation =
        operator_norm(detail::subset_operator(f, cert.selected) - t * s);
    cert.satisfied = true;
    return cert;
  }

  // P keeps the spectrum in [sqrt(eps), max(1, ||S||)]: eigenvalues pushed
  // above 1 by rounding are clipped into the projection range.
  const double hi = std::max(1.0, decomp.eigenvalues.back());
  std::vector<double> proj(decomp.eigenvalues.size());
  std::vector<double> inv_root(decomp.eigenvalues.size());
  for (std::size_t k = 0; k < proj.size(); ++k) {
    const bool inside =
        decomp.eigenvalues[k] >= cert.projection_cut && decomp.eigenvalues[k] <= hi;
    proj[k] = inside ? 1.0 : 0.0;
    inv_root[k] = inside ? 1.0 / std::sqrt(decomp.eigenvalues[k]) : 0.0;
    if (!inside)
      cert.tail_norm = std::max(cert.tail_norm, std::abs(decomp.eigenvalues[k]));
  }
  const auto p = reconstruct(decomp, proj);
  const auto b = reconstruct(decomp, inv_root);  // S^{-1/2} P as a spectral function

  std::vector<cvector> psi;
  psi.reserve(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    psi.push_back(b.apply(f.vector_at(i).scaled(std::sqrt(f.weight_at(i)))));
  const frame_system renormalized(f.dimension(), std::move(psi));

  partition_spec spec;
  spec.arity = 2;
  spec.proportions = {t, 1.0 - t};
  cert.search = search_weaver_partition(renormalized, spec, options);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (cert.search.assignment[i] == 0) cert.selected.push_back(i);

  cert.core_deviation =
      operator_norm(detail::subset_operator(renormalized, cert.selected) - t * p);
  cert.measured_deviation = operator_norm(detail::subset_operator(f, cert.selected) - t * s);
  cert.satisfied = cert.search.satisfied;
  return cert;
}

// ---------------------------------------------------------------------------
// General weights t_i in [0,1]: bucket the indices by quantized weight,
// n = floor(eps^{-1/8}) levels, run the scalar construction per bucket with
// t = k/n, and take the union.  The triangle inequality gives
//   deviation <= sum of bucket deviations + ||S|| / n.
// ---------------------------------------------------------------------------

struct bucket_detail {
  int k = 0;
  double t = 0.0;                      // k/n
  std::vector<std::size_t> indices;    // members of the bucket
  std::vector<std::size_t> selected;   // chosen sub-subset
  double deviation = 0.0;              // vs (k/n) * S_bucket
};

struct weights_subset_certificate {
  std::vector<std::size_t> selected;   // I0
  std::vector<double> weights;         // t_i
  double epsilon = 0.0;
  int n = 0;
  double measured_deviation = 0.0;     // vs sum_i t_i w_i phi phi^*
  double reported_target = 0.0;        // C0 eps^{1/8}
  double quantization_term = 0.0;      // ||S|| / n
  double search_slack = 0.0;           // sum of bucket deviations
  double bessel_bound = 0.0;
  bool satisfied = false;
  std::vector<bucket_detail> buckets;
};

inline weights_subset_certificate subset_for_weights(const frame_system& f,
                                                     const std::vector<double>& t,
                                                     double epsilon,
                                                     const lyapunov_config& config = {},
                                                     const search_options& options = {}) {
  if (t.size() != f.size())
    throw invalid_weight_error("subset_for_weights: weight count mismatch");
  for (double value : t)
    if (!(value >= 0.0 && value <= 1.0))
      throw invalid_weight_error("subset_for_weights: weight outside [0,1]");
  if (f.empty()) throw invalid_input_error("subset_for_weights: empty system");

  const auto s = frame_operator(f);
  const double bessel = operator_norm(s);
  detail::check_lyapunov_preconditions(f, epsilon, bessel);

  weights_subset_certificate cert;
  cert.weights = t;
  cert.epsilon = epsilon;
  cert.n = std::max(1, static_cast<int>(std::floor(std::pow(epsilon, -0.125))));
  cert.reported_target = config.weights_constant * std::pow(epsilon, 0.125);
  cert.bessel_bound = bessel;
  cert.quantization_term = bessel / cert.n;
  cert.satisfied = true;

  for (int k = 1; k <= cert.n; ++k) {
    bucket_detail bucket;
    bucket.k = k;
    bucket.t = static_cast<double>(k) / cert.n;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (t[i] > (k - 1.0) / cert.n && t[i] <= bucket.t) bucket.indices.push_back(i);
    if (bucket.indices.empty()) continue;

    const auto sub = f.subset(bucket.indices);
    search_options bucket_options = options;
    bucket_options.seed = options.seed + static_cast<std::uint64_t>(k);
    const auto inner = subset_for_scalar(sub, epsilon, bucket.t, config, bucket_options);
    for (std::size_t pos : inner.selected) bucket.selected.push_back(bucket.indices[pos]);
    bucket.deviation = inner.measured_deviation;
    cert.search_slack += bucket.deviation;
    if (!inner.satisfied) cert.satisfied = false;
    cert.selected.insert(cert.selected.end(), bucket.selected.begin(), bucket.selected.end());
    cert.buckets.push_back(std::move(bucket));
  }
  std::sort(cert.selected.begin(), cert.selected.end());

  cert.measured_deviation =
      operator_norm(detail::subset_operator(f, cert.selected) - weighted_frame_operator(f, t));
  return cert;
}

// Brute-force oracle: the smallest achievable || sum_{I'} w phi phi^* - target ||
// over all 2^m subsets.  Test-scale only.
struct subset_oracle_result {
  double min_deviation = 0.0;
  std::vector<std::size_t> best;
};

inline subset_oracle_result exhaustive_min_subset_deviation(const frame_system& f,
                                                            const hermitian_matrix& target) {
  if (f.size() > 24)
    throw search_budget_error("exhaustive_min_subset_deviation: more than 24 vectors");
  const std::size_t m = f.size();
  subset_oracle_result result;
  result.min_deviation = std::numeric_limits<double>::infinity();
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << m); ++code) {
    hermitian_matrix sum(f.dimension());
    for (std::size_t i = 0; i < m; ++i)
      if ((code >> i) & 1) sum.add_scaled_outer(f.vector_at(i), f.weight_at(i));
    const double dev = operator_norm(sum - target);
    if (dev < result.min_deviation) {
      result.min_deviation = dev;
      result.best.clear();
      for (std::size_t i = 0; i < m; ++i)
        if ((code >> i) & 1) result.best.push_back(i);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Continuous Lyapunov selection.  On a piecewise-constant non-atomic model
// the selection of sub-weight tau_n mu_n per cell reproduces the weighted
// operator identically.  On a refinable model the countable-valued
// approximation at eps/2 is applied first; the 6 * (eps/2) certificate then
// covers the substitution for every weight function.
// ---------------------------------------------------------------------------

struct cell_subset_certificate {
  cell_selection selection;          // on `model`
  continuous_frame_model model;      // piecewise-constant model of the selection
  std::vector<std::size_t> origin;   // model cell -> input cell
  std::vector<double> tau;           // tau expanded to `model`
  double epsilon = 0.0;
  double measured_deviation = 0.0;   // cell-model deviation
  double certified_bound = 0.0;      // measured + approximation term
  bool refined = false;
};

inline cell_subset_certificate continuous_lyapunov(const continuous_frame_model& model,
                                                   const std::vector<double>& tau,
                                                   double epsilon) {
  if (!(epsilon > 0.0)) throw invalid_input_error("continuous_lyapunov: epsilon must be > 0");
  if (!model.piecewise_constant)
    throw hypothesis_error(
        "continuous_lyapunov: model is not piecewise constant; supply an oscillation oracle");
  cell_subset_certificate cert;
  cert.tau = tau;
  cert.epsilon = epsilon;
  cert.selection = select_subset_matching_weights(model, tau);
  cert.measured_deviation = operator_norm(partial_frame_operator(model, cert.selection) -
                                          weighted_frame_operator(model, tau));
  cert.certified_bound = cert.measured_deviation;
  cert.origin.resize(model.cell_count());
  for (std::size_t i = 0; i < cert.origin.size(); ++i) cert.origin[i] = i;
  cert.model = model;
  return cert;
}

inline cell_subset_certificate continuous_lyapunov(const continuous_frame_model& model,
                                                   const std::vector<double>& tau,
                                                   double epsilon,
                                                   const oscillation_oracle& oracle) {
  if (!(epsilon > 0.0)) throw invalid_input_error("continuous_lyapunov: epsilon must be > 0");
  if (tau.size() != model.cell_count())
    throw invalid_weight_error("continuous_lyapunov: tau length mismatch");
  auto approx = approximate_by_countable(model, 0.5 * epsilon, oracle);

  std::vector<double> expanded(approx.model.cell_count());
  for (std::size_t i = 0; i < expanded.size(); ++i) expanded[i] = tau[approx.origin[i]];

  cell_subset_certificate cert;
  cert.tau = expanded;
  cert.epsilon = epsilon;
  cert.selection = select_subset_matching_weights(approx.model, expanded);
  cert.measured_deviation = operator_norm(partial_frame_operator(approx.model, cert.selection) -
                                          weighted_frame_operator(approx.model, expanded));
  cert.certified_bound = cert.measured_deviation + approx.error_bound;
  cert.origin = std::move(approx.origin);
  cert.model = std::move(approx.model);
  cert.refined = true;
  return cert;
}

// ---------------------------------------------------------------------------
// Convexity witnesses: a subset realizing the convex combination
// lambda S_{E1} + (1 - lambda) S_{E2} within the applicable bound.
// ---------------------------------------------------------------------------

inline cell_subset_certificate convexity_witness(const continuous_frame_model& model,
                                                 const cell_selection& e1,
                                                 const cell_selection& e2, double lambda,
                                                 double epsilon) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw invalid_weight_error("convexity_witness: lambda outside [0,1]");
  const auto s1 = partial_frame_operator(model, e1);
  const auto s2 = partial_frame_operator(model, e2);
  const auto target = lambda * s1 + (1.0 - lambda) * s2;

  cell_subset_certificate cert;
  cert.epsilon = epsilon;
  cert.model = model;
  cert.origin.resize(model.cell_count());
  for (std::size_t i = 0; i < cert.origin.size(); ++i) cert.origin[i] = i;

  if (lambda == 0.0 || lambda == 1.0 || e1.sub_weights == e2.sub_weights) {
    cert.selection = lambda == 0.0 ? e2 : e1;
    cert.tau.assign(model.cell_count(), 0.0);
    for (std::size_t i = 0; i < model.cell_count(); ++i) {
      const double mu = model.cell_at(i).weight;
      cert.tau[i] = mu > 0.0 ? std::clamp(cert.selection.sub_weights[i] / mu, 0.0, 1.0) : 0.0;
    }
    cert.measured_deviation =
        operator_norm(partial_frame_operator(model, cert.selection) - target);
    cert.certified_bound = cert.measured_deviation;
    return cert;
  }

  if (!model.piecewise_constant)
    throw hypothesis_error("convexity_witness: model must be piecewise constant");
  std::vector<double> tau(model.cell_count(), 0.0);
  for (std::size_t i = 0; i < model.cell_count(); ++i) {
    const double mu = model.cell_at(i).weight;
    if (mu <= 0.0) continue;
    tau[i] = std::clamp(
        (lambda * e1.sub_weights[i] + (1.0 - lambda) * e2.sub_weights[i]) / mu, 0.0, 1.0);
  }
  cert.tau = tau;
  cert.selection = select_subset_matching_weights(model, tau);
  cert.measured_deviation = operator_norm(partial_frame_operator(model, cert.selection) - target);
  cert.certified_bound = cert.measured_deviation;
  return cert;
}

struct discrete_convexity_certificate {
  std::vector<std::size_t> selected;
  double lambda = 0.0;
  double epsilon = 0.0;
  double measured_deviation = 0.0;  // vs lambda S_{I1} + (1-lambda) S_{I2}
  double reported_target = 0.0;     // C0 B^{7/8} eps^{1/8}
  bool satisfied = false;
  weights_subset_certificate inner;
};

inline discrete_convexity_certificate convexity_witness(const frame_system& f,
                                                        const std::vector<std::size_t>& i1,
                                                        const std::vector<std::size_t>& i2,
                                                        double lambda, double epsilon,
                                                        const lyapunov_config& config = {},
                                                        const search_options& options = {}) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw invalid_weight_error("convexity_witness: lambda outside [0,1]");
  const auto target = lambda * detail::subset_operator(f, i1) +
                      (1.0 - lambda) * detail::subset_operator(f, i2);
  const double bessel = operator_norm(frame_operator(f));

  discrete_convexity_certificate cert;
  cert.lambda = lambda;
  cert.epsilon = epsilon;
  cert.reported_target =
      config.weights_constant * std::pow(bessel, 0.875) * std::pow(epsilon, 0.125);

  auto sorted_equal = [](std::vector<std::size_t> a, std::vector<std::size_t> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
  };
  if (lambda == 0.0 || lambda == 1.0 || sorted_equal(i1, i2)) {
    cert.selected = lambda == 0.0 ? i2 : i1;
    std::sort(cert.selected.begin(), cert.selected.end());
    cert.measured_deviation = operator_norm(detail::subset_operator(f, cert.selected) - target);
    cert.satisfied = true;
    return cert;
  }

  std::vector<double> tau(f.size(), 0.0);
  for (std::size_t i : i1) tau.at(i) += lambda;
  for (std::size_t i : i2) tau.at(i) += 1.0 - lambda;
  cert.inner = subset_for_weights(f, tau, epsilon, config, options);
  cert.selected = cert.inner.selected;
  cert.measured_deviation = operator_norm(detail::subset_operator(f, cert.selected) - target);
  cert.satisfied = cert.inner.satisfied;
  return cert;
}

}  // namespace framekit
