#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "framekit/complex_linalg.hpp"
#include "framekit/errors.hpp"
#include "framekit/frame_system.hpp"
#include "framekit/random.hpp"

namespace framekit {

// ---------------------------------------------------------------------------
// Weaver-type partitions: split a Bessel system into r blocks whose operator
// norms stay below t_k (1 + sqrt(r delta))^2, delta = max_i ||phi_i||^2.
// Existence is guaranteed for Bessel bound <= 1; the searches below construct
// a witness and certify it.
// ---------------------------------------------------------------------------

struct partition_spec {
  int arity = 2;                    // r >= 2
  std::vector<double> proportions;  // t_k > 0, sum = 1 within 1e-12

  void validate() const {
    if (arity < 2) throw invalid_input_error("partition_spec: arity must be >= 2");
    if (static_cast<int>(proportions.size()) != arity)
      throw invalid_input_error("partition_spec: proportions length must equal arity");
    double sum = 0.0;
    for (double t : proportions) {
      if (!(t > 0.0)) throw invalid_input_error("partition_spec: proportions must be positive");
      sum += t;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw invalid_input_error("partition_spec: proportions must sum to 1");
  }

  static partition_spec uniform(int arity) {
    partition_spec spec;
    spec.arity = arity;
    spec.proportions.assign(arity, 1.0 / arity);
    return spec;
  }
};

enum class search_mode { automatic, exhaustive, randomized };

inline std::uint64_t default_search_seed() { return 12345; }

struct search_options {
  search_mode mode = search_mode::automatic;
  std::uint64_t seed = default_search_seed();
  std::size_t trials = 100000;                       // randomized draws
  std::uint64_t max_exhaustive_assignments = 1u << 20;
  bool two_value_target = false;                     // tighter r=2 bound when r*delta < 1/2
};

struct partition_certificate {
  std::vector<int> assignment;                 // block index per vector
  std::vector<double> per_block_upper;         // operator norms
  std::vector<double> per_block_lower;         // smallest eigenvalues
  std::vector<double> target_bound_per_block;
  std::vector<double> proportions;
  bool satisfied = false;
  bool vacuous_target = false;      // every target >= the Bessel norm
  bool two_value_target = false;
  double delta = 0.0;
  double bessel_bound = 0.0;
  std::string mode;                 // "exhaustive" | "randomized"
  std::uint64_t seed = 0;           // randomized runs only
  std::size_t trials = 0;           // randomized runs only
};

inline constexpr double certificate_tolerance = 1e-9;

// t_k (1 + sqrt(r delta))^2.
inline double weaver_target(int r, double delta, double t_k) {
  if (r < 1 || delta < 0.0) throw invalid_input_error("weaver_target: r >= 1 and delta >= 0 required");
  const double root = std::sqrt(static_cast<double>(r) * delta);
  return t_k * (1.0 + root) * (1.0 + root);
}

// Two-value refinement t_k (1 + 2 sqrt(e) sqrt(1-e)), e = r delta < 1/2.
inline double weaver_target_two_value(int r, double delta, double t_k) {
  const double e = static_cast<double>(r) * delta;
  if (!(e < 0.5)) throw invalid_input_error("weaver_target_two_value: requires r*delta < 1/2");
  return t_k * (1.0 + 2.0 * std::sqrt(e) * std::sqrt(1.0 - e));
}

namespace detail {

struct block_evaluation {
  std::vector<double> upper;
  std::vector<double> lower;
};

// Norms of all block sums for one assignment, recomputed from scratch so the
// figures are a pure function of the assignment.
inline block_evaluation evaluate_blocks(const frame_system& f, const std::vector<int>& assignment,
                                        int r, bool with_lower) {
  block_evaluation eval;
  eval.upper.assign(r, 0.0);
  if (with_lower) eval.lower.assign(r, 0.0);
  for (int k = 0; k < r; ++k) {
    hermitian_matrix sum(f.dimension());
    bool any = false;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (assignment[i] != k) continue;
      sum.add_scaled_outer(f.vector_at(i), f.weight_at(i));
      any = true;
    }
    if (!any) continue;
    const auto decomp = spectral_decompose(sum);
    eval.upper[k] = std::max(std::abs(decomp.eigenvalues.front()), std::abs(decomp.eigenvalues.back()));
    if (with_lower) eval.lower[k] = decomp.eigenvalues.front();
  }
  return eval;
}

inline bool lexicographically_smaller(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace detail

inline partition_certificate search_weaver_partition(const frame_system& f,
                                                     const partition_spec& spec,
                                                     const search_options& options = {}) {
  spec.validate();
  if (f.empty()) throw invalid_input_error("search_weaver_partition: empty system");
  const int r = spec.arity;
  const std::size_t m = f.size();

  const auto s_decomp = spectral_decompose(frame_operator(f));
  const double bessel = std::max(std::abs(s_decomp.eigenvalues.front()),
                                 std::abs(s_decomp.eigenvalues.back()));
  if (bessel > 1.0 + certificate_tolerance)
    throw hypothesis_error("search_weaver_partition: Bessel bound exceeds 1");
  const double delta = f.delta();

  const bool two_value = options.two_value_target && r == 2 && r * delta < 0.5;
  std::vector<double> targets(r);
  for (int k = 0; k < r; ++k)
    targets[k] = two_value ? weaver_target_two_value(r, delta, spec.proportions[k])
                           : weaver_target(r, delta, spec.proportions[k]);

  // r^m with saturation.
  double assignments = std::pow(static_cast<double>(r), static_cast<double>(m));
  search_mode mode = options.mode;
  if (mode == search_mode::automatic)
    mode = assignments <= static_cast<double>(options.max_exhaustive_assignments)
               ? search_mode::exhaustive
               : search_mode::randomized;
  if (mode == search_mode::exhaustive &&
      assignments > static_cast<double>(options.max_exhaustive_assignments))
    throw search_budget_error("search_weaver_partition: r^m exceeds the exhaustive budget");

  std::vector<int> best;
  if (mode == search_mode::exhaustive) {
    // Lexicographic odometer; strict improvement keeps the lexicographically
    // first assignment among ties of the max normalized block norm.
    std::vector<int> digits(m, 0);
    double best_score = std::numeric_limits<double>::infinity();
    while (true) {
      const auto eval = detail::evaluate_blocks(f, digits, r, false);
      double score = 0.0;
      for (int k = 0; k < r; ++k) score = std::max(score, eval.upper[k] / targets[k]);
      if (score < best_score) {
        best_score = score;
        best = digits;
      }
      bool exhausted = false;
      std::size_t pos = m;
      while (true) {
        if (pos == 0) {
          exhausted = true;
          break;
        }
        --pos;
        if (++digits[pos] < r) break;
        digits[pos] = 0;
      }
      if (exhausted) break;
    }
  } else {
    rng gen(options.seed);
    if (options.trials == 0)
      throw invalid_input_error("search_weaver_partition: randomized search needs trials > 0");
    double best_slack = -std::numeric_limits<double>::infinity();
    std::vector<int> digits(m);
    for (std::size_t trial = 0; trial < options.trials; ++trial) {
      for (std::size_t i = 0; i < m; ++i)
        digits[i] = static_cast<int>(gen.category(spec.proportions));
      const auto eval = detail::evaluate_blocks(f, digits, r, false);
      double slack = std::numeric_limits<double>::infinity();
      for (int k = 0; k < r; ++k) slack = std::min(slack, targets[k] - eval.upper[k]);
      if (slack > best_slack ||
          (slack == best_slack && detail::lexicographically_smaller(digits, best))) {
        best_slack = slack;
        best = digits;
      }
    }
  }

  partition_certificate cert;
  cert.assignment = std::move(best);
  const auto eval = detail::evaluate_blocks(f, cert.assignment, r, true);
  cert.per_block_upper = eval.upper;
  cert.per_block_lower = eval.lower;
  cert.target_bound_per_block = targets;
  cert.proportions = spec.proportions;
  cert.delta = delta;
  cert.bessel_bound = bessel;
  cert.two_value_target = two_value;
  cert.mode = mode == search_mode::exhaustive ? "exhaustive" : "randomized";
  if (mode == search_mode::randomized) {
    cert.seed = options.seed;
    cert.trials = options.trials;
  }
  cert.satisfied = true;
  for (int k = 0; k < r; ++k)
    if (cert.per_block_upper[k] > targets[k] + certificate_tolerance) cert.satisfied = false;
  cert.vacuous_target = *std::min_element(targets.begin(), targets.end()) >= bessel;
  return cert;
}

// Per-block deviations || sum_{I_k} - t_k I || of a Parseval system against
// the bound 2 sqrt(r delta) + r delta.
struct two_sided_report {
  std::vector<double> deviations;
  double bound = 0.0;
  std::vector<bool> within;
  bool all_within = false;
};

inline two_sided_report two_sided_certificate(const frame_system& f,
                                              const partition_certificate& cert) {
  const auto bounds = frame_bounds(f);
  if (!bounds.is_parseval)
    throw hypothesis_error("two_sided_certificate: system must be Parseval within 1e-8");
  const int r = static_cast<int>(cert.per_block_upper.size());
  const double delta = f.delta();
  two_sided_report report;
  report.bound = 2.0 * std::sqrt(r * delta) + r * delta;
  const auto identity = hermitian_matrix::identity(f.dimension());
  for (int k = 0; k < r; ++k) {
    hermitian_matrix sum(f.dimension());
    for (std::size_t i = 0; i < f.size(); ++i)
      if (cert.assignment[i] == k) sum.add_scaled_outer(f.vector_at(i), f.weight_at(i));
    const double t_k = cert.proportions.empty() ? 1.0 : cert.proportions[k];
    const double dev = operator_norm(sum - t_k * identity);
    report.deviations.push_back(dev);
    report.within.push_back(dev <= report.bound + certificate_tolerance);
  }
  report.all_within =
      std::all_of(report.within.begin(), report.within.end(), [](bool b) { return b; });
  return report;
}

// ---------------------------------------------------------------------------
// Bisection of a frame with bounds A, B and delta = max ||phi_i||^2 < A into
// two halves with bounds (1 -+ 5 sqrt(delta/A))/2 * {A, B}: the system is
// first transformed to its canonical Parseval frame, split by a two-block
// Weaver search, and the split is pulled back.
// ---------------------------------------------------------------------------

struct bisect_result {
  std::vector<std::size_t> indices_first;
  std::vector<std::size_t> indices_second;
  frame_system first;
  frame_system second;
  partition_certificate inner;            // Weaver certificate on the Parseval transform
  double lower_target = 0.0;              // (1 - 5 sqrt(delta/A)) A / 2
  double upper_target = 0.0;              // (1 + 5 sqrt(delta/A)) B / 2
  std::array<std::pair<double, double>, 2> measured{};  // per-block (lower, upper)
  bool satisfied = false;
};

inline bisect_result bisect_frame(const frame_system& f, const search_options& options = {}) {
  const auto bounds = frame_bounds(f);
  const double a = bounds.lower;
  const double b = bounds.upper;
  const double delta = bounds.delta;
  if (!(a > delta)) throw hypothesis_error("bisect_frame: requires A > delta");

  const auto parseval = canonical_parseval(f);
  const auto cert = search_weaver_partition(parseval, partition_spec::uniform(2), options);

  bisect_result result;
  result.inner = cert;
  for (std::size_t i = 0; i < f.size(); ++i)
    (cert.assignment[i] == 0 ? result.indices_first : result.indices_second).push_back(i);
  result.first = f.subset(result.indices_first, f.label());
  result.second = f.subset(result.indices_second, f.label());
  const double ratio = 5.0 * std::sqrt(delta / a);
  result.lower_target = 0.5 * (1.0 - ratio) * a;
  result.upper_target = 0.5 * (1.0 + ratio) * b;

  result.satisfied = cert.satisfied;
  const frame_system* blocks[2] = {&result.first, &result.second};
  for (int k = 0; k < 2; ++k) {
    std::pair<double, double> measured{0.0, 0.0};
    if (!blocks[k]->empty()) {
      const auto decomp = spectral_decompose(frame_operator(*blocks[k]));
      measured = {decomp.eigenvalues.front(), decomp.eigenvalues.back()};
    }
    result.measured[k] = measured;
    if (measured.first < result.lower_target - certificate_tolerance ||
        measured.second > result.upper_target + certificate_tolerance)
      result.satisfied = false;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Stopping schedule of the recursive bisection.  Starting from A_0 = B_0 = 1,
//   A_{j+1} = A_j (1 - 5 sqrt(delta/A_j)) / 2,
//   B_{j+1} = B_j (1 + 5 sqrt(delta/B_j)) / 2,
// L is the last index with A_L >= 100 delta, and
// C_estimate = prod_{j<=L} (1 + C_j)/(1 - C_j) with C_j = 5 sqrt(delta/A_j)
// dominates B_{L+1}/A_{L+1}.
// ---------------------------------------------------------------------------

struct bisection_schedule {
  double delta = 0.0;
  std::vector<double> lower_seq;  // A_0 .. A_{L+1}
  std::vector<double> upper_seq;  // B_0 .. B_{L+1}
  int stopping_index = 0;         // L
  double C_estimate = 0.0;
};

inline bisection_schedule compute_sou_schedule(double delta) {
  if (!(delta > 0.0 && delta < 0.01))
    throw domain_error("compute_sou_schedule: delta must lie in (0, 1/100)");
  bisection_schedule schedule;
  schedule.delta = delta;
  schedule.lower_seq = {1.0};
  schedule.upper_seq = {1.0};
  while (schedule.lower_seq.back() >= 100.0 * delta) {
    const double a = schedule.lower_seq.back();
    const double b = schedule.upper_seq.back();
    schedule.lower_seq.push_back(a * (1.0 - 5.0 * std::sqrt(delta / a)) / 2.0);
    schedule.upper_seq.push_back(b * (1.0 + 5.0 * std::sqrt(delta / b)) / 2.0);
  }
  schedule.stopping_index = static_cast<int>(schedule.lower_seq.size()) - 2;
  double product = 1.0;
  for (int j = 0; j <= schedule.stopping_index; ++j) {
    const double c_j = 5.0 * std::sqrt(delta / schedule.lower_seq[j]);
    product *= (1.0 + c_j) / (1.0 - c_j);
  }
  schedule.C_estimate = product;
  return schedule;
}

// prod_{j>=0} (1 + 2^{-1-j/2}) / (1 - 2^{-1-j/2}), the absolute constant that
// dominates every C_estimate; roughly 35.2.
inline double universal_schedule_constant() {
  static const double value = [] {
    double product = 1.0;
    for (int j = 0; j < 256; ++j) {
      const double x = std::exp2(-1.0 - 0.5 * j);
      const double factor = (1.0 + x) / (1.0 - x);
      product *= factor;
      if (factor - 1.0 < 1e-17) break;
    }
    return product;
  }();
  return value;
}

// ---------------------------------------------------------------------------
// Recursive uniform partition of a tight frame (constant K >= 1, vectors in
// the unit ball) into blocks with bounds inside [1, 100 C].  When K < 100 the
// input is already such a frame and is returned whole.
// ---------------------------------------------------------------------------

struct uniform_partition_result {
  std::vector<std::vector<std::size_t>> block_indices;
  std::vector<frame_system> blocks;
  std::vector<std::pair<double, double>> measured;  // per-block (lower, upper)
  std::optional<bisection_schedule> schedule;
  std::vector<partition_certificate> split_certificates;  // in application order
  double window_lower = 0.0;  // 1
  double window_upper = 0.0;  // 100 * universal_schedule_constant()
  double tight_constant = 0.0;
  bool trivial_branch = false;
  bool satisfied = false;
};

inline uniform_partition_result partition_to_uniform(const frame_system& f,
                                                     const search_options& options = {}) {
  const auto bounds = frame_bounds(f);
  if (!bounds.is_tight)
    throw hypothesis_error("partition_to_uniform: requires a tight frame");
  const double k_const = 0.5 * (bounds.lower + bounds.upper);
  if (k_const < 1.0 - 1e-6)
    throw hypothesis_error("partition_to_uniform: tight constant must be >= 1");
  if (f.delta() > 1.0 + certificate_tolerance)
    throw hypothesis_error("partition_to_uniform: vectors must lie in the unit ball");

  uniform_partition_result result;
  result.tight_constant = k_const;
  result.window_lower = 1.0;
  result.window_upper = 100.0 * universal_schedule_constant();

  const double delta = 1.0 / k_const;
  std::vector<std::size_t> everything(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) everything[i] = i;
  bool search_failed = false;

  if (100.0 * delta >= 1.0) {
    result.trivial_branch = true;
    result.block_indices = {everything};
  } else {
    result.schedule = compute_sou_schedule(delta);
    const double scale = 1.0 / std::sqrt(k_const);
    std::vector<std::vector<std::size_t>> current{everything};
    bool ok = true;
    for (int level = 0; level <= result.schedule->stopping_index && ok; ++level) {
      std::vector<std::vector<std::size_t>> next;
      for (const auto& indices : current) {
        const auto sub = f.subset(indices).scaled(scale);
        const auto split = bisect_frame(sub, options);
        result.split_certificates.push_back(split.inner);
        std::vector<std::size_t> left, right;
        for (std::size_t pos : split.indices_first) left.push_back(indices[pos]);
        for (std::size_t pos : split.indices_second) right.push_back(indices[pos]);
        next.push_back(std::move(left));
        next.push_back(std::move(right));
        if (!split.satisfied) ok = false;  // keep the partial tree
      }
      current = std::move(next);
    }
    result.block_indices = std::move(current);
    if (!ok) search_failed = true;
  }

  result.satisfied = !search_failed;
  for (const auto& indices : result.block_indices) {
    auto block = f.subset(indices, f.label());
    std::pair<double, double> measured{0.0, 0.0};
    if (!block.empty()) {
      const auto decomp = spectral_decompose(frame_operator(block));
      measured = {decomp.eigenvalues.front(), decomp.eigenvalues.back()};
    }
    if (measured.first < result.window_lower - certificate_tolerance ||
        measured.second > result.window_upper + certificate_tolerance)
      result.satisfied = false;
    result.blocks.push_back(std::move(block));
    result.measured.push_back(measured);
  }
  return result;
}

// ---------------------------------------------------------------------------
// General frames: blocks with bounds in [N, 100 C N B / A] for any frame with
// bounds (A, B) and ||phi_i||^2 <= N, through the canonical Parseval
// transform scaled to a tight frame of constant A/N.
// ---------------------------------------------------------------------------

struct general_partition_result {
  std::vector<std::vector<std::size_t>> block_indices;
  std::vector<frame_system> blocks;
  std::vector<std::pair<double, double>> measured;
  uniform_partition_result inner;
  double window_lower = 0.0;  // A0 * N
  double window_upper = 0.0;  // B0 * N * B / A
  double a0 = 1.0;
  double b0 = 0.0;            // 100 * universal_schedule_constant()
  bool satisfied = false;
};

inline general_partition_result partition_general(const frame_system& f, double norm_cap,
                                                  const search_options& options = {}) {
  if (!(norm_cap > 0.0)) throw invalid_input_error("partition_general: norm cap must be > 0");
  if (f.delta() > norm_cap + certificate_tolerance)
    throw hypothesis_error("partition_general: vector norms exceed the declared cap");
  const auto bounds = frame_bounds(f);
  if (bounds.lower <= 1e-10 * std::max(1.0, bounds.upper))
    throw not_a_frame_error("partition_general: lower frame bound is numerically zero");

  const auto parseval = canonical_parseval(f);
  const auto tight = parseval.scaled(std::sqrt(bounds.lower / norm_cap));
  general_partition_result result;
  result.inner = partition_to_uniform(tight, options);
  result.a0 = 1.0;
  result.b0 = 100.0 * universal_schedule_constant();
  result.window_lower = result.a0 * norm_cap;
  result.window_upper = result.b0 * norm_cap * bounds.upper / bounds.lower;
  result.block_indices = result.inner.block_indices;
  result.satisfied = result.inner.satisfied;
  for (const auto& indices : result.block_indices) {
    auto block = f.subset(indices, f.label());
    std::pair<double, double> measured{0.0, 0.0};
    if (!block.empty()) {
      const auto decomp = spectral_decompose(frame_operator(block));
      measured = {decomp.eigenvalues.front(), decomp.eigenvalues.back()};
    }
    if (measured.first < result.window_lower - certificate_tolerance ||
        measured.second > result.window_upper + certificate_tolerance)
      result.satisfied = false;
    result.blocks.push_back(std::move(block));
    result.measured.push_back(measured);
  }
  return result;
}

}  // namespace framekit
