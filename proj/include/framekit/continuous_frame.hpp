#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "framekit/complex_linalg.hpp"
#include "framekit/errors.hpp"
#include "framekit/frame_system.hpp"

namespace framekit {

// One measurable piece of the index space.  `divisible` marks a non-atomic
// cell: it may be split into sub-cells of any weights summing to its own.
// An atom is never split and the vector field is constant on it.
struct measure_cell {
  std::string id;
  double weight = 0.0;          // measure of the cell; >= 0, +inf tolerated
  std::vector<double> point;    // representative sample point t_n
  bool divisible = false;
};

using cell_evaluator = std::function<cvector(const std::vector<double>&)>;
using cell_refiner = std::function<std::vector<measure_cell>(const measure_cell&)>;

// Upper bound on sup_{t in cell} ||phi_t - phi_{t_n}||.  Supplied by the
// model builder, typically from a Lipschitz estimate or a fine-grid sup.
using oscillation_oracle = std::function<double(const measure_cell&)>;

// Finite cell model of a continuous frame: a cell list, a vector field
// sampled at cell points, and optional metadata.  Values are evaluated once
// at construction, so instances are immutable and safe to share.
class continuous_frame_model {
 public:
  continuous_frame_model() = default;

  continuous_frame_model(std::vector<measure_cell> cells, cell_evaluator evaluator,
                         std::size_t dimension, std::string label = "")
      : cells_(std::move(cells)), evaluator_(std::move(evaluator)), dimension_(dimension),
        label_(std::move(label)) {
    if (!evaluator_) throw invalid_input_error("continuous_frame_model: missing evaluator");
    values_.reserve(cells_.size());
    for (const measure_cell& cell : cells_) {
      validate_cell(cell);
      cvector v = evaluator_(cell.point);
      if (v.dimension() != dimension_)
        throw shape_error("continuous_frame_model: evaluator dimension mismatch");
      if (!v.finite())
        throw invalid_input_error("continuous_frame_model: non-finite vector value");
      values_.push_back(std::move(v));
    }
  }

  // Values already evaluated by the caller (refinement pipelines).
  continuous_frame_model(std::vector<measure_cell> cells, std::vector<cvector> values,
                         cell_evaluator evaluator, std::size_t dimension, std::string label = "")
      : cells_(std::move(cells)), evaluator_(std::move(evaluator)), dimension_(dimension),
        label_(std::move(label)), values_(std::move(values)) {
    if (values_.size() != cells_.size())
      throw shape_error("continuous_frame_model: value count does not match cell count");
    for (const measure_cell& cell : cells_) validate_cell(cell);
    for (const cvector& v : values_) {
      if (v.dimension() != dimension_)
        throw shape_error("continuous_frame_model: value dimension mismatch");
      if (!v.finite())
        throw invalid_input_error("continuous_frame_model: non-finite vector value");
    }
  }

  std::size_t cell_count() const { return cells_.size(); }
  std::size_t dimension() const { return dimension_; }
  const std::vector<measure_cell>& cells() const { return cells_; }
  const measure_cell& cell_at(std::size_t i) const { return cells_[i]; }
  const cvector& value_at(std::size_t i) const { return values_[i]; }
  const cell_evaluator& evaluator() const { return evaluator_; }
  const std::string& label() const { return label_; }

  std::optional<double> norm_cap;                          // N with ||phi_t||^2 <= N
  std::optional<std::pair<double, double>> declared_bounds; // (A, B) if known
  bool piecewise_constant = false;  // vector field constant on every cell
  cell_refiner refiner;             // may be empty for unrefinable models

  double max_norm_squared() const {
    double m = 0.0;
    for (const cvector& v : values_) m = std::max(m, v.norm_squared());
    return m;
  }

 private:
  static void validate_cell(const measure_cell& cell) {
    if (std::isnan(cell.weight) || cell.weight < 0.0)
      throw invalid_input_error("measure_cell: weight must be >= 0");
  }

  std::vector<measure_cell> cells_;
  cell_evaluator evaluator_;
  std::size_t dimension_ = 0;
  std::string label_;
  std::vector<cvector> values_;
};

// Returns a piecewise-constant refiner that halves a cell's weight and keeps
// its sample point; appropriate for models whose field is constant per cell.
inline cell_refiner halving_refiner() {
  return [](const measure_cell& cell) {
    measure_cell left = cell;
    measure_cell right = cell;
    left.id = cell.id + "L";
    right.id = cell.id + "R";
    left.weight = 0.5 * cell.weight;
    right.weight = cell.weight - left.weight;
    return std::vector<measure_cell>{left, right};
  };
}

inline oscillation_oracle zero_oscillation_oracle() {
  return [](const measure_cell&) { return 0.0; };
}

inline continuous_frame_model make_piecewise_constant_model(
    std::vector<measure_cell> cells, cell_evaluator evaluator, std::size_t dimension,
    std::string label = "") {
  continuous_frame_model model(std::move(cells), std::move(evaluator), dimension,
                               std::move(label));
  model.piecewise_constant = true;
  model.refiner = halving_refiner();
  return model;
}

// Sub-weights per cell: selection[i] in [0, weight_i].  Fractional selection
// is only meaningful on divisible cells.
struct cell_selection {
  std::vector<double> sub_weights;
};

// The discrete frame carried by the cell quadrature: vectors phi_{t_n} with
// weights mu_n.  Cells of infinite weight are only admissible with a zero
// vector (otherwise no Bessel bound exists) and are dropped.
inline frame_system equivalent_discrete(const continuous_frame_model& model) {
  std::vector<cvector> vectors;
  std::vector<double> weights;
  vectors.reserve(model.cell_count());
  weights.reserve(model.cell_count());
  for (std::size_t i = 0; i < model.cell_count(); ++i) {
    const double mu = model.cell_at(i).weight;
    if (std::isinf(mu)) {
      if (model.value_at(i).norm_squared() > 0.0)
        throw not_bessel_error("equivalent_discrete: infinite cell weight with nonzero vector");
      continue;
    }
    vectors.push_back(model.value_at(i));
    weights.push_back(mu);
  }
  return frame_system(model.dimension(), std::move(vectors), std::move(weights), model.label());
}

namespace detail {

inline bool fractional_part(double sub_weight, double mu) {
  const double tol = 1e-12 * std::max(1.0, mu);
  return sub_weight > tol && sub_weight < mu - tol;
}

}  // namespace detail

// S_{phi,E} = sum over cells of sub_weight * phi phi^*.  Summation runs in
// cell order with the stored sub-weight as the per-cell coefficient, the same
// arithmetic as the weighted operator below.
inline hermitian_matrix partial_frame_operator(const continuous_frame_model& model,
                                               const cell_selection& selection) {
  if (selection.sub_weights.size() != model.cell_count())
    throw shape_error("partial_frame_operator: selection length mismatch");
  hermitian_matrix s(model.dimension());
  for (std::size_t i = 0; i < model.cell_count(); ++i) {
    const measure_cell& cell = model.cell_at(i);
    const double sw = selection.sub_weights[i];
    if (std::isnan(sw) || sw < 0.0)
      throw invalid_input_error("partial_frame_operator: negative sub-weight");
    if (sw > cell.weight * (1.0 + 1e-12))
      throw invalid_input_error("partial_frame_operator: sub-weight exceeds cell weight");
    if (!cell.divisible && detail::fractional_part(sw, cell.weight))
      throw atomicity_error("partial_frame_operator: fractional selection on atom '" + cell.id + "'");
    if (sw == 0.0) continue;
    if (std::isinf(sw)) {
      if (model.value_at(i).norm_squared() > 0.0)
        throw not_bessel_error("partial_frame_operator: infinite sub-weight with nonzero vector");
      continue;
    }
    s.add_scaled_outer(model.value_at(i), sw);
  }
  return s;
}

// S_{sqrt(tau) phi, X} on the cell model: per-cell coefficient tau_i * mu_i.
inline hermitian_matrix weighted_frame_operator(const continuous_frame_model& model,
                                                std::span<const double> tau) {
  if (tau.size() != model.cell_count())
    throw invalid_weight_error("weighted_frame_operator: tau length mismatch");
  hermitian_matrix s(model.dimension());
  for (std::size_t i = 0; i < model.cell_count(); ++i) {
    const double t = tau[i];
    if (!(t >= 0.0 && t <= 1.0))
      throw invalid_weight_error("weighted_frame_operator: tau outside [0,1]");
    const double coeff = t * model.cell_at(i).weight;
    if (coeff == 0.0) continue;
    if (std::isinf(coeff)) {
      if (model.value_at(i).norm_squared() > 0.0)
        throw not_bessel_error("weighted_frame_operator: infinite weighted cell with nonzero vector");
      continue;
    }
    s.add_scaled_outer(model.value_at(i), coeff);
  }
  return s;
}

// On a piecewise-constant model, picks sub-weight tau_n * mu_n of each cell.
// With that choice S_{psi,E} = S_{sqrt(tau) psi, X} identically: both sides
// use the per-cell coefficient tau_n * mu_n, so the equality is one of
// arithmetic, not an estimate.
inline cell_selection select_subset_matching_weights(const continuous_frame_model& model,
                                                     std::span<const double> tau) {
  if (!model.piecewise_constant)
    throw hypothesis_error("select_subset_matching_weights: model must be piecewise constant");
  if (tau.size() != model.cell_count())
    throw invalid_weight_error("select_subset_matching_weights: tau length mismatch");
  cell_selection selection;
  selection.sub_weights.resize(model.cell_count(), 0.0);
  for (std::size_t i = 0; i < model.cell_count(); ++i) {
    const double t = tau[i];
    if (!(t >= 0.0 && t <= 1.0))
      throw invalid_weight_error("select_subset_matching_weights: tau outside [0,1]");
    const measure_cell& cell = model.cell_at(i);
    if (!cell.divisible && t > 1e-12 && t < 1.0 - 1e-12 && cell.weight > 0.0)
      throw atomicity_error("select_subset_matching_weights: fractional weight on atom '" +
                            cell.id + "'");
    selection.sub_weights[i] = t * cell.weight;
  }
  return selection;
}

// ---------------------------------------------------------------------------
// Countable-valued approximation.
//
// Cells are binned into norm shells Y_0 = {||phi|| < 1},
// Y_n = {2^{n-1} <= ||phi|| < 2^n} by their sample-point norm, and each shell
// is greedily grouped in cell order into weight groups of total measure <= 1.
// A cell in shell n, group m must have oscillation <= eps / (4^n 2^{m+1});
// violating divisible cells are split by the model's refiner until every
// target holds.  The resulting piecewise-constant model satisfies
// ||S_{sqrt(tau) phi} - S_{sqrt(tau) psi}|| <= 6 eps for every weight
// function tau.  Cells with oscillation exactly 0 contribute no error and are
// exempt from the grouping constraint.
// ---------------------------------------------------------------------------

struct approximation_result {
  continuous_frame_model model;       // piecewise constant
  double error_bound = 0.0;           // 6 eps
  std::vector<std::size_t> origin;    // refined cell -> input cell index
};

namespace detail {

inline int norm_shell(double norm) {
  if (norm < 1.0) return 0;
  int n = static_cast<int>(std::floor(std::log2(norm))) + 1;
  // Guard against boundary rounding of log2.
  while (std::exp2(n - 1) > norm) --n;
  while (norm >= std::exp2(n)) ++n;
  return n;
}

struct refinement_entry {
  measure_cell cell;
  cvector value;
  double oscillation = 0.0;
  std::size_t origin = 0;
};

}  // namespace detail

inline approximation_result approximate_by_countable(const continuous_frame_model& model,
                                                     double epsilon,
                                                     const oscillation_oracle& oracle,
                                                     int max_depth = 48) {
  if (!(epsilon > 0.0)) throw invalid_input_error("approximate_by_countable: epsilon must be > 0");
  if (!oracle) throw invalid_input_error("approximate_by_countable: missing oscillation oracle");

  std::vector<detail::refinement_entry> entries;
  entries.reserve(model.cell_count());
  for (std::size_t i = 0; i < model.cell_count(); ++i) {
    detail::refinement_entry e;
    e.cell = model.cell_at(i);
    e.value = model.value_at(i);
    e.oscillation = oracle(e.cell);
    e.origin = i;
    if (!(e.oscillation >= 0.0) || std::isnan(e.oscillation))
      throw invalid_input_error("approximate_by_countable: oracle returned a negative bound");
    entries.push_back(std::move(e));
  }

  bool changed = true;
  int depth = 0;
  while (changed) {
    changed = false;

    // Group pass: shell index, then greedy weight groups of measure <= 1.
    // Exact cells (oscillation 0) and null cells contribute nothing and are
    // skipped; infinite cells must be exact.
    std::vector<double> targets(entries.size(), std::numeric_limits<double>::infinity());
    {
      std::vector<std::pair<int, double>> group_state;  // per shell: (m, accumulated weight)
      auto state_for = [&](int shell) -> std::pair<int, double>& {
        if (static_cast<int>(group_state.size()) <= shell)
          group_state.resize(shell + 1, {1, 0.0});
        return group_state[static_cast<std::size_t>(shell)];
      };
      for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.oscillation == 0.0 || e.cell.weight == 0.0) continue;
        if (std::isinf(e.cell.weight))
          throw not_bessel_error("approximate_by_countable: oscillating cell of infinite measure");
        const int shell = detail::norm_shell(e.value.norm());
        auto& [m, acc] = state_for(shell);
        double w = e.cell.weight;
        if (w > 1.0) {
          // A heavy oscillating cell cannot sit inside a unit-measure group.
          if (e.cell.divisible) {
            targets[i] = 0.0;  // force a split below
            continue;
          }
          throw irreducible_cell_error(
              "approximate_by_countable: atomic cell '" + e.cell.id +
              "' of measure > 1 with nonzero oscillation");
        }
        if (acc + w > 1.0 + 1e-12) {
          ++m;
          acc = 0.0;
        }
        acc += w;
        targets[i] = epsilon / (std::exp2(2.0 * shell) * std::exp2(m + 1));
      }
    }

    std::vector<detail::refinement_entry> next;
    next.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      auto& e = entries[i];
      if (e.oscillation <= targets[i]) {
        next.push_back(std::move(e));
        continue;
      }
      if (!e.cell.divisible)
        throw irreducible_cell_error("approximate_by_countable: oracle cannot certify atom '" +
                                     e.cell.id + "'");
      if (!model.refiner)
        throw hypothesis_error("approximate_by_countable: model has no refiner");
      auto children = model.refiner(e.cell);
      if (children.empty())
        throw refinement_limit_error("approximate_by_countable: refiner returned no children");
      double child_sum = 0.0;
      for (const measure_cell& child : children) child_sum += child.weight;
      if (std::isfinite(e.cell.weight) &&
          std::abs(child_sum - e.cell.weight) > 1e-9 * std::max(1.0, e.cell.weight))
        throw invalid_input_error("approximate_by_countable: refiner does not preserve measure");
      for (measure_cell& child : children) {
        detail::refinement_entry c;
        c.value = model.evaluator()(child.point);
        c.cell = std::move(child);
        c.oscillation = oracle(c.cell);
        c.origin = e.origin;
        next.push_back(std::move(c));
      }
      changed = true;
    }
    entries = std::move(next);

    if (changed && ++depth > max_depth)
      throw refinement_limit_error("approximate_by_countable: refinement did not converge within depth " +
                                   std::to_string(max_depth));
  }

  std::vector<measure_cell> cells;
  std::vector<cvector> values;
  std::vector<std::size_t> origin;
  cells.reserve(entries.size());
  values.reserve(entries.size());
  origin.reserve(entries.size());
  for (auto& e : entries) {
    cells.push_back(std::move(e.cell));
    values.push_back(std::move(e.value));
    origin.push_back(e.origin);
  }
  // The output evaluator replays the frozen per-cell values; refined models
  // are piecewise constant by construction.
  auto table = std::make_shared<std::vector<std::pair<std::vector<double>, cvector>>>();
  table->reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) table->emplace_back(cells[i].point, values[i]);
  cell_evaluator frozen = [table](const std::vector<double>& point) -> cvector {
    for (const auto& [p, v] : *table)
      if (p == point) return v;
    throw invalid_input_error("piecewise model: no value stored for the requested point");
  };
  continuous_frame_model out(std::move(cells), std::move(values), std::move(frozen),
                             model.dimension(), model.label());
  out.piecewise_constant = true;
  out.refiner = halving_refiner();
  out.norm_cap = model.norm_cap;

  approximation_result result{std::move(out), 6.0 * epsilon, std::move(origin)};
  return result;
}

}  // namespace framekit
