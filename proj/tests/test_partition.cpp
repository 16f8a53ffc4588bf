#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "framekit/partition.hpp"
#include "test_helpers.hpp"

using namespace framekit;
using fktest::random_parseval_frame;

namespace {

// c copies of the standard basis of C^2 scaled by 1/sqrt(c): a Parseval
// frame with every vector of norm square 1/c.
frame_system scaled_onb_copies(int c) {
  std::vector<cvector> vecs;
  const double s = 1.0 / std::sqrt(static_cast<double>(c));
  for (int copy = 0; copy < c; ++copy) {
    vecs.push_back(cvector::basis(2, 0).scaled(s));
    vecs.push_back(cvector::basis(2, 1).scaled(s));
  }
  return frame_system(std::move(vecs));
}

// Random unitary columns of C^d via the canonical transform of a Gaussian
// square system.
frame_system random_unitary_columns(rng& r, std::size_t d) {
  return canonical_parseval(fktest::random_system(r, d, d));
}

}  // namespace

TEST_CASE("weaver_target closed forms") {
  CHECK(weaver_target(2, 0.0, 0.5) == 0.5);
  CHECK(std::abs(weaver_target(2, 0.5, 0.5) - 2.0) < 1e-15);        // 0.5 (1+1)^2
  CHECK(std::abs(weaver_target(3, 1.0 / 12.0, 1.0 / 3.0) - 0.75) < 1e-15);  // (1/3)(3/2)^2
}

TEST_CASE("two-value target for r*delta < 1/2") {
  // t (1 + 2 sqrt(e) sqrt(1-e)) with e = 2 * 0.1 = 0.2.
  const double e = 0.2;
  CHECK(std::abs(weaver_target_two_value(2, 0.1, 0.5) -
                 0.5 * (1.0 + 2.0 * std::sqrt(e) * std::sqrt(1.0 - e))) < 1e-15);
  CHECK_THROWS_AS(weaver_target_two_value(2, 0.3, 0.5), invalid_input_error);
}

TEST_CASE("exhaustive search splits an orthonormal basis") {
  const frame_system onb({cvector::basis(2, 0), cvector::basis(2, 1)});
  const auto cert = search_weaver_partition(onb, partition_spec::uniform(2));
  CHECK(cert.mode == "exhaustive");
  CHECK(cert.satisfied);
  CHECK(cert.delta == 1.0);
  // Targets 0.5 (1 + sqrt 2)^2 ~ 2.914; both blocks reach norm <= 1.
  CHECK(std::abs(cert.target_bound_per_block[0] - 0.5 * std::pow(1.0 + std::sqrt(2.0), 2)) < 1e-12);
  for (double upper : cert.per_block_upper) CHECK(upper <= cert.target_bound_per_block[0] + 1e-9);
}

TEST_CASE("exhaustive search splits duplicated Parseval copies") {
  // {e1, e1, e2, e2}/sqrt(2): delta = 1/2, targets 2; the best split pairs
  // one copy of each basis vector per block, giving block norm 1/2.
  const auto f = scaled_onb_copies(2);
  const auto cert = search_weaver_partition(f, partition_spec::uniform(2));
  CHECK(cert.satisfied);
  CHECK(cert.per_block_upper[0] <= 0.5 + 1e-12);
  CHECK(cert.per_block_upper[1] <= 0.5 + 1e-12);
  CHECK(cert.vacuous_target);  // targets 2 >= Bessel bound 1
}

TEST_CASE("single vector allows an empty block") {
  const frame_system single({cvector::basis(2, 0).scaled(0.8)});
  const auto cert = search_weaver_partition(single, partition_spec::uniform(2));
  CHECK(cert.satisfied);
  const double min_target = std::min(cert.target_bound_per_block[0], cert.target_bound_per_block[1]);
  CHECK(0.64 <= min_target);
  CHECK((cert.per_block_upper[0] == 0.0 || cert.per_block_upper[1] == 0.0));
}

TEST_CASE("unbalanced proportions exercise a non-vacuous target") {
  const frame_system onb({cvector::basis(2, 0), cvector::basis(2, 1)});
  partition_spec spec;
  spec.arity = 2;
  spec.proportions = {0.9, 0.1};
  const auto cert = search_weaver_partition(onb, spec, {});
  CHECK_FALSE(cert.vacuous_target);  // 0.1 (1 + sqrt 2)^2 ~ 0.58 < ||S|| = 1
  CHECK(cert.satisfied);             // everything fits in the wide block
}

TEST_CASE("exhaustive search is optimal for the max normalized block norm") {
  rng r(57);
  for (int trial = 0; trial < 5; ++trial) {
    auto f = random_parseval_frame(r, 2, 6);
    const auto cert = search_weaver_partition(f, partition_spec::uniform(2));
    double returned = 0.0;
    for (int k = 0; k < 2; ++k)
      returned = std::max(returned, cert.per_block_upper[k] / cert.target_bound_per_block[k]);
    // Independent full enumeration of the 2^6 assignments.
    for (int code = 0; code < 64; ++code) {
      hermitian_matrix b0(2), b1(2);
      for (int i = 0; i < 6; ++i)
        ((code >> i) & 1 ? b1 : b0).add_scaled_outer(f.vector_at(i), f.weight_at(i));
      const double score = std::max(operator_norm(b0) / cert.target_bound_per_block[0],
                                    operator_norm(b1) / cert.target_bound_per_block[1]);
      CHECK(score >= returned - 1e-12);
    }
  }
}

TEST_CASE("certificates are self-verifying from the assignment") {
  rng r(61);
  auto f = random_parseval_frame(r, 3, 7);
  const auto cert = search_weaver_partition(f, partition_spec::uniform(3));
  for (int k = 0; k < 3; ++k) {
    hermitian_matrix sum(3);
    for (std::size_t i = 0; i < f.size(); ++i)
      if (cert.assignment[i] == k) sum.add_scaled_outer(f.vector_at(i), f.weight_at(i));
    CHECK(std::abs(operator_norm(sum) - cert.per_block_upper[k]) <= 1e-10);
    CHECK(std::abs(min_eigenvalue(sum) - cert.per_block_lower[k]) <= 1e-10);
  }
}

TEST_CASE("randomized search is deterministic in the seed") {
  const auto f = scaled_onb_copies(10);  // m = 20 vectors
  search_options options;
  options.mode = search_mode::randomized;
  options.trials = 500;
  options.seed = 99;
  const auto a = search_weaver_partition(f, partition_spec::uniform(2), options);
  const auto b = search_weaver_partition(f, partition_spec::uniform(2), options);
  CHECK(a.assignment == b.assignment);
  CHECK(a.per_block_upper == b.per_block_upper);
  CHECK(a.seed == 99);
  CHECK(a.trials == 500);
  CHECK(a.mode == "randomized");

  options.seed = 100;
  const auto c = search_weaver_partition(f, partition_spec::uniform(2), options);
  CHECK(c.satisfied);
}

TEST_CASE("search rejects systems above the Bessel bound and over budget") {
  const frame_system loud({cvector::basis(2, 0).scaled(1.2)});
  CHECK_THROWS_AS(search_weaver_partition(loud, partition_spec::uniform(2)), hypothesis_error);

  const auto f = scaled_onb_copies(12);  // m = 24
  search_options options;
  options.mode = search_mode::exhaustive;
  options.max_exhaustive_assignments = 1u << 20;
  CHECK_THROWS_AS(search_weaver_partition(f, partition_spec::uniform(2), options),
                  search_budget_error);
}

TEST_CASE("two_sided_certificate on the orthonormal basis split") {
  const frame_system onb({cvector::basis(2, 0), cvector::basis(2, 1)});
  const auto cert = search_weaver_partition(onb, partition_spec::uniform(2));
  const auto report = two_sided_certificate(onb, cert);
  // Each block is diag(1,0) or diag(0,1); the deviation from I/2 is 1/2.
  CHECK(std::abs(report.deviations[0] - 0.5) < 1e-12);
  CHECK(std::abs(report.deviations[1] - 0.5) < 1e-12);
  CHECK(std::abs(report.bound - (2.0 * std::sqrt(2.0) + 2.0)) < 1e-12);
  CHECK(report.all_within);
}

TEST_CASE("two_sided_certificate with a single block is exact") {
  const frame_system onb({cvector::basis(2, 0), cvector::basis(2, 1)});
  partition_certificate whole;
  whole.assignment = {0, 0};
  whole.per_block_upper = {1.0};
  whole.per_block_lower = {1.0};
  whole.proportions = {1.0};
  const auto report = two_sided_certificate(onb, whole);
  CHECK(report.deviations[0] <= 1e-12);
  CHECK(report.all_within);
}

TEST_CASE("two_sided deviations shrink as delta decreases") {
  search_options options;
  options.trials = 20000;
  std::vector<double> deviations;
  for (int c : {4, 16, 64}) {  // delta = 1/4, 1/16, 1/64
    const auto f = scaled_onb_copies(c);
    const auto cert = search_weaver_partition(f, partition_spec::uniform(2), options);
    const auto report = two_sided_certificate(f, cert);
    deviations.push_back(std::max(report.deviations[0], report.deviations[1]));
    CHECK(report.all_within);
  }
  CHECK(deviations[1] <= deviations[0] + 1e-12);
  CHECK(deviations[2] <= deviations[1] + 1e-12);
}

TEST_CASE("two_sided_certificate requires Parseval input") {
  const frame_system loud({cvector::basis(2, 0).scaled(0.9), cvector::basis(2, 1)});
  partition_certificate cert;
  cert.assignment = {0, 1};
  cert.proportions = {0.5, 0.5};
  cert.per_block_upper = {0.81, 1.0};
  cert.per_block_lower = {0.0, 0.0};
  CHECK_THROWS_AS(two_sided_certificate(loud, cert), hypothesis_error);
}

TEST_CASE("bisect_frame splits two orthonormal bases") {
  // A = B = 2, delta = 1: each half lands on one orthonormal basis with
  // bounds (1,1); the window is [(1 - 5/sqrt 2), (1 + 5/sqrt 2)] * {A,B} / 2.
  std::vector<cvector> vecs{cvector::basis(2, 0), cvector::basis(2, 1), cvector::basis(2, 0),
                            cvector::basis(2, 1)};
  const frame_system f(vecs);
  const auto result = bisect_frame(f);
  CHECK(result.satisfied);
  CHECK(std::abs(result.lower_target - 0.5 * (1.0 - 5.0 / std::sqrt(2.0)) * 2.0) < 1e-12);
  CHECK(std::abs(result.upper_target - 0.5 * (1.0 + 5.0 / std::sqrt(2.0)) * 2.0) < 1e-12);
  for (int k = 0; k < 2; ++k) {
    CHECK(std::abs(result.measured[k].first - 1.0) < 1e-9);
    CHECK(std::abs(result.measured[k].second - 1.0) < 1e-9);
  }
  CHECK(result.indices_first.size() + result.indices_second.size() == 4);
}

TEST_CASE("bisect_frame requires A > delta") {
  const frame_system onb({cvector::basis(2, 0), cvector::basis(2, 1)});  // A = delta = 1
  CHECK_THROWS_AS(bisect_frame(onb), hypothesis_error);
}

TEST_CASE("bisect_frame on random unions of scaled unitary bases") {
  rng r(73);
  for (int trial = 0; trial < 3; ++trial) {
    // Four random orthonormal bases scaled by 1/2: Parseval with delta = 1/4.
    std::vector<cvector> vecs;
    for (int b = 0; b < 4; ++b) {
      const auto u = random_unitary_columns(r, 2);
      for (std::size_t i = 0; i < 2; ++i) vecs.push_back(u.vector_at(i).scaled(0.5));
    }
    const frame_system f(vecs);
    const auto result = bisect_frame(f);
    CHECK(result.satisfied);
    for (int k = 0; k < 2; ++k) {
      CHECK(result.measured[k].first >= result.lower_target - 1e-9);
      CHECK(result.measured[k].second <= result.upper_target + 1e-9);
    }
  }
}

TEST_CASE("bisection schedule hand case delta = 1/400") {
  const auto schedule = compute_sou_schedule(1.0 / 400.0);
  // A_1 = (1 - 5/20)/2 = 0.375 >= 100 delta = 0.25; A_2 ~ 0.11095 < 0.25.
  CHECK(schedule.stopping_index == 1);
  CHECK(std::abs(schedule.lower_seq[1] - 0.375) < 1e-15);
  CHECK(std::abs(schedule.lower_seq[2] - 0.375 * (1.0 - 5.0 * std::sqrt((1.0 / 400.0) / 0.375)) / 2.0) <
        1e-15);
  CHECK(schedule.lower_seq[2] < 0.25);
  CHECK(schedule.lower_seq[2] >= 25.0 / 400.0);
}

TEST_CASE("bisection schedule invariants on random delta") {
  rng r(79);
  for (int trial = 0; trial < 200; ++trial) {
    const double delta = r.uniform(1e-6, 0.01 - 1e-9);
    const auto s = compute_sou_schedule(delta);
    const int l = s.stopping_index;
    REQUIRE(static_cast<int>(s.lower_seq.size()) == l + 2);
    CHECK(s.lower_seq[0] == 1.0);
    CHECK(s.upper_seq[0] == 1.0);
    for (int j = 0; j <= l; ++j) {
      CHECK(s.lower_seq[j] >= 100.0 * delta);
      // Recursion reproduces to the last ulp.
      const double a = s.lower_seq[j];
      CHECK(s.lower_seq[j + 1] == a * (1.0 - 5.0 * std::sqrt(delta / a)) / 2.0);
      const double b = s.upper_seq[j];
      CHECK(s.upper_seq[j + 1] == b * (1.0 + 5.0 * std::sqrt(delta / b)) / 2.0);
      // While above the stopping threshold the lower sequence at least
      // quarters and at most halves.
      CHECK(s.lower_seq[j + 1] >= 0.25 * a * (1.0 - 1e-12));
      CHECK(s.lower_seq[j + 1] <= 0.5 * a);
    }
    CHECK(s.lower_seq[l + 1] < 100.0 * delta);
    CHECK(s.lower_seq[l + 1] >= 25.0 * delta * (1.0 - 1e-12));
    CHECK(s.upper_seq[l + 1] <= s.C_estimate * s.lower_seq[l + 1] * (1.0 + 1e-12));
    CHECK(s.upper_seq[l + 1] < universal_schedule_constant() * s.lower_seq[l + 1]);
  }
  CHECK_THROWS_AS(compute_sou_schedule(0.01), domain_error);
  CHECK_THROWS_AS(compute_sou_schedule(0.0), domain_error);
}

TEST_CASE("universal schedule constant matches an independent evaluation") {
  // Frozen from a 40-digit computation of prod (1 + 2^{-1-j/2})/(1 - 2^{-1-j/2}).
  CHECK(std::abs(universal_schedule_constant() - 35.20983033159651) < 1e-10);
  // Second route: exponential of the accumulated logarithms.
  double log_sum = 0.0;
  for (int j = 0; j < 300; ++j) {
    const double x = std::exp2(-1.0 - 0.5 * j);
    log_sum += std::log1p(x) - std::log1p(-x);
  }
  CHECK(std::abs(universal_schedule_constant() - std::exp(log_sum)) < 1e-10);
}

TEST_CASE("partition_to_uniform trivial branch for small tight constants") {
  // Four unscaled orthonormal bases: tight with K = 4 < 100.
  std::vector<cvector> vecs;
  for (int b = 0; b < 4; ++b) {
    vecs.push_back(cvector::basis(2, 0));
    vecs.push_back(cvector::basis(2, 1));
  }
  const frame_system f(vecs);
  const auto result = partition_to_uniform(f);
  CHECK(result.trivial_branch);
  CHECK(result.satisfied);
  REQUIRE(result.blocks.size() == 1);
  CHECK(result.measured[0].first >= 1.0 - 1e-9);
  CHECK(result.measured[0].second <= 100.0 + 1e-9);
  CHECK_FALSE(result.schedule.has_value());
}

TEST_CASE("partition_to_uniform produces 2^(L+1) blocks for K = 400") {
  // 400 copies of the unit vector in C^1: tight constant 400, delta = 1/400,
  // stopping index L = 1, hence exactly 4 blocks.
  std::vector<cvector> vecs(400, cvector::basis(1, 0));
  const frame_system f(vecs);
  search_options options;
  options.trials = 4000;
  const auto result = partition_to_uniform(f, options);
  REQUIRE(result.schedule.has_value());
  CHECK(result.schedule->stopping_index == 1);
  CHECK(result.blocks.size() == 4);
  CHECK(result.satisfied);
  for (const auto& [lo, hi] : result.measured) {
    CHECK(lo >= 1.0 - 1e-9);
    CHECK(hi <= 100.0 * universal_schedule_constant() + 1e-9);
  }
  // Partition property: the blocks reassemble the original index multiset.
  std::vector<std::size_t> all;
  for (const auto& indices : result.block_indices)
    all.insert(all.end(), indices.begin(), indices.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(400);
  std::iota(expected.begin(), expected.end(), std::size_t{0});
  CHECK(all == expected);
}

TEST_CASE("partition_to_uniform hypothesis checks") {
  // Not tight.
  const frame_system loose({cvector::basis(2, 0), cvector::basis(2, 0), cvector::basis(2, 1)});
  CHECK_THROWS_AS(partition_to_uniform(loose), hypothesis_error);
  // Tight constant below one.
  const frame_system small({cvector::basis(2, 0).scaled(0.5), cvector::basis(2, 1).scaled(0.5)});
  CHECK_THROWS_AS(partition_to_uniform(small), hypothesis_error);
  // Vector outside the unit ball.
  std::vector<cvector> vecs;
  for (int b = 0; b < 2; ++b) {
    vecs.push_back(cvector::basis(2, 0).scaled(1.1));
    vecs.push_back(cvector::basis(2, 1).scaled(1.1));
  }
  CHECK_THROWS_AS(partition_to_uniform(frame_system(vecs)), hypothesis_error);
}

TEST_CASE("partition_general on a Parseval frame reduces to the uniform theorem") {
  const auto f = scaled_onb_copies(4);  // Parseval, delta = 1/4
  const auto result = partition_general(f, 0.25);
  CHECK(result.satisfied);
  CHECK(std::abs(result.window_lower - 0.25) < 1e-12);
  CHECK(std::abs(result.window_upper - 100.0 * universal_schedule_constant() * 0.25) < 1e-9);
  for (const auto& [lo, hi] : result.measured) {
    CHECK(lo >= result.window_lower - 1e-9);
    CHECK(hi <= result.window_upper + 1e-9);
  }
}

TEST_CASE("partition_general on a single vector in C^1") {
  const double nu = 0.49;
  const frame_system f({cvector::basis(1, 0).scaled(std::sqrt(nu))});
  const auto result = partition_general(f, nu);
  REQUIRE(result.blocks.size() == 1);
  CHECK(std::abs(result.measured[0].first - nu) < 1e-12);
  CHECK(std::abs(result.measured[0].second - nu) < 1e-12);
  CHECK(result.satisfied);
}

TEST_CASE("partition_general certifies diag-scaled bases end to end") {
  // Non-tight input: two orthonormal bases, one scaled, with distinct A < B.
  std::vector<cvector> vecs;
  for (int b = 0; b < 3; ++b) {
    vecs.push_back(cvector::basis(2, 0).scaled(0.8));
    vecs.push_back(cvector::basis(2, 1).scaled(0.5));
  }
  const frame_system f(vecs);
  const auto bounds = frame_bounds(f);
  CHECK(bounds.lower < bounds.upper);
  const auto result = partition_general(f, bounds.delta);
  CHECK(result.satisfied);
  for (const auto& [lo, hi] : result.measured) {
    CHECK(lo >= result.window_lower - 1e-9);
    CHECK(hi <= result.window_upper + 1e-9);
  }
  CHECK_THROWS_AS(partition_general(f, 0.1), hypothesis_error);  // cap below delta
}
