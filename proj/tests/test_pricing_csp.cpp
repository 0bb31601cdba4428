#include <doctest.h>

#include <random>
#include <set>

#include "ffcg/errors.hpp"
#include "ffcg/pricing_csp.hpp"
#include "oracles.hpp"

using namespace ffcg;

namespace {

CspInstance tiny(int n, std::vector<int> w) {
  CspInstance inst;
  inst.name = "tiny";
  inst.roll_length = n;
  inst.demands.assign(w.size(), 1);
  inst.weights = std::move(w);
  return inst;
}

}  // namespace

TEST_CASE("price_csp: zero duals have no improving pattern") {
  const auto inst = generate_csp(3, 50, 8);
  CHECK(price_csp(inst, Eigen::VectorXd::Zero(8), 10, 0.15).empty());
}

TEST_CASE("price_csp: hand example") {
  const auto inst = tiny(5, {2, 3});
  const auto out = price_csp(inst, Eigen::Vector2d(3, 4), 10, 0.0);
  REQUIRE(!out.empty());
  CHECK(out.front().pattern.counts == std::vector<int>{1, 1});
  CHECK(out.front().reduced_cost == doctest::Approx(-6.0));
  CHECK(out.front().pattern.waste == 0);
  CHECK(oracle::best_pattern_reduced_cost(inst.weights, 5, Eigen::Vector2d(3, 4)) ==
        doctest::Approx(-6.0));
}

TEST_CASE("price_csp: fewer improving patterns than k") {
  // Patterns with 2x1 + 3x2 <= 5: (0,0) (1,0) (2,0) (0,1) (1,1). With duals
  // (0.6, 0.3) improving ones have value > 1: (2,0)=1.2 only... add (1,1)=0.9.
  // Use duals (0.6, 0.5): (2,0)=1.2, (1,1)=1.1 improve; (0,1)=0.5, (1,0)=0.6 do not.
  const auto inst = tiny(5, {2, 3});
  const Eigen::Vector2d duals(0.6, 0.5);
  int improving = 0;
  oracle::enumerate_patterns(inst.weights, 5, [&](const std::vector<int>& x) {
    if (1.0 - (duals(0) * x[0] + duals(1) * x[1]) < 0) ++improving;
  });
  REQUIRE(improving == 2);
  const auto out = price_csp(inst, duals, 3, 1.0);
  CHECK(out.size() == 2);
}

TEST_CASE("price_csp: tie-break by lexicographically smallest counts") {
  // Items 0 and 1 are identical; the pattern using item 0 comes first.
  const auto inst = tiny(4, {4, 4});
  const auto out = price_csp(inst, Eigen::Vector2d(2, 2), 5, 1.0);
  REQUIRE(out.size() == 2);
  CHECK(out[0].pattern.counts == std::vector<int>{0, 1});
  CHECK(out[1].pattern.counts == std::vector<int>{1, 0});
}

TEST_CASE("price_csp: gap filter") {
  const auto inst = tiny(5, {2, 3});
  const Eigen::Vector2d duals(0.6, 0.5);
  // best = -0.2 (pattern (2,0)); (1,1) has -0.1 which exceeds -0.2 * (1 - 0.15).
  const auto out = price_csp(inst, duals, 10, 0.15);
  REQUIRE(out.size() == 1);
  CHECK(out[0].reduced_cost == doctest::Approx(-0.2));
}

TEST_CASE("price_csp: errors") {
  const auto inst = tiny(5, {2, 3});
  CHECK_THROWS_AS(price_csp(inst, Eigen::Vector3d::Zero(), 3, 0.1), DimensionMismatch);
}

TEST_CASE("price_csp: matches brute force, distinct, sorted, monotone in dual scale") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dual(-0.05, 0.5);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 20 + trial % 41;
    const int m = 1 + trial % 10;
    const auto inst = generate_csp(1000 + trial, n, m);
    Eigen::VectorXd duals(m);
    for (int j = 0; j < m; ++j) duals(j) = dual(rng) * inst.weights[j] / n * 3;
    const double ref = oracle::best_pattern_reduced_cost(inst.weights, n, duals);
    const auto out = price_csp(inst, duals, 10, 0.15);
    if (ref >= -kImprovingTolerance) {
      CHECK(out.empty());
      continue;
    }
    REQUIRE(!out.empty());
    CHECK(out.front().reduced_cost == doctest::Approx(ref).epsilon(1e-12));
    std::set<std::vector<int>> seen;
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(seen.insert(out[i].pattern.counts).second);
      CHECK(out[i].pattern.used_length <= n);
      CHECK(out[i].reduced_cost < 0);
      CHECK(out[i].reduced_cost <= out.front().reduced_cost * 0.85 + 1e-12);
      if (i > 0) CHECK(out[i - 1].reduced_cost <= out[i].reduced_cost);
    }
    const auto scaled = price_csp(inst, duals * 1.7, 10, 0.15);
    REQUIRE(!scaled.empty());
    CHECK(scaled.front().reduced_cost <= out.front().reduced_cost + 1e-12);
  }
}

TEST_CASE("pattern_column") {
  const auto inst = tiny(10, {2, 3, 4});
  const auto col = pattern_column(make_pattern(inst, {2, 0, 1}), 3);
  CHECK(col.cost == 1.0);
  CHECK(col.coeffs == Eigen::Vector3d(2, 0, 1));
  CHECK(col.problem_feature == 2);
  CHECK(pattern_column(make_pattern(inst, {1, 1, 0}), 3).coeffs == Eigen::Vector3d(1, 1, 0));
  CHECK(pattern_column(make_pattern(inst, {0, 0, 0}), 3).coeffs.isZero());
}
