#include <doctest.h>

#include <algorithm>
#include <random>

#include "ffcg/errors.hpp"
#include "ffcg/features.hpp"
#include "ffcg/pricing_csp.hpp"

using namespace ffcg;

namespace {

struct Fixture {
  std::vector<Column> columns;
  LpSolution solution;
  std::vector<Candidate> candidates;
};

// Two dense existing columns on two rows plus one candidate touching row 0.
Fixture dense_two_by_two() {
  Fixture f;
  Column a;
  a.cost = 1;
  a.coeffs = Eigen::Vector2d(2, 1);
  a.id = 0;
  a.iters_in_basis = 3;
  a.entered_last_iter = true;
  Column b;
  b.cost = 1;
  b.coeffs = Eigen::Vector2d(1, 3);
  b.id = 1;
  b.iters_out_of_basis = 2;
  f.columns = {a, b};

  LpProblem lp;
  lp.costs = Eigen::Vector2d(1, 1);
  lp.constraint_matrix.resize(2, 2);
  lp.constraint_matrix << 2, 1, 1, 3;
  lp.rhs = Eigen::Vector2d(5, 5);
  f.solution = solve(lp);
  return f;
}

Candidate make_candidate(int id, Eigen::VectorXd coeffs, double rc) {
  Candidate c;
  c.column.cost = 1;
  c.column.coeffs = std::move(coeffs);
  c.column.id = id;
  c.column.problem_feature = 4;
  c.reduced_cost = rc;
  return c;
}

}  // namespace

TEST_CASE("build_state: dense 2x2 graph") {
  const auto f = dense_two_by_two();
  REQUIRE(f.solution.optimal());
  const auto s = build_state(f.columns, f.solution, {});
  CHECK(s.column_count() == 2);
  CHECK(s.constraint_count() == 2);
  CHECK(s.edges.size() == 4);
  CHECK(!s.stop_node_index);
  CHECK(s.column_features(0, kColumnConnectivity) == 2);
  CHECK(s.constraint_features(0, kConstraintConnectivity) == 2);
  CHECK(s.column_features(0, kItersInBasis) == 3);
  CHECK(s.column_features(0, kEnteredBasisLastIter) == 1);
  CHECK(s.column_features(1, kItersOutOfBasis) == 2);
  CHECK(s.column_features(0, kNodeStatus) == kStatusExisting);
  for (int r = 0; r < 2; ++r)
    CHECK(s.constraint_features(r, kDualValue) == doctest::Approx(f.solution.duals(r)));
}

TEST_CASE("build_state: basic columns have zero reduced cost") {
  const auto f = dense_two_by_two();
  const auto s = build_state(f.columns, f.solution, {});
  for (int j = 0; j < 2; ++j) {
    CHECK(s.column_features(j, kSolutionValue) == doctest::Approx(f.solution.primal(j)));
    if (f.solution.primal(j) > 1e-9) CHECK(std::abs(s.column_features(j, kReducedCost)) < 1e-7);
  }
}

TEST_CASE("build_state: candidates follow existing columns") {
  const auto f = dense_two_by_two();
  const std::vector<Candidate> cands = {make_candidate(7, Eigen::Vector2d(1, 0), -0.25),
                                        make_candidate(8, Eigen::Vector2d(0, 1), -0.5)};
  const auto s = build_state(f.columns, f.solution, cands);
  CHECK(s.column_count() == 4);
  CHECK(s.edges.size() == 6);
  CHECK(s.node_of(7) == 2);
  CHECK(s.node_of(8) == 3);
  CHECK(s.column_features(2, kReducedCost) == -0.25);
  CHECK(s.column_features(2, kSolutionValue) == 0);
  CHECK(s.column_features(2, kNodeStatus) == kStatusSelectable);
  CHECK(s.column_features(2, kProblemFeature) == 4);
  CHECK(s.constraint_features(0, kConstraintConnectivity) == 3);
  CHECK(s.selectable_nodes() == std::vector<int>{2, 3});
}

TEST_CASE("build_state: inconsistent inputs") {
  auto f = dense_two_by_two();
  f.columns.pop_back();
  CHECK_THROWS_AS(build_state(f.columns, f.solution, {}), StateInconsistency);
  auto g = dense_two_by_two();
  g.solution.status = LpStatus::Infeasible;
  CHECK_THROWS_AS(build_state(g.columns, g.solution, {}), StateInconsistency);
  auto h = dense_two_by_two();
  const std::vector<Candidate> bad = {
      make_candidate(3, Eigen::Vector2d(1, 1), std::numeric_limits<double>::quiet_NaN())};
  CHECK_THROWS_AS(build_state(h.columns, h.solution, bad), StateInconsistency);
}

TEST_CASE("update_context: picks flip status and STOP appears once") {
  const auto f = dense_two_by_two();
  const std::vector<Candidate> cands = {make_candidate(7, Eigen::Vector2d(1, 0), -0.25),
                                        make_candidate(8, Eigen::Vector2d(0, 1), -0.5)};
  const auto s0 = build_state(f.columns, f.solution, cands);
  const auto s1 = update_context(s0, 7);
  CHECK(s1.column_features(2, kNodeStatus) == kStatusSelected);
  REQUIRE(s1.stop_node_index);
  CHECK(*s1.stop_node_index == 4);
  CHECK(s1.column_ids.back() == kStopId);
  CHECK(s1.column_features.row(4).cwiseAbs().sum() == 1.0);
  CHECK(s1.column_features(4, kNodeStatus) == kStatusSelectable);
  CHECK(s1.edges.size() == s0.edges.size() + 2);
  // STOP does not count towards constraint connectivity.
  CHECK(s1.constraint_features == s0.constraint_features);

  const auto s2 = update_context(s1, 8);
  CHECK(s2.column_count() == 5);
  CHECK(std::count(s2.column_ids.begin(), s2.column_ids.end(), kStopId) == 1);
  CHECK(s2.selectable_nodes() == std::vector<int>{4});

  // Rebuilding with the picks gives the same state.
  const std::vector<int> picks = {7, 8};
  CHECK(build_state(f.columns, f.solution, cands, picks) == s2);
}

TEST_CASE("update_context: rejects ids that are not selectable") {
  const auto f = dense_two_by_two();
  const std::vector<Candidate> cands = {make_candidate(7, Eigen::Vector2d(1, 0), -0.25)};
  const auto s = build_state(f.columns, f.solution, cands);
  CHECK_THROWS_AS(update_context(s, 0), UnknownColumn);   // existing column
  CHECK_THROWS_AS(update_context(s, 42), UnknownColumn);  // absent
  CHECK_THROWS_AS(update_context(s, kStopId), UnknownColumn);
  const auto s1 = update_context(s, 7);
  CHECK_THROWS_AS(update_context(s1, 7), UnknownColumn);
}

TEST_CASE("normalize_features: identity profile is a no-op") {
  const auto f = dense_two_by_two();
  const std::vector<Candidate> cands = {make_candidate(7, Eigen::Vector2d(1, 0), -0.25)};
  const auto s = update_context(build_state(f.columns, f.solution, cands), 7);
  CHECK(normalize_features(s, ScalingProfile::identity()) == s);
}

TEST_CASE("normalize_features: reduced-cost scaling") {
  const auto f = dense_two_by_two();
  const std::vector<Candidate> cands = {make_candidate(7, Eigen::Vector2d(1, 0), -0.25)};
  const auto s = build_state(f.columns, f.solution, cands);
  auto p = ScalingProfile::identity();
  const double obj0 = f.solution.objective;
  p.column_scale(kReducedCost) = 1.0 / obj0;
  const auto n = normalize_features(s, p);
  for (int i = 0; i < s.column_count(); ++i) {
    CHECK(n.column_features(i, kReducedCost) ==
          doctest::Approx(s.column_features(i, kReducedCost) / obj0));
    for (int k = 1; k < kColumnFeatureCount; ++k)
      CHECK(n.column_features(i, k) == s.column_features(i, k));
  }
}

TEST_CASE("fit_profile: standardized features stay inside the clip") {
  std::mt19937_64 rng(11);
  std::vector<BipartiteState> states;
  for (int t = 0; t < 6; ++t) {
    const auto inst = generate_csp(100 + t, 50, 6);
    std::vector<Column> cols;
    LpProblem lp;
    lp.costs = Eigen::VectorXd::Ones(6);
    lp.constraint_matrix = Eigen::MatrixXd::Zero(6, 6);
    for (int j = 0; j < 6; ++j) {
      std::vector<int> counts(6, 0);
      counts[j] = 50 / inst.weights[j];
      const auto col_pat = make_pattern(inst, counts);
      Column c = pattern_column(col_pat, 6);
      c.id = j;
      cols.push_back(c);
      lp.constraint_matrix.col(j) = c.coeffs;
    }
    lp.rhs = Eigen::Map<const Eigen::VectorXi>(inst.demands.data(), 6).cast<double>();
    const auto sol = solve(lp);
    REQUIRE(sol.optimal());
    std::vector<Candidate> cands;
    for (const auto& pp : price_csp(inst, sol.duals, 10, 1.0)) {
      Candidate c{pattern_column(pp.pattern, 6), pp.reduced_cost};
      c.column.id = 100 + static_cast<int>(cands.size());
      cands.push_back(c);
    }
    states.push_back(build_state(cols, sol, cands));
  }
  const auto p = fit_profile(states);
  CHECK(p.clip == 5.0);
  for (int f = 0; f < kColumnFeatureCount; ++f) {
    if (!is_passthrough_feature(f)) continue;
    CHECK(p.column_shift(f) == 0.0);
    CHECK(p.column_scale(f) == 1.0);
  }
  for (const auto& s : states) {
    const auto n = normalize_features(s, p);
    CHECK(n.column_features.cwiseAbs().maxCoeff() <= 5.0);
    CHECK(n.constraint_features.cwiseAbs().maxCoeff() <= 5.0);
    CHECK(n.column_features.col(kNodeStatus) == s.column_features.col(kNodeStatus));
  }
  CHECK(fit_profile(states) == p);
}
