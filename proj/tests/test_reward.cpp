#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "ffcg/errors.hpp"
#include "ffcg/reward.hpp"
#include "credit_oracle.hpp"

using namespace ffcg;

namespace {

Column col(int id, double cost, std::vector<double> a) {
  Column c;
  c.id = id;
  c.cost = cost;
  c.coeffs = Eigen::Map<Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
  return c;
}

// Two unit rows covered by two singleton columns.
LpProblem two_row_master() {
  LpProblem p;
  p.costs = Eigen::Vector2d(1, 1);
  p.constraint_matrix = Eigen::Matrix2d::Identity();
  p.rhs = Eigen::Vector2d(1, 1);
  return p;
}

}  // namespace

TEST_CASE("total_reward: worked values") {
  const RewardConfig cfg;
  CHECK(total_reward(50, 50, 100, 0, cfg) == 0.0);
  CHECK(total_reward(100, 90, 100, 2, cfg) == doctest::Approx(199.4).epsilon(1e-12));
  RewardConfig zero_alpha = cfg;
  zero_alpha.alpha = 0;
  CHECK(total_reward(100, 10, 100, 3, zero_alpha) == doctest::Approx(-0.9));
  RewardConfig zero_beta = cfg;
  zero_beta.beta = 0;
  CHECK(total_reward(100, 90, 100, 0, zero_beta) == total_reward(100, 90, 100, 7, zero_beta));
}

TEST_CASE("total_reward: invalid baseline") {
  const RewardConfig cfg;
  CHECK_THROWS_AS(total_reward(1, 0, 0, 0, cfg), InvalidBaseline);
  CHECK_THROWS_AS(total_reward(1, 0, -2, 0, cfg), InvalidBaseline);
}

TEST_CASE("contribution_weights") {
  const std::vector<double> r = {10.0 - 6.0, 10.0 - 7.0};
  const auto w = contribution_weights(r);
  CHECK(!w.uniform_fallback);
  CHECK(w.phi[0] == doctest::Approx(4.0 / 7.0));
  CHECK(w.phi[1] == doctest::Approx(3.0 / 7.0));
  const std::vector<double> one = {2.5};
  CHECK(contribution_weights(one).phi == std::vector<double>{1.0});
  const std::vector<double> zero = {0.0, 0.0, 0.0, 0.0};
  const auto z = contribution_weights(zero);
  CHECK(z.uniform_fallback);
  CHECK(z.phi == std::vector<double>(4, 0.25));
}

TEST_CASE("effective_set: single improving column") {
  const auto master = two_row_master();
  const auto base = solve(master);
  const std::vector<Column> sel = {col(5, 1, {1, 1})};
  CHECK(effective_set(master, base.basis, sel, {}) == std::vector<int>{5});
}

TEST_CASE("effective_set: improving plus dominated column") {
  const auto master = two_row_master();
  const auto base = solve(master);
  const Column a = col(1, 1, {1, 1});
  const Column b = col(2, 0.9, {1, 0});
  // Both price out negatively against the initial duals.
  CHECK(reduced_cost(base, a.cost, a.coeffs) < 0);
  CHECK(reduced_cost(base, b.cost, b.coeffs) < 0);
  const std::vector<Column> sel = {a, b};
  CHECK(effective_set(master, base.basis, sel, {}) == std::vector<int>{1});

  // Enumerate every subset of {a, b}.
  CHECK(oracle::brute_objective(master, {}) == doctest::Approx(2.0));
  CHECK(oracle::brute_objective(master, {a}) == doctest::Approx(1.0));
  CHECK(oracle::brute_objective(master, {b}) == doctest::Approx(1.9));
  CHECK(oracle::brute_objective(master, {a, b}) == doctest::Approx(1.0));

  const auto rep = credit(master, base.basis, sel, {}, 2.0, {});
  CHECK(rep.n_redundant == 1);
  CHECK(rep.column_rewards.at(2) == -0.3);
  CHECK(rep.marginal.at(2) == -0.3);
  CHECK(rep.weights.at(1) == 1.0);
  CHECK(rep.column_rewards.at(1) == doctest::Approx(2000 * 0.5));
  CHECK(rep.total_reward == doctest::Approx(1000 - 0.3));
  CHECK(rep.stop_reward == 0.0);
}

TEST_CASE("assign_credit: unselected supervision") {
  const auto master = two_row_master();
  const auto base = solve(master);
  const std::vector<Column> sel = {col(1, 0.9, {1, 0})};
  const std::vector<Column> unsel = {col(2, 0.8, {0, 1}), col(3, 5, {1, 1})};
  const auto rep = credit(master, base.basis, sel, unsel, 2.0, {});
  CHECK(rep.unselected_rewards.at(2) == 0.3);
  CHECK(rep.unselected_rewards.at(3) == -0.3);
  RewardConfig off;
  off.unselected_supervision = false;
  CHECK(credit(master, base.basis, sel, unsel, 2.0, off).unselected_rewards.empty());
}

TEST_CASE("credit: effective rewards sum to the objective reward") {
  const auto master = two_row_master();
  const auto base = solve(master);
  const std::vector<Column> sel = {col(1, 0.9, {1, 0}), col(2, 0.7, {0, 1})};
  const auto rep = credit(master, base.basis, sel, {}, 2.0, {});
  REQUIRE(rep.effective.size() == 2);
  CHECK(rep.weights.at(1) == doctest::Approx(0.1 / 0.4));
  double sum = 0;
  for (int id : rep.effective) sum += rep.column_rewards.at(id);
  CHECK(std::abs(sum - rep.objective_reward) <= 1e-9 * std::abs(rep.objective_reward));
}

TEST_CASE("credit: matches a from-scratch subset oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> coef(0, 3);
  std::uniform_real_distribution<double> cost(0.3, 1.5);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 3;
    LpProblem master;
    master.costs = Eigen::VectorXd::Ones(m);
    master.constraint_matrix = Eigen::MatrixXd::Identity(m, m);
    master.rhs = Eigen::VectorXd::Constant(m, 2.0);
    const auto base = solve(master);
    const int k = 1 + trial % 4;
    std::vector<Column> sel, unsel;
    for (int i = 0; i < k + 2; ++i) {
      std::vector<double> a(m);
      do {
        for (auto& v : a) v = coef(rng);
      } while (std::all_of(a.begin(), a.end(), [](double v) { return v == 0; }));
      auto c = col(10 + i, std::round(cost(rng) * 20) / 20, a);
      (i < k ? sel : unsel).push_back(c);
    }
    const RewardConfig cfg;
    const double obj0 = base.objective;
    const auto rep = credit(master, base.basis, sel, unsel, obj0, cfg);
    const auto o = oracle::brute_credit(master, sel, unsel, obj0, cfg.alpha, cfg.beta,
                                cfg.redundancy_tolerance);
    CHECK(std::set<int>(rep.effective.begin(), rep.effective.end()) == o.effective);
    CHECK(rep.total_reward == doctest::Approx(o.total).epsilon(1e-9));
    for (const auto& c : sel)
      CHECK(rep.column_rewards.at(c.id) == doctest::Approx(o.rewards.at(c.id)).epsilon(1e-9));
    CHECK(rep.unselected_rewards == o.unselected);

    // Leave-one-out order does not matter.
    auto rev = sel;
    std::reverse(rev.begin(), rev.end());
    const auto eff = effective_set(master, base.basis, rev, cfg);
    CHECK(std::set<int>(eff.begin(), eff.end()) == o.effective);
    ++checked;
  }
  CHECK(checked == 60);
}

TEST_CASE("assign_credit: misaligned inputs") {
  SubsetObjectives objs;
  objs.before = 2;
  objs.all = 1;
  objs.without = {2};
  const std::vector<int> two = {1, 2};
  CHECK_THROWS_AS(assign_credit(two, {}, objs, 2, {}), DimensionMismatch);
  RewardConfig bad;
  bad.beta = -1;
  const std::vector<int> one = {1};
  CHECK_THROWS_AS(assign_credit(one, {}, objs, 2, bad), InvalidArgument);
}
