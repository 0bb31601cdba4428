#include <doctest.h>

#include <random>
#include <set>

#include "ffcg/errors.hpp"
#include "ffcg/pricing_vrptw.hpp"
#include "oracles.hpp"

using namespace ffcg;

namespace {

std::vector<oracle::PlainSite> plain(const VrptwInstance& inst) {
  std::vector<oracle::PlainSite> out;
  for (const auto& s : inst.sites()) out.push_back({s.x, s.y, s.demand, s.ready, s.due, s.service});
  return out;
}

double brute_best(const VrptwInstance& inst, const Eigen::VectorXd& duals) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : oracle::enumerate_routes(plain(inst), inst.capacity()))
    best = std::min(best, oracle::route_reduced_cost(r, duals));
  return best;
}

VrptwInstance two_customers() {
  std::vector<VrptwSite> sites{{0, 0, 0, 0, 0, 1000, 0},
                               {1, 3, 4, 5, 0, 1000, 1},
                               {2, 6, 8, 5, 0, 1000, 1}};
  return VrptwInstance("two", 2, 100, sites);
}

}  // namespace

TEST_CASE("price_vrptw: zero duals give nothing") {
  const auto inst = generate_vrptw(2, 8);
  CHECK(price_vrptw(inst, Eigen::VectorXd::Zero(8), 10, 0.15).empty());
}

TEST_CASE("price_vrptw: two-customer hand example") {
  const auto inst = two_customers();
  // Route 0-1-2-0 costs 5 + 5 + 10 = 20; with duals 30 each rc = -40.
  const auto out = price_vrptw(inst, Eigen::Vector2d(30, 30), 10, 1.0);
  REQUIRE(!out.empty());
  CHECK(out.front().route.vertices == std::vector<int>{0, 1, 2, 3});
  CHECK(out.front().route.cost == doctest::Approx(20.0));
  CHECK(out.front().reduced_cost == doctest::Approx(-40.0));
  CHECK(brute_best(inst, Eigen::Vector2d(30, 30)) == doctest::Approx(-40.0));
  // single-customer routes follow: rc 10 - 30 = -20 and 20 - 30 = -10
  REQUIRE(out.size() == 3);
  CHECK(out[1].reduced_cost == doctest::Approx(-20.0));
  CHECK(out[2].reduced_cost == doctest::Approx(-10.0));
}

TEST_CASE("price_vrptw: customer whose window closes before any arrival") {
  std::vector<VrptwSite> sites{{0, 0, 0, 0, 0, 1000, 0},
                               {1, 3, 4, 5, 0, 1000, 1},
                               {2, 60, 80, 5, 0, 50, 1}};
  const VrptwInstance inst("late", 2, 100, sites);
  const auto out = price_vrptw(inst, Eigen::Vector2d(500, 500), 10, 1.0);
  REQUIRE(!out.empty());
  for (const auto& r : out)
    for (int c : r.route.customers()) CHECK(c != 2);
  for (const auto& r : oracle::enumerate_routes(plain(inst), inst.capacity()))
    for (int c : r.customers) CHECK(c != 2);
}

TEST_CASE("price_vrptw: errors") {
  CHECK_THROWS_AS(price_vrptw(two_customers(), Eigen::Vector3d::Zero(), 3, 0.1),
                  DimensionMismatch);
}

TEST_CASE("price_vrptw: exact against enumeration, dominance-safe, feasible routes") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 3 + trial % 6;
    const auto inst = generate_vrptw(300 + trial, n);
    Eigen::VectorXd duals(n);
    std::uniform_real_distribution<double> d(0.0, 80.0);
    for (int i = 0; i < n; ++i) duals(i) = d(rng);
    const double ref = brute_best(inst, duals);
    const auto pruned = price_vrptw(inst, duals, 10, 0.15);
    const auto full = price_vrptw(inst, duals, 10, 0.15, {.dominance = false, .prune_arcs = false});
    if (ref >= -kImprovingTolerance) {
      CHECK(pruned.empty());
      continue;
    }
    REQUIRE(!pruned.empty());
    REQUIRE(!full.empty());
    CHECK(pruned.front().reduced_cost == doctest::Approx(ref).epsilon(1e-9));
    CHECK(full.front().reduced_cost == doctest::Approx(pruned.front().reduced_cost).epsilon(1e-12));
    std::set<std::vector<int>> seen;
    for (const auto& r : pruned) {
      Route check;
      REQUIRE(evaluate_route(inst, r.route.vertices, check));
      CHECK(check.cost == doctest::Approx(r.route.cost));
      CHECK(r.route.load <= inst.capacity());
      for (std::size_t k = 1; k + 1 < r.route.vertices.size(); ++k) {
        const int v = r.route.vertices[k];
        CHECK(r.route.start_times[k] >= inst.ready(v));
        CHECK(r.route.start_times[k] <= inst.due(v) + 1e-9);
      }
      auto cs = r.route.customers();
      std::sort(cs.begin(), cs.end());
      CHECK(seen.insert(cs).second);
      double rc = r.route.cost;
      for (int c : r.route.customers()) rc -= duals(c - 1);
      CHECK(rc == doctest::Approx(r.reduced_cost));
    }
  }
}

TEST_CASE("price_vrptw: dominance prunes labels") {
  const auto inst = generate_vrptw(17, 10);
  const Eigen::VectorXd duals = Eigen::VectorXd::Constant(10, 60.0);
  price_vrptw(inst, duals, 10, 0.15);
  const auto with = last_labeling_stats();
  price_vrptw(inst, duals, 10, 0.15, {.dominance = false});
  const auto without = last_labeling_stats();
  CHECK(with.labels_created <= without.labels_created);
}

TEST_CASE("route_column") {
  Route r;
  r.vertices = {0, 1, 3, 5};
  r.cost = 12.5;
  const auto col = route_column(r, 4);
  CHECK(col.cost == 12.5);
  CHECK(col.coeffs == Eigen::Vector4d(1, 0, 1, 0));
  r.vertices = {0, 5};
  CHECK(route_column(r, 4).coeffs.isZero());
  r.vertices = {0, 4, 3, 2, 1, 5};
  CHECK(route_column(r, 4).coeffs == Eigen::Vector4d::Ones());
}
