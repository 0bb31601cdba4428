#pragma once

// Independent reference computations used by the unit and acceptance suites.
// None of these share code paths with the library implementations they check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

struct VertexResult {
  bool feasible = false;
  double objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x;
};

// Minimum of c'x over all basic feasible solutions of {Ax = b, x >= 0}.
// Assumes A has full row rank and the LP is bounded.
inline VertexResult enumerate_vertices(const Eigen::VectorXd& c, const Eigen::MatrixXd& a,
                                       const Eigen::VectorXd& b) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  VertexResult best;
  std::vector<int> pick(m);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == m) {
      Eigen::MatrixXd basis(m, m);
      for (int i = 0; i < m; ++i) basis.col(i) = a.col(pick[i]);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd xb = lu.solve(b);
      if ((basis * xb - b).norm() > 1e-8) return;
      if (xb.minCoeff() < -1e-9) return;
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < m; ++i) x(pick[i]) = xb(i);
      const double obj = c.dot(x);
      if (!best.feasible || obj < best.objective) {
        best.feasible = true;
        best.objective = obj;
        best.x = x;
      }
      return;
    }
    for (int j = start; j <= n - (m - depth); ++j) {
      pick[depth] = j;
      rec(j + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Random bounded, feasible LP with integer data: b = A x0 with x0 >= 0 and
// c = A'y + s with s >= 0 (dual feasible, hence bounded).
struct RandomLp {
  Eigen::VectorXd c;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

inline RandomLp random_lp(std::mt19937_64& rng, int m, int n) {
  std::uniform_int_distribution<int> coef(-3, 6);
  std::uniform_int_distribution<int> xval(0, 3);
  std::uniform_int_distribution<int> yval(-2, 2);
  std::uniform_int_distribution<int> slack(0, 4);
  RandomLp lp;
  while (true) {
    lp.a.resize(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) lp.a(i, j) = coef(rng);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(lp.a);
    if (lu.rank() == m) break;
  }
  Eigen::VectorXd x0(n), y(m), s(n);
  for (int j = 0; j < n; ++j) x0(j) = xval(rng);
  for (int i = 0; i < m; ++i) y(i) = yval(rng);
  for (int j = 0; j < n; ++j) s(j) = slack(rng);
  lp.b = lp.a * x0;
  lp.c = lp.a.transpose() * y + s;
  return lp;
}

// ---- pricing -------------------------------------------------------------

// Every count vector with sum w_j x_j <= capacity.
inline void enumerate_patterns(const std::vector<int>& weights, int capacity,
                               const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> x(weights.size(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t j, int left) {
    if (j == weights.size()) {
      visit(x);
      return;
    }
    for (int c = 0; c * weights[j] <= left; ++c) {
      x[j] = c;
      rec(j + 1, left - c * weights[j]);
    }
    x[j] = 0;
  };
  rec(0, capacity);
}

// Minimum of 1 - duals'x over all feasible patterns.
inline double best_pattern_reduced_cost(const std::vector<int>& weights, int capacity,
                                        const Eigen::VectorXd& duals) {
  double best = 1.0;
  enumerate_patterns(weights, capacity, [&](const std::vector<int>& x) {
    double v = 0;
    for (std::size_t j = 0; j < x.size(); ++j) v += duals(static_cast<Eigen::Index>(j)) * x[j];
    best = std::min(best, 1.0 - v);
  });
  return best;
}

struct PlainSite {
  double x, y, demand, ready, due, service;
};

struct EnumeratedRoute {
  std::vector<int> customers;  // 1-based, in visiting order
  double cost;
};

inline double plain_distance(const PlainSite& a, const PlainSite& b) {
  return std::floor(std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y)) * 10.0 + 1e-9) / 10.0;
}

// All feasible elementary routes: depot = sites[0], customers 1..n.
inline std::vector<EnumeratedRoute> enumerate_routes(const std::vector<PlainSite>& sites,
                                                     double capacity) {
  const int n = static_cast<int>(sites.size()) - 1;
  std::vector<EnumeratedRoute> out;
  std::vector<int> path;
  std::vector<bool> used(n + 1, false);
  std::function<void(int, double, double, double)> rec = [&](int at, double time, double load,
                                                              double cost) {
    if (at != 0) {
      const double back = time + sites[at].service + plain_distance(sites[at], sites[0]);
      if (back <= sites[0].due + 1e-9) out.push_back({path, cost + plain_distance(sites[at], sites[0])});
    }
    for (int j = 1; j <= n; ++j) {
      if (used[j]) continue;
      const double arrive = time + sites[at].service + plain_distance(sites[at], sites[j]);
      const double start = std::max(arrive, sites[j].ready);
      if (start > sites[j].due + 1e-9) continue;
      if (load + sites[j].demand > capacity + 1e-9) continue;
      used[j] = true;
      path.push_back(j);
      rec(j, start, load + sites[j].demand, cost + plain_distance(sites[at], sites[j]));
      path.pop_back();
      used[j] = false;
    }
  };
  rec(0, sites[0].ready, 0.0, 0.0);
  return out;
}

inline double route_reduced_cost(const EnumeratedRoute& r, const Eigen::VectorXd& duals) {
  double rc = r.cost;
  for (int c : r.customers) rc -= duals(c - 1);
  return rc;
}

}  // namespace oracle
