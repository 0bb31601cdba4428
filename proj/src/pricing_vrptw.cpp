#include "ffcg/pricing_vrptw.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>

#include "ffcg/errors.hpp"
#include "ffcg/pricing_csp.hpp"

namespace ffcg {

namespace {

thread_local LabelingStats g_stats;

constexpr double kTimeEps = 1e-9;

struct Label {
  int vertex = 0;
  double reduced = 0;
  double time = 0;
  double load = 0;
  std::uint64_t visited = 0;
  int parent = -1;
  bool dominated = false;
};

bool dominates(const Label& a, const Label& b) {
  return a.reduced <= b.reduced && a.time <= b.time && a.load <= b.load &&
         (a.visited & ~b.visited) == 0;
}

}  // namespace

LabelingStats last_labeling_stats() { return g_stats; }

bool evaluate_route(const VrptwInstance& instance, const std::vector<int>& vertices, Route& out) {
  const int sink = instance.sink();
  if (vertices.size() < 2 || vertices.front() != 0 || vertices.back() != sink) return false;
  std::vector<char> seen(instance.vertex_count(), 0);
  out.vertices = vertices;
  out.start_times.assign(vertices.size(), 0.0);
  out.cost = 0;
  out.load = 0;
  double time = instance.ready(0);
  out.start_times[0] = time;
  for (std::size_t k = 1; k < vertices.size(); ++k) {
    const int i = vertices[k - 1];
    const int j = vertices[k];
    if (j <= 0 || j > sink) return false;
    if (j != sink && seen[j]++) return false;
    if (j == sink && k + 1 != vertices.size()) return false;
    time = std::max(instance.ready(j), time + instance.service(i) + instance.cost(i, j));
    if (time > instance.due(j) + kTimeEps) return false;
    out.start_times[k] = time;
    out.cost += instance.cost(i, j);
    out.load += instance.demand(j);
  }
  return out.load <= instance.capacity() + kTimeEps;
}

std::vector<PricedRoute> price_vrptw(const VrptwInstance& instance, const Eigen::VectorXd& duals,
                                     int k, double gap, const EspprcOptions& options) {
  const int n = instance.n_customers();
  if (duals.size() != n)
    throw DimensionMismatch("expected " + std::to_string(n) + " duals, got " +
                            std::to_string(duals.size()));
  if (n > 63) throw InvalidArgument("labeling supports at most 63 customers");
  if (k < 1) throw InvalidArgument("candidate count k must be at least 1");
  if (gap < 0) throw InvalidArgument("gap must be non-negative");

  const int sink = instance.sink();
  const int v_count = instance.vertex_count();
  auto dual = [&](int v) { return (v >= 1 && v <= n) ? duals(v - 1) : 0.0; };

  // Feasible arcs.
  std::vector<std::vector<int>> succ(v_count);
  for (int i = 0; i < sink; ++i) {
    for (int j = 1; j <= sink; ++j) {
      if (i == j || (i == 0 && j == sink)) continue;
      if (options.prune_arcs) {
        if (instance.ready(i) + instance.service(i) + instance.cost(i, j) >
            instance.due(j) + kTimeEps)
          continue;
        if (instance.demand(i) + instance.demand(j) > instance.capacity() + kTimeEps) continue;
      }
      succ[i].push_back(j);
    }
  }

  g_stats = {};
  std::vector<Label> labels;
  std::vector<std::vector<int>> bucket(v_count);
  std::vector<int> completed;
  std::deque<int> queue;

  labels.push_back({0, 0.0, instance.ready(0), 0.0, 0, -1, false});
  queue.push_back(0);
  ++g_stats.labels_created;

  while (!queue.empty()) {
    const int li = queue.front();
    queue.pop_front();
    if (labels[li].dominated) continue;
    const Label cur = labels[li];
    const int i = cur.vertex;
    for (int j : succ[i]) {
      if (j != sink && (cur.visited >> (j - 1) & 1u)) continue;
      const double t = std::max(instance.ready(j), cur.time + instance.service(i) + instance.cost(i, j));
      if (t > instance.due(j) + kTimeEps) continue;
      const double load = cur.load + instance.demand(j);
      if (load > instance.capacity() + kTimeEps) continue;

      Label next{j, cur.reduced + instance.cost(i, j) - dual(j), t, load,
                 j == sink ? cur.visited : cur.visited | (std::uint64_t{1} << (j - 1)), li, false};
      ++g_stats.labels_created;
      if (j == sink) {
        labels.push_back(next);
        completed.push_back(static_cast<int>(labels.size()) - 1);
        continue;
      }
      if (options.dominance) {
        bool beaten = false;
        for (int other : bucket[j]) {
          if (!labels[other].dominated && dominates(labels[other], next)) {
            beaten = true;
            break;
          }
        }
        if (beaten) {
          ++g_stats.labels_dominated;
          continue;
        }
        for (int other : bucket[j]) {
          if (!labels[other].dominated && dominates(next, labels[other])) {
            labels[other].dominated = true;
            ++g_stats.labels_dominated;
          }
        }
        std::erase_if(bucket[j], [&](int o) { return labels[o].dominated; });
      }
      labels.push_back(next);
      const int idx = static_cast<int>(labels.size()) - 1;
      bucket[j].push_back(idx);
      queue.push_back(idx);
    }
  }

  // Cheapest route per customer set.
  std::map<std::uint64_t, int> by_set;
  for (int idx : completed) {
    const Label& l = labels[idx];
    if (l.reduced >= -kImprovingTolerance) continue;
    auto [it, inserted] = by_set.emplace(l.visited, idx);
    if (!inserted && l.reduced < labels[it->second].reduced) it->second = idx;
  }

  std::vector<PricedRoute> out;
  for (const auto& [set, idx] : by_set) {
    std::vector<int> seq;
    for (int p = idx; p >= 0; p = labels[p].parent) seq.push_back(labels[p].vertex);
    std::reverse(seq.begin(), seq.end());
    PricedRoute pr;
    evaluate_route(instance, seq, pr.route);
    pr.reduced_cost = labels[idx].reduced;
    out.push_back(std::move(pr));
  }
  std::sort(out.begin(), out.end(), [](const PricedRoute& a, const PricedRoute& b) {
    if (a.reduced_cost != b.reduced_cost) return a.reduced_cost < b.reduced_cost;
    return a.route.vertices < b.route.vertices;
  });
  if (out.empty()) return out;
  const double threshold = out.front().reduced_cost * (1.0 - gap);
  std::erase_if(out, [&](const PricedRoute& r) { return r.reduced_cost > threshold; });
  if (out.size() > static_cast<std::size_t>(k)) out.resize(k);
  return out;
}

Column route_column(const Route& route, int n_customers) {
  Column col;
  col.cost = route.cost;
  col.coeffs = Eigen::VectorXd::Zero(n_customers);
  for (int c : route.customers())
    if (c >= 1 && c <= n_customers) col.coeffs(c - 1) = 1.0;
  col.problem_feature = route.cost;
  return col;
}

}  // namespace ffcg
