#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "ffcg/column.hpp"
#include "ffcg/instance.hpp"

namespace ffcg {

/// Elementary route 0 -> ... -> n+1. `start_times[i]` is the service start at
/// `vertices[i]`.
struct Route {
  std::vector<int> vertices;
  double cost = 0;
  double load = 0;
  std::vector<double> start_times;

  std::vector<int> customers() const {
    return std::vector<int>(vertices.begin() + 1, vertices.end() - 1);
  }
};

struct PricedRoute {
  Route route;
  double reduced_cost = 0;
};

struct EspprcOptions {
  bool dominance = true;
  // Arcs with a_i + s_i + t_ij > b_j or d_i + d_j > q are dropped up front.
  bool prune_arcs = true;
};

/// Builds the route's schedule (earliest service starts) and cost. Returns
/// false if the sequence violates elementarity, capacity or a time window.
bool evaluate_route(const VrptwInstance& instance, const std::vector<int>& vertices, Route& out);

/// k best elementary routes by reduced cost (route cost minus the duals of the
/// customers it covers) via monodirectional labeling. Routes covering the same
/// customer set are collapsed to the cheapest one. Same gap semantics as the
/// cutting-stock pricer; an empty result means no improving route exists.
std::vector<PricedRoute> price_vrptw(const VrptwInstance& instance, const Eigen::VectorXd& duals,
                                     int k, double gap, const EspprcOptions& options = {});

/// Cost = route cost, coefficient 1 on every covered customer row.
Column route_column(const Route& route, int n_customers);

struct LabelingStats {
  std::size_t labels_created = 0;
  std::size_t labels_dominated = 0;
};
LabelingStats last_labeling_stats();

}  // namespace ffcg
