#pragma once

#include <Eigen/Dense>

#include <vector>

#include "ffcg/column.hpp"
#include "ffcg/instance.hpp"

namespace ffcg {

struct Pattern {
  std::vector<int> counts;
  int used_length = 0;
  int waste = 0;

  friend bool operator==(const Pattern&, const Pattern&) = default;
};

Pattern make_pattern(const CspInstance& instance, std::vector<int> counts);

struct PricedPattern {
  Pattern pattern;
  double reduced_cost = 0;
};

/// k best distinct cutting patterns under `duals`, ascending by reduced cost
/// 1 - duals'counts. Only improving patterns within `gap` of the best are kept,
/// i.e. reduced cost <= best * (1 - gap). An empty result means no improving
/// pattern exists.
std::vector<PricedPattern> price_csp(const CspInstance& instance, const Eigen::VectorXd& duals,
                                     int k, double gap);

/// Cost 1, coefficients = counts, waste as the problem feature.
Column pattern_column(const Pattern& pattern, int item_types);

}  // namespace ffcg
