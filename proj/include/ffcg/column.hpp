#pragma once

#include <Eigen/Dense>

namespace ffcg {

/// Reduced costs at or above -kImprovingTolerance are not improving.
inline constexpr double kImprovingTolerance = 1e-9;

enum class ColumnStatus { Existing, Candidate, Selected };

/// A restricted-master variable, or a pricing candidate that may become one.
/// The lifecycle counters feed the column-node features.
struct Column {
  double cost = 0;
  Eigen::VectorXd coeffs;
  int id = -1;
  int born_iter = 0;
  int iters_in_basis = 0;
  int iters_out_of_basis = 0;
  bool entered_last_iter = false;
  bool left_last_iter = false;
  ColumnStatus status = ColumnStatus::Candidate;
  // Waste for cutting stock, route cost for routing.
  double problem_feature = 0;

  bool same_variable(const Column& other) const {
    return cost == other.cost && coeffs.size() == other.coeffs.size() && coeffs == other.coeffs;
  }
};

/// A priced column together with its reduced cost under the duals that
/// produced it.
struct Candidate {
  Column column;
  double reduced_cost = 0;
};

}  // namespace ffcg
