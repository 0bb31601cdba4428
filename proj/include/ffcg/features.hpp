#pragma once

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ffcg/column.hpp"
#include "ffcg/lp.hpp"

namespace ffcg {

// Column-node feature layout.
enum ColumnFeature : int {
  kReducedCost = 0,
  kSolutionValue,
  kColumnConnectivity,
  kItersInBasis,
  kItersOutOfBasis,
  kLeftBasisLastIter,
  kEnteredBasisLastIter,
  kNodeStatus,
  kProblemFeature,
  kColumnFeatureCount
};

// Constraint-node feature layout.
enum ConstraintFeature : int { kDualValue = 0, kConstraintConnectivity, kConstraintFeatureCount };

inline constexpr double kStatusSelectable = 1.0;
inline constexpr double kStatusSelected = 0.0;
inline constexpr double kStatusExisting = -1.0;

/// Node id carried by the STOP pseudo-column.
inline constexpr int kStopId = -1;

struct Edge {
  int column = 0;
  int constraint = 0;
  double weight = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Variable/constraint graph observed by the selection agent. Column nodes are
/// ordered existing columns, then candidates, then (once inserted) STOP.
struct BipartiteState {
  Eigen::MatrixXd column_features;      // nodes x 9
  Eigen::MatrixXd constraint_features;  // rows x 2
  std::vector<Edge> edges;
  std::vector<int> column_ids;
  std::optional<int> stop_node_index;

  int column_count() const { return static_cast<int>(column_features.rows()); }
  int constraint_count() const { return static_cast<int>(constraint_features.rows()); }

  int node_of(int column_id) const;
  bool selectable(int node) const {
    return column_features(node, kNodeStatus) == kStatusSelectable;
  }
  /// Node indices with status 1 (candidates not yet picked, and STOP).
  std::vector<int> selectable_nodes() const;

  friend bool operator==(const BipartiteState&, const BipartiteState&) = default;
};

/// Builds S_t from the restricted master's columns and its optimal solution.
/// `selected_ids` marks candidates already picked in this iteration.
/// Throws StateInconsistency if the solution is not optimal or a candidate has
/// a non-finite reduced cost.
BipartiteState build_state(std::span<const Column> columns, const LpSolution& solution,
                           std::span<const Candidate> candidates,
                           std::span<const int> selected_ids = {});

/// Marks `column_id` selected and inserts STOP after the first pick. Nothing
/// else is recomputed. Throws UnknownColumn if the id is not selectable.
BipartiteState update_context(const BipartiteState& state, int column_id);

/// Per-feature affine map x -> (x - shift) * scale, then clipped to
/// [-clip, clip]. Status and flag features are never touched.
struct ScalingProfile {
  Eigen::VectorXd column_shift = Eigen::VectorXd::Zero(kColumnFeatureCount);
  Eigen::VectorXd column_scale = Eigen::VectorXd::Ones(kColumnFeatureCount);
  Eigen::VectorXd constraint_shift = Eigen::VectorXd::Zero(kConstraintFeatureCount);
  Eigen::VectorXd constraint_scale = Eigen::VectorXd::Ones(kConstraintFeatureCount);
  double edge_scale = 1.0;
  double clip = std::numeric_limits<double>::infinity();

  static ScalingProfile identity() { return {}; }

  bool operator==(const ScalingProfile&) const = default;
};

bool is_passthrough_feature(int column_feature);

BipartiteState normalize_features(const BipartiteState& state, const ScalingProfile& profile);

/// Standardization profile (mean / std per continuous feature) fitted on a
/// sample of raw states, clipped at +-5.
ScalingProfile fit_profile(std::span<const BipartiteState> states, double clip = 5.0);

}  // namespace ffcg
