#include "ffcg/features.hpp"

#include <algorithm>
#include <cmath>

#include "ffcg/errors.hpp"

namespace ffcg {

int BipartiteState::node_of(int column_id) const {
  for (std::size_t i = 0; i < column_ids.size(); ++i)
    if (column_ids[i] == column_id) return static_cast<int>(i);
  return -1;
}

std::vector<int> BipartiteState::selectable_nodes() const {
  std::vector<int> out;
  for (int i = 0; i < column_count(); ++i)
    if (selectable(i)) out.push_back(i);
  return out;
}

namespace {

void fill_column(Eigen::MatrixXd& f, int node, const Column& col, double reduced, double value,
                 double status) {
  f(node, kReducedCost) = reduced;
  f(node, kSolutionValue) = value;
  f(node, kColumnConnectivity) = static_cast<double>((col.coeffs.array() != 0.0).count());
  f(node, kItersInBasis) = col.iters_in_basis;
  f(node, kItersOutOfBasis) = col.iters_out_of_basis;
  f(node, kLeftBasisLastIter) = col.left_last_iter ? 1.0 : 0.0;
  f(node, kEnteredBasisLastIter) = col.entered_last_iter ? 1.0 : 0.0;
  f(node, kNodeStatus) = status;
  f(node, kProblemFeature) = col.problem_feature;
}

}  // namespace

BipartiteState build_state(std::span<const Column> columns, const LpSolution& solution,
                           std::span<const Candidate> candidates,
                           std::span<const int> selected_ids) {
  if (!solution.optimal()) throw StateInconsistency("state requires an optimal RMP solution");
  if (solution.primal.size() != static_cast<Eigen::Index>(columns.size()))
    throw StateInconsistency("solution has " + std::to_string(solution.primal.size()) +
                             " variables for " + std::to_string(columns.size()) + " columns");
  const Eigen::Index m = solution.duals.size();
  const int n_nodes = static_cast<int>(columns.size() + candidates.size());

  BipartiteState s;
  s.column_features = Eigen::MatrixXd::Zero(n_nodes, kColumnFeatureCount);
  s.constraint_features = Eigen::MatrixXd::Zero(m, kConstraintFeatureCount);
  s.column_ids.reserve(n_nodes);

  auto add_edges = [&](int node, const Eigen::VectorXd& coeffs) {
    if (coeffs.size() != m)
      throw StateInconsistency("column coefficient length differs from row count");
    for (Eigen::Index r = 0; r < m; ++r) {
      if (coeffs(r) == 0.0) continue;
      s.edges.push_back({node, static_cast<int>(r), coeffs(r)});
      s.constraint_features(r, kConstraintConnectivity) += 1.0;
    }
  };

  int node = 0;
  for (std::size_t j = 0; j < columns.size(); ++j, ++node) {
    const Column& col = columns[j];
    add_edges(node, col.coeffs);
    fill_column(s.column_features, node, col, reduced_cost(solution, col.cost, col.coeffs),
                solution.primal(static_cast<Eigen::Index>(j)), kStatusExisting);
    s.column_ids.push_back(col.id);
  }
  for (const Candidate& cand : candidates) {
    if (!std::isfinite(cand.reduced_cost))
      throw StateInconsistency("candidate " + std::to_string(cand.column.id) +
                               " has no reduced cost");
    const bool picked = std::find(selected_ids.begin(), selected_ids.end(), cand.column.id) !=
                        selected_ids.end();
    add_edges(node, cand.column.coeffs);
    fill_column(s.column_features, node, cand.column, cand.reduced_cost, 0.0,
                picked ? kStatusSelected : kStatusSelectable);
    s.column_ids.push_back(cand.column.id);
    ++node;
  }
  s.constraint_features.col(kDualValue) = solution.duals;

  if (!selected_ids.empty()) {
    // Same layout update_context would have produced.
    s.column_features.conservativeResize(n_nodes + 1, Eigen::NoChange);
    s.column_features.row(n_nodes).setZero();
    s.column_features(n_nodes, kNodeStatus) = kStatusSelectable;
    s.column_ids.push_back(kStopId);
    s.stop_node_index = n_nodes;
    for (Eigen::Index r = 0; r < m; ++r) s.edges.push_back({n_nodes, static_cast<int>(r), 1.0});
  }
  return s;
}

BipartiteState update_context(const BipartiteState& state, int column_id) {
  const int node = column_id == kStopId ? state.stop_node_index.value_or(-1)
                                        : state.node_of(column_id);
  if (node < 0 || !state.selectable(node))
    throw UnknownColumn("column " + std::to_string(column_id) + " is not selectable");
  BipartiteState out = state;
  out.column_features(node, kNodeStatus) = kStatusSelected;
  if (!out.stop_node_index && column_id != kStopId) {
    // STOP is a blank column; it is wired to every constraint with unit weight
    // so its score can depend on the rest of the graph.
    const int stop = out.column_count();
    out.column_features.conservativeResize(stop + 1, Eigen::NoChange);
    out.column_features.row(stop).setZero();
    out.column_features(stop, kNodeStatus) = kStatusSelectable;
    out.column_ids.push_back(kStopId);
    out.stop_node_index = stop;
    for (int r = 0; r < out.constraint_count(); ++r) out.edges.push_back({stop, r, 1.0});
  }
  return out;
}

bool is_passthrough_feature(int f) {
  return f == kLeftBasisLastIter || f == kEnteredBasisLastIter || f == kNodeStatus;
}

BipartiteState normalize_features(const BipartiteState& state, const ScalingProfile& profile) {
  BipartiteState out = state;
  const double clip = profile.clip;
  for (int f = 0; f < kColumnFeatureCount; ++f) {
    if (is_passthrough_feature(f)) continue;
    auto col = out.column_features.col(f);
    col = ((col.array() - profile.column_shift(f)) * profile.column_scale(f)).cwiseMax(-clip).cwiseMin(clip);
  }
  if (out.stop_node_index) {
    // STOP keeps all-zero features apart from its status.
    for (int f = 0; f < kColumnFeatureCount; ++f)
      if (f != kNodeStatus) out.column_features(*out.stop_node_index, f) = 0.0;
  }
  for (int f = 0; f < kConstraintFeatureCount; ++f) {
    auto col = out.constraint_features.col(f);
    col = ((col.array() - profile.constraint_shift(f)) * profile.constraint_scale(f)).cwiseMax(-clip).cwiseMin(clip);
  }
  if (profile.edge_scale != 1.0)
    for (auto& e : out.edges)
      if (!(out.stop_node_index && e.column == *out.stop_node_index)) e.weight *= profile.edge_scale;
  return out;
}

ScalingProfile fit_profile(std::span<const BipartiteState> states, double clip) {
  ScalingProfile p;
  p.clip = clip;
  Eigen::VectorXd col_sum = Eigen::VectorXd::Zero(kColumnFeatureCount);
  Eigen::VectorXd col_sq = Eigen::VectorXd::Zero(kColumnFeatureCount);
  Eigen::VectorXd con_sum = Eigen::VectorXd::Zero(kConstraintFeatureCount);
  Eigen::VectorXd con_sq = Eigen::VectorXd::Zero(kConstraintFeatureCount);
  double col_n = 0, con_n = 0, edge_abs = 0, edge_n = 0;
  for (const auto& s : states) {
    for (int i = 0; i < s.column_count(); ++i) {
      if (s.stop_node_index && i == *s.stop_node_index) continue;
      col_sum += s.column_features.row(i).transpose();
      col_sq += s.column_features.row(i).transpose().cwiseAbs2();
      col_n += 1;
    }
    con_sum += s.constraint_features.colwise().sum().transpose();
    con_sq += s.constraint_features.cwiseAbs2().colwise().sum().transpose();
    con_n += s.constraint_count();
    for (const auto& e : s.edges) {
      if (s.stop_node_index && e.column == *s.stop_node_index) continue;
      edge_abs += std::abs(e.weight);
      edge_n += 1;
    }
  }
  auto finish = [](const Eigen::VectorXd& sum, const Eigen::VectorXd& sq, double n,
                   Eigen::VectorXd& shift, Eigen::VectorXd& scale) {
    if (n <= 0) return;
    shift = sum / n;
    for (Eigen::Index f = 0; f < shift.size(); ++f) {
      const double var = std::max(0.0, sq(f) / n - shift(f) * shift(f));
      const double sd = std::sqrt(var);
      scale(f) = sd > 1e-12 ? 1.0 / sd : 1.0;
    }
  };
  finish(col_sum, col_sq, col_n, p.column_shift, p.column_scale);
  finish(con_sum, con_sq, con_n, p.constraint_shift, p.constraint_scale);
  for (int f = 0; f < kColumnFeatureCount; ++f) {
    if (is_passthrough_feature(f)) {
      p.column_shift(f) = 0.0;
      p.column_scale(f) = 1.0;
    }
  }
  if (edge_n > 0 && edge_abs > 0) p.edge_scale = edge_n / edge_abs;
  return p;
}

}  // namespace ffcg
