#pragma once

#include <map>
#include <span>
#include <vector>

#include "ffcg/column.hpp"
#include "ffcg/lp.hpp"

namespace ffcg {

struct RewardConfig {
  double alpha = 2000.0;
  double beta = 0.3;
  // Relative: an objective change below tol * max(1, |obj|) is noise.
  double redundancy_tolerance = 1e-6;
  // Add-one-in solves for candidates the policy left out.
  bool unselected_supervision = true;

  void validate() const;
};

/// alpha * (obj_prev - obj_new) / obj0 - beta * n_redundant.
double total_reward(double obj_prev, double obj_new, double obj0, int n_redundant,
                    const RewardConfig& config);

/// Objectives of the restricted master under the subsets needed for credit.
/// `without[i]` drops selected[i] from the full selection; `with[i]` adds
/// unselected[i] to it.
struct SubsetObjectives {
  double before = 0;
  double all = 0;
  std::vector<double> without;
  std::vector<double> with;
};

/// Re-solves the master extended by the selected columns, once per
/// leave-one-out subset and once per add-one-in subset, warm-starting from
/// `basis` (the optimal basis before any addition).
SubsetObjectives evaluate_subsets(const LpProblem& master, std::span<const BasisIndex> basis,
                                  std::span<const Column> selected,
                                  std::span<const Column> unselected, const RewardConfig& config);

/// Objective of `master` with `extra` appended, solved from scratch.
double extended_objective(const LpProblem& master, std::span<const Column> extra);

/// Leave-one-out membership: selected[i] is effective iff removing it raises
/// the objective by more than the tolerance.
std::vector<bool> effective_mask(const SubsetObjectives& objectives, const RewardConfig& config);

/// Ids of the effective subset of `selected`.
std::vector<int> effective_set(const LpProblem& master, std::span<const BasisIndex> basis,
                               std::span<const Column> selected, const RewardConfig& config);

struct ContributionWeights {
  std::vector<double> phi;
  bool uniform_fallback = false;
};

/// phi_i = marginal_i / sum(marginal); uniform when the sum is zero.
ContributionWeights contribution_weights(std::span<const double> marginals);

struct CreditReport {
  double total_reward = 0;
  double objective_reward = 0;  // total reward without the redundancy term
  int n_redundant = 0;
  std::vector<int> effective;
  std::map<int, double> marginal;
  std::map<int, double> weights;  // effective columns only
  std::map<int, double> column_rewards;
  double stop_reward = 0;
  std::map<int, double> unselected_rewards;
  bool uniform_fallback = false;
};

/// Splits the selection's reward over its columns. `selected_ids` and
/// `unselected_ids` align with the subset objectives.
CreditReport assign_credit(std::span<const int> selected_ids, std::span<const int> unselected_ids,
                           const SubsetObjectives& objectives, double obj0,
                           const RewardConfig& config);

/// evaluate_subsets followed by assign_credit.
CreditReport credit(const LpProblem& master, std::span<const BasisIndex> basis,
                    std::span<const Column> selected, std::span<const Column> unselected,
                    double obj0, const RewardConfig& config);

}  // namespace ffcg
