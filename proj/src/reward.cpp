#include "ffcg/reward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ffcg/errors.hpp"

namespace ffcg {

void RewardConfig::validate() const {
  if (!(alpha >= 0)) throw InvalidArgument("alpha must be non-negative");
  if (!(beta >= 0)) throw InvalidArgument("beta must be non-negative");
  if (!(redundancy_tolerance > 0)) throw InvalidArgument("redundancy tolerance must be positive");
}

double total_reward(double obj_prev, double obj_new, double obj0, int n_redundant,
                    const RewardConfig& config) {
  if (!(obj0 > 0)) throw InvalidBaseline("obj0 must be positive, got " + std::to_string(obj0));
  if (n_redundant < 0) throw InvalidArgument("negative redundant count");
  return config.alpha * (obj_prev - obj_new) / obj0 - config.beta * n_redundant;
}

namespace {

LpProblem extend(const LpProblem& master, std::span<const Column> selected, std::ptrdiff_t skip,
                 const Column* extra) {
  const Eigen::Index m = master.rows();
  const Eigen::Index n0 = master.cols();
  Eigen::Index added = static_cast<Eigen::Index>(selected.size()) - (skip >= 0 ? 1 : 0) +
                       (extra ? 1 : 0);
  LpProblem p;
  p.rhs = master.rhs;
  p.costs.resize(n0 + added);
  p.constraint_matrix.resize(m, n0 + added);
  p.costs.head(n0) = master.costs;
  p.constraint_matrix.leftCols(n0) = master.constraint_matrix;
  Eigen::Index j = n0;
  auto put = [&](const Column& c) {
    if (c.coeffs.size() != m)
      throw DimensionMismatch("column " + std::to_string(c.id) + " has " +
                              std::to_string(c.coeffs.size()) + " coefficients for " +
                              std::to_string(m) + " rows");
    p.costs(j) = c.cost;
    p.constraint_matrix.col(j) = c.coeffs;
    ++j;
  };
  for (std::size_t i = 0; i < selected.size(); ++i)
    if (static_cast<std::ptrdiff_t>(i) != skip) put(selected[i]);
  if (extra) put(*extra);
  return p;
}

double objective_of(const LpProblem& p, std::span<const BasisIndex> basis) {
  const auto sol = solve(p, basis.empty() ? std::nullopt
                                          : std::optional<std::span<const BasisIndex>>(basis));
  if (!sol.optimal())
    throw NumericalBreakdown(std::string("restricted master became ") + to_string(sol.status));
  return sol.objective;
}

bool improves(double lower, double higher, const RewardConfig& config) {
  return lower < higher - config.redundancy_tolerance * std::max(1.0, std::abs(lower));
}

}  // namespace

SubsetObjectives evaluate_subsets(const LpProblem& master, std::span<const BasisIndex> basis,
                                  std::span<const Column> selected,
                                  std::span<const Column> unselected, const RewardConfig& config) {
  SubsetObjectives out;
  out.before = objective_of(master, basis);
  out.all = objective_of(extend(master, selected, -1, nullptr), basis);
  out.without.reserve(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i)
    out.without.push_back(
        objective_of(extend(master, selected, static_cast<std::ptrdiff_t>(i), nullptr), basis));
  if (config.unselected_supervision) {
    out.with.reserve(unselected.size());
    for (const Column& c : unselected)
      out.with.push_back(objective_of(extend(master, selected, -1, &c), basis));
  }
  return out;
}

double extended_objective(const LpProblem& master, std::span<const Column> extra) {
  return objective_of(extend(master, extra, -1, nullptr), {});
}

std::vector<bool> effective_mask(const SubsetObjectives& objectives, const RewardConfig& config) {
  std::vector<bool> mask(objectives.without.size());
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = improves(objectives.all, objectives.without[i], config);
  return mask;
}

std::vector<int> effective_set(const LpProblem& master, std::span<const BasisIndex> basis,
                               std::span<const Column> selected, const RewardConfig& config) {
  if (selected.empty()) throw EmptyCandidates("effective set of an empty selection");
  RewardConfig c = config;
  c.unselected_supervision = false;
  const auto mask = effective_mask(evaluate_subsets(master, basis, selected, {}, c), c);
  std::vector<int> ids;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) ids.push_back(selected[i].id);
  return ids;
}

ContributionWeights contribution_weights(std::span<const double> marginals) {
  ContributionWeights w;
  double sum = 0;
  for (double r : marginals) sum += r;
  w.phi.resize(marginals.size());
  if (marginals.empty()) return w;
  if (sum == 0.0 || !std::isfinite(sum)) {
    w.uniform_fallback = true;
    std::fill(w.phi.begin(), w.phi.end(), 1.0 / static_cast<double>(marginals.size()));
    return w;
  }
  for (std::size_t i = 0; i < marginals.size(); ++i) w.phi[i] = marginals[i] / sum;
  return w;
}

CreditReport assign_credit(std::span<const int> selected_ids, std::span<const int> unselected_ids,
                           const SubsetObjectives& objectives, double obj0,
                           const RewardConfig& config) {
  config.validate();
  if (objectives.without.size() != selected_ids.size())
    throw DimensionMismatch("leave-one-out objectives do not match the selection");
  if (config.unselected_supervision && objectives.with.size() != unselected_ids.size())
    throw DimensionMismatch("add-one-in objectives do not match the unselected candidates");

  CreditReport rep;
  const auto mask = effective_mask(objectives, config);
  rep.n_redundant = static_cast<int>(std::count(mask.begin(), mask.end(), false));
  rep.total_reward = total_reward(objectives.before, objectives.all, obj0, rep.n_redundant, config);
  rep.objective_reward = total_reward(objectives.before, objectives.all, obj0, 0, config);

  // Removing an effective column leaves the redundant count unchanged, so the
  // penalty cancels in the marginal.
  std::vector<double> marginals;
  for (std::size_t i = 0; i < selected_ids.size(); ++i) {
    const int id = selected_ids[i];
    if (mask[i]) {
      rep.effective.push_back(id);
      const double r = config.alpha * (objectives.without[i] - objectives.all) / obj0;
      rep.marginal[id] = r;
      marginals.push_back(r);
    } else {
      rep.marginal[id] = -config.beta;
      rep.column_rewards[id] = -config.beta;
    }
  }
  const auto w = contribution_weights(marginals);
  rep.uniform_fallback = w.uniform_fallback;
  for (std::size_t k = 0; k < rep.effective.size(); ++k) {
    rep.weights[rep.effective[k]] = w.phi[k];
    rep.column_rewards[rep.effective[k]] = w.phi[k] * rep.objective_reward;
  }
  if (config.unselected_supervision) {
    for (std::size_t i = 0; i < unselected_ids.size(); ++i)
      rep.unselected_rewards[unselected_ids[i]] =
          improves(objectives.with[i], objectives.all, config) ? config.beta : -config.beta;
  }
  return rep;
}

CreditReport credit(const LpProblem& master, std::span<const BasisIndex> basis,
                    std::span<const Column> selected, std::span<const Column> unselected,
                    double obj0, const RewardConfig& config) {
  const auto objs = evaluate_subsets(master, basis, selected, unselected, config);
  std::vector<int> sel, unsel;
  for (const auto& c : selected) sel.push_back(c.id);
  for (const auto& c : unselected) unsel.push_back(c.id);
  return assign_credit(sel, unsel, objs, obj0, config);
}

}  // namespace ffcg
