#include "ffcg/policy.hpp"

#include <algorithm>
#include <numeric>

#include "ffcg/errors.hpp"

namespace ffcg {

namespace {

void require_candidates(std::span<const Candidate> candidates) {
  if (candidates.empty()) throw EmptyCandidates("no candidate columns to select from");
}

std::vector<int> ids_of(std::span<const Candidate> candidates) {
  std::vector<int> ids;
  ids.reserve(candidates.size());
  for (const auto& c : candidates) ids.push_back(c.column.id);
  return ids;
}

// Candidate order by (reduced cost, id).
std::vector<std::size_t> by_reduced_cost(std::span<const Candidate> candidates) {
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (candidates[a].reduced_cost != candidates[b].reduced_cost)
      return candidates[a].reduced_cost < candidates[b].reduced_cost;
    return candidates[a].column.id < candidates[b].column.id;
  });
  return order;
}

// Best selectable node: highest score, then lowest id.
int argmax_node(const BipartiteState& state, const Eigen::VectorXd& scores,
                const std::vector<int>& nodes) {
  if (scores.size() != state.column_count())
    throw ShapeMismatch("scorer returned " + std::to_string(scores.size()) + " values for " +
                        std::to_string(state.column_count()) + " nodes");
  int best = nodes.front();
  for (int v : nodes) {
    const double s = scores(v), b = scores(best);
    if (s > b || (s == b && state.column_ids[v] < state.column_ids[best])) best = v;
  }
  return best;
}

}  // namespace

SelectionEpisode greedy_single(std::span<const Candidate> candidates) {
  require_candidates(candidates);
  SelectionEpisode ep;
  ep.candidate_ids = ids_of(candidates);
  ep.picks = {candidates[by_reduced_cost(candidates).front()].column.id};
  return ep;
}

SelectionEpisode greedy_multi(std::span<const Candidate> candidates) {
  require_candidates(candidates);
  SelectionEpisode ep;
  ep.candidate_ids = ids_of(candidates);
  ep.picks = ep.candidate_ids;
  return ep;
}

SelectionEpisode fixed_k(std::span<const Candidate> candidates, int k) {
  require_candidates(candidates);
  if (k < 1) throw InvalidArgument("fixed-k needs k >= 1");
  SelectionEpisode ep;
  ep.candidate_ids = ids_of(candidates);
  const auto order = by_reduced_cost(candidates);
  for (std::size_t i = 0; i < order.size() && static_cast<int>(i) < k; ++i)
    ep.picks.push_back(candidates[order[i]].column.id);
  return ep;
}

SelectionEpisode ffcg_select(const BipartiteState& state, const QScorer& scorer,
                             bool record_states) {
  SelectionEpisode ep;
  for (int v : state.selectable_nodes())
    if (state.column_ids[v] != kStopId) ep.candidate_ids.push_back(state.column_ids[v]);
  if (ep.candidate_ids.empty()) throw EmptyCandidates("no candidate columns to select from");

  BipartiteState s = state;
  while (true) {
    const auto nodes = s.selectable_nodes();
    const bool pool_left = std::any_of(nodes.begin(), nodes.end(), [&](int v) {
      return s.column_ids[v] != kStopId;
    });
    if (!pool_left) break;  // only STOP remains
    if (record_states) ep.states.push_back(s);
    const Eigen::VectorXd scores = scorer(s);
    ep.q_evaluations += static_cast<long>(nodes.size());
    const int best = argmax_node(s, scores, nodes);
    if (s.column_ids[best] == kStopId) {
      ep.stop_step = static_cast<int>(ep.picks.size());
      break;
    }
    ep.picks.push_back(s.column_ids[best]);
    s = update_context(s, s.column_ids[best]);
  }
  return ep;
}

SelectionEpisode rl_single(const BipartiteState& state, const QScorer& scorer) {
  SelectionEpisode ep;
  std::vector<int> nodes;
  for (int v : state.selectable_nodes())
    if (state.column_ids[v] != kStopId) {
      nodes.push_back(v);
      ep.candidate_ids.push_back(state.column_ids[v]);
    }
  if (nodes.empty()) throw EmptyCandidates("no candidate columns to select from");
  const Eigen::VectorXd scores = scorer(state);
  ep.q_evaluations = static_cast<long>(nodes.size());
  ep.picks = {state.column_ids[argmax_node(state, scores, nodes)]};
  return ep;
}

std::optional<SelectionEpisode> epsilon_random(std::span<const Candidate> candidates,
                                               double epsilon, std::mt19937_64& rng) {
  require_candidates(candidates);
  if (!(epsilon >= 0 && epsilon <= 1)) throw InvalidArgument("epsilon must lie in [0, 1]");
  if (epsilon == 0) return std::nullopt;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (epsilon < 1 && coin(rng) >= epsilon) return std::nullopt;
  SelectionEpisode ep;
  ep.candidate_ids = ids_of(candidates);
  ep.exploratory = true;
  std::bernoulli_distribution half(0.5);
  while (ep.picks.empty())
    for (const auto& c : candidates)
      if (half(rng)) ep.picks.push_back(c.column.id);
  return ep;
}

SelectionEpisode GreedySinglePolicy::select(const SelectionContext& ctx) {
  return greedy_single(ctx.candidates);
}

SelectionEpisode GreedyMultiPolicy::select(const SelectionContext& ctx) {
  return greedy_multi(ctx.candidates);
}

FixedKPolicy::FixedKPolicy(int k) : k_(k) {
  if (k < 1) throw InvalidArgument("fixed-k needs k >= 1");
}

SelectionEpisode FixedKPolicy::select(const SelectionContext& ctx) {
  return fixed_k(ctx.candidates, k_);
}

SelectionEpisode RlSinglePolicy::select(const SelectionContext& ctx) {
  auto ep = rl_single(ctx.base_state(), scorer_);
  if (ctx.record_states) ep.states.push_back(ctx.base_state());
  return ep;
}

SelectionEpisode FfcgPolicy::select(const SelectionContext& ctx) {
  auto ep = ffcg_select(ctx.base_state(), scorer_, ctx.record_states);
  const long g = static_cast<long>(ep.candidate_ids.size());
  worst_margin_ = std::max(worst_margin_, ep.q_evaluations - (g + 1) * (g + 1));
  return ep;
}

SelectionEpisode RandomPolicy::select(const SelectionContext& ctx) {
  return *epsilon_random(ctx.candidates, 1.0, rng_);
}

EpsilonGreedyPolicy::EpsilonGreedyPolicy(SelectionPolicy& inner, double epsilon,
                                         std::mt19937_64& rng)
    : inner_(inner), epsilon_(0), rng_(rng) {
  set_epsilon(epsilon);
}

void EpsilonGreedyPolicy::set_epsilon(double epsilon) {
  if (!(epsilon >= 0 && epsilon <= 1)) throw InvalidArgument("epsilon must lie in [0, 1]");
  epsilon_ = epsilon;
}

SelectionEpisode EpsilonGreedyPolicy::select(const SelectionContext& ctx) {
  if (auto ep = epsilon_random(ctx.candidates, epsilon_, rng_)) return *ep;
  return inner_.select(ctx);
}

bool policy_needs_model(const std::string& name) { return name == "ffcg" || name == "rl-single"; }

std::unique_ptr<SelectionPolicy> make_policy(const std::string& name, QScorer scorer,
                                             std::uint64_t seed) {
  if (policy_needs_model(name) && !scorer)
    throw InvalidArgument("policy '" + name + "' needs a trained model");
  if (name == "greedy-s") return std::make_unique<GreedySinglePolicy>();
  if (name == "greedy-m") return std::make_unique<GreedyMultiPolicy>();
  if (name == "fixed-k") return std::make_unique<FixedKPolicy>(5);
  if (name == "rl-single") return std::make_unique<RlSinglePolicy>(std::move(scorer));
  if (name == "ffcg") return std::make_unique<FfcgPolicy>(std::move(scorer));
  if (name == "random") return std::make_unique<RandomPolicy>(seed);
  throw InvalidArgument("unknown policy '" + name + "'");
}

}  // namespace ffcg
