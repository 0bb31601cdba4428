#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>

#include "ffcg/features.hpp"
#include "ffcg/selection.hpp"

namespace ffcg {

/// Scores every column node of a state (raw features in, one value per node
/// out). Only selectable entries are read.
using QScorer = std::function<Eigen::VectorXd(const BipartiteState&)>;

/// Most negative reduced cost; ties to the lowest id.
SelectionEpisode greedy_single(std::span<const Candidate> candidates);
/// Every candidate.
SelectionEpisode greedy_multi(std::span<const Candidate> candidates);
/// The k most negative reduced costs (all when fewer than k).
SelectionEpisode fixed_k(std::span<const Candidate> candidates, int k = 5);

/// Sequential marginal-Q selection: pick the best-scoring action, mark it
/// selected, make STOP available, repeat until STOP wins or the pool is empty.
/// Ties go to the lowest id, STOP (id -1) included.
SelectionEpisode ffcg_select(const BipartiteState& state, const QScorer& scorer,
                             bool record_states = false);

/// Single argmax pick over the candidates.
SelectionEpisode rl_single(const BipartiteState& state, const QScorer& scorer);

/// With probability epsilon, a uniformly random nonempty subset of the
/// candidates; otherwise nothing.
std::optional<SelectionEpisode> epsilon_random(std::span<const Candidate> candidates,
                                               double epsilon, std::mt19937_64& rng);

class GreedySinglePolicy final : public SelectionPolicy {
 public:
  std::string name() const override { return "greedy-s"; }
  SelectionEpisode select(const SelectionContext& ctx) override;
};

class GreedyMultiPolicy final : public SelectionPolicy {
 public:
  std::string name() const override { return "greedy-m"; }
  SelectionEpisode select(const SelectionContext& ctx) override;
};

class FixedKPolicy final : public SelectionPolicy {
 public:
  explicit FixedKPolicy(int k = 5);
  std::string name() const override { return "fixed-k"; }
  SelectionEpisode select(const SelectionContext& ctx) override;

 private:
  int k_;
};

class RlSinglePolicy final : public SelectionPolicy {
 public:
  explicit RlSinglePolicy(QScorer scorer) : scorer_(std::move(scorer)) {}
  std::string name() const override { return "rl-single"; }
  SelectionEpisode select(const SelectionContext& ctx) override;

 private:
  QScorer scorer_;
};

class FfcgPolicy final : public SelectionPolicy {
 public:
  explicit FfcgPolicy(QScorer scorer) : scorer_(std::move(scorer)) {}
  std::string name() const override { return "ffcg"; }
  SelectionEpisode select(const SelectionContext& ctx) override;
  /// Largest per-iteration Q-evaluation count minus its (|G|+1)^2 budget;
  /// never positive.
  long worst_budget_margin() const { return worst_margin_; }

 private:
  QScorer scorer_;
  long worst_margin_ = std::numeric_limits<long>::min();
};

class RandomPolicy final : public SelectionPolicy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  std::string name() const override { return "random"; }
  SelectionEpisode select(const SelectionContext& ctx) override;

 private:
  std::mt19937_64 rng_;
};

/// Replaces the inner policy's choice by a random subset with probability
/// epsilon.
class EpsilonGreedyPolicy final : public SelectionPolicy {
 public:
  EpsilonGreedyPolicy(SelectionPolicy& inner, double epsilon, std::mt19937_64& rng);
  std::string name() const override { return inner_.name(); }
  SelectionEpisode select(const SelectionContext& ctx) override;
  void set_epsilon(double epsilon);
  double epsilon() const { return epsilon_; }

 private:
  SelectionPolicy& inner_;
  double epsilon_;
  std::mt19937_64& rng_;
};

/// `greedy-s | greedy-m | fixed-k | rl-single | ffcg | random`. The learned
/// policies need a scorer. Throws InvalidArgument otherwise.
std::unique_ptr<SelectionPolicy> make_policy(const std::string& name, QScorer scorer = {},
                                             std::uint64_t seed = 0);

bool policy_needs_model(const std::string& name);

}  // namespace ffcg
