#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ffcg/cg_engine.hpp"
#include "ffcg/instance.hpp"
#include "ffcg/qnet.hpp"
#include "ffcg/reward.hpp"

namespace ffcg {

struct TrainConfig {
  int replay_capacity = 20000;
  int batch_size = 32;
  // Gradient steps between target-network syncs.
  int target_sync = 200;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  // Share of all episodes over which epsilon decays linearly.
  double epsilon_decay_fraction = 0.5;
  double learning_rate = 1e-3;
  double gamma = 0.9;
  bool adam = false;
  double clip_norm = 5.0;
  // Gradient steps per CG iteration once the replay holds a full batch.
  int steps_per_iteration = 1;
  int passes = 1;
  int hidden = kDefaultHidden;
  std::uint64_t seed = 0;
  // "ffcg" trains sequential selection with STOP; "rl-single" one pick.
  std::string policy = "ffcg";
  // Training instances replayed under greedy-m to fit the feature scaling.
  int profile_instances = 5;
  int checkpoint_every = 50;
  std::filesystem::path checkpoint_dir;  // empty: no files written
  RewardConfig reward;
  // Redundancy is measured by the credit solves already.
  CgConfig cg{.measure_redundancy = false};

  void validate() const;
};

struct TrainLogRow {
  int episode = 0;
  std::string instance;
  double loss_mean = 0;  // NaN when no gradient step ran
  int iters = 0;
  int cols_added = 0;
  double epsilon = 0;
  bool skipped = false;
};

struct TrainResult {
  QNetWeights weights;
  std::optional<QNetWeights> best;  // lowest mean validation iterations
  double best_validation_iters = 0;
  std::vector<TrainLogRow> log;
  std::vector<int> curriculum_keys;  // difficulty key of each episode, in order
  long gradient_steps = 0;
  long target_syncs = 0;
  std::size_t replay_size = 0;
};

/// FIFO experience memory.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void push(ReplayTransition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const ReplayTransition& operator[](std::size_t i) const { return items_[i]; }
  /// `n` uniform draws with replacement.
  std::vector<const ReplayTransition*> sample(std::size_t n, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::deque<ReplayTransition> items_;
};

/// Linear decay from start to end over the first `fraction` of `total`
/// episodes, constant afterwards.
double epsilon_at(int episode, int total, const TrainConfig& config);

/// Instances sorted by difficulty key, stable in input order.
std::vector<AnyInstance> curriculum_order(std::span<const AnyInstance> instances);

TrainResult train(std::span<const AnyInstance> instances, const TrainConfig& config,
                  std::span<const AnyInstance> validation = {});

void write_train_log_csv(std::ostream& out, std::span<const TrainLogRow> log);

// ---- evaluation ------------------------------------------------------------------

struct BenchRow {
  std::string instance;
  std::string policy;
  int iters = 0;
  int cols_added = 0;
  double ms = 0;
  double objective = 0;
  bool converged = false;
  // Worst per-iteration Q-evaluations minus (|G|+1)^2; 0 for policies
  // without a network.
  long budget_margin = 0;
  CgTrace trace;
};

struct PolicyStats {
  std::string policy;
  int instances = 0;
  double mean_iters = 0, sd_iters = 0;
  double mean_cols = 0, sd_cols = 0;
  double mean_ms = 0, sd_ms = 0;
  double mean_objective = 0;
};

struct Comparison {
  std::vector<BenchRow> rows;  // instance-major
  std::vector<PolicyStats> stats;
  // Largest relative spread of final objectives on one instance.
  double objective_disagreement = 0;
};

/// Runs every policy on every instance. Learned policies need `weights`.
Comparison evaluate(const QNetWeights* weights, std::span<const AnyInstance> instances,
                    std::span<const std::string> policies, const CgConfig& config = {},
                    std::uint64_t seed = 0);

/// Mean and population standard deviation per policy, in first-seen order.
std::vector<PolicyStats> summarize(std::span<const BenchRow> rows);

}  // namespace ffcg
