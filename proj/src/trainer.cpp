#include "ffcg/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include "ffcg/errors.hpp"
#include "ffcg/policy.hpp"

namespace ffcg {

void TrainConfig::validate() const {
  if (replay_capacity < 1) throw InvalidArgument("replay capacity must be positive");
  if (batch_size < 1) throw InvalidArgument("batch size must be positive");
  if (target_sync < 1) throw InvalidArgument("target sync period must be positive");
  if (!(epsilon_start >= 0 && epsilon_start <= 1 && epsilon_end >= 0 && epsilon_end <= 1))
    throw InvalidArgument("epsilon must lie in [0, 1]");
  if (!(epsilon_decay_fraction > 0 && epsilon_decay_fraction <= 1))
    throw InvalidArgument("epsilon decay fraction must lie in (0, 1]");
  if (!(learning_rate > 0)) throw InvalidArgument("learning rate must be positive");
  if (!(gamma >= 0 && gamma < 1)) throw InvalidArgument("gamma must lie in [0, 1)");
  if (steps_per_iteration < 0) throw InvalidArgument("steps per iteration must be >= 0");
  if (passes < 1) throw InvalidArgument("passes must be positive");
  if (hidden < 1) throw InvalidArgument("hidden width must be positive");
  if (policy != "ffcg" && policy != "rl-single")
    throw InvalidArgument("trainable policies are 'ffcg' and 'rl-single', got '" + policy + "'");
  if (checkpoint_every < 0) throw InvalidArgument("checkpoint period must be >= 0");
  reward.validate();
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidArgument("replay capacity must be positive");
}

void ReplayBuffer::push(ReplayTransition t) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(t));
}

std::vector<const ReplayTransition*> ReplayBuffer::sample(std::size_t n,
                                                          std::mt19937_64& rng) const {
  if (items_.empty()) throw EmptyBatch("replay buffer is empty");
  std::uniform_int_distribution<std::size_t> idx(0, items_.size() - 1);
  std::vector<const ReplayTransition*> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(&items_[idx(rng)]);
  return out;
}

double epsilon_at(int episode, int total, const TrainConfig& c) {
  const double horizon = std::max(1.0, c.epsilon_decay_fraction * total);
  const double frac = std::min(1.0, std::max(0, episode) / horizon);
  return c.epsilon_start + frac * (c.epsilon_end - c.epsilon_start);
}

namespace {

int key_of(const AnyInstance& inst) {
  return std::visit([](const auto& i) { return difficulty_key(i); }, inst);
}

// With probability epsilon a random action replaces the greedy one: a random
// nonempty subset for set selection, one uniform candidate for single picks.
class Explorer final : public SelectionPolicy {
 public:
  Explorer(SelectionPolicy& inner, bool single, double epsilon, std::mt19937_64& rng)
      : inner_(inner), single_(single), epsilon_(epsilon), rng_(rng) {}
  std::string name() const override { return inner_.name(); }

  SelectionEpisode select(const SelectionContext& ctx) override {
    if (!single_) {
      if (auto ep = epsilon_random(ctx.candidates, epsilon_, rng_)) return *ep;
      return inner_.select(ctx);
    }
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (epsilon_ > 0 && coin(rng_) < epsilon_) {
      SelectionEpisode ep;
      for (const auto& c : ctx.candidates) ep.candidate_ids.push_back(c.column.id);
      std::uniform_int_distribution<std::size_t> pick(0, ctx.candidates.size() - 1);
      ep.picks = {ctx.candidates[pick(rng_)].column.id};
      ep.exploratory = true;
      return ep;
    }
    return inner_.select(ctx);
  }

 private:
  SelectionPolicy& inner_;
  bool single_;
  double epsilon_;
  std::mt19937_64& rng_;
};

// Raw S_t at every iteration, for fitting the feature scaling.
class StateSampler final : public IterationObserver {
 public:
  std::vector<BipartiteState> states;
  void before_add(const Rmp& rmp, std::span<const Candidate> pool, const SelectionEpisode&,
                  int) override {
    states.push_back(build_state(rmp.columns(), rmp.solution(), pool));
  }
};

struct Learner {
  const TrainConfig& config;
  QNetWeights& online;
  QNetWeights target;
  ReplayBuffer replay;
  AdamState adam;
  std::mt19937_64& rng;
  TrainStepOptions step_options;
  long steps = 0;
  long syncs = 0;

  Learner(const TrainConfig& c, QNetWeights& w, std::mt19937_64& r)
      : config(c), online(w), target(w), replay(static_cast<std::size_t>(c.replay_capacity)),
        rng(r) {
    step_options.learning_rate = c.learning_rate;
    step_options.gamma = c.gamma;
    step_options.clip_norm = c.clip_norm;
    step_options.adam = c.adam;
    step_options.first_step_only = c.policy == "rl-single";
  }

  // Returns the losses of the gradient steps taken.
  std::vector<double> update() {
    std::vector<double> losses;
    if (replay.size() < static_cast<std::size_t>(config.batch_size)) return losses;
    for (int k = 0; k < config.steps_per_iteration; ++k) {
      const auto batch = replay.sample(static_cast<std::size_t>(config.batch_size), rng);
      const auto res = train_step(online, target, batch, step_options, rng, &adam);
      if (res.targets > 0) losses.push_back(res.loss);
      if (++steps % config.target_sync == 0) {
        target = online;
        ++syncs;
      }
    }
    return losses;
  }
};

// Turns each CG iteration into a replay transition. A transition enters the
// replay once its successor state is known (or the run converged).
class Collector final : public IterationObserver {
 public:
  Collector(Learner& learner, const RewardConfig& reward) : learner_(learner), reward_(reward) {}

  std::vector<double> losses;

  void before_add(const Rmp& rmp, std::span<const Candidate> pool, const SelectionEpisode& ep,
                  int t) override {
    if (t == 0) obj0_ = rmp.objective();
    BipartiteState state = build_state(rmp.columns(), rmp.solution(), pool);
    if (pending_) {
      pending_->next_state = state;
      learner_.replay.push(std::move(*pending_));
      pending_.reset();
    }
    const std::set<int> picked(ep.picks.begin(), ep.picks.end());
    std::vector<Column> selected, unselected;
    for (int id : ep.picks)
      for (const auto& c : pool)
        if (c.column.id == id) selected.push_back(c.column);
    for (const auto& c : pool)
      if (!picked.count(c.column.id)) unselected.push_back(c.column);
    const auto report =
        credit(rmp.problem(), rmp.solution().basis, selected, unselected, obj0_, reward_);

    ReplayTransition tr;
    tr.state = std::move(state);
    tr.picks = ep.picks;
    tr.rewards = report.column_rewards;
    for (const auto& [id, r] : report.unselected_rewards) tr.rewards[id] = r;
    pending_ = std::move(tr);
  }

  void after_add(const Rmp&, int) override {
    for (double l : learner_.update()) losses.push_back(l);
  }

  void converged(const Rmp&, int) override {
    if (pending_) learner_.replay.push(std::move(*pending_));
    pending_.reset();
  }

 private:
  Learner& learner_;
  const RewardConfig& reward_;
  double obj0_ = 0;
  std::optional<ReplayTransition> pending_;
};

double mean_iterations(const QNetWeights& w, std::span<const AnyInstance> instances,
                       const std::string& policy, const CgConfig& cg) {
  const std::vector<std::string> names{policy};
  const auto cmp = evaluate(&w, instances, names, cg);
  return cmp.stats.empty() ? 0.0 : cmp.stats.front().mean_iters;
}

}  // namespace

std::vector<AnyInstance> curriculum_order(std::span<const AnyInstance> instances) {
  std::vector<AnyInstance> out(instances.begin(), instances.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const AnyInstance& a, const AnyInstance& b) { return key_of(a) < key_of(b); });
  return out;
}

TrainResult train(std::span<const AnyInstance> instances, const TrainConfig& config,
                  std::span<const AnyInstance> validation) {
  config.validate();
  if (instances.empty()) throw InvalidArgument("no training instances");
  std::mt19937_64 rng(config.seed);
  const auto order = curriculum_order(instances);

  TrainResult result;
  auto& weights = result.weights;
  {
    StateSampler sampler;
    CgConfig cg = config.cg;
    cg.measure_redundancy = false;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(config.profile_instances),
                                         instances.size());
    for (std::size_t i = 0; i < n; ++i) {
      GreedyMultiPolicy gm;
      try {
        run(*make_pricing(instances[i]), gm, cg, &sampler);
      } catch (const IterationCapExceeded&) {
      }
    }
    weights.profile = sampler.states.empty() ? ScalingProfile::identity()
                                             : fit_profile(sampler.states);
  }
  weights.params = QNetParams::random(config.hidden, rng);

  Learner learner(config, weights, rng);
  const QScorer scorer = [&weights](const BipartiteState& s) { return score_state(weights, s); };
  const bool single = config.policy == "rl-single";
  auto greedy = make_policy(config.policy, scorer);

  const int total = config.passes * static_cast<int>(order.size());
  result.best_validation_iters = std::numeric_limits<double>::infinity();
  if (!config.checkpoint_dir.empty()) std::filesystem::create_directories(config.checkpoint_dir);

  auto checkpoint = [&](const std::string& tag) {
    if (!config.checkpoint_dir.empty())
      save_weights((config.checkpoint_dir / (tag + ".json")).string(), weights);
    if (validation.empty()) return;
    const double it = mean_iterations(weights, validation, config.policy, config.cg);
    if (it < result.best_validation_iters) {
      result.best_validation_iters = it;
      result.best = weights;
      if (!config.checkpoint_dir.empty())
        save_weights((config.checkpoint_dir / "best.json").string(), weights);
    }
  };

  int episode = 0;
  for (int pass = 0; pass < config.passes; ++pass) {
    for (const auto& inst : order) {
      TrainLogRow row;
      row.episode = episode;
      row.epsilon = epsilon_at(episode, total, config);
      const auto pricing = make_pricing(inst);
      row.instance = pricing->name();
      result.curriculum_keys.push_back(key_of(inst));

      Explorer policy(*greedy, single, row.epsilon, rng);
      Collector collector(learner, config.reward);
      try {
        const auto r = run(*pricing, policy, config.cg, &collector);
        row.iters = r.iterations();
        row.cols_added = r.columns_added();
      } catch (const IterationCapExceeded& e) {
        row.iters = e.partial().iterations();
        row.cols_added = e.partial().columns_added();
        row.skipped = true;
      }
      row.loss_mean = std::numeric_limits<double>::quiet_NaN();
      if (!collector.losses.empty()) {
        double s = 0;
        for (double l : collector.losses) s += l;
        row.loss_mean = s / static_cast<double>(collector.losses.size());
      }
      result.log.push_back(row);
      ++episode;
      if (config.checkpoint_every > 0 && episode % config.checkpoint_every == 0 && episode < total)
        checkpoint("checkpoint_" + std::to_string(episode));
    }
  }
  checkpoint("final");

  result.gradient_steps = learner.steps;
  result.target_syncs = learner.syncs;
  result.replay_size = learner.replay.size();
  if (!result.best) result.best_validation_iters = 0;
  return result;
}

void write_train_log_csv(std::ostream& out, std::span<const TrainLogRow> log) {
  out << "episode,instance,loss_mean,iters,cols_added,epsilon,skipped\n";
  const auto old = out.precision(10);
  for (const auto& r : log) {
    out << r.episode << ',' << r.instance << ',';
    if (std::isfinite(r.loss_mean)) out << r.loss_mean;
    out << ',' << r.iters << ',' << r.cols_added << ',' << r.epsilon << ',' << (r.skipped ? 1 : 0)
        << '\n';
  }
  out.precision(old);
}

// ---- evaluation ------------------------------------------------------------------

std::vector<PolicyStats> summarize(std::span<const BenchRow> rows) {
  std::vector<PolicyStats> out;
  for (const auto& r : rows) {
    if (std::none_of(out.begin(), out.end(), [&](const PolicyStats& s) { return s.policy == r.policy; }))
      out.push_back({.policy = r.policy});
  }
  for (auto& s : out) {
    std::vector<const BenchRow*> mine;
    for (const auto& r : rows)
      if (r.policy == s.policy) mine.push_back(&r);
    const double n = static_cast<double>(mine.size());
    s.instances = static_cast<int>(mine.size());
    auto moments = [&](auto get, double& mean, double& sd) {
      double sum = 0, sq = 0;
      for (const auto* r : mine) sum += get(*r);
      mean = sum / n;
      for (const auto* r : mine) sq += (get(*r) - mean) * (get(*r) - mean);
      sd = std::sqrt(sq / n);
    };
    double unused = 0;
    moments([](const BenchRow& r) { return static_cast<double>(r.iters); }, s.mean_iters, s.sd_iters);
    moments([](const BenchRow& r) { return static_cast<double>(r.cols_added); }, s.mean_cols,
            s.sd_cols);
    moments([](const BenchRow& r) { return r.ms; }, s.mean_ms, s.sd_ms);
    moments([](const BenchRow& r) { return r.objective; }, s.mean_objective, unused);
  }
  return out;
}

Comparison evaluate(const QNetWeights* weights, std::span<const AnyInstance> instances,
                    std::span<const std::string> policies, const CgConfig& config,
                    std::uint64_t seed) {
  QScorer scorer;
  if (weights) scorer = [weights](const BipartiteState& s) { return score_state(*weights, s); };
  for (const auto& p : policies)
    if (policy_needs_model(p) && !weights)
      throw InvalidArgument("policy '" + p + "' needs a trained model");

  Comparison cmp;
  for (const auto& inst : instances) {
    const auto pricing = make_pricing(inst);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& name : policies) {
      auto policy = make_policy(name, scorer, seed);
      BenchRow row;
      row.instance = pricing->name();
      row.policy = name;
      CgResult r;
      try {
        r = run(*pricing, *policy, config);
        row.converged = true;
      } catch (const IterationCapExceeded& e) {
        r = e.partial();
      }
      row.iters = r.iterations();
      row.cols_added = r.columns_added();
      row.ms = r.ms;
      row.objective = r.objective();
      row.trace = std::move(r.trace);
      if (const auto* f = dynamic_cast<const FfcgPolicy*>(policy.get()))
        if (f->worst_budget_margin() != std::numeric_limits<long>::min())
          row.budget_margin = f->worst_budget_margin();
      if (row.converged) {
        lo = std::min(lo, row.objective);
        hi = std::max(hi, row.objective);
      }
      cmp.rows.push_back(std::move(row));
    }
    if (hi >= lo)
      cmp.objective_disagreement =
          std::max(cmp.objective_disagreement, (hi - lo) / std::max(1.0, std::abs(hi)));
  }
  cmp.stats = summarize(cmp.rows);
  return cmp;
}

}  // namespace ffcg
