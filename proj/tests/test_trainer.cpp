#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "ffcg/errors.hpp"
#include "ffcg/trainer.hpp"
#include "full_master.hpp"

using namespace ffcg;

namespace {

std::vector<AnyInstance> small_csps(int count, std::uint64_t seed = 3) {
  std::vector<AnyInstance> out;
  const int lengths[] = {40, 20, 30, 25, 35};
  for (int i = 0; i < count; ++i)
    out.push_back(generate_csp(seed + static_cast<std::uint64_t>(i), lengths[i % 5], 5));
  return out;
}

TrainConfig quick_config() {
  TrainConfig c;
  c.batch_size = 4;
  c.target_sync = 5;
  c.hidden = 8;
  c.profile_instances = 2;
  c.checkpoint_every = 0;
  c.passes = 2;
  c.seed = 11;
  return c;
}

ReplayTransition tagged(int tag) {
  ReplayTransition t;
  t.picks = {tag};
  return t;
}

}  // namespace

TEST_CASE("replay buffer is FIFO with a fixed capacity") {
  ReplayBuffer rb(3);
  for (int i = 0; i < 5; ++i) rb.push(tagged(i));
  REQUIRE(rb.size() == 3);
  CHECK(rb[0].picks.front() == 2);
  CHECK(rb[2].picks.front() == 4);
  std::mt19937_64 rng(1);
  const auto batch = rb.sample(20, rng);
  CHECK(batch.size() == 20);
  for (const auto* t : batch) CHECK((t->picks.front() >= 2 && t->picks.front() <= 4));
  CHECK_THROWS_AS(ReplayBuffer(0), InvalidArgument);
  ReplayBuffer empty(2);
  CHECK_THROWS_AS(empty.sample(1, rng), EmptyBatch);
}

TEST_CASE("epsilon schedule") {
  TrainConfig c;
  CHECK(epsilon_at(0, 100, c) == doctest::Approx(1.0));
  CHECK(epsilon_at(25, 100, c) == doctest::Approx(0.525));
  CHECK(epsilon_at(50, 100, c) == doctest::Approx(0.05));
  CHECK(epsilon_at(99, 100, c) == doctest::Approx(0.05));
  for (int e = 1; e < 100; ++e) CHECK(epsilon_at(e, 100, c) <= epsilon_at(e - 1, 100, c));
}

TEST_CASE("curriculum order is non-decreasing and stable") {
  const auto in = small_csps(10);
  const auto out = curriculum_order(in);
  REQUIRE(out.size() == in.size());
  for (std::size_t i = 1; i < out.size(); ++i)
    CHECK(std::get<CspInstance>(out[i - 1]).roll_length <= std::get<CspInstance>(out[i]).roll_length);
  // equal keys keep input order
  CHECK(std::get<CspInstance>(out[0]).name == std::get<CspInstance>(in[1]).name);
  CHECK(std::get<CspInstance>(out[1]).name == std::get<CspInstance>(in[6]).name);
}

TEST_CASE("config validation") {
  auto bad = [](auto mutate) {
    TrainConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(bad([](TrainConfig& c) { c.batch_size = 0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](TrainConfig& c) { c.gamma = 1.0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](TrainConfig& c) { c.policy = "greedy-m"; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](TrainConfig& c) { c.epsilon_end = 2; }).validate(), InvalidArgument);
  CHECK_NOTHROW(TrainConfig{}.validate());
  CHECK_THROWS_AS(train({}, quick_config()), InvalidArgument);
}

TEST_CASE("training smoke run") {
  const auto inst = small_csps(5);
  const auto cfg = quick_config();
  const auto r = train(inst, cfg);
  CHECK(r.log.size() == 10);
  CHECK(r.curriculum_keys.size() == 10);
  for (std::size_t i = 1; i < 5; ++i) CHECK(r.curriculum_keys[i - 1] <= r.curriculum_keys[i]);
  CHECK(r.replay_size >= 1);
  CHECK(r.gradient_steps > 0);
  CHECK(r.target_syncs == r.gradient_steps / cfg.target_sync);
  CHECK_NOTHROW(r.weights.params.validate());
  CHECK(r.log.front().epsilon == doctest::Approx(1.0));
  int transitions = 0;
  for (const auto& row : r.log) {
    CHECK(!row.skipped);
    transitions += row.iters - 1;
  }
  // one transition per iteration that added columns
  CHECK(static_cast<int>(r.replay_size) == transitions);
}

TEST_CASE("training is deterministic for a seed") {
  const auto inst = small_csps(4);
  auto cfg = quick_config();
  const auto a = train(inst, cfg);
  const auto b = train(inst, cfg);
  CHECK(a.weights == b.weights);
  CHECK(a.gradient_steps == b.gradient_steps);
  cfg.seed = 12;
  const auto c = train(inst, cfg);
  CHECK(!(a.weights == c.weights));
}

TEST_CASE("single-pick training and capped episodes") {
  const auto inst = small_csps(3);
  auto cfg = quick_config();
  cfg.policy = "rl-single";
  CHECK(train(inst, cfg).gradient_steps > 0);

  cfg = quick_config();
  cfg.cg.iteration_cap = 1;
  const auto r = train(inst, cfg);
  int skipped = 0;
  for (const auto& row : r.log) {
    CHECK(row.iters == 1);
    skipped += row.skipped;
  }
  CHECK(skipped > 0);
  // a capped episode leaves nothing in the replay
  CHECK(r.replay_size == 0);
}

TEST_CASE("checkpoints and validation tracking") {
  const auto dir = std::filesystem::temp_directory_path() / "ffcg_ckpt_test";
  std::filesystem::remove_all(dir);
  const auto inst = small_csps(4);
  auto cfg = quick_config();
  cfg.checkpoint_every = 3;
  cfg.checkpoint_dir = dir;
  const auto val = small_csps(2, 90);
  const auto r = train(inst, cfg, val);
  CHECK(std::filesystem::exists(dir / "checkpoint_3.json"));
  CHECK(std::filesystem::exists(dir / "checkpoint_6.json"));
  CHECK(std::filesystem::exists(dir / "final.json"));
  REQUIRE(r.best);
  CHECK(load_weights((dir / "best.json").string()) == *r.best);
  CHECK(load_weights((dir / "final.json").string()) == r.weights);
  CHECK(r.best_validation_iters > 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("train log csv") {
  std::vector<TrainLogRow> log(2);
  log[0] = {0, "a", std::numeric_limits<double>::quiet_NaN(), 3, 5, 1.0, false};
  log[1] = {1, "b", 0.25, 2, 4, 0.5, true};
  std::ostringstream os;
  write_train_log_csv(os, log);
  CHECK(os.str() ==
        "episode,instance,loss_mean,iters,cols_added,epsilon,skipped\n"
        "0,a,,3,5,1,0\n1,b,0.25,2,4,0.5,1\n");
}

TEST_CASE("evaluate: table shape and objective agreement") {
  const auto inst = small_csps(3);
  const std::vector<std::string> names{"greedy-s", "greedy-m", "fixed-k", "random"};
  const auto cmp = evaluate(nullptr, inst, names);
  CHECK(cmp.rows.size() == 12);
  CHECK(cmp.stats.size() == 4);
  CHECK(cmp.objective_disagreement < 1e-9);
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const auto& c = std::get<CspInstance>(inst[i]);
    const double full = oracle::full_csp_optimum(c);
    for (std::size_t k = 0; k < names.size(); ++k) {
      const auto& row = cmp.rows[i * names.size() + k];
      CHECK(row.policy == names[k]);
      CHECK(row.converged);
      CHECK(row.objective == doctest::Approx(full).epsilon(1e-6));
      CHECK(row.iters == row.trace.iterations());
    }
  }
  CHECK(cmp.stats[1].mean_iters <= cmp.stats[0].mean_iters);

  const std::vector<std::string> learned{"ffcg"};
  CHECK_THROWS_AS(evaluate(nullptr, inst, learned), InvalidArgument);
  const auto w = train(inst, quick_config()).weights;
  const auto one = evaluate(&w, std::span(inst).first(1), learned);
  REQUIRE(one.rows.size() == 1);
  CHECK(one.rows[0].budget_margin <= 0);
}

TEST_CASE("summarize matches recomputation") {
  std::vector<BenchRow> rows(4);
  rows[0] = {.instance = "a", .policy = "p", .iters = 2, .cols_added = 4, .ms = 1, .objective = 10};
  rows[1] = {.instance = "a", .policy = "q", .iters = 5, .cols_added = 5, .ms = 2, .objective = 10};
  rows[2] = {.instance = "b", .policy = "p", .iters = 4, .cols_added = 8, .ms = 3, .objective = 20};
  rows[3] = {.instance = "b", .policy = "q", .iters = 7, .cols_added = 7, .ms = 4, .objective = 20};
  const auto s = summarize(rows);
  REQUIRE(s.size() == 2);
  CHECK(s[0].policy == "p");
  CHECK(s[0].mean_iters == 3);
  CHECK(s[0].sd_iters == 1);
  CHECK(s[0].mean_cols == 6);
  CHECK(s[1].mean_iters == 6);
  CHECK(s[1].mean_objective == 15);
}
