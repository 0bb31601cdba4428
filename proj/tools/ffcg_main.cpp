// ffcg: generate instances, train selection policies, solve, benchmark, plot.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ffcg/cg_engine.hpp"
#include "ffcg/errors.hpp"
#include "ffcg/instance.hpp"
#include "ffcg/policy.hpp"
#include "ffcg/qnet.hpp"
#include "ffcg/report.hpp"
#include "ffcg/trainer.hpp"

namespace fs = std::filesystem;
using namespace ffcg;

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Global {
  std::uint64_t seed = 0;
  std::string problem = "csp";
  int candidates = 10;
  double gap = 0.15;
  double alpha = 2000;
  double beta = 0.3;
  std::string model;
  std::string out;
};

ProblemKind kind_of(const std::string& p) {
  return p == "vrptw" ? ProblemKind::Vrptw : ProblemKind::Csp;
}

CgConfig cg_config(const Global& g) {
  CgConfig c;
  c.candidates = g.candidates;
  c.gap = g.gap;
  return c;
}

std::string instance_name(const AnyInstance& inst) { return make_pricing(inst)->name(); }

// Files given directly, plus every instance file inside given directories,
// in lexicographic order.
std::vector<AnyInstance> load_all(const std::vector<std::string>& paths, ProblemKind kind) {
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> inside;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file()) inside.push_back(e.path());
      std::sort(inside.begin(), inside.end());
      files.insert(files.end(), inside.begin(), inside.end());
    } else if (fs::exists(p)) {
      files.emplace_back(p);
    } else {
      throw UsageError("no such instance path: " + p);
    }
  }
  std::vector<AnyInstance> out;
  for (const auto& f : files) out.push_back(load_instance(f, kind));
  if (out.empty()) throw UsageError("no instances found");
  return out;
}

std::optional<QNetWeights> model_for(const std::vector<std::string>& policies, const Global& g) {
  const bool needed = std::any_of(policies.begin(), policies.end(), policy_needs_model);
  if (needed && g.model.empty()) throw UsageError("policy needs --model");
  if (g.model.empty()) return std::nullopt;
  return load_weights(g.model);
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

// ---- gen ---------------------------------------------------------------------------

struct GenArgs {
  int count = 1;
  int roll_length = 50;
  std::pair<int, int> item_types{15, 25};
  std::pair<int, int> customers{5, 16};
};

int cmd_gen(const Global& g, const GenArgs& a) {
  if (g.out.empty()) throw UsageError("gen needs --out DIR");
  std::mt19937_64 rng(g.seed);
  for (int k = 0; k < a.count; ++k) {
    AnyInstance inst;
    if (kind_of(g.problem) == ProblemKind::Csp) {
      std::uniform_int_distribution<int> m(a.item_types.first, a.item_types.second);
      const int types = m(rng);
      inst = generate_csp(rng(), a.roll_length, types);
    } else {
      std::uniform_int_distribution<int> n(a.customers.first, a.customers.second);
      const int customers = n(rng);
      inst = generate_vrptw(rng(), customers);
    }
    const fs::path path = fs::path(g.out) / (instance_name(inst) + ".json");
    fs::create_directories(g.out);
    save_instance(path, inst);
    std::cout << path.string() << '\n';
  }
  return kOk;
}

// ---- train -------------------------------------------------------------------------

struct TrainArgs {
  std::vector<std::string> instances;
  std::vector<std::string> validation;
  std::string policy = "ffcg";
  int passes = 2;
  double gamma = 0.9;
  double lr = 1e-3;
  bool adam = false;
  int hidden = kDefaultHidden;
  std::string log;
  std::string checkpoint_dir;
};

int cmd_train(const Global& g, const TrainArgs& a) {
  if (g.out.empty()) throw UsageError("train needs --out MODEL.json");
  const auto kind = kind_of(g.problem);
  const auto train_set = load_all(a.instances, kind);
  const auto val_set = a.validation.empty() ? std::vector<AnyInstance>{} : load_all(a.validation, kind);
  TrainConfig cfg;
  cfg.seed = g.seed;
  cfg.policy = a.policy;
  cfg.passes = a.passes;
  cfg.gamma = a.gamma;
  cfg.learning_rate = a.lr;
  cfg.adam = a.adam;
  cfg.hidden = a.hidden;
  cfg.reward.alpha = g.alpha;
  cfg.reward.beta = g.beta;
  cfg.cg.candidates = g.candidates;
  cfg.cg.gap = g.gap;
  cfg.checkpoint_dir = a.checkpoint_dir;
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const auto r = train(train_set, cfg, val_set);
  save_weights(g.out, r.best ? *r.best : r.weights);
  if (!a.log.empty()) {
    std::ostringstream os;
    write_train_log_csv(os, r.log);
    write_file(a.log, os.str());
  }
  std::cout << "episodes " << r.log.size() << ", gradient steps " << r.gradient_steps
            << ", replay " << r.replay_size << '\n';
  if (r.best) std::cout << "best validation iterations " << r.best_validation_iters << '\n';
  std::cout << "model written to " << g.out << '\n';
  return kOk;
}

// ---- solve -------------------------------------------------------------------------

struct SolveArgs {
  std::string instance;
  std::string policy = "greedy-s";
  std::string trace;
};

int cmd_solve(const Global& g, const SolveArgs& a) {
  const auto weights = model_for({a.policy}, g);
  QScorer scorer;
  if (weights) scorer = [&w = *weights](const BipartiteState& s) { return score_state(w, s); };
  std::unique_ptr<SelectionPolicy> policy;
  try {
    policy = make_policy(a.policy, scorer, g.seed);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const auto inst = load_all({a.instance}, kind_of(g.problem)).front();
  const auto r = run(*make_pricing(inst), *policy, cg_config(g));
  std::cout.precision(10);
  std::cout << "instance " << r.instance << "\npolicy " << r.policy << "\nobjective "
            << r.objective() << "\niterations " << r.iterations() << "\ncolumns added "
            << r.columns_added() << "\nms " << r.ms << '\n';
  if (!a.trace.empty()) {
    std::ostringstream os;
    write_trace_csv(os, r.trace);
    write_file(a.trace, os.str());
  }
  return kOk;
}

// ---- bench -------------------------------------------------------------------------

struct BenchArgs {
  std::vector<std::string> instances;
  std::vector<std::string> policies{"greedy-s", "greedy-m"};
  std::string traces;
};

int cmd_bench(const Global& g, const BenchArgs& a) {
  for (const auto& p : a.policies)
    if (!policy_needs_model(p) && p != "greedy-s" && p != "greedy-m" && p != "fixed-k" &&
        p != "random")
      throw UsageError("unknown policy '" + p + "'");
  const auto weights = model_for(a.policies, g);
  const auto inst = load_all(a.instances, kind_of(g.problem));
  const auto cmp = evaluate(weights ? &*weights : nullptr, inst, a.policies, cg_config(g), g.seed);

  const std::string table = format_bench_table(cmp.stats);
  std::cout << table;
  std::cout << "max objective disagreement " << cmp.objective_disagreement << '\n';
  if (!g.out.empty()) {
    std::ostringstream os;
    write_bench_csv(os, cmp.rows);
    write_file(g.out, os.str());
    write_file(fs::path(g.out).replace_extension(".txt"), table);
  }
  if (!a.traces.empty())
    for (const auto& row : cmp.rows) {
      std::ostringstream os;
      write_trace_csv(os, row.trace);
      write_file(fs::path(a.traces) / (row.instance + "." + row.policy + ".csv"), os.str());
    }
  return kOk;
}

// ---- plot --------------------------------------------------------------------------

struct PlotArgs {
  std::vector<std::string> traces;
  bool histogram = false;
  std::string title;
};

// Series name from a trace file called <instance>.<policy>.csv; otherwise the
// stem.
std::string series_of(const fs::path& p) {
  const std::string stem = p.stem().string();
  const auto dot = stem.rfind('.');
  return dot == std::string::npos ? stem : stem.substr(dot + 1);
}

int cmd_plot(const Global& g, const PlotArgs& a) {
  if (g.out.empty()) throw UsageError("plot needs --out FILE.svg");
  std::vector<fs::path> files;
  for (const auto& t : a.traces) {
    if (fs::is_directory(t)) {
      for (const auto& e : fs::directory_iterator(t))
        if (e.path().extension() == ".csv") files.push_back(e.path());
    } else {
      files.emplace_back(t);
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw UsageError("no trace files");
  std::map<std::string, std::vector<CgTrace>> groups;
  std::vector<std::string> order;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw UsageError("cannot read " + f.string());
    CgTrace tr;
    try {
      tr = read_trace_csv(in);
    } catch (const ParseError& e) {
      throw UsageError(f.string() + ": " + e.what());
    }
    const auto name = series_of(f);
    if (!groups.count(name)) order.push_back(name);
    groups[name].push_back(std::move(tr));
  }
  std::string svg;
  if (a.histogram) {
    std::vector<NamedHistogram> series;
    for (const auto& n : order) series.push_back({n, column_histogram(groups[n])});
    svg = svg_histogram_chart(series, a.title.empty() ? "columns selected per iteration" : a.title);
    for (const auto& s : series) {
      std::cout << s.name << ':';
      for (double v : s.histogram.mean_selected) std::cout << ' ' << v;
      std::cout << '\n';
    }
  } else {
    std::vector<NamedCurve> series;
    for (const auto& n : order) series.push_back({n, convergence_curve(groups[n])});
    svg = svg_convergence_chart(series, a.title.empty() ? "normalized objective" : a.title);
    for (const auto& s : series) {
      std::cout << s.name << ':';
      for (double v : s.curve.mean) std::cout << ' ' << v;
      std::cout << '\n';
    }
  }
  write_file(g.out, svg);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Column generation with learned multi-column selection"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--problem", g.problem, "Problem family")->check(CLI::IsMember({"csp", "vrptw"}));
  app.add_option("--candidates", g.candidates, "Columns returned by pricing")
      ->check(CLI::PositiveNumber);
  app.add_option("--gap", g.gap, "Relative gap for pricing candidates")->check(CLI::Range(0.0, 1.0));
  app.add_option("--alpha", g.alpha, "Objective reward scale")->check(CLI::NonNegativeNumber);
  app.add_option("--beta", g.beta, "Redundancy penalty")->check(CLI::NonNegativeNumber);
  app.add_option("--model", g.model, "Trained weights (JSON)")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output path");

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen", "Generate random instances");
  c_gen->add_option("--count", gen.count)->check(CLI::PositiveNumber);
  c_gen->add_option("--roll-length", gen.roll_length)->check(CLI::PositiveNumber);
  c_gen->add_option("--item-types", gen.item_types, "Range LO HI");
  c_gen->add_option("--customers", gen.customers, "Range LO HI");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a selection policy");
  c_train->add_option("--instances", tr.instances, "Instance files or directories")->required();
  c_train->add_option("--validation", tr.validation);
  c_train->add_option("--policy", tr.policy)->check(CLI::IsMember({"ffcg", "rl-single"}));
  c_train->add_option("--passes", tr.passes)->check(CLI::PositiveNumber);
  c_train->add_option("--gamma", tr.gamma)->check(CLI::Range(0.0, 0.999999));
  c_train->add_option("--lr", tr.lr)->check(CLI::PositiveNumber);
  c_train->add_flag("--adam", tr.adam);
  c_train->add_option("--hidden", tr.hidden)->check(CLI::PositiveNumber);
  c_train->add_option("--log", tr.log, "Per-episode CSV log");
  c_train->add_option("--checkpoint-dir", tr.checkpoint_dir);

  SolveArgs sv;
  auto* c_solve = app.add_subcommand("solve", "Solve one instance");
  c_solve->add_option("--instance", sv.instance)->required()->check(CLI::ExistingPath);
  c_solve->add_option("--policy", sv.policy);
  c_solve->add_option("--trace", sv.trace, "Convergence trace CSV");

  BenchArgs bn;
  auto* c_bench = app.add_subcommand("bench", "Compare policies over instances");
  c_bench->add_option("--instances", bn.instances)->required();
  c_bench->add_option("--policy,--policies", bn.policies)->delimiter(',');
  c_bench->add_option("--traces", bn.traces, "Directory for per-run trace CSVs");

  PlotArgs pl;
  auto* c_plot = app.add_subcommand("plot", "Chart trace CSVs");
  c_plot->add_option("traces", pl.traces, "Trace files or directories")->required();
  c_plot->add_flag("--histogram", pl.histogram, "Mean columns selected per iteration");
  c_plot->add_option("--title", pl.title);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*c_gen) return cmd_gen(g, gen);
    if (*c_train) return cmd_train(g, tr);
    if (*c_solve) return cmd_solve(g, sv);
    if (*c_bench) return cmd_bench(g, bn);
    if (*c_plot) return cmd_plot(g, pl);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsage;
}
