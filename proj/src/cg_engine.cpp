#include "ffcg/cg_engine.hpp"

#include <algorithm>
#include <chrono>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "ffcg/pricing_csp.hpp"
#include "ffcg/reward.hpp"

namespace ffcg {

// ---- problems ----------------------------------------------------------------

CspPricing::CspPricing(CspInstance instance) : instance_(std::move(instance)) {}

Eigen::VectorXd CspPricing::rhs() const {
  Eigen::VectorXd b(instance_.item_types());
  for (int j = 0; j < instance_.item_types(); ++j) b(j) = instance_.demands[j];
  return b;
}

std::vector<Column> CspPricing::initial_columns() const {
  const int m = instance_.item_types();
  if (m == 0) throw InfeasibleInitialization("cutting-stock instance has no item types");
  std::vector<Column> out;
  for (int j = 0; j < m; ++j) {
    const int w = instance_.weights[j];
    if (w <= 0 || w > instance_.roll_length)
      throw InfeasibleInitialization("item type " + std::to_string(j) + " does not fit a roll");
    std::vector<int> counts(m, 0);
    counts[j] = instance_.roll_length / w;
    out.push_back(pattern_column(make_pattern(instance_, counts), m));
  }
  return out;
}

std::vector<Candidate> CspPricing::price(const Eigen::VectorXd& duals, int k, double gap) const {
  std::vector<Candidate> out;
  for (const auto& p : price_csp(instance_, duals, k, gap))
    out.push_back({pattern_column(p.pattern, instance_.item_types()), p.reduced_cost});
  return out;
}

VrptwPricing::VrptwPricing(VrptwInstance instance, EspprcOptions options)
    : instance_(std::move(instance)), options_(options) {}

Eigen::VectorXd VrptwPricing::rhs() const {
  return Eigen::VectorXd::Ones(instance_.n_customers());
}

std::vector<Column> VrptwPricing::initial_columns() const {
  const int n = instance_.n_customers();
  if (n == 0) throw InfeasibleInitialization("routing instance has no customers");
  std::vector<Column> out;
  for (int i = 1; i <= n; ++i) {
    Route r;
    if (!evaluate_route(instance_, {0, i, instance_.sink()}, r))
      throw InfeasibleInitialization("customer " + std::to_string(i) +
                                     " cannot be served by a dedicated vehicle");
    out.push_back(route_column(r, n));
  }
  return out;
}

std::vector<Candidate> VrptwPricing::price(const Eigen::VectorXd& duals, int k, double gap) const {
  std::vector<Candidate> out;
  for (const auto& p : price_vrptw(instance_, duals, k, gap, options_))
    out.push_back({route_column(p.route, instance_.n_customers()), p.reduced_cost});
  return out;
}

std::unique_ptr<PricingProblem> make_pricing(const AnyInstance& instance) {
  if (const auto* c = std::get_if<CspInstance>(&instance)) return std::make_unique<CspPricing>(*c);
  return std::make_unique<VrptwPricing>(std::get<VrptwInstance>(instance));
}

// ---- master ------------------------------------------------------------------

Rmp::Rmp(Eigen::VectorXd rhs, std::vector<Column> initial, SimplexOptions options)
    : options_(options) {
  if (initial.empty()) throw InfeasibleInitialization("restricted master has no columns");
  const auto m = rhs.size();
  problem_.rhs = std::move(rhs);
  problem_.costs.resize(0);
  problem_.constraint_matrix.resize(m, 0);
  for (auto& c : initial) {
    if (c.coeffs.size() != m)
      throw DimensionMismatch("initial column has " + std::to_string(c.coeffs.size()) +
                              " coefficients for " + std::to_string(m) + " rows");
    if (contains(c)) continue;
    c.id = issue_id();
    c.born_iter = 0;
    c.status = ColumnStatus::Existing;
    const auto j = problem_.cols();
    problem_.costs.conservativeResize(j + 1);
    problem_.constraint_matrix.conservativeResize(Eigen::NoChange, j + 1);
    problem_.costs(j) = c.cost;
    problem_.constraint_matrix.col(j) = c.coeffs;
    columns_.push_back(std::move(c));
    basic_.push_back(false);
  }
  resolve(std::nullopt);
  if (!solution_.optimal())
    throw InfeasibleInitialization(std::string("initial restricted master is ") +
                                   to_string(solution_.status));
}

bool Rmp::contains(const Column& column) const {
  return std::any_of(columns_.begin(), columns_.end(),
                     [&](const Column& c) { return c.same_variable(column); });
}

int Rmp::add_columns(std::span<const Column> columns, int iteration) {
  const auto m = problem_.rows();
  std::unordered_set<int> ids;
  for (const auto& c : columns_) ids.insert(c.id);
  std::vector<Column> fresh;
  for (const auto& c : columns) {
    if (c.coeffs.size() != m)
      throw DimensionMismatch("column " + std::to_string(c.id) + " has " +
                              std::to_string(c.coeffs.size()) + " coefficients for " +
                              std::to_string(m) + " rows");
    if (contains(c) || std::any_of(fresh.begin(), fresh.end(),
                                   [&](const Column& f) { return f.same_variable(c); }))
      continue;
    if (!ids.insert(c.id).second)
      throw InvalidArgument("column id " + std::to_string(c.id) + " is already in use");
    fresh.push_back(c);
  }
  if (fresh.empty()) return 0;

  const auto n0 = problem_.cols();
  const auto added = static_cast<Eigen::Index>(fresh.size());
  problem_.costs.conservativeResize(n0 + added);
  problem_.constraint_matrix.conservativeResize(Eigen::NoChange, n0 + added);
  for (Eigen::Index k = 0; k < added; ++k) {
    Column& c = fresh[static_cast<std::size_t>(k)];
    c.born_iter = iteration;
    c.status = ColumnStatus::Existing;
    c.iters_in_basis = c.iters_out_of_basis = 0;
    c.entered_last_iter = c.left_last_iter = false;
    problem_.costs(n0 + k) = c.cost;
    problem_.constraint_matrix.col(n0 + k) = c.coeffs;
    next_id_ = std::max(next_id_, c.id + 1);
    columns_.push_back(std::move(c));
    basic_.push_back(false);
  }
  const std::vector<BasisIndex> warm = solution_.basis;
  resolve(std::span<const BasisIndex>(warm));
  if (!solution_.optimal())
    throw NumericalBreakdown(std::string("restricted master became ") +
                             to_string(solution_.status) + " after adding columns");
  return static_cast<int>(added);
}

void Rmp::resolve(std::optional<std::span<const BasisIndex>> warm) {
  solution_ = solve(problem_, warm, options_);
  ++solves_;
  if (solution_.optimal()) update_lifecycle();
}

void Rmp::update_lifecycle() {
  std::vector<bool> now(columns_.size(), false);
  for (BasisIndex b : solution_.basis)
    if (!is_artificial(b)) now[static_cast<std::size_t>(b)] = true;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    Column& c = columns_[j];
    c.entered_last_iter = now[j] && !basic_[j];
    c.left_last_iter = !now[j] && basic_[j];
    if (now[j])
      ++c.iters_in_basis;
    else
      ++c.iters_out_of_basis;
    basic_[j] = now[j];
  }
}

BipartiteState SelectionContext::base_state() const {
  return build_state(rmp.columns(), rmp.solution(), candidates);
}

// ---- trace -------------------------------------------------------------------

int CgTrace::columns_added() const {
  int n = 0;
  for (const auto& r : rows) n += r.n_selected;
  return n;
}

namespace {
constexpr const char* kTraceHeader = "iter,obj,n_candidates,n_selected,n_redundant,ms";
}

void write_trace_csv(std::ostream& out, const CgTrace& trace) {
  out << kTraceHeader << '\n';
  const auto old = out.precision(17);
  for (const auto& r : trace.rows)
    out << r.iter << ',' << r.obj << ',' << r.n_candidates << ',' << r.n_selected << ','
        << r.n_redundant << ',' << r.ms << '\n';
  out.precision(old);
}

CgTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty trace", 1, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw ParseError("unexpected trace header '" + line + "'", 1, 1);
  CgTrace trace;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 6)
      throw ParseError("expected 6 fields, found " + std::to_string(fields.size()), lineno, 1);
    TraceRow r;
    int col = 1;
    try {
      std::size_t used = 0;
      auto whole = [&](const std::string& s, auto conv) {
        auto v = conv(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        col += static_cast<int>(s.size()) + 1;
        return v;
      };
      auto to_i = [](const std::string& s, std::size_t* u) { return std::stoi(s, u); };
      auto to_d = [](const std::string& s, std::size_t* u) { return std::stod(s, u); };
      r.iter = whole(fields[0], to_i);
      r.obj = whole(fields[1], to_d);
      r.n_candidates = whole(fields[2], to_i);
      r.n_selected = whole(fields[3], to_i);
      r.n_redundant = whole(fields[4], to_i);
      r.ms = whole(fields[5], to_d);
    } catch (const std::logic_error&) {
      throw ParseError("malformed trace value", lineno, col);
    }
    trace.rows.push_back(r);
  }
  return trace;
}

// ---- loop --------------------------------------------------------------------

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace

CgResult run(const PricingProblem& problem, SelectionPolicy& policy, const CgConfig& config,
             IterationObserver* observer) {
  const auto start = std::chrono::steady_clock::now();
  Rmp rmp(problem.rhs(), problem.initial_columns());
  CgResult result;
  result.instance = problem.name();
  result.policy = policy.name();
  result.initial_columns = static_cast<int>(rmp.columns().size());
  const int cap =
      config.iteration_cap > 0 ? config.iteration_cap : 10 * result.initial_columns + 500;

  auto finish = [&] {
    result.solution = rmp.solution();
    result.columns = rmp.columns();
    result.ms = elapsed_ms(start);
  };

  RewardConfig redundancy;
  redundancy.redundancy_tolerance = config.redundancy_tolerance;
  redundancy.unselected_supervision = false;

  for (int t = 0;; ++t) {
    if (t >= cap) {
      finish();
      throw IterationCapExceeded("no convergence within " + std::to_string(cap) + " iterations",
                                 std::move(result));
    }
    const auto iter_start = std::chrono::steady_clock::now();
    TraceRow row;
    row.iter = t;
    row.obj = rmp.objective();

    std::vector<Candidate> pool;
    for (auto& c : problem.price(rmp.solution().duals, config.candidates, config.gap)) {
      if (rmp.contains(c.column)) continue;
      c.column.id = rmp.issue_id();
      c.column.status = ColumnStatus::Candidate;
      pool.push_back(std::move(c));
    }
    row.n_candidates = static_cast<int>(pool.size());
    if (pool.empty()) {
      row.ms = elapsed_ms(iter_start);
      result.trace.rows.push_back(row);
      result.converged = true;
      if (observer) observer->converged(rmp, t);
      break;
    }

    SelectionContext ctx{rmp, pool, t, config.record_states};
    SelectionEpisode ep = policy.select(ctx);
    std::vector<Column> chosen;
    for (int id : ep.picks) {
      const auto it = std::find_if(pool.begin(), pool.end(),
                                   [&](const Candidate& c) { return c.column.id == id; });
      if (it == pool.end())
        throw StateInconsistency("policy picked column " + std::to_string(id) +
                                 " outside the candidate pool");
      chosen.push_back(it->column);
    }
    if (chosen.empty()) throw StateInconsistency("policy returned an empty selection");
    row.n_selected = static_cast<int>(chosen.size());
    if (config.measure_redundancy) {
      const auto eff = effective_set(rmp.problem(), rmp.solution().basis, chosen, redundancy);
      row.n_redundant = row.n_selected - static_cast<int>(eff.size());
    }
    if (observer) observer->before_add(rmp, pool, ep, t);
    rmp.add_columns(chosen, t + 1);
    if (observer) observer->after_add(rmp, t);
    if (config.keep_episodes) result.episodes.push_back(std::move(ep));
    row.ms = elapsed_ms(iter_start);
    result.trace.rows.push_back(row);
  }
  finish();
  return result;
}

LpSolution solve_master(const Eigen::VectorXd& rhs, std::span<const Column> columns) {
  LpProblem p;
  p.rhs = rhs;
  p.costs.resize(static_cast<Eigen::Index>(columns.size()));
  p.constraint_matrix.resize(rhs.size(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    p.costs(static_cast<Eigen::Index>(j)) = columns[j].cost;
    p.constraint_matrix.col(static_cast<Eigen::Index>(j)) = columns[j].coeffs;
  }
  return solve(p);
}

}  // namespace ffcg
