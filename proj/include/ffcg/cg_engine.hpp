#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ffcg/column.hpp"
#include "ffcg/errors.hpp"
#include "ffcg/instance.hpp"
#include "ffcg/lp.hpp"
#include "ffcg/pricing_vrptw.hpp"
#include "ffcg/selection.hpp"

namespace ffcg {

/// Problem-specific half of column generation: the master's rows, its starting
/// columns and the pricing oracle.
class PricingProblem {
 public:
  virtual ~PricingProblem() = default;
  virtual ProblemKind kind() const = 0;
  virtual std::string name() const = 0;
  virtual int rows() const = 0;
  virtual Eigen::VectorXd rhs() const = 0;
  /// Throws InfeasibleInitialization when no starting master exists.
  virtual std::vector<Column> initial_columns() const = 0;
  /// Up to k improving columns in ascending reduced cost; empty at convergence.
  virtual std::vector<Candidate> price(const Eigen::VectorXd& duals, int k, double gap) const = 0;
};

class CspPricing final : public PricingProblem {
 public:
  explicit CspPricing(CspInstance instance);
  ProblemKind kind() const override { return ProblemKind::Csp; }
  std::string name() const override { return instance_.name; }
  int rows() const override { return instance_.item_types(); }
  Eigen::VectorXd rhs() const override;
  /// One pattern per item type holding as many copies as fit.
  std::vector<Column> initial_columns() const override;
  std::vector<Candidate> price(const Eigen::VectorXd& duals, int k, double gap) const override;
  const CspInstance& instance() const { return instance_; }

 private:
  CspInstance instance_;
};

class VrptwPricing final : public PricingProblem {
 public:
  explicit VrptwPricing(VrptwInstance instance, EspprcOptions options = {});
  ProblemKind kind() const override { return ProblemKind::Vrptw; }
  std::string name() const override { return instance_.name(); }
  int rows() const override { return instance_.n_customers(); }
  Eigen::VectorXd rhs() const override;
  /// Depot -> i -> depot for every customer.
  std::vector<Column> initial_columns() const override;
  std::vector<Candidate> price(const Eigen::VectorXd& duals, int k, double gap) const override;
  const VrptwInstance& instance() const { return instance_; }

 private:
  VrptwInstance instance_;
  EspprcOptions options_;
};

std::unique_ptr<PricingProblem> make_pricing(const AnyInstance& instance);

/// Restricted master problem over an append-only column set. Every re-solve
/// warm-starts from the previous basis and refreshes the columns' lifecycle
/// counters.
class Rmp {
 public:
  /// Throws InfeasibleInitialization if the starting master is empty or has
  /// no feasible solution.
  Rmp(Eigen::VectorXd rhs, std::vector<Column> initial, SimplexOptions options = {});

  const std::vector<Column>& columns() const { return columns_; }
  const LpProblem& problem() const { return problem_; }
  const LpSolution& solution() const { return solution_; }
  double objective() const { return solution_.objective; }
  int rows() const { return static_cast<int>(problem_.rows()); }
  int solves() const { return solves_; }

  /// True when an identical variable is already in the master.
  bool contains(const Column& column) const;
  /// Fresh id for a column that will be offered to the master.
  int issue_id() { return next_id_++; }

  /// Appends the columns not already present and re-solves. Returns the
  /// number actually added. Throws DimensionMismatch on a bad coefficient
  /// length and InvalidArgument on an id already in use.
  int add_columns(std::span<const Column> columns, int iteration);

 private:
  void resolve(std::optional<std::span<const BasisIndex>> warm);
  void update_lifecycle();

  LpProblem problem_;
  std::vector<Column> columns_;
  std::vector<bool> basic_;
  LpSolution solution_;
  SimplexOptions options_;
  int next_id_ = 0;
  int solves_ = 0;
};

struct CgConfig {
  int candidates = 10;
  double gap = 0.15;
  // Zero means 10 * initial columns + 500.
  int iteration_cap = 0;
  // Leave-one-out redundancy count per iteration (|C_t| + 1 extra solves).
  bool measure_redundancy = true;
  double redundancy_tolerance = 1e-6;
  bool keep_episodes = false;
  bool record_states = false;
};

struct TraceRow {
  int iter = 0;
  double obj = 0;
  int n_candidates = 0;
  int n_selected = 0;
  int n_redundant = 0;
  double ms = 0;

  bool operator==(const TraceRow&) const = default;
};

/// One row per iteration; obj is the master objective when the iteration
/// starts. The last row of a converged run has no candidates.
struct CgTrace {
  std::vector<TraceRow> rows;

  double obj0() const { return rows.empty() ? 0.0 : rows.front().obj; }
  int iterations() const { return static_cast<int>(rows.size()); }
  int columns_added() const;
};

void write_trace_csv(std::ostream& out, const CgTrace& trace);
/// Throws ParseError on a malformed header or row.
CgTrace read_trace_csv(std::istream& in);

struct CgResult {
  std::string instance;
  std::string policy;
  LpSolution solution;
  std::vector<Column> columns;
  CgTrace trace;
  std::vector<SelectionEpisode> episodes;
  bool converged = false;
  int initial_columns = 0;
  double ms = 0;

  double objective() const { return solution.objective; }
  int iterations() const { return trace.iterations(); }
  int columns_added() const { return trace.columns_added(); }
};

class IterationCapExceeded : public Error {
 public:
  IterationCapExceeded(const std::string& what, CgResult partial)
      : Error(what), partial_(std::move(partial)) {}
  const CgResult& partial() const { return partial_; }

 private:
  CgResult partial_;
};

/// Hooks for the trainer. `before_add` sees the master before C_t is added.
class IterationObserver {
 public:
  virtual ~IterationObserver() = default;
  virtual void before_add(const Rmp&, std::span<const Candidate>, const SelectionEpisode&, int) {}
  virtual void after_add(const Rmp&, int) {}
  virtual void converged(const Rmp&, int) {}
};

/// Runs column generation to convergence with `policy` choosing C_t.
CgResult run(const PricingProblem& problem, SelectionPolicy& policy, const CgConfig& config = {},
             IterationObserver* observer = nullptr);

/// LP optimum over an explicit column set, for oracles and tests.
LpSolution solve_master(const Eigen::VectorXd& rhs, std::span<const Column> columns);

}  // namespace ffcg
