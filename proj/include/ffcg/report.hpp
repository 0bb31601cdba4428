#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ffcg/cg_engine.hpp"
#include "ffcg/trainer.hpp"

namespace ffcg {

/// instance,policy,iters,cols_added,ms,objective,converged
void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows);
/// Throws ParseError with the offending line.
std::vector<BenchRow> read_bench_csv(std::istream& in);

/// Per-policy summary as a fixed-width text table.
std::string format_bench_table(std::span<const PolicyStats> stats);

/// Maps a trajectory to [0, 1] by its own min and max. A constant trajectory
/// maps to all zeros.
std::vector<double> minmax_normalize(std::span<const double> values);

struct Curve {
  std::vector<double> mean;
  std::vector<double> sd;  // population
};

/// Pointwise mean and deviation; shorter series are padded with their last
/// value up to the longest length. Empty series are ignored.
Curve average_padded(std::span<const std::vector<double>> series);

/// Objective trajectories of several runs, each min-max normalized, averaged.
Curve convergence_curve(std::span<const CgTrace> traces);

/// Mean |C_t| at each iteration index over the iterations that added columns;
/// `counts[t]` is how many traces reached index t.
struct ColumnHistogram {
  std::vector<double> mean_selected;
  std::vector<int> counts;
};

ColumnHistogram column_histogram(std::span<const CgTrace> traces);

/// Mean |C_t| over the first and last quarter of each run's selecting
/// iterations, pooled across runs. A quarter holds ceil(K / 4) iterations.
struct QuartileSelection {
  double first = 0;
  double last = 0;
  int runs = 0;
};

QuartileSelection selection_quartiles(std::span<const CgTrace> traces);

struct NamedCurve {
  std::string name;
  Curve curve;
};

/// Line chart with one mean line and a +-1 sd band per series.
std::string svg_convergence_chart(std::span<const NamedCurve> series, const std::string& title);

struct NamedHistogram {
  std::string name;
  ColumnHistogram histogram;
};

/// Grouped bars of mean |C_t| per iteration index.
std::string svg_histogram_chart(std::span<const NamedHistogram> series, const std::string& title);

}  // namespace ffcg
