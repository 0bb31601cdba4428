#include "ffcg/pricing_csp.hpp"

#include <algorithm>
#include <numeric>

#include "ffcg/errors.hpp"

namespace ffcg {

Pattern make_pattern(const CspInstance& instance, std::vector<int> counts) {
  Pattern p;
  p.used_length = 0;
  for (std::size_t j = 0; j < counts.size(); ++j) p.used_length += counts[j] * instance.weights[j];
  p.waste = instance.roll_length - p.used_length;
  p.counts = std::move(counts);
  return p;
}

namespace {

struct Entry {
  double value = 0;
  std::vector<int> counts;
};

// value descending, then lexicographically smallest counts
bool better(const Entry& a, const Entry& b) {
  if (a.value != b.value) return a.value > b.value;
  return std::lexicographical_compare(a.counts.begin(), a.counts.end(), b.counts.begin(),
                                      b.counts.end());
}

// Both inputs sorted by `better`; the shifted list is `from` with one more
// unit of `item` in every pattern.
std::vector<Entry> merge_top_k(const std::vector<Entry>& keep, const std::vector<Entry>& from,
                               int item, double item_value, std::size_t k) {
  std::vector<Entry> out;
  out.reserve(k);
  std::size_t i = 0, j = 0;
  Entry shifted;
  auto load_shifted = [&] {
    if (j < from.size()) {
      shifted.value = from[j].value + item_value;
      shifted.counts = from[j].counts;
      ++shifted.counts[item];
    }
  };
  load_shifted();
  while (out.size() < k && (i < keep.size() || j < from.size())) {
    if (j >= from.size() || (i < keep.size() && better(keep[i], shifted))) {
      out.push_back(keep[i++]);
    } else {
      out.push_back(shifted);
      ++j;
      load_shifted();
    }
  }
  return out;
}

}  // namespace

std::vector<PricedPattern> price_csp(const CspInstance& instance, const Eigen::VectorXd& duals,
                                     int k, double gap) {
  const int m = instance.item_types();
  if (duals.size() != m)
    throw DimensionMismatch("expected " + std::to_string(m) + " duals, got " +
                            std::to_string(duals.size()));
  if (k < 1) throw InvalidArgument("candidate count k must be at least 1");
  if (gap < 0) throw InvalidArgument("gap must be non-negative");

  const int n = instance.roll_length;
  // best[c]: top-k distinct patterns of total weight <= c over items seen so far.
  std::vector<std::vector<Entry>> best(n + 1, std::vector<Entry>{Entry{0.0, std::vector<int>(m, 0)}});
  const auto kk = static_cast<std::size_t>(k);
  for (int j = 0; j < m; ++j) {
    const int w = instance.weights[j];
    for (int c = w; c <= n; ++c) best[c] = merge_top_k(best[c], best[c - w], j, duals(j), kk);
  }

  std::vector<PricedPattern> out;
  for (auto& e : best[n]) {
    const double rc = 1.0 - e.value;
    if (rc >= -kImprovingTolerance) continue;
    out.push_back({make_pattern(instance, std::move(e.counts)), rc});
  }
  if (out.empty()) return out;
  const double threshold = out.front().reduced_cost * (1.0 - gap);
  std::erase_if(out, [&](const PricedPattern& p) { return p.reduced_cost > threshold; });
  return out;
}

Column pattern_column(const Pattern& pattern, int item_types) {
  Column col;
  col.cost = 1.0;
  col.coeffs = Eigen::VectorXd::Zero(item_types);
  for (int j = 0; j < item_types && j < static_cast<int>(pattern.counts.size()); ++j)
    col.coeffs(j) = pattern.counts[j];
  col.problem_feature = pattern.waste;
  return col;
}

}  // namespace ffcg
