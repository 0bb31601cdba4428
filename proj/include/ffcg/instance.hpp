#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace ffcg {

/// Cutting stock instance: rolls of length `roll_length`, item type j has
/// weight `weights[j]` and must be produced `demands[j]` times.
struct CspInstance {
  std::string name;
  int roll_length = 0;
  std::vector<int> weights;
  std::vector<int> demands;

  int item_types() const { return static_cast<int>(weights.size()); }
  /// Throws InvalidRange when any invariant is violated.
  void validate() const;

  friend bool operator==(const CspInstance&, const CspInstance&) = default;
};

/// One row of a Solomon customer table. Row 0 is the depot.
struct VrptwSite {
  int id = 0;
  double x = 0;
  double y = 0;
  double demand = 0;
  double ready = 0;
  double due = 0;
  double service = 0;

  friend bool operator==(const VrptwSite&, const VrptwSite&) = default;
};

/// Vehicle routing instance with time windows. Vertices are numbered
/// 0 (start depot), 1..n (customers) and n + 1 (return depot, a copy of 0).
class VrptwInstance {
 public:
  VrptwInstance() = default;
  VrptwInstance(std::string name, int vehicles, double capacity, std::vector<VrptwSite> sites);

  const std::string& name() const { return name_; }
  int vehicles() const { return vehicles_; }
  double capacity() const { return capacity_; }
  const std::vector<VrptwSite>& sites() const { return sites_; }

  int n_customers() const { return static_cast<int>(sites_.size()) - 1; }
  int vertex_count() const { return n_customers() + 2; }
  int sink() const { return n_customers() + 1; }

  const VrptwSite& site(int vertex) const { return sites_[vertex == sink() ? 0 : vertex]; }
  double demand(int v) const { return site(v).demand; }
  double ready(int v) const { return site(v).ready; }
  double due(int v) const { return site(v).due; }
  double service(int v) const { return site(v).service; }

  /// Euclidean distance truncated to one decimal; also the travel time.
  double cost(int i, int j) const { return travel_(i, j); }
  const Eigen::MatrixXd& cost_matrix() const { return travel_; }

  /// Throws InvalidRange when any invariant is violated.
  void validate() const;

  friend bool operator==(const VrptwInstance& a, const VrptwInstance& b) {
    return a.name_ == b.name_ && a.vehicles_ == b.vehicles_ && a.capacity_ == b.capacity_ &&
           a.sites_ == b.sites_;
  }

 private:
  std::string name_;
  int vehicles_ = 0;
  double capacity_ = 0;
  std::vector<VrptwSite> sites_;
  Eigen::MatrixXd travel_;
};

double truncated_distance(const VrptwSite& a, const VrptwSite& b);

// ---- generation -----------------------------------------------------------

struct IntRange {
  int lo = 0;
  int hi = 0;
};

/// Uniform CSP generator. Default weight range is [ceil(0.1 n), ceil(0.8 n)]
/// and demands are uniform in [1, 50].
CspInstance generate_csp(std::uint64_t seed, int roll_length, int item_types);
CspInstance generate_csp(std::uint64_t seed, int roll_length, int item_types,
                         IntRange weight_range, IntRange demand_range);

struct VrptwGeneratorOptions {
  double capacity = 200;
  double horizon = 230;
  double service = 10;
  IntRange demand{1, 30};
  IntRange window_width{20, 120};
  int vehicles = 25;
};

/// Solomon R1-style random instance: uniform coordinates in [0, 100]^2, depot
/// at the centre, every customer individually reachable within its window.
VrptwInstance generate_vrptw(std::uint64_t seed, int n_customers,
                             const VrptwGeneratorOptions& options = {});

/// Keeps the depot and the first `n` customers.
VrptwInstance truncate_solomon(const VrptwInstance& instance, int n);
/// Samples n uniformly from [min_n, min(max_n, n_customers)] and truncates.
VrptwInstance truncate_solomon_random(const VrptwInstance& instance, std::uint64_t seed,
                                      int min_n = 5, int max_n = 16);

// ---- text formats -----------------------------------------------------------

CspInstance parse_bpplib(std::string_view text, std::string name = "bpplib");
std::string serialize_bpplib(const CspInstance& instance);

VrptwInstance parse_solomon(std::string_view text);
std::string serialize_solomon(const VrptwInstance& instance);

std::string to_json(const CspInstance& instance);
std::string to_json(const VrptwInstance& instance);
CspInstance csp_from_json(std::string_view text);
VrptwInstance vrptw_from_json(std::string_view text);

enum class ProblemKind { Csp, Vrptw };
using AnyInstance = std::variant<CspInstance, VrptwInstance>;

/// Reads `.json` (native), or legacy text in the format implied by `kind`.
AnyInstance load_instance(const std::filesystem::path& path, ProblemKind kind);
void save_instance(const std::filesystem::path& path, const AnyInstance& instance);

// ---- dataset division ---------------------------------------------------------

inline int difficulty_key(const CspInstance& i) { return i.roll_length; }
inline int difficulty_key(const VrptwInstance& i) { return i.n_customers(); }

template <typename Instance>
struct DatasetSplit {
  std::vector<Instance> train;
  std::vector<Instance> validation;
  std::vector<Instance> test;

  /// Throws InvalidArgument if an instance (by name or content) appears in
  /// more than one split.
  void check_disjoint() const;
};

struct CspDivisionRow {
  int roll_length = 0;
  int train = 0;
  int validation = 0;
  int test = 0;
};

/// Instance counts per roll length for the reference CSP division.
std::vector<CspDivisionRow> csp_reference_division();

/// Generates a CSP split with one fresh seed per instance. Item-type counts
/// are drawn from `item_types`.
DatasetSplit<CspInstance> make_csp_split(std::uint64_t seed,
                                         const std::vector<CspDivisionRow>& rows,
                                         IntRange item_types);

/// Builds VRPTW train/test sets by random truncation of base instances
/// (n sampled in [5, 16] unless overridden).
DatasetSplit<VrptwInstance> make_vrptw_split(std::uint64_t seed,
                                             const std::vector<VrptwInstance>& train_bases,
                                             const std::vector<VrptwInstance>& test_bases,
                                             int train_per_base, int test_per_base,
                                             IntRange customers = {5, 16});

extern template struct DatasetSplit<CspInstance>;
extern template struct DatasetSplit<VrptwInstance>;

}  // namespace ffcg
