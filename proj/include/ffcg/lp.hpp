#pragma once

// Dense revised simplex for equality-form linear programs
//
//   min c'x  s.t.  A x = b,  x >= 0
//
// used as the restricted master problem solver. Problems are small (tens of
// rows, hundreds of columns), so the basis is refactorized from scratch at
// every pivot instead of maintaining product-form updates.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ffcg/errors.hpp"

namespace ffcg {

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

template <typename Scalar>
struct LpProblemT {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector costs;
  Matrix constraint_matrix;  // m x n, one column per variable
  Vector rhs;

  Eigen::Index rows() const { return constraint_matrix.rows(); }
  Eigen::Index cols() const { return constraint_matrix.cols(); }

  void validate() const {
    if (constraint_matrix.cols() != costs.size())
      throw DimensionMismatch("constraint matrix has " +
                              std::to_string(constraint_matrix.cols()) +
                              " columns but " + std::to_string(costs.size()) +
                              " costs");
    if (constraint_matrix.rows() != rhs.size())
      throw DimensionMismatch("constraint matrix has " +
                              std::to_string(constraint_matrix.rows()) +
                              " rows but rhs has length " +
                              std::to_string(rhs.size()));
  }
};

// Basis entries are structural column indices (>= 0). An artificial variable
// that could not be driven out of the basis (redundant row r) is encoded as
// -(r + 1), so a basis stays meaningful after columns are appended.
using BasisIndex = std::int64_t;

inline constexpr BasisIndex artificial_entry(Eigen::Index row) {
  return -static_cast<BasisIndex>(row) - 1;
}
inline constexpr bool is_artificial(BasisIndex entry) { return entry < 0; }
inline constexpr Eigen::Index artificial_row(BasisIndex entry) {
  return static_cast<Eigen::Index>(-(entry + 1));
}

template <typename Scalar>
struct LpSolutionT {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  LpStatus status = LpStatus::Infeasible;
  Scalar objective = 0;
  Vector primal;
  Vector duals;
  std::vector<BasisIndex> basis;
  int iterations = 0;
  bool warm_started = false;

  bool optimal() const { return status == LpStatus::Optimal; }
};

struct SimplexOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-7;
  double pivot_tol = 1e-9;
  // Pivots with |u_r| below this after Bland fallback abort the solve.
  double breakdown_tol = 1e-10;
  // Degenerate pivots tolerated (times m + n) before switching to Bland.
  int bland_switch_factor = 3;
};

template <typename Scalar>
LpSolutionT<Scalar> solve(const LpProblemT<Scalar>& problem,
                          std::optional<std::span<const BasisIndex>> warm_start = std::nullopt,
                          const SimplexOptions& options = {});

// c - pi' a
template <typename Scalar, typename Derived>
Scalar reduced_cost(const LpSolutionT<Scalar>& solution, Scalar cost,
                    const Eigen::MatrixBase<Derived>& coeffs) {
  if (coeffs.size() != solution.duals.size())
    throw DimensionMismatch("coefficient vector has length " +
                            std::to_string(coeffs.size()) + ", duals have " +
                            std::to_string(solution.duals.size()));
  return cost - solution.duals.dot(coeffs);
}

using LpProblem = LpProblemT<double>;
using LpSolution = LpSolutionT<double>;

extern template LpSolutionT<double> solve<double>(
    const LpProblemT<double>&, std::optional<std::span<const BasisIndex>>,
    const SimplexOptions&);
extern template LpSolutionT<long double> solve<long double>(
    const LpProblemT<long double>&, std::optional<std::span<const BasisIndex>>,
    const SimplexOptions&);

}  // namespace ffcg
