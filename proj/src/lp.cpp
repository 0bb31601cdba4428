#include "ffcg/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ffcg {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal:
      return "Optimal";
    case LpStatus::Infeasible:
      return "Infeasible";
    case LpStatus::Unbounded:
      return "Unbounded";
  }
  return "?";
}

namespace {

using Eigen::Index;

// Internal variable numbering: [0, n) structural, [n, n + m) artificial where
// artificial n + r is sign(b_r) * e_r.
template <typename Scalar>
class RevisedSimplex {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  RevisedSimplex(const LpProblemT<Scalar>& problem, const SimplexOptions& options)
      : a_(problem.constraint_matrix),
        b_(problem.rhs),
        c_(problem.costs),
        opt_(options),
        m_(problem.rows()),
        n_(problem.cols()),
        art_sign_(m_) {
    for (Index r = 0; r < m_; ++r) art_sign_(r) = b_(r) < 0 ? Scalar(-1) : Scalar(1);
  }

  LpSolutionT<Scalar> run(std::optional<std::span<const BasisIndex>> warm_start) {
    LpSolutionT<Scalar> out;
    if (m_ == 0) return solve_without_rows();

    bool warm = warm_start && try_warm_start(*warm_start);
    out.warm_started = warm;
    if (!warm) {
      basis_.resize(m_);
      for (Index r = 0; r < m_; ++r) basis_[r] = n_ + r;
      Vector phase1(n_ + m_);
      phase1.setZero();
      phase1.tail(m_).setOnes();
      iterate(phase1, /*bounded_artificials=*/false);
      factorize();
      Scalar infeasibility = 0;
      for (Index i = 0; i < m_; ++i)
        if (basis_[i] >= n_) infeasibility += std::max(xb_(i), Scalar(0));
      const Scalar scale = std::max(Scalar(1), b_.size() ? b_.cwiseAbs().maxCoeff() : Scalar(0));
      if (infeasibility > Scalar(opt_.feasibility_tol) * scale) {
        out.status = LpStatus::Infeasible;
        out.iterations = iterations_;
        return out;
      }
      drive_out_artificials();
    }

    Vector phase2(n_ + m_);
    phase2.head(n_) = c_;
    phase2.tail(m_).setZero();
    const bool bounded = iterate(phase2, /*bounded_artificials=*/true);
    out.iterations = iterations_;
    if (!bounded) {
      out.status = LpStatus::Unbounded;
      return out;
    }

    factorize();
    out.status = LpStatus::Optimal;
    out.primal = Vector::Zero(n_);
    for (Index i = 0; i < m_; ++i)
      if (basis_[i] < n_) out.primal(basis_[i]) = std::max(xb_(i), Scalar(0));
    out.duals = duals(phase2);
    out.objective = c_.dot(out.primal);
    out.basis.reserve(m_);
    for (Index v : basis_)
      out.basis.push_back(v < n_ ? static_cast<BasisIndex>(v) : artificial_entry(v - n_));
    return out;
  }

 private:
  LpSolutionT<Scalar> solve_without_rows() const {
    LpSolutionT<Scalar> out;
    out.primal = Vector::Zero(n_);
    out.duals = Vector::Zero(0);
    for (Index j = 0; j < n_; ++j) {
      if (c_(j) < -Scalar(opt_.optimality_tol)) {
        out.status = LpStatus::Unbounded;
        return out;
      }
    }
    out.status = LpStatus::Optimal;
    return out;
  }

  auto column(Index v) const {
    Vector col(m_);
    if (v < n_) {
      col = a_.col(v);
    } else {
      col.setZero();
      col(v - n_) = art_sign_(v - n_);
    }
    return col;
  }

  void factorize() {
    Matrix basis_matrix(m_, m_);
    for (Index i = 0; i < m_; ++i) basis_matrix.col(i) = column(basis_[i]);
    lu_.compute(basis_matrix);
    xb_ = lu_.solve(b_);
    if (!xb_.allFinite()) throw NumericalBreakdown("basis became singular");
  }

  Vector duals(const Vector& costs) const {
    Vector cb(m_);
    for (Index i = 0; i < m_; ++i) cb(i) = costs(basis_[i]);
    return lu_.transpose().solve(cb);
  }

  bool try_warm_start(std::span<const BasisIndex> entries) {
    if (static_cast<Index>(entries.size()) != m_)
      throw DimensionMismatch("warm start basis has " + std::to_string(entries.size()) +
                              " entries, expected " + std::to_string(m_));
    std::vector<Index> basis;
    basis.reserve(m_);
    for (BasisIndex e : entries) {
      Index v;
      if (is_artificial(e)) {
        if (artificial_row(e) >= m_) return false;
        v = n_ + artificial_row(e);
      } else {
        if (e >= n_) return false;
        v = static_cast<Index>(e);
      }
      if (std::find(basis.begin(), basis.end(), v) != basis.end()) return false;
      basis.push_back(v);
    }
    basis_ = std::move(basis);

    Matrix basis_matrix(m_, m_);
    for (Index i = 0; i < m_; ++i) basis_matrix.col(i) = column(basis_[i]);
    Eigen::FullPivLU<Matrix> check(basis_matrix);
    check.setThreshold(Scalar(opt_.breakdown_tol));
    if (!check.isInvertible()) return false;

    factorize();
    const Scalar tol = Scalar(opt_.feasibility_tol);
    for (Index i = 0; i < m_; ++i) {
      if (xb_(i) < -tol) return false;
      if (basis_[i] >= n_ && std::abs(xb_(i)) > tol) return false;
    }
    return true;
  }

  // Pivots basic artificials out wherever a structural column has a nonzero
  // entry in the corresponding row of B^-1 A. Remaining ones mark redundant rows.
  void drive_out_artificials() {
    for (Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      factorize();
      Vector row_selector = Vector::Zero(m_);
      row_selector(i) = 1;
      const Vector row = lu_.transpose().solve(row_selector);  // e_i' B^-1
      Index best = -1;
      Scalar best_mag = Scalar(opt_.pivot_tol);
      for (Index j = 0; j < n_; ++j) {
        if (in_basis(j)) continue;
        const Scalar mag = std::abs(row.dot(a_.col(j)));
        if (mag > best_mag) {
          best_mag = mag;
          best = j;
        }
      }
      if (best >= 0) {
        basis_[i] = best;
        ++iterations_;
      }
    }
  }

  bool in_basis(Index v) const {
    return std::find(basis_.begin(), basis_.end(), v) != basis_.end();
  }

  // Returns false when the LP is unbounded along some edge.
  bool iterate(const Vector& costs, bool bounded_artificials) {
    const Index limit_degenerate = static_cast<Index>(opt_.bland_switch_factor) * (m_ + n_);
    const int max_iterations = static_cast<int>(50 * (m_ + n_) + 1000);
    const Scalar opt_tol = Scalar(opt_.optimality_tol);
    const Scalar piv_tol = Scalar(opt_.pivot_tol);
    bool bland = false;
    Index degenerate = 0;
    int local_iterations = 0;
    std::vector<char> basic(n_ + m_, 0);

    while (true) {
      factorize();
      const Vector pi = duals(costs);
      std::fill(basic.begin(), basic.end(), 0);
      for (Index v : basis_) basic[v] = 1;

      Index entering = -1;
      Scalar best_d = -opt_tol;
      for (Index j = 0; j < n_; ++j) {
        if (basic[j]) continue;
        const Scalar d = costs(j) - pi.dot(a_.col(j));
        if (d < best_d) {
          best_d = d;
          entering = j;
          if (bland) break;
        }
      }
      if (entering < 0) return true;

      const Vector u = lu_.solve(a_.col(entering));
      Vector ratios = Vector::Constant(m_, std::numeric_limits<Scalar>::infinity());
      Scalar best_ratio = std::numeric_limits<Scalar>::infinity();
      for (Index i = 0; i < m_; ++i) {
        if (bounded_artificials && basis_[i] >= n_) {
          if (std::abs(u(i)) > piv_tol) ratios(i) = 0;
        } else if (u(i) > piv_tol) {
          ratios(i) = std::max(xb_(i), Scalar(0)) / u(i);
        }
        best_ratio = std::min(best_ratio, ratios(i));
      }
      // Ties broken by lowest variable index.
      Index leave = -1;
      const Scalar tie = Scalar(1e-12) * (Scalar(1) + best_ratio);
      for (Index i = 0; i < m_ && best_ratio < std::numeric_limits<Scalar>::infinity(); ++i) {
        if (ratios(i) <= best_ratio + tie && (leave < 0 || basis_[i] < basis_[leave])) leave = i;
      }
      if (leave < 0) return false;
      if (std::abs(u(leave)) < Scalar(opt_.breakdown_tol)) {
        if (bland) throw NumericalBreakdown("pivot magnitude below tolerance");
        bland = true;
        continue;
      }

      if (best_ratio <= Scalar(1e-12)) {
        if (++degenerate > limit_degenerate) bland = true;
      }
      basis_[leave] = entering;
      ++iterations_;
      if (++local_iterations > max_iterations) {
        if (bland) throw NumericalBreakdown("simplex iteration limit exceeded");
        bland = true;
        local_iterations = 0;
      }
    }
  }

  const typename LpProblemT<Scalar>::Matrix& a_;
  const Vector& b_;
  const Vector& c_;
  SimplexOptions opt_;
  Index m_;
  Index n_;
  Vector art_sign_;
  std::vector<Index> basis_;
  Eigen::PartialPivLU<Matrix> lu_;
  Vector xb_;
  int iterations_ = 0;
};

}  // namespace

template <typename Scalar>
LpSolutionT<Scalar> solve(const LpProblemT<Scalar>& problem,
                          std::optional<std::span<const BasisIndex>> warm_start,
                          const SimplexOptions& options) {
  problem.validate();
  RevisedSimplex<Scalar> simplex(problem, options);
  return simplex.run(warm_start);
}

template LpSolutionT<double> solve<double>(const LpProblemT<double>&,
                                           std::optional<std::span<const BasisIndex>>,
                                           const SimplexOptions&);
template LpSolutionT<long double> solve<long double>(
    const LpProblemT<long double>&, std::optional<std::span<const BasisIndex>>,
    const SimplexOptions&);

}  // namespace ffcg
