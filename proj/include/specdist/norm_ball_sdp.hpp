#pragma once

// Linear maximization over a spectral-norm ball of a Hermitian pencil:
//
//     maximize    c . x
//     subject to  || sum_k x_k H_k || <= 1,        H_k Hermitian n x n.
//
// The constraint is the pair of LMIs I - H(x) >= 0 and I + H(x) >= 0, which
// is the standard "dual form" SDP  max c.x  s.t.  C - sum_k x_k A_k >= 0 with
// C = diag(I, I) and A_k = diag(H_k, -H_k). Its conic dual is
//
//     minimize  Tr U + Tr V   s.t.  Tr((U - V) H_k) = c_k,  U, V >= 0,
//
// so any Hermitian W with Tr(W H_k) = c_k certifies c.x <= ||W||_1 for every
// feasible x (Hoelder). The solver is an infeasible-primal / feasible-dual
// path-following method with the HKM search direction and Mehrotra
// predictor-corrector steps. x = 0 is strictly feasible, so dual iterates
// stay strictly inside the ball. At every iteration W = U - V is projected
// onto the affine set {Tr(W H_k) = c_k} by least squares and ||W||_1 gives
// the certified upper bound.
//
// The map x -> H(x) must be injective; callers remove its kernel first.

#include "specdist/operator_core.hpp"

#include <limits>
#include <utility>
#include <vector>

namespace specdist::sdp {

struct NormBallProblem {
  Index n = 0;
  std::vector<SparseMatrix> constraints;  // Hermitian H_k, column-major
  RealVector objective;                   // c
};

struct SolverOptions {
  double tolerance = 1e-7;   // absolute duality gap
  int max_iterations = 10000;
  double step_fraction = 0.95;
  int stall_limit = 25;      // iterations without gap improvement before giving up
};

struct SolverResult {
  RealVector x;              // strictly feasible point with the best objective
  double primal = 0.0;       // c . x
  double dual = std::numeric_limits<double>::infinity();  // certified upper bound
  ComplexMatrix certificate; // W with Tr(W H_k) = c_k (up to rounding), dual = ||W||_1
  double constraint_norm = 0.0;  // ||H(x)||
  int iterations = 0;
  bool converged = false;
  double gap() const { return dual - primal; }
};

namespace detail {

/// Rows touched by a sparse matrix, plus the matrix restricted to those rows
/// as a dense r x n block (used to form H_j Z^{-1} cheaply).
struct RowCompressed {
  std::vector<Index> rows;
  ComplexMatrix block;  // rows.size() x n
};

inline RowCompressed compress_rows(const SparseMatrix& h) {
  RowCompressed rc;
  const Index n = h.rows();
  std::vector<Index> slot(static_cast<std::size_t>(n), -1);
  for (Index col = 0; col < h.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(h, col); it; ++it)
      if (slot[static_cast<std::size_t>(it.row())] < 0) {
        slot[static_cast<std::size_t>(it.row())] = 0;
        rc.rows.push_back(it.row());
      }
  std::sort(rc.rows.begin(), rc.rows.end());
  for (std::size_t k = 0; k < rc.rows.size(); ++k) slot[static_cast<std::size_t>(rc.rows[k])] = static_cast<Index>(k);
  rc.block = ComplexMatrix::Zero(static_cast<Index>(rc.rows.size()), h.cols());
  for (Index col = 0; col < h.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(h, col); it; ++it)
      rc.block(slot[static_cast<std::size_t>(it.row())], col) = it.value();
  return rc;
}

/// Re Tr(H Y) for sparse Hermitian H.
inline double re_trace_product(const SparseMatrix& h, const ComplexMatrix& y) {
  double acc = 0.0;
  for (Index col = 0; col < h.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(h, col); it; ++it) {
      const Complex a = it.value(), b = y(it.col(), it.row());
      acc += a.real() * b.real() - a.imag() * b.imag();
    }
  return acc;
}

inline ComplexMatrix herm(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

/// Largest alpha with M + alpha dM >= 0 (infinity if unbounded). M must be
/// positive definite.
inline double max_step(const ComplexMatrix& m, const ComplexMatrix& dm) {
  Eigen::LLT<ComplexMatrix> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;
  const ComplexMatrix linv_dm = llt.matrixL().solve(dm);
  const ComplexMatrix s = llt.matrixL().solve(ComplexMatrix(linv_dm.adjoint()));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm(s), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  return lo < 0.0 ? -1.0 / lo : std::numeric_limits<double>::infinity();
}

inline double max_abs_eigenvalue(const ComplexMatrix& h) {
  if (h.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm(h), Eigen::EigenvaluesOnly);
  return std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(es.eigenvalues().size() - 1)));
}

}  // namespace detail

class NormBallSolver {
 public:
  explicit NormBallSolver(NormBallProblem problem) : p_(std::move(problem)) {
    const Index m = static_cast<Index>(p_.constraints.size());
    if (p_.objective.size() == 0) p_.objective = RealVector::Zero(m);
    if (p_.objective.size() != m) throw DimensionMismatch("NormBallSolver: objective size mismatch");
    for (const auto& h : p_.constraints)
      if (h.rows() != p_.n || h.cols() != p_.n) throw DimensionMismatch("NormBallSolver: constraint size mismatch");
    rows_.reserve(static_cast<std::size_t>(m));
    for (const auto& h : p_.constraints) rows_.push_back(detail::compress_rows(h));
    build_gram();
  }

  Index size() const { return static_cast<Index>(p_.constraints.size()); }

  /// H(x) = sum_k x_k H_k
  ComplexMatrix pencil(const RealVector& x) const {
    ComplexMatrix h = ComplexMatrix::Zero(p_.n, p_.n);
    for (Index k = 0; k < size(); ++k) {
      const double xk = x(k);
      if (xk == 0.0) continue;
      const auto& hk = p_.constraints[static_cast<std::size_t>(k)];
      for (Index col = 0; col < hk.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(hk, col); it; ++it) h(it.row(), it.col()) += xk * it.value();
    }
    return h;
  }

  /// Re Tr(H_k Y) for all k.
  RealVector apply_adjoint(const ComplexMatrix& y) const {
    RealVector out(size());
    for (Index k = 0; k < size(); ++k) out(k) = detail::re_trace_product(p_.constraints[static_cast<std::size_t>(k)], y);
    return out;
  }

  /// Certified bound from a trial multiplier W: project onto Tr(W H_k) = c_k
  /// and return (||W'||_1, W').
  std::pair<double, ComplexMatrix> certify(const ComplexMatrix& w) const { return certify(w, p_.objective); }

  std::pair<double, ComplexMatrix> certify(const ComplexMatrix& w, const RealVector& c) const {
    const RealVector residual = c - apply_adjoint(w);
    const RealVector mu = gram_llt_.solve(residual);
    ComplexMatrix corrected = detail::herm(w + pencil(mu));
    return {trace_norm(corrected), std::move(corrected)};
  }

  SolverResult solve(const SolverOptions& opt = {}) const { return solve(p_.objective, opt); }

  /// Same constraints, objective c. Const and reentrant.
  SolverResult solve(const RealVector& c, const SolverOptions& opt) const {
    if (c.size() != size()) throw DimensionMismatch("NormBallSolver: objective size mismatch");
    const Index n = p_.n, m = size();
    SolverResult best;
    best.x = RealVector::Zero(m);
    best.certificate = ComplexMatrix::Zero(n, n);
    if (m == 0 || c.norm() == 0.0) {
      best.dual = 0.0;
      best.converged = true;
      return best;
    }
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    RealVector y = RealVector::Zero(m);
    ComplexMatrix u = id, v = id;
    double last_gap = std::numeric_limits<double>::infinity();
    int stall = 0;

    for (int iter = 1; iter <= opt.max_iterations; ++iter) {
      best.iterations = iter;
      const ComplexMatrix hy = pencil(y);
      const ComplexMatrix z1 = id - hy, z2 = id + hy;
      Eigen::LLT<ComplexMatrix> l1(z1), l2(z2);
      if (l1.info() != Eigen::Success || l2.info() != Eigen::Success) break;
      const ComplexMatrix z1inv = detail::herm(l1.solve(id));
      const ComplexMatrix z2inv = detail::herm(l2.solve(id));
      const double mu = ((u * z1).trace().real() + (v * z2).trace().real()) / (2.0 * static_cast<double>(n));

      // Schur complement M_ij = Re Tr(H_i U H_j Z1^-1) + Re Tr(H_i V H_j Z2^-1).
      RealMatrix schur(m, m);
      for (Index j = 0; j < m; ++j) {
        const auto& rc = rows_[static_cast<std::size_t>(j)];
        const Index r = static_cast<Index>(rc.rows.size());
        ComplexMatrix ucols(n, r), vcols(n, r);
        for (Index k = 0; k < r; ++k) {
          ucols.col(k) = u.col(rc.rows[static_cast<std::size_t>(k)]);
          vcols.col(k) = v.col(rc.rows[static_cast<std::size_t>(k)]);
        }
        const ComplexMatrix kj = ucols * (rc.block * z1inv) + vcols * (rc.block * z2inv);
        for (Index i = j; i < m; ++i) {
          const double val = detail::re_trace_product(p_.constraints[static_cast<std::size_t>(i)], kj);
          schur(i, j) = val;
          schur(j, i) = val;
        }
      }
      Eigen::LLT<RealMatrix> schur_llt(schur);
      Eigen::LDLT<RealMatrix> schur_ldlt;
      const bool use_llt = schur_llt.info() == Eigen::Success;
      if (!use_llt) schur_ldlt.compute(schur);
      auto schur_solve = [&](const RealVector& rhs) -> RealVector {
        return use_llt ? RealVector(schur_llt.solve(rhs)) : RealVector(schur_ldlt.solve(rhs));
      };

      const RealVector a_zinv = apply_adjoint(z1inv) - apply_adjoint(z2inv);

      // Predictor.
      const RealVector dy_p = schur_solve(c);
      const ComplexMatrix hdy_p = pencil(dy_p);
      const ComplexMatrix dz1_p = -hdy_p, dz2_p = hdy_p;
      const ComplexMatrix du_p = -u - detail::herm(u * dz1_p * z1inv);
      const ComplexMatrix dv_p = -v - detail::herm(v * dz2_p * z2inv);
      const double ap = std::min(1.0, opt.step_fraction * std::min(detail::max_step(u, du_p), detail::max_step(v, dv_p)));
      const double ad = std::min(1.0, opt.step_fraction * std::min(detail::max_step(z1, dz1_p), detail::max_step(z2, dz2_p)));
      const double mu_aff = (((u + ap * du_p) * (z1 + ad * dz1_p)).trace().real() +
                             ((v + ap * dv_p) * (z2 + ad * dz2_p)).trace().real()) /
                            (2.0 * static_cast<double>(n));
      const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

      // Corrector.
      const ComplexMatrix c1 = detail::herm(du_p * dz1_p * z1inv);
      const ComplexMatrix c2 = detail::herm(dv_p * dz2_p * z2inv);
      const RealVector rhs = c - sigma * mu * a_zinv + apply_adjoint(c1) - apply_adjoint(c2);
      const RealVector dy = schur_solve(rhs);
      const ComplexMatrix hdy = pencil(dy);
      const ComplexMatrix dz1 = -hdy, dz2 = hdy;
      const ComplexMatrix du = -u + sigma * mu * z1inv - detail::herm(u * dz1 * z1inv) - c1;
      const ComplexMatrix dv = -v + sigma * mu * z2inv - detail::herm(v * dz2 * z2inv) - c2;
      const double sp = std::min(1.0, opt.step_fraction * std::min(detail::max_step(u, du), detail::max_step(v, dv)));
      const double sd = std::min(1.0, opt.step_fraction * std::min(detail::max_step(z1, dz1), detail::max_step(z2, dz2)));
      if (!(sp > 0.0) && !(sd > 0.0)) break;
      u = detail::herm(u + sp * du);
      v = detail::herm(v + sp * dv);
      y += sd * dy;

      // Bounds: y is strictly feasible (rescaled if rounding pushed it out),
      // the projected multiplier gives the certified upper bound.
      const double norm_y = detail::max_abs_eigenvalue(pencil(y));
      const RealVector x_feas = norm_y > 1.0 ? RealVector(y / norm_y) : y;
      const double primal = c.dot(x_feas);
      if (primal > best.primal) {
        best.primal = primal;
        best.x = x_feas;
        best.constraint_norm = std::min(norm_y, 1.0);
      }
      auto [dual, cert] = certify(u - v, c);
      if (dual < best.dual) {
        best.dual = dual;
        best.certificate = std::move(cert);
      }
      const double gap = best.dual - best.primal;
      if (gap <= opt.tolerance) {
        best.converged = true;
        break;
      }
      if (gap < 0.999 * last_gap) {
        last_gap = gap;
        stall = 0;
      } else if (++stall >= opt.stall_limit) {
        break;
      }
    }
    return best;
  }

  const RealMatrix& gram() const { return gram_; }

 private:
  void build_gram() {
    const Index m = size(), nn = p_.n * p_.n;
    std::vector<Eigen::Triplet<Complex>> t;
    for (Index k = 0; k < m; ++k) {
      const auto& h = p_.constraints[static_cast<std::size_t>(k)];
      for (Index col = 0; col < h.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(h, col); it; ++it) t.emplace_back(col * p_.n + it.row(), k, it.value());
    }
    SparseMatrix s(nn, m);
    s.setFromTriplets(t.begin(), t.end());
    gram_ = ComplexMatrix(SparseMatrix(s.adjoint()) * s).real();
    gram_llt_.compute(gram_);
    if (m > 0 && (gram_llt_.info() != Eigen::Success || !(gram_llt_.rcond() > 1e-14)))
      throw InvalidInput("NormBallSolver: constraint pencil is not injective");
  }

  NormBallProblem p_;
  std::vector<detail::RowCompressed> rows_;
  RealMatrix gram_;
  Eigen::LLT<RealMatrix> gram_llt_;
};

}  // namespace specdist::sdp
