#pragma once

// Dense complex linear algebra used by every other module: a Hermitian
// operator type, the spectral norm, commutators, compressions by orthogonal
// projections and the embedding a -> a (x) I_s on the spinor factor.
//
// Layout convention for spinor doubling: the spin index is the OUTER index,
// i.e. H (x) C^s is stored as s consecutive copies of H and
// spin_double(a, s) = diag(a, ..., a) = kron(I_s, a). Dirac operators written
// as s x s block matrices of operators on H use the same layout.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace specdist {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotAProjection : public Error {
 public:
  using Error::Error;
};

inline bool all_finite(const ComplexMatrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline void warn(const std::string& what) { std::clog << "specdist: warning: " << what << '\n'; }

/// Dense self-adjoint operator. Construction symmetrizes the input as
/// (M + M^dagger) / 2 and records how large that correction was.
class HermitianOperator {
 public:
  HermitianOperator() = default;

  explicit HermitianOperator(const ComplexMatrix& m) {
    if (m.rows() != m.cols())
      throw DimensionMismatch("HermitianOperator: matrix is " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()));
    if (!all_finite(m)) throw InvalidInput("HermitianOperator: non-finite entries");
    m_ = 0.5 * (m + m.adjoint());
    correction_ = max_abs(m_ - m);
    if (correction_ > 1e-10 * std::max(1.0, max_abs(m)))
      warn("symmetrization changed entries by " + std::to_string(correction_));
  }

  static HermitianOperator identity(Index n) {
    return HermitianOperator(ComplexMatrix::Identity(n, n));
  }
  static HermitianOperator zero(Index n) { return HermitianOperator(ComplexMatrix::Zero(n, n)); }
  static HermitianOperator diagonal(const RealVector& d) {
    return HermitianOperator(d.cast<Complex>().asDiagonal().toDenseMatrix());
  }

  Index dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  double hermiticity_correction() const { return correction_; }

  /// Real eigenvalues in ascending order.
  RealVector eigenvalues() const {
    if (dim() == 0) return {};
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  double trace() const { return m_.trace().real(); }

  friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
    return HermitianOperator(a.m_ + b.m_);
  }
  friend HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
    return HermitianOperator(a.m_ - b.m_);
  }
  friend HermitianOperator operator*(double s, const HermitianOperator& a) {
    return HermitianOperator(s * a.m_);
  }

 private:
  ComplexMatrix m_;
  double correction_ = 0.0;
};

inline bool is_hermitian(const ComplexMatrix& m, double rel_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) <= rel_tol * std::max(1.0, max_abs(m));
}

/// Largest singular value. Computed as the top eigenvalue of the Hermitian
/// dilation [[0, A], [A^dagger, 0]], whose spectrum is {+-sigma_i} plus zeros.
inline double spectral_norm(const ComplexMatrix& a) {
  if (!all_finite(a)) throw InvalidInput("spectral_norm: non-finite entries");
  if (a.size() == 0) return 0.0;
  const Index r = a.rows(), c = a.cols();
  ComplexMatrix dilation = ComplexMatrix::Zero(r + c, r + c);
  dilation.topRightCorner(r, c) = a;
  dilation.bottomLeftCorner(c, r) = a.adjoint();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(dilation, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues()(r + c - 1));
}

/// Same quantity through the Gram matrix A^dagger A. Less accurate for small
/// singular values; kept as the second route for cross-checks.
inline double spectral_norm_gram(const ComplexMatrix& a) {
  if (!all_finite(a)) throw InvalidInput("spectral_norm_gram: non-finite entries");
  if (a.size() == 0) return 0.0;
  ComplexMatrix g = a.adjoint() * a;
  g = 0.5 * (g + g.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// Trace norm (sum of singular values) of a Hermitian matrix.
inline double trace_norm(const ComplexMatrix& h) {
  if (h.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

inline ComplexMatrix commutator(const ComplexMatrix& d, const ComplexMatrix& a) {
  if (d.rows() != a.rows() || d.cols() != a.cols() || d.rows() != d.cols())
    throw DimensionMismatch("commutator: " + std::to_string(d.rows()) + " vs " +
                            std::to_string(a.rows()));
  return d * a - a * d;
}

inline ComplexMatrix commutator(const HermitianOperator& d, const HermitianOperator& a) {
  return commutator(d.matrix(), a.matrix());
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// a (x) I_s in the spin-outer layout: s diagonal copies of a.
inline ComplexMatrix spin_double(const ComplexMatrix& a, int s) {
  if (s < 1) throw InvalidInput("spin_double: spin multiplicity must be >= 1");
  if (s == 1) return a;
  const Index n = a.rows();
  ComplexMatrix out = ComplexMatrix::Zero(n * s, n * s);
  for (int k = 0; k < s; ++k) out.block(k * n, k * n, n, n) = a;
  return out;
}

inline HermitianOperator spin_double(const HermitianOperator& a, int s) {
  return HermitianOperator(spin_double(a.matrix(), s));
}

inline SparseMatrix spin_double(const SparseMatrix& a, int s) {
  if (s < 1) throw InvalidInput("spin_double: spin multiplicity must be >= 1");
  if (s == 1) return a;
  const Index n = a.rows();
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros()) * s);
  for (int k = 0; k < s; ++k)
    for (Index col = 0; col < a.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(a, col); it; ++it)
        t.emplace_back(k * n + it.row(), k * n + it.col(), it.value());
  SparseMatrix out(n * s, n * s);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

inline bool is_projection(const ComplexMatrix& p, double tol = 1e-10) {
  if (p.rows() != p.cols()) return false;
  const double scale = std::max(1.0, max_abs(p));
  return max_abs(p - p.adjoint()) <= tol * scale && max_abs(p * p - p) <= tol * scale;
}

/// Orthonormal basis (as columns) of the range of an orthogonal projection.
/// Diagonal 0/1 projections return coordinate vectors in ambient order.
inline ComplexMatrix range_basis(const HermitianOperator& p) {
  if (!is_projection(p.matrix())) throw NotAProjection("range_basis: P is not a projection");
  const Index n = p.dim();
  const ComplexMatrix& pm = p.matrix();
  if (max_abs(pm - ComplexMatrix(pm.diagonal().asDiagonal())) <= 1e-10) {
    std::vector<Index> rows;
    for (Index i = 0; i < n; ++i)
      if (pm(i, i).real() > 0.5) rows.push_back(i);
    ComplexMatrix e = ComplexMatrix::Zero(n, static_cast<Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) e(rows[k], static_cast<Index>(k)) = 1.0;
    return e;
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(pm);
  std::vector<Index> keep;
  for (Index i = 0; i < n; ++i)
    if (es.eigenvalues()(i) > 0.5) keep.push_back(i);
  ComplexMatrix v(n, static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k)
    v.col(static_cast<Index>(k)) = es.eigenvectors().col(keep[k]);
  return v;
}

/// P A P. With `reduce`, the result is expressed on an orthonormal basis of
/// range(P) and has dimension rank(P).
inline HermitianOperator compress(const HermitianOperator& p, const HermitianOperator& a,
                                  bool reduce = false) {
  if (p.dim() != a.dim())
    throw DimensionMismatch("compress: P is " + std::to_string(p.dim()) + ", A is " +
                            std::to_string(a.dim()));
  if (!is_projection(p.matrix())) throw NotAProjection("compress: P is not an orthogonal projection");
  if (!reduce) return HermitianOperator(p.matrix() * a.matrix() * p.matrix());
  const ComplexMatrix v = range_basis(p);
  return HermitianOperator(v.adjoint() * a.matrix() * v);
}

inline ComplexMatrix to_dense(const SparseMatrix& s) { return ComplexMatrix(s); }

inline SparseMatrix to_sparse(const ComplexMatrix& m, double drop = 0.0) {
  std::vector<Eigen::Triplet<Complex>> t;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (std::abs(m(i, j)) > drop) t.emplace_back(i, j, m(i, j));
  SparseMatrix s(m.rows(), m.cols());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

}  // namespace specdist
