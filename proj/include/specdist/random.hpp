#pragma once

// Seeded generators for randomized checks: Hermitian and unitary matrices,
// unit vectors, probability vectors, projections and trigonometric
// polynomials. All draws come from one std::mt19937_64 so a seed fixes a run.

#include "specdist/operator_core.hpp"

#include <random>

namespace specdist::gen {

using Rng = std::mt19937_64;

inline double normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline ComplexMatrix complex_matrix(Rng& rng, Index rows, Index cols) {
  ComplexMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(normal(rng), normal(rng));
  return m;
}

inline HermitianOperator hermitian(Rng& rng, Index n) {
  const ComplexMatrix m = complex_matrix(rng, n, n);
  return HermitianOperator(0.5 * (m + m.adjoint()));
}

inline RealVector real_vector(Rng& rng, Index n) {
  RealVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

inline ComplexVector unit_vector(Rng& rng, Index n) {
  ComplexVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(normal(rng), normal(rng));
  return v / v.norm();
}

/// Haar-distributed unitary via QR with the phase correction on R's diagonal.
inline ComplexMatrix unitary(Rng& rng, Index n) {
  const Eigen::HouseholderQR<ComplexMatrix> qr(complex_matrix(rng, n, n));
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < n; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

/// Probability vector with roughly half of the entries zero.
inline RealVector probability(Rng& rng, Index n, double zero_fraction = 0.3) {
  RealVector p(n);
  for (Index i = 0; i < n; ++i) p(i) = uniform(rng) < zero_fraction ? 0.0 : -std::log(uniform(rng, 1e-12, 1.0));
  if (p.sum() == 0.0) p(uniform_int(rng, 0, static_cast<int>(n) - 1)) = 1.0;
  return p / p.sum();
}

/// Density matrix of rank <= n drawn from the induced measure.
inline ComplexMatrix density(Rng& rng, Index n, Index rank) {
  const ComplexMatrix g = complex_matrix(rng, n, rank);
  const ComplexMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

/// Diagonal 0/1 projection with the given rank, random support.
inline ComplexMatrix coordinate_projection(Rng& rng, Index n, Index rank) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  ComplexMatrix p = ComplexMatrix::Zero(n, n);
  for (Index k = 0; k < rank; ++k) p(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(k)]) = 1.0;
  return p;
}

/// Fourier coefficients f_k, |k| <= degree, of a real trigonometric polynomial
/// (f_{-k} = conj f_k), returned as a map index k + degree -> f_k.
inline ComplexVector real_trig_polynomial(Rng& rng, int degree) {
  ComplexVector f(2 * degree + 1);
  f(degree) = normal(rng);
  for (int k = 1; k <= degree; ++k) {
    const Complex c(normal(rng), normal(rng));
    f(degree + k) = c;
    f(degree - k) = std::conj(c);
  }
  return f;
}

}  // namespace specdist::gen
