#pragma once

// Finite spectral triples: a truncated Hilbert space H (dimension
// hilbert_dim), a Dirac operator on H (x) C^spin_dim, and a real basis of the
// self-adjoint part of the truncated algebra whose first element is the
// identity (the order unit).
//
// Basis ordering conventions:
//   lattice       sites ascending inside the window; spin index outer (+ then -)
//   circle        Fourier modes -N..N ascending
//   moyal         Fock levels 0..n_max ascending; spin index outer
//   fuzzy sphere  magnetic number m = -l..l ascending; spin index outer
//   flip          points 0..m-1 of the first summand, then of the second

#include "specdist/operator_core.hpp"

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace specdist {

struct LatticeParams {
  std::int64_t window_min = 0;
  std::int64_t window_max = 0;
  bool derivative_variant = false;  // D'|n> = |n+1> - |n-1>, no spinor
  std::int64_t length() const { return window_max - window_min + 1; }
};

struct CircleParams {
  int cutoff = 1;                    // N: modes -N..N
  bool full_matrix_algebra = false;  // all Hermitian matrices instead of Toeplitz
};

struct MoyalParams {
  double theta = 1.0;
  int n_max = 1;
};

struct FuzzySphereParams {
  int two_ell = 1;
  double ell() const { return 0.5 * two_ell; }
};

struct FlipParams {
  int points = 2;
  double lambda = 1.0;
  int base = 0;
};

/// Commutative grid C^m with a user-supplied Dirac operator.
struct GridParams {
  int points = 2;
  std::string label;
};

/// Direct sum of two triples (used for decoupled-block checks).
struct BlockSumParams {
  std::string first;
  std::string second;
};

using GeometryParams = std::variant<LatticeParams, CircleParams, MoyalParams, FuzzySphereParams,
                                    FlipParams, GridParams, BlockSumParams>;

inline std::string geometry_kind(const GeometryParams& p) {
  struct {
    std::string operator()(const LatticeParams& l) const {
      return l.derivative_variant ? "lattice_variant" : "lattice";
    }
    std::string operator()(const CircleParams&) const { return "circle"; }
    std::string operator()(const MoyalParams&) const { return "moyal"; }
    std::string operator()(const FuzzySphereParams&) const { return "fuzzy_sphere"; }
    std::string operator()(const FlipParams&) const { return "flip"; }
    std::string operator()(const GridParams&) const { return "grid"; }
    std::string operator()(const BlockSumParams&) const { return "block_sum"; }
  } visitor;
  return std::visit(visitor, p);
}

class TruncatedTriple {
 public:
  TruncatedTriple(std::string name, Index hilbert_dim, int spin_dim, HermitianOperator dirac,
                  std::vector<SparseMatrix> algebra_basis, GeometryParams params)
      : name_(std::move(name)),
        hilbert_dim_(hilbert_dim),
        spin_dim_(spin_dim),
        dirac_(std::move(dirac)),
        basis_(std::move(algebra_basis)),
        params_(std::move(params)) {
    validate();
    dirac_sparse_ = to_sparse(dirac_.matrix());
  }

  const std::string& name() const { return name_; }
  Index hilbert_dim() const { return hilbert_dim_; }
  int spin_dim() const { return spin_dim_; }
  Index dirac_dim() const { return hilbert_dim_ * spin_dim_; }
  const HermitianOperator& dirac() const { return dirac_; }
  const SparseMatrix& dirac_sparse() const { return dirac_sparse_; }
  const std::vector<SparseMatrix>& algebra_basis() const { return basis_; }
  std::size_t algebra_dim() const { return basis_.size(); }
  const GeometryParams& params() const { return params_; }

  HermitianOperator generator(std::size_t k) const { return HermitianOperator(to_dense(basis_.at(k))); }

  /// sum_k x_k G_k
  HermitianOperator element(const RealVector& coeffs) const {
    if (static_cast<std::size_t>(coeffs.size()) != basis_.size())
      throw DimensionMismatch("element: expected " + std::to_string(basis_.size()) + " coefficients");
    ComplexMatrix a = ComplexMatrix::Zero(hilbert_dim_, hilbert_dim_);
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      const double x = coeffs(static_cast<Index>(k));
      if (x == 0.0) continue;
      for (Index col = 0; col < basis_[k].outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(basis_[k], col); it; ++it) a(it.row(), it.col()) += x * it.value();
    }
    return HermitianOperator(a);
  }

  /// [D, a (x) I_s]
  ComplexMatrix lipschitz_commutator(const HermitianOperator& a) const {
    if (a.dim() != hilbert_dim_) throw DimensionMismatch("lipschitz_commutator: wrong dimension");
    return commutator(dirac_.matrix(), spin_double(a.matrix(), spin_dim_));
  }

  /// L_D(a) = ||[D, a (x) I_s]||
  double lipschitz_seminorm(const HermitianOperator& a) const {
    return spectral_norm(lipschitz_commutator(a));
  }

  /// Same geometry with the Dirac operator replaced; used by negative controls.
  TruncatedTriple with_dirac(HermitianOperator dirac, std::string name) const {
    return TruncatedTriple(std::move(name), hilbert_dim_, spin_dim_, std::move(dirac), basis_, params_);
  }

 private:
  void validate() const {
    if (hilbert_dim_ < 1) throw InvalidInput("TruncatedTriple: empty Hilbert space");
    if (spin_dim_ < 1) throw InvalidInput("TruncatedTriple: spin_dim must be >= 1");
    if (dirac_.dim() != dirac_dim())
      throw DimensionMismatch("TruncatedTriple: Dirac operator has dimension " + std::to_string(dirac_.dim()) +
                              ", expected " + std::to_string(dirac_dim()));
    if (basis_.empty()) throw InvalidInput("TruncatedTriple: empty algebra basis");
    for (const auto& g : basis_) {
      if (g.rows() != hilbert_dim_ || g.cols() != hilbert_dim_)
        throw DimensionMismatch("TruncatedTriple: generator of wrong size");
      const SparseMatrix skew = g - SparseMatrix(g.adjoint());
      if (skew.norm() > 1e-12 * std::max(1.0, g.norm()))
        throw InvalidInput("TruncatedTriple: generator is not Hermitian");
    }
    if (max_abs(to_dense(basis_.front()) - ComplexMatrix::Identity(hilbert_dim_, hilbert_dim_)) > 1e-14)
      throw InvalidInput("TruncatedTriple: first generator must be the identity");
    check_independence();
  }

  // Gram matrix of Hilbert-Schmidt inner products must be well conditioned.
  void check_independence() const {
    const Index m = static_cast<Index>(basis_.size());
    const Index nn = hilbert_dim_ * hilbert_dim_;
    std::vector<Eigen::Triplet<Complex>> t;
    for (Index k = 0; k < m; ++k)
      for (Index col = 0; col < basis_[k].outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(basis_[k], col); it; ++it)
          t.emplace_back(it.col() * hilbert_dim_ + it.row(), k, it.value());
    SparseMatrix s(nn, m);
    s.setFromTriplets(t.begin(), t.end());
    SparseMatrix gram = SparseMatrix(s.adjoint()) * s;
    // Sparse LDL^T: a pivot collapsing relative to the largest one signals a
    // dependent generator.
    const Eigen::SparseMatrix<double> g = gram.real();
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(g);
    if (ldlt.info() != Eigen::Success) throw InvalidInput("TruncatedTriple: algebra basis is linearly dependent");
    const RealVector pivots = ldlt.vectorD();
    if (!(pivots.minCoeff() > 1e-10 * pivots.cwiseAbs().maxCoeff()))
      throw InvalidInput("TruncatedTriple: algebra basis is linearly dependent");
  }

  std::string name_;
  Index hilbert_dim_;
  int spin_dim_;
  HermitianOperator dirac_;
  SparseMatrix dirac_sparse_;
  std::vector<SparseMatrix> basis_;
  GeometryParams params_;
};

using TriplePtr = std::shared_ptr<const TruncatedTriple>;

namespace detail {

inline SparseMatrix sparse_from(Index n, const std::vector<Eigen::Triplet<Complex>>& t) {
  SparseMatrix s(n, n);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

struct Entry {
  Index row, col;
  Complex value;
};

inline SparseMatrix sparse_entries(Index n, std::initializer_list<Entry> entries) {
  std::vector<Eigen::Triplet<Complex>> t;
  for (const auto& e : entries) t.emplace_back(e.row, e.col, e.value);
  return sparse_from(n, t);
}

inline SparseMatrix sparse_identity(Index n) {
  std::vector<Eigen::Triplet<Complex>> t;
  for (Index i = 0; i < n; ++i) t.emplace_back(i, i, 1.0);
  return sparse_from(n, t);
}

/// Identity, diagonal units E_kk (k >= 1), then E_jk + E_kj and i(E_jk - E_kj)
/// for j < k. Spans all Hermitian n x n matrices.
inline std::vector<SparseMatrix> full_hermitian_basis(Index n) {
  std::vector<SparseMatrix> basis;
  basis.reserve(static_cast<std::size_t>(n * n));
  basis.push_back(sparse_identity(n));
  for (Index k = 1; k < n; ++k) basis.push_back(sparse_entries(n, {{k, k, 1.0}}));
  for (Index j = 0; j < n; ++j)
    for (Index k = j + 1; k < n; ++k) {
      basis.push_back(sparse_entries(n, {{j, k, 1.0}, {k, j, 1.0}}));
      basis.push_back(sparse_entries(n, {{j, k, kI}, {k, j, -kI}}));
    }
  return basis;
}

/// Identity plus the indicator of every site except the first.
inline std::vector<SparseMatrix> diagonal_basis(Index n) {
  std::vector<SparseMatrix> basis;
  basis.push_back(sparse_identity(n));
  for (Index k = 1; k < n; ++k) basis.push_back(sparse_entries(n, {{k, k, 1.0}}));
  return basis;
}

}  // namespace detail

/// Lattice Z restricted to a window, H = l^2(window) (x) C^2 with
/// D|n>_+ = |n+1>_- and D|n>_- = |n-1>_+; hops leaving the window are dropped.
inline TruncatedTriple build_lattice(std::int64_t window_min, std::int64_t window_max) {
  const std::int64_t len = window_max - window_min + 1;
  if (len < 2) throw InvalidInput("build_lattice: window must contain at least 2 sites");
  const Index n = static_cast<Index>(len);
  ComplexMatrix d = ComplexMatrix::Zero(2 * n, 2 * n);
  for (Index i = 0; i + 1 < n; ++i) {
    d(n + i + 1, i) = 1.0;  // |i>_+ -> |i+1>_-
    d(i, n + i + 1) = 1.0;  // |i+1>_- -> |i>_+
  }
  return TruncatedTriple("lattice[" + std::to_string(window_min) + "," + std::to_string(window_max) + "]", n, 2,
                         HermitianOperator(d), detail::diagonal_basis(n),
                         LatticeParams{window_min, window_max, false});
}

/// Lattice with the difference operator D'|n> = |n+1> - |n-1> on l^2(window).
/// D' is anti-self-adjoint; the stored Dirac operator is i D', which has the
/// same commutator norms.
inline TruncatedTriple build_lattice_variant(std::int64_t window_min, std::int64_t window_max) {
  const std::int64_t len = window_max - window_min + 1;
  if (len < 3) throw InvalidInput("build_lattice_variant: window must contain at least 3 sites");
  const Index n = static_cast<Index>(len);
  ComplexMatrix d = ComplexMatrix::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) {
    d(i + 1, i) = kI;    // i * (+1) for |i> -> |i+1>
    d(i, i + 1) = -kI;   // i * (-1) for |i+1> -> |i>
  }
  return TruncatedTriple("lattice_variant[" + std::to_string(window_min) + "," + std::to_string(window_max) + "]",
                         n, 1, HermitianOperator(d), detail::diagonal_basis(n),
                         LatticeParams{window_min, window_max, true});
}

/// Toeplitz pattern T_k with (T_k)_{pq} = 1 iff p - q = k, on 2N+1 modes.
inline SparseMatrix toeplitz_shift(int cutoff, int k) {
  const Index n = 2 * cutoff + 1;
  std::vector<Eigen::Triplet<Complex>> t;
  for (Index q = 0; q < n; ++q) {
    const Index p = q + k;
    if (p >= 0 && p < n) t.emplace_back(p, q, 1.0);
  }
  return detail::sparse_from(n, t);
}

/// pi_N(f): the compression (f_{n-m})_{|n|,|m| <= N} of multiplication by a
/// trigonometric polynomial with coefficients f(k + degree) = f_k.
inline ComplexMatrix toeplitz_compression(int cutoff, const ComplexVector& f) {
  if (f.size() % 2 == 0) throw InvalidInput("toeplitz_compression: need coefficients for k = -d..d");
  const Index degree = (f.size() - 1) / 2, n = 2 * cutoff + 1;
  ComplexMatrix t = ComplexMatrix::Zero(n, n);
  for (Index p = 0; p < n; ++p)
    for (Index q = 0; q < n; ++q)
      if (std::abs(p - q) <= degree) t(p, q) = f(p - q + degree);
  return t;
}

/// Circle truncated to Fourier modes -N..N, D = diag(-N..N). The algebra is
/// spanned by the compressions of real trigonometric polynomials, i.e. the
/// Hermitian Toeplitz matrices.
inline TruncatedTriple build_circle(int cutoff, bool full_matrix_algebra = false) {
  if (cutoff < 1) throw InvalidInput("build_circle: N must be >= 1");
  const Index n = 2 * cutoff + 1;
  RealVector modes(n);
  for (Index i = 0; i < n; ++i) modes(i) = static_cast<double>(i - cutoff);
  std::vector<SparseMatrix> basis;
  if (full_matrix_algebra) {
    basis = detail::full_hermitian_basis(n);
  } else {
    basis.push_back(detail::sparse_identity(n));
    for (int k = 1; k <= 2 * cutoff; ++k) {
      const SparseMatrix tk = toeplitz_shift(cutoff, k);
      const SparseMatrix tkh = SparseMatrix(tk.adjoint());
      basis.push_back(tk + tkh);
      basis.push_back(kI * (tk - tkh));
    }
  }
  return TruncatedTriple("circle[N=" + std::to_string(cutoff) + "]", n, 1, HermitianOperator::diagonal(modes),
                         std::move(basis), CircleParams{cutoff, full_matrix_algebra});
}

/// Truncated annihilation operator a h_k = sqrt(k) h_{k-1} on levels 0..n_max.
inline ComplexMatrix annihilation(int n_max) {
  const Index n = n_max + 1;
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  for (Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

/// Moyal plane on Fock levels 0..n_max, D = (2/sqrt(theta)) [[0, a^dagger], [a, 0]].
inline TruncatedTriple build_moyal(double theta, int n_max) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidInput("build_moyal: theta must be > 0");
  if (n_max < 1) throw InvalidInput("build_moyal: n_max must be >= 1");
  const Index n = n_max + 1;
  const ComplexMatrix a = annihilation(n_max);
  ComplexMatrix d = ComplexMatrix::Zero(2 * n, 2 * n);
  d.topRightCorner(n, n) = a.adjoint();
  d.bottomLeftCorner(n, n) = a;
  d *= 2.0 / std::sqrt(theta);
  return TruncatedTriple("moyal[theta=" + std::to_string(theta) + ",n_max=" + std::to_string(n_max) + "]", n, 2,
                         HermitianOperator(d), detail::full_hermitian_basis(n), MoyalParams{theta, n_max});
}

/// rho_l(H) = diag(m), m = -l..l.
inline ComplexMatrix su2_h(int two_ell) {
  const Index n = two_ell + 1;
  ComplexMatrix h = ComplexMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) h(i, i) = 0.5 * static_cast<double>(2 * i - two_ell);
  return h;
}

/// rho_l(E)|l,m> = sqrt((l-m)(l+m+1)) |l,m+1>.
inline ComplexMatrix su2_e(int two_ell) {
  const Index n = two_ell + 1;
  const double ell = 0.5 * two_ell;
  ComplexMatrix e = ComplexMatrix::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) {
    const double m = -ell + static_cast<double>(i);
    e(i + 1, i) = std::sqrt((ell - m) * (ell + m + 1.0));
  }
  return e;
}

inline ComplexMatrix su2_f(int two_ell) { return su2_e(two_ell).adjoint(); }

/// Fuzzy sphere of spin l = two_ell/2:
/// D = [[1/2 + rho(H), rho(F)], [rho(E), 1/2 - rho(H)]] on V_l (x) C^2.
inline TruncatedTriple build_fuzzy_sphere(int two_ell) {
  if (two_ell < 1) throw InvalidInput("build_fuzzy_sphere: two_ell must be >= 1");
  const Index n = two_ell + 1;
  const ComplexMatrix h = su2_h(two_ell);
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  ComplexMatrix d(2 * n, 2 * n);
  d.topLeftCorner(n, n) = 0.5 * id + h;
  d.topRightCorner(n, n) = su2_f(two_ell);
  d.bottomLeftCorner(n, n) = su2_e(two_ell);
  d.bottomRightCorner(n, n) = 0.5 * id - h;
  return TruncatedTriple("fuzzy_sphere[2l=" + std::to_string(two_ell) + "]", n, 2, HermitianOperator(d),
                         detail::full_hermitian_basis(n), FuzzySphereParams{two_ell});
}

/// m points with H = C^m (+) C^m, D = lambda * swap, and the algebra acting as
/// f (+) f(base). Generators: identity, then the indicator of every point
/// other than `base`.
inline TruncatedTriple build_flip(int points, double lambda, int base) {
  if (points < 2) throw InvalidInput("build_flip: need at least 2 points");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidInput("build_flip: lambda must be > 0");
  if (base < 0 || base >= points) throw InvalidInput("build_flip: base index out of range");
  const Index m = points;
  ComplexMatrix d = ComplexMatrix::Zero(2 * m, 2 * m);
  d.topRightCorner(m, m) = lambda * ComplexMatrix::Identity(m, m);
  d.bottomLeftCorner(m, m) = lambda * ComplexMatrix::Identity(m, m);
  std::vector<SparseMatrix> basis;
  basis.push_back(detail::sparse_identity(2 * m));
  for (Index j = 0; j < m; ++j)
    if (j != base) basis.push_back(detail::sparse_entries(2 * m, {{j, j, 1.0}}));
  return TruncatedTriple("flip[m=" + std::to_string(points) + ",lambda=" + std::to_string(lambda) + "]", 2 * m, 1,
                         HermitianOperator(d), std::move(basis), FlipParams{points, lambda, base});
}

/// Commutative algebra C^m (diagonal matrices) with an arbitrary Dirac operator on C^m.
inline TruncatedTriple build_grid(const HermitianOperator& dirac, std::string label) {
  const Index m = dirac.dim();
  if (m < 2) throw InvalidInput("build_grid: need at least 2 points");
  return TruncatedTriple("grid[" + label + "]", m, 1, dirac, detail::diagonal_basis(m),
                         GridParams{static_cast<int>(m), std::move(label)});
}

/// m points on the unit circle, D = |u><u| + 2|c><c| with u the normalized
/// constant vector and c the normalized samples of cos(2 pi x). Rank 2.
inline TruncatedTriple build_finite_rank_grid(int points) {
  if (points < 3) throw InvalidInput("build_finite_rank_grid: need at least 3 points");
  const Index m = points;
  ComplexVector u = ComplexVector::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
  ComplexVector c(m);
  for (Index j = 0; j < m; ++j) c(j) = std::cos(2.0 * kPi * static_cast<double>(j) / static_cast<double>(m));
  c /= c.norm();
  const ComplexMatrix d = u * u.adjoint() + 2.0 * c * c.adjoint();
  return build_grid(HermitianOperator(d), "rank2,m=" + std::to_string(points));
}

/// Direct sum of two triples with the same spin multiplicity. The algebra is
/// the direct sum of the algebras, so the kernel of the Lipschitz seminorm
/// contains the indicator of each block.
inline TruncatedTriple block_sum(const TruncatedTriple& a, const TruncatedTriple& b) {
  if (a.spin_dim() != b.spin_dim()) throw DimensionMismatch("block_sum: spin multiplicities differ");
  const Index na = a.hilbert_dim(), nb = b.hilbert_dim(), n = na + nb;
  const int s = a.spin_dim();
  // Spin-outer layout: spin block k of the sum contains spin block k of a, then of b.
  ComplexMatrix d = ComplexMatrix::Zero(n * s, n * s);
  for (int k = 0; k < s; ++k)
    for (int l = 0; l < s; ++l) {
      d.block(k * n, l * n, na, na) = a.dirac().matrix().block(k * na, l * na, na, na);
      d.block(k * n + na, l * n + na, nb, nb) = b.dirac().matrix().block(k * nb, l * nb, nb, nb);
    }
  std::vector<SparseMatrix> basis;
  basis.push_back(detail::sparse_identity(n));
  auto embed = [&](const SparseMatrix& g, Index offset) {
    std::vector<Eigen::Triplet<Complex>> t;
    for (Index col = 0; col < g.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(g, col); it; ++it)
        t.emplace_back(offset + it.row(), offset + it.col(), it.value());
    return detail::sparse_from(n, t);
  };
  for (std::size_t k = 1; k < a.algebra_dim(); ++k) basis.push_back(embed(a.algebra_basis()[k], 0));
  basis.push_back(embed(detail::sparse_identity(nb), na));
  for (std::size_t k = 1; k < b.algebra_dim(); ++k) basis.push_back(embed(b.algebra_basis()[k], na));
  return TruncatedTriple(a.name() + "+" + b.name(), n, s, HermitianOperator(d), std::move(basis),
                         BlockSumParams{a.name(), b.name()});
}

/// exp(i t D), computed from the eigendecomposition of D.
inline ComplexMatrix geodesic_flow_unitary(const TruncatedTriple& triple, double t) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(triple.dirac().matrix());
  const ComplexVector phases = (kI * t * es.eigenvalues().cast<Complex>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace specdist
