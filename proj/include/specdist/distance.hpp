#pragma once

// Spectral distance d(phi, phi') = sup { Tr(Delta a) : ||[D, a (x) I_s]|| <= 1 }
// over the real span of a triple's algebra generators, Delta = rho - rho'.
//
// With a = sum_k x_k G_k the commutator [D, a (x) I_s] is anti-Hermitian, so
// H_k = i [D, G_k (x) I_s] are Hermitian and the constraint reads
// ||sum_k x_k H_k|| <= 1: a linear objective over a spectral-norm ball (see
// norm_ball_sdp.hpp). The identity generator has H_0 = 0 and is dropped
// (adding multiples of the unit changes neither the constraint nor
// Tr(Delta a) since Tr Delta = 0). Any remaining kernel of x -> H(x) is
// detected up front: if the objective sees it the distance is infinite,
// otherwise the problem is reparametrized on the kernel complement.

#include "specdist/norm_ball_sdp.hpp"
#include "specdist/states.hpp"

#include <atomic>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

namespace specdist {

enum class DistanceStatus { finite, infinite, gap_not_closed };

inline std::string to_string(DistanceStatus s) {
  switch (s) {
    case DistanceStatus::finite: return "finite";
    case DistanceStatus::infinite: return "infinite";
    case DistanceStatus::gap_not_closed: return "gap-not-closed";
  }
  return "unknown";
}

struct DistanceResult {
  DistanceStatus status = DistanceStatus::finite;
  double primal_value = 0.0;  // Tr(Delta optimizer), a lower bound
  double dual_value = 0.0;    // certified upper bound
  HermitianOperator optimizer;
  RealVector coefficients;    // optimizer = sum_k coefficients_k G_k
  double lipschitz_norm = 0.0;  // ||[D, optimizer (x) I_s]||
  ComplexMatrix certificate;  // W with Tr(W H_k) = c_k and ||W||_1 = dual_value
  int iterations = 0;

  double gap() const { return dual_value - primal_value; }
  bool is_infinite() const { return status == DistanceStatus::infinite; }
  /// Best estimate of the distance: the certified lower bound.
  double value() const { return primal_value; }
};

struct DistanceOptions {
  double tolerance = 1e-7;
  int max_iterations = 10000;
  double kernel_threshold = 1e-10;
  double objective_threshold = 1e-10;
};

namespace detail {

inline SparseMatrix lipschitz_generator(const TruncatedTriple& t, const SparseMatrix& g) {
  const SparseMatrix gs = spin_double(g, t.spin_dim());
  const SparseMatrix& d = t.dirac_sparse();
  SparseMatrix h = kI * (SparseMatrix(d * gs) - SparseMatrix(gs * d));
  h.prune(Complex(0.0, 0.0), 1e-15);
  // Exact Hermitian symmetrization guards against rounding in the products.
  SparseMatrix out = 0.5 * (h + SparseMatrix(h.adjoint()));
  out.prune(Complex(0.0, 0.0), 1e-15);
  out.makeCompressed();
  return out;
}

inline RealMatrix sparse_gram(const std::vector<SparseMatrix>& hs, Index n) {
  const Index m = static_cast<Index>(hs.size());
  std::vector<Eigen::Triplet<Complex>> t;
  for (Index k = 0; k < m; ++k)
    for (Index col = 0; col < hs[static_cast<std::size_t>(k)].outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(hs[static_cast<std::size_t>(k)], col); it; ++it)
        t.emplace_back(col * n + it.row(), k, it.value());
  SparseMatrix s(n * n, m);
  s.setFromTriplets(t.begin(), t.end());
  return ComplexMatrix(SparseMatrix(s.adjoint()) * s).real();
}

inline ComplexMatrix dense_combination(const std::vector<SparseMatrix>& hs, const RealVector& x, Index n) {
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (std::size_t k = 0; k < hs.size(); ++k) {
    const double xk = x(static_cast<Index>(k));
    if (xk == 0.0) continue;
    for (Index col = 0; col < hs[k].outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(hs[k], col); it; ++it) out(it.row(), it.col()) += xk * it.value();
  }
  return out;
}

/// Runs body(i) for i in [0, count) on up to `jobs` threads.
template <class Body>
void parallel_for(std::size_t count, int jobs, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/// Precomputed constraint data for one triple; reusable across many state
/// pairs and safe to share between threads once built.
class DistanceEngine {
 public:
  explicit DistanceEngine(TriplePtr triple, DistanceOptions options = {})
      : triple_(std::move(triple)), options_(options) {
    if (!triple_) throw InvalidInput("DistanceEngine: null triple");
    const auto& basis = triple_->algebra_basis();
    const Index n = triple_->dirac_dim();
    for (std::size_t k = 1; k < basis.size(); ++k) h_.push_back(detail::lipschitz_generator(*triple_, basis[k]));
    find_kernel();

    sdp::NormBallProblem problem;
    problem.n = n;
    problem.objective = RealVector::Zero(complement_.cols());
    if (kernel_.cols() == 0) {
      problem.constraints = h_;
    } else {
      for (Index j = 0; j < complement_.cols(); ++j)
        problem.constraints.push_back(to_sparse(detail::dense_combination(h_, complement_.col(j), n), 1e-15));
    }
    solver_ = std::make_shared<const sdp::NormBallSolver>(std::move(problem));
  }

  const TruncatedTriple& triple() const { return *triple_; }
  const TriplePtr& triple_ptr() const { return triple_; }
  const DistanceOptions& options() const { return options_; }

  /// Dimension of {a orthogonal to the unit : [D, a (x) I_s] = 0}.
  Index kernel_dim() const { return kernel_.cols(); }

  /// Kernel directions as coefficient vectors over the non-identity generators.
  const RealMatrix& kernel() const { return kernel_; }

  bool lipschitz() const { return kernel_dim() == 0; }

  /// Hermitian constraint matrices H_k = i[D, G_k (x) I_s] for k >= 1.
  const std::vector<SparseMatrix>& constraint_matrices() const { return h_; }

  /// c_k = Tr(Delta G_k) for the non-identity generators.
  RealVector objective(const HermitianOperator& delta) const {
    check_delta(delta);
    const auto& basis = triple_->algebra_basis();
    RealVector c(static_cast<Index>(basis.size()) - 1);
    for (std::size_t k = 1; k < basis.size(); ++k)
      c(static_cast<Index>(k) - 1) = sdp::detail::re_trace_product(basis[k], delta.matrix());
    return c;
  }

  bool detect_infinite(const HermitianOperator& delta) const {
    if (kernel_.cols() == 0) return false;
    return (kernel_.transpose() * objective(delta)).cwiseAbs().maxCoeff() > options_.objective_threshold;
  }

  DistanceResult solve(const HermitianOperator& delta, std::optional<double> tol = std::nullopt) const {
    const double tolerance = tol.value_or(options_.tolerance);
    if (!(tolerance > 0.0)) throw InvalidInput("distance: tolerance must be positive");
    const RealVector c = objective(delta);
    const Index m = static_cast<Index>(triple_->algebra_dim());
    DistanceResult r;
    r.coefficients = RealVector::Zero(m);

    if (kernel_.cols() > 0) {
      const RealVector seen = kernel_.transpose() * c;
      if (seen.cwiseAbs().maxCoeff() > options_.objective_threshold) {
        // A commuting element with nonzero expectation gap: every multiple of
        // it is feasible, so the supremum is +infinity.
        RealVector dir = kernel_ * seen;
        dir /= dir.cwiseAbs().maxCoeff();
        r.status = DistanceStatus::infinite;
        r.primal_value = r.dual_value = std::numeric_limits<double>::infinity();
        r.coefficients.tail(m - 1) = dir;
        r.optimizer = triple_->element(r.coefficients);
        r.lipschitz_norm = triple_->lipschitz_seminorm(r.optimizer);
        return r;
      }
    }

    const RealVector c_reduced = kernel_.cols() > 0 ? RealVector(complement_.transpose() * c) : c;
    sdp::SolverOptions so;
    so.tolerance = tolerance;
    so.max_iterations = options_.max_iterations;
    const sdp::SolverResult sr = solver_->solve(c_reduced, so);

    const RealVector x = kernel_.cols() > 0 ? RealVector(complement_ * sr.x) : sr.x;
    r.coefficients.tail(m - 1) = x;
    r.optimizer = triple_->element(r.coefficients);
    r.lipschitz_norm = triple_->lipschitz_seminorm(r.optimizer);
    if (r.lipschitz_norm > 1.0) {
      r.coefficients /= r.lipschitz_norm;
      r.optimizer = triple_->element(r.coefficients);
      r.lipschitz_norm = triple_->lipschitz_seminorm(r.optimizer);
    }
    r.primal_value = (delta.matrix().cwiseProduct(r.optimizer.matrix().transpose())).sum().real();
    r.dual_value = sr.dual;
    r.certificate = sr.certificate;
    r.iterations = sr.iterations;
    r.status = r.gap() <= tolerance ? DistanceStatus::finite : DistanceStatus::gap_not_closed;
    return r;
  }

  DistanceResult distance(const State& s1, const State& s2, std::optional<double> tol = std::nullopt) const {
    if (!same_geometry(s1.triple(), *triple_) || !same_geometry(s2.triple(), *triple_))
      throw InvalidInput("distance: states live on a different triple");
    return solve(HermitianOperator(s1.rho().matrix() - s2.rho().matrix()), tol);
  }

 private:
  void check_delta(const HermitianOperator& delta) const {
    if (delta.dim() != triple_->hilbert_dim()) throw DimensionMismatch("distance: Delta has wrong dimension");
    if (std::abs(delta.trace()) > 1e-10) throw InvalidInput("distance: Delta must be traceless");
  }

  void find_kernel() {
    const Index m = static_cast<Index>(h_.size());
    const Index n = triple_->dirac_dim();
    if (m == 0) {
      kernel_ = RealMatrix::Zero(0, 0);
      complement_ = RealMatrix::Zero(0, 0);
      return;
    }
    const RealMatrix g = detail::sparse_gram(h_, n);
    Eigen::LLT<RealMatrix> llt(g);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-12) {
      kernel_ = RealMatrix::Zero(m, 0);
      complement_ = RealMatrix::Identity(m, m);
      return;
    }
    // Candidate directions from the Gram spectrum, confirmed on the map itself
    // by an SVD restricted to the candidates (accurate to rounding in H).
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(g);
    const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
    std::vector<Index> cand;
    for (Index i = 0; i < m; ++i)
      if (es.eigenvalues()(i) <= 1e-8 * top) cand.push_back(i);
    RealMatrix basis(m, static_cast<Index>(cand.size()));
    for (std::size_t k = 0; k < cand.size(); ++k) basis.col(static_cast<Index>(k)) = es.eigenvectors().col(cand[k]);
    ComplexMatrix images(n * n, basis.cols());
    for (Index k = 0; k < basis.cols(); ++k) {
      const ComplexMatrix hk = detail::dense_combination(h_, basis.col(k), n);
      images.col(k) = Eigen::Map<const ComplexVector>(hk.data(), n * n);
    }
    std::vector<Index> keep;
    RealMatrix right;
    if (basis.cols() > 0) {
      Eigen::JacobiSVD<ComplexMatrix> svd(images, Eigen::ComputeFullV);
      right = svd.matrixV().real();
      const double cutoff = options_.kernel_threshold * std::max(1.0, std::sqrt(top));
      for (Index k = 0; k < svd.singularValues().size(); ++k)
        if (svd.singularValues()(k) <= cutoff) keep.push_back(k);
      for (Index k = svd.singularValues().size(); k < basis.cols(); ++k) keep.push_back(k);
    }
    RealMatrix kernel(m, static_cast<Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) kernel.col(static_cast<Index>(k)) = basis * right.col(keep[k]);
    if (kernel.cols() > 0) {
      Eigen::HouseholderQR<RealMatrix> qr(kernel);
      const RealMatrix q = qr.householderQ() * RealMatrix::Identity(m, m);
      kernel_ = q.leftCols(kernel.cols());
      complement_ = q.rightCols(m - kernel.cols());
    } else {
      kernel_ = RealMatrix::Zero(m, 0);
      complement_ = RealMatrix::Identity(m, m);
    }
  }

  TriplePtr triple_;
  DistanceOptions options_;
  std::vector<SparseMatrix> h_;
  RealMatrix kernel_, complement_;
  std::shared_ptr<const sdp::NormBallSolver> solver_;
};

inline DistanceResult distance(const State& s1, const State& s2, double tol = 1e-7) {
  if (!same_geometry(s1.triple(), s2.triple())) throw InvalidInput("distance: states live on different triples");
  return DistanceEngine(s1.triple_ptr()).distance(s1, s2, tol);
}

inline DistanceResult distance(const TriplePtr& triple, const State& s1, const State& s2, double tol = 1e-7) {
  return DistanceEngine(triple).distance(s1, s2, tol);
}

inline bool detect_infinite(const TriplePtr& triple, const HermitianOperator& delta) {
  return DistanceEngine(triple).detect_infinite(delta);
}

inline bool lipschitz_check(const TriplePtr& triple) { return DistanceEngine(triple).lipschitz(); }

/// Distance on a larger ambient triple between states given on range(P):
/// the states are extended by zero and the Lipschitz constraint uses the
/// ambient Dirac operator and algebra.
inline DistanceResult distance_flat(const TriplePtr& ambient, const HermitianOperator& p, const State& s1,
                                    const State& s2, double tol = 1e-7) {
  if (p.dim() != ambient->hilbert_dim()) throw DimensionMismatch("distance_flat: P has wrong dimension");
  const ComplexMatrix v = range_basis(p);
  if (v.cols() != s1.rho().dim() || v.cols() != s2.rho().dim())
    throw DimensionMismatch("distance_flat: states do not live on range(P)");
  const State a(ambient, HermitianOperator(v * s1.rho().matrix() * v.adjoint()));
  const State b(ambient, HermitianOperator(v * s2.rho().matrix() * v.adjoint()));
  return DistanceEngine(ambient).distance(a, b, tol);
}

/// Pairwise distance matrix d(a_i, b_j); each pair is solved once.
struct PairwiseDistances {
  RealMatrix value;      // primal values (+inf for infinite pairs)
  RealMatrix upper;      // certified upper bounds
  double max_gap = 0.0;
  bool any_infinite = false;
  bool all_closed = true;
};

inline PairwiseDistances pairwise_distances(const DistanceEngine& engine, const std::vector<State>& a,
                                            const std::vector<State>& b, double tol = 1e-7, int jobs = 1) {
  PairwiseDistances out;
  out.value = RealMatrix::Zero(static_cast<Index>(a.size()), static_cast<Index>(b.size()));
  out.upper = out.value;
  std::vector<DistanceResult> results(a.size() * b.size());
  detail::parallel_for(results.size(), jobs, [&](std::size_t idx) {
    const std::size_t i = idx / b.size(), j = idx % b.size();
    if (max_abs(a[i].rho().matrix() - b[j].rho().matrix()) == 0.0) {
      results[idx].optimizer = HermitianOperator::zero(engine.triple().hilbert_dim());
      return;
    }
    results[idx] = engine.distance(a[i], b[j], tol);
  });
  for (std::size_t idx = 0; idx < results.size(); ++idx) {
    const auto& r = results[idx];
    const Index i = static_cast<Index>(idx / b.size()), j = static_cast<Index>(idx % b.size());
    out.value(i, j) = r.primal_value;
    out.upper(i, j) = r.dual_value;
    if (r.is_infinite()) out.any_infinite = true;
    else out.max_gap = std::max(out.max_gap, r.gap());
    if (r.status == DistanceStatus::gap_not_closed) out.all_closed = false;
  }
  return out;
}

/// Pairwise distances for two orbits a_i = U^i a_0, b_j = U^j b_0 of a unitary
/// U that commutes with D and preserves the algebra. Then d(a_i, b_j) depends
/// on (j - i) mod n only, so one row of solves fills the matrix.
inline PairwiseDistances circulant_distances(const DistanceEngine& engine, const std::vector<State>& a,
                                             const std::vector<State>& b, double tol = 1e-7, int jobs = 1) {
  if (a.size() != b.size() || a.empty()) throw InvalidInput("circulant_distances: orbits must have equal, nonzero length");
  const std::vector<State> head{a.front()};
  const PairwiseDistances row = pairwise_distances(engine, head, b, tol, jobs);
  const Index n = static_cast<Index>(a.size());
  PairwiseDistances out = row;
  out.value.resize(n, n);
  out.upper.resize(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      out.value(i, j) = row.value(0, (j - i + n) % n);
      out.upper(i, j) = row.upper(0, (j - i + n) % n);
    }
  return out;
}

struct HausdorffResult {
  double value = 0.0;
  bool infinite = false;        // some pairwise distance was infinite
  PairwiseDistances pairs;
};

/// max( max_i min_j d(a_i, b_j), max_j min_i d(a_i, b_j) ) from a pairwise matrix.
inline double hausdorff_from_matrix(const RealMatrix& d) {
  if (d.rows() == 0 || d.cols() == 0) throw InvalidInput("hausdorff: empty set");
  return std::max(d.rowwise().minCoeff().maxCoeff(), d.colwise().minCoeff().maxCoeff());
}

/// With `orbits` set, a and b must be orbits of one symmetry as in circulant_distances.
inline HausdorffResult hausdorff(const std::vector<State>& a, const std::vector<State>& b, const TriplePtr& triple,
                                 double tol = 1e-7, int jobs = 1, bool orbits = false) {
  if (a.empty() || b.empty()) throw InvalidInput("hausdorff: empty set");
  for (const auto* set : {&a, &b})
    for (const auto& s : *set)
      if (!same_geometry(s.triple(), *triple)) throw InvalidInput("hausdorff: states live on a different triple");
  const DistanceEngine engine(triple);
  HausdorffResult h;
  h.pairs = orbits ? circulant_distances(engine, a, b, tol, jobs) : pairwise_distances(engine, a, b, tol, jobs);
  h.infinite = h.pairs.any_infinite;
  h.value = hausdorff_from_matrix(h.pairs.value);
  return h;
}

/// sup |d1 - d2| over matching index pairs: the distortion of the identity
/// correspondence between two metrics on the same sample. Half of it bounds
/// the Gromov-Hausdorff distance between the two finite metric spaces.
inline double correspondence_distortion(const RealMatrix& d1, const RealMatrix& d2) {
  if (d1.rows() != d2.rows() || d1.cols() != d2.cols()) throw DimensionMismatch("distortion: size mismatch");
  return d1.size() == 0 ? 0.0 : (d1 - d2).cwiseAbs().maxCoeff();
}

}  // namespace specdist
