#pragma once

// States of a truncated algebra, stored as density matrices on the truncated
// Hilbert space (no spin factor): phi(a) = Tr(rho a).

#include "specdist/geometries.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <sstream>

namespace specdist {

class UndefinedTruncation : public Error {
 public:
  using Error::Error;
};

class State {
 public:
  State(TriplePtr triple, HermitianOperator rho) : triple_(std::move(triple)), rho_(std::move(rho)) {
    if (!triple_) throw InvalidInput("State: null triple");
    if (rho_.dim() != triple_->hilbert_dim())
      throw DimensionMismatch("State: density matrix has dimension " + std::to_string(rho_.dim()) +
                              ", Hilbert space has " + std::to_string(triple_->hilbert_dim()));
    const double tr = rho_.trace();
    if (std::abs(tr - 1.0) > 1e-10) throw InvalidInput("State: trace is " + std::to_string(tr));
    const double lo = rho_.eigenvalues().minCoeff();
    if (lo < -1e-10) throw InvalidInput("State: density matrix has eigenvalue " + std::to_string(lo));
  }

  const TruncatedTriple& triple() const { return *triple_; }
  const TriplePtr& triple_ptr() const { return triple_; }
  const HermitianOperator& rho() const { return rho_; }

  double evaluate(const HermitianOperator& a) const {
    if (a.dim() != rho_.dim()) throw DimensionMismatch("State::evaluate: wrong dimension");
    return (rho_.matrix().cwiseProduct(a.matrix().transpose())).sum().real();
  }

  double evaluate(const SparseMatrix& a) const {
    Complex acc = 0.0;
    for (Index col = 0; col < a.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(a, col); it; ++it) acc += it.value() * rho_.matrix()(it.col(), it.row());
    return acc.real();
  }

  /// Norm mass discarded when the defining vector was truncated (coherent states).
  double discarded_mass() const { return discarded_mass_; }
  State& set_discarded_mass(double m) {
    discarded_mass_ = m;
    return *this;
  }

 private:
  TriplePtr triple_;
  HermitianOperator rho_;
  double discarded_mass_ = 0.0;
};

/// Two triples describe the same geometry if they are the same object or
/// agree on name, dimensions, Dirac operator and algebra size.
inline bool same_geometry(const TruncatedTriple& a, const TruncatedTriple& b) {
  if (&a == &b) return true;
  return a.name() == b.name() && a.hilbert_dim() == b.hilbert_dim() && a.spin_dim() == b.spin_dim() &&
         a.algebra_dim() == b.algebra_dim() && max_abs(a.dirac().matrix() - b.dirac().matrix()) == 0.0;
}

inline State vector_state(TriplePtr triple, const ComplexVector& psi) {
  const double norm = psi.norm();
  if (norm == 0.0) throw InvalidInput("vector_state: zero vector");
  if (std::abs(norm - 1.0) > 1e-10) throw InvalidInput("vector_state: vector norm is " + std::to_string(norm));
  return State(std::move(triple), HermitianOperator(psi * psi.adjoint()));
}

inline State basis_state(TriplePtr triple, Index k) {
  if (k < 0 || k >= triple->hilbert_dim()) throw InvalidInput("basis_state: index out of range");
  ComplexVector e = ComplexVector::Zero(triple->hilbert_dim());
  e(k) = 1.0;
  return vector_state(std::move(triple), e);
}

inline State mixed_state(TriplePtr triple, const ComplexMatrix& rho) {
  return State(std::move(triple), HermitianOperator(rho));
}

inline double trace_distance(const State& a, const State& b) {
  return trace_norm(a.rho().matrix() - b.rho().matrix());
}

// ---------------------------------------------------------------------------
// lattice

/// Probabilities p_n for the sites window_min, window_min+1, ...
struct LatticeDistribution {
  std::int64_t window_min = 0;
  RealVector p;

  LatticeDistribution() = default;
  LatticeDistribution(std::int64_t first_site, RealVector probs) : window_min(first_site), p(std::move(probs)) {
    if (p.size() == 0) throw InvalidInput("LatticeDistribution: empty");
    if (p.minCoeff() < 0.0) throw InvalidInput("LatticeDistribution: negative probability");
    if (std::abs(p.sum() - 1.0) > 1e-12) throw InvalidInput("LatticeDistribution: probabilities do not sum to 1");
  }

  std::int64_t window_max() const { return window_min + static_cast<std::int64_t>(p.size()) - 1; }
  static LatticeDistribution point(std::int64_t first_site, Index size, std::int64_t site) {
    RealVector q = RealVector::Zero(size);
    q(static_cast<Index>(site - first_site)) = 1.0;
    return {first_site, q};
  }
};

namespace detail {
inline const LatticeParams& lattice_params(const TruncatedTriple& t) {
  const auto* lp = std::get_if<LatticeParams>(&t.params());
  if (!lp) throw InvalidInput("expected a lattice geometry, got " + geometry_kind(t.params()));
  return *lp;
}
}  // namespace detail

/// delta_n on a lattice window.
inline State lattice_point(TriplePtr triple, std::int64_t site) {
  const auto& lp = detail::lattice_params(*triple);
  if (site < lp.window_min || site > lp.window_max) throw InvalidInput("lattice_point: site outside the window");
  return basis_state(std::move(triple), static_cast<Index>(site - lp.window_min));
}

/// phi(a) = sum_n a_n p_n.
inline State lattice_state(TriplePtr triple, const LatticeDistribution& dist) {
  const auto& lp = detail::lattice_params(*triple);
  if (dist.window_min != lp.window_min || dist.window_max() != lp.window_max)
    throw DimensionMismatch("lattice_state: distribution window does not match the geometry");
  return State(std::move(triple), HermitianOperator::diagonal(dist.p));
}

struct Moment {
  double value = 0.0;
  bool infinite = false;
};

/// sum_k p_k cost(k, n); flags +infinity once a partial sum passes 1e12.
inline Moment moment1(const LatticeDistribution& dist, std::int64_t site,
                      const std::function<double(std::int64_t, std::int64_t)>& cost) {
  Moment m;
  for (Index i = 0; i < dist.p.size(); ++i) {
    const std::int64_t k = dist.window_min + i;
    const double c = cost(k, site);
    if (c < 0.0 || !std::isfinite(c)) throw InvalidInput("moment1: cost must be finite and nonnegative");
    m.value += dist.p(i) * c;
    if (m.value > 1e12) {
      m.infinite = true;
      m.value = std::numeric_limits<double>::infinity();
      return m;
    }
  }
  return m;
}

inline Moment moment1(const LatticeDistribution& dist, std::int64_t site) {
  return moment1(dist, site, [](std::int64_t k, std::int64_t n) { return static_cast<double>(k > n ? k - n : n - k); });
}

// ---------------------------------------------------------------------------
// circle

/// psi_{x,N} = (N+1)^{-1/2} sum_{n=0}^{N} e^{-inx} e_n, placed inside the
/// circle truncation of `triple` (cutoff K >= N).
inline State fejer_state(TriplePtr triple, int n, double x) {
  const auto* cp = std::get_if<CircleParams>(&triple->params());
  if (!cp) throw InvalidInput("fejer_state: expected a circle geometry");
  if (n < 0 || n > cp->cutoff) throw InvalidInput("fejer_state: N must lie in [0, cutoff]");
  ComplexVector psi = ComplexVector::Zero(triple->hilbert_dim());
  const double w = 1.0 / std::sqrt(static_cast<double>(n + 1));
  for (int k = 0; k <= n; ++k) psi(cp->cutoff + k) = w * std::exp(-kI * (static_cast<double>(k) * x));
  psi /= psi.norm();
  return vector_state(std::move(triple), psi);
}

inline State fejer_state(int n, double x) {
  return fejer_state(std::make_shared<const TruncatedTriple>(build_circle(n)), n, x);
}

// ---------------------------------------------------------------------------
// moyal

struct CoherentVector {
  ComplexVector psi;        // renormalized
  double norm_before = 1.0; // norm of the truncated series
};

/// psi_z = e^{-|z|^2/2theta} sum_n zbar^n / sqrt(theta^n n!) h_n, truncated at n_max.
inline CoherentVector moyal_coherent_vector(double theta, int n_max, Complex z) {
  if (!(theta > 0.0)) throw InvalidInput("moyal_coherent: theta must be > 0");
  ComplexVector psi(n_max + 1);
  const double damp = std::exp(-std::norm(z) / (2.0 * theta));
  const Complex step = std::conj(z) / std::sqrt(theta);
  Complex term = damp;
  for (int k = 0; k <= n_max; ++k) {
    psi(k) = term;
    term *= step / std::sqrt(static_cast<double>(k + 1));
  }
  CoherentVector out;
  out.norm_before = psi.norm();
  out.psi = psi / out.norm_before;
  return out;
}

inline State moyal_coherent(TriplePtr triple, Complex z) {
  const auto* mp = std::get_if<MoyalParams>(&triple->params());
  if (!mp) throw InvalidInput("moyal_coherent: expected a Moyal geometry");
  if (std::norm(z) / mp->theta > mp->n_max / 4.0)
    warn("coherent state |z|^2/theta exceeds n_max/4; truncation is poor");
  const CoherentVector cv = moyal_coherent_vector(mp->theta, mp->n_max, z);
  const double tail = 1.0 - cv.norm_before * cv.norm_before;
  if (tail > 1e-8) {
    std::ostringstream msg;
    msg << "coherent state truncation discards norm mass " << tail;
    warn(msg.str());
  }
  State s = vector_state(std::move(triple), cv.psi);
  s.set_discarded_mass(std::max(0.0, tail));
  return s;
}

// ---------------------------------------------------------------------------
// fuzzy sphere

inline double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Unit vector v with Q = v v^dagger the Bloch coherent projection:
/// v_m = C(2l, l+m)^{1/2} e^{-i m phi} sin(theta/2)^{l+m} cos(theta/2)^{l-m}.
inline ComplexVector bloch_vector(int two_ell, double polar, double azimuth) {
  if (polar < 0.0 || polar > kPi) throw InvalidInput("bloch_coherent: polar angle must lie in [0, pi]");
  const Index n = two_ell + 1;
  const double s = std::sin(0.5 * polar), c = std::cos(0.5 * polar);
  ComplexVector v(n);
  for (Index i = 0; i < n; ++i) {
    const int up = static_cast<int>(i);          // l + m
    const int down = two_ell - static_cast<int>(i);  // l - m
    const double m = 0.5 * static_cast<double>(up - down);
    const double mag = std::exp(0.5 * log_binomial(two_ell, up)) * std::pow(s, up) * std::pow(c, down);
    v(i) = mag * std::exp(-kI * (m * azimuth));
  }
  return v / v.norm();
}

inline State bloch_coherent(TriplePtr triple, double polar, double azimuth) {
  const auto* fp = std::get_if<FuzzySphereParams>(&triple->params());
  if (!fp) throw InvalidInput("bloch_coherent: expected a fuzzy sphere geometry");
  return vector_state(std::move(triple), bloch_vector(fp->two_ell, polar, azimuth));
}

// ---------------------------------------------------------------------------
// flip

/// delta_j, the vector state of e_j in the first summand.
inline State flip_point(TriplePtr triple, int point) {
  const auto* fp = std::get_if<FlipParams>(&triple->params());
  if (!fp) throw InvalidInput("flip_point: expected a flip geometry");
  if (point < 0 || point >= fp->points) throw InvalidInput("flip_point: point out of range");
  return basis_state(std::move(triple), point);
}

// ---------------------------------------------------------------------------
// truncation

struct TruncatedState {
  State state;
  double weight;  // Z = Tr(R P)
};

/// phi_P(b) = Tr(R P b P) / Tr(R P). The result lives on `target`, whose
/// Hilbert space is either the range of P (dimension rank P, ambient basis
/// order for coordinate projections) or the ambient space itself, in which
/// case the density matrix is P R P / Z.
inline TruncatedState truncate_state(const State& s, const HermitianOperator& p, TriplePtr target) {
  if (p.dim() != s.rho().dim()) throw DimensionMismatch("truncate_state: projection has wrong dimension");
  if (!is_projection(p.matrix())) throw NotAProjection("truncate_state: P is not an orthogonal projection");
  const double z = (s.rho().matrix() * p.matrix()).trace().real();
  if (!(z > 1e-14)) throw UndefinedTruncation("truncate_state: Tr(RP) vanishes");
  const ComplexMatrix prp = p.matrix() * s.rho().matrix() * p.matrix() / z;
  if (target->hilbert_dim() == p.dim()) return {State(std::move(target), HermitianOperator(prp)), z};
  const ComplexMatrix v = range_basis(p);
  if (v.cols() != target->hilbert_dim())
    throw DimensionMismatch("truncate_state: target dimension differs from rank(P)");
  return {State(std::move(target), HermitianOperator(v.adjoint() * prp * v)), z};
}

}  // namespace specdist
