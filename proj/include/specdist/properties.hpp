#pragma once

// Residual functions for the structural identities of truncated triples.
// Each returns a nonnegative number that vanishes (up to rounding) when the
// identity holds, or the slack of an inequality (nonnegative when it holds).

#include "specdist/geometries.hpp"

namespace specdist::props {

/// || [PDP, PaP] - P([D,a] + [[P,a],[D,P]]) P ||_max
inline double compression_commutator_residual(const ComplexMatrix& d, const ComplexMatrix& p, const ComplexMatrix& a) {
  const ComplexMatrix lhs = commutator(p * d * p, p * a * p);
  const ComplexMatrix rhs = p * (commutator(d, a) + commutator(commutator(p, a), commutator(d, p))) * p;
  return max_abs(lhs - rhs);
}

/// ||[D,a]|| - ||[PDP, PaP]||; nonnegative when [D,P] = 0.
inline double spectral_compression_slack(const ComplexMatrix& d, const ComplexMatrix& p, const ComplexMatrix& a) {
  return spectral_norm(commutator(d, a)) - spectral_norm(commutator(p * d * p, p * a * p));
}

/// ||[PDP, a]|| - ||[PDP, PaP]||; nonnegative for every projection P.
inline double truncated_compression_slack(const ComplexMatrix& d, const ComplexMatrix& p, const ComplexMatrix& a) {
  const ComplexMatrix dl = p * d * p;
  return spectral_norm(commutator(dl, a)) - spectral_norm(commutator(dl, p * a * p));
}

/// | ||[P0, f]||^2 - (<f psi, f psi> - |<psi, f psi>|^2) | with P0 = |psi><psi|.
inline double rank_one_variance_residual(const RealVector& f, const ComplexVector& psi) {
  const ComplexMatrix p0 = psi * psi.adjoint();
  const ComplexMatrix fm = f.cast<Complex>().asDiagonal();
  const double norm = spectral_norm(commutator(p0, fm));
  const ComplexVector fpsi = fm * psi;
  const double variance = fpsi.squaredNorm() - std::norm(psi.dot(fpsi));
  return std::abs(norm * norm - variance);
}

/// Max deviation from the su(2) relations [E,F] = 2H, [H,E] = E, [H,F] = -F.
inline double su2_residual(int two_ell) {
  const ComplexMatrix h = su2_h(two_ell), e = su2_e(two_ell), f = su2_f(two_ell);
  return std::max({max_abs(commutator(e, f) - 2.0 * h), max_abs(commutator(h, e) - e), max_abs(commutator(h, f) + f)});
}

}  // namespace specdist::props
