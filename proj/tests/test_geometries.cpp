#include "specdist/geometries.hpp"
#include "specdist/properties.hpp"
#include "specdist/random.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace specdist;

namespace {

RealVector sorted(RealVector v) {
  std::sort(v.data(), v.data() + v.size());
  return v;
}

HermitianOperator diag_element(const RealVector& f) { return HermitianOperator::diagonal(f); }

}  // namespace

TEST(Lattice, DiracIsTheTwoSpinorHop) {
  const auto t = build_lattice(0, 4);
  EXPECT_EQ(t.hilbert_dim(), 5);
  EXPECT_EQ(t.spin_dim(), 2);
  EXPECT_EQ(t.algebra_dim(), 5u);
  const ComplexMatrix& d = t.dirac().matrix();
  // D^2 on the + block is the number of right neighbours.
  const ComplexMatrix d2 = d * d;
  for (Index i = 0; i < 5; ++i) EXPECT_NEAR(d2(i, i).real(), i + 1 < 5 ? 1.0 : 0.0, 1e-15);
  EXPECT_THROW(build_lattice(3, 3), InvalidInput);
}

TEST(Lattice, SeminormIsTheLargestIncrement) {
  gen::Rng rng(1);
  for (int t = 0; t < 60; ++t) {
    const int len = gen::uniform_int(rng, 2, 12);
    const auto tr = build_lattice(-2, -2 + len - 1);
    const RealVector f = gen::real_vector(rng, len);
    double expected = 0.0;
    for (int i = 0; i + 1 < len; ++i) expected = std::max(expected, std::abs(f(i + 1) - f(i)));
    EXPECT_NEAR(tr.lipschitz_seminorm(diag_element(f)), expected, 1e-10 * std::max(1.0, expected));
  }
}

TEST(LatticeVariant, StoresIDPrimeAndKillsConstantsOnly) {
  const auto t = build_lattice_variant(0, 5);
  EXPECT_EQ(t.spin_dim(), 1);
  EXPECT_TRUE(is_hermitian(t.dirac().matrix()));
  EXPECT_NEAR(t.lipschitz_seminorm(HermitianOperator::identity(6)), 0.0, 1e-15);
  gen::Rng rng(2);
  for (int k = 0; k < 20; ++k) {
    const RealVector f = gen::real_vector(rng, 6);
    const double spread = f.maxCoeff() - f.minCoeff();
    if (spread < 1e-3) continue;
    EXPECT_GT(t.lipschitz_seminorm(diag_element(f)), 1e-6);
  }
}

TEST(Circle, ToeplitzGeneratorsAndSpectrum) {
  const auto t = build_circle(3);
  EXPECT_EQ(t.hilbert_dim(), 7);
  EXPECT_EQ(t.algebra_dim(), 13u);
  const RealVector ev = t.dirac().eigenvalues();
  for (Index i = 0; i < 7; ++i) EXPECT_NEAR(ev(i), i - 3.0, 1e-14);
  const auto full = build_circle(2, true);
  EXPECT_EQ(full.algebra_dim(), 25u);
  EXPECT_THROW(build_circle(0), InvalidInput);
}

TEST(Circle, CommutatorIsCompressionOfTheDerivative) {
  gen::Rng rng(3);
  for (int t = 0; t < 40; ++t) {
    const int n = gen::uniform_int(rng, 1, 10), degree = gen::uniform_int(rng, 1, 2 * n);
    const auto tr = build_circle(n);
    const ComplexVector f = gen::real_trig_polynomial(rng, degree);
    ComplexVector df(f.size());
    for (Index j = 0; j < f.size(); ++j) df(j) = Complex(0.0, double(j - degree)) * f(j);  // coefficients of f'
    const HermitianOperator a(toeplitz_compression(n, f));
    // [D, pi(f)] = -i pi(f')
    EXPECT_LE(max_abs(tr.lipschitz_commutator(a) + kI * toeplitz_compression(n, df)), 1e-12);
    // ||pi(f')|| <= sup |f'|, sampled finely.
    double sup = 0.0;
    for (int k = 0; k < 2048; ++k) {
      const double x = 2.0 * kPi * k / 2048.0;
      Complex v = 0.0;
      for (Index j = 0; j < df.size(); ++j) v += df(j) * std::exp(kI * (double(j - degree) * x));
      sup = std::max(sup, std::abs(v));
    }
    EXPECT_LE(tr.lipschitz_seminorm(a), sup * (1.0 + 1e-3) + 1e-10);
  }
}

TEST(Circle, CosineAtCutoffOne) {
  // pi_1(cos) has derivative compression (1/2)[[0,1,0],[-1,0,1],[0,-1,0]]-like, norm sqrt(2)/2.
  const auto tr = build_circle(1);
  ComplexVector f = ComplexVector::Zero(3);
  f(0) = f(2) = 0.5;
  EXPECT_NEAR(tr.lipschitz_seminorm(HermitianOperator(toeplitz_compression(1, f))), std::sqrt(2.0) / 2.0, 1e-14);
}

TEST(Moyal, DiracSquareIsTheNumberOperator) {
  const double theta = 0.5;
  const auto t = build_moyal(theta, 6);
  EXPECT_EQ(t.hilbert_dim(), 7);
  EXPECT_EQ(t.algebra_dim(), 49u);
  const ComplexMatrix d2 = t.dirac().matrix() * t.dirac().matrix();
  for (Index k = 0; k < 7; ++k) EXPECT_NEAR(d2(k, k).real(), 4.0 / theta * k, 1e-12);
  EXPECT_THROW(build_moyal(0.0, 3), InvalidInput);
  EXPECT_THROW(build_moyal(1.0, 0), InvalidInput);
}

TEST(FuzzySphere, SpectrumOfDirac) {
  for (int two_ell = 1; two_ell <= 8; ++two_ell) {
    const double ell = 0.5 * two_ell;
    const auto t = build_fuzzy_sphere(two_ell);
    const RealVector ev = sorted(t.dirac().eigenvalues());
    const Index n_low = two_ell, n_high = two_ell + 2;
    ASSERT_EQ(ev.size(), n_low + n_high);
    for (Index i = 0; i < n_low; ++i) EXPECT_NEAR(ev(i), -ell - 0.5, 1e-12);
    for (Index i = n_low; i < ev.size(); ++i) EXPECT_NEAR(ev(i), ell + 0.5, 1e-12);
  }
}

TEST(FuzzySphere, Su2Relations) {
  for (int two_ell = 1; two_ell <= 12; ++two_ell) EXPECT_LE(props::su2_residual(two_ell), 1e-12);
  // Casimir H^2 + (EF + FE)/2 = l(l+1)
  for (int two_ell = 1; two_ell <= 12; ++two_ell) {
    const double ell = 0.5 * two_ell;
    const ComplexMatrix h = su2_h(two_ell), e = su2_e(two_ell), f = su2_f(two_ell);
    const ComplexMatrix cas = h * h + 0.5 * (e * f + f * e);
    EXPECT_LE(max_abs(cas - ell * (ell + 1) * ComplexMatrix::Identity(two_ell + 1, two_ell + 1)), 1e-12);
  }
}

TEST(Flip, SeminormIsLambdaTimesDeviationFromBase) {
  gen::Rng rng(4);
  for (int t = 0; t < 40; ++t) {
    const int m = gen::uniform_int(rng, 2, 7), base = gen::uniform_int(rng, 0, m - 1);
    const double lambda = gen::uniform(rng, 0.2, 5.0);
    const auto tr = build_flip(m, lambda, base);
    EXPECT_EQ(tr.algebra_dim(), static_cast<std::size_t>(m));
    const ComplexMatrix d2 = tr.dirac().matrix() * tr.dirac().matrix();
    EXPECT_LE(max_abs(d2 - lambda * lambda * ComplexMatrix::Identity(2 * m, 2 * m)), 1e-12);
    RealVector coeffs = gen::real_vector(rng, m);
    const HermitianOperator a = tr.element(coeffs);
    double expected = 0.0;
    for (int j = 0; j < m; ++j)
      expected = std::max(expected, std::abs(a.matrix()(j, j).real() - a.matrix()(base, base).real()));
    EXPECT_NEAR(tr.lipschitz_seminorm(a), lambda * expected, 1e-10 * std::max(1.0, lambda * expected));
    // second summand carries f(base)
    for (int j = 0; j < m; ++j) EXPECT_EQ(a.matrix()(m + j, m + j), a.matrix()(base, base));
  }
  EXPECT_THROW(build_flip(1, 1.0, 0), InvalidInput);
  EXPECT_THROW(build_flip(3, -1.0, 0), InvalidInput);
  EXPECT_THROW(build_flip(3, 1.0, 3), InvalidInput);
}

TEST(FiniteRankGrid, DiracHasRankTwo) {
  for (int m : {3, 8, 16, 33}) {
    const auto t = build_finite_rank_grid(m);
    const RealVector ev = sorted(t.dirac().eigenvalues());
    EXPECT_NEAR(ev(m - 1), 2.0, 1e-12);
    EXPECT_NEAR(ev(m - 2), 1.0, 1e-12);
    for (int i = 0; i < m - 2; ++i) EXPECT_NEAR(ev(i), 0.0, 1e-12);
  }
}

TEST(BlockSum, DimensionsAndDecoupledDirac) {
  const auto a = build_lattice(0, 3), b = build_lattice(0, 5);
  const auto s = block_sum(a, b);
  EXPECT_EQ(s.hilbert_dim(), 10);
  EXPECT_EQ(s.spin_dim(), 2);
  EXPECT_EQ(s.algebra_dim(), a.algebra_dim() + b.algebra_dim());
  // Indicator of the second block commutes with D.
  RealVector ind = RealVector::Zero(10);
  ind.tail(6).setOnes();
  EXPECT_NEAR(s.lipschitz_seminorm(HermitianOperator::diagonal(ind)), 0.0, 1e-15);
  EXPECT_THROW(block_sum(a, build_circle(2)), DimensionMismatch);
}

TEST(TruncatedTriple, ValidatesItsInputs) {
  const auto t = build_lattice(0, 3);
  auto basis = t.algebra_basis();
  basis.push_back(basis[1]);
  EXPECT_THROW(TruncatedTriple("dup", 4, 2, t.dirac(), basis, t.params()), InvalidInput);
  EXPECT_THROW(TruncatedTriple("bad", 4, 1, t.dirac(), t.algebra_basis(), t.params()), DimensionMismatch);
  auto shuffled = t.algebra_basis();
  std::swap(shuffled[0], shuffled[1]);
  EXPECT_THROW(TruncatedTriple("order", 4, 2, t.dirac(), shuffled, t.params()), InvalidInput);
  EXPECT_THROW(t.element(RealVector::Zero(3)), DimensionMismatch);
}

TEST(GeodesicFlow, UnitaryAndCommutesWithDirac) {
  for (const auto& t : {build_circle(4), build_fuzzy_sphere(3), build_lattice(0, 4)}) {
    const ComplexMatrix u = geodesic_flow_unitary(t, 0.7);
    const Index n = u.rows();
    EXPECT_LE(max_abs(u * u.adjoint() - ComplexMatrix::Identity(n, n)), 1e-12);
    EXPECT_LE(max_abs(commutator(t.dirac().matrix(), u)), 1e-12);
  }
}

TEST(CompressionIdentities, HoldOnRandomDiracsAndProjections) {
  gen::Rng rng(5);
  for (int t = 0; t < 60; ++t) {
    const Index n = gen::uniform_int(rng, 2, 9);
    const ComplexMatrix d = gen::hermitian(rng, n).matrix(), a = gen::hermitian(rng, n).matrix();
    const ComplexMatrix u = gen::unitary(rng, n);
    const Index r = gen::uniform_int(rng, 1, static_cast<int>(n));
    const ComplexMatrix p = u.leftCols(r) * u.leftCols(r).adjoint();
    EXPECT_LE(props::compression_commutator_residual(d, p, a), 1e-11);
    EXPECT_GE(props::truncated_compression_slack(d, p, a), -1e-10);
    // Spectral projection of D commutes with D.
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(d);
    const ComplexMatrix q = es.eigenvectors().leftCols(r) * es.eigenvectors().leftCols(r).adjoint();
    EXPECT_GE(props::spectral_compression_slack(d, q, a), -1e-10);
  }
}
