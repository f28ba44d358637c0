// Acceptance run: one PASS/FAIL line per criterion plus the Hausdorff ladder.
//
//   acceptance [--expect-red LIST] [--jobs J]
//
// Without --expect-red the exit status is 0 iff every line passes. With
// --expect-red 2,5 it is 0 iff exactly the listed criteria fail, so known
// red lines stay visible without masking regressions elsewhere.

#include "specdist/experiments/runner.hpp"
#include "specdist/properties.hpp"
#include "specdist/random.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <set>
#include <thread>

using namespace specdist;

namespace {

// Tolerances, pinned.
constexpr double kSolveTol = 1e-7;          // duality gap requested from every solve
constexpr double kLatticeErr = 1e-6;        // criteria 1, 3
constexpr double kVariantErr = 1e-5;        // criterion 2
constexpr double kFlipErr = 1e-8;           // criterion 4
constexpr double kFlipTol = 1e-9;           // solve tolerance used for criterion 4
constexpr double kSandwichSlack = 1e-6;     // criterion 5
constexpr double kCircle32Bound = 0.035;    // criterion 5: |d_32(pi/2) - pi/2|, recorded before the run
constexpr double kFejerErr = 1e-12;         // criterion 6
constexpr double kMoyal40Bound = 5e-8;      // criterion 7: 1 - d at n_max = 40, recorded before the run
constexpr double kSu2Err = 1e-12;           // criterion 8a
constexpr double kAzimuthErr = 2e-6;        // criterion 8b
constexpr double kBerezinRel = 1e-12;       // criterion 8c, relative
constexpr double kIdentityErr = 1e-10;      // criterion 9
constexpr double kTruncTol = 1e-11;         // solve tolerance used for criterion 10
constexpr double kTruncTarget = 1e-3;       // criterion 10
constexpr double kGapMax = 1e-6;            // criterion 12
constexpr double kLipschitzMax = 1.0 + 1e-8;  // criterion 12

using Clock = std::chrono::steady_clock;

TriplePtr share(TruncatedTriple t) { return std::make_shared<const TruncatedTriple>(std::move(t)); }

struct Line {
  std::string id;
  bool pass = false;
  std::string detail;
};

/// Every finite solve made by criteria 1-11, for criterion 12.
struct Audit {
  int solves = 0;
  double worst_gap = 0.0;
  double worst_lipschitz = 0.0;
  std::string worst_gap_at, worst_lipschitz_at;

  DistanceResult record(DistanceResult r, const std::string& where) {
    if (r.is_infinite()) return r;
    ++solves;
    if (r.gap() > worst_gap || r.status == DistanceStatus::gap_not_closed) {
      worst_gap = std::max(worst_gap, r.gap());
      worst_gap_at = where;
    }
    if (r.lipschitz_norm > worst_lipschitz) {
      worst_lipschitz = r.lipschitz_norm;
      worst_lipschitz_at = where;
    }
    return r;
  }
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Line lattice_closed_forms(Audit& audit) {
  const auto t0 = Clock::now();
  const auto t = share(build_lattice(0, 16));
  const DistanceEngine e(t);
  double worst = 0.0;
  int pairs = 0;
  for (int m = 0; m <= 12; ++m)
    for (int n = m + 1; n <= 12; ++n) {
      const auto r = audit.record(e.distance(lattice_point(t, m), lattice_point(t, n), kSolveTol), "1");
      worst = std::max(worst, std::abs(r.value() - (n - m)));
      ++pairs;
    }
  const double secs = seconds_since(t0);
  return {"1", worst <= kLatticeErr && secs < 30.0,
          fmt("lattice [0,16], %d pairs: max |d - |m-n|| = %.2e (tol %.0e), %.2f s (limit 30 s)", pairs, worst,
              kLatticeErr, secs)};
}

Line lattice_variant(Audit& audit) {
  const auto t = share(build_lattice_variant(0, 20));
  const DistanceEngine e(t);
  double worst = 0.0;
  std::string values;
  for (int k = 1; k <= 4; ++k) {
    const double expected = k % 2 == 1 ? k + 1.0 : std::sqrt(double(k) * (k + 1));
    const auto r = audit.record(e.distance(lattice_point(t, 8), lattice_point(t, 8 + k), kSolveTol), "2");
    worst = std::max(worst, std::abs(r.value() - expected));
    values += fmt(" k=%d: %.6f vs %.6f;", k, r.value(), expected);
  }
  return {"2", worst <= kVariantErr,
          fmt("difference operator on [0,20], sites 8..12:%s max error %.3e (tol %.0e)", values.c_str(), worst,
              kVariantErr)};
}

Line lattice_mixed(Audit& audit) {
  gen::Rng rng(2024);
  const auto t = share(build_lattice(0, 16));
  const DistanceEngine e(t);
  double worst_w = 0.0, worst_m = 0.0;
  for (int k = 0; k < 50; ++k) {
    const LatticeDistribution p(0, gen::probability(rng, 17)), q(0, gen::probability(rng, 17));
    const auto r = audit.record(e.distance(lattice_state(t, p), lattice_state(t, q), kSolveTol), "3");
    worst_w = std::max(worst_w, std::abs(r.value() - oracle::lattice_wasserstein(p, q)));
    const int n = gen::uniform_int(rng, 0, 16);
    const auto s = audit.record(e.distance(lattice_state(t, p), lattice_point(t, n), kSolveTol), "3");
    worst_m = std::max(worst_m, std::abs(s.value() - moment1(p, n).value));
  }
  return {"3", worst_w <= kLatticeErr && worst_m <= kLatticeErr,
          fmt("50 random pairs on [0,16]: max |d - W1| = %.2e, max |d(phi, delta_n) - sum |k-n| p_k| = %.2e (tol %.0e)",
              worst_w, worst_m, kLatticeErr)};
}

Line flip(Audit& audit) {
  double worst_far = 0.0, worst_base = 0.0, min_ratio = std::numeric_limits<double>::infinity();
  for (double lambda : {0.5, 1.0, 4.0}) {
    const int m = 5;
    const auto t = share(build_flip(m, lambda, 0));
    const DistanceEngine e(t);
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        const auto r = audit.record(e.distance(flip_point(t, i), flip_point(t, j), kFlipTol), "4");
        if (i == 0) worst_base = std::max(worst_base, std::abs(r.value() - 1.0 / lambda));
        else worst_far = std::max(worst_far, std::abs(r.value() - 2.0 / lambda));
        min_ratio = std::min(min_ratio, r.dual_value * lambda);
      }
  }
  return {"4", worst_far <= kFlipErr && worst_base <= kFlipErr && min_ratio >= 1.0 - kFlipErr,
          fmt("Lambda in {0.5,1,4}, 5 points, base x0 = 0: max |d - 2/Lambda| over pairs away from x0 = %.2e; "
              "max |d - 1/Lambda| for pairs (x0, y) = %.2e (tol %.0e); min d*Lambda = %.9f (>= 1)",
              worst_far, worst_base, kFlipErr, min_ratio)};
}

Line circle_sandwich(Audit& audit, int jobs) {
  const std::vector<int> cutoffs{1, 2, 4, 8, 16};
  double worst_low = std::numeric_limits<double>::infinity(), worst_high = std::numeric_limits<double>::infinity();
  for (int n : cutoffs) {
    const auto t = share(build_circle(n));
    const DistanceEngine e(t);
    std::vector<DistanceResult> rs(32);
    detail::parallel_for(32, jobs, [&](std::size_t k) {
      const double x = kPi * double(k + 1) / 32.0;
      rs[k] = e.distance(fejer_state(t, n, x), fejer_state(t, n, 0.0), kSolveTol);
    });
    for (std::size_t k = 0; k < 32; ++k) {
      const double x = kPi * double(k + 1) / 32.0;
      const auto r = audit.record(rs[k], "5");
      worst_low = std::min(worst_low, r.value() - (oracle::rho_lower(n, x) - kSandwichSlack));
      worst_high = std::min(worst_high, std::min(oracle::rho_upper(n, x), x) + kSandwichSlack - r.value());
    }
  }
  const auto t32 = share(build_circle(32));
  const auto r32 =
      audit.record(DistanceEngine(t32).distance(fejer_state(t32, 32, kPi / 2), fejer_state(t32, 32, 0.0), kSolveTol),
                   "5");
  const double dev = std::abs(r32.value() - kPi / 2);
  return {"5", worst_low >= 0.0 && worst_high >= 0.0 && dev <= kCircle32Bound,
          fmt("N in {1,2,4,8,16} x 32 separations: min margin above rho_N - 1e-6 = %.3e, below min(rho'_N, x) + 1e-6 "
              "= %.3e; N=32, x=pi/2: d = %.6f, |d - pi/2| = %.4f (recorded bound %.3f)",
              worst_low, worst_high, r32.value(), dev, kCircle32Bound)};
}

Line fejer_identity() {
  gen::Rng rng(6);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int n = gen::uniform_int(rng, 1, 16), degree = gen::uniform_int(rng, 1, 2 * n);
    const double x = gen::uniform(rng, -kPi, kPi);
    const auto t = share(build_circle(n));
    const ComplexVector f = gen::real_trig_polynomial(rng, degree);
    const double got = fejer_state(t, n, x).evaluate(HermitianOperator(toeplitz_compression(n, f)));
    Complex want = 0.0;
    for (int j = -degree; j <= degree; ++j) {
      if (std::abs(j) > n) continue;
      want += (1.0 - std::abs(j) / double(n + 1)) * f(j + degree) * std::exp(kI * (double(j) * x));
    }
    worst = std::max(worst, std::abs(got - want.real()));
  }
  return {"6", worst <= kFejerErr,
          fmt("20 random trigonometric polynomials, N <= 16: max |Psi(pi_N f) - sum (1-|k|/(N+1)) f_k e^{ikx}| = %.2e "
              "(tol %.0e)",
              worst, kFejerErr)};
}

Line moyal(Audit& audit) {
  std::vector<double> d;
  for (int n_max : {10, 20, 40}) {
    const auto t = share(build_moyal(1.0, n_max));
    const auto r = audit.record(
        DistanceEngine(t).distance(moyal_coherent(t, {0.0, 0.0}), moyal_coherent(t, {1.0, 0.0}), kSolveTol), "7");
    d.push_back(r.value());
  }
  const bool increasing = d[0] < d[1] && d[1] < d[2];
  const double gap40 = std::abs(1.0 - d[2]);
  return {"7", increasing && gap40 <= kMoyal40Bound,
          fmt("theta=1, z=0 vs 1: d(10) = %.10f, d(20) = %.10f, d(40) = %.10f, increasing = %s; |1 - d(40)| = %.2e "
              "(recorded bound %.0e)",
              d[0], d[1], d[2], increasing ? "yes" : "no", gap40, kMoyal40Bound)};
}

Line fuzzy_sphere(Audit& audit) {
  double su2 = 0.0;
  for (int two_ell = 1; two_ell <= 8; ++two_ell) su2 = std::max(su2, props::su2_residual(two_ell));
  double azimuth = 0.0;
  bool all_finite = true;
  int pairs = 0;
  for (int two_ell = 1; two_ell <= 4; ++two_ell) {
    const auto t = share(build_fuzzy_sphere(two_ell));
    const DistanceEngine e(t);
    const State north = bloch_coherent(t, 0.0, 0.0);
    for (double polar : {0.6, 1.4, 2.3, kPi}) {
      const double base = audit.record(e.distance(north, bloch_coherent(t, polar, 0.0), kSolveTol), "8").value();
      all_finite = all_finite && std::isfinite(base);
      ++pairs;
      for (double az : {0.9, 2.1, -2.7}) {
        const auto r = audit.record(e.distance(north, bloch_coherent(t, polar, az), kSolveTol), "8");
        all_finite = all_finite && !r.is_infinite() && std::isfinite(r.value());
        azimuth = std::max(azimuth, std::abs(r.value() - base));
        ++pairs;
      }
      // equal polar angle, both points off the pole
      const auto a = audit.record(e.distance(bloch_coherent(t, 1.0, 0.0), bloch_coherent(t, polar, 0.0), kSolveTol), "8");
      const auto b = audit.record(e.distance(bloch_coherent(t, 1.0, 1.7), bloch_coherent(t, polar, 1.7), kSolveTol), "8");
      azimuth = std::max(azimuth, std::abs(a.value() - b.value()));
      pairs += 2;
    }
  }
  double berezin = 0.0;
  for (int two_ell = 1; two_ell <= 40; ++two_ell) {
    const int gamma = two_ell + 1;
    double binom = 1.0;
    for (int k = 1; k <= gamma; ++k) binom = binom * (gamma + k) / k;
    const double closed = kPi / std::ldexp(1.0, gamma + 2) * binom;
    berezin = std::max(berezin, std::abs(oracle::berezin_sphere_bound(two_ell) - closed) / closed);
  }
  return {"8", su2 <= kSu2Err && azimuth <= kAzimuthErr && all_finite && berezin <= kBerezinRel,
          fmt("(a) su(2) residual for l <= 4: %.2e (tol %.0e); (b) max azimuth spread over %d pairs, 2l <= 4: %.2e "
              "(tol %.0e); (c) all finite incl. antipodes: %s; Berezin coefficient vs exact binomial, l <= 20: rel "
              "%.2e (tol %.0e)",
              su2, kSu2Err, pairs, azimuth, kAzimuthErr, all_finite ? "yes" : "no", berezin, kBerezinRel)};
}

Line seminorms() {
  gen::Rng rng(9);
  double identity = 0.0, spectral = std::numeric_limits<double>::infinity(),
         truncated = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 100; ++t) {
    const Index n = gen::uniform_int(rng, 2, 10);
    const ComplexMatrix d = gen::hermitian(rng, n).matrix(), a = gen::hermitian(rng, n).matrix();
    const ComplexMatrix u = gen::unitary(rng, n);
    const Index r = gen::uniform_int(rng, 1, static_cast<int>(n));
    const ComplexMatrix p = u.leftCols(r) * u.leftCols(r).adjoint();
    identity = std::max(identity, props::compression_commutator_residual(d, p, a) / std::max(1.0, max_abs(d) * max_abs(a)));
    truncated = std::min(truncated, props::truncated_compression_slack(d, p, a));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(d);
    const ComplexMatrix q = es.eigenvectors().leftCols(r) * es.eigenvectors().leftCols(r).adjoint();
    spectral = std::min(spectral, props::spectral_compression_slack(d, q, a));
  }
  return {"9", identity <= kIdentityErr && spectral >= -kIdentityErr && truncated >= -kIdentityErr,
          fmt("100 instances each: commutator identity residual %.2e (tol %.0e); min L_D(a) - L_P(PaP) with [D,P]=0: "
              "%.3e; min L_P(a) - L_P(PaP): %.3e (both >= -%.0e)",
              identity, kIdentityErr, spectral, truncated, kIdentityErr)};
}

Line truncation(Audit& audit) {
  const int window = 64;
  const auto t = share(build_lattice(0, window));
  const DistanceEngine e(t);
  RealVector p(window + 1);
  for (int n = 0; n <= window; ++n) p(n) = std::ldexp(1.0, -(n + 1));
  p /= p.sum();
  const LatticeDistribution dist(0, p);
  const State phi = lattice_state(t, dist);
  std::vector<double> d, oracle_d;
  double worst = 0.0;
  for (int cut : {2, 4, 8, 16, 32}) {
    ComplexMatrix proj = ComplexMatrix::Zero(window + 1, window + 1);
    proj.topLeftCorner(cut + 1, cut + 1).setIdentity();
    const TruncatedState ts = truncate_state(phi, HermitianOperator(proj), t);
    const auto r = audit.record(e.distance(phi, ts.state, kTruncTol), "10");
    RealVector q = RealVector::Zero(window + 1);
    q.head(cut + 1) = p.head(cut + 1) / p.head(cut + 1).sum();
    oracle_d.push_back(oracle::lattice_wasserstein(dist, LatticeDistribution(0, q)));
    d.push_back(r.value());
    worst = std::max(worst, std::abs(d.back() - oracle_d.back()));
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < d.size(); ++k) decreasing = decreasing && d[k] < d[k - 1];
  return {"10", decreasing && d.back() < kTruncTarget && worst <= kLatticeErr,
          fmt("geometric p_n ~ 2^-(n+1) on [0,64], N = 2,4,8,16,32: d = %.3e, %.3e, %.3e, %.3e, %.3e; decreasing = "
              "%s; d(32) < %.0e; max |d - W1 oracle| = %.2e",
              d[0], d[1], d[2], d[3], d[4], decreasing ? "yes" : "no", kTruncTarget, worst)};
}

Line finite_rank(Audit& audit) {
  std::vector<double> d;
  for (int m : {8, 16, 32, 64}) {
    const auto t = share(build_finite_rank_grid(m));
    d.push_back(audit.record(DistanceEngine(t).distance(basis_state(t, 0), basis_state(t, m / 2), kSolveTol), "11")
                    .value());
  }
  bool increasing = true;
  for (std::size_t k = 1; k < d.size(); ++k) increasing = increasing && d[k] > d[k - 1];
  return {"11", increasing,
          fmt("rank-2 Dirac, d(delta_0, delta_{m/2}) for m = 8,16,32,64: %.6f, %.6f, %.6f, %.6f; strictly increasing "
              "= %s",
              d[0], d[1], d[2], d[3], increasing ? "yes" : "no")};
}

Line certificates(const Audit& a) {
  return {"12", a.worst_gap <= kGapMax && a.worst_lipschitz <= kLipschitzMax,
          fmt("%d finite solves: max gap %.2e (at criterion %s, limit %.0e); max ||[D, a (x) I]|| = %.12f (at "
              "criterion %s, limit 1 + 1e-8)",
              a.solves, a.worst_gap, a.worst_gap_at.c_str(), kGapMax, a.worst_lipschitz, a.worst_lipschitz_at.c_str())};
}

Line hausdorff_ladder(int jobs) {
  config::HausdorffSpec spec;
  spec.samples = 16;
  spec.cutoffs = {4, 8, 16};
  std::vector<double> h;
  std::string values;
  bool closed = true;
  for (int n : spec.cutoffs) {
    const auto row = run::hausdorff_row(n, spec, kSolveTol, jobs);
    h.push_back(row.hausdorff);
    closed = closed && row.closed;
    values += fmt(" N=%d: d_H = %.6f, geodesic distortion %.4f;", n, row.hausdorff, row.geodesic_distortion);
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < h.size(); ++k) decreasing = decreasing && h[k] < h[k - 1];
  return {"H", decreasing && closed,
          fmt("Fejer grids, 16 samples, N vs 2N:%s strictly decreasing = %s", values.c_str(), decreasing ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance run"};
  std::vector<std::string> expect_red;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--expect-red", expect_red, "criteria expected to fail")->delimiter(',');
  app.add_option("--jobs", jobs, "concurrent solves")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  Audit audit;
  std::vector<Line> lines;
  auto t0 = Clock::now();
  auto emit = [&](Line l) {
    std::printf("[%s] %-2s %s [%.1f s]\n", l.pass ? "PASS" : "FAIL", l.id.c_str(), l.detail.c_str(), seconds_since(t0));
    t0 = Clock::now();
    std::fflush(stdout);
    lines.push_back(std::move(l));
  };
  emit(lattice_closed_forms(audit));
  emit(lattice_variant(audit));
  emit(lattice_mixed(audit));
  emit(flip(audit));
  emit(circle_sandwich(audit, jobs));
  emit(fejer_identity());
  emit(moyal(audit));
  emit(fuzzy_sphere(audit));
  emit(seminorms());
  emit(truncation(audit));
  emit(finite_rank(audit));
  emit(certificates(audit));
  emit(hausdorff_ladder(jobs));

  std::set<std::string> red, expected(expect_red.begin(), expect_red.end());
  for (const auto& l : lines)
    if (!l.pass) red.insert(l.id);
  std::printf("failed: %zu of %zu", red.size(), lines.size());
  if (!expected.empty()) std::printf(" (expected red: %zu)", expected.size());
  std::printf("\n");
  return red == expected ? 0 : 1;
}
