#pragma once

// Named invariant suites. Every suite is a list of named assertions; a run
// reports each one with its measured value and tolerance.

#include "specdist/experiments/io.hpp"
#include "specdist/oracles.hpp"
#include "specdist/properties.hpp"
#include "specdist/random.hpp"

#include <functional>
#include <map>

namespace specdist::verify {

using Json = nlohmann::json;

struct Check {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
};

struct Report {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<Check> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }

  void expect_near(std::string name, double measured, double expected, double tol) {
    checks.push_back({std::move(name), std::abs(measured - expected) <= tol, measured, expected, tol});
  }
  /// measured <= bound + tol
  void expect_le(std::string name, double measured, double bound, double tol) {
    checks.push_back({std::move(name), measured <= bound + tol, measured, bound, tol});
  }
  void expect_true(std::string name, bool ok) { checks.push_back({std::move(name), ok, ok ? 1.0 : 0.0, 1.0, 0.0}); }

  Json to_json() const {
    Json j;
    j["suite"] = suite;
    j["seed"] = seed;
    j["passed"] = passed();
    j["checks"] = checks.size();
    Json failures = Json::array();
    for (const auto& c : checks)
      if (!c.passed)
        failures.push_back({{"assertion", c.name},
                            {"measured", io::number_or_string(c.measured)},
                            {"expected", io::number_or_string(c.expected)},
                            {"tolerance", c.tolerance}});
    j["failures"] = failures;
    return j;
  }
};

struct Options {
  std::uint64_t seed = 1;
  double tolerance = 1e-7;
  bool corrupt_dirac = false;  // negative control: perturb the Dirac operator
};

namespace detail {

inline std::string pair_name(const std::string& prefix, long a, long b) {
  return prefix + "[" + std::to_string(a) + "," + std::to_string(b) + "]";
}

/// The lattice Dirac operator with the hop between sites k and k+1 doubled.
inline TriplePtr corrupted_lattice(std::int64_t lo, std::int64_t hi, std::int64_t k) {
  const TruncatedTriple base = build_lattice(lo, hi);
  ComplexMatrix d = base.dirac().matrix();
  const Index n = base.hilbert_dim(), i = static_cast<Index>(k - lo);
  d(n + i + 1, i) *= 2.0;
  d(i, n + i + 1) *= 2.0;
  return std::make_shared<const TruncatedTriple>(
      base.with_dirac(HermitianOperator(d), base.name() + "[corrupted]"));
}

}  // namespace detail

inline void lattice_closed_forms(Report& r, const Options& o) {
  const std::int64_t lo = 0, hi = 16;
  const TriplePtr lat = o.corrupt_dirac ? detail::corrupted_lattice(lo, hi, 5)
                                        : std::make_shared<const TruncatedTriple>(build_lattice(lo, hi));
  const DistanceEngine engine(lat);
  r.expect_true("lattice.lipschitz", engine.lipschitz());
  for (int m = 0; m <= 12; ++m)
    for (int n = m + 1; n <= 12; ++n) {
      const auto d = engine.distance(lattice_point(lat, m), lattice_point(lat, n), o.tolerance);
      r.expect_near(detail::pair_name("lattice.point_distance", m, n), d.primal_value, n - m, 1e-6);
    }
  gen::Rng rng(o.seed);
  const Index size = hi - lo + 1;
  for (int t = 0; t < 10; ++t) {
    const LatticeDistribution p(lo, gen::probability(rng, size)), q(lo, gen::probability(rng, size));
    const auto d = engine.distance(lattice_state(lat, p), lattice_state(lat, q), o.tolerance);
    r.expect_near("lattice.wasserstein[" + std::to_string(t) + "]", d.primal_value, oracle::lattice_wasserstein(p, q),
                  1e-6);
    const std::int64_t site = gen::uniform_int(rng, 0, static_cast<int>(hi));
    const auto dp = engine.distance(lattice_state(lat, p), lattice_point(lat, site), o.tolerance);
    r.expect_near("lattice.moment[" + std::to_string(t) + "]", dp.primal_value, moment1(p, site).value, 1e-6);
  }
}

inline void flip_discrete(Report& r, const Options& o) {
  for (double lambda : {0.5, 1.0, 4.0}) {
    TriplePtr flip = std::make_shared<const TruncatedTriple>(build_flip(5, lambda, 0));
    if (o.corrupt_dirac) {
      ComplexMatrix d = flip->dirac().matrix();
      d(1, 6) *= 3.0;
      d(6, 1) *= 3.0;
      flip = std::make_shared<const TruncatedTriple>(flip->with_dirac(HermitianOperator(d), "flip[corrupted]"));
    }
    const DistanceEngine engine(flip);
    for (int x = 0; x < 5; ++x)
      for (int y = x + 1; y < 5; ++y) {
        const auto d = engine.distance(flip_point(flip, x), flip_point(flip, y), o.tolerance);
        const double expected = (x == 0 ? 1.0 : 2.0) / lambda;
        r.expect_near(detail::pair_name("flip.distance[lambda=" + io::format_number(lambda) + "]", x, y),
                      d.primal_value, expected, 1e-6);
        r.expect_le("flip.minimal_length", 1.0 / lambda, d.primal_value, 1e-6);
      }
  }
}

inline void commutator_identity(Report& r, const Options& o) {
  gen::Rng rng(o.seed);
  const int big = 8, small = 3;
  const TruncatedTriple ambient = build_circle(big);
  const Index n = ambient.hilbert_dim();
  ComplexMatrix d = ambient.dirac().matrix();
  if (o.corrupt_dirac) d = gen::hermitian(rng, n).matrix();
  ComplexMatrix p = ComplexMatrix::Zero(n, n);
  for (Index i = big - small; i <= big + small; ++i) p(i, i) = 1.0;
  for (int t = 0; t < 100; ++t) {
    const ComplexMatrix a = gen::hermitian(rng, n).matrix();
    r.expect_near("commutator.identity[" + std::to_string(t) + "]",
                  props::compression_commutator_residual(d, p, a), 0.0, 1e-10 * std::max(1.0, max_abs(a) * max_abs(d)));
    // P is a spectral projection of the circle Dirac operator, so the
    // correction term vanishes: [PDP, PaP] = P[D, a]P.
    r.expect_near("commutator.spectral[" + std::to_string(t) + "]",
                  max_abs(commutator(p * d * p, p * a * p) - p * commutator(d, a) * p), 0.0,
                  1e-10 * std::max(1.0, max_abs(a) * max_abs(d)));
  }
}

inline void seminorm_inequalities(Report& r, const Options& o) {
  gen::Rng rng(o.seed);
  const int big = 8, small = 3;
  const TruncatedTriple ambient = build_circle(big);
  const Index n = ambient.hilbert_dim();
  const ComplexMatrix d = ambient.dirac().matrix();
  ComplexMatrix p = ComplexMatrix::Zero(n, n);
  for (Index i = big - small; i <= big + small; ++i) p(i, i) = 1.0;
  for (int t = 0; t < 100; ++t) {
    const ComplexMatrix a = gen::hermitian(rng, n).matrix();
    r.expect_le("seminorm.spectral_projection[" + std::to_string(t) + "]", 0.0,
                props::spectral_compression_slack(d, p, a), 1e-10);
  }
  for (int t = 0; t < 100; ++t) {
    const Index dim = gen::uniform_int(rng, 2, 12);
    const ComplexMatrix dd = gen::hermitian(rng, dim).matrix();
    const ComplexMatrix pp = gen::coordinate_projection(rng, dim, gen::uniform_int(rng, 1, static_cast<int>(dim)));
    const ComplexMatrix a = gen::hermitian(rng, dim).matrix();
    r.expect_le("seminorm.any_projection[" + std::to_string(t) + "]", 0.0, props::truncated_compression_slack(dd, pp, a),
                1e-10);
  }
  for (int t = 0; t < 20; ++t) {
    const Index dim = gen::uniform_int(rng, 2, 10);
    r.expect_near("seminorm.rank_one_variance[" + std::to_string(t) + "]",
                  props::rank_one_variance_residual(gen::real_vector(rng, dim), gen::unit_vector(rng, dim)), 0.0,
                  1e-10);
  }
}

inline void fejer_identity(Report& r, const Options& o) {
  gen::Rng rng(o.seed);
  for (int t = 0; t < 20; ++t) {
    const int n = gen::uniform_int(rng, 1, 16);
    const int degree = gen::uniform_int(rng, 1, 2 * n);
    const double x = gen::uniform(rng, -kPi, kPi);
    const ComplexVector f = gen::real_trig_polynomial(rng, degree);
    const TriplePtr circle = std::make_shared<const TruncatedTriple>(build_circle(n));
    const State s = fejer_state(circle, n, x);
    const double measured = s.evaluate(HermitianOperator(toeplitz_compression(n, f)));
    Complex expected = 0.0;
    for (int k = -std::min(n, degree); k <= std::min(n, degree); ++k)
      expected += (1.0 - std::abs(k) / double(n + 1)) * f(k + degree) * std::exp(kI * (k * x));
    r.expect_near("fejer.weighted_sum[" + std::to_string(t) + "]", measured, expected.real(), 1e-12);
  }
}

inline void su2_relations(Report& r, const Options&) {
  for (int two_ell = 1; two_ell <= 8; ++two_ell)
    r.expect_near("su2.relations[2l=" + std::to_string(two_ell) + "]", props::su2_residual(two_ell), 0.0, 1e-12);
}

inline void operator_core(Report& r, const Options& o) {
  gen::Rng rng(o.seed);
  for (int t = 0; t < 20; ++t) {
    const Index n = gen::uniform_int(rng, 1, 10);
    const ComplexMatrix a = gen::complex_matrix(rng, n, n), b = gen::complex_matrix(rng, n, n);
    const double na = spectral_norm(a);
    const std::string k = "[" + std::to_string(t) + "]";
    r.expect_near("norm.routes_agree" + k, na, spectral_norm_gram(a), 1e-10 * std::max(1.0, na));
    r.expect_le("norm.triangle" + k, spectral_norm(a + b), na + spectral_norm(b), 1e-9);
    r.expect_near("norm.homogeneous" + k, spectral_norm(-2.5 * a), 2.5 * na, 1e-9 * std::max(1.0, na));
    r.expect_near("norm.unitary_invariant" + k, spectral_norm(gen::unitary(rng, n) * a * gen::unitary(rng, n)), na,
                  1e-9 * std::max(1.0, na));
  }
}

using SuiteFn = std::function<void(Report&, const Options&)>;

inline const std::map<std::string, SuiteFn>& suites() {
  static const std::map<std::string, SuiteFn> table{
      {"lattice-closed-forms", lattice_closed_forms},
      {"flip-discrete", flip_discrete},
      {"commutator-identity", commutator_identity},
      {"seminorm-inequalities", seminorm_inequalities},
      {"fejer-identity", fejer_identity},
      {"su2-relations", su2_relations},
      {"operator-core", operator_core},
  };
  return table;
}

inline bool known_suite(const std::string& name) { return name == "all" || suites().count(name) > 0; }

/// Runs one suite (or "all"); throws InvalidInput for unknown names.
inline Report run(const std::string& name, const Options& o) {
  if (!known_suite(name)) throw InvalidInput("unknown verify suite '" + name + "'");
  Report r;
  r.suite = name;
  r.seed = o.seed;
  if (name == "all") {
    for (const auto& [_, fn] : suites()) fn(r, o);
  } else {
    suites().at(name)(r, o);
  }
  return r;
}

}  // namespace specdist::verify
