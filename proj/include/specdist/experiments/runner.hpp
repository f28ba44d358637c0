#pragma once

// Experiment drivers behind the command-line front end. Each returns data
// (JSON records or CSV tables) plus whether every solve closed its gap;
// printing and exit codes are left to the caller.

#include "specdist/experiments/config.hpp"

#include <chrono>

namespace specdist::run {

using Json = nlohmann::json;

/// Closed-form reference values that apply to a pair of configured states.
struct PairOracle {
  std::optional<double> oracle;     // exact value when one is known
  std::optional<double> geodesic;   // classical distance of the underlying points
  std::optional<double> rho_lower;  // circle bounds
  std::optional<double> rho_upper;
};

inline PairOracle pair_oracle(const TruncatedTriple& t, const Json& s1, const Json& s2, const State& a,
                              const State& b) {
  PairOracle o;
  const std::string k1 = s1.value("type", ""), k2 = s2.value("type", "");
  if (const auto* lp = std::get_if<LatticeParams>(&t.params()); lp && !lp->derivative_variant) {
    auto dist = [&](const State& s) {
      RealVector p = s.rho().matrix().diagonal().real().cwiseMax(0.0);
      return LatticeDistribution(lp->window_min, p / p.sum());
    };
    o.oracle = oracle::lattice_wasserstein(dist(a), dist(b));
  } else if (const auto* fp = std::get_if<FlipParams>(&t.params()); fp && k1 == "flip_point" && k2 == "flip_point") {
    const int x = s1.at("point").get<int>(), y = s2.at("point").get<int>();
    o.oracle = x == y ? 0.0 : ((x == fp->base || y == fp->base) ? 1.0 : 2.0) / fp->lambda;
  } else if (const auto* cp = std::get_if<CircleParams>(&t.params()); cp && k1 == "fejer" && k2 == "fejer") {
    const double x = s1.at("x").get<double>(), y = s2.at("x").get<double>();
    const int n1 = s1.value("n", cp->cutoff), n2 = s2.value("n", cp->cutoff);
    o.geodesic = oracle::geodesic_circle(x, y);
    if (n1 == n2 && n1 >= 1) {
      o.rho_lower = oracle::rho_lower(n1, *o.geodesic);
      o.rho_upper = oracle::rho_upper(n1, *o.geodesic);
    }
  } else if (std::holds_alternative<MoyalParams>(t.params()) && k1 == "coherent" && k2 == "coherent") {
    const auto z1 = s1.at("z").get<std::vector<double>>(), z2 = s2.at("z").get<std::vector<double>>();
    o.geodesic = oracle::geodesic_plane({z1[0], z1[1]}, {z2[0], z2[1]});
  } else if (std::holds_alternative<FuzzySphereParams>(t.params()) && k1 == "bloch" && k2 == "bloch") {
    o.geodesic = oracle::geodesic_sphere(s1.at("polar").get<double>(), s1.at("azimuth").get<double>(),
                                         s2.at("polar").get<double>(), s2.at("azimuth").get<double>());
  }
  return o;
}

inline Json oracle_to_json(const PairOracle& o) {
  Json j = Json::object();
  if (o.oracle) j["oracle"] = *o.oracle;
  if (o.geodesic) j["geodesic"] = *o.geodesic;
  if (o.rho_lower) j["rho_lower"] = *o.rho_lower;
  if (o.rho_upper) j["rho_upper"] = *o.rho_upper;
  return j;
}

struct DistanceRun {
  DistanceResult result;
  PairOracle oracle;
  Json record;
  bool closed() const { return result.status != DistanceStatus::gap_not_closed; }
};

inline DistanceRun distance(const config::RunConfig& c) {
  if (c.states.size() != 2) throw config::ConfigError("distance: exactly two states are required");
  const TriplePtr triple = config::build_geometry(c.geometry);
  const State a = config::build_state(c.states[0], triple), b = config::build_state(c.states[1], triple);
  DistanceRun out;
  out.result = DistanceEngine(triple).distance(a, b, c.tolerance);
  out.oracle = pair_oracle(*triple, c.states[0], c.states[1], a, b);
  out.record = io::result_to_json(out.result);
  out.record["geometry"] = io::geometry_descriptor(*triple);
  out.record["tolerance"] = c.tolerance;
  out.record["reference"] = oracle_to_json(out.oracle);
  return out;
}

struct TableRun {
  io::Table table;
  bool all_closed = true;
};

inline const std::vector<std::string>& sweep_header() {
  static const std::vector<std::string> h{"parameter", "value",  "status",   "primal",    "dual",     "gap",
                                          "iterations", "lipschitz_norm", "oracle", "geodesic", "rho_lower",
                                          "rho_upper"};
  return h;
}

/// One record per sweep value, solved concurrently up to c.jobs and written
/// in sweep order. Wall time is appended only with `timing` so that default
/// output is byte-identical across runs.
inline TableRun sweep(const config::RunConfig& c, bool timing = false) {
  if (!c.sweep) throw config::ConfigError("sweep: missing 'sweep' section");
  const auto& values = c.sweep->values;
  std::vector<DistanceRun> runs(values.size());
  std::vector<double> seconds(values.size(), 0.0);
  detail::parallel_for(values.size(), c.jobs, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    runs[i] = distance(config::substitute(c, c.sweep->parameter, values[i]));
    seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });
  TableRun out;
  out.table.header = sweep_header();
  if (timing) out.table.header.push_back("wall_time_s");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& r = runs[i].result;
    const auto& o = runs[i].oracle;
    const io::Cell value = values[i].is_number() ? io::Cell(values[i].get<double>()) : io::Cell(values[i].dump());
    std::vector<io::Cell> row{c.sweep->parameter, value, to_string(r.status), r.primal_value, r.dual_value,
                              r.is_infinite() ? 0.0 : r.gap(), r.iterations, r.lipschitz_norm,
                              io::Cell::optional(o.oracle), io::Cell::optional(o.geodesic),
                              io::Cell::optional(o.rho_lower), io::Cell::optional(o.rho_upper)};
    if (timing) row.emplace_back(seconds[i]);
    out.table.rows.push_back(std::move(row));
    out.all_closed = out.all_closed && runs[i].closed();
  }
  return out;
}

/// Distances between every pair i < j of the configured states.
inline TableRun table(const config::RunConfig& c) {
  if (c.states.size() < 2) throw config::ConfigError("table: at least two states are required");
  const TriplePtr triple = config::build_geometry(c.geometry);
  std::vector<State> states;
  for (const auto& s : c.states) states.push_back(config::build_state(s, triple));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = i + 1; j < states.size(); ++j) pairs.emplace_back(i, j);
  const DistanceEngine engine(triple);
  std::vector<DistanceResult> results(pairs.size());
  detail::parallel_for(pairs.size(), c.jobs, [&](std::size_t k) {
    results[k] = engine.distance(states[pairs[k].first], states[pairs[k].second], c.tolerance);
  });
  TableRun out;
  out.table.header = {"i", "j", "status", "primal", "dual", "gap", "iterations", "oracle", "geodesic",
                      "rho_lower", "rho_upper"};
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    const auto& r = results[k];
    const PairOracle o = pair_oracle(*triple, c.states[i], c.states[j], states[i], states[j]);
    out.table.rows.push_back({static_cast<int>(i), static_cast<int>(j), to_string(r.status), r.primal_value,
                              r.dual_value, r.is_infinite() ? 0.0 : r.gap(), r.iterations,
                              io::Cell::optional(o.oracle), io::Cell::optional(o.geodesic),
                              io::Cell::optional(o.rho_lower), io::Cell::optional(o.rho_upper)});
    out.all_closed = out.all_closed && r.status != DistanceStatus::gap_not_closed;
  }
  return out;
}

/// Uniform angles 2 pi k / samples.
inline std::vector<double> uniform_angles(int samples) {
  std::vector<double> x(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) x[static_cast<std::size_t>(k)] = 2.0 * kPi * k / samples;
  return x;
}

struct HausdorffRow {
  int cutoff = 0;
  int partner = 0;
  double hausdorff = 0.0;
  double max_gap = 0.0;
  double geodesic_distortion = 0.0;  // sup |d_N - d_geo| on the cutoff-N grid
  bool closed = true;
};

/// Hausdorff distance between the Fejer grids {Psi_{x,N}} and {Psi_{x,N'}}
/// (N' = 2N, or N' = N for "self" pairing) on the circle truncation of size
/// max(N, N'), plus the distortion of the N-grid against the geodesic metric.
inline HausdorffRow hausdorff_row(int cutoff, const config::HausdorffSpec& spec, double tol, int jobs) {
  if (cutoff < 1) throw config::ConfigError("hausdorff: cutoffs must be >= 1");
  HausdorffRow row;
  row.cutoff = cutoff;
  row.partner = spec.pairing == "self" ? cutoff : 2 * cutoff;
  const auto xs = uniform_angles(spec.samples);
  const TriplePtr ambient = std::make_shared<const TruncatedTriple>(build_circle(row.partner));
  std::vector<State> a, b;
  for (double x : xs) {
    a.push_back(fejer_state(ambient, cutoff, x));
    b.push_back(fejer_state(ambient, row.partner, x));
  }
  // Equispaced Fejer grids are orbits of diag(e^{2 pi i k / samples}), which commutes with D.
  const HausdorffResult h = hausdorff(a, b, ambient, tol, jobs, spec.rotation);
  row.hausdorff = h.value;
  row.max_gap = h.pairs.max_gap;
  row.closed = h.pairs.all_closed;

  const TriplePtr own = std::make_shared<const TruncatedTriple>(build_circle(cutoff));
  std::vector<State> grid;
  for (double x : xs) grid.push_back(fejer_state(own, cutoff, x));
  const DistanceEngine own_engine(own);
  const PairwiseDistances self = spec.rotation ? circulant_distances(own_engine, grid, grid, tol, jobs)
                                               : pairwise_distances(own_engine, grid, grid, tol, jobs);
  RealMatrix geo(self.value.rows(), self.value.cols());
  for (Index i = 0; i < geo.rows(); ++i)
    for (Index j = 0; j < geo.cols(); ++j)
      geo(i, j) = oracle::geodesic_circle(xs[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(j)]);
  row.geodesic_distortion = correspondence_distortion(self.value, geo);
  row.max_gap = std::max(row.max_gap, self.max_gap);
  row.closed = row.closed && self.all_closed;
  return row;
}

inline TableRun hausdorff(const config::RunConfig& c) {
  TableRun out;
  out.table.header = {"cutoff", "partner_cutoff", "samples", "hausdorff", "max_gap", "geodesic_distortion"};
  for (int n : c.hausdorff.cutoffs) {
    const HausdorffRow r = hausdorff_row(n, c.hausdorff, c.tolerance, c.jobs);
    out.table.rows.push_back({r.cutoff, r.partner, c.hausdorff.samples, r.hausdorff, r.max_gap,
                              r.geodesic_distortion});
    out.all_closed = out.all_closed && r.closed;
  }
  return out;
}

/// Re-validates a sweep CSV: every finite row must satisfy primal <= dual + tol.
inline bool validate_sweep_csv(std::istream& is, double tol, std::string* why = nullptr) {
  const auto [header, rows] = io::read_csv(is);
  const auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InvalidInput("sweep CSV: missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ip = col("primal"), id = col("dual"), is_ = col("status");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      if (why) *why = "row " + std::to_string(r) + " has the wrong number of cells";
      return false;
    }
    if (rows[r][is_] == "infinite") continue;
    const double p = io::parse_number(rows[r][ip]), d = io::parse_number(rows[r][id]);
    if (!(p <= d + tol)) {
      if (why) *why = "row " + std::to_string(r) + ": primal exceeds dual";
      return false;
    }
  }
  return true;
}

}  // namespace specdist::run
