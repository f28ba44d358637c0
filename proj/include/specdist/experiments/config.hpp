#pragma once

// Run configuration: a JSON document with a `config_version` field.
//
//   {
//     "config_version": 1,
//     "experiment": "distance" | "sweep" | "table" | "hausdorff" | "verify",
//     "geometry": { "kind": "lattice", "window": [0, 10] },
//     "states": [ { "type": "lattice_point", "site": 2 }, ... ],
//     "sweep": { "parameter": "/geometry/cutoff", "values": [1, 2, 4] },
//     "hausdorff": { "samples": 16, "cutoffs": [4, 8, 16], "pairing": "double", "rotation": true },
//     "suite": "lattice-closed-forms",
//     "tolerance": 1e-7, "seed": 1, "jobs": 1, "output": "out.csv"
//   }
//
// Geometry kinds and their keys:
//   lattice, lattice_variant   window: [min, max]
//   circle                     cutoff, full_matrix_algebra (optional)
//   moyal                      theta, n_max
//   fuzzy_sphere               two_ell
//   flip                       points, lambda, base (optional, default 0)
//   finite_rank_grid           points
//
// State types and their keys:
//   lattice_point          site
//   lattice_distribution   probabilities (one per window site)
//   fejer                  x, n (optional, default: circle cutoff)
//   coherent               z: [re, im]
//   bloch                  polar, azimuth
//   flip_point             point
//   basis                  index
//   vector                 real: [..], imag: [..] (optional)
//   density                rho: { real: [[..]], imag: [[..]] }
//
// A sweep replaces the value at a JSON pointer (e.g. "/geometry/n_max" or
// "/states/1/x") with each listed value, or with from..to by step.

#include "specdist/experiments/io.hpp"
#include "specdist/oracles.hpp"

#include <fstream>
#include <optional>

namespace specdist::config {

using Json = nlohmann::json;

inline constexpr int kConfigVersion = 1;

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct SweepSpec {
  std::string parameter;       // JSON pointer into the config
  std::vector<Json> values;
};

struct HausdorffSpec {
  int samples = 16;
  std::vector<int> cutoffs{4, 8, 16};
  std::string pairing = "double";  // "double": N vs 2N; "self": grid vs itself
  bool rotation = true;             // solve one row and fill the rest by grid rotation
};

struct RunConfig {
  Json raw;                   // full document, used for sweep substitution
  std::string experiment;
  Json geometry;
  std::vector<Json> states;
  std::optional<SweepSpec> sweep;
  HausdorffSpec hausdorff;
  std::string suite;
  double tolerance = 1e-7;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string output;
};

namespace detail {

template <class T>
T get(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + ": key '" + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const Json& j, const std::string& key, T fallback, const std::string& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

}  // namespace detail

inline TriplePtr build_geometry(const Json& g) {
  if (!g.is_object()) throw ConfigError("geometry: expected an object");
  const auto kind = detail::get<std::string>(g, "kind", "geometry");
  const std::string where = "geometry(" + kind + ")";
  auto share = [](TruncatedTriple t) { return std::make_shared<const TruncatedTriple>(std::move(t)); };
  if (kind == "lattice" || kind == "lattice_variant") {
    const auto w = detail::get<std::vector<std::int64_t>>(g, "window", where);
    if (w.size() != 2) throw ConfigError(where + ": window must be [min, max]");
    return share(kind == "lattice" ? build_lattice(w[0], w[1]) : build_lattice_variant(w[0], w[1]));
  }
  if (kind == "circle")
    return share(build_circle(detail::get<int>(g, "cutoff", where),
                              detail::get_or<bool>(g, "full_matrix_algebra", false, where)));
  if (kind == "moyal")
    return share(build_moyal(detail::get<double>(g, "theta", where), detail::get<int>(g, "n_max", where)));
  if (kind == "fuzzy_sphere") return share(build_fuzzy_sphere(detail::get<int>(g, "two_ell", where)));
  if (kind == "flip")
    return share(build_flip(detail::get<int>(g, "points", where), detail::get<double>(g, "lambda", where),
                            detail::get_or<int>(g, "base", 0, where)));
  if (kind == "finite_rank_grid") return share(build_finite_rank_grid(detail::get<int>(g, "points", where)));
  throw ConfigError("geometry: unknown kind '" + kind + "'");
}

inline ComplexVector vector_from_json(const Json& s, const std::string& where) {
  const auto re = detail::get<std::vector<double>>(s, "real", where);
  const auto im = detail::get_or<std::vector<double>>(s, "imag", std::vector<double>(re.size(), 0.0), where);
  if (im.size() != re.size()) throw ConfigError(where + ": real/imag lengths differ");
  ComplexVector v(static_cast<Index>(re.size()));
  for (std::size_t k = 0; k < re.size(); ++k) v(static_cast<Index>(k)) = Complex(re[k], im[k]);
  return v;
}

inline State build_state(const Json& s, const TriplePtr& triple) {
  if (!s.is_object()) throw ConfigError("state: expected an object");
  const auto type = detail::get<std::string>(s, "type", "state");
  const std::string where = "state(" + type + ")";
  if (type == "lattice_point") return lattice_point(triple, detail::get<std::int64_t>(s, "site", where));
  if (type == "lattice_distribution") {
    const auto* lp = std::get_if<LatticeParams>(&triple->params());
    if (!lp) throw ConfigError(where + ": needs a lattice geometry");
    const auto p = detail::get<std::vector<double>>(s, "probabilities", where);
    RealVector v(static_cast<Index>(p.size()));
    for (std::size_t k = 0; k < p.size(); ++k) v(static_cast<Index>(k)) = p[k];
    return lattice_state(triple, LatticeDistribution(lp->window_min, v));
  }
  if (type == "fejer") {
    const auto* cp = std::get_if<CircleParams>(&triple->params());
    if (!cp) throw ConfigError(where + ": needs a circle geometry");
    return fejer_state(triple, detail::get_or<int>(s, "n", cp->cutoff, where), detail::get<double>(s, "x", where));
  }
  if (type == "coherent") {
    const auto z = detail::get<std::vector<double>>(s, "z", where);
    if (z.size() != 2) throw ConfigError(where + ": z must be [re, im]");
    return moyal_coherent(triple, Complex(z[0], z[1]));
  }
  if (type == "bloch")
    return bloch_coherent(triple, detail::get<double>(s, "polar", where), detail::get<double>(s, "azimuth", where));
  if (type == "flip_point") return flip_point(triple, detail::get<int>(s, "point", where));
  if (type == "basis") return basis_state(triple, detail::get<Index>(s, "index", where));
  if (type == "vector") {
    const ComplexVector v = vector_from_json(s, where);
    return vector_state(triple, v / v.norm());
  }
  if (type == "density") return io::state_from_json(s, triple);
  throw ConfigError("state: unknown type '" + type + "'");
}

inline std::vector<Json> expand_sweep_values(const Json& sw) {
  std::vector<Json> values;
  if (sw.contains("values")) {
    if (!sw.at("values").is_array()) throw ConfigError("sweep: values must be an array");
    for (const auto& v : sw.at("values")) values.push_back(v);
  } else if (sw.contains("from")) {
    const double from = detail::get<double>(sw, "from", "sweep");
    const double to = detail::get<double>(sw, "to", "sweep");
    const double step = detail::get_or<double>(sw, "step", 1.0, "sweep");
    if (!(step > 0.0)) throw ConfigError("sweep: step must be positive");
    const bool integral = sw.at("from").is_number_integer() && sw.at("to").is_number_integer() &&
                          (!sw.contains("step") || sw.at("step").is_number_integer());
    const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) {
      const double v = from + static_cast<double>(k) * step;
      if (integral) values.emplace_back(static_cast<long>(std::llround(v)));
      else values.emplace_back(v);
    }
  } else {
    throw ConfigError("sweep: need 'values' or 'from'/'to'");
  }
  if (values.empty()) throw ConfigError("sweep: empty range");
  return values;
}

inline RunConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  RunConfig c;
  c.raw = j;
  const int version = detail::get<int>(j, "config_version", "config");
  if (version != kConfigVersion)
    throw ConfigError("config: unsupported config_version " + std::to_string(version));
  c.experiment = detail::get_or<std::string>(j, "experiment", "", "config");
  if (j.contains("geometry")) c.geometry = j.at("geometry");
  if (j.contains("states")) {
    if (!j.at("states").is_array()) throw ConfigError("config: states must be an array");
    for (const auto& s : j.at("states")) c.states.push_back(s);
  }
  if (j.contains("sweep")) {
    const Json& sw = j.at("sweep");
    SweepSpec spec;
    spec.parameter = detail::get<std::string>(sw, "parameter", "sweep");
    if (spec.parameter.empty() || spec.parameter.front() != '/')
      throw ConfigError("sweep: parameter must be a JSON pointer such as /geometry/cutoff");
    spec.values = expand_sweep_values(sw);
    c.sweep = std::move(spec);
  }
  if (j.contains("hausdorff")) {
    const Json& h = j.at("hausdorff");
    c.hausdorff.samples = detail::get_or<int>(h, "samples", c.hausdorff.samples, "hausdorff");
    c.hausdorff.cutoffs = detail::get_or<std::vector<int>>(h, "cutoffs", c.hausdorff.cutoffs, "hausdorff");
    c.hausdorff.pairing = detail::get_or<std::string>(h, "pairing", c.hausdorff.pairing, "hausdorff");
    c.hausdorff.rotation = detail::get_or<bool>(h, "rotation", c.hausdorff.rotation, "hausdorff");
    if (c.hausdorff.samples < 1) throw ConfigError("hausdorff: samples must be >= 1");
    if (c.hausdorff.cutoffs.empty()) throw ConfigError("hausdorff: cutoffs must be non-empty");
    if (c.hausdorff.pairing != "double" && c.hausdorff.pairing != "self")
      throw ConfigError("hausdorff: pairing must be 'double' or 'self'");
  }
  c.suite = detail::get_or<std::string>(j, "suite", "", "config");
  c.tolerance = detail::get_or<double>(j, "tolerance", c.tolerance, "config");
  if (!(c.tolerance > 0.0)) throw ConfigError("config: tolerance must be positive");
  c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed, "config");
  c.jobs = detail::get_or<int>(j, "jobs", c.jobs, "config");
  c.output = detail::get_or<std::string>(j, "output", "", "config");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  Json j;
  try {
    f >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

/// The config with the sweep parameter replaced by `value`.
inline RunConfig substitute(const RunConfig& c, const std::string& pointer, const Json& value) {
  Json j = c.raw;
  const nlohmann::json::json_pointer ptr(pointer);
  try {
    j.at(ptr);
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("sweep: parameter " + pointer + " does not exist in the config");
  }
  j[ptr] = value;
  RunConfig out = parse_config(j);
  out.jobs = c.jobs;
  out.tolerance = c.tolerance;
  out.seed = c.seed;
  out.output = c.output;
  return out;
}

}  // namespace specdist::config
