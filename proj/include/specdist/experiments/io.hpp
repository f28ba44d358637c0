#pragma once

// Locale-independent number formatting, CSV emission and JSON records for
// states and distance results.

#include "specdist/distance.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace specdist::io {

using Json = nlohmann::json;

/// Shortest-safe decimal text with 17 significant digits and '.' as decimal
/// point regardless of the global locale.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline double parse_number(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw InvalidInput("not a number: '" + s + "'");
  return x;
}

/// A CSV cell: either a number, text, or empty (not applicable).
struct Cell {
  enum class Kind { empty, number, text } kind = Kind::empty;
  double number = 0.0;
  std::string text;

  Cell() = default;
  Cell(double x) : kind(Kind::number), number(x) {}
  Cell(int x) : kind(Kind::number), number(x) {}
  Cell(std::string s) : kind(Kind::text), text(std::move(s)) {}
  Cell(const char* s) : kind(Kind::text), text(s) {}
  static Cell optional(const std::optional<double>& x) { return x ? Cell(*x) : Cell(); }

  std::string render() const {
    switch (kind) {
      case Kind::number: return format_number(number);
      case Kind::text: return text;
      case Kind::empty: return "";
    }
    return "";
  }
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  void write_csv(std::ostream& os) const {
    for (std::size_t k = 0; k < header.size(); ++k) os << (k ? "," : "") << header[k];
    os << '\n';
    for (const auto& row : rows) {
      for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << row[k].render();
      os << '\n';
    }
  }

  std::string csv() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

/// Parses a CSV produced by Table::write_csv into header + string cells.
inline std::pair<std::vector<std::string>, std::vector<std::vector<std::string>>> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("read_csv: empty input");
  auto header = split_csv_line(line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line))
    if (!line.empty()) rows.push_back(split_csv_line(line));
  return {std::move(header), std::move(rows)};
}

inline Json matrix_to_json(const RealMatrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline RealMatrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw InvalidInput("matrix: expected an array of rows");
  const Index r = static_cast<Index>(j.size());
  const Index c = r == 0 ? 0 : static_cast<Index>(j.at(0).size());
  RealMatrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    if (static_cast<Index>(j.at(i).size()) != c) throw InvalidInput("matrix: ragged rows");
    for (Index k = 0; k < c; ++k) m(i, k) = j.at(i).at(k).get<double>();
  }
  return m;
}

/// Geometry descriptor for a triple built by one of the standard builders.
inline Json geometry_descriptor(const TruncatedTriple& t) {
  Json g;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LatticeParams>) {
          g["kind"] = p.derivative_variant ? "lattice_variant" : "lattice";
          g["window"] = {p.window_min, p.window_max};
        } else if constexpr (std::is_same_v<P, CircleParams>) {
          g["kind"] = "circle";
          g["cutoff"] = p.cutoff;
          g["full_matrix_algebra"] = p.full_matrix_algebra;
        } else if constexpr (std::is_same_v<P, MoyalParams>) {
          g["kind"] = "moyal";
          g["theta"] = p.theta;
          g["n_max"] = p.n_max;
        } else if constexpr (std::is_same_v<P, FuzzySphereParams>) {
          g["kind"] = "fuzzy_sphere";
          g["two_ell"] = p.two_ell;
        } else if constexpr (std::is_same_v<P, FlipParams>) {
          g["kind"] = "flip";
          g["points"] = p.points;
          g["lambda"] = p.lambda;
          g["base"] = p.base;
        } else if constexpr (std::is_same_v<P, GridParams>) {
          g["kind"] = "grid";
          g["points"] = p.points;
          g["label"] = p.label;
        } else {
          g["kind"] = "block_sum";
          g["first"] = p.first;
          g["second"] = p.second;
        }
      },
      t.params());
  g["name"] = t.name();
  return g;
}

/// {"geometry": descriptor, "rho": {"real": [[..]], "imag": [[..]]}}
inline Json state_to_json(const State& s) {
  Json j;
  j["geometry"] = geometry_descriptor(s.triple());
  j["rho"]["real"] = matrix_to_json(s.rho().matrix().real());
  j["rho"]["imag"] = matrix_to_json(s.rho().matrix().imag());
  if (s.discarded_mass() != 0.0) j["discarded_mass"] = s.discarded_mass();
  return j;
}

/// Reads the density matrix of a serialized state onto `triple`. The
/// descriptor must match the triple's geometry.
inline State state_from_json(const Json& j, const TriplePtr& triple) {
  const Json expected = geometry_descriptor(*triple);
  if (j.contains("geometry") && j.at("geometry") != expected)
    throw InvalidInput("state record belongs to geometry " + j.at("geometry").dump() + ", expected " +
                       expected.dump());
  const RealMatrix re = matrix_from_json(j.at("rho").at("real"));
  const RealMatrix im = matrix_from_json(j.at("rho").at("imag"));
  if (re.rows() != im.rows() || re.cols() != im.cols()) throw InvalidInput("state record: real/imag size mismatch");
  ComplexMatrix rho(re.rows(), re.cols());
  rho.real() = re;
  rho.imag() = im;
  State s(triple, HermitianOperator(rho));
  if (j.contains("discarded_mass")) s.set_discarded_mass(j.at("discarded_mass").get<double>());
  return s;
}

inline Json number_or_string(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

inline Json result_to_json(const DistanceResult& r) {
  Json j;
  j["status"] = to_string(r.status);
  j["primal"] = number_or_string(r.primal_value);
  j["dual"] = number_or_string(r.dual_value);
  j["gap"] = number_or_string(r.is_infinite() ? 0.0 : r.gap());
  j["iterations"] = r.iterations;
  j["lipschitz_norm"] = r.lipschitz_norm;
  j["optimizer"]["real"] = matrix_to_json(r.optimizer.matrix().real());
  j["optimizer"]["imag"] = matrix_to_json(r.optimizer.matrix().imag());
  return j;
}

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot open output file '" + path + "'");
  f << content;
  if (!f) throw InvalidInput("failed writing output file '" + path + "'");
}

}  // namespace specdist::io
