#pragma once

// File formats.
//
// Measure files (UTF-8 JSON):
//   {"model": "half-space", "d": 2,
//    "atoms": [{"w": 0.5, "x": [0, 1]}, ...]}            interior atoms
//    "atoms": [{"w": 0.25, "xi": [1.5]}, {"w": 0.25, "xi": "infinity"}, ...]
//                                                        boundary atoms
// Weights must sum to 1 within 1e-9 (then they are rescaled exactly) unless
// renormalization is requested.
//
// CSV output follows RFC 4180; numbers are written with 17 significant
// digits so that parsing them back reproduces the doubles exactly.

#include "hyperbary/errors.hpp"
#include "hyperbary/geometry.hpp"
#include "hyperbary/measures.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace hyperbary::io {

using json = nlohmann::ordered_json;

inline constexpr double kFileWeightTol = 1e-9;

/// Input rejected by a parser or validator; maps to exit code 2.
class SchemaError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Parses JSON text; syntax errors report line and column.
inline json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SchemaError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": JSON syntax error: " + e.what());
  }
}

namespace detail {

inline double number_at(const json& j, const std::string& where) {
  if (!j.is_number()) throw SchemaError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(where + ": non-finite number");
  return v;
}

inline Vec vector_at(const json& j, std::size_t len, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + ": expected an array of numbers");
  if (j.size() != len) {
    throw SchemaError(where + ": expected " + std::to_string(len) + " coordinates, found " +
                      std::to_string(j.size()));
  }
  Vec v(static_cast<Eigen::Index>(len));
  for (std::size_t i = 0; i < len; ++i) v[static_cast<Eigen::Index>(i)] = number_at(j[i], where + "/" + std::to_string(i));
  return v;
}

template <class Atom>
std::vector<Atom> finish_weights(std::vector<Atom> atoms, bool renormalize, const std::string& source) {
  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  if (!renormalize && std::abs(total - 1.0) > kFileWeightTol) {
    throw SchemaError(source + ": weights sum to " + std::to_string(total) +
                      " (not normalized within 1e-9; pass --renormalize to rescale)");
  }
  for (auto& a : atoms) a.weight /= total;
  return atoms;
}

}  // namespace detail

/// Either kind of measure file.
using AnyMeasure = std::variant<DiscreteMeasure, BoundaryMeasure>;

inline AnyMeasure measure_from_json(const json& doc, bool renormalize, const std::string& source = "input") {
  if (!doc.is_object()) throw SchemaError(source + ": top level must be an object");
  if (!doc.contains("model") || doc["model"] != "half-space") {
    throw SchemaError(source + ": /model must be \"half-space\"");
  }
  if (!doc.contains("d") || !doc["d"].is_number_integer()) throw SchemaError(source + ": /d must be an integer");
  const int d = doc["d"].get<int>();
  if (d < 2 || d > kMaxDim) throw SchemaError(source + ": /d must be in [2, 16]");
  if (!doc.contains("atoms") || !doc["atoms"].is_array() || doc["atoms"].empty()) {
    throw SchemaError(source + ": /atoms must be a non-empty array");
  }
  for (const auto& [key, _] : doc.items()) {
    if (key != "model" && key != "d" && key != "atoms") throw SchemaError(source + ": unknown field /" + key);
  }

  const auto& atoms = doc["atoms"];
  const bool boundary = atoms[0].is_object() && atoms[0].contains("xi");
  std::vector<DiscreteMeasure::Atom> interior;
  std::vector<BoundaryMeasure::Atom> ideal;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::string where = source + ": /atoms/" + std::to_string(i);
    const auto& a = atoms[i];
    if (!a.is_object()) throw SchemaError(where + ": expected an object");
    if (!a.contains("w")) throw SchemaError(where + ": missing \"w\"");
    const double w = detail::number_at(a["w"], where + "/w");
    if (!(w > 0.0)) throw SchemaError(where + "/w: weight must be positive");
    for (const auto& [key, _] : a.items()) {
      if (key != "w" && key != (boundary ? "xi" : "x")) {
        throw SchemaError(where + ": unexpected field \"" + key + "\" (atoms must all be " +
                          (boundary ? "boundary atoms with \"xi\"" : "interior atoms with \"x\"") + ")");
      }
    }
    if (boundary) {
      if (!a.contains("xi")) throw SchemaError(where + ": missing \"xi\"");
      const auto& xi = a["xi"];
      if (xi.is_string()) {
        if (xi != "infinity") throw SchemaError(where + "/xi: the only string value allowed is \"infinity\"");
        ideal.push_back({w, BoundaryPoint::infinity(d)});
      } else {
        ideal.push_back({w, BoundaryPoint::finite(detail::vector_at(xi, d - 1, where + "/xi"))});
      }
    } else {
      if (!a.contains("x")) throw SchemaError(where + ": missing \"x\"");
      const Vec x = detail::vector_at(a["x"], d, where + "/x");
      if (!(x[d - 1] > 0.0)) throw SchemaError(where + "/x: height (last coordinate) must be > 0");
      interior.push_back({w, Point(x)});
    }
  }
  if (boundary) return BoundaryMeasure(detail::finish_weights(std::move(ideal), renormalize, source));
  return DiscreteMeasure(detail::finish_weights(std::move(interior), renormalize, source));
}

inline AnyMeasure load_measure(const std::string& path, bool renormalize) {
  return measure_from_json(parse_json(read_file(path), path), renormalize, path);
}

inline json to_json(const DiscreteMeasure& mu) {
  json atoms = json::array();
  for (const auto& a : mu.atoms()) {
    json x = json::array();
    for (int i = 0; i < a.point.dim(); ++i) x.push_back(a.point[i]);
    atoms.push_back({{"w", a.weight}, {"x", x}});
  }
  return {{"model", "half-space"}, {"d", mu.dim()}, {"atoms", atoms}};
}

inline json to_json(const BoundaryMeasure& mu) {
  json atoms = json::array();
  for (const auto& a : mu.atoms()) {
    json xi;
    if (a.point.is_infinity()) {
      xi = "infinity";
    } else {
      xi = json::array();
      for (Eigen::Index i = 0; i < a.point.xi().size(); ++i) xi.push_back(a.point.xi()[i]);
    }
    atoms.push_back({{"w", a.weight}, {"xi", xi}});
  }
  return {{"model", "half-space"}, {"d", mu.dim()}, {"atoms", atoms}};
}

inline json to_json(const Point& p) {
  json x = json::array();
  for (int i = 0; i < p.dim(); ++i) x.push_back(p[i]);
  return x;
}

inline json to_json(const BoundaryPoint& b) {
  if (b.is_infinity()) return "infinity";
  json x = json::array();
  for (Eigen::Index i = 0; i < b.xi().size(); ++i) x.push_back(b.xi()[i]);
  return x;
}

// ------------------------------------------------------------------------ CSV

/// Shortest exact rendering: 17 significant digits; NaN becomes an empty field.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_field(fields[i]);
    }
    out_ << "\r\n";
  }

 private:
  std::ostream& out_;
};

/// RFC 4180 reader (quoted fields, doubled quotes, CRLF or LF records).
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(field);
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(field);
      rows.push_back(row);
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (any || !field.empty()) {
    row.push_back(field);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hyperbary::io
