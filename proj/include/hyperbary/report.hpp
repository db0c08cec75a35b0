#pragma once

// Simulation driver: config parsing, replica fan-out, CSV series and the
// JSON experiment report.

#include "hyperbary/dynamics.hpp"
#include "hyperbary/io.hpp"
#include "hyperbary/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hyperbary {

enum class SimKind { two_particle, n_particle, geodesic };

inline SimKind parse_sim_kind(const std::string& s) {
  if (s == "two-particle") return SimKind::two_particle;
  if (s == "n-particle") return SimKind::n_particle;
  if (s == "geodesic") return SimKind::geodesic;
  throw io::SchemaError("unknown simulation kind '" + s + "' (expected two-particle, n-particle or geodesic)");
}

inline std::string to_string(SimKind k) {
  switch (k) {
    case SimKind::two_particle: return "two-particle";
    case SimKind::n_particle: return "n-particle";
    case SimKind::geodesic: return "geodesic";
  }
  return "?";
}

struct SimSetup {
  SimKind kind = SimKind::two_particle;
  SimConfig cfg;
  int paths = 1;
  // geodesic runs
  std::optional<BoundaryPoint> a, b;
  std::optional<Point> z0;
};

namespace detail {

inline Point point_field(const io::json& j, int d, const std::string& where) {
  const Vec x = io::detail::vector_at(j, d, where);
  if (!(x[d - 1] > 0.0)) throw io::SchemaError(where + ": height (last coordinate) must be > 0");
  return Point(x);
}

inline BoundaryPoint boundary_field(const io::json& j, int d, const std::string& where) {
  if (j.is_string()) {
    if (j != "infinity") throw io::SchemaError(where + ": the only string value allowed is \"infinity\"");
    return BoundaryPoint::infinity(d);
  }
  return BoundaryPoint::finite(io::detail::vector_at(j, d - 1, where));
}

}  // namespace detail

/// Config file fields (all optional): d, dt, t_end, paths, scheme
/// ("ito_exp" | "heun"), n_particles, weights, starts, base, record_every,
/// substeps, track_sde; geodesic runs also take a, b (boundary points,
/// default 0 and infinity) and z0.
inline SimSetup sim_setup_from_json(SimKind kind, const io::json& j, const std::string& source = "config") {
  if (!j.is_object()) throw io::SchemaError(source + ": top level must be an object");
  static const std::vector<std::string> known{"d",        "dt",        "t_end",        "paths",     "scheme",
                                              "n_particles", "weights", "starts",      "base",      "record_every",
                                              "substeps", "track_sde", "a",            "b",         "z0"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw io::SchemaError(source + ": unknown field /" + key);
    }
  }
  SimSetup s;
  s.kind = kind;
  auto& c = s.cfg;
  auto integer = [&](const char* key, int& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer()) throw io::SchemaError(source + ": /" + key + " must be an integer");
    out = j[key].get<int>();
  };
  auto number = [&](const char* key, double& out) {
    if (j.contains(key)) out = io::detail::number_at(j[key], source + ": /" + key);
  };
  integer("d", c.d);
  if (c.d < 2 || c.d > kMaxDim) throw io::SchemaError(source + ": /d must be in [2, 16]");
  number("dt", c.dt);
  number("t_end", c.t_end);
  integer("paths", s.paths);
  if (s.paths < 1) throw io::SchemaError(source + ": /paths must be >= 1");
  integer("n_particles", c.n_particles);
  integer("record_every", c.record_every);
  integer("substeps", c.substeps);
  if (j.contains("track_sde")) {
    if (!j["track_sde"].is_boolean()) throw io::SchemaError(source + ": /track_sde must be a boolean");
    c.track_sde = j["track_sde"].get<bool>();
  }
  if (j.contains("scheme")) {
    const auto& v = j["scheme"];
    if (v == "ito_exp") {
      c.scheme = Scheme::ito_exp;
    } else if (v == "heun") {
      c.scheme = Scheme::heun_stratonovich;
    } else {
      throw io::SchemaError(source + ": /scheme must be \"ito_exp\" or \"heun\"");
    }
  }
  if (kind == SimKind::two_particle || kind == SimKind::geodesic) {
    if (j.contains("n_particles") && c.n_particles != 2) {
      throw io::SchemaError(source + ": /n_particles must be 2 for this kind");
    }
    c.n_particles = 2;
  }
  if (j.contains("weights")) {
    const auto& w = j["weights"];
    if (!w.is_array()) throw io::SchemaError(source + ": /weights must be an array");
    for (std::size_t i = 0; i < w.size(); ++i) {
      c.weights.push_back(io::detail::number_at(w[i], source + ": /weights/" + std::to_string(i)));
    }
  }
  if (j.contains("starts")) {
    const auto& st = j["starts"];
    if (!st.is_array()) throw io::SchemaError(source + ": /starts must be an array");
    for (std::size_t i = 0; i < st.size(); ++i) {
      c.starts.push_back(detail::point_field(st[i], c.d, source + ": /starts/" + std::to_string(i)));
    }
  }
  if (j.contains("base")) c.base = detail::point_field(j["base"], c.d, source + ": /base");
  if (kind == SimKind::geodesic) {
    s.a = j.contains("a") ? detail::boundary_field(j["a"], c.d, source + ": /a")
                          : BoundaryPoint::finite(Vec::Zero(c.d - 1));
    s.b = j.contains("b") ? detail::boundary_field(j["b"], c.d, source + ": /b") : BoundaryPoint::infinity(c.d);
    if (j.contains("z0")) s.z0 = detail::point_field(j["z0"], c.d, source + ": /z0");
  } else if (j.contains("a") || j.contains("b") || j.contains("z0")) {
    throw io::SchemaError(source + ": /a, /b, /z0 apply to geodesic runs only");
  }
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw io::SchemaError(source + ": " + e.what());
  }
  return s;
}

/// Config echo in the report; mirrors the accepted file fields.
inline io::json to_json(const SimSetup& s) {
  const auto& c = s.cfg;
  io::json j;
  j["kind"] = to_string(s.kind);
  j["d"] = c.d;
  j["dt"] = c.dt;
  j["t_end"] = c.t_end;
  j["paths"] = s.paths;
  j["seed"] = c.seed;
  j["scheme"] = c.scheme == Scheme::ito_exp ? "ito_exp" : "heun";
  j["n_particles"] = c.n_particles;
  j["weights"] = c.resolved_weights();
  io::json starts = io::json::array();
  for (const auto& p : c.resolved_starts()) starts.push_back(io::to_json(p));
  j["starts"] = starts;
  j["base"] = io::to_json(c.base_point());
  j["record_every"] = c.record_every;
  j["substeps"] = c.substeps;
  j["track_sde"] = c.track_sde;
  if (s.kind == SimKind::geodesic) {
    j["a"] = io::to_json(*s.a);
    j["b"] = io::to_json(*s.b);
    if (s.z0) j["z0"] = io::to_json(*s.z0);
  }
  return j;
}

inline constexpr int kCsvSchemaVersion = 1;

struct SimOutput {
  std::string csv;
  io::json report;
};

namespace detail {

inline void point_columns(std::vector<std::string>& h, const std::string& name, int d) {
  for (int k = 1; k <= d; ++k) h.push_back(name + "_" + std::to_string(k));
}

inline void point_values(std::vector<std::string>& row, const Point& p) {
  for (int k = 0; k < p.dim(); ++k) row.push_back(io::fmt(p[k]));
}

inline double stat_at(const Trajectory& tr, const std::string& key, std::size_t i) {
  const auto it = tr.stats.find(key);
  if (it == tr.stats.end() || i >= it->second.size()) return std::numeric_limits<double>::quiet_NaN();
  return it->second[i];
}

inline double series_max(const Trajectory& tr, const std::string& key) {
  const auto it = tr.stats.find(key);
  if (it == tr.stats.end() || it->second.empty()) return std::numeric_limits<double>::quiet_NaN();
  return *std::max_element(it->second.begin(), it->second.end());
}

inline int sign_changes(const std::vector<double>& v) {
  int n = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if ((v[k] > 0.0) != (v[k - 1] > 0.0)) ++n;
  }
  return n;
}

/// Quadratic variation of `v` per unit time over samples with t in [t0, t1].
inline double qv_rate(const std::vector<double>& t, const std::vector<double>& v, double t0, double t1) {
  double qv = 0.0, span = 0.0;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    if (t[k] < t0 - 1e-12 || t[k + 1] > t1 + 1e-12) continue;
    qv += (v[k + 1] - v[k]) * (v[k + 1] - v[k]);
    span += t[k + 1] - t[k];
  }
  return span > 0.0 ? qv / span : std::numeric_limits<double>::quiet_NaN();
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    s += x;
    ++n;
  }
  return n ? s / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

inline double median_of(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline io::json num(double v) { return std::isnan(v) ? io::json(nullptr) : io::json(v); }

/// One aggregate statistic, tied to the acceptance criterion it feeds.
inline io::json statistic(const std::string& name, double value, int criterion, double target, double tol,
                          const std::string& rule) {
  io::json s;
  s["name"] = name;
  s["value"] = num(value);
  s["criterion"] = criterion;
  s["target"] = target;
  s["tolerance"] = tol;
  s["rule"] = rule;
  bool pass = false;
  if (!std::isnan(value)) {
    if (rule == "abs") pass = std::abs(value - target) <= tol;
    if (rule == "rel") pass = std::abs(value - target) <= tol * std::abs(target);
    if (rule == "min") pass = value >= target;
    if (rule == "max") pass = value <= target;
  }
  if (rule == "info") {
    s["pass"] = nullptr;  // descriptive only
  } else {
    s["pass"] = pass;
  }
  return s;
}

inline io::json limits_json(const Trajectory& tr) {
  io::json out = io::json::array();
  for (const auto& l : tr.limits) {
    if (!l) {
      out.push_back(nullptr);
    } else {
      out.push_back({{"point", io::to_json(l->point)}, {"error_bound", l->error_bound}});
    }
  }
  return out;
}

}  // namespace detail

/// Runs `setup.paths` replicas (replica index = path index) on the worker
/// pool and assembles CSV and report. Output is independent of the worker
/// count; wall-clock time is reported only when `timing` is set.
inline SimOutput simulate(const SimSetup& setup, bool timing = false) {
  const auto started = std::chrono::steady_clock::now();
  const auto& cfg = setup.cfg;
  const int d = cfg.d;
  const auto trajectories = run_replicas(static_cast<std::size_t>(setup.paths), [&](std::size_t p) {
    SimConfig c = cfg;
    c.replica = p;
    switch (setup.kind) {
      case SimKind::two_particle: return run_two_particle(c);
      case SimKind::n_particle: return run_nparticle(c);
      case SimKind::geodesic: return run_geodesic(c, *setup.a, *setup.b, setup.z0);
    }
    return Trajectory{};
  });

  std::ostringstream csv;
  io::CsvWriter w(csv);
  std::vector<std::string> header{"path", "t"};
  const int n = static_cast<int>(trajectories.front().particles.size());
  std::vector<std::string> stat_cols;
  switch (setup.kind) {
    case SimKind::two_particle:
      detail::point_columns(header, "X", d);
      detail::point_columns(header, "Y", d);
      detail::point_columns(header, "Z_direct", d);
      detail::point_columns(header, "Z_sde", d);
      stat_cols = {"rho_XY", "D_t", "defect_direct", "defect_sde", "gap", "s_t", "h_t"};
      break;
    case SimKind::n_particle:
      for (int i = 1; i <= n; ++i) detail::point_columns(header, "X" + std::to_string(i), d);
      detail::point_columns(header, "Z_direct", d);
      detail::point_columns(header, "Z_sde", d);
      stat_cols = {"gap", "rho_Z_G"};
      for (int i = 0; i < n; ++i) stat_cols.push_back("lln_" + std::to_string(i));
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) stat_cols.push_back("upsilon_" + std::to_string(i) + "_" + std::to_string(j));
      }
      break;
    case SimKind::geodesic:
      detail::point_columns(header, "Z", d);
      stat_cols = {"s_t"};
      break;
  }
  header.insert(header.end(), stat_cols.begin(), stat_cols.end());
  w.row(header);

  for (std::size_t p = 0; p < trajectories.size(); ++p) {
    const auto& tr = trajectories[p];
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      std::vector<std::string> row{std::to_string(p), io::fmt(tr.times[k])};
      for (const auto& path : tr.particles) detail::point_values(row, path[k]);
      if (setup.kind != SimKind::geodesic) {
        detail::point_values(row, (*tr.barycenter_direct)[k]);
        if (tr.barycenter_sde) {
          detail::point_values(row, (*tr.barycenter_sde)[k]);
        } else {
          for (int c = 0; c < d; ++c) row.push_back("");
        }
      }
      for (const auto& key : stat_cols) row.push_back(io::fmt(detail::stat_at(tr, key, k)));
      w.row(row);
    }
  }

  // ------------------------------------------------------------ report
  io::json rep;
  rep["name"] = "hyperbary simulate " + to_string(setup.kind);
  rep["csv_schema"] = "hyperbary." + to_string(setup.kind) + "/" + std::to_string(kCsvSchemaVersion);
  rep["csv_columns"] = header;
  rep["seed"] = cfg.seed;
  rep["config"] = to_json(setup);

  const double T = cfg.t_end;
  io::json per_path = io::json::array();
  io::json aggregates = io::json::array();

  if (setup.kind == SimKind::two_particle) {
    std::vector<double> qv, gaps, signs_ok;
    for (const auto& tr : trajectories) {
      const auto& D = tr.stats.at("D_t");
      const int sc = detail::sign_changes(D);
      const double q = detail::qv_rate(tr.times, tr.stats.at("s_t"), 0.4 * T, 0.8 * T);
      io::json pj;
      pj["final_rho_XY"] = tr.stats.at("rho_XY").back();
      pj["final_D"] = D.back();
      pj["sign_changes_D"] = sc;
      pj["max_defect_direct"] = detail::num(detail::series_max(tr, "defect_direct"));
      pj["max_defect_sde"] = detail::num(detail::series_max(tr, "defect_sde"));
      pj["max_gap"] = detail::num(detail::series_max(tr, "gap"));
      pj["qv_rate_s"] = detail::num(q);
      pj["final_h"] = tr.stats.at("h_t").back();
      pj["limit_geodesic"] = tr.limit_geodesic;
      pj["limits"] = detail::limits_json(tr);
      per_path.push_back(pj);
      qv.push_back(q);
      gaps.push_back(detail::series_max(tr, "gap"));
      signs_ok.push_back(sc >= 5 ? 1.0 : 0.0);
    }
    aggregates.push_back(detail::statistic("mean_qv_rate_s_window_0.4T_0.8T", detail::mean_of(qv), 9, 0.5, 0.05, "abs"));
    aggregates.push_back(detail::statistic("fraction_paths_D_sign_changes_ge_5", detail::mean_of(signs_ok), 10, 0.8, 0.0, "min"));
    if (cfg.track_sde) {
      aggregates.push_back(detail::statistic("mean_sup_gap_direct_vs_sde", detail::mean_of(gaps), 7, 0.0, 0.0, "info"));
    }
  } else if (setup.kind == SimKind::n_particle) {
    std::vector<double> lln, ups, rzg, rzg_ok;
    for (const auto& tr : trajectories) {
      io::json pj;
      io::json l = io::json::array();
      for (int i = 0; i < n; ++i) {
        const double v = tr.stats.at("lln_" + std::to_string(i)).back();
        l.push_back(v);
        lln.push_back(v);
      }
      pj["lln_final"] = l;
      io::json u = io::json::object();
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const std::string key = "upsilon_" + std::to_string(i) + "_" + std::to_string(j);
          const double v = tr.stats.at(key).back() / T;
          u[key + "_over_T"] = v;
          ups.push_back(v);
        }
      }
      pj["pairwise"] = u;
      pj["max_gap"] = detail::num(detail::series_max(tr, "gap"));
      const double r = detail::stat_at(tr, "rho_Z_G", tr.times.size() - 1);
      pj["final_rho_Z_G"] = detail::num(r);
      pj["busemann_limit"] = tr.busemann_limit ? io::to_json(*tr.busemann_limit) : io::json(nullptr);
      pj["limits"] = detail::limits_json(tr);
      per_path.push_back(pj);
      rzg.push_back(r);
      rzg_ok.push_back(std::isnan(r) ? 0.0 : (r <= 0.1 ? 1.0 : 0.0));
    }
    aggregates.push_back(detail::statistic("mean_rho_o_X_over_t", detail::mean_of(lln), 11, 0.5 * (d - 1), 0.10, "rel"));
    aggregates.push_back(detail::statistic("mean_rho_Xi_Xj_over_T", detail::mean_of(ups), 11, d - 1.0, 0.15, "rel"));
    aggregates.push_back(detail::statistic("fraction_paths_rho_Z_G_le_0.1", detail::mean_of(rzg_ok), 11, 0.9, 0.0, "min"));
    aggregates.push_back(detail::statistic("median_final_rho_Z_G", detail::median_of(rzg), 11, 0.1, 0.0, "info"));
  } else {
    std::vector<double> qv;
    for (const auto& tr : trajectories) {
      const double q = detail::qv_rate(tr.times, tr.stats.at("s_t"), 0.0, T);
      per_path.push_back({{"final_s", tr.stats.at("s_t").back()}, {"qv_rate_s", detail::num(q)}});
      qv.push_back(q);
    }
    aggregates.push_back(detail::statistic("mean_qv_rate_s", detail::mean_of(qv), 9, 0.5, 0.05, "abs"));
  }
  rep["paths"] = per_path;
  rep["statistics"] = aggregates;
  if (timing) {
    rep["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  return {csv.str(), rep};
}

}  // namespace hyperbary
