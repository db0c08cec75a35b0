#pragma once

// Command implementations behind the CLI. Each takes its parsed arguments
// and the output streams and returns the process exit code:
//   0 success, 1 verification (or convergence) failure, 2 rejected input.

#include "hyperbary/barycenter.hpp"
#include "hyperbary/busemann.hpp"
#include "hyperbary/io.hpp"
#include "hyperbary/report.hpp"
#include "hyperbary/verify.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace hyperbary::cli {

inline constexpr int kOk = 0;
inline constexpr int kFailed = 1;
inline constexpr int kRejected = 2;

struct CommonArgs {
  bool json = false;
  std::string out;  // empty: stdout
};

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string point_text(const Point& p) {
  std::string s = "(";
  for (int i = 0; i < p.dim(); ++i) s += (i ? ", " : "") + num(p[i]);
  return s + ")";
}

/// Writes to --out when given, else to `out`.
inline void emit(const CommonArgs& a, std::ostream& out, const std::string& text) {
  if (a.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(a.out, std::ios::binary);
  if (!f) throw io::SchemaError(a.out + ": cannot open for writing");
  f << text;
}

template <class Fn>
int guarded(std::ostream& err, Fn fn) {
  try {
    return fn();
  } catch (const ClassUViolation& e) {
    err << "error: " << e.what() << "\n";
    return kRejected;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kRejected;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << "\n";
    return kRejected;
  } catch (const CoincidentPoints& e) {
    err << "error: " << e.what() << "\n";
    return kRejected;
  } catch (const NotConverged& e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  }
}

}  // namespace detail

struct BarycenterArgs {
  std::string file;
  bool renormalize = false;
  CommonArgs common;
};

inline int cmd_barycenter(const BarycenterArgs& a, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto any = io::load_measure(a.file, a.renormalize);
    const auto* mu = std::get_if<DiscreteMeasure>(&any);
    if (!mu) throw io::SchemaError(a.file + ": barycenter needs interior atoms (\"x\"), found boundary atoms");
    const auto res = solve_exp_barycenter(*mu);
    const double eps = epsilon_convexity(res.point, *mu);
    std::string text;
    if (a.common.json) {
      io::json j;
      j["barycenter"] = io::to_json(res.point);
      j["residual"] = res.residual;
      j["epsilon"] = eps;
      j["iterations"] = res.iterations;
      j["measure"] = io::to_json(DiscreteMeasure::dirac(res.point));
      text = j.dump(2) + "\n";
    } else {
      text = "barycenter " + detail::point_text(res.point) + "\n" + "residual   " + detail::num(res.residual) +
             "\n" + "epsilon    " + detail::num(eps) + "\n" + "iterations " + std::to_string(res.iterations) + "\n";
    }
    detail::emit(a.common, out, text);
    return kOk;
  });
}

struct BusemannArgs {
  std::string file;
  bool renormalize = false;
  bool oracle = false;
  CommonArgs common;
};

inline int cmd_busemann(const BusemannArgs& a, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto any = io::load_measure(a.file, a.renormalize);
    const auto* mu = std::get_if<BoundaryMeasure>(&any);
    if (!mu) throw io::SchemaError(a.file + ": busemann needs boundary atoms (\"xi\"), found interior atoms");
    std::optional<BusemannResult> solved;
    try {
      solved = solve_busemann_barycenter(*mu);
    } catch (const ClassUViolation& e) {
      err << "error: measure is not in class U: atom " << e.index() << " at " << describe(e.atom())
          << " carries weight " << detail::num(e.weight()) << " >= 1/2\n";
      return kRejected;
    }
    const auto& res = *solved;
    std::optional<Point> cf;
    if (a.oracle) cf = closed_form_uniform(*mu);
    const double discrepancy = cf ? distance(*cf, res.point) : std::numeric_limits<double>::quiet_NaN();
    std::string text;
    if (a.common.json) {
      io::json j;
      j["barycenter"] = io::to_json(res.point);
      j["residual"] = res.residual;
      j["alpha"] = res.alpha;
      j["iterations"] = res.iterations;
      j["certificate"] = {{"eps", res.certificate.eps},
                          {"c0", res.certificate.c0},
                          {"radius", res.certificate.radius},
                          {"max_distance", res.certificate.max_distance},
                          {"held", res.certificate.held}};
      if (a.oracle) {
        j["oracle"] = cf ? io::json{{"closed_form", io::to_json(*cf)}, {"distance", discrepancy}}
                         : io::json{{"closed_form", nullptr}, {"note", "no closed form for this measure"}};
      }
      j["measure"] = io::to_json(DiscreteMeasure::dirac(res.point));
      text = j.dump(2) + "\n";
    } else {
      text = "barycenter " + detail::point_text(res.point) + "\n" + "residual   " + detail::num(res.residual) +
             "\n" + "alpha      " + detail::num(res.alpha) + "\n" + "iterations " + std::to_string(res.iterations) +
             "\n" + "certificate eps=" + detail::num(res.certificate.eps) + " c0=" + detail::num(res.certificate.c0) +
             " radius=" + detail::num(res.certificate.radius) +
             " max_distance=" + detail::num(res.certificate.max_distance) +
             (res.certificate.held ? " held" : " NOT held") + "\n";
      if (a.oracle) {
        text += cf ? "oracle     " + detail::point_text(*cf) + " distance " + detail::num(discrepancy) + "\n"
                   : "oracle     no closed form for this measure\n";
      }
    }
    detail::emit(a.common, out, text);
    return kOk;
  });
}

struct SimulateArgs {
  std::string kind;
  std::string config;  // empty: defaults
  std::uint64_t seed = 1;
  bool timing = false;
  CommonArgs common;  // out: CSV path; the report goes next to it as <out>.json
};

inline std::string report_path(const std::string& csv_path) {
  const auto dot = csv_path.rfind('.');
  const auto slash = csv_path.find_last_of('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? csv_path.substr(0, dot) : csv_path) + ".json";
}

/// With --out the CSV goes to that file and the report beside it; without,
/// the CSV goes to stdout (or the report, with --json).
inline int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const SimKind kind = parse_sim_kind(a.kind);
    const io::json cfg = a.config.empty() ? io::json::object() : io::parse_json(io::read_file(a.config), a.config);
    SimSetup setup = sim_setup_from_json(kind, cfg, a.config.empty() ? "config" : a.config);
    setup.cfg.seed = a.seed;
    const auto res = simulate(setup, a.timing);
    if (a.common.out.empty()) {
      out << (a.common.json ? res.report.dump(2) + "\n" : res.csv);
      return kOk;
    }
    CommonArgs csv_target{false, a.common.out};
    detail::emit(csv_target, out, res.csv);
    CommonArgs rep_target{false, report_path(a.common.out)};
    detail::emit(rep_target, out, res.report.dump(2) + "\n");
    if (a.common.json) out << res.report.dump(2) << "\n";
    return kOk;
  });
}

struct VerifyArgs {
  std::string suite = "all";
  std::uint64_t seed = 1;
  CommonArgs common;
};

inline int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err,
                      const verify::Options* injected = nullptr) {
  return detail::guarded(err, [&] {
    verify::Options opt = injected ? *injected : verify::Options{};
    opt.seed = a.seed;
    const bool stream_rows = !a.common.json && a.common.out.empty();
    auto row = [](const verify::Check& c) {
      char buf[512];
      std::snprintf(buf, sizeof buf, "%-4s %-36s %-9s %-12s %-12s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.criterion ? ("C" + std::to_string(c.criterion)).c_str() : "-", sci(c.observed).c_str(),
                    sci(c.tolerance).c_str());
      return std::string(buf) + "     " + c.detail + "\n";
    };
    if (stream_rows) out << "result name                                 criterion observed     tolerance\n";
    const auto checks = verify::run_suite(a.suite, opt, [&](const verify::Check& c) {
      if (stream_rows) out << row(c) << std::flush;
    });
    bool ok = true;
    for (const auto& c : checks) ok = ok && c.pass;
    if (a.common.json) {
      io::json arr = io::json::array();
      for (const auto& c : checks) {
        arr.push_back({{"name", c.name},
                       {"suite", c.suite},
                       {"criterion", c.criterion},
                       {"observed", hyperbary::detail::num(c.observed)},
                       {"tolerance", c.tolerance},
                       {"pass", c.pass},
                       {"detail", c.detail}});
      }
      detail::emit(a.common, out, io::json{{"suite", a.suite}, {"seed", a.seed}, {"pass", ok}, {"checks", arr}}.dump(2) + "\n");
    } else if (!stream_rows) {
      std::string text;
      for (const auto& c : checks) text += row(c);
      detail::emit(a.common, out, text);
    }
    if (stream_rows) out << (ok ? "all checks passed\n" : "some checks FAILED\n");
    return ok ? kOk : kFailed;
  });
}

}  // namespace hyperbary::cli
