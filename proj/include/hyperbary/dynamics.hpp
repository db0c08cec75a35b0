#pragma once

// Stochastic dynamics on H^d: Brownian particles in the half-space chart, the
// barycenter SDEs they drive, and the diagnostic processes used to observe
// the long-time behaviour (boundary limits, signed distance, radial drift).

#include "hyperbary/barycenter.hpp"
#include "hyperbary/busemann.hpp"
#include "hyperbary/geometry.hpp"
#include "hyperbary/jacobi.hpp"
#include "hyperbary/measures.hpp"
#include "hyperbary/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace hyperbary {

// ---------------------------------------------------------------- single steps

/// One step of hyperbolic Brownian motion, dX = h dB - (d-2)/2 h e_d dt.
/// log h is a drifted Brownian motion, so the height update is exact in law:
/// h <- h exp(dW_d - (d-1) dt / 2). Horizontal part: X_bar += h dW_bar with
/// the pre-step height.
inline Point bm_step(const Point& x, const Vec& dW, double dt) {
  const int d = x.dim();
  detail::require_same_dim(d, static_cast<int>(dW.size()), "bm_step");
  const double h = x.height();
  Vec c = x.coords();
  c.head(d - 1) += h * dW.head(d - 1);
  c[d - 1] = h * std::exp(dW[d - 1] - 0.5 * (d - 1) * dt);
  // log h drifts like -(d-1)t/2; past ~e^-745 the chart cannot hold it
  if (!(c[d - 1] > 0.0)) throw InvalidArgument("bm_step: height underflowed the double range");
  return Point(std::move(c));
}

/// Coefficients of the midpoint SDE in Ito form, per particle:
///   d Z = t (//dX)^L + t (//dY)^L + n ((//dX)^N + (//dY)^N)
/// and the equivalent coefficients on independent unit Brownian motions
/// W^i in the adapted frame (tangential and normal).
struct MidpointCoefficients {
  double tangential;        // 1/2
  double normal;            // 1 / (2 cosh(rho/2))
  double frame_tangential;  // 1/sqrt 2
  double frame_normal;      // 1 / (sqrt 2 cosh(rho/2))
};

inline MidpointCoefficients midpoint_noise_coefficients(double rho) {
  const double c = std::cosh(0.5 * rho);
  return {0.5, 0.5 / c, std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / (2.0 * c)};
}

/// The Ito differential d^nabla Z at Z for Brownian increments dB (of X) and
/// dB' (of Y), with the martingale parts h_X dB and h_Y dB' transported to Z.
/// Each particle is split along its own geodesic to Z; at the exact midpoint
/// the two splits share one axis.
inline TangentVector midpoint_increment(const Point& X, const Point& Y, const Point& Z, const Vec& dB,
                                        const Vec& dBp) {
  if (distance(X, Y) < kCoincidentTol) throw CoincidentPoints("midpoint_sde_step: coincident particles");
  auto part = [&](const Point& P, const Vec& noise) {
    const TangentVector v = parallel_transport(P, Z, TangentVector{P, noise * P.height()});
    const double r = distance(P, Z);
    if (r < kCoincidentTol) return v * 0.5;
    const auto split = split_tangent(v, Z, P);
    return split.tangential * 0.5 + split.normal * (0.5 / std::cosh(r));
  };
  return part(X, dB) + part(Y, dBp);
}

/// Ito-exponential step of the midpoint SDE.
inline Point midpoint_sde_step(const Point& X, const Point& Y, const Point& Z, const Vec& dB, const Vec& dBp) {
  return exp_map(Z, midpoint_increment(X, Y, Z, dB, dBp));
}

/// delta Z = -(sum_j p_j psi_(Z, X^j))^{-1} sum_i p_i Jdot(0_Z, delta X^i)(0),
/// with delta X^i a tangent vector at X^i.
inline TangentVector barycenter_increment(const Point& Z, const std::vector<Point>& particles,
                                          const std::vector<double>& weights,
                                          const std::vector<TangentVector>& dX) {
  const int d = Z.dim();
  Mat A = Mat::Zero(d, d);
  Vec rhs = Vec::Zero(d);
  for (std::size_t i = 0; i < particles.size(); ++i) {
    A += weights[i] * psi_operator(Z, particles[i]).matrix;
    rhs += weights[i] * jdot_right_or_limit(dX[i], Z).value.comps;
  }
  // spectrum of A lies in (-inf, -1], so the solve is always well posed
  return {Z, -A.ldlt().solve(rhs)};
}

/// Heun step on the manifold for the Stratonovich barycenter SDE: particles
/// move from `before` to `after`; the corrector evaluates the field at the
/// predicted point with the increments seen from the post-step positions and
/// transports it back to Z.
inline Point nparticle_barycenter_sde_step(const Point& Z, const std::vector<Point>& before,
                                           const std::vector<Point>& after,
                                           const std::vector<double>& weights) {
  const std::size_t n = before.size();
  if (after.size() != n || weights.size() != n) {
    throw InvalidArgument("nparticle_barycenter_sde_step: size mismatch");
  }
  std::vector<TangentVector> fwd, bwd;
  fwd.reserve(n);
  bwd.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    fwd.push_back(log_map(before[i], after[i]));
    bwd.push_back(-log_map(after[i], before[i]));
  }
  const TangentVector v0 = barycenter_increment(Z, before, weights, fwd);
  const Point predicted = exp_map(Z, v0);
  const TangentVector v1 = barycenter_increment(predicted, after, weights, bwd);
  const TangentVector v1_back = parallel_transport(predicted, Z, v1);
  return exp_map(Z, (v0 + v1_back) * 0.5);
}

/// Brownian motion with variance 1/2 on the geodesic (ab): z moves toward a
/// by (dB'_d - dB_d) / 2, so the arclength coordinate measured toward b
/// changes by (dB_d - dB'_d) / 2.
inline Point geodesic_bm_step(const Point& z, const BoundaryPoint& a, const BoundaryPoint& b, double dB_d,
                              double dBp_d) {
  const Point foot = project_to_geodesic(z, a, b);
  if (distance(z, foot) > 1e-9) throw InvalidArgument("geodesic_bm_step: z is not on the geodesic");
  const double shift = 0.5 * (dBp_d - dB_d);
  if (shift == 0.0) return z;
  return exp_map(z, unit_direction(z, a) * shift);
}

// ------------------------------------------------------------------ diagnostics

/// D = (signed position of P) - (signed position of Z) along the geodesic
/// from X to Y, P the projection of o. When P and Z both lie on the segment
/// this is rho(P, X) - rho(X, Z).
inline double signed_distance_D(const Point& X, const Point& Y, const Point& Z, const Point& o) {
  const auto g = detail::complete_geodesic(X, Y);
  const Point P = detail::project(g, o);
  return 0.5 * (detail::axial_level(g, P) - detail::axial_level(g, Z));
}

/// Drift of the radial process R = rho(o, X): ((d-1)/2) coth R.
inline double radial_drift_model(double R, int d) { return 0.5 * (d - 1) / std::tanh(R); }

struct RadialDriftReport {
  std::vector<double> t_mid;
  std::vector<double> estimated;  // (R_end - R_start) / window length
  std::vector<double> predicted;  // window mean of the model drift
  double increment_variance_ratio = 0.0;  // Var(dR) / dt over the whole series
};

inline RadialDriftReport radial_drift_check(const std::vector<double>& times, const std::vector<Point>& path,
                                            const Point& o, std::size_t window) {
  if (window < 2 || path.size() < window + 1 || times.size() != path.size()) {
    throw InvalidArgument("radial_drift_check: window too short for the series");
  }
  const int d = o.dim();
  std::vector<double> R(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) R[k] = distance(o, path[k]);

  RadialDriftReport rep;
  for (std::size_t s = 0; s + window < R.size(); s += window) {
    const std::size_t e = s + window;
    const double span = times[e] - times[s];
    double model = 0.0;
    for (std::size_t k = s; k < e; ++k) model += radial_drift_model(R[k], d);
    rep.t_mid.push_back(0.5 * (times[s] + times[e]));
    rep.estimated.push_back((R[e] - R[s]) / span);
    rep.predicted.push_back(model / static_cast<double>(window));
  }
  double mean = 0.0, sq = 0.0, dtsum = 0.0;
  const std::size_t m = R.size() - 1;
  for (std::size_t k = 0; k < m; ++k) {
    const double inc = R[k + 1] - R[k];
    mean += inc;
    sq += inc * inc;
    dtsum += times[k + 1] - times[k];
  }
  mean /= static_cast<double>(m);
  const double var = sq / static_cast<double>(m) - mean * mean;
  rep.increment_variance_ratio = var / (dtsum / static_cast<double>(m));
  return rep;
}

struct BoundaryEstimate {
  BoundaryPoint point;
  double error_bound;
};

/// Boundary limit of a particle path: a finite point once the height has
/// decayed below a tenth of its start, infinity once it has grown tenfold
/// with bounded horizontal motion. The error bound is the diameter of the
/// trailing 10% of horizontal samples (divided by the final height for
/// infinity, i.e. the angular spread seen from the last point).
inline BoundaryEstimate boundary_limit_estimate(const std::vector<Point>& path) {
  if (path.size() < 2) throw InvalidArgument("boundary_limit_estimate: series too short");
  const double h0 = path.front().height();
  const double h1 = path.back().height();
  const std::size_t tail = std::max<std::size_t>(2, path.size() / 10);
  double diam = 0.0;
  for (std::size_t i = path.size() - tail; i < path.size(); ++i) {
    for (std::size_t j = i + 1; j < path.size(); ++j) {
      diam = std::max(diam, (path[i].horizontal() - path[j].horizontal()).norm());
    }
  }
  if (h1 < 0.1 * h0) return {BoundaryPoint::finite(path.back().horizontal()), diam};
  if (h1 > 10.0 * h0) return {BoundaryPoint::infinity(path.front().dim()), diam / h1};
  throw InvalidArgument("boundary_limit_estimate: height has neither decayed nor grown enough");
}

// ---------------------------------------------------------------- simulation

enum class Scheme { ito_exp, heun_stratonovich };

struct SimConfig {
  int d = 2;
  double dt = 1e-3;
  double t_end = 1.0;
  std::uint64_t seed = 1;
  std::uint64_t replica = 0;
  Scheme scheme = Scheme::ito_exp;
  int n_particles = 2;
  std::vector<double> weights;  // empty: uniform
  std::vector<Point> starts;    // empty: default configuration
  std::optional<Point> base;    // o; default (0, ..., 0, 1)
  int record_every = 1;
  // Each increment is the sum of `substeps` independent N(0, dt/substeps)
  // draws. Runs at dt and dt/k with substeps s and s/k see identical noise.
  int substeps = 1;
  bool track_sde = true;  // integrate the barycenter SDE next to the direct recomputation

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }
  Point base_point() const { return base ? *base : Point::origin(d); }

  void validate() const {
    if (d < 2 || d > kMaxDim) throw InvalidArgument("config.d: must be in [2, 16]");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("config.dt: must be > 0");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidArgument("config.t_end: must be > 0");
    if (dt > t_end) throw InvalidArgument("config.dt: must be <= t_end");
    if (n_particles < 1) throw InvalidArgument("config.n_particles: must be >= 1");
    if (record_every < 1) throw InvalidArgument("config.record_every: must be >= 1");
    if (substeps < 1) throw InvalidArgument("config.substeps: must be >= 1");
    if (!weights.empty()) {
      if (weights.size() != static_cast<std::size_t>(n_particles)) {
        throw InvalidArgument("config.weights: expected one weight per particle");
      }
      double s = 0.0;
      for (double w : weights) {
        if (!(w > 0.0)) throw InvalidArgument("config.weights: must be positive");
        s += w;
      }
      if (std::abs(s - 1.0) > 1e-12) throw InvalidArgument("config.weights: must sum to 1");
    }
    if (!starts.empty()) {
      if (starts.size() != static_cast<std::size_t>(n_particles)) {
        throw InvalidArgument("config.starts: expected one start per particle");
      }
      for (const auto& p : starts) {
        if (p.dim() != d) throw InvalidArgument("config.starts: dimension mismatch");
      }
    }
    if (base && base->dim() != d) throw InvalidArgument("config.base: dimension mismatch");
  }

  std::vector<double> resolved_weights() const {
    if (!weights.empty()) return weights;
    return std::vector<double>(n_particles, 1.0 / n_particles);
  }

  /// Default starts: unit distance from o in equally spaced directions of the
  /// plane spanned by e_1 and e_d.
  std::vector<Point> resolved_starts() const {
    if (!starts.empty()) return starts;
    const Point o = base_point();
    std::vector<Point> out;
    for (int i = 0; i < n_particles; ++i) {
      const double a = 2.0 * std::numbers::pi * i / n_particles;
      Vec u = Vec::Zero(d);
      u[0] = std::cos(a);
      u[d - 1] = std::sin(a);
      out.push_back(n_particles == 1 ? o : exp_map(o, TangentVector{o, u * o.height()}));
    }
    return out;
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<Point>> particles;  // [particle][sample]
  std::optional<std::vector<Point>> barycenter_direct;
  std::optional<std::vector<Point>> barycenter_sde;
  std::map<std::string, std::vector<double>> stats;
  std::vector<std::optional<BoundaryEstimate>> limits;  // per particle, at the horizon
  std::optional<Point> busemann_limit;                  // G of the estimated limit measure
  std::string limit_geodesic;                           // how s_t, h_t were referenced
};

/// Per-step Brownian increments for all particles. Draw order is
/// (substep, particle, coordinate), so aggregating substeps reproduces a
/// finer run exactly.
class IncrementSource {
 public:
  IncrementSource(const SimConfig& c, std::size_t particles)
      : rng_(c.seed, c.replica), n_(particles), d_(c.d), sub_(c.substeps),
        scale_(std::sqrt(c.dt / c.substeps)) {}

  std::vector<Vec> next() {
    std::vector<Vec> out(n_, Vec::Zero(d_));
    for (int s = 0; s < sub_; ++s) {
      for (std::size_t p = 0; p < n_; ++p) {
        for (int k = 0; k < d_; ++k) out[p][k] += scale_ * rng_.normal();
      }
    }
    return out;
  }

 private:
  CounterRng rng_;
  std::size_t n_;
  int d_;
  int sub_;
  double scale_;
};

namespace detail {

inline bool record_at(std::size_t k, std::size_t steps, int every) {
  return k % static_cast<std::size_t>(every) == 0 || k == steps;
}

inline std::optional<BoundaryEstimate> try_limit(const std::vector<Point>& path) {
  try {
    return boundary_limit_estimate(path);
  } catch (const InvalidArgument&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Two Brownian particles X, Y and their midpoint Z, recomputed directly and
/// integrated by the SDE (Ito-exponential midpoint scheme or Heun on the
/// two-point barycenter SDE) on the same noise.
///
/// stats: rho_XY, D_t (against o), s_t, h_t (coordinates of Z_direct along
/// the limit geodesic), defect_direct, defect_sde (|rho(X,Z) - rho(Z,Y)|),
/// gap (rho(Z_direct, Z_sde)).
inline Trajectory run_two_particle(SimConfig cfg) {
  cfg.n_particles = 2;
  cfg.validate();
  const auto starts = cfg.resolved_starts();
  const Point o = cfg.base_point();
  const std::size_t steps = cfg.steps();

  Point X = starts[0], Y = starts[1];
  Point Zs = geodesic_point(X, Y, 0.5);
  IncrementSource noise(cfg, 2);
  const std::vector<double> half{0.5, 0.5};

  Trajectory tr;
  tr.particles.assign(2, {});
  tr.barycenter_direct.emplace();
  if (cfg.track_sde) tr.barycenter_sde.emplace();
  auto& st = tr.stats;

  auto record = [&](std::size_t k) {
    const Point Zd = geodesic_point(X, Y, 0.5);
    tr.times.push_back(static_cast<double>(k) * cfg.dt);
    tr.particles[0].push_back(X);
    tr.particles[1].push_back(Y);
    tr.barycenter_direct->push_back(Zd);
    st["rho_XY"].push_back(distance(X, Y));
    st["D_t"].push_back(signed_distance_D(X, Y, Zd, o));
    st["defect_direct"].push_back(std::abs(distance(X, Zd) - distance(Zd, Y)));
    if (cfg.track_sde) {
      tr.barycenter_sde->push_back(Zs);
      st["defect_sde"].push_back(std::abs(distance(X, Zs) - distance(Zs, Y)));
      st["gap"].push_back(distance(Zd, Zs));
    }
  };

  record(0);
  for (std::size_t k = 1; k <= steps; ++k) {
    const auto inc = noise.next();
    const Point Xn = bm_step(X, inc[0], cfg.dt);
    const Point Yn = bm_step(Y, inc[1], cfg.dt);
    if (cfg.track_sde) {
      if (cfg.scheme == Scheme::ito_exp) {
        Zs = midpoint_sde_step(X, Y, Zs, inc[0], inc[1]);
      } else {
        Zs = nparticle_barycenter_sde_step(Zs, {X, Y}, {Xn, Yn}, half);
      }
    }
    X = Xn;
    Y = Yn;
    if (detail::record_at(k, steps, cfg.record_every)) record(k);
  }

  // coordinates of Z along the estimated limit geodesic
  tr.limits = {detail::try_limit(tr.particles[0]), detail::try_limit(tr.particles[1])};
  std::optional<detail::CompleteGeodesic> g;
  if (tr.limits[0] && tr.limits[1] && !tr.limits[0]->point.approx_equal(tr.limits[1]->point)) {
    g = detail::complete_geodesic(tr.limits[0]->point, tr.limits[1]->point);
    tr.limit_geodesic = "boundary-limits";
  } else {
    g = detail::complete_geodesic(X, Y);
    tr.limit_geodesic = "final-chord";
  }
  const auto& zd = *tr.barycenter_direct;
  const Point ref = detail::project(*g, zd.front());
  const double ref_level = detail::axial_level(*g, ref);
  auto& s = st["s_t"];
  auto& h = st["h_t"];
  for (const auto& z : zd) {
    s.push_back(0.5 * (detail::axial_level(*g, z) - ref_level));
    h.push_back(distance(z, detail::project(*g, z)));
  }
  return tr;
}

/// n independent Brownian particles with weights p_i and their exponential
/// barycenter Z, recomputed directly at every recorded time (and optionally
/// integrated by the Heun barycenter SDE).
///
/// stats: lln_<i> = rho(o, X^i_t) / t, upsilon_<i>_<j> = rho(X^i_t, X^j_t),
/// gap = rho(Z_direct, Z_sde), and rho_Z_G = rho(Z_t, G(mu_inf)) when every
/// particle has a boundary estimate and the estimated limit measure is in
/// class U.
inline Trajectory run_nparticle(SimConfig cfg) {
  cfg.validate();
  const auto starts = cfg.resolved_starts();
  const auto weights = cfg.resolved_weights();
  const Point o = cfg.base_point();
  const std::size_t n = starts.size();
  const std::size_t steps = cfg.steps();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (distance(starts[i], starts[j]) < kCoincidentTol) {
        throw InvalidArgument("run_nparticle: starting points must be distinct");
      }
    }
  }

  auto measure_of = [&](const std::vector<Point>& pts) {
    std::vector<DiscreteMeasure::Atom> atoms;
    for (std::size_t i = 0; i < n; ++i) atoms.push_back({weights[i], pts[i]});
    return DiscreteMeasure(std::move(atoms));
  };

  std::vector<Point> X = starts;
  BarycenterOptions bopt;
  bopt.tol = 1e-12;
  Point Zd = solve_exp_barycenter(measure_of(X), bopt).point;
  Point Zs = Zd;
  IncrementSource noise(cfg, n);

  Trajectory tr;
  tr.particles.assign(n, {});
  tr.barycenter_direct.emplace();
  if (cfg.track_sde) tr.barycenter_sde.emplace();

  auto record = [&](std::size_t k) {
    // the rounding floor of |H| grows with the spread of the atoms
    double spread = 0.0;
    for (const auto& x : X) spread = std::max(spread, distance(Zd, x));
    bopt.tol = 1e-10 * (1.0 + spread);
    bopt.stall_tol = 1e-6 * (1.0 + spread);
    bopt.initial = Zd;
    Zd = solve_exp_barycenter(measure_of(X), bopt).point;
    const double t = static_cast<double>(k) * cfg.dt;
    tr.times.push_back(t);
    for (std::size_t i = 0; i < n; ++i) {
      tr.particles[i].push_back(X[i]);
      tr.stats["lln_" + std::to_string(i)].push_back(t > 0.0 ? distance(o, X[i]) / t : 0.0);
      for (std::size_t j = i + 1; j < n; ++j) {
        tr.stats["upsilon_" + std::to_string(i) + "_" + std::to_string(j)].push_back(distance(X[i], X[j]));
      }
    }
    tr.barycenter_direct->push_back(Zd);
    if (cfg.track_sde) {
      tr.barycenter_sde->push_back(Zs);
      tr.stats["gap"].push_back(distance(Zd, Zs));
    }
  };

  record(0);
  std::vector<Point> next(X);
  for (std::size_t k = 1; k <= steps; ++k) {
    const auto inc = noise.next();
    for (std::size_t i = 0; i < n; ++i) next[i] = bm_step(X[i], inc[i], cfg.dt);
    if (cfg.track_sde) Zs = nparticle_barycenter_sde_step(Zs, X, next, weights);
    X = next;
    if (detail::record_at(k, steps, cfg.record_every)) record(k);
  }

  for (std::size_t i = 0; i < n; ++i) tr.limits.push_back(detail::try_limit(tr.particles[i]));
  const bool all = std::all_of(tr.limits.begin(), tr.limits.end(), [](const auto& l) { return l.has_value(); });
  if (all && n >= 3) {
    std::vector<BoundaryMeasure::Atom> atoms;
    for (std::size_t i = 0; i < n; ++i) atoms.push_back({weights[i], tr.limits[i]->point});
    const BoundaryMeasure mu(std::move(atoms));
    if (mu.in_class_U()) {
      BusemannOptions opt;
      opt.base = o;
      tr.busemann_limit = solve_busemann_barycenter(mu, opt).point;
      auto& r = tr.stats["rho_Z_G"];
      for (const auto& z : *tr.barycenter_direct) r.push_back(distance(z, *tr.busemann_limit));
    }
  }
  return tr;
}

/// Brownian motion of variance 1/2 along the complete geodesic (ab), started
/// at z0 (default: the projection of o). Each step draws two independent
/// increments and keeps only their last coordinates.
///
/// stats: s_t (signed arclength from the start, positive toward b).
inline Trajectory run_geodesic(SimConfig cfg, const BoundaryPoint& a, const BoundaryPoint& b,
                               std::optional<Point> z0 = std::nullopt) {
  cfg.n_particles = 2;
  cfg.validate();
  if (a.dim() != cfg.d || b.dim() != cfg.d) throw InvalidArgument("config.a/b: dimension mismatch");
  if (a.approx_equal(b)) throw InvalidArgument("config.a/b: endpoints coincide");
  const Point start = z0 ? *z0 : project_to_geodesic(cfg.base_point(), a, b);
  if (start.dim() != cfg.d) throw InvalidArgument("config.z0: dimension mismatch");
  if (distance(start, project_to_geodesic(start, a, b)) > 1e-9) {
    throw InvalidArgument("config.z0: not on the geodesic through a and b");
  }
  const std::size_t steps = cfg.steps();
  IncrementSource noise(cfg, 2);
  Trajectory tr;
  tr.particles.assign(1, {});
  auto& s = tr.stats["s_t"];
  Point z = start;
  auto record = [&](std::size_t k) {
    tr.times.push_back(static_cast<double>(k) * cfg.dt);
    tr.particles[0].push_back(z);
    s.push_back(geodesic_coords(z, a, b, start).s);
  };
  record(0);
  for (std::size_t k = 1; k <= steps; ++k) {
    const auto inc = noise.next();
    z = geodesic_bm_step(z, a, b, inc[0][cfg.d - 1], inc[1][cfg.d - 1]);
    // pull back onto the geodesic so rounding cannot accumulate
    z = project_to_geodesic(z, a, b);
    if (detail::record_at(k, steps, cfg.record_every)) record(k);
  }
  tr.limit_geodesic = "configured";
  return tr;
}

}  // namespace hyperbary
