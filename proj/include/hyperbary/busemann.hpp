#pragma once

// Busemann functions on H^d and Busemann barycenters of boundary measures.
//
// In the half-space chart the Busemann function normalized at o is
//   psi_{o,xi}(y) = log((|y_bar - xi|^2 + h^2) / h) - (same at o)   (finite xi)
//   psi_{o,inf}(y) = -log h + log h(o)
// and its gradient is minus the unit vector pointing at the boundary point.

#include "hyperbary/barycenter.hpp"
#include "hyperbary/geometry.hpp"
#include "hyperbary/linalg.hpp"
#include "hyperbary/measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>

namespace hyperbary {

inline double busemann_value(const Point& o, const BoundaryPoint& x, const Point& y) {
  detail::require_same_dim(o.dim(), y.dim(), "busemann_value");
  detail::require_same_dim(o.dim(), x.dim(), "busemann_value");
  return detail::horo_level(x, y) - detail::horo_level(x, o);
}

/// rho(y, phi(o, x)(t)) - t; converges to busemann_value as t grows.
inline double busemann_finite_t(const Point& o, const BoundaryPoint& x, const Point& y, double t) {
  if (!(t > 0.0)) throw InvalidArgument("busemann_finite_t: t must be > 0");
  const Point ray_t = exp_map(o, unit_direction(o, x) * t);
  return distance(y, ray_t) - t;
}

/// psi_mu(z) = sum_i w_i psi_{o, x_i}(z).
inline double psi_mu_value(const Point& o, const BoundaryMeasure& mu, const Point& z) {
  double acc = 0.0;
  for (const auto& a : mu.atoms()) acc += a.weight * busemann_value(o, a.point, z);
  return acc;
}

/// grad psi_mu(z) = -sum_i w_i phi_dot(z, x_i)(0).
inline TangentVector grad_psi_mu(const Point& z, const BoundaryMeasure& mu) {
  Vec acc = Vec::Zero(z.dim());
  for (const auto& a : mu.atoms()) acc -= a.weight * unit_direction(z, a.point).comps;
  return {z, acc};
}

/// min over unit w of sum_i w_i sin^2(w, v_i) = 1 - lambda_max(sum_i w_i v_i v_i^T).
inline double alpha_convexity(const Point& z, const BoundaryMeasure& mu) {
  Mat m;
  detail::direction_moment(z, mu.atoms(), [](const auto&) { return 1.0; }, m);
  return std::clamp(1.0 - largest_eigenvalue(m), 0.0, 1.0);
}

/// Hessian of psi_mu at z in hyperbolic-orthonormal chart coordinates:
/// sum_i w_i (I - v_i v_i^T). Eigenvalues lie in [alpha, 1].
inline Mat busemann_hessian(const Point& z, const BoundaryMeasure& mu) {
  const int d = z.dim();
  Mat m;
  detail::direction_moment(z, mu.atoms(), [](const auto&) { return 1.0; }, m);
  return Mat::Identity(d, d) - m;
}

class ClassUViolation : public InvalidArgument {
 public:
  ClassUViolation(std::size_t index, BoundaryPoint atom, double weight)
      : InvalidArgument("measure is not in class U: atom " + std::to_string(index) + " at " +
                        describe(atom) + " has aggregated weight " + std::to_string(weight) +
                        " >= 1/2"),
        index_(index),
        atom_(std::move(atom)),
        weight_(weight) {}

  std::size_t index() const { return index_; }
  const BoundaryPoint& atom() const { return atom_; }
  double weight() const { return weight_; }

 private:
  std::size_t index_;
  BoundaryPoint atom_;
  double weight_;
};

inline constexpr double kMaxBusemannStep = 2.0;

enum class BusemannMethod { newton, gradient };

struct BusemannOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  BusemannMethod method = BusemannMethod::newton;
  double step = 0.5;          // eta for plain gradient descent
  std::optional<Point> base;  // o; defaults to (0, ..., 0, 1)
};

/// Radius T of a ball B(o, T) on whose boundary grad psi_mu points outward,
/// from cosh^2(T) > 4 / (sin^2(eps) (1 - 2 c0)).
struct ExistenceCertificate {
  double eps = 0.0;     // angular cap radius seen from o
  double c0 = 0.0;      // largest mass of any eps-cap
  double radius = 0.0;  // T
  double max_distance = 0.0;  // largest rho(o, iterate)
  bool held = false;          // solution inside B(o, T)
};

struct BusemannResult {
  Point point;
  double residual = 0.0;
  int iterations = 0;
  double alpha = 0.0;
  ExistenceCertificate certificate;
};

inline ExistenceCertificate existence_certificate(const Point& o, const BoundaryMeasure& mu) {
  const auto m = mu.merged();
  std::vector<Vec> dirs;
  double wmax = 0.0;
  for (const auto& a : m.atoms()) {
    dirs.push_back(unit_direction(o, a.point).comps / o.height());
    wmax = std::max(wmax, a.weight);
  }
  double min_angle = std::numbers::pi;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    for (std::size_t j = i + 1; j < dirs.size(); ++j) {
      min_angle = std::min(min_angle, std::acos(std::clamp(dirs[i].dot(dirs[j]), -1.0, 1.0)));
    }
  }
  ExistenceCertificate c;
  // caps of radius eps around any boundary point meet at most one atom once
  // 2 eps < min_angle, so c0 is the heaviest atom
  c.eps = std::min(min_angle / 4.0, std::numbers::pi / 4.0);
  c.c0 = wmax;
  const double s = std::sin(c.eps);
  const double bound = 4.0 / (s * s * (1.0 - 2.0 * c.c0));
  c.radius = std::acosh(std::sqrt(std::max(bound, 1.0))) * (1.0 + 1e-9) + 1e-12;
  return c;
}

inline BusemannResult solve_busemann_barycenter(const BoundaryMeasure& mu_in,
                                                const BusemannOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw InvalidArgument("busemann_barycenter: tol must be > 0");
  const BoundaryMeasure mu = mu_in.merged();
  if (auto bad = mu.class_u_violation()) {
    const auto& a = mu.atoms()[*bad];
    throw ClassUViolation(*bad, a.point, a.weight);
  }
  const int d = mu.dim();
  const Point o = opt.base ? *opt.base : Point::origin(d);

  BusemannResult res;
  res.certificate = existence_certificate(o, mu);

  // start from the barycenter of the unit-distance proxies phi(o, x_i)(1)
  std::vector<DiscreteMeasure::Atom> proxies;
  for (const auto& a : mu.atoms()) proxies.push_back({a.weight, exp_map(o, unit_direction(o, a.point))});
  Point z = exp_barycenter(DiscreteMeasure::normalized(std::move(proxies)));

  TangentVector g = grad_psi_mu(z, mu);
  double gn = g.norm();
  double val = psi_mu_value(o, mu, z);
  double max_dist = distance(o, z);

  int it = 0;
  for (; it < opt.max_iter && gn > opt.tol; ++it) {
    TangentVector dir = g * (-opt.step);
    if (opt.method == BusemannMethod::newton) {
      const double h = z.height();
      const Mat hess = busemann_hessian(z, mu);
      const Vec step = hess.ldlt().solve(-g.comps / h);
      dir = TangentVector{z, step * h};
    }
    // far from G the Hessian is nearly singular; cap the step (trust radius)
    const double len = dir.norm();
    if (len > kMaxBusemannStep) dir = dir * (kMaxBusemannStep / len);
    const double slope = inner(g, dir);
    double t = 1.0;
    bool accepted = false;
    Point trial = z;
    double v_trial = val;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      trial = exp_map(z, dir * t);
      v_trial = psi_mu_value(o, mu, trial);
      if (v_trial <= val + 1e-4 * t * slope + 64.0 * 2.2e-16 * (1.0 + std::abs(val))) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const TangentVector g_trial = grad_psi_mu(trial, mu);
    if (g_trial.norm() >= gn && v_trial >= val) break;
    z = trial;
    val = v_trial;
    g = g_trial;
    gn = g.norm();
    max_dist = std::max(max_dist, distance(o, z));
  }
  if (gn > opt.tol) {
    throw NotConverged("busemann_barycenter: residual " + sci(gn) + " after " + std::to_string(it) +
                       " iterations (tol " + sci(opt.tol) + ")");
  }
  res.point = z;
  res.residual = gn;
  res.iterations = it;
  res.alpha = alpha_convexity(z, mu);
  res.certificate.max_distance = max_dist;
  res.certificate.held = distance(o, z) < res.certificate.radius;
  return res;
}

inline Point busemann_barycenter(const BoundaryMeasure& mu, double tol = 1e-10) {
  BusemannOptions opt;
  opt.tol = tol;
  return solve_busemann_barycenter(mu, opt).point;
}

// Closed forms in the upper half-plane (d = 2) for uniform measures.

/// Uniform measure on x1 < x2 < x3: the homographic image of the x3 = inf case.
inline Point closed_form_n3(double x1, double x2, double x3) {
  if (!(x1 < x2 && x2 < x3)) throw InvalidArgument("closed_form_n3: inputs must be strictly increasing");
  using C = std::complex<double>;
  const double r3 = std::sqrt(3.0);
  const C num(x1 * x3 + x2 * x3 - 2.0 * x1 * x2, r3 * x3 * (x2 - x1));
  const C den(2.0 * x3 - x1 - x2, r3 * (x2 - x1));
  const C g = num / den;
  return Point{g.real(), g.imag()};
}

/// Uniform measure on {x1, x2, inf}, x1 < x2: the x3 -> inf limit of closed_form_n3.
inline Point closed_form_n3_infinity(double x1, double x2) {
  if (!(x1 < x2)) throw InvalidArgument("closed_form_n3_infinity: inputs must be strictly increasing");
  return Point{0.5 * (x1 + x2), 0.5 * std::sqrt(3.0) * (x2 - x1)};
}

/// Uniform measure on four boundary points in circular order: the crossing of
/// the geodesics (x1 x3) and (x2 x4). Only x4 may be infinite after rotating
/// the circular order.
inline Point closed_form_n4(std::array<BoundaryPoint, 4> pts) {
  for (const auto& p : pts) {
    if (p.dim() != 2) throw InvalidArgument("closed_form_n4: requires d = 2");
  }
  // rotate so that an infinite point, if any, comes last
  for (int k = 0; k < 4; ++k) {
    if (pts[k].is_infinity()) {
      std::rotate(pts.begin(), pts.begin() + k + 1, pts.end());
      break;
    }
  }
  std::array<double, 4> x{};
  const int finite_count = pts[3].is_infinity() ? 3 : 4;
  for (int k = 0; k < finite_count; ++k) {
    if (pts[k].is_infinity()) throw InvalidArgument("closed_form_n4: at most one infinite point");
    x[k] = pts[k].xi()[0];
  }
  // circular order: some rotation of the finite values is increasing
  int descents = 0;
  for (int k = 0; k < finite_count; ++k) {
    const double a = x[k];
    const double b = x[(k + 1) % finite_count];
    if (a == b) throw InvalidArgument("closed_form_n4: repeated point");
    if (b < a) ++descents;
  }
  if (finite_count == 3 ? descents != 1 : descents != 1) {
    throw InvalidArgument("closed_form_n4: points are not in circular order");
  }
  if (finite_count == 4) {
    // rotate so that x is increasing
    int start = 0;
    for (int k = 0; k < 4; ++k) {
      if (x[(k + 3) % 4] > x[k]) start = k;
    }
    std::rotate(x.begin(), x.begin() + start, x.end());
  } else if (!(x[0] < x[1] && x[1] < x[2])) {
    throw InvalidArgument("closed_form_n4: points are not in circular order");
  }

  const double c1 = 0.5 * (x[0] + x[2]);
  const double r1 = 0.5 * (x[2] - x[0]);
  double u;
  if (finite_count == 3) {
    u = x[1];
  } else {
    const double c2 = 0.5 * (x[1] + x[3]);
    const double r2 = 0.5 * (x[3] - x[1]);
    u = (r1 * r1 - r2 * r2 + c2 * c2 - c1 * c1) / (2.0 * (c2 - c1));
  }
  const double v2 = r1 * r1 - (u - c1) * (u - c1);
  if (!(v2 > 0.0)) throw InvalidArgument("closed_form_n4: geodesics do not cross");
  return Point{u, std::sqrt(v2)};
}

/// The closed form for a uniform d = 2 measure with 3 or 4 distinct atoms, if one applies.
inline std::optional<Point> closed_form_uniform(const BoundaryMeasure& mu_in) {
  const BoundaryMeasure mu = mu_in.merged();
  const std::size_t n = mu.size();
  if (mu.dim() != 2 || (n != 3 && n != 4)) return std::nullopt;
  for (const auto& a : mu.atoms()) {
    if (std::abs(a.weight - 1.0 / static_cast<double>(n)) > 1e-12) return std::nullopt;
  }
  std::vector<double> finite;
  bool has_inf = false;
  for (const auto& a : mu.atoms()) {
    if (a.point.is_infinity()) {
      has_inf = true;
    } else {
      finite.push_back(a.point.xi()[0]);
    }
  }
  std::sort(finite.begin(), finite.end());
  if (n == 3) {
    if (has_inf) return closed_form_n3_infinity(finite[0], finite[1]);
    return closed_form_n3(finite[0], finite[1], finite[2]);
  }
  std::array<BoundaryPoint, 4> pts{BoundaryPoint::infinity(2), BoundaryPoint::infinity(2),
                                   BoundaryPoint::infinity(2), BoundaryPoint::infinity(2)};
  for (std::size_t k = 0; k < finite.size(); ++k) pts[k] = BoundaryPoint::finite({finite[k]});
  return closed_form_n4(pts);
}

}  // namespace hyperbary
