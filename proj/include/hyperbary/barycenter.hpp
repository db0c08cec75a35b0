#pragma once

// Exponential barycenters (Karcher means) of finite measures on H^d.
//
// H_mu(z) = sum_i w_i log_z(x_i) vanishes exactly at the barycenter, which is
// also the minimizer of f(z) = sum_i w_i rho^2(z, x_i); grad f = -2 H_mu.
// The covariant derivative of H_mu is the aggregate psi operator, so a Newton
// step is available for free.

#include "hyperbary/geometry.hpp"
#include "hyperbary/jacobi.hpp"
#include "hyperbary/linalg.hpp"
#include "hyperbary/measures.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace hyperbary {

inline TangentVector field_H(const Point& z, const DiscreteMeasure& mu) {
  Vec acc = Vec::Zero(z.dim());
  for (const auto& a : mu.atoms()) acc += a.weight * log_map(z, a.point).comps;
  return {z, acc};
}

/// f(z) = sum_i w_i rho^2(z, x_i).
inline double frechet_objective(const Point& z, const DiscreteMeasure& mu) {
  double f = 0.0;
  for (const auto& a : mu.atoms()) {
    const double r = distance(z, a.point);
    f += a.weight * r * r;
  }
  return f;
}

/// Euclidean mean of horizontal coordinates, geometric mean of heights.
inline Point barycenter_initial_guess(const DiscreteMeasure& mu) {
  const int d = mu.dim();
  Vec horiz = Vec::Zero(d - 1);
  double log_h = 0.0;
  for (const auto& a : mu.atoms()) {
    horiz += a.weight * a.point.horizontal();
    log_h += a.weight * std::log(a.point.height());
  }
  return Point(detail::lift(horiz, std::exp(log_h)));
}

enum class BarycenterMethod { newton, fixed_point };

struct BarycenterOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  BarycenterMethod method = BarycenterMethod::newton;
  double step = 0.5;  // tau for the fixed-point iteration
  std::optional<Point> initial;
  // an iterate the line search can no longer improve is accepted when its
  // residual is below this (0: never); covers the rounding floor at large spread
  double stall_tol = 0.0;
};

struct BarycenterResult {
  Point point;
  double residual = 0.0;  // |H_mu(point)|
  int iterations = 0;
};

inline BarycenterResult solve_exp_barycenter(const DiscreteMeasure& mu_in,
                                             const BarycenterOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw InvalidArgument("exp_barycenter: tol must be > 0");
  const DiscreteMeasure mu = mu_in.merged();
  if (mu.size() == 1) return {mu.atoms().front().point, 0.0, 0};

  Point z = opt.initial ? *opt.initial : barycenter_initial_guess(mu);
  TangentVector H = field_H(z, mu);
  double hn = H.norm();
  double f = frechet_objective(z, mu);

  int it = 0;
  bool stalled = false;
  for (; it < opt.max_iter && hn > opt.tol; ++it) {
    TangentVector dir = H * opt.step;
    if (opt.method == BarycenterMethod::newton) {
      const TangentOperator A = aggregate_psi(z, mu);
      dir = TangentVector{z, -A.matrix.ldlt().solve(H.comps)};
    }
    // directional derivative of f along dir
    const double slope = -2.0 * inner(H, dir);

    double t = 1.0;
    bool accepted = false;
    Point trial = z;
    double f_trial = f;
    TangentVector H_trial = H;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      trial = exp_map(z, dir * t);
      f_trial = frechet_objective(trial, mu);
      H_trial = field_H(trial, mu);
      // Armijo on f; once |H|^2 drops below the rounding of f (far-apart
      // atoms) only the residual can still show progress
      if (f_trial <= f + 1e-4 * t * slope + 64.0 * 2.2e-16 * std::abs(f) ||
          H_trial.norm() <= (1.0 - 1e-4 * t) * hn) {
        accepted = true;
        break;
      }
    }
    if (!accepted || (H_trial.norm() >= hn && f_trial >= f)) {
      stalled = true;  // rounding floor reached
      break;
    }
    z = trial;
    f = f_trial;
    H = H_trial;
    hn = H.norm();
  }
  if (hn > opt.tol && !(stalled && hn <= opt.stall_tol)) {
    throw NotConverged("exp_barycenter: residual " + sci(hn) + " after " + std::to_string(it) +
                       " iterations (tol " + sci(opt.tol) + ")");
  }
  return {z, hn, it};
}

inline Point exp_barycenter(const DiscreteMeasure& mu, double tol = 1e-10) {
  BarycenterOptions opt;
  opt.tol = tol;
  return solve_exp_barycenter(mu, opt).point;
}

/// Returns (sum of weights w_i, matrix sum w_i v_i v_i^T) with v_i the
/// Euclidean-unit direction from z to each atom, each term scaled by `scale_i`.
namespace detail {

template <class Atoms, class Scale>
double direction_moment(const Point& z, const Atoms& atoms, Scale scale, Mat& out) {
  const int d = z.dim();
  out = Mat::Zero(d, d);
  double total = 0.0;
  for (const auto& a : atoms) {
    const double s = scale(a);
    if (s == 0.0) continue;
    Vec v;
    try {
      v = unit_direction(z, a.point).comps / z.height();
    } catch (const CoincidentPoints&) {
      continue;
    }
    out += (a.weight * s) * v * v.transpose();
    total += a.weight * s;
  }
  return total;
}

}  // namespace detail

/// min over unit w of sum_i w_i rho_i sin^2(w, v_i)
///   = sum_i w_i rho_i - lambda_max(sum_i w_i rho_i v_i v_i^T).
inline double epsilon_convexity(const Point& z, const DiscreteMeasure& mu) {
  Mat m;
  const double total = detail::direction_moment(
      z, mu.atoms(), [&](const auto& a) { return distance(z, a.point); }, m);
  return std::max(0.0, total - largest_eigenvalue(m));
}

/// sum_i w_i rho(probe, x_i) - rho(probe, barycenter); nonnegative by convexity
/// of rho(probe, .).
inline double jensen_gap(const DiscreteMeasure& mu, const Point& probe) {
  const Point b = exp_barycenter(mu);
  double avg = 0.0;
  for (const auto& a : mu.atoms()) avg += a.weight * distance(probe, a.point);
  return avg - distance(probe, b);
}

}  // namespace hyperbary
