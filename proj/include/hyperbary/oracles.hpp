#pragma once

// Reference computations used by the verification checks and tests. Each one
// is built from first principles (the metric |dx|^2 / h^2, its Christoffel
// symbols, the hyperboloid embedding, derivative-free search) rather than from
// the closed forms it is meant to validate.

#include "hyperbary/geometry.hpp"
#include "hyperbary/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace hyperbary::oracle {

/// Length of the curve s -> geodesic_point(x, y, s) in the half-space metric,
/// from chord sums |dc| / sqrt(h_a h_b) on n and 2n panels with Richardson
/// extrapolation (the chord rule is second order).
inline double arclength(const Point& x, const Point& y, int n = 2000) {
  auto chord_sum = [&](int m) {
    double len = 0.0;
    Vec prev = x.coords();
    for (int k = 1; k <= m; ++k) {
      const Vec cur = geodesic_point(x, y, static_cast<double>(k) / m).coords();
      const double ha = prev[prev.size() - 1], hb = cur[cur.size() - 1];
      len += (cur - prev).norm() / std::sqrt(ha * hb);
      prev = cur;
    }
    return len;
  };
  const double a = chord_sum(n), b = chord_sum(2 * n);
  return (4.0 * b - a) / 3.0;
}

/// Embedding of the chart point into the hyperboloid, ordered (X0, X1..Xd),
/// written out independently of the library conversion.
inline Eigen::VectorXd embed(const Point& p) {
  const int d = p.dim();
  const double h = p[d - 1];
  double r2 = h * h;
  for (int i = 0; i < d - 1; ++i) r2 += p[i] * p[i];
  Eigen::VectorXd X(d + 1);
  X[0] = (r2 + 1.0) / (2.0 * h);
  for (int i = 0; i < d - 1; ++i) X[i + 1] = p[i] / h;
  X[d] = (1.0 - r2) / (2.0 * h);
  return X;
}

inline double minkowski(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return -a[0] * b[0] + a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
}

inline double hyperboloid_distance(const Point& x, const Point& y) {
  return std::acosh(std::max(1.0, -minkowski(embed(x), embed(y))));
}

/// log_x y in chart components, computed on the hyperboloid and pushed back
/// through the differential of the chart map h = 1/(X0 + Xd), c_i = X_i h.
inline Vec hyperboloid_log(const Point& x, const Point& y) {
  const int d = x.dim();
  const Eigen::VectorXd X = embed(x), Y = embed(y);
  const double c = -minkowski(X, Y);
  const double rho = std::acosh(std::max(1.0, c));
  Vec out = Vec::Zero(d);
  if (rho == 0.0) return out;
  const Eigen::VectorXd W = (rho / std::sinh(rho)) * (Y - c * X);
  const double h = 1.0 / (X[0] + X[d]);
  const double dh = -h * h * (W[0] + W[d]);
  for (int i = 0; i < d - 1; ++i) out[i] = W[i + 1] * h + X[i + 1] * dh;
  out[d - 1] = dh;
  return out;
}

/// Gamma(a, b)^k for the metric |dx|^2 / h^2 (conformal factor e^{-2 log h}).
inline Vec christoffel(const Point& x, const Vec& a, const Vec& b) {
  const int d = x.dim();
  const double h = x.height();
  Vec out = -(a * b[d - 1] + b * a[d - 1]) / h;
  out[d - 1] += a.dot(b) / h;
  return out;
}

/// Jdot(u, 0_y)(0) = D/de log(x + e u, y), by central differences plus the
/// connection term.
inline Vec jdot_left_fd(const Point& x, const Vec& u, const Point& y, double eps = 1e-5) {
  const Point xp(Vec(x.coords() + eps * u)), xm(Vec(x.coords() - eps * u));
  const Vec dv = (hyperboloid_log(xp, y) - hyperboloid_log(xm, y)) / (2.0 * eps);
  return dv + christoffel(x, u, hyperboloid_log(x, y));
}

/// Jdot(0_x, v)(0) = d/de log(x, y + e v); the base does not move.
inline Vec jdot_right_fd(const Point& x, const Point& y, const Vec& v, double eps = 1e-5) {
  const Point yp(Vec(y.coords() + eps * v)), ym(Vec(y.coords() - eps * v));
  return (hyperboloid_log(x, yp) - hyperboloid_log(x, ym)) / (2.0 * eps);
}

/// J(u, v)(s) as the derivative of the geodesic family between perturbed
/// endpoints.
inline Vec jacobi_fd(const Point& x, const Vec& u, const Point& y, const Vec& v, double s,
                     double eps = 1e-5) {
  const Point xp(Vec(x.coords() + eps * u)), xm(Vec(x.coords() - eps * u));
  const Point yp(Vec(y.coords() + eps * v)), ym(Vec(y.coords() - eps * v));
  return (geodesic_point(xp, yp, s).coords() - geodesic_point(xm, ym, s).coords()) / (2.0 * eps);
}

/// f''(0) from a 5-point stencil.
inline double second_derivative(const std::function<double(double)>& f, double h = 1e-3) {
  return (-f(2 * h) + 16 * f(h) - 30 * f(0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h);
}

/// f'(0) from a 4th-order central stencil.
inline double first_derivative(const std::function<double(double)>& f, double h = 1e-4) {
  return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
}

/// Nelder-Mead simplex minimization with restarts.
inline std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x0, double step = 0.5, double ftol = 1e-15,
                                       int max_iter = 20000, int restarts = 4) {
  const std::size_t n = x0.size();
  for (int r = 0; r < restarts; ++r) {
    std::vector<std::vector<double>> s(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) s[i + 1][i] += step;
    std::vector<double> fs(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fs[i] = f(s[i]);
    for (int it = 0; it < max_iter; ++it) {
      std::vector<std::size_t> idx(n + 1);
      for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
      std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fs[a] < fs[b]; });
      std::vector<std::vector<double>> s2;
      std::vector<double> f2;
      for (auto i : idx) {
        s2.push_back(s[i]);
        f2.push_back(fs[i]);
      }
      s = s2;
      fs = f2;
      double spread = 0.0;
      for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t k = 0; k < n; ++k) spread = std::max(spread, std::abs(s[i][k] - s[0][k]));
      }
      if (std::abs(fs[n] - fs[0]) <= ftol * (1.0 + std::abs(fs[0])) && spread < 1e-10) break;

      std::vector<double> c(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) c[k] += s[i][k] / n;
      }
      auto along = [&](double t) {
        std::vector<double> p(n);
        for (std::size_t k = 0; k < n; ++k) p[k] = c[k] + t * (s[n][k] - c[k]);
        return p;
      };
      const auto xr = along(-1.0);
      const double fr = f(xr);
      if (fr < fs[0]) {
        const auto xe = along(-2.0);
        const double fe = f(xe);
        if (fe < fr) {
          s[n] = xe;
          fs[n] = fe;
        } else {
          s[n] = xr;
          fs[n] = fr;
        }
      } else if (fr < fs[n - 1]) {
        s[n] = xr;
        fs[n] = fr;
      } else {
        const auto xc = fr < fs[n] ? along(-0.5) : along(0.5);
        const double fc = f(xc);
        if (fc < std::min(fr, fs[n])) {
          s[n] = xc;
          fs[n] = fc;
        } else {
          for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t k = 0; k < n; ++k) s[i][k] = s[0][k] + 0.5 * (s[i][k] - s[0][k]);
            fs[i] = f(s[i]);
          }
        }
      }
    }
    x0 = s[0];
    step *= 0.1;
  }
  return x0;
}

/// min over Euclidean-unit w of sum_i c_i sin^2(w, v_i) for d = 2 or 3, by a
/// dense sphere grid followed by Nelder-Mead refinement in angle coordinates.
inline double min_weighted_sin2(const std::vector<Vec>& dirs, const std::vector<double>& coef) {
  const int d = static_cast<int>(dirs.front().size());
  auto value = [&](const Vec& w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      const double c = w.dot(dirs[i]) / dirs[i].norm();
      acc += coef[i] * (1.0 - c * c);
    }
    return acc;
  };
  auto from_angles = [&](const std::vector<double>& a) {
    Vec w(d);
    if (d == 2) {
      w << std::cos(a[0]), std::sin(a[0]);
    } else {
      w << std::sin(a[0]) * std::cos(a[1]), std::sin(a[0]) * std::sin(a[1]), std::cos(a[0]);
    }
    return w;
  };
  std::vector<double> best;
  double fbest = 1e300;
  if (d == 2) {
    for (int k = 0; k < 7200; ++k) {
      const std::vector<double> a{std::numbers::pi * k / 7200.0};
      const double v = value(from_angles(a));
      if (v < fbest) {
        fbest = v;
        best = a;
      }
    }
  } else if (d == 3) {
    for (int i = 0; i <= 360; ++i) {
      for (int j = 0; j < 720; ++j) {
        const std::vector<double> a{std::numbers::pi * i / 360.0, std::numbers::pi * j / 360.0};
        const double v = value(from_angles(a));
        if (v < fbest) {
          fbest = v;
          best = a;
        }
      }
    }
  } else {
    throw InvalidArgument("min_weighted_sin2: only d = 2, 3");
  }
  const auto refined = nelder_mead([&](const std::vector<double>& a) { return value(from_angles(a)); }, best,
                                   std::numbers::pi / 720.0);
  return std::min(fbest, value(from_angles(refined)));
}

}  // namespace hyperbary::oracle
