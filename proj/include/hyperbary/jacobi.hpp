#pragma once

// Jacobi fields along geodesics of H^d and the endpoint-derivative operators
// built from them. Along gamma(x, y) with rho = d(x, y), in a parallel frame
// E_1 = unit tangent, E_2..E_d:
//
//   J(u, v)(s) = ((1-s) u^1 + s v^1) E_1(s)
//              + sum_i ((cosh(s rho) - sinh(s rho) coth rho) u^i
//                       + sinh(s rho) / sinh rho * v^i) E_i(s)
//
// so that Jdot(u, 0)(0) = -u^L - rho coth(rho) u^N and
// Jdot(0, v)(0) = (//v)^L + rho / sinh(rho) (//v)^N.

#include "hyperbary/geometry.hpp"
#include "hyperbary/measures.hpp"

#include <cmath>

namespace hyperbary {

/// rho * coth(rho), continuous at 0.
inline double rho_coth(double rho) {
  if (std::abs(rho) < 1e-6) return 1.0 + rho * rho / 3.0;
  return rho / std::tanh(rho);
}

/// rho / sinh(rho), continuous at 0.
inline double rho_over_sinh(double rho) {
  if (std::abs(rho) < 1e-6) return 1.0 - rho * rho / 6.0;
  return rho / std::sinh(rho);
}

/// A linear map on the tangent space at `base`, in chart components.
struct TangentOperator {
  Point base;
  Mat matrix;
  bool at_diagonal = false;  // built from a coincident-point limit

  TangentVector apply(const TangentVector& u) const { return {base, matrix * u.comps}; }
  TangentVector operator()(const TangentVector& u) const { return apply(u); }

  TangentOperator inverse() const {
    Mat inv = matrix.inverse();
    if (!inv.allFinite()) throw Error("TangentOperator: singular operator");
    return {base, std::move(inv), at_diagonal};
  }

  TangentOperator operator+(const TangentOperator& o) const {
    return {base, matrix + o.matrix, at_diagonal || o.at_diagonal};
  }
  TangentOperator operator*(double s) const { return {base, matrix * s, at_diagonal}; }

  /// Matrix in the hyperbolic-orthonormal frame given as a list of vectors at base.
  Mat in_frame(const std::vector<TangentVector>& frame) const {
    const auto n = static_cast<Eigen::Index>(frame.size());
    Mat out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const TangentVector img = apply(frame[j]);
      for (Eigen::Index i = 0; i < n; ++i) out(i, j) = inner(frame[i], img);
    }
    return out;
  }
};

inline TangentVector jacobi_field(const TangentVector& u, const TangentVector& v, double s) {
  const Point& x = u.base;
  const Point& y = v.base;
  const double rho = distance(x, y);
  if (rho < kCoincidentTol) throw CoincidentPoints("jacobi_field: coincident endpoints");

  const auto frame = adapted_frame(x, y);
  const Point gs = geodesic_point(x, y, s);
  Vec out = Vec::Zero(x.dim());
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const double ui = inner(u, frame[i]);
    const double vi = inner(v, parallel_transport(x, y, frame[i]));
    double coef;
    if (i == 0) {
      coef = (1.0 - s) * ui + s * vi;
    } else {
      coef = (std::cosh(s * rho) - std::sinh(s * rho) / std::tanh(rho)) * ui +
             std::sinh(s * rho) / std::sinh(rho) * vi;
    }
    out += coef * parallel_transport(x, gs, frame[i]).comps;
  }
  return {gs, out};
}

/// A tangent vector tagged with whether it came from a coincident-point limit.
struct FlaggedVector {
  TangentVector value;
  bool at_diagonal;
};

/// Jdot(u, 0_y)(0) for u at x: the psi operator applied to u.
inline TangentVector jdot_left(const TangentVector& u, const Point& y) {
  const Point& x = u.base;
  const double rho = distance(x, y);
  if (rho < kCoincidentTol) throw CoincidentPoints("jdot_left: coincident points");
  const auto parts = split_tangent(u, x, y);
  return -parts.tangential - parts.normal * rho_coth(rho);
}

/// jdot_left, falling back to the limit operator -Id at the diagonal.
inline FlaggedVector jdot_left_or_limit(const TangentVector& u, const Point& y) {
  if (distance(u.base, y) < kCoincidentTol) return {-u, true};
  return {jdot_left(u, y), false};
}

/// Jdot(0_x, v)(0) for v at y; the result lives at x.
inline TangentVector jdot_right(const TangentVector& v, const Point& x) {
  const Point& y = v.base;
  const double rho = distance(x, y);
  if (rho < kCoincidentTol) throw CoincidentPoints("jdot_right: coincident points");
  const TangentVector w = parallel_transport(y, x, v);
  const auto parts = split_tangent(w, x, y);
  return parts.tangential + parts.normal * rho_over_sinh(rho);
}

/// jdot_right, falling back to the limit operator Id at the diagonal.
inline FlaggedVector jdot_right_or_limit(const TangentVector& v, const Point& x) {
  if (distance(v.base, x) < kCoincidentTol) return {TangentVector{x, v.comps}, true};
  return {jdot_right(v, x), false};
}

/// Matrix of u -> Jdot(u, 0_x)(0) at z. Equals -Id when z = x.
inline TangentOperator psi_operator(const Point& z, const Point& x) {
  const int d = z.dim();
  detail::require_same_dim(d, x.dim(), "psi_operator");
  const double rho = distance(z, x);
  if (rho < kCoincidentTol) return {z, -Mat::Identity(d, d), true};
  const Vec e = unit_direction(z, x).comps / z.height();
  const Mat along = e * e.transpose();
  const Mat id = Mat::Identity(d, d);
  return {z, -(along + rho_coth(rho) * (id - along)), false};
}

/// u -> sum_i w_i psi_(z, x_i)(u).
inline TangentOperator aggregate_psi(const Point& z, const DiscreteMeasure& mu) {
  const int d = z.dim();
  TangentOperator acc{z, Mat::Zero(d, d), false};
  for (const auto& a : mu.atoms()) acc = acc + psi_operator(z, a.point) * a.weight;
  return acc;
}

}  // namespace hyperbary
