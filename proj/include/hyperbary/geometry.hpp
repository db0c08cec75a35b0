#pragma once

// Closed-form Riemannian primitives on H^d, curvature -1, in the upper
// half-space chart {x in R^d : x_d > 0} with metric |dx|^2 / x_d^2.
//
// Every map below is computed after moving the base point to the canonical
// point o = (0, ..., 0, 1) with the chart isometry p -> (p - base_bar) / h_base.
// At o the hyperboloid picture gives elementary formulas without cancellation,
// which keeps exp/log accurate for points that are far apart (the simulations
// routinely see distances of 50-100).

#include "hyperbary/errors.hpp"
#include "hyperbary/linalg.hpp"

#include <cmath>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hyperbary {

/// Distances below this are treated as coincident points.
inline constexpr double kCoincidentTol = 1e-13;

/// A point of H^d in half-space coordinates; the last coordinate is the height.
class Point {
 public:
  Point() = default;

  explicit Point(Vec coords) : coords_(std::move(coords)) { validate(); }

  Point(std::initializer_list<double> coords) {
    coords_.resize(static_cast<Eigen::Index>(coords.size()));
    Eigen::Index i = 0;
    for (double c : coords) coords_[i++] = c;
    validate();
  }

  /// (0, ..., 0, 1).
  static Point origin(int dim) {
    Vec c = Vec::Zero(dim);
    c[dim - 1] = 1.0;
    return Point(std::move(c));
  }

  int dim() const { return static_cast<int>(coords_.size()); }
  double height() const { return coords_[coords_.size() - 1]; }
  const Vec& coords() const { return coords_; }
  double operator[](int i) const { return coords_[i]; }

  /// Horizontal part (first d-1 coordinates).
  Vec horizontal() const { return coords_.head(coords_.size() - 1); }

  bool operator==(const Point& other) const { return coords_ == other.coords_; }

 private:
  void validate() const {
    if (coords_.size() < 2) throw InvalidArgument("Point: dimension must be >= 2");
    if (!coords_.allFinite()) throw InvalidArgument("Point: non-finite coordinate");
    if (!(height() > 0.0)) throw InvalidArgument("Point: height must be > 0");
  }

  Vec coords_;
};

/// A tangent vector in chart components. Hyperbolic norm is |comps| / height.
struct TangentVector {
  Point base;
  Vec comps;

  TangentVector() = default;
  TangentVector(Point b, Vec c) : base(std::move(b)), comps(std::move(c)) {
    if (comps.size() != base.coords().size()) {
      throw DimensionMismatch("TangentVector: components do not match base dimension");
    }
  }

  static TangentVector zero(const Point& at) { return {at, Vec::Zero(at.dim())}; }

  double norm() const { return (comps / base.height()).norm(); }

  TangentVector operator+(const TangentVector& o) const { return {base, comps + o.comps}; }
  TangentVector operator-(const TangentVector& o) const { return {base, comps - o.comps}; }
  TangentVector operator-() const { return {base, -comps}; }
  TangentVector operator*(double s) const { return {base, comps * s}; }
  friend TangentVector operator*(double s, const TangentVector& v) { return v * s; }
};

/// Hyperbolic inner product of two vectors at the same base.
inline double inner(const TangentVector& u, const TangentVector& v) {
  const double h = u.base.height();
  return (u.comps / h).dot(v.comps / h);
}

/// A point of the visibility boundary: a point of the hyperplane {x_d = 0}
/// or the point at infinity.
class BoundaryPoint {
 public:
  static BoundaryPoint infinity(int dim) { return BoundaryPoint(dim); }

  static BoundaryPoint finite(Vec xi) {
    if (!xi.allFinite()) throw InvalidArgument("BoundaryPoint: non-finite coordinate");
    if (xi.size() < 1) throw InvalidArgument("BoundaryPoint: dimension must be >= 2");
    const int dim = static_cast<int>(xi.size()) + 1;
    BoundaryPoint b(dim);
    b.xi_ = std::move(xi);
    return b;
  }

  static BoundaryPoint finite(std::initializer_list<double> xi) {
    Vec v(static_cast<Eigen::Index>(xi.size()));
    Eigen::Index i = 0;
    for (double c : xi) v[i++] = c;
    return finite(std::move(v));
  }

  bool is_infinity() const { return !xi_.has_value(); }
  /// Dimension of the ambient H^d.
  int dim() const { return dim_; }
  const Vec& xi() const {
    if (!xi_) throw InvalidArgument("BoundaryPoint: infinity has no finite coordinates");
    return *xi_;
  }

  bool approx_equal(const BoundaryPoint& o, double tol = 1e-12) const {
    if (is_infinity() || o.is_infinity()) return is_infinity() == o.is_infinity();
    return (xi() - o.xi()).norm() <= tol * (1.0 + xi().norm());
  }

 private:
  explicit BoundaryPoint(int dim) : dim_(dim) {}

  int dim_ = 0;
  std::optional<Vec> xi_;
};

/// Either an interior point or a boundary point; used wherever the geodesic
/// target may be ideal.
using Target = std::variant<Point, BoundaryPoint>;

inline int target_dim(const Target& t) {
  return std::visit([](const auto& p) { return p.dim(); }, t);
}

inline std::string describe(const Point& p) {
  std::string s = "(";
  for (int i = 0; i < p.dim(); ++i) {
    if (i) s += ", ";
    s += std::to_string(p[i]);
  }
  return s + ")";
}

inline std::string describe(const BoundaryPoint& b) {
  if (b.is_infinity()) return "infinity";
  std::string s = "(";
  for (Eigen::Index i = 0; i < b.xi().size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(b.xi()[i]);
  }
  return s + ")";
}

namespace detail {

inline void require_same_dim(int a, int b, const char* what) {
  if (a != b) throw DimensionMismatch(std::string(what) + ": dimension mismatch");
}

inline Vec lift(const Vec& horizontal, double height) {
  Vec out(horizontal.size() + 1);
  out.head(horizontal.size()) = horizontal;
  out[horizontal.size()] = height;
  return out;
}

/// Chart isometry sending `base` to the canonical point.
inline Vec to_local(const Point& base, const Vec& p) {
  Vec q = p;
  const Eigen::Index n = q.size() - 1;
  q.head(n) -= base.coords().head(n);
  return q / base.height();
}

inline Vec from_local(const Point& base, const Vec& q) {
  Vec p = q * base.height();
  const Eigen::Index n = p.size() - 1;
  p.head(n) += base.coords().head(n);
  return p;
}

/// Unnormalized Busemann function for the boundary point b:
/// log((|y_bar - xi|^2 + h^2) / h) for finite xi, -log h at infinity.
inline double horo_level(const BoundaryPoint& b, const Point& y) {
  const double h = y.height();
  if (b.is_infinity()) return -std::log(h);
  const double r2 = (y.horizontal() - b.xi()).squaredNorm() + h * h;
  return std::log(r2) - std::log(h);
}

}  // namespace detail

/// Hyperbolic distance, via sinh(rho/2) = |x - y| / (2 sqrt(h_x h_y)).
inline double distance(const Point& x, const Point& y) {
  detail::require_same_dim(x.dim(), y.dim(), "distance");
  const double e = (x.coords() - y.coords()).norm();
  return 2.0 * std::asinh(e / (2.0 * (std::sqrt(x.height()) * std::sqrt(y.height()))));
}

inline TangentVector log_map(const Point& x, const Point& y) {
  detail::require_same_dim(x.dim(), y.dim(), "log_map");
  const Vec q = detail::to_local(x, y.coords());
  const Eigen::Index n = q.size() - 1;
  const double h = q[n];

  // s is the direction of the hyperboloid log at o; only its direction is used
  Vec s(q.size());
  const double qn = q.stableNorm();
  if (qn < 1e150) {
    s.head(n) = q.head(n);
    s[n] = 0.5 * (q.head(n).squaredNorm() + (h - 1.0) * (h + 1.0));
  } else {
    // same direction scaled by 1 / |q|, free of overflow
    s.head(n) = q.head(n) / qn;
    s[n] = 0.5 * (qn - 1.0 / qn);
  }

  const double rho = distance(x, y);
  const double sn = s.stableNorm();
  if (sn == 0.0 || rho == 0.0) return TangentVector::zero(x);
  return {x, s * (rho / sn) * x.height()};
}

inline Point exp_map(const Point& x, const TangentVector& v) {
  detail::require_same_dim(x.dim(), v.base.dim(), "exp_map");
  const Vec w = v.comps / x.height();
  const double r = w.norm();
  if (r == 0.0) return x;

  const Eigen::Index n = w.size() - 1;
  const Vec u = w / r;
  const double uh = u[n];
  // everything is scaled by e^{-r} so that long steps do not overflow
  const double em = std::exp(-r);
  const double sh = 0.5 * (1.0 - em * em);
  // D = cosh r - u_h sinh r, rewritten to avoid cancellation when u_h -> 1
  double denom;
  if (uh > 0.0) {
    denom = em * em + (u.head(n).squaredNorm() / (1.0 + uh)) * sh;
  } else {
    denom = 0.5 * (1.0 + em * em) - uh * sh;
  }
  Vec q(w.size());
  q.head(n) = u.head(n) * (sh / denom);
  q[n] = em / denom;
  return Point(detail::from_local(x, q));
}

/// Point at fraction s of the geodesic from x to y.
inline Point geodesic_point(const Point& x, const Point& y, double s) {
  return exp_map(x, log_map(x, y) * s);
}

/// Initial unit velocity of the geodesic (or ray) from z to the target.
inline TangentVector unit_direction(const Point& z, const Target& target) {
  detail::require_same_dim(z.dim(), target_dim(target), "unit_direction");
  if (const auto* y = std::get_if<Point>(&target)) {
    const double rho = distance(z, *y);
    if (rho < kCoincidentTol) throw CoincidentPoints("unit_direction: target equals base point");
    TangentVector l = log_map(z, *y);
    return l * (1.0 / l.norm());
  }
  const auto& b = std::get<BoundaryPoint>(target);
  const Eigen::Index n = z.dim() - 1;
  Vec dir = Vec::Zero(z.dim());
  if (b.is_infinity()) {
    dir[n] = 1.0;
  } else {
    const Vec xi = (b.xi() - z.horizontal()) / z.height();
    dir.head(n) = xi;
    dir[n] = 0.5 * (xi.squaredNorm() - 1.0);
    dir.normalize();
  }
  return {z, dir * z.height()};
}

/// Parallel transport along the geodesic from x to y.
///
/// The vertical 2-plane through x and y is totally geodesic; inside it the
/// chart is conformal, so transported vectors rotate (in Euclidean terms) with
/// the geodesic tangent. Components orthogonal to that plane keep their
/// Euclidean direction. Both then scale by h_y / h_x.
inline TangentVector parallel_transport(const Point& x, const Point& y, const TangentVector& v) {
  detail::require_same_dim(x.dim(), y.dim(), "parallel_transport");
  const double scale = y.height() / x.height();
  if (distance(x, y) < kCoincidentTol) return {y, v.comps * scale};

  const Eigen::Index n = x.dim() - 1;
  const Vec diff = y.horizontal() - x.horizontal();
  const double dn = diff.norm();
  if (dn == 0.0) return {y, v.comps * scale};  // vertical geodesic: no turning

  Vec eh = Vec::Zero(x.dim());
  eh.head(n) = diff / dn;

  const Vec tx = unit_direction(x, y).comps / x.height();
  const Vec ty = -unit_direction(y, x).comps / y.height();
  const double ax = tx.dot(eh), bx = tx[n];
  const double ay = ty.dot(eh), by = ty[n];
  const double c = ax * ay + bx * by;
  const double s = ax * by - bx * ay;

  const double a = v.comps.dot(eh);
  const double b = v.comps[n];
  Vec out = v.comps - a * eh;
  out[n] = 0.0;
  out += (c * a - s * b) * eh;
  out[n] = s * a + c * b;
  return {y, out * scale};
}

struct TangentSplit {
  TangentVector tangential;
  TangentVector normal;
};

/// Orthogonal decomposition of v along the direction from z to the target.
inline TangentSplit split_tangent(const TangentVector& v, const Point& z, const Target& target) {
  const TangentVector e1 = unit_direction(z, target);
  const TangentVector along = e1 * inner(v, e1);
  return {along, TangentVector{z, v.comps - along.comps}};
}

/// Orthonormal frame at z whose first vector points at the target; the rest
/// is Gram-Schmidt over the chart axes.
inline std::vector<TangentVector> adapted_frame(const Point& z, const Target& target) {
  const int d = z.dim();
  std::vector<TangentVector> frame;
  frame.reserve(d);
  frame.push_back(unit_direction(z, target));
  for (int k = 0; k < d && static_cast<int>(frame.size()) < d; ++k) {
    Vec cand = Vec::Zero(d);
    cand[k] = z.height();
    TangentVector r{z, cand};
    for (const auto& e : frame) r = r - e * inner(r, e);
    const double nr = r.norm();
    if (nr < 1e-8) continue;
    frame.push_back(r * (1.0 / nr));
  }
  return frame;
}

/// Boundary endpoint of the ray from p with initial direction u.
inline BoundaryPoint ray_endpoint(const Point& p, const TangentVector& u) {
  const Eigen::Index n = p.dim() - 1;
  const Vec w = u.comps / u.comps.stableNorm();
  const Vec ub = w.head(n);
  const double uh = w[n];
  const double ub2 = ub.squaredNorm();
  if (ub2 == 0.0) {
    if (uh > 0.0) return BoundaryPoint::infinity(p.dim());
    return BoundaryPoint::finite(Vec(p.horizontal()));
  }
  const Vec xi_local = uh > 0.0 ? Vec(ub * ((1.0 + uh) / ub2)) : Vec(ub / (1.0 - uh));
  const Vec xi = p.horizontal() + xi_local * p.height();
  if (!xi.allFinite()) return BoundaryPoint::infinity(p.dim());
  return BoundaryPoint::finite(xi);
}

/// Boundary point reached by the geodesic ray from p through q.
inline BoundaryPoint theta_projection(const Point& p, const Point& q) {
  return ray_endpoint(p, unit_direction(p, q));
}

namespace detail {

inline bool same_target(const Target& a, const Target& b) {
  if (a.index() != b.index()) return false;
  if (const auto* pa = std::get_if<Point>(&a)) {
    return distance(*pa, std::get<Point>(b)) < kCoincidentTol;
  }
  return std::get<BoundaryPoint>(a).approx_equal(std::get<BoundaryPoint>(b));
}

/// The complete geodesic through a and b: ideal endpoints (from, to) and one
/// interior point on it.
struct CompleteGeodesic {
  BoundaryPoint from;
  BoundaryPoint to;
  Point anchor;
};

inline CompleteGeodesic complete_geodesic(const Target& a, const Target& b) {
  require_same_dim(target_dim(a), target_dim(b), "geodesic");
  if (same_target(a, b)) throw CoincidentPoints("geodesic: endpoints coincide");
  const int d = target_dim(a);

  const auto* pa = std::get_if<Point>(&a);
  const auto* pb = std::get_if<Point>(&b);
  if (pa) {
    const TangentVector u = unit_direction(*pa, b);
    return {ray_endpoint(*pa, -u), ray_endpoint(*pa, u), *pa};
  }
  if (pb) {
    const TangentVector u = unit_direction(*pb, a);
    return {ray_endpoint(*pb, u), ray_endpoint(*pb, -u), *pb};
  }
  const auto& ba = std::get<BoundaryPoint>(a);
  const auto& bb = std::get<BoundaryPoint>(b);
  if (ba.is_infinity()) return {ba, bb, Point(lift(bb.xi(), 1.0))};
  if (bb.is_infinity()) return {ba, bb, Point(lift(ba.xi(), 1.0))};
  const Vec center = 0.5 * (ba.xi() + bb.xi());
  const double radius = 0.5 * (bb.xi() - ba.xi()).norm();
  (void)d;
  return {ba, bb, Point(lift(center, radius))};
}

/// Linear coordinate along the geodesic: grows by 2 per unit of arclength
/// toward `to`, and is constant on the totally geodesic hyperplanes that meet
/// the geodesic orthogonally.
inline double axial_level(const CompleteGeodesic& g, const Point& y) {
  return horo_level(g.from, y) - horo_level(g.to, y);
}

inline Point project(const CompleteGeodesic& g, const Point& z) {
  const double s = 0.5 * (axial_level(g, z) - axial_level(g, g.anchor));
  return exp_map(g.anchor, unit_direction(g.anchor, g.to) * s);
}

}  // namespace detail

/// Orthogonal projection of z onto the complete geodesic through a and b.
inline Point project_to_geodesic(const Point& z, const Target& a, const Target& b) {
  detail::require_same_dim(z.dim(), target_dim(a), "project_to_geodesic");
  return detail::project(detail::complete_geodesic(a, b), z);
}

struct GeodesicCoords {
  double s;  // signed arclength from ref to the foot point, positive toward b
  double h;  // distance from z to the geodesic
};

inline GeodesicCoords geodesic_coords(const Point& z, const BoundaryPoint& a, const BoundaryPoint& b,
                                      const Point& ref) {
  const auto g = detail::complete_geodesic(a, b);
  const Point ref_foot = detail::project(g, ref);
  if (distance(ref, ref_foot) > 1e-9) {
    throw InvalidArgument("geodesic_coords: reference point is not on the geodesic");
  }
  const Point foot = detail::project(g, z);
  return {0.5 * (detail::axial_level(g, z) - detail::axial_level(g, ref)), distance(z, foot)};
}

/// Half-space chart -> hyperboloid {X : -X0^2 + sum X_i^2 = -1, X0 > 0} in R^{d,1}.
/// Coordinates are ordered (X0, X1, ..., Xd).
inline Eigen::VectorXd to_hyperboloid(const Point& p) {
  const int d = p.dim();
  const double h = p.height();
  const double r2 = p.horizontal().squaredNorm() + h * h;
  Eigen::VectorXd out(d + 1);
  out[0] = (1.0 + r2) / (2.0 * h);
  for (int i = 0; i < d - 1; ++i) out[i + 1] = p[i] / h;
  out[d] = (1.0 - r2) / (2.0 * h);
  return out;
}

inline Point from_hyperboloid(const Eigen::VectorXd& X) {
  const Eigen::Index d = X.size() - 1;
  const double h = 1.0 / (X[0] + X[d]);
  Vec c(d);
  for (Eigen::Index i = 0; i < d - 1; ++i) c[i] = X[i + 1] * h;
  c[d - 1] = h;
  return Point(std::move(c));
}

/// Chart dilation x -> lambda x (an isometry).
inline Point dilate(const Point& p, double lambda) { return Point(Vec(p.coords() * lambda)); }

}  // namespace hyperbary
