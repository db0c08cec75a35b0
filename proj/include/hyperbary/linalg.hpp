#pragma once

// Small dense linear algebra used throughout: fixed-capacity Eigen vectors
// (no heap traffic in the simulation loops) and a cyclic Jacobi eigensolver
// for the symmetric d x d matrices that show up in the convexity functionals.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hyperbary {

/// Largest supported dimension of H^d.
inline constexpr int kMaxDim = 16;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

struct SymmetricEigen {
  Vec values;   // ascending
  Mat vectors;  // column k pairs with values[k]
  int sweeps = 0;
};

// Cyclic Jacobi rotations. Converges quadratically once the off-diagonal mass
// is small; for d <= 16 a handful of sweeps suffices.
inline SymmetricEigen symmetric_eigen(const Mat& input, int max_sweeps = 100) {
  const Eigen::Index n = input.rows();
  if (n != input.cols()) {
    throw std::invalid_argument("symmetric_eigen: matrix is not square");
  }
  Mat a = 0.5 * (input + input.transpose());
  Mat v = Mat::Identity(n, n);

  SymmetricEigen out;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  for (out.sweeps = 0; out.sweeps < max_sweeps; ++out.sweeps) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(off) <= 1e-15 * scale) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  // sort ascending
  out.values.resize(n);
  out.vectors.resize(n, n);
  Eigen::Matrix<Eigen::Index, Eigen::Dynamic, 1, 0, kMaxDim, 1> order(n);
  for (Eigen::Index i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

inline double largest_eigenvalue(const Mat& m) {
  return symmetric_eigen(m).values[m.rows() - 1];
}

}  // namespace hyperbary
