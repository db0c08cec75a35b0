#include "hyperbary/jacobi.hpp"
#include "hyperbary/oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hyperbary;
using testutil::Sampler;

namespace {

const double kE = std::exp(1.0);

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

double rel_err(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

}  // namespace

TEST(JacobiField, TimeShiftVariation) {
  const Point x{0.2, 0.8}, y{1.5, 2.0};
  const TangentVector u = log_map(x, y);
  const TangentVector v = log_map(y, x) * -1.0;
  for (double s : {0.0, 0.25, 0.5, 1.0}) {
    const TangentVector J = jacobi_field(u, v, s);
    const Point gs = geodesic_point(x, y, s);
    const TangentVector vel = parallel_transport(x, gs, u);
    EXPECT_LT((J.comps - vel.comps).norm() / gs.height(), 1e-10);
  }
}

TEST(JacobiField, ZeroBoundaryValues) {
  const Point x{0, 1}, y{1, 3};
  const auto J = jacobi_field(TangentVector::zero(x), TangentVector::zero(y), 0.4);
  EXPECT_EQ(J.comps.norm(), 0.0);
}

TEST(JacobiField, VerticalExampleAgainstOracle) {
  // coefficient cosh(1/2) - sinh(1/2) coth(1) = sinh(1/2) / sinh(1) ~ 0.443409
  const Point x{0, 1}, y{0, kE};
  const auto J = jacobi_field({x, v2(1, 0)}, TangentVector::zero(y), 0.5);
  const double coef = std::cosh(0.5) - std::sinh(0.5) / std::tanh(1.0);
  EXPECT_NEAR(coef, 0.443409, 1e-6);
  EXPECT_NEAR(J.norm(), coef, 1e-12);
  EXPECT_NEAR(J.comps[0], coef * std::exp(0.5), 1e-12);  // E_2(1/2) = (e^{1/2}, 0)
  const Vec fd = oracle::jacobi_fd(x, v2(1, 0), y, v2(0, 0), 0.5);
  EXPECT_NEAR(fd[0], 0.731059, 1e-6);
  EXPECT_LT((J.comps - fd).norm(), 1e-8);
}

TEST(JacobiField, EndpointValuesAndOracle) {
  Sampler s(41);
  for (int k = 0; k < 100; ++k) {
    const Point x = s.point(3, 3.0), y = s.point(3, 3.0);
    const TangentVector u = s.unit(x) * s.uniform(0.1, 2.0), v = s.unit(y) * s.uniform(0.1, 2.0);
    EXPECT_LT((jacobi_field(u, v, 0.0).comps - u.comps).norm() / x.height(), 1e-10);
    EXPECT_LT((jacobi_field(u, v, 1.0).comps - v.comps).norm() / y.height(), 1e-9);
    const double sv = s.uniform(0.0, 1.0);
    const Vec fd = oracle::jacobi_fd(x, u.comps, y, v.comps, sv);
    const auto J = jacobi_field(u, v, sv);
    EXPECT_LT(rel_err(J.comps, fd), 1e-6) << k;
  }
  EXPECT_THROW(jacobi_field(TangentVector::zero({0, 1}), TangentVector::zero({0, 1}), 0.5), CoincidentPoints);
}

TEST(JdotLeft, Examples) {
  const Point x{0, 1}, y{0, kE};
  const auto a = jdot_left({x, v2(0, 1)}, y);
  EXPECT_LT((a.comps - v2(0, -1)).norm(), 1e-14);
  const auto b = jdot_left({x, v2(1, 0)}, y);
  EXPECT_NEAR(b.comps[0], -1.0 / std::tanh(1.0), 1e-14);
  EXPECT_NEAR(b.comps[0], -1.31304, 1e-5);
  EXPECT_NEAR(b.comps[1], 0.0, 1e-14);
  const auto lim = jdot_left_or_limit({x, v2(0.3, 0.4)}, x);
  EXPECT_TRUE(lim.at_diagonal);
  EXPECT_LT((lim.value.comps + v2(0.3, 0.4)).norm(), 1e-15);
  EXPECT_THROW(jdot_left({x, v2(1, 0)}, x), CoincidentPoints);
  // small-rho continuity of the operator toward -Id
  const auto near = jdot_left({x, v2(1, 0)}, Point{0, 1 + 1e-7});
  EXPECT_LT((near.comps + v2(1, 0)).norm(), 1e-12);
}

TEST(JdotRight, Examples) {
  const Point x{0, 1}, y{0, kE};
  const auto a = jdot_right({y, v2(0, kE)}, x);
  EXPECT_LT((a.comps - v2(0, 1)).norm(), 1e-14);
  const auto b = jdot_right({y, v2(kE, 0)}, x);
  EXPECT_NEAR(b.comps[0], 1.0 / std::sinh(1.0), 1e-14);
  EXPECT_NEAR(b.comps[0], 0.85092, 1e-5);
  EXPECT_NEAR(b.comps[1], 0.0, 1e-14);
  const auto lim = jdot_right_or_limit({x, v2(0.3, 0.4)}, x);
  EXPECT_TRUE(lim.at_diagonal);
  EXPECT_LT((lim.value.comps - v2(0.3, 0.4)).norm(), 1e-15);
}

TEST(Jdot, FiniteDifferenceOracle) {
  Sampler s(43);
  for (int k = 0; k < 500; ++k) {
    const int d = 2 + k % 3;
    const Point x = s.point(d, 2.0);
    const double rho = std::exp(s.uniform(std::log(0.01), std::log(10.0)));
    const Point y = exp_map(x, s.unit(x) * rho);
    const TangentVector u = s.unit(x), v = s.unit(y);
    EXPECT_LT(rel_err(jdot_left(u, y).comps, oracle::jdot_left_fd(x, u.comps, y)), 1e-4) << k;
    EXPECT_LT(rel_err(jdot_right(v, x).comps, oracle::jdot_right_fd(x, y, v.comps)), 1e-4) << k;
  }
}

TEST(Jdot, Linearity) {
  Sampler s(47);
  for (int k = 0; k < 50; ++k) {
    const Point x = s.point(3, 2.0), y = s.point(3, 2.0);
    const TangentVector u = s.unit(x), w = s.unit(x);
    const double a = s.normal(), b = s.normal();
    const Vec lhs = jdot_left(u * a + w * b, y).comps;
    const Vec rhs = jdot_left(u, y).comps * a + jdot_left(w, y).comps * b;
    EXPECT_LT((lhs - rhs).norm() / x.height(), 1e-12);
  }
}

TEST(PsiOperator, Examples) {
  const Point z{0, 1};
  const auto id = psi_operator(z, z);
  EXPECT_TRUE(id.at_diagonal);
  EXPECT_LT((id.matrix + Mat::Identity(2, 2)).norm(), 1e-15);

  const auto p = psi_operator(z, {0, kE});
  const auto frame = adapted_frame(z, Point{0, kE});
  const Mat m = p.in_frame(frame);
  EXPECT_NEAR(m(0, 0), -1.0, 1e-14);
  EXPECT_NEAR(m(1, 1), -1.0 / std::tanh(1.0), 1e-14);
  EXPECT_NEAR(m(0, 1), 0.0, 1e-14);
  EXPECT_NEAR(m(1, 0), 0.0, 1e-14);
}

TEST(PsiOperator, Spectrum) {
  Sampler s(53);
  for (int k = 0; k < 200; ++k) {
    const int d = 2 + k % 4;
    const Point z = s.point(d, 3.0), x = s.point(d, 6.0);
    const double rho = distance(z, x);
    const auto eig = symmetric_eigen(psi_operator(z, x).matrix);
    EXPECT_NEAR(eig.values[d - 1], -1.0, 1e-12);
    for (int i = 0; i < d - 1; ++i) EXPECT_NEAR(eig.values[i], -rho_coth(rho), 1e-10);
    // Lemma 4.1, single atom
    const TangentVector u = s.unit(z) * s.uniform(0.1, 3.0);
    EXPECT_LE(inner(psi_operator(z, x).apply(u), u), -inner(u, u) + 1e-12);
    // matches jdot_left
    EXPECT_LT((psi_operator(z, x).apply(u).comps - jdot_left(u, x).comps).norm() / z.height(), 1e-12);
  }
}

TEST(AggregatePsi, Examples) {
  const Point z{0, 1};
  const auto single = aggregate_psi(z, DiscreteMeasure::dirac(z));
  EXPECT_LT((single.matrix + Mat::Identity(2, 2)).norm(), 1e-15);

  const DiscreteMeasure mu({{0.5, Point{0, kE}}, {0.5, Point{0, 1.0 / kE}}});
  const auto agg = aggregate_psi(z, mu);
  const Mat m = agg.in_frame(adapted_frame(z, Point{0, kE}));
  EXPECT_NEAR(m(0, 0), -1.0, 1e-14);
  EXPECT_NEAR(m(1, 1), -1.0 / std::tanh(1.0), 1e-14);

  Sampler s(59);
  for (int k = 0; k < 100; ++k) {
    const int d = 2 + k % 3;
    const auto nu = s.measure(d, 1 + k % 5, 4.0);
    const Point w = s.point(d, 2.0);
    const auto A = aggregate_psi(w, nu);
    const TangentVector u = s.unit(w);
    const TangentVector back = A.apply(A.inverse().apply(u));
    EXPECT_LT((back.comps - u.comps).norm() / w.height(), 1e-10);
    double rmax = 0.0;
    for (const auto& a : nu.atoms()) rmax = std::max(rmax, distance(w, a.point));
    const auto eig = symmetric_eigen(A.matrix);
    EXPECT_LE(eig.values[d - 1], -1.0 + 1e-12);
    EXPECT_GE(eig.values[0], -rho_coth(rmax) - 1e-10);
    // operator norm of the inverse is at most 1
    EXPECT_LE(symmetric_eigen(A.inverse().matrix).values.cwiseAbs().maxCoeff(), 1.0 + 1e-12);
  }
}

TEST(SymmetricEigen, MatchesEigen) {
  Sampler s(61);
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + k % 10;
    Mat a(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = s.normal();
    }
    a = (a + a.transpose()).eval();
    const auto mine = symmetric_eigen(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(Eigen::MatrixXd(a), Eigen::EigenvaluesOnly);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(mine.values[i], ref.eigenvalues()[i], 1e-12 * (1 + a.norm()));
    const Mat recon = mine.vectors * mine.values.asDiagonal() * mine.vectors.transpose();
    EXPECT_LT((recon - a).norm(), 1e-11 * (1 + a.norm()));
  }
}
