#include "fgap/metric.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fgap;

namespace {

Vec pt(double x, double y) {
  Vec p(2);
  p << x, y;
  return p;
}
Vec pt(double x, double y, double z) {
  Vec p(3);
  p << x, y, z;
  return p;
}

std::vector<MetricSpec> catalog() {
  return {MetricSpec::euclidean(2), MetricSpec::euclidean(3), MetricSpec::hyperbolic(), MetricSpec::halfplane(),
          MetricSpec::pinched(1.0, 0.5), MetricSpec::pinched(1.0, 0.2, 2.0, 0.4), MetricSpec::mixed(1.0, 0.5),
          MetricSpec::sphere()};
}

Vec random_point(const MetricSpec& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec p(s.dim);
  for (int i = 0; i < s.dim; ++i) p[i] = u(rng);
  if (s.family == MetricFamily::hyperbolic_halfplane) p[1] = 0.3 + std::abs(p[1]);
  return p;
}

}  // namespace

TEST(MetricAt, EuclideanIsIdentity) {
  const auto m = metric_at(MetricSpec::euclidean(2), pt(0.3, -0.7));
  EXPECT_NEAR((m.g - Mat::Identity(2, 2)).norm(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(m.sqrt_det, 1.0);
}

TEST(MetricAt, PinchedAxisNormalization) {
  const auto m = metric_at(MetricSpec::pinched(1.0, 0.5), pt(0.0, 0.0));
  EXPECT_NEAR((m.g - Mat::Identity(2, 2)).norm(), 0.0, 1e-15);
}

TEST(MetricAt, PinchedUnitRateClosedForm) {
  const auto m = metric_at(MetricSpec::pinched(1.0, 0.0), pt(0.0, 1.0));
  const double c = std::cosh(1.0);
  EXPECT_NEAR(c, 1.54308, 1e-5);
  EXPECT_NEAR(m.g(0, 0), c * c, 1e-14);
  EXPECT_NEAR(m.g(0, 0), 2.38110, 1e-5);
  EXPECT_DOUBLE_EQ(m.g(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(m.g(0, 1), 0.0);
}

TEST(MetricAt, OutsideChart) {
  try {
    metric_at(MetricSpec::halfplane(), pt(0.0, -1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::point_outside_chart);
  }
  EXPECT_THROW(metric_at(MetricSpec::mixed(1.0, 0.5), pt(0.0, 0.0, 3.2)), Error);
}

TEST(MetricAt, RandomPointsPositiveDefiniteAndConsistent) {
  std::mt19937_64 rng(7);
  for (const auto& s : catalog())
    for (int k = 0; k < 1000; ++k) {
      const Vec p = random_point(s, rng);
      const auto m = metric_at(s, p);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(m.g));
      ASSERT_GT(es.eigenvalues().minCoeff(), 0.0);
      ASSERT_LT((m.g * m.g_inv - Mat::Identity(s.dim, s.dim)).cwiseAbs().maxCoeff(), 1e-12);
      ASSERT_NEAR(m.sqrt_det * m.sqrt_det, m.g.determinant(), 1e-12 * std::max(1.0, m.g.determinant()));
    }
}

TEST(Christoffel, EuclideanZero) {
  const auto G = christoffel(MetricSpec::euclidean(2), pt(0.4, 0.1));
  for (int k = 0; k < 2; ++k) EXPECT_EQ(G[k].cwiseAbs().maxCoeff(), 0.0);
}

TEST(Christoffel, ZeroOnPinchedAxis) {
  for (double x : {-1.0, 0.0, 0.7}) {
    const auto G = christoffel(MetricSpec::pinched(1.0, 0.5), pt(x, 0.0));
    for (int k = 0; k < 2; ++k) EXPECT_LT(G[k].cwiseAbs().maxCoeff(), 1e-15);
  }
}

// Finite-difference oracle built only from metric_at.
static Christoffel fd_christoffel(const MetricSpec& s, const Vec& p, double h = 1e-4) {
  const int n = s.dim;
  std::array<Mat, 3> dg;
  for (int k = 0; k < n; ++k) {
    Vec a = p, b = p;
    a[k] += h;
    b[k] -= h;
    dg[k] = (metric_at(s, a).g - metric_at(s, b).g) / (2 * h);
  }
  const Mat gi = metric_at(s, p).g_inv;
  Christoffel G;
  for (int k = 0; k < n; ++k) {
    G[k] = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) G[k](i, j) += 0.5 * gi(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
  }
  return G;
}

TEST(Christoffel, MatchesFiniteDifferences) {
  {
    const MetricSpec s = MetricSpec::pinched(1.0, 0.0);
    const auto G = christoffel(s, pt(0.0, 0.5));
    const auto F = fd_christoffel(s, pt(0.0, 0.5));
    for (int k = 0; k < 2; ++k) EXPECT_LT((G[k] - F[k]).cwiseAbs().maxCoeff(), 1e-6);
  }
  std::mt19937_64 rng(11);
  for (const auto& s : catalog())
    for (int t = 0; t < 1000; ++t) {
      const Vec p = random_point(s, rng);
      const auto G = christoffel(s, p);
      const auto F = fd_christoffel(s, p);
      for (int k = 0; k < s.dim; ++k) {
        ASSERT_LT((G[k] - F[k]).cwiseAbs().maxCoeff(), 1e-6) << s.id();
        ASSERT_LT((G[k] - G[k].transpose()).cwiseAbs().maxCoeff(), 1e-15);
      }
    }
}

TEST(Curvature, RiemannSymmetries) {
  std::mt19937_64 rng(3);
  for (const auto& s : catalog())
    for (int t = 0; t < 1000; ++t) {
      const Vec p = random_point(s, rng);
      ASSERT_LT(riemann(s, p).symmetry_defect(), 1e-10) << s.id();
    }
}

TEST(Curvature, HyperbolicConstant) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (const auto& s : {MetricSpec::hyperbolic(), MetricSpec::halfplane()})
    for (int t = 0; t < 50; ++t) {
      Vec p = random_point(s, rng);
      Vec u(2), v(2);
      u << n01(rng), n01(rng);
      v << n01(rng), n01(rng);
      EXPECT_NEAR(curvature_at(s, p, u, v).sectional_value, -1.0, 1e-10);
    }
}

TEST(Curvature, SphereIsPositive) {
  Vec u = Vec::Unit(2, 0), v = Vec::Unit(2, 1);
  EXPECT_NEAR(curvature_at(MetricSpec::sphere(), pt(0.2, 0.4), u, v).sectional_value, 1.0, 1e-10);
}

TEST(Curvature, PinchedWarpedProductFormula) {
  const MetricSpec s = MetricSpec::pinched(1.0, 0.5);
  for (double x : {-2.0, -0.5, 0.0, 1.0, 1.7}) {
    const double k = 1.0 + 0.25 * (1.0 + std::sin(x));
    EXPECT_NEAR(curvature_at(s, pt(x, 0.0), Vec::Unit(2, 0), Vec::Unit(2, 1)).sectional_value, -k * k, 1e-10);
  }
}

TEST(Curvature, MixedDoublyWarped) {
  const MetricSpec s = MetricSpec::mixed(1.0, 0.5);
  const Vec p = pt(0.2, 0.0, 0.0);
  EXPECT_NEAR(curvature_at(s, p, Vec::Unit(3, 0), Vec::Unit(3, 1)).sectional_value, -1.0, 1e-10);
  EXPECT_NEAR(curvature_at(s, p, Vec::Unit(3, 0), Vec::Unit(3, 2)).sectional_value, 0.25, 1e-10);
}

TEST(Curvature, BasisInvariance) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  const MetricSpec s = MetricSpec::mixed(1.0, 0.5);
  for (int t = 0; t < 200; ++t) {
    Vec p = random_point(s, rng);
    Vec u(3), v(3);
    u << n01(rng), n01(rng), n01(rng);
    v << n01(rng), n01(rng), n01(rng);
    const double k0 = curvature_at(s, p, u, v).sectional_value;
    const double c = std::cos(0.7), sn = std::sin(0.7);
    const double k1 = curvature_at(s, p, c * u + sn * v, -sn * u + c * v + 0.3 * u).sectional_value;
    ASSERT_NEAR(k0, k1, 1e-10);
  }
}

TEST(Curvature, DegeneratePlane) {
  const Vec u = Vec::Unit(2, 0);
  try {
    curvature_at(MetricSpec::hyperbolic(), pt(0, 0), u, 2.0 * u);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_plane);
  }
}

TEST(TubeBounds, Hyperbolic) {
  const auto B = tube_bounds(MetricSpec::hyperbolic(), 4.0, 0.1);
  EXPECT_NEAR(B.K1, -1.0, 1e-9);
  EXPECT_NEAR(B.K2, -1.0, 1e-9);
  EXPECT_NEAR(B.K, 1.0, 1e-9);
  EXPECT_LE(B.sample_step, 0.1 / 50 + 1e-15);
  EXPECT_GE(B.K_safe(), B.K);
}

TEST(TubeBounds, PinchedSamplesClosedForm) {
  const auto B = tube_bounds(MetricSpec::pinched(1.0, 0.5), 2.0, 0.1);
  // k(x) = 1 + 0.25 (1 + sin x) on [-2, 2]: max at x = pi/2, min at x = -pi/2.
  EXPECT_NEAR(B.K1, -1.5 * 1.5, 1e-4);
  EXPECT_NEAR(B.K2, -1.0, 1e-4);
  EXPECT_LE(B.K1, B.K2);
  EXPECT_GE(B.K, std::max(std::abs(B.K1), std::abs(B.K2)));
}

TEST(TubeBounds, MixedPinchingGate) {
  const auto B = tube_bounds(MetricSpec::mixed(1.0, 0.5), 0.3, 0.05);
  EXPECT_NEAR(B.kappa2_0, -1.0, 1e-12);
  EXPECT_NEAR(B.K3, 0.25, 1e-12);
  EXPECT_TRUE(B.pinching_gate);
  EXPECT_GT(B.riemann_max, 0.0);
}

TEST(TubeBounds, ExceedsChart) {
  try {
    tube_bounds(MetricSpec::sphere(), 1.0, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::tube_exceeds_chart);
  }
}

// Proposition-3.1 style ratios are bounded for catalog metrics in Fermi form.
TEST(FermiForm, QuadraticDeviationRatiosBounded) {
  for (const auto& s : {MetricSpec::hyperbolic(), MetricSpec::pinched(1.0, 0.5)}) {
    double rg = 0, rG = 0;
    for (double y : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
      const Vec p = pt(0.3, y);
      rg = std::max(rg, (metric_at(s, p).g - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() / (y * y));
      const auto G = christoffel(s, p);
      for (int k = 0; k < 2; ++k) rG = std::max(rG, G[k].cwiseAbs().maxCoeff() / y);
    }
    EXPECT_LT(rg, 3.0);
    EXPECT_LT(rG, 3.0);
  }
}
