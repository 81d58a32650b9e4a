#include "fgap/geodesy.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <queue>
#include <random>

using namespace fgap;

namespace {
Vec pt(double x, double y) {
  Vec p(2);
  p << x, y;
  return p;
}

// Grid-graph shortest path with a 16-neighbour stencil; edge cost is the
// metric length of the straight chart segment by Simpson quadrature.
double dijkstra_distance(const MetricSpec& s, Vec a, Vec b, double x0, double x1, double y0, double y1, double h) {
  const int nx = int(std::round((x1 - x0) / h)), ny = int(std::round((y1 - y0) / h));
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  auto node = [&](int i, int j) { return pt(x0 + i * h, y0 + j * h); };
  auto seg = [&](const Vec& p, const Vec& q) {
    const Vec d = q - p;
    auto f = [&](double t) { return std::sqrt(d.dot(metric_at(s, p + t * d).g * d)); };
    return (f(0) + 4 * f(0.5) + f(1)) / 6;
  };
  const int ia = int(std::round((a[0] - x0) / h)), ja = int(std::round((a[1] - y0) / h));
  const int ib = int(std::round((b[0] - x0) / h)), jb = int(std::round((b[1] - y0) / h));
  std::vector<double> dist(std::size_t((nx + 1) * (ny + 1)), 1e300);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[std::size_t(id(ia, ja))] = 0;
  pq.push({0, id(ia, ja)});
  const int off[16][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1},
                          {2, 1}, {2, -1}, {-2, 1}, {-2, -1}, {1, 2}, {1, -2}, {-1, 2}, {-1, -2}};
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[std::size_t(u)]) continue;
    const int i = u % (nx + 1), j = u / (nx + 1);
    if (i == ib && j == jb) return d;
    for (auto& o : off) {
      const int ii = i + o[0], jj = j + o[1];
      if (ii < 0 || jj < 0 || ii > nx || jj > ny) continue;
      const double nd = d + seg(node(i, j), node(ii, jj));
      if (nd < dist[std::size_t(id(ii, jj))]) {
        dist[std::size_t(id(ii, jj))] = nd;
        pq.push({nd, id(ii, jj)});
      }
    }
  }
  return 1e300;
}
}  // namespace

TEST(Shoot, EuclideanStraight) {
  const auto g = shoot_geodesic(MetricSpec::euclidean(2), pt(0, 0), pt(1, 0), 2.0);
  EXPECT_LT((g.point(2.0) - pt(2, 0)).norm(), 1e-12);
  EXPECT_LT((g.point(0.7) - pt(0.7, 0)).norm(), 1e-12);
}

TEST(Shoot, HalfPlaneVerticalRay) {
  const auto g = shoot_geodesic(MetricSpec::halfplane(), pt(0, 1), pt(0, 1), 1.0);
  EXPECT_NEAR(g.point(1.0)[1], std::exp(1.0), 1e-9);
  EXPECT_NEAR(g.point(1.0)[0], 0.0, 1e-12);
  EXPECT_LT(g.speed_drift(), 1e-8);
}

TEST(Shoot, PinchedAxisStays) {
  const auto g = shoot_geodesic(MetricSpec::pinched(1.0, 0.5), pt(0, 0), pt(1, 0), 3.0);
  for (double s = 0; s <= 3.0; s += 0.1) EXPECT_LT(std::abs(g.point(s)[1]), 1e-14);
}

TEST(Shoot, SpeedIsConserved) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& s : {MetricSpec::hyperbolic(), MetricSpec::pinched(1.0, 0.5), MetricSpec::halfplane()}) {
    for (int t = 0; t < 10; ++t) {
      Vec p = pt(u(rng), 0.2 * u(rng));
      if (s.family == MetricFamily::hyperbolic_halfplane) p[1] = 1.0 + 0.5 * u(rng);
      Vec v = pt(u(rng), u(rng));
      v /= g_norm(s, p, v);
      const auto g = shoot_geodesic(s, p, v, 1.0);
      EXPECT_LT(g.speed_drift(), 1e-8);
      const auto again = shoot_geodesic(s, p, v, 1.0);
      EXPECT_LT((g.point(1.0) - again.point(1.0)).norm(), 1e-8);
    }
  }
}

TEST(Shoot, Errors) {
  try {
    shoot_geodesic(MetricSpec::euclidean(2), pt(0, 0), pt(2, 0), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::bad_initial_speed);
  }
  try {
    // Vertical geodesic toward the ideal boundary leaves the half-plane chart.
    shoot_geodesic(MetricSpec::halfplane(), pt(0, 1), pt(0, -1), 40.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::left_chart || e.code() == ErrorCode::step_collapse) << e.what();
  }
}

TEST(Connect, Euclidean) {
  const auto c = connect(MetricSpec::euclidean(2), pt(0, 0), pt(3, 4));
  EXPECT_NEAR(c.distance, 5.0, 1e-12);
  EXPECT_LT(c.residual, 1e-8);
}

TEST(Connect, HyperbolicAxis) {
  for (double x : {-1.5, 0.4, 2.0}) EXPECT_NEAR(connect(MetricSpec::hyperbolic(), pt(0, 0), pt(x, 0)).distance, std::abs(x), 1e-10);
}

TEST(Connect, HyperbolicMatchesHalfPlaneClosedForm) {
  // Half-plane distance: acosh(1 + |p-q|^2 / (2 y_p y_q)).
  const Vec p = pt(0.1, 1.0), q = pt(0.8, 1.7);
  const double d = std::acosh(1 + (p - q).squaredNorm() / (2 * p[1] * q[1]));
  EXPECT_NEAR(connect(MetricSpec::halfplane(), p, q).distance, d, 1e-9);
}

TEST(Connect, PinchedAgainstGridOracle) {
  const MetricSpec s = MetricSpec::pinched(1.0, 0.0);
  const Vec p = pt(-0.2, 0.05), q = pt(0.2, 0.05);
  const double d = connect(s, p, q).distance;
  const double oracle = dijkstra_distance(s, p, q, -0.24, 0.24, -0.02, 0.1, 0.002);
  EXPECT_NEAR(d, oracle, 1e-3);
  EXPECT_LE(d, oracle + 1e-12);
}

TEST(Connect, SymmetryAndTriangleInequality) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const MetricSpec s = MetricSpec::pinched(1.0, 0.5);
  for (int t = 0; t < 20; ++t) {
    const Vec a = pt(u(rng), 0.3 * u(rng)), b = pt(u(rng), 0.3 * u(rng)), c = pt(u(rng), 0.3 * u(rng));
    const double ab = connect(s, a, b).distance, ba = connect(s, b, a).distance;
    const double bc = connect(s, b, c).distance, ac = connect(s, a, c).distance;
    EXPECT_NEAR(ab, ba, 1e-8);
    EXPECT_LE(ac, ab + bc + 1e-6);
  }
}

TEST(Transport, EuclideanConstant) {
  const auto g = shoot_span(MetricSpec::euclidean(2), pt(0, 0), pt(0.6, 0.8), -1, 2);
  Mat E(2, 2);
  E << 0.6, -0.8, 0.8, 0.6;
  const auto F = transport_frame(g, E);
  EXPECT_LT((F.frame(1.5) - E).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((F.frame(-0.9) - E).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Transport, HyperbolicAxisFrameIsCoordinate) {
  const auto g = shoot_span(MetricSpec::hyperbolic(), pt(0, 0), pt(1, 0), -3, 3);
  const auto F = transport_frame(g, Mat::Identity(2, 2));
  for (double s : {-2.5, 0.3, 3.0}) EXPECT_LT((F.frame(s) - Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(F.orthonormality_defect(), 1e-8);
}

TEST(Transport, SphereHolonomyEqualsEnclosedArea) {
  // Right spherical triangle with legs a (equator) and c (meridian) at A.
  const MetricSpec s = MetricSpec::sphere();
  const double a = 0.5, c = 0.4;
  const Vec A = pt(0, 0), B = pt(a, 0), C = pt(0, c);
  Vec w = pt(1, 0);
  for (auto [p, q] : {std::pair{A, B}, std::pair{B, C}, std::pair{C, A}}) {
    const auto conn = connect(s, p, q);
    w = transport_vector(conn.geodesic, w);
  }
  const double angle = std::atan2(w[1], w[0]);
  const double excess = 2 * std::atan(std::tan(a / 2) * std::tan(c / 2));
  EXPECT_NEAR(std::abs(angle), excess, 1e-7);
}

TEST(FermiChart, EuclideanIdentity) {
  const auto ch = build_fermi_chart(MetricSpec::euclidean(2), pt(0, 0), pt(1, 0), 1.0, 0.3);
  const Vec X = pt(0.4, -0.2);
  EXPECT_LT((ch.fermi_to_manifold(X) - X).norm(), 1e-10);
  EXPECT_LT((ch.metric_components(X) - Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FermiChart, PinchedCatalogIsAlreadyFermi) {
  const MetricSpec s = MetricSpec::pinched(1.0, 0.5);
  const auto ch = build_fermi_chart(s, pt(0, 0), pt(1, 0), 1.0, 0.2);
  for (const Vec& X : {pt(0.5, 0.1), pt(-0.8, -0.15), pt(0.0, 0.2)}) {
    EXPECT_LT((ch.fermi_to_manifold(X) - X).norm(), 1e-6);
    EXPECT_LT((ch.manifold_to_fermi(X) - X).norm(), 1e-6);
  }
}

TEST(FermiChart, HalfPlaneSemicircleMatchesClosedForm) {
  const MetricSpec s = MetricSpec::halfplane();
  const auto ch = build_fermi_chart(s, pt(0, 1), pt(1, 0), 1.0, 0.2);
  // The base geodesic is the unit semicircle.
  for (double x : {-1.0, -0.3, 0.6}) EXPECT_NEAR(ch.frame().carrier.point(x).norm(), 1.0, 1e-9);
  for (double x : {-0.8, 0.0, 0.5})
    for (double y : {-0.2, -0.05, 0.1, 0.2}) {
      const Mat g = ch.metric_components(pt(x, y));
      EXPECT_NEAR(g(0, 0), std::cosh(y) * std::cosh(y), 1e-5);
      EXPECT_NEAR(g(1, 1), 1.0, 1e-5);
      EXPECT_NEAR(g(0, 1), 0.0, 1e-5);
      const Vec X = pt(x, y);
      EXPECT_LT((ch.manifold_to_fermi(ch.fermi_to_manifold(X)) - X).norm(), 1e-6);
    }
  // Axis normalization and vanishing Christoffels.
  const Mat g0 = ch.metric_components(pt(0.3, 0.0));
  EXPECT_LT((g0 - Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-6);
  const auto G = ch.christoffel_components(pt(0.3, 0.0));
  for (int k = 0; k < 2; ++k) EXPECT_LT(G[k].cwiseAbs().maxCoeff(), 1e-5);
}

TEST(FermiChart, FoldDetected) {
  // On the sphere the normal exponential focuses at distance pi/2.
  try {
    build_fermi_chart(MetricSpec::sphere(), pt(0, 0), pt(1, 0), 0.5, 1.5707);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::tube_too_large) << e.what();
  }
}

TEST(FermiChart, CacheRoundTrip) {
  const auto ch = build_fermi_chart(MetricSpec::halfplane(), pt(0, 1), pt(1, 0), 0.5, 0.1);
  const std::string path = ::testing::TempDir() + "chart.bin";
  ch.save(path);
  const auto back = FermiChart::load(path, ch.cache_key());
  const Vec X = pt(0.2, 0.05);
  EXPECT_EQ((back.fermi_to_manifold(X) - ch.fermi_to_manifold(X)).norm(), 0.0);
  try {
    FermiChart::load(path, "other-key");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::cache_mismatch);
  }
  std::remove(path.c_str());
}

TEST(ExpansionAudit, EuclideanExact) {
  const CatalogFermi ch(MetricSpec::euclidean(2), 1.0, 0.4);
  const auto rep = expansion_audit(ch, {0.05, 0.1, 0.2, 0.4});
  for (const auto& c : rep.components) EXPECT_TRUE(c.exact);
}

TEST(ExpansionAudit, HyperbolicQuarticRemainder) {
  const CatalogFermi ch(MetricSpec::hyperbolic(), 1.0, 0.4);
  const auto rep = expansion_audit(ch, {0.025, 0.05, 0.1, 0.2, 0.4});
  ASSERT_EQ(rep.components.size(), 3u);
  EXPECT_GE(rep.components[0].slope, 3.9);  // g11 = cosh^2 y = 1 + y^2 + y^4/3 + ...
  EXPECT_GE(rep.min_slope(), 2.9);
  // Quadratic coefficient of g11 is -R(y,e1,e1,y)/y^2 = 1.
  const Riemann R = ch.axis_riemann(0.0);
  EXPECT_NEAR(fermi_quadratic(R, pt(0, 1))(0, 0), 1.0, 1e-12);
}

TEST(ExpansionAudit, MixedCubicRemainder) {
  const CatalogFermi ch(MetricSpec::mixed(1.0, 0.5), 0.3, 0.2);
  const auto rep = expansion_audit(ch, {0.0125, 0.025, 0.05, 0.1, 0.2});
  EXPECT_GE(rep.min_slope(), 2.9);
  Vec y(3);
  y << 0, 1, 0;
  EXPECT_NEAR(fermi_quadratic(ch.axis_riemann(0), y)(0, 0), 1.0, 1e-12);
  y << 0, 0, 1;
  EXPECT_NEAR(fermi_quadratic(ch.axis_riemann(0), y)(0, 0), -0.25, 1e-12);
  EXPECT_LT(rep.ratio_metric, 2.0);
  EXPECT_LT(rep.ratio_christoffel, 2.0);
}

TEST(ExpansionAudit, NumericHalfPlaneChart) {
  const auto ch = build_fermi_chart(MetricSpec::halfplane(), pt(0, 1), pt(1, 0), 0.6, 0.4);
  const auto rep = expansion_audit(ch, {0.05, 0.1, 0.2, 0.4});
  EXPECT_GE(rep.components[0].slope, 2.9);
}

TEST(ExpansionAudit, InsufficientLevels) {
  const CatalogFermi ch(MetricSpec::hyperbolic(), 1.0, 0.4);
  try {
    expansion_audit(ch, {0.1, 0.15, 0.2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::insufficient_levels);
  }
}
