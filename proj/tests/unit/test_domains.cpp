#include "fgap/domains.hpp"

#include <gtest/gtest.h>

using namespace fgap;

namespace {
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}
std::vector<double> grid(double a, double b, int n) {
  std::vector<double> xs;
  for (int i = 1; i < n; ++i) xs.push_back(a + (b - a) * i / n);
  return xs;
}
// Gate flags set by hand for flat diagnostics, where the curvature gate is vacuous.
LengthGate open_gate(double L) {
  LengthGate g;
  g.L = L;
  g.cos_bound = g.theta_bound = g.cosh_bound = g.sinh_bound = true;
  return g;
}
LengthGate mixed_gate(double L) {
  return length_gate(-1.0, 0.5, 2.1, [](double) { return 0.0; }, L);
}
// Closed-form half-width of the perpendicular geodesic in the hyperbolic Fermi chart.
double hyperbolic_ell(double r, double x) { return std::atanh(std::tanh(r) * std::cosh(x)); }
}  // namespace

TEST(Domain2D, EuclideanRectangle) {
  const auto D = build_domain_2d(MetricSpec::euclidean(2), 0.1, 2.0, 1.0, 1.5);
  const auto c = D.corners();
  EXPECT_NEAR((c[0] - v2(1, -0.1)).norm(), 0, 1e-12);
  EXPECT_NEAR((c[1] - v2(1, 0.1)).norm(), 0, 1e-12);
  EXPECT_NEAR((c[2] - v2(-1, 0.1)).norm(), 0, 1e-12);
  EXPECT_NEAR((c[3] - v2(-1, -0.1)).norm(), 0, 1e-12);
  for (const auto& s : D.slice_profile(grid(-1, 1, 20))) {
    EXPECT_NEAR(s.ell_plus, 0.1, 1e-12);
    EXPECT_NEAR(s.ell_minus, 0.1, 1e-12);
  }
}

TEST(Domain2D, CornersCounterclockwise) {
  const auto D = build_domain_2d(MetricSpec::hyperbolic(), 0.05, 4.0, 2.0, 1.5);
  const auto c = D.corners();
  double area2 = 0;
  for (int i = 0; i < 4; ++i) {
    const auto& p = c[std::size_t(i)];
    const auto& q = c[std::size_t((i + 1) % 4)];
    area2 += p[0] * q[1] - q[0] * p[1];
  }
  EXPECT_GT(area2, 0);
}

TEST(Domain2D, HyperbolicClosedFormAndFlare) {
  const double r = 0.05, delta = 0.01;
  const auto D = build_domain_2d(MetricSpec::hyperbolic(), r, 4.0, 2.0, 1.5);
  for (double x : {-1.9, -1.0, 0.0, 0.7, 1.9}) {
    const auto s = D.slice_profile({x})[0];
    EXPECT_NEAR(s.ell_plus, hyperbolic_ell(r, x), 1e-9);
    EXPECT_NEAR(s.ell_minus, hyperbolic_ell(r, x), 1e-9);
  }
  // Flare at the ends of the slab against the cosh envelope.
  for (double x : {-2.0, 2.0}) {
    const double ell = std::max(D.upper(x), -D.lower(x));
    EXPECT_GE(ell, (1 - 2 * delta) * r * std::cosh(2.0));
    EXPECT_LE(ell, (1 + 2 * delta) * r * std::cosh(2.0));
  }
  const auto s0 = D.slice_profile({0.0})[0];
  EXPECT_GE(s0.ell(), (1 - 2 * delta) * r);
  EXPECT_LE(s0.ell(), (1 + 2 * delta) * r);
}

TEST(Domain2D, BoundaryCurvesAreGeodesics) {
  const auto D = build_domain_2d(MetricSpec::pinched(1.0, 0.2), 0.05, 4.0, 2.0, 1.5);
  EXPECT_LT(D.family().upper.residual(), 1e-7);
  EXPECT_LT(D.family().lower.residual(), 1e-7);
}

TEST(Domain2D, PinchedRauchEnvelope) {
  // k in [1, 1.2]: small-r half-widths sit between r cosh(x) and r cosh(1.2 x).
  const double r = 0.01;
  const auto D = build_domain_2d(MetricSpec::pinched(1.0, 0.2), r, 4.0, 2.0, 1.5);
  for (const auto& s : D.slice_profile(grid(-2, 2, 40))) {
    const double x = std::abs(s.x);
    for (double ell : {s.ell_plus, s.ell_minus}) {
      EXPECT_GE(ell, r * std::cosh(x) * (1 - 1e-3)) << s.x;
      EXPECT_LE(ell, r * std::cosh(1.2 * x) * (1 + 1e-3)) << s.x;
    }
  }
}

TEST(Domain2D, SlidingFamilyContinuity) {
  const auto F = make_family_2d(MetricSpec::hyperbolic(), 0.05, 4.0, 1.5);
  const double dt = 1e-3;
  double worst = 0;
  for (double t = 1.5; t + dt <= 2.5; t += 0.05) {
    const ConvexDomain2D a(F, t), b(F, t + dt);
    const auto ca = a.corners(), cb = b.corners();
    for (int i = 0; i < 4; ++i) worst = std::max(worst, (ca[std::size_t(i)] - cb[std::size_t(i)]).norm());
  }
  EXPECT_LT(worst, 10 * dt);
}

TEST(Domain2D, ContainsBaseSegment) {
  const auto D = build_domain_2d(MetricSpec::pinched(1.0, 0.2), 0.05, 4.0, 2.5, 1.5);
  for (double x : grid(-1.5, 2.5, 30)) EXPECT_TRUE(D.contains(v2(x, 0), 0));
  EXPECT_FALSE(D.contains(v2(0, 0.2), 1e-6));
}

TEST(Domain2D, Errors) {
  const auto F = make_family_2d(MetricSpec::hyperbolic(), 0.05, 4.0, 1.5);
  EXPECT_THROW(ConvexDomain2D(F, 0.2), Error);
  const auto D = build_domain_2d(MetricSpec::hyperbolic(), 0.05, 4.0, 2.0, 1.5);
  try {
    D.slice_profile({2.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::slice_outside_domain);
  }
}

TEST(Wectangle, HyperbolicHalfHeight) {
  const auto D = build_domain_2d(MetricSpec::hyperbolic(), 0.05, 4.0, 2.0, 1.5);
  const auto W = contained_wectangle(D, 0.01);
  // (1 - 2 delta) r cosh(L/4) with cosh(1) = 1.5430806348152437
  EXPECT_NEAR(W.half_height, 0.98 * 0.05 * 1.5430806348152437, 1e-15);
  EXPECT_NEAR(W.half_height, 0.075611, 5e-7);
  EXPECT_FALSE(W.mirrored);
  EXPECT_DOUBLE_EQ(W.x0, 1.0);
  EXPECT_DOUBLE_EQ(W.x1, 2.0);
}

TEST(Wectangle, MirroredForSmallT) {
  const auto D = build_domain_2d(MetricSpec::hyperbolic(), 0.05, 4.0, 1.5, 1.5);
  const auto W = contained_wectangle(D, 0.01);
  EXPECT_TRUE(W.mirrored);
  EXPECT_DOUBLE_EQ(W.x0, -2.0);
  EXPECT_DOUBLE_EQ(W.x1, -1.0);
}

TEST(Wectangle, EuclideanDoesNotFlare) {
  const auto D = build_domain_2d(MetricSpec::euclidean(2), 0.05, 4.0, 2.0, 1.5);
  try {
    contained_wectangle(D, 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::containment_violated);
  }
}

TEST(Wectangle, LambdaBoundFormula) {
  const double b = lambda1_upper_bound(0.05, 4.0, 0.01);
  EXPECT_NEAR(b, kPi * kPi / (4 * 0.99 * 0.99 * 0.0025 * std::cosh(2.0)), 1e-10);
  EXPECT_NEAR(b, 267.7, 0.1);
}

TEST(ChooseRho, LowerBoundDominates) {
  const auto c = choose_rho(2.0, -1.0, 0.1);
  EXPECT_GT(c.rho, 4.0);
  EXPECT_DOUBLE_EQ(c.lower_bound, 4.0);
  const auto d = choose_rho(1.0, -1.0, 0.1);
  EXPECT_DOUBLE_EQ(d.lower_bound, 2.0);
  EXPECT_GT(d.rho, 2.0);
}

TEST(ChooseRho, ConcavityAgainstAnalyticSecondDerivative) {
  const double K = 1, K2 = -1, L0 = 0.3;
  auto f2 = [&](double x, double rho) {
    const double s = 1 / std::cosh(K2 * x), t = std::tanh(K2 * x);
    const double c = 1 / std::cos(K * x), T = std::tan(K * x);
    return kPi * kPi * K2 * K2 * (4 * s * s * t * t - 2 * s * s * s * s) +
           4 * kPi * kPi / (rho * rho) * K * K * (4 * c * c * T * T + 2 * c * c * c * c);
  };
  auto concave = [&](double rho) {
    for (int i = 0; i <= 4000; ++i)
      if (f2(-L0 + 2 * L0 * i / 4000, rho) > 1e-9) return false;
    return true;
  };
  const auto c = choose_rho(K, K2, L0);
  EXPECT_TRUE(concave(c.rho));
  const double prev = c.rho / 1.05;
  EXPECT_TRUE(prev <= c.lower_bound || !concave(prev));
  // The sign at x = 0: pi^2 K2^2 (-2) + 8 pi^2 K^2 / rho^2 < 0 iff rho > 2 K/|K2|.
  EXPECT_LT(f2(0, c.rho), 0);
}

TEST(ChooseRho, Errors) {
  try {
    choose_rho(1.0, 0.5, 0.3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_admissible_rho);
  }
  // cos(K x) vanishes inside the window: no rho can make the function concave.
  try {
    choose_rho(1.0, -1.0, 1.6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_admissible_rho);
  }
}

TEST(Domain3D, EuclideanBoxIsExact) {
  const double r = 0.05, rho = 2.1, L = 0.3;
  const auto D = build_domain_3d(MetricSpec::euclidean(3), r, rho, 1.0, L, open_gate(L));
  for (double x : {-0.3, -0.1, 0.0, 0.2, 0.3})
    for (double z : {-0.1, 0.0, 0.1}) {
      EXPECT_NEAR(D.height(x, z), r, 1e-10);
      EXPECT_NEAR(D.floor(x, z), -r, 1e-10);
    }
  for (double y : {-0.04, 0.0, 0.04}) {
    EXPECT_NEAR(D.depth_front(0.1, y), rho * r, 1e-10);
    EXPECT_NEAR(D.depth_back(0.1, y), -rho * r, 1e-10);
  }
  EXPECT_LT(D.quality().closure_defect, 1e-10);
  const auto cs = D.cross_section(0.0, 8);
  const auto corner = cs.eval(1, 1);
  EXPECT_NEAR(corner[0], r, 1e-10);
  EXPECT_NEAR(corner[1], rho * r, 1e-10);
}

TEST(Domain3D, VerticesOnBoundaryAndAxisInside) {
  const double r = 0.05, L = 0.3;
  const auto D = build_domain_3d(MetricSpec::mixed(1.0, 0.5), r, 2.1, 1.0, L, mixed_gate(L));
  const double tol = r * 1e-3;
  for (int sx = 0; sx < 2; ++sx)
    for (int sy = 0; sy < 2; ++sy)
      for (int sz = 0; sz < 2; ++sz) {
        const Vec v = D.vertex(sx, sy, sz);
        EXPECT_TRUE(D.contains(v, tol));
        Vec out = v;
        out[1] *= 1.05;
        EXPECT_FALSE(D.contains(out, tol));
      }
  for (double x : grid(-L, L, 10)) EXPECT_TRUE(D.contains(v3(x, 0, 0), 0));
}

TEST(Domain3D, AlphaRange) {
  const double L = 0.3;
  EXPECT_NO_THROW(build_domain_3d(MetricSpec::euclidean(3), 0.05, 2.1, 10.0 / 11.0, L, open_gate(L)));
  try {
    build_domain_3d(MetricSpec::euclidean(3), 0.05, 2.1, 0.9, L, open_gate(L));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
}

TEST(Domain3D, GateMustPass) {
  LengthGate g = open_gate(0.3);
  g.sinh_bound = false;
  try {
    build_domain_3d(MetricSpec::euclidean(3), 0.05, 2.1, 1.0, 0.3, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::gate_failed);
  }
}

TEST(Domain3D, ClosureDivergesWithoutLevels) {
  try {
    build_domain_3d(MetricSpec::mixed(1.0, 0.5), 0.05, 2.1, 1.0, 0.3, mixed_gate(0.3), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::closure_diverged);
  }
}

TEST(Neck, MixedSymmetricHeightsAndBulk) {
  const double r = 0.05, L = 0.3;
  const auto D = build_domain_3d(MetricSpec::mixed(1.0, 0.5), r, 2.1, 1.0, L, mixed_gate(L));
  EXPECT_LT(D.quality().hausdorff_increment, r * 1e-3);
  const auto P = height_and_neck(D, -1.0);
  EXPECT_NEAR(P.neck_center, 0.0, 1e-9);
  EXPECT_NEAR(P.neck_lo, -P.neck_hi, 2 * L / 400 + 1e-12);
  ASSERT_EQ(P.bulk.size(), 2u);
  EXPECT_NEAR(P.bulk[0].first, -L, 1e-12);
  EXPECT_NEAR(P.bulk[1].second, L, 1e-12);
  EXPECT_NEAR(P.bulk[0].second, -P.bulk[1].first, 2 * L / 400 + 1e-12);
  EXPECT_GT(P.bulk_measure, 0);
  EXPECT_LT(P.ratio, 1);
  // Barrier closed form: j*(x) = cosh(x / sqrt 2) / cosh(L / sqrt 2) for equal ends.
  EXPECT_NEAR(P.bound, 1 / std::cosh(L / std::sqrt(2.0)), 1e-12);
  EXPECT_TRUE(P.sandwich.holds(r * r)) << P.sandwich.worst_below << " " << P.sandwich.worst_above;
}

TEST(Neck, TallLeftEndPutsNeckOnTheRight) {
  const double r = 0.05, L = 0.3;
  const auto D = build_domain_3d(MetricSpec::mixed(1.0, 0.5), r, 2.1, 1.1, L, mixed_gate(L));
  const auto P = height_and_neck(D, -1.0);
  // Ends at heights 1.1 (x = -L) and 1 (x = L): the upper barrier decreases.
  for (double x : grid(-L, L, 20)) EXPECT_LT(P.upper.derivative(x), 0);
  EXPECT_NEAR(P.neck_center, L, 1e-12);
  EXPECT_NEAR(P.neck_hi, L, 1e-12);
  EXPECT_LT(P.ratio, 1);
}

TEST(Neck, EuclideanHasEmptyBulk) {
  const double L = 0.3;
  const auto D = build_domain_3d(MetricSpec::euclidean(3), 0.05, 2.1, 1.0, L, open_gate(L));
  try {
    height_and_neck(D, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_bulk);
  }
}

TEST(Convexity, EuclideanRectangleDiameter) {
  const double r = 0.1, L = 2.0;
  const auto D = build_domain_2d(MetricSpec::euclidean(2), r, L, 1.0, 1.5);
  const auto rep = convexity_audit(D, 3000, 5);
  EXPECT_TRUE(rep.pass);
  const double diag = std::sqrt(L * L + 4 * r * r);
  EXPECT_LE(rep.diameter, diag + 1e-9);
  EXPECT_GE(rep.diameter, 0.99 * diag);
}

TEST(Convexity, HyperbolicPassesAndIsDeterministic) {
  const auto D = build_domain_2d(MetricSpec::hyperbolic(), 0.05, 4.0, 2.0, 1.5);
  const auto a = convexity_audit(D, 200, 9, 1);
  const auto b = convexity_audit(D, 200, 9, 3);
  EXPECT_TRUE(a.pass);
  EXPECT_GE(a.diameter, 0.95 * 4.0);
  EXPECT_DOUBLE_EQ(a.diameter, b.diameter);
}

TEST(Convexity, MixedHullPasses) {
  const double L = 0.3;
  const auto D = build_domain_3d(MetricSpec::mixed(1.0, 0.5), 0.05, 2.1, 1.0, L, mixed_gate(L));
  const auto rep = convexity_audit(D, 100, 4);
  EXPECT_TRUE(rep.pass);
  EXPECT_GE(rep.diameter, 2 * L);
}

TEST(Convexity, LShapeIsRejected) {
  const PolygonDomain Lshape({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}, 1.0);
  try {
    convexity_audit(Lshape, 200, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::convexity_violated);
  }
  const auto rep = convexity_audit(Lshape, 200, 1, 1, false);
  EXPECT_FALSE(rep.pass);
  EXPECT_GT(rep.worst_excursion, 1e-3);
}
