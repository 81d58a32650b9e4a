#include "fgap/eigensolver.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>

using namespace fgap;

namespace {
std::shared_ptr<const Mesh> share(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

EigenResult solve_polygon(const PolygonDomain& d, double h, int k = 2) {
  const auto F = assemble(share(triangulate(d, h)), MetricSpec::euclidean(2));
  return smallest_eigenpairs(F, k);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

MetricTensor constant_metric(double gxx, double gyy) {
  MetricTensor m;
  m.g = Mat::Zero(2, 2);
  m.g(0, 0) = gxx;
  m.g(1, 1) = gyy;
  m.g_inv = m.g.inverse();
  m.sqrt_det = std::sqrt(gxx * gyy);
  return m;
}

Mesh single_triangle() {
  Mesh m;
  m.dim = 2;
  for (auto [x, y] : {std::pair{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}) {
    Vec v(2);
    v << x, y;
    m.verts.push_back(v);
  }
  m.cells = {{0, 1, 2, -1}};
  m.boundary = {1, 1, 1};
  return m;
}
}  // namespace

TEST(Mesh, UnitSquareStatistics) {
  const auto d = PolygonDomain::rectangle(0, 1, 0, 1);
  const Mesh m = triangulate(d, 0.05);
  EXPECT_GT(m.num_cells(), 700u);
  EXPECT_LT(m.num_cells(), 1200u);
  EXPECT_GE(m.min_angle_deg(), 20.0);
  double area = 0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    EXPECT_GT(m.cell_volume(c), 0);
    area += m.cell_volume(c);
  }
  EXPECT_NEAR(area, 1.0, 1e-12);
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    if (!m.boundary[v]) continue;
    const double x = m.verts[v][0], y = m.verts[v][1];
    EXPECT_LT(std::min({x, 1 - x, y, 1 - y}), 1e-12);
  }
}

TEST(Mesh, TooCoarse) {
  try {
    triangulate(PolygonDomain::rectangle(0, 1, 0, 1), 0.3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::h_too_coarse);
  }
  const auto D = build_domain_2d(MetricSpec::hyperbolic(), 0.05, 4.0, 2.0, 1.5);
  SlabMeshOptions o;
  o.ny = 4;
  try {
    mesh_slab(D, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::h_too_coarse);
  }
}

TEST(Mesh, SlabGradingFollowsHalfWidth) {
  const auto D = build_domain_2d(MetricSpec::hyperbolic(), 0.05, 4.0, 2.0, 1.5);
  SlabMeshOptions o;
  o.aspect = 1.5;
  const Mesh m = mesh_slab(D, o);
  // Column spacing over local half-width is roughly constant: aspect * 2 / ny.
  std::vector<double> xs;
  for (const auto& v : m.verts)
    if (xs.empty() || v[0] != xs.back()) xs.push_back(v[0]);
  const double target = o.aspect * 2.0 / o.ny;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double xm = 0.5 * (xs[i] + xs[i - 1]);
    const double ratio = (xs[i] - xs[i - 1]) / D.upper(xm);
    EXPECT_NEAR(ratio, target, 0.1 * target);
  }
  EXPECT_GE(m.min_angle_deg(), 20.0);
}

TEST(Assembly, FlatRightTriangleStiffness) {
  const auto F = assemble(share(single_triangle()), MetricSpec::euclidean(2));
  Eigen::Matrix3d K;
  K << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
  EXPECT_LT((F.Ae[0].topLeftCorner<3, 3>() - K).cwiseAbs().maxCoeff(), 1e-14);
  Eigen::Matrix3d Mref;
  Mref << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  EXPECT_LT((F.Me[0].topLeftCorner<3, 3>() - Mref / 24).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Assembly, ConstantMetricScaling) {
  // g = diag(4, 1): the x part scales by g^xx sqrt(det g) = 1/2, the y part by 2.
  const auto F = assemble(share(single_triangle()), [](const Vec&) { return constant_metric(4, 1); });
  Eigen::Matrix3d Kx, Ky;
  Kx << 0.5, -0.5, 0, -0.5, 0.5, 0, 0, 0, 0;
  Ky << 0.5, 0, -0.5, 0, 0, 0, -0.5, 0, 0.5;
  EXPECT_LT((F.Ae[0].topLeftCorner<3, 3>() - (0.5 * Kx + 2 * Ky)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Assembly, SymmetricForms) {
  const auto D = build_domain_2d(MetricSpec::hyperbolic(), 0.1, 4.0, 2.0, 1.5);
  const auto F = assemble(share(mesh_slab(D)), MetricSpec::hyperbolic(), 2);
  EXPECT_LT(SpMat(F.A - SpMat(F.A.transpose())).cwiseAbs().sum(), 1e-12 * F.A.cwiseAbs().sum());
  EXPECT_LT(SpMat(F.M - SpMat(F.M.transpose())).cwiseAbs().sum(), 1e-12 * F.M.cwiseAbs().sum());
}

TEST(Assembly, QuadraturePointOutsideChart) {
  const auto d = PolygonDomain::rectangle(-0.5, 0.5, -0.5, 0.5);
  try {
    assemble(share(triangulate(d, 0.1)), MetricSpec::halfplane());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::quadrature_point_outside_chart);
  }
}

TEST(Eigen, UnitSquareOracle) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto R = solve_polygon(PolygonDomain::rectangle(0, 1, 0, 1), 0.02);
  EXPECT_LT(seconds_since(t0), 30.0);
  const double l1 = R.pairs[0].lambda, l2 = R.pairs[1].lambda;
  EXPECT_NEAR(l1 / (2 * kPi * kPi), 1.0, 0.01);
  EXPECT_NEAR((l2 - l1) / (3 * kPi * kPi), 1.0, 0.01);
  for (const auto& p : R.pairs) EXPECT_LT(p.residual, 1e-8);
}

TEST(Eigen, TwoByOneRectangle) {
  const auto R = solve_polygon(PolygonDomain::rectangle(0, 2, 0, 1), 0.025);
  EXPECT_NEAR(R.pairs[0].lambda / (1.25 * kPi * kPi), 1.0, 0.01);
  EXPECT_NEAR(R.pairs[1].lambda / (2 * kPi * kPi), 1.0, 0.01);
}

TEST(Eigen, UnitDiskBesselOracle) {
  const double j01 = boost::math::cyl_bessel_j_zero(0.0, 1), j11 = boost::math::cyl_bessel_j_zero(1.0, 1);
  EXPECT_NEAR(j01 * j01, 5.78319, 1e-5);
  EXPECT_NEAR(j11 * j11, 14.68197, 1e-5);
  const auto t0 = std::chrono::steady_clock::now();
  const auto R = solve_polygon(PolygonDomain::disk(1.0, 315), 0.02);
  EXPECT_LT(seconds_since(t0), 30.0);
  EXPECT_NEAR(R.pairs[0].lambda / (j01 * j01), 1.0, 0.01);
  // j11 is a double eigenvalue on the disk.
  EXPECT_NEAR(R.pairs[1].lambda / (j11 * j11), 1.0, 0.01);
}

TEST(Eigen, OrthonormalAndPositive) {
  const auto D = build_domain_2d(MetricSpec::hyperbolic(), 0.1, 4.0, 2.2, 1.5);
  SlabMeshOptions o;
  o.aspect = 1.5;
  const auto F = assemble(share(mesh_slab(D, o)), MetricSpec::hyperbolic());
  const auto R = smallest_eigenpairs(F, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const auto ui = F.to_reduced(R.pairs[std::size_t(i)].h), uj = F.to_reduced(R.pairs[std::size_t(j)].h);
      EXPECT_NEAR(ui.dot(F.M * uj), i == j ? 1.0 : 0.0, 1e-8);
    }
  const auto& h = R.pairs[0].h;
  EXPECT_GE(h.minCoeff(), -1e-6 * h.maxCoeff());
  EXPECT_LT(R.pairs[0].lambda, R.pairs[1].lambda);
}

TEST(Eigen, DeterministicForFixedSeed) {
  const auto D = build_domain_2d(MetricSpec::hyperbolic(), 0.1, 4.0, 2.0, 1.5);
  const auto F = assemble(share(mesh_slab(D)), MetricSpec::hyperbolic());
  const auto a = smallest_eigenpairs(F, 2), b = smallest_eigenpairs(F, 2);
  EXPECT_EQ(a.pairs[0].lambda, b.pairs[0].lambda);
  EXPECT_EQ((a.pairs[0].h - b.pairs[0].h).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Eigen, SymmetricClusterTieBreak) {
  // Mirror-symmetric double well: lambda_1 and lambda_2 agree to working precision
  // and the ground vector is the even, positive combination.
  const auto D = build_domain_2d(MetricSpec::hyperbolic(), 0.05, 4.0, 2.0, 1.5);
  SlabMeshOptions o;
  o.aspect = 1.5;
  const auto m = share(mesh_slab(D, o));
  const auto F = assemble(m, MetricSpec::hyperbolic());
  const auto R = smallest_eigenpairs(F, 2);
  EXPECT_EQ(R.ground_cluster, 2);
  const auto& h = R.pairs[0].h;
  EXPECT_GE(h.minCoeff(), -1e-6 * h.maxCoeff());
  double left = 0, right = 0;
  for (std::size_t v = 0; v < m->num_vertices(); ++v) (m->verts[v][0] < 0 ? left : right) += h[Eigen::Index(v)];
  EXPECT_NEAR(left / right, 1.0, 1e-6);
}

TEST(Eigen, HyperbolicSecondOrderConvergence) {
  const auto D = build_domain_2d(MetricSpec::hyperbolic(), 0.3, 1.0, 0.5, 1.5);
  std::vector<double> lam;
  for (int ny : {8, 16, 32}) {
    SlabMeshOptions o;
    o.ny = ny;
    o.aspect = 1.0;
    lam.push_back(smallest_eigenpairs(assemble(share(mesh_slab(D, o)), MetricSpec::hyperbolic()), 2).pairs[0].lambda);
  }
  const double ratio = (lam[0] - lam[1]) / (lam[1] - lam[2]);
  EXPECT_GT(ratio, 3.5);
  EXPECT_LT(ratio, 4.5);
}

TEST(Eigen, Errors) {
  const auto F = assemble(share(triangulate(PolygonDomain::rectangle(0, 1, 0, 1), 0.2)), MetricSpec::euclidean(2));
  try {
    smallest_eigenpairs(F, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
}

TEST(Rayleigh, EigenIdentityAndTwoModeExpansion) {
  const auto F = assemble(share(triangulate(PolygonDomain::rectangle(0, 2, 0, 1), 0.05)), MetricSpec::euclidean(2));
  const auto R = smallest_eigenpairs(F, 2);
  const double l1 = R.pairs[0].lambda, l2 = R.pairs[1].lambda;
  EXPECT_NEAR(rayleigh_quotient(F, R.pairs[0].h), l1, 1e-8 * l1);
  const double eps = 1e-2;
  const double q = rayleigh_quotient(F, R.pairs[0].h + eps * R.pairs[1].h);
  EXPECT_NEAR(q, l1 + eps * eps * (l2 - l1) / (1 + eps * eps), 1e-9 * l1);
  try {
    rayleigh_quotient(F, Eigen::VectorXd::Zero(Eigen::Index(F.mesh->num_vertices())));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::zero_function);
  }
}

TEST(Rayleigh, WectangleTestFunctionAndPrintedBound) {
  const double r = 0.05, L = 4.0, delta = 0.01;
  const auto D = build_domain_2d(MetricSpec::hyperbolic(), r, L, 2.0, 1.5);
  const auto W = contained_wectangle(D, delta);
  SlabMeshOptions o;
  o.ny = 32;
  o.aspect = 1.0;
  const auto m = share(mesh_slab(D, o));
  const auto F = assemble(m, MetricSpec::hyperbolic());
  Eigen::VectorXd f = Eigen::VectorXd::Zero(Eigen::Index(m->num_vertices()));
  for (std::size_t v = 0; v < m->num_vertices(); ++v) {
    const double x = m->verts[v][0], y = m->verts[v][1];
    if (x > W.x0 && x < W.x1 && std::abs(y) < W.half_height)
      f[Eigen::Index(v)] = std::sin(kPi * (x - L / 4) / (L / 4)) * std::cos(kPi * y / (2 * W.half_height));
  }
  const double q = rayleigh_quotient(F, f);
  // Flat value of the separable test function; the metric perturbs it by O(r^2 cosh^2).
  const double flat = kPi * kPi / ((L / 4) * (L / 4)) + kPi * kPi / (4 * W.half_height * W.half_height);
  EXPECT_NEAR(q / flat, 1.0, 0.1);
  const double l1 = smallest_eigenpairs(F, 2).pairs[0].lambda;
  EXPECT_LE(l1, q);
  // The printed bound holds for lambda_1 but not for the test function itself.
  EXPECT_LE(l1, lambda1_upper_bound(r, L, delta) * 1.02);
  EXPECT_GT(q, lambda1_upper_bound(r, L, delta));
}

TEST(Rayleigh, DomainMonotonicity) {
  const double r = 0.05, L = 4.0;
  const auto D = build_domain_2d(MetricSpec::hyperbolic(), r, L, 2.0, 1.5);
  const auto W = contained_wectangle(D, 0.01);
  const auto rect = PolygonDomain::rectangle(W.x0, W.x1, -W.half_height, W.half_height);
  const double lw =
      smallest_eigenpairs(assemble(share(triangulate(rect, 0.008)), MetricSpec::hyperbolic()), 2).pairs[0].lambda;
  SlabMeshOptions o;
  o.aspect = 1.5;
  const double lo = smallest_eigenpairs(assemble(share(mesh_slab(D, o)), MetricSpec::hyperbolic()), 2).pairs[0].lambda;
  EXPECT_LE(lo, lw * 1.02);
}

TEST(Eigen, EuclideanBoxIn3D) {
  const double r = 0.05, rho = 2.1, L = 0.3;
  LengthGate g;
  g.cos_bound = g.theta_bound = g.cosh_bound = g.sinh_bound = true;
  const auto D = build_domain_3d(MetricSpec::euclidean(3), r, rho, 1.0, L, g);
  HullMeshOptions o;
  o.nx = 24;
  o.ny = 10;
  o.nz = 20;
  const auto m = share(mesh_hull(D, o));
  EXPECT_LE(m->max_radius_edge(), 2.0);
  const auto R = smallest_eigenpairs(assemble(m, MetricSpec::euclidean(3)), 2);
  const double exact = kPi * kPi * (1 / (4 * L * L) + 1 / (4 * r * r) + 1 / (4 * rho * rho * r * r));
  EXPECT_NEAR(R.pairs[0].lambda / exact, 1.0, 0.03);
}

TEST(Export, MatrixMarketRoundTrip) {
  const auto F = assemble(share(triangulate(PolygonDomain::rectangle(0, 1, 0, 1), 0.1)), MetricSpec::euclidean(2));
  const auto path = (std::filesystem::temp_directory_path() / "fgap_A.mtx").string();
  write_matrix_market(path, F.A);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "%%MatrixMarket matrix coordinate real general");
  long rows, cols, nnz;
  is >> rows >> cols >> nnz;
  EXPECT_EQ(rows, F.A.rows());
  EXPECT_EQ(nnz, F.A.nonZeros());
  std::vector<Eigen::Triplet<double>> t;
  for (long k = 0; k < nnz; ++k) {
    long i, j;
    double v;
    is >> i >> j >> v;
    t.emplace_back(i - 1, j - 1, v);
  }
  SpMat B(rows, cols);
  B.setFromTriplets(t.begin(), t.end());
  EXPECT_EQ(SpMat(B - F.A).cwiseAbs().sum(), 0.0);
  std::filesystem::remove(path);
}
