#pragma once

#include "fgap/core.hpp"

#include <array>
#include <map>
#include <sstream>

namespace fgap {

enum class MetricFamily {
  euclidean,
  hyperbolic_const,      // Fermi form cosh^2(y) dx^2 + dy^2
  hyperbolic_halfplane,  // (dx^2 + dy^2) / y^2, for cross-checks only
  pinched_surface,       // cosh^2(k(x) y) dx^2 + dy^2
  mixed_3d,              // cosh^2(a y) cos^2(b z) dx^2 + dy^2 + dz^2
  sphere,                // cos^2(y) dx^2 + dy^2, diagnostic only
};

inline std::string family_id(MetricFamily f) {
  switch (f) {
    case MetricFamily::euclidean: return "euclidean";
    case MetricFamily::hyperbolic_const: return "hyperbolic-const";
    case MetricFamily::hyperbolic_halfplane: return "hyperbolic-halfplane";
    case MetricFamily::pinched_surface: return "pinched-surface";
    case MetricFamily::mixed_3d: return "mixed-3d";
    case MetricFamily::sphere: return "sphere";
  }
  return "?";
}

inline MetricFamily family_from_id(const std::string& id) {
  for (auto f : {MetricFamily::euclidean, MetricFamily::hyperbolic_const, MetricFamily::hyperbolic_halfplane,
                 MetricFamily::pinched_surface, MetricFamily::mixed_3d, MetricFamily::sphere})
    if (family_id(f) == id) return f;
  fail(ErrorCode::validation, "unknown metric family '" + id + "'");
}

struct MetricSpec {
  MetricFamily family = MetricFamily::euclidean;
  int dim = 2;
  // pinched-surface: k(x) = k_base + k_amp * (1 + sin(k_freq x + k_phase)) / 2
  double k_base = 1.0, k_amp = 0.0, k_freq = 1.0, k_phase = 0.0;
  // mixed-3d
  double a = 1.0, b = 0.5;

  static MetricSpec euclidean(int n = 2) { return {MetricFamily::euclidean, n}; }
  static MetricSpec hyperbolic() { return {MetricFamily::hyperbolic_const, 2}; }
  static MetricSpec halfplane() { return {MetricFamily::hyperbolic_halfplane, 2}; }
  static MetricSpec sphere() { return {MetricFamily::sphere, 2}; }
  static MetricSpec pinched(double k_base, double k_amp, double k_freq = 1.0, double k_phase = 0.0) {
    MetricSpec s{MetricFamily::pinched_surface, 2};
    s.k_base = k_base;
    s.k_amp = k_amp;
    s.k_freq = k_freq;
    s.k_phase = k_phase;
    return s;
  }
  static MetricSpec mixed(double a, double b) {
    MetricSpec s{MetricFamily::mixed_3d, 3};
    s.a = a;
    s.b = b;
    return s;
  }

  std::string id() const { return family_id(family); }

  // Canonical text used for hashing and cache keys.
  std::string canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << id() << ";dim=" << dim;
    if (family == MetricFamily::pinched_surface)
      os << ";k_base=" << k_base << ";k_amp=" << k_amp << ";k_freq=" << k_freq << ";k_phase=" << k_phase;
    if (family == MetricFamily::mixed_3d) os << ";a=" << a << ";b=" << b;
    return os.str();
  }

  double k(double x) const { return k_base + 0.5 * k_amp * (1.0 + std::sin(k_freq * x + k_phase)); }
  double dk(double x) const { return 0.5 * k_amp * k_freq * std::cos(k_freq * x + k_phase); }
  double d2k(double x) const { return -0.5 * k_amp * k_freq * k_freq * std::sin(k_freq * x + k_phase); }
};

struct MetricTensor {
  Mat g, g_inv;
  double sqrt_det = 1.0;
};

// Metric with first and second coordinate derivatives: dg[k] = d_k g, d2g[k][l] = d_k d_l g.
struct MetricJet {
  Mat g;
  std::array<Mat, 3> dg;
  std::array<std::array<Mat, 3>, 3> d2g;
};

inline bool in_chart(const MetricSpec& s, const ChartPoint& p) {
  if (p.size() != s.dim) return false;
  for (int i = 0; i < p.size(); ++i)
    if (!std::isfinite(p[i])) return false;
  switch (s.family) {
    case MetricFamily::euclidean: return true;
    case MetricFamily::hyperbolic_const: return std::abs(p[1]) <= 20.0;
    case MetricFamily::hyperbolic_halfplane: return p[1] > 1e-12;
    case MetricFamily::pinched_surface: return std::abs(s.k(p[0]) * p[1]) <= 20.0;
    case MetricFamily::mixed_3d: return std::abs(s.a * p[1]) <= 20.0 && std::cos(s.b * p[2]) > 1e-6;
    case MetricFamily::sphere: return std::cos(p[1]) > 1e-6;
  }
  return false;
}

inline void check_in_chart(const MetricSpec& s, const ChartPoint& p) {
  if (!in_chart(s, p)) {
    std::ostringstream os;
    os << s.id() << " at (" << p.transpose() << ")";
    fail(ErrorCode::point_outside_chart, os.str());
  }
}

namespace detail {

// Warp factor W for diagonal metrics diag(W^2, 1, 1): value, gradient, Hessian.
struct Warp {
  double w = 1;
  Vec dw;
  Mat d2w;
};

inline Warp warp(const MetricSpec& s, const ChartPoint& p) {
  const int n = s.dim;
  Warp W;
  W.dw = Vec::Zero(n);
  W.d2w = Mat::Zero(n, n);
  switch (s.family) {
    case MetricFamily::euclidean:
      break;
    case MetricFamily::hyperbolic_const: {
      const double y = p[1];
      W.w = std::cosh(y);
      W.dw[1] = std::sinh(y);
      W.d2w(1, 1) = std::cosh(y);
      break;
    }
    case MetricFamily::sphere: {
      const double y = p[1];
      W.w = std::cos(y);
      W.dw[1] = -std::sin(y);
      W.d2w(1, 1) = -std::cos(y);
      break;
    }
    case MetricFamily::pinched_surface: {
      const double x = p[0], y = p[1];
      const double k = s.k(x), k1 = s.dk(x), k2 = s.d2k(x);
      const double c = std::cosh(k * y), sh = std::sinh(k * y);
      W.w = c;
      W.dw[0] = sh * k1 * y;
      W.dw[1] = sh * k;
      W.d2w(0, 0) = c * (k1 * y) * (k1 * y) + sh * k2 * y;
      W.d2w(0, 1) = W.d2w(1, 0) = c * k * y * k1 + sh * k1;
      W.d2w(1, 1) = c * k * k;
      break;
    }
    case MetricFamily::mixed_3d: {
      const double y = p[1], z = p[2], a = s.a, b = s.b;
      const double ch = std::cosh(a * y), sh = std::sinh(a * y), co = std::cos(b * z), si = std::sin(b * z);
      W.w = ch * co;
      W.dw[1] = a * sh * co;
      W.dw[2] = -b * ch * si;
      W.d2w(1, 1) = a * a * ch * co;
      W.d2w(2, 2) = -b * b * ch * co;
      W.d2w(1, 2) = W.d2w(2, 1) = -a * b * sh * si;
      break;
    }
    case MetricFamily::hyperbolic_halfplane:
      break;
  }
  return W;
}

}  // namespace detail

inline MetricJet metric_jet(const MetricSpec& s, const ChartPoint& p) {
  check_in_chart(s, p);
  const int n = s.dim;
  MetricJet J;
  J.g = Mat::Identity(n, n);
  for (int k = 0; k < 3; ++k) {
    J.dg[k] = Mat::Zero(n, n);
    for (int l = 0; l < 3; ++l) J.d2g[k][l] = Mat::Zero(n, n);
  }
  if (s.family == MetricFamily::hyperbolic_halfplane) {
    const double y = p[1];
    J.g = Mat::Identity(n, n) / (y * y);
    J.dg[1] = Mat::Identity(n, n) * (-2.0 / (y * y * y));
    J.d2g[1][1] = Mat::Identity(n, n) * (6.0 / (y * y * y * y));
    return J;
  }
  const auto W = detail::warp(s, p);
  J.g(0, 0) = W.w * W.w;
  for (int k = 0; k < n; ++k) {
    J.dg[k](0, 0) = 2.0 * W.w * W.dw[k];
    for (int l = 0; l < n; ++l) J.d2g[k][l](0, 0) = 2.0 * (W.dw[k] * W.dw[l] + W.w * W.d2w(k, l));
  }
  return J;
}

inline MetricTensor metric_at(const MetricSpec& s, const ChartPoint& p) {
  const MetricJet J = metric_jet(s, p);
  MetricTensor m;
  m.g = J.g;
  m.g_inv = J.g.inverse();
  const double det = J.g.determinant();
  require(det > 0, ErrorCode::point_outside_chart, "metric not positive definite");
  m.sqrt_det = std::sqrt(det);
  return m;
}

// Christoffel symbols Gamma^k_{ij}, stored as gamma[k](i,j).
using Christoffel = std::array<Mat, 3>;

inline Christoffel christoffel_from_jet(const MetricJet& J) {
  const int n = int(J.g.rows());
  const Mat ginv = J.g.inverse();
  Christoffel G;
  for (int k = 0; k < n; ++k) {
    G[k] = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0;
        for (int l = 0; l < n; ++l) s += ginv(k, l) * (J.dg[i](j, l) + J.dg[j](i, l) - J.dg[l](i, j));
        G[k](i, j) = 0.5 * s;
      }
  }
  return G;
}

inline Christoffel christoffel(const MetricSpec& s, const ChartPoint& p) { return christoffel_from_jet(metric_jet(s, p)); }

// Fully covariant Riemann tensor Rm(X,Y,Z,W) = <R(X,Y)Z, W> with
// R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]; sectional curvature is Rm(u,v,v,u).
struct Riemann {
  int n = 2;
  std::array<double, 81> c{};
  double& operator()(int i, int j, int k, int l) { return c[((i * 3 + j) * 3 + k) * 3 + l]; }
  double operator()(int i, int j, int k, int l) const { return c[((i * 3 + j) * 3 + k) * 3 + l]; }

  double apply(const Vec& X, const Vec& Y, const Vec& Z, const Vec& W) const {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) s += (*this)(i, j, k, l) * X[i] * Y[j] * Z[k] * W[l];
    return s;
  }

  double norm() const {
    double s = 0;
    for (double v : c) s += v * v;
    return std::sqrt(s);
  }

  // Largest violation of the algebraic symmetries.
  double symmetry_defect() const {
    double d = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            const double v = (*this)(i, j, k, l);
            d = std::max(d, std::abs(v + (*this)(j, i, k, l)));
            d = std::max(d, std::abs(v + (*this)(i, j, l, k)));
            d = std::max(d, std::abs(v - (*this)(k, l, i, j)));
            d = std::max(d, std::abs(v + (*this)(j, k, i, l) + (*this)(k, i, j, l)));
          }
    return d;
  }
};

inline Riemann riemann_from_jet(const MetricJet& J) {
  const int n = int(J.g.rows());
  const Mat ginv_m = J.g.inverse();
  double gi[3][3] = {}, g[3][3] = {}, dg[3][3][3] = {}, d2g[3][3][3][3] = {};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      gi[i][j] = ginv_m(i, j);
      g[i][j] = J.g(i, j);
      for (int k = 0; k < n; ++k) {
        dg[k][i][j] = J.dg[k](i, j);
        for (int l = 0; l < n; ++l) d2g[k][l][i][j] = J.d2g[k][l](i, j);
      }
    }
  // S[j][k][m] = d_j g_km + d_k g_jm - d_m g_jk, and its derivative dS[a][j][k][m].
  double S[3][3][3] = {}, dS[3][3][3][3] = {}, G[3][3][3] = {}, dG[3][3][3][3] = {};
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int m = 0; m < n; ++m) {
        S[j][k][m] = dg[j][k][m] + dg[k][j][m] - dg[m][j][k];
        for (int a = 0; a < n; ++a) dS[a][j][k][m] = d2g[a][j][k][m] + d2g[a][k][j][m] - d2g[a][m][j][k];
      }
  double dgi[3][3][3] = {};  // d_a g^{lm}
  for (int a = 0; a < n; ++a)
    for (int l = 0; l < n; ++l)
      for (int m = 0; m < n; ++m) {
        double s = 0;
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) s -= gi[l][p] * dg[a][p][q] * gi[q][m];
        dgi[a][l][m] = s;
      }
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0;
        for (int m = 0; m < n; ++m) s += gi[l][m] * S[j][k][m];
        G[l][j][k] = 0.5 * s;
        for (int a = 0; a < n; ++a) {
          double t = 0;
          for (int m = 0; m < n; ++m) t += dgi[a][l][m] * S[j][k][m] + gi[l][m] * dS[a][j][k][m];
          dG[a][l][j][k] = 0.5 * t;
        }
      }
  Riemann R;
  R.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double up[3] = {};
        for (int l = 0; l < n; ++l) {
          double s = dG[i][l][j][k] - dG[j][l][i][k];
          for (int m = 0; m < n; ++m) s += G[l][i][m] * G[m][j][k] - G[l][j][m] * G[m][i][k];
          up[l] = s;
        }
        for (int l = 0; l < n; ++l) {
          double s = 0;
          for (int m = 0; m < n; ++m) s += g[l][m] * up[m];
          R(i, j, k, l) = s;
        }
      }
  return R;
}

inline Riemann riemann(const MetricSpec& s, const ChartPoint& p) { return riemann_from_jet(metric_jet(s, p)); }

inline double sectional(const Riemann& R, const Mat& g, const Vec& u, const Vec& v) {
  const double guu = u.dot(g * u), gvv = v.dot(g * v), guv = u.dot(g * v);
  const double area2 = guu * gvv - guv * guv;
  if (!(area2 > 1e-14 * std::max(1e-300, guu * gvv))) fail(ErrorCode::degenerate_plane, "plane vectors are dependent");
  return R.apply(u, v, v, u) / area2;
}

struct CurvatureData {
  Riemann riemann;
  Mat g;
  double sectional_value = 0;
  double plane_sectional(const Vec& u, const Vec& v) const { return sectional(riemann, g, u, v); }
};

inline CurvatureData curvature_at(const MetricSpec& s, const ChartPoint& p, const Vec& u, const Vec& v) {
  const MetricJet J = metric_jet(s, p);
  CurvatureData d;
  d.riemann = riemann_from_jet(J);
  d.g = J.g;
  d.sectional_value = sectional(d.riemann, J.g, u, v);
  return d;
}

// Min and max sectional curvature over all 2-planes at a point, via the
// curvature operator on bivectors in an orthonormal frame (n <= 3).
inline std::pair<double, double> sectional_range(const Riemann& R, const Mat& g) {
  const int n = R.n;
  Eigen::LLT<Mat> llt(g);
  const Mat Lt = Mat(llt.matrixL()).transpose();
  const Mat E = Lt.inverse();  // columns orthonormal
  if (n == 2) {
    const double k = R.apply(E.col(0), E.col(1), E.col(1), E.col(0));
    return {k, k};
  }
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  Eigen::Matrix3d Q;
  for (int P = 0; P < 3; ++P)
    for (int S = 0; S < 3; ++S) {
      const int a = pairs[P][0], b = pairs[P][1], c = pairs[S][0], d = pairs[S][1];
      Q(P, S) = R.apply(E.col(a), E.col(b), E.col(d), E.col(c));
    }
  Q = 0.5 * (Q + Q.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(Q);
  return {es.eigenvalues()(0), es.eigenvalues()(2)};
}

// Quadratic form B_{ab}(x) = Rm(e_a, e_1, e_1, e_b) on the normal space along
// the axis y = 0 of a catalog Fermi metric, where the coordinate frame is
// orthonormal and parallel. Its eigenvalues are kappa_2, kappa_3.
inline Mat normal_curvature_form(const MetricSpec& s, double x) {
  ChartPoint p = Vec::Zero(s.dim);
  p[0] = x;
  const Riemann R = riemann(s, p);
  const int m = s.dim - 1;
  Mat B(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) B(a, b) = R(a + 1, 0, 0, b + 1);
  return B;
}

struct CurvatureBounds {
  double K1 = 0, K2 = 0;         // sectional min / max on the tube
  double K = 0;                  // max |sectional|
  double k2 = 0, K2_dir = 0;     // min / max of kappa_2 along the axis
  double K3 = 0;                 // max |kappa_3| along the axis
  double kappa2_0 = 0;           // kappa_2 at x = 0
  double margin = 0.1;           // safety factor applied by the *_safe accessors
  double riemann_max = 0, grad_riemann_max = 0, hess_riemann_max = 0;
  double sample_step = 0;
  std::size_t samples = 0;
  bool pinching_gate = false;

  double K_safe() const { return K * (1.0 + margin); }
  double K1_safe() const { return K1 - margin * std::abs(K1); }
  double K2_safe() const { return K2 + margin * std::abs(K2); }
  // |K2_dir| shrunk by the margin: used where a small negative rate is conservative.
  double abs_K2_dir_safe() const { return std::abs(K2_dir) / (1.0 + margin); }
};

// Pinching gate: 9 kappa2(0)/8 < k2 <= K2_dir < 7 kappa2(0)/8 < 0.
inline bool pinching_gate_holds(double kappa2_0, double k2, double K2_dir) {
  return kappa2_0 < 0 && 9.0 * kappa2_0 / 8.0 < k2 && k2 <= K2_dir && K2_dir < 7.0 * kappa2_0 / 8.0;
}

namespace detail {
inline double riemann_diff_norm(const Riemann& a, const Riemann& b, double scale) {
  double s = 0;
  for (std::size_t i = 0; i < a.c.size(); ++i) s += (a.c[i] - b.c[i]) * (a.c[i] - b.c[i]);
  return std::sqrt(s) * scale;
}
}  // namespace detail

// Sampled curvature bounds on the tube {|x| <= L, |y| <= r_max}.
inline CurvatureBounds tube_bounds(const MetricSpec& s, double L, double r_max, unsigned workers = 1) {
  require(L > 0 && r_max > 0, ErrorCode::invalid_argument, "tube needs L > 0 and r_max > 0");
  const int n = s.dim;
  const double h = r_max / 50.0;
  const int nx = int(std::ceil(2 * L / h));
  const int ny = 50;
  // The tube boundary must lie in the chart.
  for (double x : {-L, 0.0, L})
    for (int q = 0; q < 16; ++q) {
      ChartPoint p = Vec::Zero(n);
      p[0] = x;
      const double th = 2 * kPi * q / 16;
      if (n == 2) {
        if (q > 1) break;
        p[1] = (q == 0 ? 1 : -1) * r_max;
      } else {
        p[1] = r_max * std::cos(th);
        p[2] = r_max * std::sin(th);
      }
      if (!in_chart(s, p)) fail(ErrorCode::tube_exceeds_chart, s.id() + " tube leaves the chart");
    }

  struct Acc {
    double K1 = 1e300, K2 = -1e300, Rmax = 0, dR = 0, d2R = 0;
    std::size_t count = 0;
  };
  std::vector<Acc> acc(nx + 1);
  const double fd = std::max(1e-4, r_max * 1e-3);
  parallel_for(std::size_t(nx + 1), workers, [&](std::size_t ix) {
    Acc a;
    const double x = -L + 2 * L * double(ix) / nx;
    auto visit = [&](const ChartPoint& p) {
      const MetricJet J = metric_jet(s, p);
      const Riemann R = riemann_from_jet(J);
      const auto [lo, hi] = sectional_range(R, J.g);
      a.K1 = std::min(a.K1, lo);
      a.K2 = std::max(a.K2, hi);
      a.Rmax = std::max(a.Rmax, R.norm());
      ++a.count;
    };
    auto visit_grad = [&](const ChartPoint& p) {
      const Riemann R0 = riemann(s, p);
      for (int d = 0; d < n; ++d) {
        ChartPoint pp = p, pm = p;
        pp[d] += fd;
        pm[d] -= fd;
        const Riemann Rp = riemann(s, pp), Rm = riemann(s, pm);
        a.dR = std::max(a.dR, detail::riemann_diff_norm(Rp, Rm, 0.5 / fd));
        Riemann sum;
        sum.n = n;
        for (std::size_t i = 0; i < sum.c.size(); ++i) sum.c[i] = Rp.c[i] + Rm.c[i] - R0.c[i];
        a.d2R = std::max(a.d2R, detail::riemann_diff_norm(sum, R0, 1.0 / (fd * fd)));
      }
    };
    ChartPoint p = Vec::Zero(n);
    p[0] = x;
    if (n == 2) {
      for (int iy = -ny; iy <= ny; ++iy) {
        p[1] = r_max * iy / ny;
        visit(p);
      }
    } else {
      for (int iy = -ny; iy <= ny; ++iy)
        for (int iz = -ny; iz <= ny; ++iz) {
          if (iy * iy + iz * iz > ny * ny) continue;
          p[1] = r_max * iy / ny;
          p[2] = r_max * iz / ny;
          visit(p);
        }
    }
    if (ix % 10 == 0) {
      p[1] = 0;
      if (n == 3) p[2] = 0;
      visit_grad(p);
      p[1] = r_max;
      visit_grad(p);
    }
    acc[ix] = a;
  });
  CurvatureBounds B;
  B.K1 = 1e300;
  B.K2 = -1e300;
  for (const auto& a : acc) {
    B.K1 = std::min(B.K1, a.K1);
    B.K2 = std::max(B.K2, a.K2);
    B.riemann_max = std::max(B.riemann_max, a.Rmax);
    B.grad_riemann_max = std::max(B.grad_riemann_max, a.dR);
    B.hess_riemann_max = std::max(B.hess_riemann_max, a.d2R);
    B.samples += a.count;
  }
  B.K = std::max(std::abs(B.K1), std::abs(B.K2));
  B.sample_step = h;

  // Directional curvatures along the axis.
  B.k2 = 1e300;
  B.K2_dir = -1e300;
  B.K3 = 0;
  for (int ix = 0; ix <= nx; ++ix) {
    const double x = -L + 2 * L * double(ix) / nx;
    const Mat form = normal_curvature_form(s, x);
    double k2, k3 = 0;
    if (n == 2) {
      k2 = form(0, 0);
    } else {
      const Eigen::Matrix2d f2 = form;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(f2);
      k2 = es.eigenvalues()(0);
      k3 = es.eigenvalues()(1);
    }
    B.k2 = std::min(B.k2, k2);
    B.K2_dir = std::max(B.K2_dir, k2);
    B.K3 = std::max(B.K3, std::abs(k3));
  }
  {
    const Mat form = normal_curvature_form(s, 0.0);
    if (n == 2) {
      B.kappa2_0 = form(0, 0);
    } else {
      const Eigen::Matrix2d f2 = form;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(f2);
      B.kappa2_0 = es.eigenvalues()(0);
    }
  }
  B.pinching_gate = pinching_gate_holds(B.kappa2_0, B.k2, B.K2_dir);
  return B;
}

}  // namespace fgap
