#pragma once

#include "fgap/jacobi.hpp"

#include <map>
#include <memory>
#include <random>

namespace fgap {

// Domain in Fermi coordinates of a catalog metric. Every domain is a slab in x
// whose cross-sections are convex.
class Domain {
 public:
  virtual ~Domain() = default;
  virtual int dim() const = 0;
  virtual const MetricSpec& metric() const = 0;
  virtual double scale() const = 0;  // r: sets audit tolerances
  virtual std::pair<double, double> x_range() const = 0;
  virtual bool contains(const Vec& p, double tol) const = 0;
  // Deterministic boundary points driven by rng.
  virtual std::vector<Vec> boundary_samples(std::size_t n, std::mt19937_64& rng) const = 0;
};

// ---------------------------------------------------------------- 2D

// Geodesic written as a graph y = f(x) in the chart, with
// f'' = -G^y(u,u) + f' G^x(u,u), u = (1, f').
struct BoundaryGeodesic {
  MetricSpec metric;
  double y0 = 0;
  double x_lo = 0, x_hi = 0;  // reachable range
  Trajectory fwd, bwd;

  State state(double x) const { return (x >= 0 ? fwd : bwd).at(std::clamp(x, x_lo, x_hi)); }
  double y(double x) const { return state(x)[0]; }
  double slope(double x) const { return state(x)[1]; }
  // max |geodesic equation residual| at step midpoints
  double residual() const {
    double worst = 0;
    for (const Trajectory* tr : {&fwd, &bwd})
      for (std::size_t i = 0; i + 1 < tr->t.size(); ++i) {
        const double x = 0.5 * (tr->t[i] + tr->t[i + 1]);
        State d;
        const State s = tr->at(x, &d);
        Vec p(2), u(2);
        p << x, s[0];
        u << 1.0, s[1];
        const auto G = christoffel(metric, p);
        const double rhs = -u.dot(G[1] * u) + s[1] * u.dot(G[0] * u);
        worst = std::max(worst, std::abs(d[1] - rhs));
      }
    return worst;
  }
};

// Geodesic through (0, y0) perpendicular to the vertical geodesic x = 0,
// integrated over [-X, X] or until |y| exceeds tube_radius.
inline BoundaryGeodesic boundary_geodesic(const MetricSpec& s, double y0, double X, double tube_radius) {
  require(s.dim == 2, ErrorCode::invalid_argument, "boundary geodesics live on surfaces");
  BoundaryGeodesic b;
  b.metric = s;
  b.y0 = y0;
  Vec p0(2);
  p0 << 0.0, y0;
  check_in_chart(s, p0);
  const Mat g0 = metric_at(s, p0).g;
  const State init{y0, -g0(0, 1) / g0(1, 1)};
  Rhs f = [s](const State& y, State& d, double x) {
    Vec p(2), u(2);
    p << x, y[0];
    u << 1.0, y[1];
    if (!in_chart(s, p)) fail(ErrorCode::boundary_left_tube, "boundary geodesic left the chart");
    const auto G = christoffel(s, p);
    d[0] = y[1];
    d[1] = -u.dot(G[1] * u) + y[1] * u.dot(G[0] * u);
  };
  StopFn stop = [tube_radius](double, const State& y) { return std::abs(y[0]) > tube_radius; };
  OdeOptions opt;
  opt.initial_step = 1e-3;
  b.fwd = integrate(f, init, 0.0, X, opt, stop);
  b.bwd = integrate(f, init, 0.0, -X, opt, stop);
  auto reach = [&](const Trajectory& tr) {
    // Last node still inside the tube.
    std::size_t k = tr.t.size() - 1;
    while (k > 0 && std::abs(tr.y[k][0]) > tube_radius) --k;
    return tr.t[k];
  };
  b.x_hi = reach(b.fwd);
  b.x_lo = reach(b.bwd);
  return b;
}

// Boundary geodesics shared by the sliding family Omega_{r,L,t}.
struct NeckFamily2D {
  MetricSpec metric;
  double r = 0, L = 0, tube_radius = 0;
  BoundaryGeodesic upper, lower;
  double t_min = 0, t_max = 0;  // constructible t range
};

inline std::shared_ptr<const NeckFamily2D> make_family_2d(const MetricSpec& s, double r, double L,
                                                          double tube_radius) {
  require(r > 0 && L > 0 && r < tube_radius, ErrorCode::invalid_argument, "family needs 0 < r < tube radius, L > 0");
  auto F = std::make_shared<NeckFamily2D>();
  F->metric = s;
  F->r = r;
  F->L = L;
  F->tube_radius = tube_radius;
  F->upper = boundary_geodesic(s, r, L, tube_radius);
  F->lower = boundary_geodesic(s, -r, L, tube_radius);
  const double lo = std::max(F->upper.x_lo, F->lower.x_lo), hi = std::min(F->upper.x_hi, F->lower.x_hi);
  // Omega_t spans [t - L, t] inside the reachable range and inside t in (0, L).
  F->t_min = std::max(0.0, lo + L);
  F->t_max = std::min(L, hi);
  if (!(F->t_max > F->t_min)) fail(ErrorCode::boundary_left_tube, "no constructible t for this r and L");
  return F;
}

struct SliceRecord {
  double x, ell_minus, ell_plus;
  double ell() const { return std::max(ell_minus, ell_plus); }
};

class ConvexDomain2D : public Domain {
 public:
  ConvexDomain2D(std::shared_ptr<const NeckFamily2D> fam, double t) : fam_(std::move(fam)), t_(t) {
    const double eps = 1e-12;
    if (!(t >= fam_->t_min - eps && t <= fam_->t_max + eps))
      fail(ErrorCode::boundary_left_tube, "t outside the constructible range");
  }
  int dim() const override { return 2; }
  const MetricSpec& metric() const override { return fam_->metric; }
  double scale() const override { return fam_->r; }
  std::pair<double, double> x_range() const override { return {t_ - fam_->L, t_}; }
  double r() const { return fam_->r; }
  double L() const { return fam_->L; }
  double t() const { return t_; }
  const NeckFamily2D& family() const { return *fam_; }

  double upper(double x) const { return fam_->upper.y(x); }
  double lower(double x) const { return fam_->lower.y(x); }

  // Corners P, Q (right side, bottom/top) and R, S (left side, top/bottom), counterclockwise.
  std::array<Vec, 4> corners() const {
    auto pt = [](double x, double y) {
      Vec v(2);
      v << x, y;
      return v;
    };
    const double a = t_ - fam_->L, b = t_;
    return {pt(b, lower(b)), pt(b, upper(b)), pt(a, upper(a)), pt(a, lower(a))};
  }

  bool contains(const Vec& p, double tol) const override {
    const auto [a, b] = x_range();
    if (p[0] < a - tol || p[0] > b + tol) return false;
    const double x = std::clamp(p[0], a, b);
    return p[1] <= upper(x) + tol && p[1] >= lower(x) - tol;
  }

  std::vector<Vec> boundary_samples(std::size_t n, std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto [a, b] = x_range();
    const double width = b - a;
    std::vector<Vec> out;
    for (std::size_t i = 0; i < n; ++i) {
      // Perimeter by side lengths in the chart.
      const double hl = upper(a) - lower(a), hr = upper(b) - lower(b);
      double s = u(rng) * (2 * width + hl + hr);
      Vec p(2);
      if (s < width) {
        p << a + s, upper(a + s);
      } else if ((s -= width) < width) {
        p << a + s, lower(a + s);
      } else if ((s -= width) < hl) {
        p << a, lower(a) + s;
      } else {
        s -= hl;
        p << b, lower(b) + std::min(s, hr);
      }
      out.push_back(p);
    }
    return out;
  }

  // Vertical geodesics sigma_x are coordinate lines of the Fermi chart, so the
  // slice lengths are |f_-(x)| and f_+(x).
  std::vector<SliceRecord> slice_profile(const std::vector<double>& xs) const {
    const auto [a, b] = x_range();
    std::vector<SliceRecord> out;
    for (double x : xs) {
      if (!(x > a && x < b)) fail(ErrorCode::slice_outside_domain, "slice x = " + std::to_string(x));
      out.push_back({x, -lower(x), upper(x)});
    }
    return out;
  }

 private:
  std::shared_ptr<const NeckFamily2D> fam_;
  double t_;
};

inline ConvexDomain2D build_domain_2d(const MetricSpec& s, double r, double L, double t, double tube_radius) {
  return ConvexDomain2D(make_family_2d(s, r, L, tube_radius), t);
}

// Rectangle {x0 <= x <= x1, |y| <= half_height} in Fermi coordinates.
struct Wectangle {
  double x0 = 0, x1 = 0, half_height = 0;
  bool mirrored = false;
};

inline Wectangle contained_wectangle(const ConvexDomain2D& d, double delta) {
  const double L = d.L(), r = d.r();
  Wectangle W;
  W.mirrored = d.t() < L / 2;
  W.x0 = W.mirrored ? -L / 2 : L / 4;
  W.x1 = W.mirrored ? -L / 4 : L / 2;
  W.half_height = (1 - 2 * delta) * r * std::cosh(L / 4);
  const auto [a, b] = d.x_range();
  if (W.x0 < a - 1e-12 || W.x1 > b + 1e-12) fail(ErrorCode::containment_violated, "wectangle leaves the x-range");
  for (int i = 0; i <= 400; ++i) {
    const double x = W.x0 + (W.x1 - W.x0) * i / 400;
    if (W.half_height > d.upper(x) || -W.half_height < d.lower(x))
      fail(ErrorCode::containment_violated, "wectangle pokes out at x = " + std::to_string(x));
  }
  return W;
}

// Principal eigenvalue bound pi^2 / (4 (1-delta)^2 r^2 cosh(L/2)) as printed.
inline double lambda1_upper_bound(double r, double L, double delta) {
  return kPi * kPi / (4 * (1 - delta) * (1 - delta) * r * r * std::cosh(L / 2));
}

// ---------------------------------------------------------------- 3D

// Depth-to-height ratio: smallest rho on a 1.05 geometric grid with
// pi^2/cosh^2(K2 x) + 4 pi^2/(rho^2 cos^2(K x)) concave on [-L0, L0] and rho > 2K/|K2|.
struct RhoChoice {
  double rho = 0;
  double lower_bound = 0;  // 2K/|K2|
  double K = 0, K2 = 0;
  double max_second_difference = 0;
};

inline RhoChoice choose_rho(double K, double K2, double L0) {
  if (!(K2 < 0)) fail(ErrorCode::no_admissible_rho, "no negatively curved direction (K2 >= 0)");
  require(K > 0 && L0 > 0, ErrorCode::invalid_argument, "choose_rho needs K > 0 and L0 > 0");
  RhoChoice c;
  c.K = K;
  c.K2 = K2;
  c.lower_bound = 2 * K / std::abs(K2);
  const int n = 1000;
  const double hx = 2 * L0 / (n - 1);
  auto f = [&](double x, double rho) {
    const double ch = std::cosh(K2 * x), co = std::cos(K * x);
    return kPi * kPi / (ch * ch) + 4 * kPi * kPi / (rho * rho * co * co);
  };
  auto concave = [&](double rho, double& worst) {
    worst = -1e300;
    for (int i = 1; i + 1 < n; ++i) {
      const double x = -L0 + hx * i;
      const double d2 = f(x - hx, rho) - 2 * f(x, rho) + f(x + hx, rho);
      worst = std::max(worst, d2);
    }
    return worst <= 0;
  };
  for (double rho = 1.0; rho <= 1e4; rho *= 1.05) {
    double worst;
    if (rho > c.lower_bound && concave(rho, worst)) {
      c.rho = rho;
      c.max_second_difference = worst;
      return c;
    }
  }
  fail(ErrorCode::no_admissible_rho, "concavity grid exhausted at rho = 1e4");
}

// Bilinearly interpolated grid of chart points P(u, v), (u, v) in [0,1]^2.
struct FaceGrid {
  int n = 0;  // (n+1) x (n+1) nodes
  std::vector<Vec> pts;

  const Vec& at(int i, int j) const { return pts[std::size_t(i * (n + 1) + j)]; }
  Vec& at(int i, int j) { return pts[std::size_t(i * (n + 1) + j)]; }
  Vec eval(double u, double v) const {
    const double su = std::clamp(u, 0.0, 1.0) * n, sv = std::clamp(v, 0.0, 1.0) * n;
    const int i = std::min(n - 1, int(su)), j = std::min(n - 1, int(sv));
    const double a = su - i, b = sv - j;
    return (1 - a) * (1 - b) * at(i, j) + a * (1 - b) * at(i + 1, j) + (1 - a) * b * at(i, j + 1) +
           a * b * at(i + 1, j + 1);
  }
  // Solves coordinate c(u, v) = target for u at fixed v (c is monotone in u).
  double solve_u(int c, double target, double v) const {
    double lo = 0, hi = 1;
    const bool inc = eval(1, v)[c] >= eval(0, v)[c];
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      ((eval(mid, v)[c] < target) == inc ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  // Solves (c1, c2)(u, v) = (t1, t2) by alternating monotone solves.
  std::pair<double, double> invert(int c1, double t1, int c2, double t2) const {
    double u = 0.5, v = 0.5;
    for (int it = 0; it < 40; ++it) {
      const double un = solve_u(c1, t1, v);
      double lo = 0, hi = 1;
      const bool inc = eval(un, 1)[c2] >= eval(un, 0)[c2];
      for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        ((eval(un, mid)[c2] < t2) == inc ? lo : hi) = mid;
      }
      const double vn = 0.5 * (lo + hi);
      const bool done = std::abs(un - u) < 1e-13 && std::abs(vn - v) < 1e-13;
      u = un;
      v = vn;
      if (done) break;
    }
    return {u, v};
  }
};

// Cross-section at fixed x: four boundary curves in (y, z) joined by a Coons patch.
struct CrossSection {
  double x = 0;
  std::vector<Eigen::Vector2d> bottom, top, back, front;  // each m+1 samples

  Eigen::Vector2d eval(double s, double t) const {
    auto curve = [](const std::vector<Eigen::Vector2d>& c, double q) {
      const int m = int(c.size()) - 1;
      const double sq = std::clamp(q, 0.0, 1.0) * m;
      const int i = std::min(m - 1, int(sq));
      const double a = sq - i;
      return Eigen::Vector2d((1 - a) * c[std::size_t(i)] + a * c[std::size_t(i + 1)]);
    };
    const Eigen::Vector2d B = curve(bottom, s), T = curve(top, s), Lc = curve(back, t), R = curve(front, t);
    const Eigen::Vector2d b0 = bottom.front(), b1 = bottom.back(), t0 = top.front(), t1 = top.back();
    return (1 - t) * B + t * T + (1 - s) * Lc + s * R -
           ((1 - s) * (1 - t) * b0 + s * (1 - t) * b1 + (1 - s) * t * t0 + s * t * t1);
  }
};

struct HullQuality {
  int level = 0;
  double hausdorff_increment = 0;  // last refinement step, chart units
  double closure_defect = 0;       // max excess of cross rulings over the faces
};

// Geodesic hull of the eight points (-L, +-alpha r, +-rho r), (L, +-r, +-rho r).
class ConvexDomain3D : public Domain {
 public:
  enum Face { top = 0, bottom, front, back };

  int dim() const override { return 3; }
  const MetricSpec& metric() const override { return s_; }
  double scale() const override { return r_; }
  std::pair<double, double> x_range() const override { return {-L_, L_}; }
  double r() const { return r_; }
  double rho() const { return rho_; }
  double alpha() const { return alpha_; }
  double L() const { return L_; }
  const HullQuality& quality() const { return q_; }
  const FaceGrid& face(Face f) const { return faces_[f]; }
  Vec vertex(int sx, int sy, int sz) const {
    Vec p(3);
    p << (sx ? L_ : -L_), (sy ? 1 : -1) * (sx ? 1.0 : alpha_) * r_, (sz ? 1 : -1) * rho_ * r_;
    return p;
  }

  // Top and bottom faces are parametrised by (x, z); front and back by (x, y).
  double height(double x, double z) const { return face_value(top, x, z); }
  double floor(double x, double z) const { return face_value(bottom, x, z); }
  double depth_front(double x, double y) const { return face_value(front, x, y); }
  double depth_back(double x, double y) const { return face_value(back, x, y); }

  bool contains(const Vec& p, double tol) const override {
    if (p[0] < -L_ - tol || p[0] > L_ + tol) return false;
    const double x = std::clamp(p[0], -L_, L_);
    const double z = std::clamp(p[2], depth_back(x, 0.0), depth_front(x, 0.0));
    const double y = std::clamp(p[1], floor(x, 0.0), height(x, 0.0));
    return p[1] <= height(x, z) + tol && p[1] >= floor(x, z) - tol && p[2] <= depth_front(x, y) + tol &&
           p[2] >= depth_back(x, y) - tol;
  }

  std::vector<Vec> boundary_samples(std::size_t n, std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec> out;
    for (std::size_t i = 0; i < n; ++i) {
      const int f = int(u(rng) * 6) % 6;
      const double a = u(rng), b = u(rng);
      if (f < 4) {
        out.push_back(faces_[f].eval(a, b));
      } else {
        const auto cs = cross_section(f == 4 ? -L_ : L_, 16);
        const Eigen::Vector2d yz = cs.eval(a, b);
        Vec p(3);
        p << cs.x, yz[0], yz[1];
        out.push_back(p);
      }
    }
    return out;
  }

  CrossSection cross_section(double x, int m) const {
    CrossSection cs;
    cs.x = std::clamp(x, -L_, L_);
    auto sample = [&](Face f, std::vector<Eigen::Vector2d>& out) {
      for (int k = 0; k <= m; ++k) {
        const double v = double(k) / m;
        const double u = faces_[f].solve_u(0, cs.x, v);
        const Vec p = faces_[f].eval(u, v);
        out.emplace_back(p[1], p[2]);
      }
    };
    sample(bottom, cs.bottom);
    sample(top, cs.top);
    sample(back, cs.back);
    sample(front, cs.front);
    return cs;
  }

  friend ConvexDomain3D build_domain_3d(const MetricSpec& s, double r, double rho, double alpha, double L,
                                        const LengthGate& gate, int max_level);

 private:
  double face_value(Face f, double a, double b) const {
    // top/bottom: (x, z) -> y ; front/back: (x, y) -> z
    const int c2 = (f == top || f == bottom) ? 2 : 1, out = (f == top || f == bottom) ? 1 : 2;
    const auto [u, v] = faces_[f].invert(0, a, c2, b);
    return faces_[f].eval(u, v)[out];
  }

  MetricSpec s_;
  double r_ = 0, rho_ = 0, alpha_ = 1, L_ = 0;
  std::array<FaceGrid, 4> faces_;
  HullQuality q_;
};

namespace detail {
// Points at fractions k/n along the geodesic from p to q.
inline std::vector<Vec> geodesic_samples(const MetricSpec& s, const Vec& p, const Vec& q, int n) {
  std::vector<Vec> out(std::size_t(n + 1));
  if ((p - q).norm() == 0) {
    std::fill(out.begin(), out.end(), p);
    return out;
  }
  const auto c = connect(s, p, q);
  for (int k = 0; k <= n; ++k) out[std::size_t(k)] = c.geodesic.point(c.distance * k / n);
  out.front() = p;
  out.back() = q;
  return out;
}

// Ruled face: geodesics from edge a(u) to edge b(u), both given as n+1 samples.
inline FaceGrid ruled_face(const MetricSpec& s, const std::vector<Vec>& ea, const std::vector<Vec>& eb, int n) {
  FaceGrid F;
  F.n = n;
  F.pts.resize(std::size_t((n + 1) * (n + 1)));
  for (int i = 0; i <= n; ++i) {
    const auto g = geodesic_samples(s, ea[std::size_t(i)], eb[std::size_t(i)], n);
    for (int j = 0; j <= n; ++j) F.at(i, j) = g[std::size_t(j)];
  }
  return F;
}
}  // namespace detail

inline ConvexDomain3D build_domain_3d(const MetricSpec& s, double r, double rho, double alpha, double L,
                                      const LengthGate& gate, int max_level = 6) {
  require(s.dim == 3, ErrorCode::invalid_argument, "hull domains need a 3-manifold");
  if (!gate.passes()) fail(ErrorCode::gate_failed, "length gate does not hold");
  if (!(alpha >= 10.0 / 11.0 - 1e-12 && alpha <= 11.0 / 10.0 + 1e-12))
    fail(ErrorCode::invalid_argument, "alpha must lie in [10/11, 11/10]");
  require(r > 0 && rho > 0 && L > 0, ErrorCode::invalid_argument, "hull needs r, rho, L > 0");
  ConvexDomain3D D;
  D.s_ = s;
  D.r_ = r;
  D.rho_ = rho;
  D.alpha_ = alpha;
  D.L_ = L;
  const double tol = r * 1e-3;

  auto build = [&](int n) {
    // Lateral edges run from x = -L to x = L at fixed (sy, sz) corner.
    std::map<std::pair<int, int>, std::vector<Vec>> edge;
    for (int sy = 0; sy < 2; ++sy)
      for (int sz = 0; sz < 2; ++sz)
        edge[{sy, sz}] = detail::geodesic_samples(s, D.vertex(0, sy, sz), D.vertex(1, sy, sz), n);
    std::array<FaceGrid, 4> F;
    F[ConvexDomain3D::top] = detail::ruled_face(s, edge[{1, 0}], edge[{1, 1}], n);
    F[ConvexDomain3D::bottom] = detail::ruled_face(s, edge[{0, 0}], edge[{0, 1}], n);
    F[ConvexDomain3D::front] = detail::ruled_face(s, edge[{0, 1}], edge[{1, 1}], n);
    F[ConvexDomain3D::back] = detail::ruled_face(s, edge[{0, 0}], edge[{1, 0}], n);
    return F;
  };

  int n = 2;
  auto F = build(n);
  double inc = 1e300;
  int level = 1;
  while (inc >= tol) {
    if (level >= max_level) fail(ErrorCode::closure_diverged, "hull refinement did not settle");
    const auto G = build(2 * n);
    inc = 0;
    for (int f = 0; f < 4; ++f)
      for (int i = 0; i <= 2 * n; ++i)
        for (int j = 0; j <= 2 * n; ++j) {
          const Vec coarse = F[std::size_t(f)].eval(double(i) / (2 * n), double(j) / (2 * n));
          inc = std::max(inc, (G[std::size_t(f)].at(i, j) - coarse).norm());
        }
    F = G;
    n *= 2;
    ++level;
  }
  D.faces_ = F;
  D.q_.level = level;
  D.q_.hausdorff_increment = inc;

  // Closure: geodesics along the other ruling (fixed v, across x) must not
  // leave the faces. Their excess measures how far the ruled faces are from
  // the geodesic hull.
  double defect = 0;
  for (int f = 0; f < 4; ++f) {
    const auto& G = D.faces_[std::size_t(f)];
    const bool tb = f == ConvexDomain3D::top || f == ConvexDomain3D::bottom;
    const double sign = (f == ConvexDomain3D::top || f == ConvexDomain3D::front) ? 1.0 : -1.0;
    for (int j = 1; j < G.n; j += std::max(1, G.n / 4)) {
      for (int i0 : {0, G.n / 4})
        for (int i1 : {G.n, 3 * G.n / 4}) {
          const auto g = detail::geodesic_samples(s, G.at(i0, j), G.at(i1, j), 16);
          for (const Vec& p : g) {
            const double face = tb ? D.face_value(ConvexDomain3D::Face(f), p[0], p[2])
                                   : D.face_value(ConvexDomain3D::Face(f), p[0], p[1]);
            defect = std::max(defect, sign * ((tb ? p[1] : p[2]) - face));
          }
        }
    }
  }
  D.q_.closure_defect = defect;
  return D;
}

struct HeightSandwich {
  double worst_below = 0;  // max (j_* r - H), positive means violation
  double worst_above = 0;  // max (H - j^* r)
  std::size_t samples = 0;
  bool holds(double tol) const { return worst_below <= tol && worst_above <= tol; }
};

struct NeckProfile {
  Barrier upper, lower;      // convex barriers through the end heights (normalised by r)
  double bound = 0;          // neck bound B = min upper
  double neck_center = 0;    // argmin of the upper barrier
  double neck_lo = 0, neck_hi = 0;
  std::vector<std::pair<double, double>> bulk;  // at most two intervals
  double bulk_measure = 0;
  double ratio = 0;          // (B + (m - B)/4) / ((m + B)/2), m = max(1, alpha)
  HeightSandwich sandwich;
};

// Heights from the hull faces against barriers built from kappa_2(0).
inline NeckProfile height_and_neck(const ConvexDomain3D& D, double kappa2_0, int nx = 401, int nz = 9) {
  require(kappa2_0 <= 0, ErrorCode::invalid_argument, "neck profile needs kappa_2(0) <= 0");
  const double L = D.L(), a = D.alpha();
  NeckProfile P;
  P.upper = {BarrierKind::upper, -kappa2_0 / 2, -L, L, a, 1.0};
  P.lower = {BarrierKind::lower, -3 * kappa2_0 / 2, -L, L, a, 1.0};
  P.neck_center = P.upper.argmin();
  P.bound = P.upper.value(P.neck_center);
  const double m = std::max(1.0, a);
  const double neck_level = P.bound + std::max((1 - P.bound) / 4, (a - P.bound) / 4);
  const double bulk_level = std::max((1 + P.bound) / 2, (a + P.bound) / 2);
  P.ratio = (P.bound + (m - P.bound) / 4) / ((m + P.bound) / 2);

  P.neck_lo = L;
  P.neck_hi = -L;
  bool in_bulk = false;
  const double dx = 2 * L / (nx - 1);
  for (int i = 0; i < nx; ++i) {
    const double x = -L + dx * i;
    if (P.upper.value(x) < neck_level) {
      P.neck_lo = std::min(P.neck_lo, x);
      P.neck_hi = std::max(P.neck_hi, x);
    }
    const bool b = P.lower.value(x) > bulk_level;
    if (b && !in_bulk) P.bulk.push_back({x, x});
    if (b) P.bulk.back().second = x;
    in_bulk = b;
  }
  for (const auto& [lo, hi] : P.bulk) P.bulk_measure += hi - lo;
  if (P.neck_lo > P.neck_hi) P.neck_lo = P.neck_hi = P.neck_center;

  // Height sandwich over |z| <= rho r on the interior of the slab.
  const double r = D.r();
  for (int i = 1; i + 1 < nx; i += 4) {
    const double x = -L + dx * i;
    for (int k = 0; k < nz; ++k) {
      const double z = D.rho() * r * (-1 + 2.0 * k / (nz - 1)) * 0.999;
      const double H = D.height(x, z);
      P.sandwich.worst_below = std::max(P.sandwich.worst_below, P.lower.value(x) * r - H);
      P.sandwich.worst_above = std::max(P.sandwich.worst_above, H - P.upper.value(x) * r);
      ++P.sandwich.samples;
    }
  }
  if (P.bulk_measure <= 0) fail(ErrorCode::empty_bulk, "bulk is empty: parameters outside the flattening regime");
  return P;
}

// ---------------------------------------------------------------- audits

struct ConvexityReport {
  bool pass = false;
  double diameter = 0;
  std::size_t pairs = 0, samples_per_geodesic = 0;
  double worst_excursion = 0;
  Vec witness_p, witness_q;
};

// Boundary pairs joined by geodesics must stay inside within r * 1e-3.
inline ConvexityReport convexity_audit(const Domain& d, std::size_t pairs, std::uint64_t seed, unsigned workers = 1,
                                       bool throw_on_violation = true) {
  std::mt19937_64 rng(seed);
  const auto pts = d.boundary_samples(2 * pairs, rng);
  const double tol = d.scale() * 1e-3;
  const int ns = 32;
  std::vector<double> dist(pairs, 0), excursion(pairs, 0);
  parallel_for(pairs, workers, [&](std::size_t k) {
    const Vec& p = pts[2 * k];
    const Vec& q = pts[2 * k + 1];
    if ((p - q).norm() < 1e-14) return;
    const auto c = connect(d.metric(), p, q);
    dist[k] = c.distance;
    for (int i = 1; i < ns; ++i) {
      const Vec x = c.geodesic.point(c.distance * i / ns);
      if (!d.contains(x, tol)) {
        // Excursion size: smallest tolerance that admits the point.
        double lo = tol, hi = 1.0;
        while (!d.contains(x, hi) && hi < 1e6) hi *= 2;
        for (int it = 0; it < 40; ++it) {
          const double mid = 0.5 * (lo + hi);
          (d.contains(x, mid) ? hi : lo) = mid;
        }
        excursion[k] = std::max(excursion[k], hi);
      }
    }
  });
  ConvexityReport rep;
  rep.pairs = pairs;
  rep.samples_per_geodesic = ns;
  rep.pass = true;
  for (std::size_t k = 0; k < pairs; ++k) {
    rep.diameter = std::max(rep.diameter, dist[k]);
    if (excursion[k] > rep.worst_excursion) {
      rep.worst_excursion = excursion[k];
      rep.witness_p = pts[2 * k];
      rep.witness_q = pts[2 * k + 1];
      rep.pass = false;
    }
  }
  if (!rep.pass && throw_on_violation) {
    std::ostringstream os;
    os << "geodesic between (" << rep.witness_p.transpose() << ") and (" << rep.witness_q.transpose()
       << ") leaves the domain by " << rep.worst_excursion;
    fail(ErrorCode::convexity_violated, os.str());
  }
  return rep;
}

// Flat polygon domain (analytic benchmarks and negative controls).
class PolygonDomain : public Domain {
 public:
  PolygonDomain(std::vector<Eigen::Vector2d> poly, double scale) : poly_(std::move(poly)), scale_(scale) {
    s_ = MetricSpec::euclidean(2);
    double lo = 1e300, hi = -1e300;
    for (const auto& p : poly_) {
      lo = std::min(lo, p[0]);
      hi = std::max(hi, p[0]);
    }
    range_ = {lo, hi};
  }
  static PolygonDomain rectangle(double x0, double x1, double y0, double y1) {
    return PolygonDomain({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, std::min(x1 - x0, y1 - y0));
  }
  static PolygonDomain disk(double R, int n) {
    std::vector<Eigen::Vector2d> p;
    for (int i = 0; i < n; ++i) p.emplace_back(R * std::cos(2 * kPi * i / n), R * std::sin(2 * kPi * i / n));
    return PolygonDomain(p, R);
  }
  const std::vector<Eigen::Vector2d>& polygon() const { return poly_; }

  int dim() const override { return 2; }
  const MetricSpec& metric() const override { return s_; }
  double scale() const override { return scale_; }
  std::pair<double, double> x_range() const override { return range_; }
  bool contains(const Vec& p, double tol) const override {
    const Eigen::Vector2d q(p[0], p[1]);
    bool inside = false;
    const std::size_t n = poly_.size();
    double dmin = 1e300;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const auto &a = poly_[i], &b = poly_[j];
      if ((a[1] > q[1]) != (b[1] > q[1]) && q[0] < (b[0] - a[0]) * (q[1] - a[1]) / (b[1] - a[1]) + a[0])
        inside = !inside;
      const Eigen::Vector2d e = b - a;
      const double t = std::clamp((q - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
      dmin = std::min(dmin, (a + t * e - q).norm());
    }
    return inside || dmin <= tol;
  }
  std::vector<Vec> boundary_samples(std::size_t n, std::mt19937_64& rng) const override {
    std::vector<double> cum{0};
    for (std::size_t i = 0; i < poly_.size(); ++i)
      cum.push_back(cum.back() + (poly_[(i + 1) % poly_.size()] - poly_[i]).norm());
    std::uniform_real_distribution<double> u(0.0, cum.back());
    std::vector<Vec> out;
    for (std::size_t k = 0; k < n; ++k) {
      const double s = u(rng);
      const std::size_t i = std::size_t(std::upper_bound(cum.begin(), cum.end(), s) - cum.begin()) - 1;
      const double t = (s - cum[i]) / (cum[i + 1] - cum[i]);
      const Eigen::Vector2d p = (1 - t) * poly_[i] + t * poly_[(i + 1) % poly_.size()];
      Vec v(2);
      v << p[0], p[1];
      out.push_back(v);
    }
    return out;
  }

 private:
  std::vector<Eigen::Vector2d> poly_;
  double scale_;
  MetricSpec s_;
  std::pair<double, double> range_;
};

}  // namespace fgap
