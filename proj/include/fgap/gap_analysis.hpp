#pragma once

#include "fgap/eigensolver.hpp"

namespace fgap {

// ---------------------------------------------------------------------------
// Vertical slice profile V(x) = int g^{xx} h^2 dy (dz in 3D), h scaled to sup 1.

struct VerticalProfile {
  std::vector<double> x, V;
  std::vector<double> d2V;         // central second differences, NaN if the stencil leaves the mesh
  std::vector<double> stencil;     // half-width H used at each point
  double doubling_length = 0;      // ln 2 / max |d log V / dx|
};

namespace detail {
// Barycentric coordinates of p in cell c.
inline std::array<double, 4> barycentric(const Mesh& m, std::size_t c, const Vec& p) {
  const auto& C = m.cells[c];
  const int d = m.dim;
  Mat E(d, d);
  for (int k = 0; k < d; ++k) E.col(k) = m.verts[std::size_t(C[std::size_t(k + 1)])] - m.verts[std::size_t(C[0])];
  const Vec l = E.partialPivLu().solve(Vec(p - m.verts[std::size_t(C[0])]));
  std::array<double, 4> b{0, 0, 0, 0};
  b[0] = 1 - l.sum();
  for (int k = 0; k < d; ++k) b[std::size_t(k + 1)] = l[k];
  return b;
}

inline double interpolate(const Mesh& m, std::size_t c, const Eigen::VectorXd& h, const Vec& p) {
  const auto b = barycentric(m, c, p);
  double s = 0;
  for (int k = 0; k <= m.dim; ++k) s += b[std::size_t(k)] * h[m.cells[c][std::size_t(k)]];
  return s;
}

// Points where the plane x = c meets the cell (edge crossings and on-plane vertices).
inline std::vector<Vec> plane_section(const Mesh& m, std::size_t cell, double c) {
  const auto& C = m.cells[cell];
  const int np = m.dim + 1;
  std::vector<Vec> pts;
  auto add = [&](const Vec& p) {
    for (const auto& q : pts)
      if ((q - p).norm() < 1e-14 * (1 + p.norm())) return;
    pts.push_back(p);
  };
  for (int i = 0; i < np; ++i) {
    const Vec& a = m.verts[std::size_t(C[std::size_t(i)])];
    if (a[0] == c) add(a);
    for (int j = i + 1; j < np; ++j) {
      const Vec& b = m.verts[std::size_t(C[std::size_t(j)])];
      if ((a[0] - c) * (b[0] - c) < 0) add(a + (b - a) * ((c - a[0]) / (b[0] - a[0])));
    }
  }
  return pts;
}

inline double slice_integral(const Mesh& m, const Eigen::VectorXd& h, const MetricFn& metric, double c) {
  static const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  static const double gw[3] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
  double total = 0;
  bool hit = false;
  for (std::size_t cell = 0; cell < m.num_cells(); ++cell) {
    double lo = 1e300, hi = -1e300;
    for (int k = 0; k <= m.dim; ++k) {
      const double x = m.verts[std::size_t(m.cells[cell][std::size_t(k)])][0];
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    // Half-open so a slice along a mesh face is counted once.
    if (!(lo < c && c <= hi)) continue;
    hit = true;
    const auto pts = plane_section(m, cell, c);
    auto f = [&](const Vec& p) {
      const double v = interpolate(m, cell, h, p);
      return metric(p).g_inv(0, 0) * v * v;
    };
    if (m.dim == 2) {
      if (pts.size() < 2) continue;
      Vec a = pts[0], b = pts[0];
      for (const auto& p : pts) {
        if (p[1] < a[1]) a = p;
        if (p[1] > b[1]) b = p;
      }
      const double len = b[1] - a[1];
      for (int q = 0; q < 3; ++q) total += 0.5 * len * gw[q] * f(0.5 * (a + b) + 0.5 * gx[q] * (b - a));
    } else {
      if (pts.size() < 3) continue;
      Vec cen = Vec::Zero(3);
      for (const auto& p : pts) cen += p;
      cen /= double(pts.size());
      auto ang = [&](const Vec& p) { return std::atan2(p[2] - cen[2], p[1] - cen[1]); };
      auto ordered = pts;
      std::sort(ordered.begin(), ordered.end(), [&](const Vec& p, const Vec& q) { return ang(p) < ang(q); });
      const auto& rule = quadrature(2);
      for (std::size_t k = 1; k + 1 < ordered.size(); ++k) {
        const Vec &p0 = ordered[0], &p1 = ordered[k], &p2 = ordered[k + 1];
        const double area = 0.5 * std::abs((p1[1] - p0[1]) * (p2[2] - p0[2]) - (p1[2] - p0[2]) * (p2[1] - p0[1]));
        for (const auto& [bary, w] : rule) total += area * w * f(bary[0] * p0 + bary[1] * p1 + bary[2] * p2);
      }
    }
  }
  if (!hit) fail(ErrorCode::interpolation_outside_mesh, "slice x = " + std::to_string(c) + " meets no cell");
  return total;
}

// Widest x extent among cells meeting the closed band |x - center| <= v.
inline double band_spacing(const Mesh& m, double center, double v) {
  double w = 0;
  for (const auto& C : m.cells) {
    double lo = 1e300, hi = -1e300;
    for (int k = 0; k <= m.dim; ++k) {
      const double x = m.verts[std::size_t(C[std::size_t(k)])][0];
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    if (hi >= center - v && lo <= center + v) w = std::max(w, hi - lo);
  }
  return w;
}

inline double sup_abs(const Eigen::VectorXd& h) {
  const double s = h.cwiseAbs().maxCoeff();
  if (!(s > 0)) fail(ErrorCode::zero_function, "eigenfunction is identically zero");
  return s;
}

inline std::pair<double, double> x_extent(const Mesh& m) {
  double lo = 1e300, hi = -1e300;
  for (const auto& v : m.verts) {
    lo = std::min(lo, v[0]);
    hi = std::max(hi, v[0]);
  }
  return {lo, hi};
}
}  // namespace detail

// stencil <= 0 picks twice the widest cell meeting each slice.
inline VerticalProfile vertical_profile(const Mesh& m, const EigenPair& e, const MetricFn& metric,
                                        const std::vector<double>& xs, double stencil = 0) {
  const auto [lo, hi] = detail::x_extent(m);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > lo && xs[i] < hi))
      fail(ErrorCode::interpolation_outside_mesh,
           "slice x = " + std::to_string(xs[i]) + " outside the open mesh range");
    require(i == 0 || xs[i] > xs[i - 1], ErrorCode::invalid_argument, "profile grid must increase");
  }
  const Eigen::VectorXd h = e.h / detail::sup_abs(e.h);
  VerticalProfile P;
  P.x = xs;
  P.V.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) P.V[i] = detail::slice_integral(m, h, metric, xs[i]);
  // A P1 field gives V kinks at mesh faces, so the stencil spans two cells each side.
  P.d2V.assign(xs.size(), std::numeric_limits<double>::quiet_NaN());
  P.stencil.assign(xs.size(), stencil);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double H = stencil > 0 ? stencil : 2 * detail::band_spacing(m, xs[i], 0);
    P.stencil[i] = H;
    if (!(xs[i] - H > lo && xs[i] + H < hi)) continue;
    const double vm = detail::slice_integral(m, h, metric, xs[i] - H);
    const double vp = detail::slice_integral(m, h, metric, xs[i] + H);
    P.d2V[i] = (vp - 2 * P.V[i] + vm) / (H * H);
  }
  double slope = 0;
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (P.V[i] > 0 && P.V[i - 1] > 0)
      slope = std::max(slope, std::abs(std::log(P.V[i] / P.V[i - 1])) / (xs[i] - xs[i - 1]));
  P.doubling_length = slope > 0 ? std::log(2.0) / slope : std::numeric_limits<double>::infinity();
  return P;
}

// Uniform grid on [center - L/9, center + L/9].
inline std::vector<double> doubling_window(double center, double L, int n = 101) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) xs[std::size_t(i)] = center - L / 9 + 2 * (L / 9) * i / (n - 1);
  return xs;
}

// ---------------------------------------------------------------------------
// Doubling audit: d2V >= (C/r^2) V on |x - center| <= L/9.

struct DoublingAudit {
  bool pass = false;
  double C_hat = 0;         // largest C passing at every interior window point
  std::size_t points = 0;   // window points
  double log_slope_r = 0;   // r * max |d log V/dx| in the window
};

inline DoublingAudit doubling_audit(const VerticalProfile& P, double r, double L, double center = 0) {
  std::vector<std::size_t> win;
  for (std::size_t i = 0; i < P.x.size(); ++i)
    if (std::abs(P.x[i] - center) <= (L / 9) * (1 + 1e-12)) win.push_back(i);
  if (win.size() < 50)
    fail(ErrorCode::profile_too_coarse, "doubling audit needs >= 50 points in the window, got " + std::to_string(win.size()));
  DoublingAudit a;
  a.points = win.size();
  a.C_hat = std::numeric_limits<double>::infinity();
  for (std::size_t i : win) {
    if (std::isnan(P.d2V[i])) continue;
    if (!(P.V[i] > 0)) fail(ErrorCode::interpolation_outside_mesh, "V vanishes at an interior slice");
    a.C_hat = std::min(a.C_hat, r * r * P.d2V[i] / P.V[i]);
  }
  for (std::size_t k = 1; k < win.size(); ++k) {
    const std::size_t i = win[k - 1], j = win[k];
    a.log_slope_r = std::max(a.log_slope_r, r * std::abs(std::log(P.V[j] / P.V[i])) / (P.x[j] - P.x[i]));
  }
  a.pass = a.C_hat > 0;
  return a;
}

// Across an r sweep: every C_hat positive and the linear trend C_hat(r) stays
// positive when extrapolated to r = 0.
struct DoublingTrend {
  bool pass = false;
  double C_min = 0;
  double C_at_zero = 0;
};

inline DoublingTrend doubling_trend(const std::vector<double>& r, const std::vector<double>& C_hat) {
  require(r.size() == C_hat.size() && r.size() >= 2, ErrorCode::insufficient_sweep, "trend needs >= 2 r values");
  DoublingTrend t;
  t.C_min = *std::min_element(C_hat.begin(), C_hat.end());
  t.C_at_zero = fit_line(r, C_hat).intercept;
  t.pass = t.C_min > 0 && t.C_at_zero > 0;
  return t;
}

// ---------------------------------------------------------------------------
// Gradient estimate |grad h|_inf <= |h|_inf inf_t c(t) e^{lambda t}.

struct GradientBound {
  double value = 0;
  double t_opt = 0;
  double alpha0 = 0;
};

inline double gradient_c(double t, double alpha0) {
  const double q = 1 + std::pow(4.0, 2.0 / 3.0);
  return 9.5 * alpha0 +
         2 * std::sqrt(alpha0) * std::pow(q, 0.25) * (1 + 5 * std::pow(2.0, -1.0 / 3.0)) / std::pow(t * kPi, 0.25) +
         std::sqrt(1 + std::cbrt(2.0)) * q / (2 * std::sqrt(t * kPi));
}

inline GradientBound gradient_bound_constant(double lambda, double K, int n, double theta = 0) {
  require(lambda > 0 && K >= 0 && n >= 2, ErrorCode::invalid_argument, "gradient bound needs lambda > 0, K >= 0, n >= 2");
  GradientBound g;
  g.alpha0 = 0.5 * std::max(theta, std::sqrt((n - 1) * K));
  auto f = [&](double lt) {
    const double t = std::exp(lt);
    return std::log(gradient_c(t, g.alpha0)) + lambda * t;
  };
  // Log grid over four decades either side of 1/lambda, then golden section.
  const double c0 = -std::log(lambda);
  double best = c0, fb = f(c0);
  const int N = 400;
  for (int i = 0; i <= N; ++i) {
    const double lt = c0 - 9.2 + 18.4 * i / N;
    const double v = f(lt);
    if (v < fb) { fb = v; best = lt; }
  }
  double a = best - 18.4 / N, b = best + 18.4 / N;
  const double gr = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 80; ++it) {
    const double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    if (f(x1) < f(x2)) b = x2; else a = x1;
  }
  const double lt = 0.5 * (a + b);
  if (f(lt) < fb) best = lt;
  g.t_opt = std::exp(best);
  g.value = gradient_c(g.t_opt, g.alpha0) * std::exp(lambda * g.t_opt);
  return g;
}

// max over cells of |grad h|_g / max |h| for a P1 vertex function.
inline double max_gradient_ratio(const Mesh& m, const Eigen::VectorXd& h, const MetricFn& metric) {
  const int d = m.dim;
  double worst = 0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto& C = m.cells[c];
    Mat E(d, d);
    Vec dh(d);
    for (int k = 0; k < d; ++k) {
      E.row(k) = (m.verts[std::size_t(C[std::size_t(k + 1)])] - m.verts[std::size_t(C[0])]).transpose();
      dh[k] = h[C[std::size_t(k + 1)]] - h[C[0]];
    }
    const Vec grad = E.partialPivLu().solve(dh);
    const Vec gi = metric(m.centroid(c)).g_inv * grad;
    worst = std::max(worst, std::sqrt(std::max(0.0, grad.dot(gi))));
  }
  return worst / detail::sup_abs(h);
}

// ---------------------------------------------------------------------------
// Neck suppression: log sup_N h vs 1/r.

struct NeckSup {
  double sup = 0;       // sup over |x - center| < halfwidth, h scaled to sup 1
  double argmax_x = 0;  // x of the global maximum
};

inline NeckSup neck_sup(const Mesh& m, const Eigen::VectorXd& h, double center, double halfwidth) {
  const double s = detail::sup_abs(h);
  NeckSup n;
  Eigen::Index at;
  h.cwiseAbs().maxCoeff(&at);
  n.argmax_x = m.verts[std::size_t(at)][0];
  for (std::size_t v = 0; v < m.num_vertices(); ++v)
    if (std::abs(m.verts[v][0] - center) < halfwidth) n.sup = std::max(n.sup, std::abs(h[Eigen::Index(v)]) / s);
  return n;
}

struct ExpFit {
  double c = 0;       // decay rate, log y = log C - c / r
  double C = 0;
  double r2 = 0;
  double drop = 0;    // fitted decrease of log y across the sweep
};

namespace detail {
inline ExpFit exp_fit(const std::vector<double>& r, const std::vector<double>& y) {
  std::vector<double> u, ly;
  for (std::size_t i = 0; i < r.size(); ++i) {
    require(y[i] > 0, ErrorCode::invalid_argument, "exponential fit needs positive data");
    u.push_back(1 / r[i]);
    ly.push_back(std::log(y[i]));
  }
  const LineFit f = fit_line(u, ly);
  ExpFit e;
  e.c = -f.slope;
  e.C = std::exp(f.intercept);
  e.r2 = f.r2;
  const auto [umin, umax] = std::minmax_element(u.begin(), u.end());
  e.drop = e.c * (*umax - *umin);
  return e;
}
}  // namespace detail

// A decay counts only if the fitted drop across the sweep exceeds ln 2.
inline ExpFit neck_suppression(const std::vector<double>& r, const std::vector<double>& sup_neck) {
  if (r.size() < 4 || sup_neck.size() != r.size())
    fail(ErrorCode::insufficient_sweep, "neck suppression needs >= 4 r values");
  std::vector<double> y;
  for (double s : sup_neck) y.push_back(std::max(s, 1e-300));
  const ExpFit f = detail::exp_fit(r, y);
  if (!(f.c > 0) || f.drop < std::log(2.0)) {
    std::ostringstream os;
    os << "no decay of sup_N h (fitted c = " << f.c << ", drop " << f.drop << ")";
    fail(ErrorCode::positive_slope, os.str());
  }
  return f;
}

// ---------------------------------------------------------------------------
// Odd cutoff through the neck: integrated (1 - u^2)^2 bump, |psi'| <= 1.875 / v.

struct CutoffFn {
  double center = 0;
  double v = 0;            // effective transition half-width
  double v_nominal = 0;    // exp(-delta / r)
  double orientation = 1;  // +1: psi = +1 for x > center + v

  double operator()(double x) const {
    const double u = (x - center) / v;
    if (u >= 1) return orientation;
    if (u <= -1) return -orientation;
    const double s = (15.0 / 8) * (u - 2 * u * u * u / 3 + u * u * u * u * u / 5);
    return orientation * std::clamp(s, -1.0, 1.0);
  }
  double derivative(double x) const {
    const double u = (x - center) / v;
    if (std::abs(u) >= 1) return 0;
    return orientation * (15.0 / 8) * (1 - u * u) * (1 - u * u) / v;
  }
  double max_slope() const { return 15.0 / (8 * v); }
};

inline CutoffFn cutoff(double center, double r, double delta, double orientation = 1, double min_width = 0,
                       double fitted_c = std::numeric_limits<double>::quiet_NaN()) {
  require(r > 0 && delta > 0, ErrorCode::invalid_argument, "cutoff needs r > 0 and delta > 0");
  if (!std::isnan(fitted_c) && !(delta < fitted_c)) {
    std::ostringstream os;
    os << "delta = " << delta << " is not below the fitted decay rate c = " << fitted_c;
    fail(ErrorCode::delta_too_large, os.str());
  }
  CutoffFn f;
  f.center = center;
  f.v_nominal = std::exp(-delta / r);
  f.v = std::max(f.v_nominal, min_width);
  f.orientation = orientation >= 0 ? 1 : -1;
  return f;
}


// Cutoff whose transition spans at least 8 mesh layers: v = max(exp(-delta/r), 4 dx_band).
inline CutoffFn resolved_cutoff(const Mesh& m, double center, double r, double delta, double orientation = 1,
                                double fitted_c = std::numeric_limits<double>::quiet_NaN()) {
  CutoffFn f = cutoff(center, r, delta, orientation, 0, fitted_c);
  for (int it = 0; it < 100; ++it) {
    const double v = std::max(f.v_nominal, 4 * detail::band_spacing(m, center, f.v));
    if (v <= f.v) break;
    f.v = v;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Ansatz psi h: terms I and II, orthogonality defect F and the certified gap bound.

struct AnsatzReport {
  double v = 0;
  double layers = 0;            // 2v / widest transition cell
  std::size_t transition_cells = 0;
  double A = 0, B = 0;          // outside the transition band
  double N_h2 = 0, N_psih2 = 0, N_grad_h2 = 0, N_grad_psih2 = 0;
  double I = 0, II = 0;
  double h_norm2 = 0, psih_norm2 = 0;
  double F = 0, F_rel = 0;      // F / |h|^2
  double R_h = 0, R_psih = 0;   // Rayleigh quotients
  double gap_bound = 0;         // R[psi h - (F/|h|^2) h] - R[h]
  double R_orth = 0;
  double coupling = 0;          // |w^T (A - lambda M) h| / (|w| |h|): residual floor of the bound
  double B_over_r2 = 0;
};

inline std::vector<double> nodal_cutoff(const Mesh& m, const CutoffFn& psi) {
  std::vector<double> p(m.num_vertices());
  for (std::size_t v = 0; v < m.num_vertices(); ++v) p[v] = psi(m.verts[v][0]);
  return p;
}

inline double ansatz_F_rel(const DiscreteForms& F, const Eigen::VectorXd& h, const CutoffFn& psi) {
  const auto p = nodal_cutoff(*F.mesh, psi);
  Eigen::VectorXd w = h;
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] *= p[std::size_t(i)];
  const Eigen::VectorXd u = F.to_reduced(h), uw = F.to_reduced(w);
  return u.dot(F.M * uw) / u.dot(F.M * u);
}

inline AnsatzReport ansatz_report(const DiscreteForms& F, const EigenPair& e, const CutoffFn& psi, double r) {
  const Mesh& m = *F.mesh;
  const Eigen::VectorXd h = e.h / detail::sup_abs(e.h);
  const auto p = nodal_cutoff(m, psi);
  Eigen::VectorXd w = h;
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] *= p[std::size_t(i)];

  AnsatzReport R;
  R.v = psi.v;
  const Eigen::VectorXd uh = F.to_reduced(h), uw = F.to_reduced(w);
  const Eigen::VectorXd Mh = F.M * uh;
  R.h_norm2 = uh.dot(Mh);
  const double ah = uh.dot(F.A * uh);
  const double lambda = ah / R.h_norm2;
  R.R_h = lambda;
  R.F = uw.dot(Mh);
  R.F_rel = R.F / R.h_norm2;

  // Cells where w differs from +-h carry all of E(w) = w^T (A - lambda M) w,
  // since E(h) = 0 exactly at the Rayleigh quotient.
  double dm = 0, da = 0, ET = 0, width = 0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto& C = m.cells[c];
    const double p0 = p[std::size_t(C[0])];
    bool uniform = std::abs(p0) == 1;
    double lo = 1e300, hi = -1e300;
    for (int k = 0; k <= m.dim; ++k) {
      const std::size_t v = std::size_t(C[std::size_t(k)]);
      uniform = uniform && p[v] == p0;
      lo = std::min(lo, m.verts[v][0]);
      hi = std::max(hi, m.verts[v][0]);
    }
    if (uniform) continue;
    ++R.transition_cells;
    width = std::max(width, hi - lo);
    const double mh = F.cell_mass(c, h), mw = F.cell_mass(c, w);
    const double sh = F.cell_stiffness(c, h), sw = F.cell_stiffness(c, w);
    R.N_h2 += mh;
    R.N_psih2 += mw;
    R.N_grad_h2 += sh;
    R.N_grad_psih2 += sw;
    dm += mh - mw;
    da += sw - sh;
    ET += F.cell_energy(c, w, lambda) - F.cell_energy(c, h, lambda);
  }
  R.layers = width > 0 ? 2 * psi.v / width : std::numeric_limits<double>::infinity();
  if (R.layers < 8 * (1 - 1e-9)) {
    std::ostringstream os;
    os << "cutoff band of half-width " << psi.v << " spans " << R.layers << " mesh layers (< 8)";
    fail(ErrorCode::neck_not_resolved, os.str());
  }
  R.psih_norm2 = R.h_norm2 - dm;
  R.A = ah - R.N_grad_h2;
  R.B = R.h_norm2 - R.N_h2;
  const double den = R.h_norm2 * R.psih_norm2;
  R.I = std::abs(R.A * dm) / den;
  R.II = std::abs(R.B * da) / den;
  R.R_psih = lambda + ET / R.psih_norm2;
  const double orth = R.psih_norm2 - R.F * R.F / R.h_norm2;
  R.gap_bound = orth > 1e-12 * R.psih_norm2 ? ET / orth : std::numeric_limits<double>::infinity();
  R.R_orth = lambda + R.gap_bound;
  const Eigen::VectorXd res = F.A * uh - lambda * Mh;
  R.coupling = std::abs(uw.dot(res)) / std::sqrt(R.psih_norm2 * R.h_norm2);
  R.B_over_r2 = R.B / (r * r);
  return R;
}

// Inside a numerically degenerate ground cluster every unit vector of the span
// is an eigenvector at solver tolerance. If F takes both signs on the span, the
// first pair is replaced by a span vector with F = 0. Returns true if it did.
inline bool balance_cluster(const DiscreteForms& F, EigenResult& res, const CutoffFn& psi) {
  const int c = res.ground_cluster;
  if (c < 2) return false;
  const auto p = nodal_cutoff(*F.mesh, psi);
  const auto n = Eigen::Index(F.num_dofs());
  Eigen::MatrixXd U(n, c), W(n, c);
  for (int j = 0; j < c; ++j) {
    const Eigen::VectorXd& h = res.pairs[std::size_t(j)].h;
    Eigen::VectorXd w = h;
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] *= p[std::size_t(i)];
    U.col(j) = F.to_reduced(h);
    W.col(j) = F.to_reduced(w);
  }
  Eigen::MatrixXd Q = U.transpose() * (F.M * W);
  Q = 0.5 * (Q + Q.transpose()).eval();
  Eigen::MatrixXd G = U.transpose() * (F.M * U);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, G);
  const double mu1 = es.eigenvalues()[0], mu2 = es.eigenvalues()[c - 1];
  if (!(mu1 < 0 && mu2 > 0)) return false;
  // Two span vectors have F = 0; keep the one closest to a positive function.
  const Eigen::VectorXd a = std::sqrt(mu2 / (mu2 - mu1)) * es.eigenvectors().col(0);
  const Eigen::VectorXd b = std::sqrt(-mu1 / (mu2 - mu1)) * es.eigenvectors().col(c - 1);
  const Eigen::VectorXd mass = U.transpose() * (F.M * Eigen::VectorXd::Ones(n));
  const Eigen::VectorXd coef = std::abs(mass.dot(a + b)) >= std::abs(mass.dot(a - b)) ? Eigen::VectorXd(a + b)
                                                                                      : Eigen::VectorXd(a - b);
  Eigen::VectorXd u = U * coef;
  u /= std::sqrt(u.dot(F.M * u));
  EigenPair& e = res.pairs[0];
  e.h = F.to_full(u);
  Eigen::Index at;
  e.h.cwiseAbs().maxCoeff(&at);
  if (e.h[at] < 0) e.h = -e.h;
  e.residual = detail::rel_residual(F.A, F.M, u, e.lambda);
  return true;
}

// ---------------------------------------------------------------------------
// Continuity root of F along a one-parameter family.

struct ScanPoint {
  double p = 0;
  double F_rel = 0;
};

struct ContinuityResult {
  double root = 0;
  double F_rel = 0;
  int evaluations = 0;
  double lipschitz = 0;  // max |dF/dp| between neighbouring evaluations
  bool monotone = true;  // F_rel nondecreasing (or nonincreasing) in p over the table
  std::vector<ScanPoint> table;  // sorted by p
};

inline ContinuityResult continuity_scan(const std::function<double(double)>& F_of, double lo, double hi,
                                        double tol = 1e-3, int max_bisections = 60) {
  require(lo < hi, ErrorCode::invalid_argument, "continuity scan needs lo < hi");
  ContinuityResult R;
  auto eval = [&](double p) {
    const double f = F_of(p);
    R.table.push_back({p, f});
    ++R.evaluations;
    return f;
  };
  auto finish = [&](double p, double f) {
    R.root = p;
    R.F_rel = f;
    std::sort(R.table.begin(), R.table.end(), [](const ScanPoint& a, const ScanPoint& b) { return a.p < b.p; });
    int dir = 0;
    for (std::size_t i = 1; i < R.table.size(); ++i) {
      const double df = R.table[i].F_rel - R.table[i - 1].F_rel;
      R.lipschitz = std::max(R.lipschitz, std::abs(df) / (R.table[i].p - R.table[i - 1].p));
      // Plateaus at +-1 carry roundoff jitter.
      const int s = std::abs(df) <= 1e-9 ? 0 : (df > 0) - (df < 0);
      if (s != 0 && dir != 0 && s != dir) R.monotone = false;
      if (s != 0) dir = s;
    }
    return R;
  };
  double flo = eval(lo), fhi = eval(hi);
  if (std::abs(flo) < tol) return finish(lo, flo);
  if (std::abs(fhi) < tol) return finish(hi, fhi);
  if (flo * fhi > 0) {
    std::ostringstream os;
    os << "F has the same sign at both ends: F(" << lo << ") = " << flo << ", F(" << hi << ") = " << fhi;
    fail(ErrorCode::no_sign_change, os.str());
  }
  for (int it = 0; it < max_bisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = eval(mid);
    if (std::abs(f) < tol) return finish(mid, f);
    if ((f < 0) == (flo < 0)) { lo = mid; flo = f; } else { hi = mid; fhi = f; }
  }
  std::ostringstream os;
  os << "bisection stalled at [" << lo << ", " << hi << "] with F = " << flo << ", " << fhi;
  fail(ErrorCode::no_convergence, os.str());
}

// ---------------------------------------------------------------------------
// Headline fit log(gap D^2) = log C - c / r.

inline ExpFit gap_decay_fit(const std::vector<double>& r, const std::vector<double>& gapD2) {
  if (r.size() < 4 || gapD2.size() != r.size())
    fail(ErrorCode::insufficient_data, "gap decay fit needs >= 4 r values");
  const ExpFit f = detail::exp_fit(r, gapD2);
  if (!(f.c > 0) || f.drop < std::log(2.0)) {
    std::ostringstream os;
    os << "gap does not decay (fitted c = " << f.c << ", drop " << f.drop << ")";
    fail(ErrorCode::non_decaying, os.str());
  }
  return f;
}

}  // namespace fgap
