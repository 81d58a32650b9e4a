#pragma once

#include "fgap/metric.hpp"
#include "fgap/ode.hpp"

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>

namespace fgap {

inline double g_norm(const MetricSpec& s, const ChartPoint& p, const Vec& v) {
  return std::sqrt(v.dot(metric_at(s, p).g * v));
}

namespace detail {

inline Vec head(const State& y, int off, int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = y[std::size_t(off + i)];
  return v;
}

// Geodesic flow plus `extra` vectors carried by parallel transport.
inline Rhs transport_rhs(const MetricSpec& s, int extra) {
  const int n = s.dim;
  return [s, n, extra](const State& y, State& dy, double) {
    const Vec p = head(y, 0, n), v = head(y, n, n);
    const Christoffel G = christoffel(s, p);
    for (int k = 0; k < n; ++k) {
      dy[std::size_t(k)] = v[k];
      dy[std::size_t(n + k)] = -v.dot(G[k] * v);
    }
    for (int e = 0; e < extra; ++e) {
      const int off = 2 * n + e * n;
      const Vec w = head(y, off, n);
      for (int k = 0; k < n; ++k) dy[std::size_t(off + k)] = -v.dot(G[k] * w);
    }
  };
}

inline Trajectory run_flow(const MetricSpec& s, const State& y0, double t1, int extra, const OdeOptions& opt,
                           const StopFn& stop = nullptr) {
  try {
    return integrate(transport_rhs(s, extra), y0, 0.0, t1, opt, stop);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::point_outside_chart) fail(ErrorCode::left_chart, e.what());
    throw;
  }
}

}  // namespace detail

// Unit-speed geodesic through `p0` at s = 0, integrated on [s_min, s_max].
struct Geodesic {
  MetricSpec metric;
  Vec p0, v0;
  double s_min = 0, s_max = 0;
  Trajectory fwd, bwd;  // s >= 0 and s <= 0 halves
  int extra = 0;        // transported vectors carried in the state

  int dim() const { return metric.dim; }
  const Trajectory& half(double s) const { return s >= 0 ? fwd : bwd; }

  State state(double s) const {
    s = std::clamp(s, s_min, s_max);
    return half(s).at(s);
  }
  Vec point(double s) const { return detail::head(state(s), 0, dim()); }
  Vec velocity(double s) const { return detail::head(state(s), dim(), dim()); }
  Vec carried(double s, int e) const { return detail::head(state(s), 2 * dim() + e * dim(), dim()); }

  // Max deviation of |velocity|_g from 1 over all stored nodes.
  double speed_drift() const {
    double d = 0;
    for (const Trajectory* tr : {&fwd, &bwd})
      for (const auto& y : tr->y) {
        const Vec p = detail::head(y, 0, dim()), v = detail::head(y, dim(), dim());
        d = std::max(d, std::abs(g_norm(metric, p, v) - 1.0));
      }
    return d;
  }
  double length() const { return s_max - s_min; }
};

inline Geodesic shoot_span(const MetricSpec& s, const Vec& p, const Vec& v, double s_min, double s_max,
                           const std::vector<Vec>& carried = {}, const OdeOptions& opt = {}) {
  require(p.size() == s.dim && v.size() == s.dim, ErrorCode::invalid_argument, "dimension mismatch");
  check_in_chart(s, p);
  const double speed = g_norm(s, p, v);
  if (std::abs(speed - 1.0) > 1e-10) fail(ErrorCode::bad_initial_speed, "|v|_g = " + std::to_string(speed));
  Geodesic g;
  g.metric = s;
  g.p0 = p;
  g.v0 = v;
  g.s_min = s_min;
  g.s_max = s_max;
  g.extra = int(carried.size());
  State y0(std::size_t(2 * s.dim + g.extra * s.dim));
  for (int i = 0; i < s.dim; ++i) {
    y0[std::size_t(i)] = p[i];
    y0[std::size_t(s.dim + i)] = v[i];
  }
  for (int e = 0; e < g.extra; ++e)
    for (int i = 0; i < s.dim; ++i) y0[std::size_t(2 * s.dim + e * s.dim + i)] = carried[std::size_t(e)][i];
  g.fwd = detail::run_flow(s, y0, s_max, g.extra, opt);
  g.bwd = detail::run_flow(s, y0, s_min, g.extra, opt);
  return g;
}

inline Geodesic shoot_geodesic(const MetricSpec& s, const Vec& p, const Vec& v, double length,
                               const OdeOptions& opt = {}) {
  return length >= 0 ? shoot_span(s, p, v, 0.0, length, {}, opt) : shoot_span(s, p, v, length, 0.0, {}, opt);
}

// Endpoint of t -> exp_p(t w) at t = 1 (w need not be unit).
inline Vec exp_map(const MetricSpec& s, const Vec& p, const Vec& w, const OdeOptions& opt = {}) {
  const int n = s.dim;
  if (w.norm() == 0) return p;
  State y0(std::size_t(2 * n));
  for (int i = 0; i < n; ++i) {
    y0[std::size_t(i)] = p[i];
    y0[std::size_t(n + i)] = w[i];
  }
  const Trajectory tr = detail::run_flow(s, y0, 1.0, 0, opt);
  return detail::head(tr.y.back(), 0, n);
}

struct Connection {
  Geodesic geodesic;
  double distance = 0;
  double residual = 0;
  int iterations = 0;
};

// Boundary-value geodesic from p to q by Newton shooting on the initial velocity.
inline Connection connect(const MetricSpec& s, const Vec& p, const Vec& q, const OdeOptions& opt = {}) {
  const int n = s.dim;
  check_in_chart(s, p);
  check_in_chart(s, q);
  Vec w = q - p;  // flat-chart initial guess
  Connection c;
  if (w.norm() == 0) {
    Vec e = Vec::Zero(n);
    e[0] = 1.0 / g_norm(s, p, Vec::Unit(n, 0));
    c.geodesic = shoot_geodesic(s, p, e, 0.0, opt);
    return c;
  }
  Vec end = exp_map(s, p, w, opt);
  double res = (end - q).norm();
  const double scale = std::max(1.0, q.norm());
  int it = 0;
  for (; it < 20 && res > 1e-12 * scale; ++it) {
    Mat Jac(n, n);
    const double fd = 1e-7 * std::max(1.0, w.norm());
    for (int j = 0; j < n; ++j) {
      Vec wp = w, wm = w;
      wp[j] += fd;
      wm[j] -= fd;
      Jac.col(j) = (exp_map(s, p, wp, opt) - exp_map(s, p, wm, opt)) / (2 * fd);
    }
    const Vec step = Jac.fullPivLu().solve(q - end);
    double lam = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 12; ++ls) {
      const Vec wt = w + lam * step;
      try {
        const Vec et = exp_map(s, p, wt, opt);
        const double rt = (et - q).norm();
        if (rt < res) {
          w = wt;
          end = et;
          res = rt;
          improved = true;
          break;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::left_chart) throw;
      }
      lam *= 0.5;
    }
    if (!improved) break;
  }
  c.iterations = it;
  c.residual = res;
  if (res > 1e-8) fail(ErrorCode::no_convergence, "connect residual " + std::to_string(res));
  const Mat g = metric_at(s, p).g;
  c.distance = std::sqrt(w.dot(g * w));
  c.geodesic = shoot_geodesic(s, p, w / c.distance, c.distance, opt);
  return c;
}

// Frame field along a geodesic: columns of frame(s) are e_1 = gamma', e_2, ...
struct FrameField {
  Geodesic carrier;  // geodesic with the n-1 normal vectors carried in its state

  Mat frame(double s) const {
    const int n = carrier.dim();
    Mat E(n, n);
    E.col(0) = carrier.velocity(s);
    for (int e = 0; e < n - 1; ++e) E.col(e + 1) = carrier.carried(s, e);
    return E;
  }
  double orthonormality_defect() const {
    double d = 0;
    const int n = carrier.dim();
    for (const Trajectory* tr : {&carrier.fwd, &carrier.bwd})
      for (std::size_t i = 0; i < tr->t.size(); ++i) {
        const Mat E = frame(tr->t[i]);
        const Mat G = E.transpose() * metric_at(carrier.metric, carrier.point(tr->t[i])).g * E;
        d = std::max(d, (G - Mat::Identity(n, n)).cwiseAbs().maxCoeff());
      }
    return d;
  }
};

// Parallel transport of the normal part of `frame0` (columns e_2..e_n at s = 0)
// along `geo`. frame0.col(0) must equal the geodesic velocity.
inline FrameField transport_frame(const Geodesic& geo, const Mat& frame0, const OdeOptions& opt = {}) {
  const int n = geo.dim();
  const Mat G = frame0.transpose() * metric_at(geo.metric, geo.p0).g * frame0;
  require((G - Mat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-8, ErrorCode::invalid_argument,
          "initial frame is not orthonormal");
  std::vector<Vec> carried;
  for (int e = 1; e < n; ++e) carried.push_back(frame0.col(e));
  FrameField F;
  F.carrier = shoot_span(geo.metric, geo.p0, geo.v0, geo.s_min, geo.s_max, carried, opt);
  return F;
}

// Transport of a single vector along an arbitrary geodesic, returned at s_max.
inline Vec transport_vector(const Geodesic& geo, const Vec& w0, const OdeOptions& opt = {}) {
  const Geodesic g = shoot_span(geo.metric, geo.p0, geo.v0, 0.0, geo.s_max, {w0}, opt);
  return g.carried(geo.s_max, 0);
}

// Abstract Fermi-coordinate metric: either a catalog metric already in Fermi
// form, or a numerically constructed chart.
class FermiMetric {
 public:
  virtual ~FermiMetric() = default;
  virtual int dim() const = 0;
  virtual double half_length() const = 0;
  virtual double r_max() const = 0;
  virtual Mat metric_components(const Vec& X) const = 0;
  // Riemann tensor at (x, 0) in the orthonormal parallel frame.
  virtual Riemann axis_riemann(double x) const = 0;

  // Christoffel symbols of the Fermi components by central differences.
  virtual Christoffel christoffel_components(const Vec& X) const {
    const int n = dim();
    const double h = 1e-4;
    MetricJet J;
    J.g = metric_components(X);
    for (int k = 0; k < n; ++k) {
      Vec p = X, m = X;
      p[k] += h;
      m[k] -= h;
      J.dg[k] = (metric_components(p) - metric_components(m)) / (2 * h);
    }
    return christoffel_from_jet(J);
  }
};

class CatalogFermi : public FermiMetric {
 public:
  CatalogFermi(MetricSpec s, double L, double r_max) : s_(s), L_(L), r_(r_max) {}
  int dim() const override { return s_.dim; }
  double half_length() const override { return L_; }
  double r_max() const override { return r_; }
  Mat metric_components(const Vec& X) const override { return metric_at(s_, X).g; }
  Riemann axis_riemann(double x) const override {
    Vec p = Vec::Zero(s_.dim);
    p[0] = x;
    return riemann(s_, p);
  }
  Christoffel christoffel_components(const Vec& X) const override { return christoffel(s_, X); }
  const MetricSpec& spec() const { return s_; }

 private:
  MetricSpec s_;
  double L_, r_;
};

// Numeric Fermi chart phi(x, y) = exp_{gamma(x)}(y^a e_a(x)).
class FermiChart : public FermiMetric {
 public:
  FermiChart() = default;
  FermiChart(FrameField frame, double L, double r_max, OdeOptions opt)
      : frame_(std::move(frame)), L_(L), r_(r_max), opt_(opt) {}

  int dim() const override { return frame_.carrier.dim(); }
  double half_length() const override { return L_; }
  double r_max() const override { return r_; }
  const MetricSpec& base_metric() const { return frame_.carrier.metric; }
  const FrameField& frame() const { return frame_; }
  const OdeOptions& options() const { return opt_; }

  Vec fermi_to_manifold(const Vec& X) const {
    const int n = dim();
    const Mat E = frame_.frame(X[0]);
    Vec w = Vec::Zero(n);
    for (int a = 1; a < n; ++a) w += X[a] * E.col(a);
    return exp_map(base_metric(), frame_.carrier.point(X[0]), w, opt_);
  }

  Mat forward_jacobian(const Vec& X, double h = 1e-5) const {
    const int n = dim();
    Mat D(n, n);
    for (int j = 0; j < n; ++j) {
      Vec p = X, m = X;
      p[j] += h;
      m[j] -= h;
      D.col(j) = (fermi_to_manifold(p) - fermi_to_manifold(m)) / (2 * h);
    }
    return D;
  }

  Mat metric_components(const Vec& X) const override {
    const Mat D = forward_jacobian(X);
    return D.transpose() * metric_at(base_metric(), fermi_to_manifold(X)).g * D;
  }

  Riemann axis_riemann(double x) const override {
    const int n = dim();
    const Riemann R = riemann(base_metric(), frame_.carrier.point(x));
    const Mat E = frame_.frame(x);
    Riemann out;
    out.n = n;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) out(a, b, c, d) = R.apply(E.col(a), E.col(b), E.col(c), E.col(d));
    return out;
  }

  Vec manifold_to_fermi(const Vec& q) const {
    const int n = dim();
    // Initial guess: nearest sampled axis point, normal offsets by frame projection.
    double best = 1e300, xb = 0;
    const int samples = 400;
    for (int i = 0; i <= samples; ++i) {
      const double x = -L_ + 2 * L_ * i / samples;
      const double d = (frame_.carrier.point(x) - q).norm();
      if (d < best) {
        best = d;
        xb = x;
      }
    }
    Vec X = Vec::Zero(n);
    X[0] = xb;
    const Mat E = frame_.frame(xb);
    const Mat g = metric_at(base_metric(), frame_.carrier.point(xb)).g;
    for (int a = 0; a < n; ++a) X[a] += (a == 0 ? 0.0 : E.col(a).dot(g * (q - frame_.carrier.point(xb))));
    for (int it = 0; it < 30; ++it) {
      const Vec r = q - fermi_to_manifold(X);
      if (r.norm() < 1e-12) break;
      X += forward_jacobian(X).fullPivLu().solve(r);
    }
    return X;
  }

  // Binary cache: magic, version, key, then the carrier trajectories.
  static constexpr std::uint32_t kCacheVersion = 1;

  std::string cache_key() const {
    std::ostringstream os;
    os.precision(17);
    os << base_metric().canonical() << "|L=" << L_ << "|r=" << r_ << "|tol=" << opt_.abs_tol << "," << opt_.rel_tol
       << "|p0=" << frame_.carrier.p0.transpose() << "|v0=" << frame_.carrier.v0.transpose();
    return os.str();
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::io_failure, "cannot write " + path);
    auto put = [&f](const auto& v) { f.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
    f.write("FGCH", 4);
    put(kCacheVersion);
    const std::string key = cache_key();
    put(std::uint64_t(key.size()));
    f.write(key.data(), std::streamsize(key.size()));
    const MetricSpec& s = base_metric();
    put(int(s.family));
    put(s.dim);
    for (double v : {s.k_base, s.k_amp, s.k_freq, s.k_phase, s.a, s.b, L_, r_, opt_.abs_tol, opt_.rel_tol}) put(v);
    const Geodesic& g = frame_.carrier;
    put(g.s_min);
    put(g.s_max);
    put(g.extra);
    for (int i = 0; i < s.dim; ++i) put(g.p0[i]);
    for (int i = 0; i < s.dim; ++i) put(g.v0[i]);
    for (const Trajectory* tr : {&g.fwd, &g.bwd}) {
      put(std::uint64_t(tr->t.size()));
      put(std::uint64_t(tr->y.empty() ? 0 : tr->y[0].size()));
      for (std::size_t i = 0; i < tr->t.size(); ++i) {
        put(tr->t[i]);
        for (double v : tr->y[i]) put(v);
        for (double v : tr->dy[i]) put(v);
      }
    }
    if (!f) fail(ErrorCode::io_failure, "write failed for " + path);
  }

  // Loads a chart; an optional expected key guards against stale entries.
  static FermiChart load(const std::string& path, const std::string& expected_key = "") {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::io_failure, "cannot read " + path);
    auto get = [&f](auto& v) {
      f.read(reinterpret_cast<char*>(&v), sizeof(v));
      if (!f) fail(ErrorCode::io_failure, "truncated chart cache");
    };
    char magic[4];
    f.read(magic, 4);
    if (!f || std::string(magic, 4) != "FGCH") fail(ErrorCode::cache_mismatch, "bad magic");
    std::uint32_t version;
    get(version);
    if (version != kCacheVersion) fail(ErrorCode::cache_mismatch, "chart cache version " + std::to_string(version));
    std::uint64_t klen;
    get(klen);
    std::string key(klen, '\0');
    f.read(key.data(), std::streamsize(klen));
    if (!expected_key.empty() && key != expected_key) fail(ErrorCode::cache_mismatch, "chart cache key differs");
    MetricSpec s;
    int fam;
    get(fam);
    s.family = MetricFamily(fam);
    get(s.dim);
    double L, r;
    OdeOptions opt;
    for (double* v : {&s.k_base, &s.k_amp, &s.k_freq, &s.k_phase, &s.a, &s.b, &L, &r, &opt.abs_tol, &opt.rel_tol})
      get(*v);
    Geodesic g;
    g.metric = s;
    get(g.s_min);
    get(g.s_max);
    get(g.extra);
    g.p0 = Vec(s.dim);
    g.v0 = Vec(s.dim);
    for (int i = 0; i < s.dim; ++i) get(g.p0[i]);
    for (int i = 0; i < s.dim; ++i) get(g.v0[i]);
    for (Trajectory* tr : {&g.fwd, &g.bwd}) {
      std::uint64_t m, w;
      get(m);
      get(w);
      tr->t.resize(m);
      tr->y.assign(m, State(w));
      tr->dy.assign(m, State(w));
      for (std::size_t i = 0; i < m; ++i) {
        get(tr->t[i]);
        for (auto& v : tr->y[i]) get(v);
        for (auto& v : tr->dy[i]) get(v);
      }
    }
    FrameField F;
    F.carrier = std::move(g);
    FermiChart c(std::move(F), L, r, opt);
    if (!expected_key.empty() && c.cache_key() != expected_key) fail(ErrorCode::cache_mismatch, "key mismatch");
    return c;
  }

 private:
  FrameField frame_;
  double L_ = 0, r_ = 0;
  OdeOptions opt_;
};

// Builds the numeric Fermi chart along the geodesic through p with unit
// velocity v, half-length L. e_2 (and e_3) complete v to a positively oriented
// orthonormal frame by Gram-Schmidt on the coordinate basis.
inline FermiChart build_fermi_chart(const MetricSpec& s, const Vec& p, const Vec& v, double L, double r_max,
                                    const OdeOptions& opt = {}) {
  const int n = s.dim;
  const Geodesic geo = shoot_span(s, p, v, -L, L, {}, opt);
  const Mat g = metric_at(s, p).g;
  Mat E(n, n);
  E.col(0) = v;
  for (int a = 1; a < n; ++a) {
    Vec w = Vec::Unit(n, a);
    for (int b = 0; b < a; ++b) w -= E.col(b).dot(g * w) * E.col(b);
    E.col(a) = w / std::sqrt(w.dot(g * w));
  }
  if (E.determinant() < 0) E.col(n - 1) *= -1.0;
  FermiChart chart(transport_frame(geo, E, opt), L, r_max, opt);

  // Fold detection: the Fermi volume factor sqrt(det g) must not collapse along rays.
  const int nx = 9, nr = 6, ndir = n == 2 ? 2 : 8;
  for (int ix = 0; ix < nx; ++ix) {
    const double x = -L + 2 * L * ix / (nx - 1);
    auto volume = [&](const Vec& X) { return std::sqrt(std::max(0.0, chart.metric_components(X).determinant())); };
    const double det0 = volume([&] { Vec X = Vec::Zero(n); X[0] = x; return X; }());
    for (int d = 0; d < ndir; ++d) {
      const double th = 2 * kPi * d / ndir;
      for (int k = 1; k <= nr; ++k) {
        Vec X = Vec::Zero(n);
        X[0] = x;
        const double rho = r_max * k / nr;
        if (n == 2) {
          X[1] = d == 0 ? rho : -rho;
        } else {
          X[1] = rho * std::cos(th);
          X[2] = rho * std::sin(th);
        }
        double det;
        try {
          det = volume(X);
        } catch (const Error& e) {
          fail(ErrorCode::tube_too_large, std::string("ray leaves chart: ") + e.what());
        }
        if (!(det / det0 > 1e-3)) fail(ErrorCode::tube_too_large, "forward map folds at radius " + std::to_string(rho));
      }
    }
  }
  return chart;
}

struct ExpansionComponent {
  int i = 0, j = 0;
  double slope = 0;  // +inf when the remainder vanishes to rounding
  bool exact = false;
  std::vector<double> residuals;
};

struct ExpansionReport {
  std::vector<double> radii;
  std::vector<ExpansionComponent> components;
  double ratio_metric = 0;      // max |g - delta| / |y|^2
  double ratio_christoffel = 0; // max |Gamma| / |y|
  double ratio_dxx = 0;         // max |d_xx g| / |y|^2
  double min_slope() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : components) m = std::min(m, c.slope);
    return m;
  }
};

// Quadratic Fermi expansion predicted by the axis curvature, in frame indices.
inline Mat fermi_quadratic(const Riemann& R, const Vec& y) {
  const int n = R.n;
  Vec Y = y;
  Y[0] = 0;
  const Vec e1 = Vec::Unit(n, 0);
  Mat Q = Mat::Zero(n, n);
  Q(0, 0) = -R.apply(Y, e1, e1, Y);
  for (int a = 1; a < n; ++a) {
    const Vec ea = Vec::Unit(n, a);
    Q(0, a) = Q(a, 0) = -(2.0 / 3.0) * R.apply(Y, e1, ea, Y);
    for (int b = 1; b < n; ++b) Q(a, b) = -(1.0 / 3.0) * R.apply(ea, Y, Y, Vec::Unit(n, b));
  }
  return Q;
}

inline ExpansionReport expansion_audit(const FermiMetric& chart, std::vector<double> radii) {
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  int levels = radii.empty() ? 0 : 1;
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (radii[i] >= 1.9 * radii[i - 1]) ++levels;
  if (levels < 4) fail(ErrorCode::insufficient_levels, "need at least 4 dyadic radius levels");
  require(radii.back() <= chart.r_max() * (1 + 1e-12), ErrorCode::invalid_argument, "radius beyond r_max");

  const int n = chart.dim();
  const double L = chart.half_length();
  const std::vector<double> xs = {-0.5 * L, 0.0, 0.5 * L};
  std::vector<Vec> dirs;
  if (n == 2) {
    dirs = {Vec::Unit(2, 1), -Vec::Unit(2, 1)};
  } else {
    for (int k = 0; k < 6; ++k) {
      Vec w = Vec::Zero(3);
      w[1] = std::cos(kPi * k / 3.0 + 0.3);
      w[2] = std::sin(kPi * k / 3.0 + 0.3);
      dirs.push_back(w);
    }
  }
  ExpansionReport rep;
  rep.radii = radii;
  std::vector<Riemann> Rx;
  for (double x : xs) Rx.push_back(chart.axis_riemann(x));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      ExpansionComponent c;
      c.i = i;
      c.j = j;
      rep.components.push_back(c);
    }
  for (double rho : radii) {
    std::vector<double> worst(rep.components.size(), 0.0);
    for (std::size_t ix = 0; ix < xs.size(); ++ix)
      for (const Vec& w : dirs) {
        Vec X = rho * w;
        X[0] = xs[ix];
        Vec y = rho * w;
        const Mat g = chart.metric_components(X);
        const Mat Q = fermi_quadratic(Rx[ix], y);
        std::size_t k = 0;
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j, ++k) {
            const double res = std::abs(g(i, j) - (i == j ? 1.0 : 0.0) - Q(i, j));
            worst[k] = std::max(worst[k], res);
          }
        const double dev = (g - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
        rep.ratio_metric = std::max(rep.ratio_metric, dev / (rho * rho));
        const Christoffel G = chart.christoffel_components(X);
        double gmax = 0;
        for (int kk = 0; kk < n; ++kk) gmax = std::max(gmax, G[kk].cwiseAbs().maxCoeff());
        rep.ratio_christoffel = std::max(rep.ratio_christoffel, gmax / rho);
        const double hx = 1e-3;
        Vec Xp = X, Xm = X;
        Xp[0] += hx;
        Xm[0] -= hx;
        const Mat dxx = (chart.metric_components(Xp) - 2 * g + chart.metric_components(Xm)) / (hx * hx);
        rep.ratio_dxx = std::max(rep.ratio_dxx, dxx.cwiseAbs().maxCoeff() / (rho * rho));
      }
    for (std::size_t k = 0; k < worst.size(); ++k) rep.components[k].residuals.push_back(worst[k]);
  }
  for (auto& c : rep.components) {
    const double peak = *std::max_element(c.residuals.begin(), c.residuals.end());
    if (peak < 1e-13) {
      c.exact = true;
      c.slope = std::numeric_limits<double>::infinity();
      continue;
    }
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < radii.size(); ++k)
      if (c.residuals[k] > 1e-14) {
        lx.push_back(std::log(radii[k]));
        ly.push_back(std::log(c.residuals[k]));
      }
    c.slope = lx.size() >= 2 ? fit_line(lx, ly).slope : std::numeric_limits<double>::infinity();
  }
  return rep;
}

}  // namespace fgap
