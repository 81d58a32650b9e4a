#pragma once

#include "fgap/geodesy.hpp"

#include <random>
#include <sstream>

namespace fgap {

// Normal curvature form B(x)_{ab} = Rm(e_a, gamma', gamma', e_b) along a unit
// speed base geodesic in a parallel orthonormal normal frame. Jacobi fields
// obey J'' = -B J in frame components.
using CurvatureForm = std::function<Mat(double)>;

inline CurvatureForm catalog_form(const MetricSpec& s) {
  return [s](double x) { return normal_curvature_form(s, x); };
}

// Form read off a Fermi chart; the chart object must outlive the returned form.
inline CurvatureForm chart_form(const FermiMetric& chart) {
  return [&chart](double x) {
    const Riemann R = chart.axis_riemann(x);
    const int m = chart.dim() - 1;
    Mat B(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) B(a, b) = R(a + 1, 0, 0, b + 1);
    return B;
  };
}

inline int form_dim(const CurvatureForm& f) { return int(f(0.0).rows()); }

struct JacobiField {
  CurvatureForm form;
  int m = 1;
  double x0 = 0, a = 0, b = 0;
  Trajectory fwd, bwd;  // from x0 towards b and towards a

  const Trajectory& piece(double x) const { return x >= x0 ? fwd : bwd; }
  State state(double x) const { return piece(x).at(std::clamp(x, a, b)); }
  Vec value(double x) const {
    const State y = state(x);
    return Eigen::Map<const Eigen::VectorXd>(y.data(), m);
  }
  Vec derivative(double x) const {
    const State y = state(x);
    return Eigen::Map<const Eigen::VectorXd>(y.data() + m, m);
  }
  // max |J'' + B J| re-substituted at step midpoints, using the interpolated J'.
  double residual() const {
    double worst = 0;
    for (const Trajectory* tr : {&fwd, &bwd})
      for (std::size_t i = 0; i + 1 < tr->t.size(); ++i) {
        const double x = 0.5 * (tr->t[i] + tr->t[i + 1]);
        State d;
        const State y = tr->at(x, &d);
        const Eigen::Map<const Eigen::VectorXd> J(y.data(), m), Jpp(d.data() + m, m);
        const Eigen::VectorXd r = Jpp + Eigen::MatrixXd(form(x)) * J;
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
      }
    return worst;
  }
};

namespace detail {
inline Rhs jacobi_rhs(const CurvatureForm& form, int m) {
  return [form, m](const State& y, State& d, double x) {
    const Mat B = form(x);
    for (int i = 0; i < m; ++i) {
      d[std::size_t(i)] = y[std::size_t(m + i)];
      double acc = 0;
      for (int j = 0; j < m; ++j) acc += B(i, j) * y[std::size_t(j)];
      d[std::size_t(m + i)] = -acc;
    }
  };
}
inline OdeOptions jacobi_options() {
  OdeOptions o;
  o.abs_tol = 1e-14;
  o.rel_tol = 1e-13;
  o.initial_step = 1e-3;
  return o;
}
}  // namespace detail

// Initial value problem with data (J, J') at x0, integrated over [a, b].
inline JacobiField integrate_jacobi_ivp(const CurvatureForm& form, const Vec& J0, const Vec& dJ0, double a, double b,
                                        double x0 = 0.0) {
  require(a <= x0 && x0 <= b, ErrorCode::invalid_argument, "x0 must lie in [a, b]");
  JacobiField F;
  F.form = form;
  F.m = int(J0.size());
  require(F.m == form_dim(form) && dJ0.size() == J0.size(), ErrorCode::invalid_argument,
          "initial data must live in the normal frame");
  F.x0 = x0;
  F.a = a;
  F.b = b;
  State y0(std::size_t(2 * F.m));
  for (int i = 0; i < F.m; ++i) {
    y0[std::size_t(i)] = J0[i];
    y0[std::size_t(F.m + i)] = dJ0[i];
  }
  const Rhs f = detail::jacobi_rhs(form, F.m);
  const OdeOptions opt = detail::jacobi_options();
  F.fwd = integrate(f, y0, x0, b, opt);
  F.bwd = integrate(f, y0, x0, a, opt);
  return F;
}

struct JacobiBvp {
  JacobiField field;
  double condition = 0;  // condition number of the basis matrix
  double endpoint_residual = 0;
};

// Boundary value problem J(a) = Vp, J(b) = Vq through two IVP bases.
inline JacobiBvp jacobi_bvp(const CurvatureForm& form, double a, const Vec& Vp, double b, const Vec& Vq) {
  require(b > a, ErrorCode::invalid_argument, "bvp needs a < b");
  const int m = int(Vp.size());
  Eigen::MatrixXd U(m, m), W(m, m);
  for (int i = 0; i < m; ++i) {
    const Vec e = Vec::Unit(m, i), z = Vec::Zero(m);
    U.col(i) = integrate_jacobi_ivp(form, e, z, a, b, a).value(b);
    W.col(i) = integrate_jacobi_ivp(form, z, e, a, b, a).value(b);
  }
  // Basis map (J(a), J'(a)) -> (J(a), J(b)).
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  M.topLeftCorner(m, m).setIdentity();
  M.bottomLeftCorner(m, m) = U;
  M.bottomRightCorner(m, m) = W;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto sv = svd.singularValues();
  JacobiBvp out;
  out.condition = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(out.condition <= 1e10)) fail(ErrorCode::near_conjugate, "basis matrix condition " + std::to_string(out.condition));
  const auto lu = W.partialPivLu();
  Eigen::VectorXd c = lu.solve(Eigen::VectorXd(Vq) - U * Eigen::VectorXd(Vp));
  // Refinement absorbs integration error amplified through W^{-1}. Adaptive
  // steps make the shooting map only nearly affine, so allow a few passes.
  constexpr int kPasses = 5;
  for (int pass = 0; pass < kPasses; ++pass) {
    out.field = integrate_jacobi_ivp(form, Vp, Vec(c), a, b, a);
    const Eigen::VectorXd r = Eigen::VectorXd(out.field.value(b) - Vq);
    out.endpoint_residual = r.cwiseAbs().maxCoeff();
    if (out.endpoint_residual <= 1e-12) break;
    if (pass + 1 < kPasses) c -= lu.solve(r);
  }
  if (out.endpoint_residual > 1e-9) {
    std::ostringstream os;
    os << "endpoint residual " << out.endpoint_residual << " at condition " << out.condition;
    fail(ErrorCode::near_conjugate, os.str());
  }
  return out;
}

// Angle between the kappa_2 eigenvector xi_2(x) of the normal form and e_y.
struct RotationAngle {
  CurvatureForm form;
  std::vector<double> x, theta, kappa2, kappa3;
  std::vector<Eigen::Vector2d> xi2;

  struct Sample {
    double theta, kappa2, kappa3;
  };
  // Exact evaluation at any x, sign-aligned with the nearest stored sample.
  Sample at(double s) const {
    const Eigen::Matrix2d B = form(s);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(B);
    auto it = std::lower_bound(x.begin(), x.end(), s);
    std::size_t i = it == x.end() ? x.size() - 1 : std::size_t(it - x.begin());
    if (i > 0 && std::abs(x[i - 1] - s) < std::abs(x[i] - s)) --i;
    Eigen::Vector2d v = es.eigenvectors().col(0);
    if (v.dot(xi2[i]) < 0) v = -v;
    double th = std::atan2(v[1], v[0]);
    while (th - theta[i] > kPi) th -= 2 * kPi;
    while (th - theta[i] < -kPi) th += 2 * kPi;
    return {th, es.eigenvalues()(0), es.eigenvalues()(1)};
  }
  double max_abs_sin(double lo, double hi) const {
    double w = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] >= lo - 1e-15 && x[i] <= hi + 1e-15) w = std::max(w, std::abs(std::sin(theta[i])));
    return w;
  }
};

// Samples theta on [a, b] (n >= 2 points); x = 0 is inserted so theta(0) is a node.
inline RotationAngle rotation_angle(const CurvatureForm& form, double a, double b, int n = 401) {
  require(form_dim(form) == 2, ErrorCode::invalid_argument, "rotation angle needs a 3-manifold");
  require(b > a && n >= 2, ErrorCode::invalid_argument, "rotation angle needs a < b");
  RotationAngle R;
  R.form = form;
  for (int i = 0; i < n; ++i) R.x.push_back(a + (b - a) * i / (n - 1));
  if (a < 0 && b > 0 && std::find(R.x.begin(), R.x.end(), 0.0) == R.x.end()) {
    R.x.push_back(0.0);
    std::sort(R.x.begin(), R.x.end());
  }
  // Start from the sample nearest x = 0 and sweep outwards so theta is aligned there.
  const std::size_t N = R.x.size();
  std::size_t i0 = 0;
  for (std::size_t i = 1; i < N; ++i)
    if (std::abs(R.x[i]) < std::abs(R.x[i0])) i0 = i;
  R.theta.assign(N, 0);
  R.kappa2.assign(N, 0);
  R.kappa3.assign(N, 0);
  R.xi2.assign(N, Eigen::Vector2d::Zero());
  auto eval = [&](std::size_t i, const Eigen::Vector2d* prev, double prev_theta) {
    const Eigen::Matrix2d B = form(R.x[i]);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(B);
    const double gap = es.eigenvalues()(1) - es.eigenvalues()(0);
    if (gap < 1e-8) fail(ErrorCode::eigenvalue_collision, "kappa_2 = kappa_3 at x = " + std::to_string(R.x[i]));
    Eigen::Vector2d v = es.eigenvectors().col(0);
    if (prev ? v.dot(*prev) < 0 : v[0] < 0) v = -v;
    double th = std::atan2(v[1], v[0]);
    while (th - prev_theta > kPi) th -= 2 * kPi;
    while (th - prev_theta < -kPi) th += 2 * kPi;
    R.xi2[i] = v;
    R.theta[i] = th;
    R.kappa2[i] = es.eigenvalues()(0);
    R.kappa3[i] = es.eigenvalues()(1);
  };
  eval(i0, nullptr, 0.0);
  for (std::size_t i = i0 + 1; i < N; ++i) eval(i, &R.xi2[i - 1], R.theta[i - 1]);
  for (std::size_t i = i0; i-- > 0;) eval(i, &R.xi2[i + 1], R.theta[i + 1]);
  return R;
}

// Coupled height/depth system driven by (kappa_2, kappa_3, theta):
//   J^y'' + (k2 c^2 + k3 s^2) J^y = -(k2 - k3) sin(2 theta)/2 J^z
//   J^z'' + (k2 s^2 + k3 c^2) J^z = -(k2 - k3) sin(2 theta)/2 J^y
inline JacobiField integrate_coupled_theta(const RotationAngle& rot, const Vec& J0, const Vec& dJ0, double a, double b,
                                           double x0 = 0.0) {
  CurvatureForm rebuilt = [&rot](double x) {
    const auto s = rot.at(x);
    const double c = std::cos(s.theta), sn = std::sin(s.theta);
    Mat B(2, 2);
    B(0, 0) = s.kappa2 * c * c + s.kappa3 * sn * sn;
    B(1, 1) = s.kappa2 * sn * sn + s.kappa3 * c * c;
    B(0, 1) = B(1, 0) = (s.kappa2 - s.kappa3) * sn * c;
    return B;
  };
  return integrate_jacobi_ivp(rebuilt, J0, dJ0, a, b, x0);
}

enum class BarrierKind { upper, lower };

// Solution of j'' = c j (c >= 0) with j(a) = A, j(b) = B in closed form.
struct Barrier {
  BarrierKind kind = BarrierKind::upper;
  double stiffness = 0;
  double a = 0, b = 0, A = 0, B = 0;

  // Zero stiffness degenerates to the straight chord.
  double value(double x) const {
    if (stiffness == 0) return A + (B - A) * (x - a) / (b - a);
    const double w = std::sqrt(stiffness);
    return (A * std::sinh(w * (b - x)) + B * std::sinh(w * (x - a))) / std::sinh(w * (b - a));
  }
  double derivative(double x) const {
    if (stiffness == 0) return (B - A) / (b - a);
    const double w = std::sqrt(stiffness);
    return w * (-A * std::cosh(w * (b - x)) + B * std::cosh(w * (x - a))) / std::sinh(w * (b - a));
  }
  // Minimiser on [a, b] (the barrier is convex for positive data).
  double argmin() const {
    auto d = [&](double x) { return derivative(x); };
    if (d(a) >= 0) return a;
    if (d(b) <= 0) return b;
    return bisect_root(d, a, b, 1e-14);
  }
};

struct BarrierPair {
  Barrier lower, upper;
};

inline BarrierPair barriers(double kappa2_0, double a, double b, double Vp_y, double Vq_y) {
  require(kappa2_0 < 0, ErrorCode::invalid_argument, "barriers need kappa_2(0) < 0");
  require(b > a, ErrorCode::invalid_argument, "barriers need a < b");
  if (!(Vp_y > 0.75 && Vq_y > 0.75)) fail(ErrorCode::invalid_boundary_heights, "boundary heights must exceed 3/4");
  BarrierPair P;
  P.upper = {BarrierKind::upper, -kappa2_0 / 2, a, b, Vp_y, Vq_y};
  P.lower = {BarrierKind::lower, -3 * kappa2_0 / 2, a, b, Vp_y, Vq_y};
  return P;
}

struct SturmReport {
  double min_margin = 0;      // min of psi - phi on interior samples
  bool dominance = false;     // psi > phi at every interior sample
  bool width_as_printed = false;  // b - a < pi / K
  double phi_mid = 0, psi_mid = 0;
};

// phi'' = -g1 phi against psi'' = -K psi with shared boundary values.
inline SturmReport sturm_compare(const std::function<double(double)>& g1, double K, double a, double b, double A,
                                 double B, int samples = 401) {
  require(K > 0 && b > a && A > 0 && B > 0, ErrorCode::invalid_argument, "sturm comparison needs K > 0, a < b, positive data");
  for (int i = 0; i <= samples; ++i) {
    const double x = a + (b - a) * (i + 0.5) / (samples + 1);
    const double g = g1(x);
    if (!(g > 0 && g < K)) fail(ErrorCode::hypothesis_violation, "g1 leaves (0, K) at x = " + std::to_string(x));
  }
  const double w = std::sqrt(K);
  if (!(b - a < kPi / w)) fail(ErrorCode::hypothesis_violation, "interval wider than pi / sqrt(K)");
  CurvatureForm f = [&g1](double x) {
    Mat m(1, 1);
    m(0, 0) = g1(x);
    return m;
  };
  Vec va(1), vb(1);
  va << A;
  vb << B;
  const auto phi = jacobi_bvp(f, a, va, b, vb).field;
  auto psi = [&](double x) { return (A * std::sin(w * (b - x)) + B * std::sin(w * (x - a))) / std::sin(w * (b - a)); };
  SturmReport rep;
  rep.width_as_printed = b - a < kPi / K;
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (int i = 1; i < samples; ++i) {
    const double x = a + (b - a) * i / samples;
    rep.min_margin = std::min(rep.min_margin, psi(x) - phi.value(x)[0]);
  }
  rep.dominance = rep.min_margin > 0;
  const double mid = 0.5 * (a + b);
  rep.phi_mid = phi.value(mid)[0];
  rep.psi_mid = psi(mid);
  return rep;
}

struct LengthGate {
  double L = 0, rho = 0, kappa2_0 = 0, K = 0;
  double max_sin_theta = 0;
  bool cos_bound = false;    // cos(K L) > 1/2
  bool theta_bound = false;  // sin(theta) < |kappa_2(0)| / (16 K rho)
  bool cosh_bound = false;   // cosh(sqrt(3|kappa_2(0)|/2) L) <= 3/2
  bool sinh_bound = false;   // sinh^2(sqrt(|kappa_2(0)|/2) L) < 1/20
  double cap_cos = 0, cap_cosh = 0, cap_sinh = 0;
  double max_admissible_L = 0;

  bool passes() const { return cos_bound && theta_bound && cosh_bound && sinh_bound; }
};

// theta(x) profile is evaluated on [-L, L].
inline LengthGate length_gate(double kappa2_0, double K, double rho, const std::function<double(double)>& theta,
                              double L) {
  require(kappa2_0 < 0 && K > 0 && rho >= 2 && L > 0, ErrorCode::invalid_argument,
          "length gate needs kappa_2(0) < 0, K > 0, rho >= 2, L > 0");
  const double k = std::abs(kappa2_0);
  auto max_sin = [&](double len) {
    double w = 0;
    for (int i = 0; i <= 400; ++i) w = std::max(w, std::abs(std::sin(theta(-len + 2 * len * i / 400.0))));
    return w;
  };
  auto eval = [&](double len) {
    LengthGate G;
    G.L = len;
    G.rho = rho;
    G.kappa2_0 = kappa2_0;
    G.K = K;
    G.max_sin_theta = max_sin(len);
    G.cos_bound = std::cos(K * len) > 0.5;
    G.theta_bound = G.max_sin_theta < k / (16 * K * rho);
    G.cosh_bound = std::cosh(std::sqrt(1.5 * k) * len) <= 1.5;
    const double sh = std::sinh(std::sqrt(0.5 * k) * len);
    G.sinh_bound = sh * sh < 0.05;
    return G;
  };
  LengthGate G = eval(L);
  G.cap_cos = std::acos(0.5) / K;
  G.cap_cosh = std::acosh(1.5) / std::sqrt(1.5 * k);
  G.cap_sinh = std::asinh(std::sqrt(0.05)) / std::sqrt(0.5 * k);
  double hi = std::min({G.cap_cos, G.cap_cosh, G.cap_sinh});
  if (eval(hi * (1 - 1e-12)).passes()) {
    G.max_admissible_L = hi;
  } else if (!eval(hi * 1e-6).passes()) {
    G.max_admissible_L = 0;
  } else {
    double lo = hi * 1e-6;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (eval(mid).passes() ? lo : hi) = mid;
    }
    G.max_admissible_L = lo;
  }
  return G;
}

struct FlatteningTrial {
  std::size_t id = 0;
  double a = 0, b = 0;
  Vec Vp, Vq;
  double lower_margin = 0;     // min (J^y - j_*)
  double upper_margin = 0;     // min (j^* - J^y)
  double envelope_margin = 0;  // min (rho cos(K x) - |J|)
  double worst_x = 0;
  bool pass = false;
};

struct FlatteningReport {
  std::uint64_t seed = 0;
  std::vector<FlatteningTrial> trials;
  bool pass = false;
  double worst_lower = 0, worst_upper = 0, worst_envelope = 0;
  std::size_t first_failure = 0;

  std::string csv() const {
    std::ostringstream os;
    os.precision(10);
    os << "trial,a,b,vp_y,vp_z,vq_y,vq_z,lower_margin,upper_margin,envelope_margin,pass\n";
    for (const auto& t : trials)
      os << t.id << ',' << t.a << ',' << t.b << ',' << t.Vp[0] << ',' << t.Vp[1] << ',' << t.Vq[0] << ',' << t.Vq[1]
         << ',' << t.lower_margin << ',' << t.upper_margin << ',' << t.envelope_margin << ',' << (t.pass ? 1 : 0)
         << '\n';
    return os.str();
  }
};

// Randomised boundary data; trial 0 spans the full interval [-L, L].
inline FlatteningReport flattening_audit(const CurvatureForm& form, const LengthGate& gate, std::size_t trials,
                                         std::uint64_t seed, unsigned workers = 1) {
  if (!gate.passes()) fail(ErrorCode::gate_failed, "length gate does not hold at L = " + std::to_string(gate.L));
  require(gate.rho > 2, ErrorCode::hypothesis_violation, "flattening needs rho > 2");
  require(form_dim(form) == 2, ErrorCode::invalid_argument, "flattening audit needs a 3-manifold");
  const double L = gate.L, K = gate.K, rho = gate.rho;
  FlatteningReport rep;
  rep.seed = seed;
  rep.trials.resize(trials);
  // Draw all boundary data up front so results do not depend on scheduling.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (std::size_t k = 0; k < trials; ++k) {
    auto& t = rep.trials[k];
    t.id = k;
    t.a = k == 0 ? -L : -L * u01(rng);
    t.b = k == 0 ? L : L * u01(rng);
    if (t.b - t.a < 0.05 * L) t.b = std::min(L, t.a + 0.05 * L);
    auto draw = [&](double x) {
      Vec V(2);
      V[0] = 0.75 + (1.1 - 0.75) * u01(rng);
      const double cap = rho * std::cos(K * x);
      const double zmax = std::sqrt(std::max(0.0, cap * cap - V[0] * V[0]));
      V[1] = (2 * u01(rng) - 1) * zmax * (1 - 1e-9);
      return V;
    };
    t.Vp = draw(t.a);
    t.Vq = draw(t.b);
  }
  parallel_for(trials, workers, [&](std::size_t k) {
    auto& t = rep.trials[k];
    const auto J = jacobi_bvp(form, t.a, t.Vp, t.b, t.Vq).field;
    const auto P = barriers(gate.kappa2_0, t.a, t.b, t.Vp[0], t.Vq[0]);
    t.lower_margin = t.upper_margin = t.envelope_margin = std::numeric_limits<double>::infinity();
    const int n = 100;
    for (int i = 1; i < n; ++i) {
      const double x = t.a + (t.b - t.a) * i / n;
      const Vec v = J.value(x);
      const double lo = v[0] - P.lower.value(x), up = P.upper.value(x) - v[0];
      const double env = rho * std::cos(K * x) - v.norm();
      if (std::min({lo, up, env}) < std::min({t.lower_margin, t.upper_margin, t.envelope_margin})) t.worst_x = x;
      t.lower_margin = std::min(t.lower_margin, lo);
      t.upper_margin = std::min(t.upper_margin, up);
      t.envelope_margin = std::min(t.envelope_margin, env);
    }
    t.pass = t.lower_margin >= -1e-9 && t.upper_margin >= -1e-9 && t.envelope_margin >= -1e-9;
  });
  rep.pass = true;
  rep.worst_lower = rep.worst_upper = rep.worst_envelope = std::numeric_limits<double>::infinity();
  for (const auto& t : rep.trials) {
    if (!t.pass && rep.pass) {
      rep.pass = false;
      rep.first_failure = t.id;
    }
    rep.worst_lower = std::min(rep.worst_lower, t.lower_margin);
    rep.worst_upper = std::min(rep.worst_upper, t.upper_margin);
    rep.worst_envelope = std::min(rep.worst_envelope, t.envelope_margin);
  }
  return rep;
}

// Raises audit-failed naming the first violating trial.
inline void require_pass(const FlatteningReport& rep) {
  if (rep.pass) return;
  const auto& t = rep.trials[rep.first_failure];
  std::ostringstream os;
  os << "trial " << t.id << " on [" << t.a << ", " << t.b << "] violates at x = " << t.worst_x
     << " (lower " << t.lower_margin << ", upper " << t.upper_margin << ", envelope " << t.envelope_margin << ")";
  fail(ErrorCode::audit_failed, os.str());
}

struct RauchSample {
  double x, norm_J, lower, upper_literal, upper_corrected;
};

struct RauchReport {
  double r = 0, K = 0;  // K is the rate: sectional curvature in [-K^2, -1]
  std::vector<RauchSample> samples;
  bool lower_holds = false;
  bool literal_upper_holds = false;    // |J| <= (r/K) cosh(K x)
  bool corrected_upper_holds = false;  // |J| <= r cosh(K x)
  double worst_lower = 0, worst_literal = 0, worst_corrected = 0;  // max relative violation
};

// J(0) = r e_2, J'(0) = 0 along the axis of a 2D chart, compared on [-L, L].
inline RauchReport rauch_sandwich(const CurvatureForm& form, double r, double L, double K, double rel_tol = 1e-4,
                                  int n = 401) {
  require(form_dim(form) == 1, ErrorCode::invalid_argument, "Rauch sandwich is checked on surfaces");
  Vec J0(1), dJ0(1);
  J0 << r;
  dJ0 << 0;
  const auto J = integrate_jacobi_ivp(form, J0, dJ0, -L, L, 0.0);
  RauchReport rep;
  rep.r = r;
  rep.K = K;
  for (int i = 0; i < n; ++i) {
    const double x = -L + 2 * L * i / (n - 1);
    RauchSample s{x, std::abs(J.value(x)[0]), r * std::cosh(x), r / K * std::cosh(K * x), r * std::cosh(K * x)};
    rep.samples.push_back(s);
    rep.worst_lower = std::max(rep.worst_lower, (s.lower - s.norm_J) / s.lower);
    rep.worst_literal = std::max(rep.worst_literal, (s.norm_J - s.upper_literal) / s.upper_literal);
    rep.worst_corrected = std::max(rep.worst_corrected, (s.norm_J - s.upper_corrected) / s.upper_corrected);
  }
  rep.lower_holds = rep.worst_lower <= rel_tol;
  rep.literal_upper_holds = rep.worst_literal <= rel_tol;
  rep.corrected_upper_holds = rep.worst_corrected <= rel_tol;
  return rep;
}

}  // namespace fgap
