#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fgap {

// Small fixed-capacity types: dimension is 2 or 3, no heap traffic in hot loops.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using ChartPoint = Vec;

constexpr double kPi = std::numbers::pi;

enum class ErrorCode {
  point_outside_chart,
  degenerate_plane,
  tube_exceeds_chart,
  bad_initial_speed,
  left_chart,
  step_collapse,
  no_convergence,
  integration_failure,
  tube_too_large,
  insufficient_levels,
  near_conjugate,
  eigenvalue_collision,
  invalid_boundary_heights,
  hypothesis_violation,
  gate_failed,
  audit_failed,
  boundary_left_tube,
  corner_not_found,
  slice_outside_domain,
  containment_violated,
  closure_diverged,
  empty_bulk,
  no_admissible_rho,
  convexity_violated,
  quality_failure,
  h_too_coarse,
  quadrature_point_outside_chart,
  solver_stagnation,
  factorization_failure,
  zero_function,
  interpolation_outside_mesh,
  profile_too_coarse,
  insufficient_sweep,
  positive_slope,
  delta_too_large,
  neck_not_resolved,
  no_sign_change,
  insufficient_data,
  non_decaying,
  invalid_argument,
  validation,
  io_failure,
  cache_mismatch,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::point_outside_chart: return "point-outside-chart";
    case ErrorCode::degenerate_plane: return "degenerate-plane";
    case ErrorCode::tube_exceeds_chart: return "tube-exceeds-chart";
    case ErrorCode::bad_initial_speed: return "bad-initial-speed";
    case ErrorCode::left_chart: return "left-chart";
    case ErrorCode::step_collapse: return "step-collapse";
    case ErrorCode::no_convergence: return "no-convergence";
    case ErrorCode::integration_failure: return "integration-failure";
    case ErrorCode::tube_too_large: return "tube-too-large";
    case ErrorCode::insufficient_levels: return "insufficient-levels";
    case ErrorCode::near_conjugate: return "near-conjugate";
    case ErrorCode::eigenvalue_collision: return "eigenvalue-collision";
    case ErrorCode::invalid_boundary_heights: return "invalid-boundary-heights";
    case ErrorCode::hypothesis_violation: return "hypothesis-violation";
    case ErrorCode::gate_failed: return "gate-failed";
    case ErrorCode::audit_failed: return "audit-failed";
    case ErrorCode::boundary_left_tube: return "boundary-left-tube";
    case ErrorCode::corner_not_found: return "corner-not-found";
    case ErrorCode::slice_outside_domain: return "slice-outside-domain";
    case ErrorCode::containment_violated: return "containment-violated";
    case ErrorCode::closure_diverged: return "closure-diverged";
    case ErrorCode::empty_bulk: return "empty-bulk";
    case ErrorCode::no_admissible_rho: return "no-admissible-rho";
    case ErrorCode::convexity_violated: return "convexity-violated";
    case ErrorCode::quality_failure: return "quality-failure";
    case ErrorCode::h_too_coarse: return "h-too-coarse";
    case ErrorCode::quadrature_point_outside_chart: return "quadrature-point-outside-chart";
    case ErrorCode::solver_stagnation: return "solver-stagnation";
    case ErrorCode::factorization_failure: return "factorization-failure";
    case ErrorCode::zero_function: return "zero-function";
    case ErrorCode::interpolation_outside_mesh: return "interpolation-outside-mesh";
    case ErrorCode::profile_too_coarse: return "profile-too-coarse";
    case ErrorCode::insufficient_sweep: return "insufficient-sweep";
    case ErrorCode::positive_slope: return "positive-slope";
    case ErrorCode::delta_too_large: return "delta-too-large";
    case ErrorCode::neck_not_resolved: return "neck-not-resolved";
    case ErrorCode::no_sign_change: return "no-sign-change";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::non_decaying: return "non-decaying";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::validation: return "validation";
    case ErrorCode::io_failure: return "io-failure";
    case ErrorCode::cache_mismatch: return "cache-mismatch";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

// Ordinary least squares y = a + b x.
struct LineFit {
  double intercept = 0;
  double slope = 0;
  double r2 = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  require(n >= 2 && y.size() == n, ErrorCode::insufficient_data, "line fit needs >= 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

// Runs body(i) for i in [0,n) on up to `workers` threads. Work is claimed
// dynamically; callers write results into slot i so output order never depends
// on scheduling.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned t = std::min<unsigned>(workers, unsigned(n));
  for (unsigned k = 0; k < t; ++k) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline unsigned default_workers() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1u : hc;
}

// Brent-free scalar bisection on a sign change; f(lo) and f(hi) must differ in sign.
template <class F>
double bisect_root(F&& f, double lo, double hi, double tol, int max_iter = 200) {
  double flo = f(lo);
  for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace fgap
