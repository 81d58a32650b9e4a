#pragma once

#include "fgap/core.hpp"

#include <boost/numeric/odeint.hpp>

namespace fgap {

using State = std::vector<double>;
using Rhs = std::function<void(const State&, State&, double)>;

struct OdeOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double initial_step = 1e-3;
  double min_step = 1e-14;
  std::size_t max_steps = 2000000;
};

// Accepted steps (t, y, y') with cubic Hermite dense output.
struct Trajectory {
  std::vector<double> t;
  std::vector<State> y;
  std::vector<State> dy;

  double t0() const { return t.front(); }
  double t1() const { return t.back(); }
  bool forward() const { return t.size() < 2 || t.back() >= t.front(); }

  std::size_t locate(double s) const {
    // index i with s in [t_i, t_{i+1}] (or reversed when integrating backwards)
    if (t.size() < 2) return 0;
    if (forward()) {
      auto it = std::upper_bound(t.begin(), t.end(), s);
      std::size_t i = it == t.begin() ? 0 : std::size_t(it - t.begin()) - 1;
      return std::min(i, t.size() - 2);
    }
    auto it = std::upper_bound(t.begin(), t.end(), s, [](double a, double b) { return a > b; });
    std::size_t i = it == t.begin() ? 0 : std::size_t(it - t.begin()) - 1;
    return std::min(i, t.size() - 2);
  }

  // Hermite interpolation of the state (and optionally its derivative).
  State at(double s, State* deriv = nullptr) const {
    const std::size_t i = locate(s);
    if (t.size() < 2) {
      if (deriv) *deriv = dy[0];
      return y[0];
    }
    const double h = t[i + 1] - t[i];
    const double u = (s - t[i]) / h;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    const double d00 = 6 * u * u - 6 * u, d10 = 3 * u * u - 4 * u + 1, d01 = -6 * u * u + 6 * u, d11 = 3 * u * u - 2 * u;
    const std::size_t n = y[i].size();
    State out(n);
    if (deriv) deriv->assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      out[k] = h00 * y[i][k] + h10 * h * dy[i][k] + h01 * y[i + 1][k] + h11 * h * dy[i + 1][k];
      if (deriv) (*deriv)[k] = (d00 * y[i][k] + d01 * y[i + 1][k]) / h + d10 * dy[i][k] + d11 * dy[i + 1][k];
    }
    return out;
  }
};

// Stop predicate evaluated after each accepted step; returning true ends the
// integration at that step (the caller refines the event location).
using StopFn = std::function<bool(double, const State&)>;

inline Trajectory integrate(const Rhs& f, State y0, double t0, double t1, const OdeOptions& opt = {},
                            const StopFn& stop = nullptr,
                            const std::function<void(double, const State&)>& check = nullptr) {
  namespace odeint = boost::numeric::odeint;
  // Controlled dopri5; the last step is clipped so the end point is a true step.
  auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  auto sys = [&f](const State& x, State& dxdt, double t) { f(x, dxdt, t); };

  Trajectory tr;
  auto record = [&](double t, const State& y) {
    State d(y.size());
    f(y, d, t);
    tr.t.push_back(t);
    tr.y.push_back(y);
    tr.dy.push_back(std::move(d));
  };
  if (check) check(t0, y0);
  record(t0, y0);
  if (t0 == t1) return tr;

  State x = y0;
  double t = t0;
  double dt = dir * std::min(opt.initial_step, std::abs(t1 - t0));
  std::size_t steps = 0;
  while (dir * (t1 - t) > 0) {
    if (++steps > opt.max_steps) fail(ErrorCode::integration_failure, "step budget exhausted");
    const bool last = dir * (t + dt - t1) >= 0;
    if (last) dt = t1 - t;
    odeint::controlled_step_result res;
    try {
      res = stepper.try_step(sys, x, t, dt);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      fail(ErrorCode::integration_failure, e.what());
    }
    if (res == odeint::fail) {
      if (std::abs(dt) < opt.min_step) fail(ErrorCode::step_collapse, "step size below minimum");
      continue;
    }
    if (last) t = t1;  // remove round-off in t + dt
    for (double v : x)
      if (!std::isfinite(v)) fail(ErrorCode::integration_failure, "non-finite state");
    if (check) check(t, x);
    record(t, x);
    if (stop && stop(t, x)) break;
  }
  return tr;
}

}  // namespace fgap
