#pragma once

namespace droopsim {

/// Classical fixed-step RK4. Works for any state supporting `x + dt * k`
/// (double, Eigen vectors, ...). `f(t, x)` must return dx/dt.
template <class State, class Deriv>
State rk4_step(double t, const State& x, double dt, Deriv&& f) {
  const State k1 = f(t, x);
  const State k2 = f(t + 0.5 * dt, State(x + (0.5 * dt) * k1));
  const State k3 = f(t + 0.5 * dt, State(x + (0.5 * dt) * k2));
  const State k4 = f(t + dt, State(x + dt * k3));
  return State(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace droopsim
