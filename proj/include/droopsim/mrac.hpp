#pragma once

#include <utility>

#include "droopsim/types.hpp"

namespace droopsim::mrac {

/// Closed-reference-model adaptive controller configuration for a scalar
/// first-order plant dx/dt = a x + b u with unknown (a, b) and known sign(b).
struct Config {
  double a_m = -10.0;     // reference-model pole (< 0)
  double b_m = 10.0;      // reference-model input gain
  double fb_l = -10.0;    // tracking-error feedback gain into the model (<= 0)
  double gamma0 = 1000.0; // base adaptation gain (> 0)
  double m_theta = 50.0;  // norm bound on the gain vector theta
  double m_b = 50.0;      // magnitude bound on the estimate b_hat
  int sign_b = 1;         // known sign of the control gain, +1 or -1
  double r0 = 1.0;        // setpoint scale the base gain was tuned at
  double alpha_min = 0.1; // lower clamp on the setpoint scale
  double b_init = 0.1;    // |b_hat| at reset
  Vec2 theta0{0.0, 0.0};  // theta at reset
  bool gain_scheduling = true;      // divide gamma0 by (r/r0)^2
  bool legacy_unnormalized = false; // raw gradient law, no estimator
  void validate() const;
};

/// Adaptation state plus the internal filter and reference-model states.
struct State {
  Vec2 theta{0.0, 0.0};  // [feedback gain, feedforward gain]
  double b_hat = 0.0;    // control-gain estimate
  double x_m = 0.0;      // reference-model state
  Vec2 phi_n{0.0, 0.0};  // filtered regressor
  double u_n = 0.0;      // filtered control
  double gamma_k = 0.0;  // currently scheduled adaptation gain
};

/// Per-step diagnostics and running safety extrema.
struct Diagnostics {
  double e = 0.0;      // tracking error x - x_m
  double e_hat = 0.0;  // estimator's reconstruction of e
  double eps = 0.0;    // normalized modeling error
  double m = 1.0;      // normalization signal
  double max_theta_ratio = 0.0;  // sup ||theta|| / m_theta
  double max_b_ratio = 0.0;      // sup |b_hat| / m_b
  double min_m = 1.0;            // inf m
  double max_phi_ratio = 0.0;    // sup ||phi_n|| / m
  double max_un_ratio = 0.0;     // sup |u_n| / m
};

/// Scheduled adaptation gain: gamma0 / max(|r|/r0, alpha_min)^2, or plain
/// gamma0 when scheduling is disabled.
double scheduled_gain(const Config& cfg, double r);

/// Gradient projection keeping ||theta|| <= m_theta: passes the raw update
/// through when theta is interior or the update points inward; otherwise
/// removes the radial component.
Vec2 project_theta(const Vec2& theta_dot0, const Vec2& theta, double m_theta);

class Controller {
 public:
  explicit Controller(Config cfg);

  /// Re-arm the loop around the current measurement: reference model starts
  /// at `x_measured` (zero initial tracking error), filters and estimates
  /// return to their configured initial values.
  void reset(double x_measured);

  /// One controller tick: consumes the measurement x and setpoint r, adapts,
  /// and returns the control u to hold for the next dt seconds.
  double step(double x, double r, double dt);

  // --- the individual pieces, exposed for tests and diagnostics ---

  /// Advance the reference model dx_m/dt = a_m x_m + b_m r - fb_l * e.
  void reference_step(double r, double e, double dt);

  /// Current control law u = theta . [x, r].
  double control_output(double x, double r) const;

  /// Advance the regressor/control filters d(.)/dt = (a_m + fb_l)(.) + input.
  void filter_step(double x, double r, double u, double dt);

  /// Normalized modeling error: returns (eps, m) where
  /// eps = (e - b_hat (u_n - theta . phi_n)) / m^2 and
  /// m^2 = 1 + phi_n . phi_n + u_n^2.
  std::pair<double, double> modeling_error(double e) const;

  /// Projected-gradient parameter update, explicit Euler over dt, using the
  /// currently scheduled gain. Enforces the parameter bounds afterwards.
  void adapt_step(double e, double dt);

  /// Quadratic parameter-error functional
  /// (|b| ||theta - theta*||^2 + (b_hat - b)^2) / (2 gamma_k)
  /// against a known true plant; test harness use only.
  double lyapunov_value(double true_a, double true_b) const;

  /// Update the assumed sign of the control gain; flips b_hat with it.
  void set_sign_b(int sign);

  int sign_b() const { return sign_b_; }
  bool frozen() const { return frozen_; }
  const Config& config() const { return cfg_; }
  const State& state() const { return st_; }
  const Diagnostics& diag() const { return diag_; }

 private:
  Config cfg_;
  State st_;
  Diagnostics diag_;
  int sign_b_;
  bool frozen_ = false;
  double last_u_ = 0.0;

  void note_extrema();
};

}  // namespace droopsim::mrac
