#pragma once

#include "droopsim/plant.hpp"
#include "droopsim/types.hpp"

namespace droopsim::smallsignal {

/// First-order transfer function b / (s - a) with a < 0.
struct FirstOrderTf {
  double gain_b = 0.0;  // numerator
  double pole_a = -1.0; // pole (negative for a stable model)
  double dc_gain() const { return gain_b / -pole_a; }
  double time_constant() const { return -1.0 / pole_a; }
};

/// Linearization point for one converter: the current it carries, its droop
/// resistance and cable, and its voltage-loop time constant.
struct OperatingPoint {
  double i_op = 6.0;   // converter output current [A]
  double r_d = 1.0;    // droop resistance [ohm]
  LineParams line;     // cable to the bus
  double tau_v = 5e-3; // voltage-loop time constant [s]

  /// Total source resistance droop + cable.
  double rho() const { return r_d + line.r; }
  void validate() const;
};

/// Droop-to-bus-voltage sensitivity with the converter current held fixed
/// (stiff current sink on the bus): a single lag at the voltage loop,
///   delta_v_bus / delta_r_d = -i_op / (1 + tau_v s).
FirstOrderTf voltage_sensitivity(const OperatingPoint& op);

/// Droop-to-line-current sensitivity with the bus voltage held fixed (stiff
/// voltage source on the bus). DC gain -i_op / rho; the voltage-loop lag and
/// the cable lag l/rho are folded into one equivalent time constant
/// tau_v + l/rho (sum-of-lags single-pole fit).
FirstOrderTf current_sensitivity(const OperatingPoint& op);

/// Finite-difference check of both DC gains against the nonlinear plant.
struct ValidationReport {
  double dc_voltage_model = 0.0;  // analytic delta_v_bus / delta_r_d
  double dc_voltage_plant = 0.0;  // measured on the simulated plant
  double voltage_rel_err = 0.0;
  double dc_current_model = 0.0;  // analytic delta_i / delta_r_d
  double dc_current_plant = 0.0;
  double current_rel_err = 0.0;
};

/// Runs two plant experiments that realize the models' boundary conditions
/// and compares finite-difference DC gains against the analytic ones:
///  - a constant-current load pins the converter current while the droop is
///    perturbed (voltage sensitivity);
///  - a stiff zero-droop companion source pins the bus voltage while the
///    droop is perturbed (current sensitivity).
/// Each run is integrated to steady state (quantity flat to 1e-4 over a
/// 0.1 s window; 5 s cap). `delta_rd` must be positive and at most 1% of
/// rho to stay in the small-signal regime.
ValidationReport validate_against_plant(const OperatingPoint& op,
                                        double delta_rd,
                                        double v_bus_target = 400.0);

}  // namespace droopsim::smallsignal
