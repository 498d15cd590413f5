#pragma once

#include <vector>

#include "droopsim/types.hpp"

namespace droopsim::plant {

/// Electrical network: N droop converters feeding one bus through RL cables,
/// with a single lumped load on the bus.
struct Params {
  std::vector<ConverterParams> converters;
  std::vector<LineParams> lines;
  LoadModel load = LoadModel::resistive(50.0);
  double i_floor = 0.05;  // constant-power regularization floor [A]
  double cc_rate = 1e3;   // constant-current bus relaxation rate [1/s]
  double dt_max = 1e-3;   // largest accepted integration step [s]

  int n() const { return static_cast<int>(converters.size()); }
  void validate() const;
};

/// Dynamic state. `v_conv` and `i_line` are the ODE states; `v_bus` and
/// `i_load` are algebraic and recomputed after every accepted step, so
/// i_load == i_line.sum() always holds on a returned state.
struct State {
  Vec v_conv;
  Vec i_line;
  double v_bus = 0.0;
  double i_load = 0.0;
  bool finite() const;
};

/// Bus voltage for load models whose V(i) curve depends only on the total
/// current (resistive, constant-power). Constant-current loads need line
/// context; use solve_bus for those. `clamped` is set when the
/// constant-power floor engages (total current at or below i_floor).
double bus_voltage(double i_total, const LoadModel& load, double i_floor = 0.05,
                   bool* clamped = nullptr);

/// Bus voltage for any load model given the full line state. For
/// constant-current loads the bus is placed so the summed line current
/// relaxes onto the demanded current at rate cc_rate; at any equilibrium the
/// delivered total then equals the demand exactly.
double solve_bus(const Vec& v_conv, const Vec& i_line, const Params& p,
                 bool* clamped = nullptr);

/// Right-hand side of the converter/line ODEs under the given droops.
void derivatives(const State& s, const Vec& droops, const Params& p,
                 Vec& dv_conv, Vec& di_line);

/// One RK4 step of length dt (dt must be in (0, dt_max]). Throws
/// SimulationFault if the state leaves the finite range. `clamp_events` is
/// incremented when the constant-power floor engages during the step.
State step(const State& s, const Vec& droops, const Params& p, double dt,
           double t = 0.0, int* clamp_events = nullptr);

/// Steady-state current ratio i1/i2 of two droop sources with equal
/// reference voltages: (r_d2 + r_2) / (r_d1 + r_1).
double steady_state_ratio(double r_d1, double r_d2, double r_1, double r_2);

/// Closed-form equilibrium for fixed droops, used to warm-start runs.
/// Requires r_d + r > 0 for every converter.
State equilibrium(const Params& p, const Vec& droops);

}  // namespace droopsim::plant
