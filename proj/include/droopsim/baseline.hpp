#pragma once

#include <utility>

#include "droopsim/types.hpp"

namespace droopsim::baseline {

/// Fixed-gain PI pair used as the non-adaptive comparison controller. The
/// output sign convention matches the plant's negative droop-to-output
/// gains: a positive error (signal below its reference) lowers the droop.
struct PiConfig {
  double kp_v = 0.0;
  double ki_v = 0.0;
  double kp_i = 0.0;
  double ki_i = 0.0;
  double clamp = 10.0;  // integrator magnitude limit [ohm]
  void validate() const;
};

struct PiState {
  double integ_v = 0.0;
  double integ_i = 0.0;
};

/// One PI tick. Returns (R_V, R_I) droop contributions; integrators are
/// clamped to +-cfg.clamp before the output is formed (anti-windup).
std::pair<double, double> pi_step(PiState& st, const PiConfig& cfg,
                                  double e_v, double e_i, double dt);

/// Drop-in counterpart of the adaptive secondary node: same measurements,
/// same references, same droop composition, fixed gains inside.
class PiNode {
 public:
  PiNode(int id, PiConfig cfg, double r_d0, double i_base, double v_base);

  std::pair<double, double> per_unit(double i_amps, double v_volts) const {
    return {i_amps / i_base_, v_volts / v_base_};
  }
  void enable_voltage() { v_on_ = true; }
  void enable_current() { i_on_ = true; }
  bool voltage_enabled() const { return v_on_; }
  bool current_enabled() const { return i_on_; }

  double step(double i_pu, double v_bar_pu, double i_ref_pu, double dt);

  double r_v() const { return r_v_; }
  double r_i() const { return r_i_; }
  double droop() const { return droop_; }
  int id() const { return id_; }
  const PiState& state() const { return st_; }

 private:
  int id_;
  PiConfig cfg_;
  double r_d0_;
  double i_base_;
  double v_base_;
  PiState st_;
  bool v_on_ = false;
  bool i_on_ = false;
  double r_v_ = 0.0;
  double r_i_ = 0.0;
  double droop_;
};

}  // namespace droopsim::baseline
