#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace droopsim {

using Vec = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;
using Mat = Eigen::MatrixXd;

/// Scenario or parameter validation failure. Carries a config-file line
/// number when the problem was found while parsing a scenario file.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = -1)
      : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")"
                                     : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// The simulation produced a non-finite state (or was fed one).
class SimulationFault : public std::runtime_error {
 public:
  SimulationFault(const std::string& reason, double t)
      : std::runtime_error(reason + " at t=" + std::to_string(t) + " s"),
        reason_(reason),
        t_(t) {}
  /// Message without the time suffix, for re-throwing with a known time.
  const std::string& reason() const { return reason_; }
  double time() const { return t_; }

 private:
  std::string reason_;
  double t_;
};

/// Static parameters of one droop-controlled converter: a voltage source
/// V_ref - R_d * i behind a first-order voltage loop with time constant tau_v.
struct ConverterParams {
  double v_ref = 400.0;  // reference voltage [V]
  double tau_v = 5e-3;   // voltage-loop time constant [s]
  double i_rated = 10.0; // per-unit current base [A]
  double r_d0 = 1.0;     // initial droop resistance [ohm]
  void validate() const;
};

/// Cable between a converter terminal and the common bus.
struct LineParams {
  double r = 0.5;   // resistance [ohm]
  double l = 3e-3;  // inductance [H]
  void validate() const;
};

/// Load attached to the common bus. `value` is ohms, watts or amps
/// depending on the kind.
struct LoadModel {
  enum class Kind { kResistive, kConstantPower, kConstantCurrent };
  Kind kind = Kind::kResistive;
  double value = 1.0;

  static LoadModel resistive(double ohms) { return {Kind::kResistive, ohms}; }
  static LoadModel constant_power(double watts) {
    return {Kind::kConstantPower, watts};
  }
  static LoadModel constant_current(double amps) {
    return {Kind::kConstantCurrent, amps};
  }
  void validate() const;
};

}  // namespace droopsim
