#pragma once

#include "droopsim/mrac.hpp"
#include "droopsim/plant.hpp"
#include "droopsim/secondary.hpp"

namespace droopsim::bench {

inline constexpr double kBusVoltage = 400.0;

/// Reference two-converter bench: a 4 kW unit (10 A base, 1 ohm droop seed)
/// and a 2 kW unit (5 A base, 2 ohm droop seed), each on a 0.5 ohm / 3 mH
/// cable into one 400 V bus.
inline plant::Params two_converter_plant(const LoadModel& load) {
  plant::Params p;
  p.converters = {ConverterParams{400.0, 5e-3, 10.0, 1.0},
                  ConverterParams{400.0, 5e-3, 5.0, 2.0}};
  p.lines = {LineParams{0.5, 3e-3}, LineParams{0.5, 3e-3}};
  p.load = load;
  return p;
}

/// Shared adaptive-loop settings: reference model 10/(s+10), closed-model
/// feedback -10, base gain 1000 scheduled against a unit setpoint scale.
inline mrac::Config loop_config() { return mrac::Config{}; }

/// Secondary-node settings for one converter of the bench.
inline secondary::NodeConfig node_config(const ConverterParams& c) {
  secondary::NodeConfig n;
  n.voltage = loop_config();
  n.current = loop_config();
  n.r_d0 = c.r_d0;
  n.i_base = c.i_rated;
  n.v_base = c.v_ref;
  return n;
}

}  // namespace droopsim::bench
