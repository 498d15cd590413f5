#pragma once

#include <string>
#include <utility>
#include <vector>

#include "droopsim/baseline.hpp"
#include "droopsim/config.hpp"
#include "droopsim/mrac.hpp"
#include "droopsim/plant.hpp"
#include "droopsim/types.hpp"

namespace droopsim::scenario {

enum class ControllerKind { kAdaptive, kPi, kNone };

std::string to_string(ControllerKind k);
ControllerKind controller_from_string(const std::string& s, int line = -1);

/// Timed change applied while a run is in progress. `node` is 1-based;
/// node 0 targets every converter.
struct Event {
  enum class Action { kEnableCurrent, kEnableVoltage, kSetLoad };
  double t = 0.0;
  Action action = Action::kEnableCurrent;
  int node = 0;
  LoadModel load;  // used by kSetLoad only
};

/// A complete, validated run description.
struct Scenario {
  std::string name = "scenario";
  double duration = 2.0;
  double dt = 5e-5;        // plant integration step [s]
  double ctrl_dt = 1e-2;   // secondary-control / messaging tick [s]
  double record_dt = 1e-3; // trace sampling period [s]
  double v_nominal = 400.0;
  ControllerKind controller = ControllerKind::kAdaptive;

  plant::Params plant_params;

  bool graph_full = true;
  std::vector<std::pair<int, int>> graph_edges;  // 0-based (sender, receiver)
  int comm_delay_ticks = 1;

  mrac::Config voltage_cfg;  // shared by all nodes' voltage loops
  mrac::Config current_cfg;  // shared by all nodes' current loops
  double sign_hyst = 0.05;   // current-sign hysteresis band [A]

  baseline::PiConfig pi;

  std::vector<Event> events;  // kept sorted by time

  double metrics_window = 4.0;  // scoring window length ending at `duration`

  int n() const { return plant_params.n(); }
  int steps() const;         // duration / dt, validated integral
  int ctrl_every() const;    // ctrl_dt / dt, validated integral
  int record_every() const;  // record_dt / dt, validated integral
  void validate() const;
};

/// Builds a scenario from a parsed configuration table; throws ConfigError
/// (with line numbers) on unknown keys, bad types, or invalid values.
Scenario from_table(const config::Table& root, const std::string& name);

/// Parses and validates a scenario file.
Scenario load_scenario(const std::string& path);

}  // namespace droopsim::scenario
