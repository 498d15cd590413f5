#pragma once

#include <string>
#include <vector>

#include "droopsim/scenario.hpp"
#include "droopsim/trace.hpp"
#include "droopsim/types.hpp"

namespace droopsim::sim {

/// Settling analysis of the stretch between one event and the next (2% band
/// around the segment's final value). NaN marks a signal still outside its
/// band at the segment end.
struct Segment {
  double t_start = 0.0;
  double t_end = 0.0;
  std::string label;
  Vec i_settle;            // per converter, seconds after t_start
  double v_settle = 0.0;   // bus voltage, seconds after t_start
};

/// End-of-run figures plus adaptation safety extrema collected across every
/// loop of every node.
struct Summary {
  double final_v_bus = 0.0;
  Vec final_i_line;
  Vec final_droops;
  double sharing_ratio = 0.0;  // i1/i2 (two-converter runs; else NaN)
  double ise_v = 0.0;          // over the last metrics_window seconds
  double ise_i = 0.0;
  std::vector<Segment> segments;  // one per distinct event time
  double max_theta_ratio = 0.0;  // sup ||theta|| / m_theta
  double max_b_ratio = 0.0;      // sup |b_hat| / m_b
  double min_m = 1.0;            // inf of the normalization signal
  double max_phi_ratio = 0.0;    // sup ||phi_n|| / m
  double max_un_ratio = 0.0;     // sup |u_n| / m
  int cpl_clamp_events = 0;      // constant-power floor engagements
};

struct RunResult {
  Trace trace;
  Summary summary;
  std::vector<std::string> log;  // applied events and controller faults
};

/// Runs a validated scenario: plant integrated at sc.dt, secondary control
/// and messaging ticked every sc.ctrl_dt, one trace row per sc.record_dt
/// plus a final row at t = duration. The run starts at the droop
/// equilibrium of the initial load. Throws SimulationFault if the state
/// leaves the finite range.
RunResult run(const scenario::Scenario& sc);

/// Deterministic human-readable report of a finished run.
std::string summary_text(const scenario::Scenario& sc, const RunResult& rr);

}  // namespace droopsim::sim
