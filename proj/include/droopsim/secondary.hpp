#pragma once

#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "droopsim/mrac.hpp"
#include "droopsim/types.hpp"

namespace droopsim::secondary {

/// Directed communication graph. adj(i, j) == 1 means node i hears node j.
struct CommGraph {
  int n = 0;
  Eigen::MatrixXi adj;

  static CommGraph full(int n);
  static CommGraph from_edges(int n,
                              const std::vector<std::pair<int, int>>& edges);
  std::vector<int> in_neighbors(int i) const;
  void validate() const;  // zero diagonal, every node hears someone
};

/// One published sample of a node's per-unit terminal state.
struct Message {
  int sender = 0;
  double v_pu = 0.0;
  double i_pu = 0.0;
  double sent_at = 0.0;
};

/// FIFO transport for one edge with a fixed delivery delay.
class DelayLine {
 public:
  explicit DelayLine(double delay) : delay_(delay) {}
  void push(const Message& msg) { queue_.push_back(msg); }
  /// Pops every message whose sent_at + delay has passed, in send order.
  std::vector<Message> pop_due(double now);
  std::size_t pending() const { return queue_.size(); }
  double delay() const { return delay_; }

 private:
  double delay_;
  std::deque<Message> queue_;
};

/// All edges of a graph with per-edge delay lines and deterministic
/// delivery ordering by (due time, sender id).
class Network {
 public:
  Network(CommGraph graph, double delay);
  /// Queue `msg` on every out-edge of its sender.
  void publish(const Message& msg);
  /// Deliver everything due at `now`; result is indexed by receiving node.
  std::vector<std::vector<Message>> tick(double now);
  const CommGraph& graph() const { return graph_; }

 private:
  CommGraph graph_;
  // lines_[receiver][k] transports from in_neighbors(receiver)[k].
  std::vector<std::vector<DelayLine>> lines_;
};

/// Last heard values per in-neighbor.
struct PeerCache {
  std::vector<int> peers;       // sender ids, ascending
  std::vector<bool> heard;
  std::vector<double> i_pu;
  std::vector<double> v_pu;

  explicit PeerCache(const std::vector<int>& in_peers);
  void update(const Message& msg);
  bool any() const;
};

/// Consensus quantities computed each tick.
struct Refs {
  double i_ref_pu = 0.0;  // neighbor average of per-unit currents
  double v_bar_pu = 0.0;  // average of own and neighbor per-unit voltages
};

/// Neighbor-average current reference (own value excluded) and voltage
/// average (own value included). Falls back to `prev` until the first
/// neighbor message has arrived.
Refs consensus_references(const PeerCache& cache, double own_v_pu,
                          const Refs& prev);

/// Everything one distributed-secondary-control node needs besides the
/// shared graph: two adaptive loops and the droop composition.
struct NodeConfig {
  mrac::Config voltage;
  mrac::Config current;
  double r_d0 = 1.0;      // conventional droop the loops add onto [ohm]
  double i_base = 10.0;   // per-unit current base [A]
  double v_base = 400.0;  // per-unit voltage base [V]
  double sign_hyst = 0.05;  // current hysteresis band for sign(b) [A]
};

class DscNode {
 public:
  DscNode(int id, NodeConfig cfg);

  std::pair<double, double> per_unit(double i_amps, double v_volts) const;

  /// Enable with the loop's reference model started on the present
  /// measurement so the hand-off is bumpless.
  void enable_voltage(double v_bar_pu_now);
  void enable_current(double i_pu_now);
  bool voltage_enabled() const { return v_on_; }
  bool current_enabled() const { return i_on_; }

  /// One secondary tick: runs whatever loops are enabled and returns the
  /// composed droop r_d0 + R_V + R_I. Disabled loops contribute zero and do
  /// not adapt. A loop fed a non-finite signal freezes its parameters and
  /// holds its last finite contribution; the event is recorded.
  double dsc_step(double i_amps, double i_pu, double v_bar_pu, double i_ref_pu,
                  double dt);

  double r_v() const { return r_v_; }
  double r_i() const { return r_i_; }
  double droop() const { return droop_; }
  int id() const { return id_; }
  const mrac::Controller& voltage_loop() const { return v_ctrl_; }
  const mrac::Controller& current_loop() const { return i_ctrl_; }
  const std::vector<std::string>& events() const { return events_; }
  const NodeConfig& config() const { return cfg_; }

 private:
  int id_;
  NodeConfig cfg_;
  mrac::Controller v_ctrl_;
  mrac::Controller i_ctrl_;
  bool v_on_ = false;
  bool i_on_ = false;
  int sign_i_ = 1;  // sign of the line current, hysteresis-filtered
  double r_v_ = 0.0;
  double r_i_ = 0.0;
  double droop_;
  bool v_fault_noted_ = false;
  bool i_fault_noted_ = false;
  std::vector<std::string> events_;
};

}  // namespace droopsim::secondary
