#include "droopsim/secondary.hpp"

#include <algorithm>
#include <cmath>

namespace droopsim::secondary {

CommGraph CommGraph::full(int n) {
  CommGraph g;
  g.n = n;
  g.adj = Eigen::MatrixXi::Ones(n, n);
  g.adj.diagonal().setZero();
  return g;
}

CommGraph CommGraph::from_edges(int n,
                                const std::vector<std::pair<int, int>>& edges) {
  CommGraph g;
  g.n = n;
  g.adj = Eigen::MatrixXi::Zero(n, n);
  for (const auto& [from, to] : edges) {
    if (from < 0 || from >= n || to < 0 || to >= n)
      throw ConfigError("graph edge references a node outside 0..n-1");
    if (from == to) throw ConfigError("graph self-edges are not allowed");
    g.adj(to, from) = 1;
  }
  return g;
}

std::vector<int> CommGraph::in_neighbors(int i) const {
  std::vector<int> out;
  for (int j = 0; j < n; ++j)
    if (adj(i, j) != 0) out.push_back(j);
  return out;
}

void CommGraph::validate() const {
  if (n < 1) throw ConfigError("graph needs at least one node");
  if (adj.rows() != n || adj.cols() != n)
    throw ConfigError("graph adjacency must be n x n");
  for (int i = 0; i < n; ++i) {
    if (adj(i, i) != 0) throw ConfigError("graph diagonal must be zero");
    if (n > 1 && adj.row(i).sum() == 0)
      throw ConfigError("node " + std::to_string(i + 1) +
                        " has no in-neighbors");
  }
}

std::vector<Message> DelayLine::pop_due(double now) {
  std::vector<Message> out;
  // FIFO with monotone send times: due messages sit at the front.
  while (!queue_.empty() &&
         queue_.front().sent_at + delay_ <= now + 1e-12) {
    out.push_back(queue_.front());
    queue_.pop_front();
  }
  return out;
}

Network::Network(CommGraph graph, double delay) : graph_(std::move(graph)) {
  graph_.validate();
  if (delay < 0.0) throw ConfigError("message delay must be >= 0");
  lines_.resize(graph_.n);
  for (int i = 0; i < graph_.n; ++i) {
    const auto peers = graph_.in_neighbors(i);
    lines_[i].assign(peers.size(), DelayLine(delay));
  }
}

void Network::publish(const Message& msg) {
  for (int i = 0; i < graph_.n; ++i) {
    const auto peers = graph_.in_neighbors(i);
    for (std::size_t k = 0; k < peers.size(); ++k)
      if (peers[k] == msg.sender) lines_[i][k].push(msg);
  }
}

std::vector<std::vector<Message>> Network::tick(double now) {
  std::vector<std::vector<Message>> delivered(graph_.n);
  for (int i = 0; i < graph_.n; ++i) {
    for (auto& line : lines_[i]) {
      auto due = line.pop_due(now);
      delivered[i].insert(delivered[i].end(), due.begin(), due.end());
    }
    std::stable_sort(delivered[i].begin(), delivered[i].end(),
                     [](const Message& a, const Message& b) {
                       if (a.sent_at != b.sent_at) return a.sent_at < b.sent_at;
                       return a.sender < b.sender;
                     });
  }
  return delivered;
}

PeerCache::PeerCache(const std::vector<int>& in_peers)
    : peers(in_peers),
      heard(in_peers.size(), false),
      i_pu(in_peers.size(), 0.0),
      v_pu(in_peers.size(), 0.0) {}

void PeerCache::update(const Message& msg) {
  for (std::size_t k = 0; k < peers.size(); ++k) {
    if (peers[k] == msg.sender) {
      heard[k] = true;
      i_pu[k] = msg.i_pu;
      v_pu[k] = msg.v_pu;
      return;
    }
  }
}

bool PeerCache::any() const {
  return std::any_of(heard.begin(), heard.end(), [](bool h) { return h; });
}

Refs consensus_references(const PeerCache& cache, double own_v_pu,
                          const Refs& prev) {
  double sum_i = 0.0, sum_v = 0.0;
  int count = 0;
  for (std::size_t k = 0; k < cache.peers.size(); ++k) {
    if (!cache.heard[k]) continue;
    sum_i += cache.i_pu[k];
    sum_v += cache.v_pu[k];
    ++count;
  }
  if (count == 0) return prev;
  Refs out;
  out.i_ref_pu = sum_i / count;
  out.v_bar_pu = (own_v_pu + sum_v) / (1.0 + count);
  return out;
}

DscNode::DscNode(int id, NodeConfig cfg)
    : id_(id),
      cfg_(cfg),
      v_ctrl_(cfg.voltage),
      i_ctrl_(cfg.current),
      droop_(cfg.r_d0) {
  if (!(cfg_.i_base > 0.0) || !(cfg_.v_base > 0.0))
    throw ConfigError("per-unit bases must be > 0");
  if (!(cfg_.sign_hyst >= 0.0))
    throw ConfigError("sign hysteresis must be >= 0");
}

std::pair<double, double> DscNode::per_unit(double i_amps,
                                            double v_volts) const {
  return {i_amps / cfg_.i_base, v_volts / cfg_.v_base};
}

void DscNode::enable_voltage(double v_bar_pu_now) {
  v_ctrl_.reset(v_bar_pu_now);
  v_on_ = true;
  v_fault_noted_ = false;
}

void DscNode::enable_current(double i_pu_now) {
  i_ctrl_.reset(i_pu_now);
  i_on_ = true;
  i_fault_noted_ = false;
}

double DscNode::dsc_step(double i_amps, double i_pu, double v_bar_pu,
                         double i_ref_pu, double dt) {
  // Control-gain sign follows -sign(i) with a hysteresis band so sensor
  // chatter around zero cannot flip the adaptation direction every tick.
  if (std::isfinite(i_amps)) {
    if (i_amps > cfg_.sign_hyst)
      sign_i_ = 1;
    else if (i_amps < -cfg_.sign_hyst)
      sign_i_ = -1;
  }
  const int sb = -sign_i_;

  if (v_on_) {
    v_ctrl_.set_sign_b(sb);
    const double out = v_ctrl_.step(v_bar_pu, 1.0, dt);
    if (std::isfinite(out)) {
      r_v_ = out;
    } else if (!v_fault_noted_) {
      events_.push_back("node " + std::to_string(id_ + 1) +
                        ": voltage loop frozen on non-finite signal");
      v_fault_noted_ = true;
    }
    if (v_ctrl_.frozen() && !v_fault_noted_) {
      events_.push_back("node " + std::to_string(id_ + 1) +
                        ": voltage loop parameters frozen");
      v_fault_noted_ = true;
    }
  } else {
    r_v_ = 0.0;
  }

  if (i_on_) {
    i_ctrl_.set_sign_b(sb);
    const double out = i_ctrl_.step(i_pu, i_ref_pu, dt);
    if (std::isfinite(out)) {
      r_i_ = out;
    } else if (!i_fault_noted_) {
      events_.push_back("node " + std::to_string(id_ + 1) +
                        ": current loop frozen on non-finite signal");
      i_fault_noted_ = true;
    }
    if (i_ctrl_.frozen() && !i_fault_noted_) {
      events_.push_back("node " + std::to_string(id_ + 1) +
                        ": current loop parameters frozen");
      i_fault_noted_ = true;
    }
  } else {
    r_i_ = 0.0;
  }

  droop_ = cfg_.r_d0 + r_v_ + r_i_;
  return droop_;
}

}  // namespace droopsim::secondary
