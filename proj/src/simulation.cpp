#include "droopsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

#include "droopsim/baseline.hpp"
#include "droopsim/metrics.hpp"
#include "droopsim/plant.hpp"
#include "droopsim/secondary.hpp"

namespace droopsim::sim {

namespace {

std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, a);
  return buf;
}

std::string node_label(int node, int n) {
  if (node == 0 && n > 1) return "all nodes";
  return "node " + std::to_string(node == 0 ? 1 : node);
}

}  // namespace

RunResult run(const scenario::Scenario& sc) {
  sc.validate();
  const int n = sc.n();
  const int steps = sc.steps();
  const int every = sc.ctrl_every();
  const bool adaptive = sc.controller == scenario::ControllerKind::kAdaptive;
  const bool pi = sc.controller == scenario::ControllerKind::kPi;

  plant::Params p = sc.plant_params;
  Vec droops(n);
  for (int i = 0; i < n; ++i) droops(i) = p.converters[i].r_d0;
  plant::State state = plant::equilibrium(p, droops);

  // Secondary-control machinery (shared by the adaptive and PI paths so the
  // two controllers see identical measurements and references).
  std::vector<secondary::DscNode> dsc_nodes;
  std::vector<baseline::PiNode> pi_nodes;
  std::unique_ptr<secondary::Network> net;
  std::vector<secondary::PeerCache> caches;
  std::vector<secondary::Refs> refs;

  if (adaptive || pi) {
    const auto graph = sc.graph_full
                           ? secondary::CommGraph::full(n)
                           : secondary::CommGraph::from_edges(n, sc.graph_edges);
    net = std::make_unique<secondary::Network>(graph,
                                               sc.comm_delay_ticks * sc.ctrl_dt);
    for (int i = 0; i < n; ++i) {
      caches.emplace_back(graph.in_neighbors(i));
      const auto& c = p.converters[i];
      if (adaptive) {
        secondary::NodeConfig nc;
        nc.voltage = sc.voltage_cfg;
        nc.current = sc.current_cfg;
        nc.r_d0 = c.r_d0;
        nc.i_base = c.i_rated;
        nc.v_base = sc.v_nominal;
        nc.sign_hyst = sc.sign_hyst;
        dsc_nodes.emplace_back(i, nc);
      } else {
        pi_nodes.emplace_back(i, sc.pi, c.r_d0, c.i_rated, sc.v_nominal);
      }
      refs.push_back(secondary::Refs{state.i_line(i) / c.i_rated,
                                     state.v_bus / sc.v_nominal});
    }
  }

  RunResult rr;
  const int rec_every = sc.record_every();
  const int rows = (steps - 1) / rec_every + 2;
  rr.trace = make_trace(n, rows);
  std::vector<std::pair<double, std::string>> applied;  // (time, label)

  auto record = [&](int row, double t) {
    Mat& d = rr.trace.data;
    int c = 0;
    d(row, c++) = t;
    for (int i = 0; i < n; ++i) {
      d(row, c++) = state.v_conv(i);
      d(row, c++) = state.i_line(i);
      d(row, c++) = droops(i);
      double rv = 0.0, ri = 0.0, iref = state.i_line(i) / p.converters[i].i_rated;
      if (adaptive) {
        rv = dsc_nodes[i].r_v();
        ri = dsc_nodes[i].r_i();
        iref = refs[i].i_ref_pu;
      } else if (pi) {
        rv = pi_nodes[i].r_v();
        ri = pi_nodes[i].r_i();
        iref = refs[i].i_ref_pu;
      }
      d(row, c++) = rv;
      d(row, c++) = ri;
      d(row, c++) = state.i_line(i) / p.converters[i].i_rated;
      d(row, c++) = iref;
    }
    d(row, c++) = state.v_bus;
    for (int i = 0; i < n; ++i) {
      d(row, c++) = (adaptive || pi) ? refs[i].v_bar_pu
                                     : state.v_bus / sc.v_nominal;
    }
    d(row, c++) = state.i_load;
  };

  std::size_t next_event = 0;
  int clamp_events = 0;
  int row = 0;

  for (int k = 0; k < steps; ++k) {
    const double t = k * sc.dt;

    // Timed scenario changes.
    while (next_event < sc.events.size() &&
           sc.events[next_event].t <= t + 1e-9) {
      const auto& ev = sc.events[next_event];
      const int lo = (ev.node == 0) ? 0 : ev.node - 1;
      const int hi = (ev.node == 0) ? n - 1 : ev.node - 1;
      std::string label;
      switch (ev.action) {
        case scenario::Event::Action::kSetLoad:
          p.load = ev.load;
          label = "load changed";
          break;
        case scenario::Event::Action::kEnableCurrent:
          for (int i = lo; i <= hi; ++i) {
            const double i_pu = state.i_line(i) / p.converters[i].i_rated;
            if (adaptive) dsc_nodes[i].enable_current(i_pu);
            if (pi) pi_nodes[i].enable_current();
          }
          label = "current loop enabled (" + node_label(ev.node, n) + ")";
          break;
        case scenario::Event::Action::kEnableVoltage:
          for (int i = lo; i <= hi; ++i) {
            if (adaptive) dsc_nodes[i].enable_voltage(refs[i].v_bar_pu);
            if (pi) pi_nodes[i].enable_voltage();
          }
          label = "voltage loop enabled (" + node_label(ev.node, n) + ")";
          break;
      }
      applied.emplace_back(t, label);
      rr.log.push_back("t=" + fmt("%.3f", t) + " s: " + label);
      ++next_event;
    }

    if (k % every == 0) {
      if (adaptive || pi) {
        // Publish first so a zero-delay network still delivers this tick.
        for (int i = 0; i < n; ++i) {
          const double i_pu = state.i_line(i) / p.converters[i].i_rated;
          const double v_pu = state.v_bus / sc.v_nominal;
          net->publish(secondary::Message{i, v_pu, i_pu, t});
        }
        const auto delivered = net->tick(t);
        for (int i = 0; i < n; ++i) {
          for (const auto& msg : delivered[i]) caches[i].update(msg);
        }
        for (int i = 0; i < n; ++i) {
          const double i_pu = state.i_line(i) / p.converters[i].i_rated;
          const double v_pu = state.v_bus / sc.v_nominal;
          refs[i] = secondary::consensus_references(caches[i], v_pu, refs[i]);
          if (adaptive) {
            droops(i) = dsc_nodes[i].dsc_step(state.i_line(i), i_pu,
                                              refs[i].v_bar_pu,
                                              refs[i].i_ref_pu, sc.ctrl_dt);
          } else {
            droops(i) = pi_nodes[i].step(i_pu, refs[i].v_bar_pu,
                                         refs[i].i_ref_pu, sc.ctrl_dt);
          }
        }
      }
    }
    if (k % rec_every == 0) record(row++, t);

    state = plant::step(state, droops, p, sc.dt, t, &clamp_events);
  }
  record(row++, steps * sc.dt);
  rr.trace.rows_used = row;

  // Controller fault notes surface in the run log.
  for (const auto& node : dsc_nodes) {
    for (const auto& e : node.events()) rr.log.push_back(e);
  }

  Summary& s = rr.summary;
  s.final_v_bus = state.v_bus;
  s.final_i_line = state.i_line;
  s.final_droops = droops;
  s.sharing_ratio = (n == 2 && state.i_line(1) != 0.0)
                        ? state.i_line(0) / state.i_line(1)
                        : std::numeric_limits<double>::quiet_NaN();
  s.cpl_clamp_events = clamp_events;

  metrics::IseWindow w;
  w.t_start = sc.duration - sc.metrics_window;
  w.t_end = sc.duration;
  w.v_ref = sc.v_nominal;
  Vec rated(n);
  for (int i = 0; i < n; ++i) rated(i) = p.converters[i].i_rated;
  w.i_shares = metrics::rating_shares(rated);
  s.ise_v = metrics::ise_v(rr.trace, w);
  s.ise_i = metrics::ise_i(rr.trace, w);

  // Settling analysis per event segment: events at the same instant share
  // one segment, which runs to the next event (or the end of the run).
  for (std::size_t a = 0; a < applied.size();) {
    std::size_t b = a;
    Segment seg;
    seg.t_start = applied[a].first;
    while (b < applied.size() && applied[b].first <= seg.t_start + 1e-9) {
      if (!seg.label.empty()) seg.label += "; ";
      seg.label += applied[b].second;
      ++b;
    }
    seg.t_end = (b < applied.size()) ? applied[b].first : sc.duration;
    if (seg.t_end > seg.t_start + sc.record_dt) {
      seg.i_settle.resize(n);
      for (int i = 0; i < n; ++i) {
        seg.i_settle(i) =
            metrics::settling_time(rr.trace, "i_line_" + std::to_string(i + 1),
                                   seg.t_start, seg.t_end);
      }
      seg.v_settle =
          metrics::settling_time(rr.trace, "v_bus", seg.t_start, seg.t_end);
      s.segments.push_back(std::move(seg));
    }
    a = b;
  }

  for (const auto& node : dsc_nodes) {
    for (const mrac::Controller* c :
         {&node.voltage_loop(), &node.current_loop()}) {
      const auto& dg = c->diag();
      s.max_theta_ratio = std::max(s.max_theta_ratio, dg.max_theta_ratio);
      s.max_b_ratio = std::max(s.max_b_ratio, dg.max_b_ratio);
      s.min_m = std::min(s.min_m, dg.min_m);
      s.max_phi_ratio = std::max(s.max_phi_ratio, dg.max_phi_ratio);
      s.max_un_ratio = std::max(s.max_un_ratio, dg.max_un_ratio);
    }
  }
  return rr;
}

std::string summary_text(const scenario::Scenario& sc, const RunResult& rr) {
  const Summary& s = rr.summary;
  const int n = sc.n();
  std::string out;
  out += "scenario '" + sc.name + "' (" + scenario::to_string(sc.controller) +
         "): " + std::to_string(sc.steps()) + " steps of " +
         fmt("%g", sc.dt) + " s, " + std::to_string(n) + " converter(s)\n";
  out += "final: v_bus = " + fmt("%.4f", s.final_v_bus) + " V, i = [";
  for (int i = 0; i < n; ++i)
    out += (i ? ", " : "") + fmt("%.4f", s.final_i_line(i));
  out += "] A, droop = [";
  for (int i = 0; i < n; ++i)
    out += (i ? ", " : "") + fmt("%.4f", s.final_droops(i));
  out += "] ohm\n";
  if (n == 2)
    out += "sharing i1/i2 = " + fmt("%.4f", s.sharing_ratio) + "\n";
  out += "ise (last " + fmt("%g", sc.metrics_window) +
         " s): voltage " + fmt("%.6g", s.ise_v) + " V^2 s, current " +
         fmt("%.6g", s.ise_i) + " A^2 s\n";
  auto settle_str = [](double v) {
    return std::isnan(v) ? std::string("-") : fmt("%.3f", v) + " s";
  };
  for (const auto& seg : s.segments) {
    out += "settling (2% band) after t=" + fmt("%.3f", seg.t_start) + " s (" +
           seg.label + "): i = [";
    for (int i = 0; i < seg.i_settle.size(); ++i)
      out += (i ? ", " : "") + settle_str(seg.i_settle(i));
    out += "], v_bus = " + settle_str(seg.v_settle) + "\n";
  }
  if (sc.controller == scenario::ControllerKind::kAdaptive) {
    out += "adaptation: max |theta|/M = " + fmt("%.4f", s.max_theta_ratio) +
           ", max |b|/M = " + fmt("%.4f", s.max_b_ratio) +
           ", min m = " + fmt("%.4f", s.min_m) +
           ", max |phi|/m = " + fmt("%.4f", s.max_phi_ratio) +
           ", max |u_n|/m = " + fmt("%.4f", s.max_un_ratio) + "\n";
  }
  if (s.cpl_clamp_events > 0)
    out += "constant-power floor engaged " +
           std::to_string(s.cpl_clamp_events) + " time(s)\n";
  if (!rr.log.empty()) {
    out += "events:\n";
    for (const auto& line : rr.log) out += "  " + line + "\n";
  }
  return out;
}

}  // namespace droopsim::sim
