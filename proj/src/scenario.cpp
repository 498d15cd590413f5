#include "droopsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>

#include "droopsim/secondary.hpp"

namespace droopsim::scenario {

namespace {

bool in_list(const std::string& k, std::initializer_list<const char*> list) {
  return std::any_of(list.begin(), list.end(),
                     [&](const char* s) { return k == s; });
}

// Rejects keys/sections the loader does not understand so typos fail loudly
// instead of silently falling back to defaults.
void check_keys(const config::Table& t,
                std::initializer_list<const char*> vals,
                std::initializer_list<const char*> subs = {},
                std::initializer_list<const char*> arrays = {}) {
  for (const auto& [k, v] : t.values) {
    if (!in_list(k, vals))
      throw ConfigError("unknown key '" + k + "'", v.line);
  }
  for (const auto& [k, s] : t.subtables) {
    if (!in_list(k, subs))
      throw ConfigError("unknown section [" + k + "]", s.line);
  }
  for (const auto& [k, arr] : t.table_arrays) {
    if (!in_list(k, arrays))
      throw ConfigError("unknown list [[" + k + "]]",
                        arr.empty() ? t.line : arr.front().line);
  }
}

// Interprets the kind/value pair of a table that may carry other keys
// (events reuse these keys next to t/action/node).
LoadModel load_from_kind_value(const config::Table& t) {
  const std::string kind = t.at("kind").as_string();
  const double value = t.number("value");
  if (kind == "resistive") return LoadModel::resistive(value);
  if (kind == "constant_power") return LoadModel::constant_power(value);
  if (kind == "constant_current") return LoadModel::constant_current(value);
  throw ConfigError("unknown load kind '" + kind + "'", t.at("kind").line);
}

LoadModel load_from(const config::Table& t) {
  check_keys(t, {"kind", "value"});
  return load_from_kind_value(t);
}

Vec2 vec2_from(const config::Value& v) {
  const auto& arr = v.as_array();
  if (arr.size() != 2)
    throw ConfigError("expected an array of 2 numbers", v.line);
  return Vec2(arr[0].as_number(), arr[1].as_number());
}

// Overrides fields of a default-constructed adaptive-loop config.
mrac::Config loop_from(const config::Table& t, const mrac::Config& base) {
  check_keys(t, {"a_m", "b_m", "fb_l", "gamma0", "m_theta", "m_b", "r0",
                 "alpha_min", "b_init", "theta0", "gain_scheduling",
                 "legacy_unnormalized"});
  mrac::Config c = base;
  c.a_m = t.number_or("a_m", c.a_m);
  c.b_m = t.number_or("b_m", c.b_m);
  c.fb_l = t.number_or("fb_l", c.fb_l);
  c.gamma0 = t.number_or("gamma0", c.gamma0);
  c.m_theta = t.number_or("m_theta", c.m_theta);
  c.m_b = t.number_or("m_b", c.m_b);
  c.r0 = t.number_or("r0", c.r0);
  c.alpha_min = t.number_or("alpha_min", c.alpha_min);
  c.b_init = t.number_or("b_init", c.b_init);
  if (t.has("theta0")) c.theta0 = vec2_from(t.at("theta0"));
  c.gain_scheduling = t.bool_or("gain_scheduling", c.gain_scheduling);
  c.legacy_unnormalized =
      t.bool_or("legacy_unnormalized", c.legacy_unnormalized);
  return c;
}

Event event_from(const config::Table& t) {
  check_keys(t, {"t", "action", "node", "kind", "value"});
  Event ev;
  ev.t = t.number("t");
  ev.node = t.int_or("node", 0);
  const std::string action = t.at("action").as_string();
  if (action == "enable_current") {
    ev.action = Event::Action::kEnableCurrent;
  } else if (action == "enable_voltage") {
    ev.action = Event::Action::kEnableVoltage;
  } else if (action == "set_load") {
    ev.action = Event::Action::kSetLoad;
    ev.load = load_from_kind_value(t);
  } else {
    throw ConfigError("unknown event action '" + action + "'",
                      t.at("action").line);
  }
  if (ev.action != Event::Action::kSetLoad && (t.has("kind") || t.has("value")))
    throw ConfigError("'kind'/'value' only apply to set_load events", t.line);
  return ev;
}

}  // namespace

std::string to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::kAdaptive: return "adaptive";
    case ControllerKind::kPi: return "pi";
    case ControllerKind::kNone: return "none";
  }
  return "?";
}

ControllerKind controller_from_string(const std::string& s, int line) {
  if (s == "adaptive") return ControllerKind::kAdaptive;
  if (s == "pi") return ControllerKind::kPi;
  if (s == "none") return ControllerKind::kNone;
  throw ConfigError("unknown controller '" + s +
                        "' (expected adaptive, pi, or none)",
                    line);
}

int Scenario::steps() const {
  const double raw = duration / dt;
  const int k = static_cast<int>(std::llround(raw));
  if (k < 1 || std::abs(raw - k) > 1e-6)
    throw ConfigError("duration must be an integer number of dt steps");
  return k;
}

int Scenario::ctrl_every() const {
  const double raw = ctrl_dt / dt;
  const int k = static_cast<int>(std::llround(raw));
  if (k < 1 || std::abs(raw - k) > 1e-6)
    throw ConfigError("ctrl_dt must be an integer multiple of dt");
  return k;
}

int Scenario::record_every() const {
  const double raw = record_dt / dt;
  const int k = static_cast<int>(std::llround(raw));
  if (k < 1 || std::abs(raw - k) > 1e-6)
    throw ConfigError("record_dt must be an integer multiple of dt");
  return k;
}

void Scenario::validate() const {
  if (!(duration > 0.0)) throw ConfigError("duration must be > 0");
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (dt > plant_params.dt_max)
    throw ConfigError("dt exceeds the plant's dt_max");
  if (ctrl_dt < dt) throw ConfigError("ctrl_dt must be >= dt");
  if (record_dt < dt) throw ConfigError("record_dt must be >= dt");
  (void)steps();
  (void)ctrl_every();
  (void)record_every();
  if (!(v_nominal > 0.0)) throw ConfigError("v_nominal must be > 0");
  if (!(metrics_window > 0.0) || metrics_window > duration)
    throw ConfigError("metrics window must be in (0, duration]");
  if (comm_delay_ticks < 0)
    throw ConfigError("comm delay must be >= 0 ticks");
  if (!(sign_hyst >= 0.0)) throw ConfigError("sign_hyst must be >= 0");

  plant_params.validate();
  voltage_cfg.validate();
  current_cfg.validate();
  pi.validate();

  if (controller != ControllerKind::kNone) {
    const auto graph =
        graph_full ? secondary::CommGraph::full(n())
                   : secondary::CommGraph::from_edges(n(), graph_edges);
    graph.validate();
  }

  double prev_t = 0.0;
  for (const auto& ev : events) {
    if (ev.t < 0.0 || ev.t > duration)
      throw ConfigError("event at t=" + std::to_string(ev.t) +
                        " falls outside the run");
    if (ev.t < prev_t) throw ConfigError("events must be sorted by time");
    prev_t = ev.t;
    if (ev.node < 0 || ev.node > n())
      throw ConfigError("event node " + std::to_string(ev.node) +
                        " is not 0 (all) or 1.." + std::to_string(n()));
    if (ev.action == Event::Action::kSetLoad) ev.load.validate();
    if (controller == ControllerKind::kNone &&
        ev.action != Event::Action::kSetLoad)
      throw ConfigError("enable events need an active controller");
  }
}

Scenario from_table(const config::Table& root, const std::string& name) {
  check_keys(root,
             {"name", "duration", "dt", "ctrl_dt", "record_dt", "v_nominal",
              "controller", "seed"},
             {"load", "comm", "adaptive", "pi", "metrics"},
             {"converters", "events"});

  Scenario sc;
  sc.name = root.string_or("name", name);
  sc.duration = root.number_or("duration", sc.duration);
  sc.dt = root.number_or("dt", sc.dt);
  sc.ctrl_dt = root.number_or("ctrl_dt", sc.ctrl_dt);
  sc.record_dt = root.number_or("record_dt", sc.record_dt);
  sc.v_nominal = root.number_or("v_nominal", sc.v_nominal);
  if (root.has("controller"))
    sc.controller = controller_from_string(root.at("controller").as_string(),
                                           root.at("controller").line);

  const auto conv_it = root.table_arrays.find("converters");
  if (conv_it == root.table_arrays.end() || conv_it->second.empty())
    throw ConfigError("scenario needs at least one [[converters]] entry",
                      root.line);
  for (const auto& ct : conv_it->second) {
    check_keys(ct, {"v_ref", "tau_v", "i_rated", "r_d0", "line_r", "line_l"});
    ConverterParams c;
    c.v_ref = ct.number_or("v_ref", c.v_ref);
    c.tau_v = ct.number_or("tau_v", c.tau_v);
    c.i_rated = ct.number_or("i_rated", c.i_rated);
    c.r_d0 = ct.number_or("r_d0", c.r_d0);
    LineParams l;
    l.r = ct.number_or("line_r", l.r);
    l.l = ct.number_or("line_l", l.l);
    sc.plant_params.converters.push_back(c);
    sc.plant_params.lines.push_back(l);
  }

  if (root.has_sub("load")) sc.plant_params.load = load_from(root.sub("load"));

  if (root.has_sub("comm")) {
    const auto& comm = root.sub("comm");
    check_keys(comm, {"full", "edges", "delay_ticks"});
    sc.comm_delay_ticks = comm.int_or("delay_ticks", sc.comm_delay_ticks);
    if (comm.has("edges")) {
      if (comm.has("full") && comm.at("full").as_bool())
        throw ConfigError("give either full = true or an edge list, not both",
                          comm.at("edges").line);
      for (const auto& e : comm.at("edges").as_array()) {
        const auto& pair = e.as_array();
        if (pair.size() != 2)
          throw ConfigError("each edge is [from, to] (1-based)", e.line);
        sc.graph_edges.emplace_back(pair[0].as_int() - 1,
                                    pair[1].as_int() - 1);
      }
      sc.graph_full = false;
    } else if (comm.has("full") && !comm.at("full").as_bool()) {
      throw ConfigError("full = false needs an edges list", comm.line);
    }
  }

  if (root.has_sub("adaptive")) {
    const auto& ad = root.sub("adaptive");
    check_keys(ad, {"sign_hyst"}, {"voltage", "current"});
    sc.sign_hyst = ad.number_or("sign_hyst", sc.sign_hyst);
    if (ad.has_sub("voltage"))
      sc.voltage_cfg = loop_from(ad.sub("voltage"), sc.voltage_cfg);
    if (ad.has_sub("current"))
      sc.current_cfg = loop_from(ad.sub("current"), sc.current_cfg);
  }

  if (root.has_sub("pi")) {
    const auto& pt = root.sub("pi");
    check_keys(pt, {"kp_v", "ki_v", "kp_i", "ki_i", "clamp"});
    sc.pi.kp_v = pt.number_or("kp_v", sc.pi.kp_v);
    sc.pi.ki_v = pt.number_or("ki_v", sc.pi.ki_v);
    sc.pi.kp_i = pt.number_or("kp_i", sc.pi.kp_i);
    sc.pi.ki_i = pt.number_or("ki_i", sc.pi.ki_i);
    sc.pi.clamp = pt.number_or("clamp", sc.pi.clamp);
  }

  const auto ev_it = root.table_arrays.find("events");
  if (ev_it != root.table_arrays.end()) {
    for (const auto& et : ev_it->second) sc.events.push_back(event_from(et));
    std::stable_sort(
        sc.events.begin(), sc.events.end(),
        [](const Event& a, const Event& b) { return a.t < b.t; });
  }

  if (root.has_sub("metrics")) {
    const auto& mt = root.sub("metrics");
    check_keys(mt, {"window"});
    sc.metrics_window = mt.number_or("window", sc.metrics_window);
  }

  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::string stem = path;
  const auto slash = stem.find_last_of("/\\");
  if (slash != std::string::npos) stem = stem.substr(slash + 1);
  const auto dot = stem.find_last_of('.');
  if (dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
  return from_table(config::parse_file(path), stem);
}

}  // namespace droopsim::scenario
