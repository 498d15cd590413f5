#include "droopsim/plant.hpp"

#include <cmath>

#include "droopsim/integrator.hpp"

namespace droopsim {

void ConverterParams::validate() const {
  if (!(tau_v > 0.0)) throw ConfigError("converter tau_v must be > 0");
  if (!(i_rated > 0.0)) throw ConfigError("converter i_rated must be > 0");
  if (!std::isfinite(v_ref) || !std::isfinite(r_d0))
    throw ConfigError("converter v_ref/r_d0 must be finite");
}

void LineParams::validate() const {
  if (!(r > 0.0)) throw ConfigError("line resistance must be > 0");
  if (!(l > 0.0)) throw ConfigError("line inductance must be > 0");
}

void LoadModel::validate() const {
  if (!std::isfinite(value)) throw ConfigError("load value must be finite");
  switch (kind) {
    case Kind::kResistive:
      if (!(value > 0.0)) throw ConfigError("resistive load must be > 0 ohm");
      break;
    case Kind::kConstantPower:
      if (!(value > 0.0)) throw ConfigError("constant-power load must be > 0 W");
      break;
    case Kind::kConstantCurrent:
      if (!(value >= 0.0))
        throw ConfigError("constant-current load must be >= 0 A");
      break;
  }
}

namespace plant {

void Params::validate() const {
  if (converters.empty()) throw ConfigError("plant needs at least one converter");
  if (converters.size() != lines.size())
    throw ConfigError("plant needs one line per converter");
  for (const auto& c : converters) c.validate();
  for (const auto& l : lines) l.validate();
  load.validate();
  if (!(i_floor > 0.0)) throw ConfigError("i_floor must be > 0");
  if (!(cc_rate > 0.0)) throw ConfigError("cc_rate must be > 0");
  if (!(dt_max > 0.0)) throw ConfigError("dt_max must be > 0");
}

bool State::finite() const {
  return v_conv.allFinite() && i_line.allFinite() && std::isfinite(v_bus) &&
         std::isfinite(i_load);
}

double bus_voltage(double i_total, const LoadModel& load, double i_floor,
                   bool* clamped) {
  if (!std::isfinite(i_total))
    throw SimulationFault("non-finite total current in bus solve",
                          std::nan(""));
  switch (load.kind) {
    case LoadModel::Kind::kResistive:
      return load.value * i_total;
    case LoadModel::Kind::kConstantPower:
      if (i_total <= i_floor) {
        if (clamped) *clamped = true;
        return load.value / i_floor;
      }
      return load.value / i_total;
    case LoadModel::Kind::kConstantCurrent:
      throw std::invalid_argument(
          "constant-current load has no V(i_total) curve; use solve_bus");
  }
  throw std::logic_error("unreachable load kind");
}

double solve_bus(const Vec& v_conv, const Vec& i_line, const Params& p,
                 bool* clamped) {
  if (p.load.kind != LoadModel::Kind::kConstantCurrent)
    return bus_voltage(i_line.sum(), p.load, p.i_floor, clamped);

  // Place the bus so that d(sum i_line)/dt = -cc_rate * (sum - demand): the
  // line dynamics themselves pull the delivered total onto the demanded
  // current, and every equilibrium satisfies sum(i_line) == demand exactly.
  double num = 0.0, den = 0.0;
  for (int i = 0; i < p.n(); ++i) {
    num += (v_conv[i] - p.lines[i].r * i_line[i]) / p.lines[i].l;
    den += 1.0 / p.lines[i].l;
  }
  num += p.cc_rate * (i_line.sum() - p.load.value);
  return num / den;
}

void derivatives(const State& s, const Vec& droops, const Params& p,
                 Vec& dv_conv, Vec& di_line) {
  const int n = p.n();
  dv_conv.resize(n);
  di_line.resize(n);
  const double v_bus = solve_bus(s.v_conv, s.i_line, p, nullptr);
  for (int i = 0; i < n; ++i) {
    const auto& c = p.converters[i];
    const auto& ln = p.lines[i];
    dv_conv[i] = ((c.v_ref - droops[i] * s.i_line[i]) - s.v_conv[i]) / c.tau_v;
    di_line[i] = (s.v_conv[i] - v_bus - ln.r * s.i_line[i]) / ln.l;
  }
}

State step(const State& s, const Vec& droops, const Params& p, double dt,
           double t, int* clamp_events) {
  if (!(dt > 0.0) || dt > p.dt_max)
    throw std::invalid_argument("plant step dt must be in (0, dt_max]");
  if (droops.size() != p.n())
    throw std::invalid_argument("droop vector size mismatch");
  if (!s.finite() || !droops.allFinite())
    throw SimulationFault("non-finite plant input", t);

  const int n = p.n();
  Vec y(2 * n);
  y << s.v_conv, s.i_line;

  bool clamped = false;
  auto rhs = [&](double, const Vec& z) -> Vec {
    Vec dz(2 * n);
    const double v_bus = solve_bus(z.head(n), z.tail(n), p, &clamped);
    for (int i = 0; i < n; ++i) {
      const auto& c = p.converters[i];
      const auto& ln = p.lines[i];
      dz[i] = ((c.v_ref - droops[i] * z[n + i]) - z[i]) / c.tau_v;
      dz[n + i] = (z[i] - v_bus - ln.r * z[n + i]) / ln.l;
    }
    return dz;
  };

  Vec y1;
  try {
    y1 = rk4_step(t, y, dt, rhs);
  } catch (const SimulationFault& f) {
    // The bus solve has no notion of time; re-throw with this step's.
    if (std::isnan(f.time())) throw SimulationFault(f.reason(), t);
    throw;
  }
  if (clamped && clamp_events) ++(*clamp_events);

  State out;
  out.v_conv = y1.head(n);
  out.i_line = y1.tail(n);
  if (!out.v_conv.allFinite() || !out.i_line.allFinite())
    throw SimulationFault("non-finite plant state", t + dt);
  out.i_load = out.i_line.sum();
  out.v_bus = solve_bus(out.v_conv, out.i_line, p, nullptr);
  return out;
}

double steady_state_ratio(double r_d1, double r_d2, double r_1, double r_2) {
  const double den = r_d1 + r_1;
  const double num = r_d2 + r_2;
  if (!(den > 0.0) || !(num > 0.0))
    throw std::invalid_argument(
        "steady_state_ratio requires r_d + r > 0 on both converters");
  return num / den;
}

State equilibrium(const Params& p, const Vec& droops) {
  p.validate();
  if (droops.size() != p.n())
    throw std::invalid_argument("droop vector size mismatch");
  const int n = p.n();

  // Reduce to one scalar bus equation: i_i = (v_ref_i - V_b) / rho_i with
  // rho_i = r_d_i + r_i, then close it with the load curve.
  double s_inv = 0.0;   // sum 1/rho
  double s_src = 0.0;   // sum v_ref/rho
  for (int i = 0; i < n; ++i) {
    const double rho = droops[i] + p.lines[i].r;
    if (!(rho > 0.0))
      throw std::invalid_argument("equilibrium requires r_d + r > 0");
    s_inv += 1.0 / rho;
    s_src += p.converters[i].v_ref / rho;
  }

  double v_bus = 0.0;
  switch (p.load.kind) {
    case LoadModel::Kind::kResistive: {
      const double z = p.load.value;
      v_bus = z * s_src / (1.0 + z * s_inv);
      break;
    }
    case LoadModel::Kind::kConstantCurrent:
      v_bus = (s_src - p.load.value) / s_inv;
      break;
    case LoadModel::Kind::kConstantPower: {
      // s_inv * V^2 - s_src * V + P = 0, higher root = normal branch.
      const double disc = s_src * s_src - 4.0 * s_inv * p.load.value;
      if (disc < 0.0)
        throw std::invalid_argument(
            "constant-power load infeasible at these droops");
      v_bus = (s_src + std::sqrt(disc)) / (2.0 * s_inv);
      break;
    }
  }

  State st;
  st.v_conv.resize(n);
  st.i_line.resize(n);
  for (int i = 0; i < n; ++i) {
    const double rho = droops[i] + p.lines[i].r;
    st.i_line[i] = (p.converters[i].v_ref - v_bus) / rho;
    st.v_conv[i] = p.converters[i].v_ref - droops[i] * st.i_line[i];
  }
  st.i_load = st.i_line.sum();
  st.v_bus = solve_bus(st.v_conv, st.i_line, p, nullptr);
  return st;
}

}  // namespace plant
}  // namespace droopsim
