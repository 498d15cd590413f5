#include "droopsim/smallsignal.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>

namespace droopsim::smallsignal {

void OperatingPoint::validate() const {
  if (!(tau_v > 0.0)) {
    throw std::invalid_argument("operating point: tau_v must be > 0");
  }
  if (!(line.l > 0.0)) {
    throw std::invalid_argument("operating point: line inductance must be > 0");
  }
  if (!(rho() > 0.0)) {
    throw std::invalid_argument(
        "operating point: droop + cable resistance must be > 0, got " +
        std::to_string(rho()));
  }
  if (!std::isfinite(i_op)) {
    throw std::invalid_argument("operating point: i_op must be finite");
  }
}

FirstOrderTf voltage_sensitivity(const OperatingPoint& op) {
  op.validate();
  // tau_v dv/dt = -v - i_op * delta_r_d  =>  -i_op / (1 + tau_v s).
  return {-op.i_op / op.tau_v, -1.0 / op.tau_v};
}

FirstOrderTf current_sensitivity(const OperatingPoint& op) {
  op.validate();
  const double rho = op.rho();
  const double tau = op.tau_v + op.line.l / rho;
  return {-(op.i_op / rho) / tau, -1.0 / tau};
}

namespace {

// Integrates the plant under fixed droops until `probe` is flat (max - min
// below `tol` across a `window`-long history), starting from the closed-form
// equilibrium of `start_droops`. Returns the settled probe value.
double settle(const plant::Params& p, const Vec& start_droops,
              const Vec& run_droops, double tol,
              const std::function<double(const plant::State&)>& probe) {
  constexpr double kDt = 1e-4;
  constexpr double kWindow = 0.1;
  constexpr double kTimeCap = 5.0;

  plant::State s = plant::equilibrium(p, start_droops);
  std::deque<std::pair<double, double>> history;
  double t = 0.0;
  while (t < kTimeCap) {
    s = plant::step(s, run_droops, p, kDt, t);
    t += kDt;
    history.emplace_back(t, probe(s));
    while (!history.empty() && history.front().first < t - kWindow) {
      history.pop_front();
    }
    if (history.back().first - history.front().first >= kWindow - 1e-12) {
      double lo = history.front().second;
      double hi = lo;
      for (const auto& [ht, hv] : history) {
        lo = std::min(lo, hv);
        hi = std::max(hi, hv);
      }
      if (hi - lo < tol) return history.back().second;
    }
  }
  throw std::runtime_error(
      "small-signal experiment did not reach steady state within " +
      std::to_string(kTimeCap) + " s");
}

}  // namespace

ValidationReport validate_against_plant(const OperatingPoint& op,
                                        double delta_rd,
                                        double v_bus_target) {
  op.validate();
  const double rho = op.rho();
  if (!(delta_rd > 0.0)) {
    throw std::invalid_argument("delta_rd must be > 0");
  }
  if (delta_rd > 0.01 * rho) {
    throw std::invalid_argument(
        "delta_rd exceeds 1% of the source resistance; the finite "
        "difference would leave the small-signal regime");
  }
  if (!(op.i_op > 0.0)) {
    throw std::invalid_argument(
        "plant validation needs a positive operating current");
  }

  ValidationReport rep;
  rep.dc_voltage_model = voltage_sensitivity(op).dc_gain();
  rep.dc_current_model = current_sensitivity(op).dc_gain();

  constexpr double kTol = 1e-4;

  // Experiment 1: one converter feeding a constant-current load. The load
  // pins the converter current at i_op no matter the droop, so the bus
  // voltage shift isolates the voltage sensitivity.
  {
    plant::Params p;
    ConverterParams c;
    c.v_ref = v_bus_target + rho * op.i_op;  // carries i_op into the pinned bus
    c.tau_v = op.tau_v;
    c.r_d0 = op.r_d;
    p.converters = {c};
    p.lines = {op.line};
    p.load = LoadModel::constant_current(op.i_op);

    Vec base(1), pert(1);
    base << op.r_d;
    pert << op.r_d + delta_rd;
    auto probe = [](const plant::State& s) { return s.v_bus; };
    const double v0 = settle(p, base, base, kTol, probe);
    const double v1 = settle(p, base, pert, kTol, probe);
    rep.dc_voltage_plant = (v1 - v0) / delta_rd;
  }

  // Experiment 2: the converter under test next to a stiff companion source
  // (zero droop, near-zero cable resistance) that pins the bus at
  // v_bus_target; the test converter's current shift isolates the current
  // sensitivity. The constant-current load keeps the companion's own
  // current near zero so its residual cable drop stays negligible.
  {
    plant::Params p;
    ConverterParams test;
    test.v_ref = v_bus_target + rho * op.i_op;
    test.tau_v = op.tau_v;
    test.r_d0 = op.r_d;
    ConverterParams stiff;
    stiff.v_ref = v_bus_target;
    stiff.tau_v = op.tau_v;
    stiff.r_d0 = 0.0;
    p.converters = {test, stiff};
    p.lines = {op.line, LineParams{1e-3, 1e-5}};
    p.load = LoadModel::constant_current(op.i_op);

    Vec base(2), pert(2);
    base << op.r_d, 0.0;
    pert << op.r_d + delta_rd, 0.0;
    auto probe = [](const plant::State& s) { return s.i_line(0); };
    const double i0 = settle(p, base, base, kTol, probe);
    const double i1 = settle(p, base, pert, kTol, probe);
    rep.dc_current_plant = (i1 - i0) / delta_rd;
  }

  rep.voltage_rel_err = std::abs(rep.dc_voltage_plant - rep.dc_voltage_model) /
                        std::abs(rep.dc_voltage_model);
  rep.current_rel_err = std::abs(rep.dc_current_plant - rep.dc_current_model) /
                        std::abs(rep.dc_current_model);
  return rep;
}

}  // namespace droopsim::smallsignal
