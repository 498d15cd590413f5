#include "droopsim/baseline.hpp"

#include <algorithm>
#include <cmath>

namespace droopsim::baseline {

void PiConfig::validate() const {
  if (!(clamp > 0.0)) throw ConfigError("pi clamp must be > 0");
  for (double g : {kp_v, ki_v, kp_i, ki_i})
    if (!std::isfinite(g) || g < 0.0)
      throw ConfigError("pi gains must be finite and >= 0");
}

std::pair<double, double> pi_step(PiState& st, const PiConfig& cfg, double e_v,
                                  double e_i, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("pi dt must be > 0");
  st.integ_v = std::clamp(st.integ_v + cfg.ki_v * e_v * dt, -cfg.clamp,
                          cfg.clamp);
  st.integ_i = std::clamp(st.integ_i + cfg.ki_i * e_i * dt, -cfg.clamp,
                          cfg.clamp);
  const double r_v = -(cfg.kp_v * e_v + st.integ_v);
  const double r_i = -(cfg.kp_i * e_i + st.integ_i);
  return {r_v, r_i};
}

PiNode::PiNode(int id, PiConfig cfg, double r_d0, double i_base, double v_base)
    : id_(id), cfg_(cfg), r_d0_(r_d0), i_base_(i_base), v_base_(v_base),
      droop_(r_d0) {
  cfg_.validate();
  if (!(i_base > 0.0) || !(v_base > 0.0))
    throw ConfigError("per-unit bases must be > 0");
}

double PiNode::step(double i_pu, double v_bar_pu, double i_ref_pu, double dt) {
  const double e_v = v_on_ ? (1.0 - v_bar_pu) : 0.0;
  const double e_i = i_on_ ? (i_ref_pu - i_pu) : 0.0;
  PiState scratch = st_;
  const auto [r_v, r_i] = pi_step(scratch, cfg_, e_v, e_i, dt);
  if (std::isfinite(r_v) && std::isfinite(r_i)) {
    st_ = scratch;
    r_v_ = v_on_ ? r_v : 0.0;
    r_i_ = i_on_ ? r_i : 0.0;
  }
  droop_ = r_d0_ + r_v_ + r_i_;
  return droop_;
}

}  // namespace droopsim::baseline
