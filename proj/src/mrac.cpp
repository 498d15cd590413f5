#include "droopsim/mrac.hpp"

#include <algorithm>
#include <cmath>

#include "droopsim/integrator.hpp"

namespace droopsim::mrac {

void Config::validate() const {
  if (!(a_m < 0.0)) throw ConfigError("reference-model pole a_m must be < 0");
  if (!(fb_l <= 0.0)) throw ConfigError("error feedback gain must be <= 0");
  if (!(a_m + fb_l < 0.0))
    throw ConfigError("a_m + fb_l must be < 0 (filter pole)");
  if (!(gamma0 > 0.0)) throw ConfigError("gamma0 must be > 0");
  if (!(m_theta > 0.0) || !(m_b > 0.0))
    throw ConfigError("parameter bounds m_theta/m_b must be > 0");
  if (sign_b != 1 && sign_b != -1) throw ConfigError("sign_b must be +1 or -1");
  if (!(r0 > 0.0)) throw ConfigError("r0 must be > 0");
  if (!(alpha_min > 0.0)) throw ConfigError("alpha_min must be > 0");
  if (!(b_init > 0.0) || b_init > m_b)
    throw ConfigError("b_init must be in (0, m_b]");
  if (theta0.norm() > m_theta)
    throw ConfigError("initial theta exceeds the projection radius");
  if (!std::isfinite(b_m)) throw ConfigError("b_m must be finite");
}

double scheduled_gain(const Config& cfg, double r) {
  if (!cfg.gain_scheduling) return cfg.gamma0;
  const double alpha = std::max(std::abs(r) / cfg.r0, cfg.alpha_min);
  return cfg.gamma0 / (alpha * alpha);
}

Vec2 project_theta(const Vec2& theta_dot0, const Vec2& theta, double m_theta) {
  const double n2 = theta.squaredNorm();
  const double m2 = m_theta * m_theta;
  if (n2 < m2 * (1.0 - 1e-12) || theta_dot0.dot(theta) <= 0.0)
    return theta_dot0;
  return theta_dot0 - theta * (theta_dot0.dot(theta) / n2);
}

Controller::Controller(Config cfg) : cfg_(cfg), sign_b_(cfg.sign_b) {
  cfg_.validate();
  reset(0.0);
}

void Controller::reset(double x_measured) {
  st_.theta = cfg_.theta0;
  st_.b_hat = sign_b_ * cfg_.b_init;
  st_.x_m = x_measured;
  st_.phi_n.setZero();
  st_.u_n = 0.0;
  st_.gamma_k = cfg_.gamma0;
  diag_ = Diagnostics{};
  frozen_ = false;
  last_u_ = 0.0;
}

void Controller::set_sign_b(int sign) {
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("sign_b must be +1 or -1");
  if (sign == sign_b_) return;
  sign_b_ = sign;
  st_.b_hat = sign * std::max(std::abs(st_.b_hat), cfg_.b_init);
}

double Controller::control_output(double x, double r) const {
  return st_.theta.dot(Vec2(x, r));
}

void Controller::reference_step(double r, double e, double dt) {
  st_.x_m = rk4_step(0.0, st_.x_m, dt, [&](double, double xm) {
    return cfg_.a_m * xm + cfg_.b_m * r - cfg_.fb_l * e;
  });
}

void Controller::filter_step(double x, double r, double u, double dt) {
  const double p = cfg_.a_m + cfg_.fb_l;
  const Vec2 phi(x, r);
  st_.phi_n = rk4_step(0.0, st_.phi_n, dt, [&](double, const Vec2& s) {
    return Vec2(p * s + phi);
  });
  st_.u_n = rk4_step(0.0, st_.u_n, dt,
                     [&](double, double s) { return p * s + u; });
}

std::pair<double, double> Controller::modeling_error(double e) const {
  const double z = -st_.theta.dot(st_.phi_n) + st_.u_n;
  const double e_hat = st_.b_hat * z;
  const double m = std::sqrt(1.0 + st_.phi_n.squaredNorm() + st_.u_n * st_.u_n);
  return {(e - e_hat) / (m * m), m};
}

void Controller::adapt_step(double e, double dt) {
  if (frozen_) return;
  const auto [eps, m] = modeling_error(e);
  diag_.e = e;
  diag_.eps = eps;
  diag_.m = m;
  diag_.e_hat = e - eps * m * m;
  if (!std::isfinite(eps) || !std::isfinite(m)) {
    frozen_ = true;
    return;
  }

  const Vec2 theta_dot0 = -st_.gamma_k * sign_b_ * st_.phi_n * eps;
  const Vec2 theta_dot = project_theta(theta_dot0, st_.theta, cfg_.m_theta);

  const double z = -st_.theta.dot(st_.phi_n) + st_.u_n;
  double b_dot = st_.gamma_k * z * eps;
  const bool on_b_boundary =
      std::abs(st_.b_hat) >= cfg_.m_b * (1.0 - 1e-12);
  if (on_b_boundary && b_dot * st_.b_hat > 0.0) b_dot = 0.0;

  const Vec2 theta_prev = st_.theta;
  const double b_prev = st_.b_hat;
  st_.theta += dt * theta_dot;
  st_.b_hat += dt * b_dot;
  if (!st_.theta.allFinite() || !std::isfinite(st_.b_hat)) {
    // Freeze on the last finite parameters rather than propagate the fault.
    frozen_ = true;
    st_.theta = theta_prev;
    st_.b_hat = b_prev;
    return;
  }

  // Re-check the convex bounds after the explicit Euler step.
  const double norm = st_.theta.norm();
  if (norm > cfg_.m_theta) st_.theta *= cfg_.m_theta / norm;
  st_.b_hat = std::clamp(st_.b_hat, -cfg_.m_b, cfg_.m_b);
  note_extrema();
}

void Controller::note_extrema() {
  diag_.max_theta_ratio =
      std::max(diag_.max_theta_ratio, st_.theta.norm() / cfg_.m_theta);
  diag_.max_b_ratio =
      std::max(diag_.max_b_ratio, std::abs(st_.b_hat) / cfg_.m_b);
  diag_.min_m = std::min(diag_.min_m, diag_.m);
  diag_.max_phi_ratio =
      std::max(diag_.max_phi_ratio, st_.phi_n.norm() / diag_.m);
  diag_.max_un_ratio =
      std::max(diag_.max_un_ratio, std::abs(st_.u_n) / diag_.m);
}

double Controller::step(double x, double r, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("controller dt must be > 0");
  if (!std::isfinite(x) || !std::isfinite(r)) {
    frozen_ = true;
    return last_u_;
  }
  const double e = x - st_.x_m;
  st_.gamma_k = scheduled_gain(cfg_, r);

  if (cfg_.legacy_unnormalized) {
    // Raw gradient law on the unfiltered regressor; kept for comparison.
    if (!frozen_) {
      const Vec2 phi(x, r);
      st_.theta += dt * Vec2(-st_.gamma_k * sign_b_ * phi * e);
      diag_.e = e;
      if (!st_.theta.allFinite()) frozen_ = true;
    }
  } else {
    adapt_step(e, dt);
  }

  const double u = control_output(x, r);
  reference_step(r, e, dt);
  filter_step(x, r, u, dt);
  last_u_ = u;
  return u;
}

double Controller::lyapunov_value(double true_a, double true_b) const {
  if (true_b == 0.0)
    throw std::invalid_argument("lyapunov_value needs a nonzero true gain");
  const Vec2 theta_star((cfg_.a_m - true_a) / true_b, cfg_.b_m / true_b);
  const Vec2 theta_err = st_.theta - theta_star;
  const double b_err = st_.b_hat - true_b;
  return (std::abs(true_b) * theta_err.squaredNorm() + b_err * b_err) /
         (2.0 * st_.gamma_k);
}

}  // namespace droopsim::mrac
