#include "apfmpc/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace apfmpc {

namespace {
constexpr double kDenominatorFloor = 1e-9;
}

bool VehicleState::finite() const {
  return std::isfinite(p_x) && std::isfinite(p_y) && std::isfinite(phi) &&
         std::isfinite(v_x) && std::isfinite(v_y) && std::isfinite(omega);
}

bool ControlInput::finite() const {
  return std::isfinite(a) && std::isfinite(delta);
}

void VehicleParams::validate() const {
  if (!(m > 0.0)) throw std::invalid_argument("VehicleParams: m must be > 0");
  if (!(I_z > 0.0)) throw std::invalid_argument("VehicleParams: I_z must be > 0");
  if (!(l_f > 0.0)) throw std::invalid_argument("VehicleParams: l_f must be > 0");
  if (!(l_r > 0.0)) throw std::invalid_argument("VehicleParams: l_r must be > 0");
  if (!(k_f < 0.0)) throw std::invalid_argument("VehicleParams: k_f must be < 0");
  if (!(k_r < 0.0)) throw std::invalid_argument("VehicleParams: k_r must be < 0");
}

void StateControlBounds::validate() const {
  if (v_x_min > v_x_max || v_y_min > v_y_max || omega_min > omega_max ||
      a_min > a_max || delta_min > delta_max) {
    throw std::invalid_argument("StateControlBounds: min above max");
  }
}

VehicleState step(const VehicleState& state, const ControlInput& input,
                  const VehicleParams& params, double t_s) {
  if (!(t_s > 0.0)) throw std::domain_error("step: t_s must be > 0");
  if (!state.finite() || !input.finite()) {
    throw std::domain_error("step: non-finite state or control");
  }

  const double m = params.m, i_z = params.I_z;
  const double l_f = params.l_f, l_r = params.l_r;
  const double k_f = params.k_f, k_r = params.k_r;
  const double l_k = params.L_k();

  const double den_vy = m * state.v_x - t_s * (k_f + k_r);
  const double den_om = i_z * state.v_x - t_s * (l_f * l_f * k_f + l_r * l_r * k_r);
  if (std::abs(den_vy) < kDenominatorFloor || std::abs(den_om) < kDenominatorFloor) {
    throw std::domain_error("step: degenerate lateral dynamics denominator");
  }

  const double c = std::cos(state.phi);
  const double s = std::sin(state.phi);

  VehicleState next;
  next.p_x = state.p_x + t_s * (state.v_x * c - state.v_y * s);
  next.p_y = state.p_y + t_s * (state.v_y * c + state.v_x * s);
  next.phi = state.phi + t_s * state.omega;
  next.v_x = state.v_x + t_s * input.a;
  next.v_y = (m * state.v_x * state.v_y + t_s * l_k * state.omega -
              t_s * k_f * input.delta * state.v_x -
              t_s * m * state.v_x * state.v_x * state.omega) /
             den_vy;
  next.omega = (i_z * state.v_x * state.omega + t_s * l_k * state.v_y -
                t_s * l_f * k_f * input.delta * state.v_x) /
               den_om;
  return next;
}

StepJacobians step_jacobians(const VehicleState& state, const ControlInput& input,
                             const VehicleParams& params, double t_s) {
  if (!(t_s > 0.0)) throw std::domain_error("step_jacobians: t_s must be > 0");
  if (!state.finite() || !input.finite()) {
    throw std::domain_error("step_jacobians: non-finite state or control");
  }

  const double m = params.m, i_z = params.I_z;
  const double l_f = params.l_f, l_r = params.l_r;
  const double k_f = params.k_f, k_r = params.k_r;
  const double l_k = params.L_k();
  const double vx = state.v_x, vy = state.v_y, om = state.omega;
  const double de = input.delta;

  const double den_vy = m * vx - t_s * (k_f + k_r);
  const double den_om = i_z * vx - t_s * (l_f * l_f * k_f + l_r * l_r * k_r);
  if (std::abs(den_vy) < kDenominatorFloor || std::abs(den_om) < kDenominatorFloor) {
    throw std::domain_error("step_jacobians: degenerate lateral dynamics denominator");
  }

  const double c = std::cos(state.phi);
  const double s = std::sin(state.phi);

  StepJacobians jac;
  Matrix6d& a = jac.d_state;
  Matrix62d& b = jac.d_input;
  a = Matrix6d::Identity();
  b.setZero();

  // position rows
  a(0, 2) = t_s * (-vx * s - vy * c);
  a(0, 3) = t_s * c;
  a(0, 4) = -t_s * s;
  a(1, 2) = t_s * (vy * -s + vx * c);
  a(1, 3) = t_s * s;
  a(1, 4) = t_s * c;

  // heading and longitudinal velocity rows
  a(2, 5) = t_s;
  b(3, 0) = t_s;

  // lateral velocity row: quotient rule on N_v / D_v
  const double n_vy = m * vx * vy + t_s * l_k * om - t_s * k_f * de * vx -
                      t_s * m * vx * vx * om;
  const double dn_vy_dvx = m * vy - t_s * k_f * de - 2.0 * t_s * m * vx * om;
  a(4, 3) = (dn_vy_dvx * den_vy - n_vy * m) / (den_vy * den_vy);
  a(4, 4) = m * vx / den_vy;
  a(4, 5) = (t_s * l_k - t_s * m * vx * vx) / den_vy;
  b(4, 1) = -t_s * k_f * vx / den_vy;

  // yaw rate row
  const double n_om = i_z * vx * om + t_s * l_k * vy - t_s * l_f * k_f * de * vx;
  const double dn_om_dvx = i_z * om - t_s * l_f * k_f * de;
  a(5, 3) = (dn_om_dvx * den_om - n_om * i_z) / (den_om * den_om);
  a(5, 4) = t_s * l_k / den_om;
  a(5, 5) = i_z * vx / den_om;
  b(5, 1) = -t_s * l_f * k_f * vx / den_om;

  return jac;
}

}  // namespace apfmpc
