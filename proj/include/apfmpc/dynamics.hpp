#pragma once

#include <Eigen/Dense>

namespace apfmpc {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Matrix62d = Eigen::Matrix<double, 6, 2>;

/// Vehicle state in the global Cartesian frame.
/// Velocities v_x, v_y are expressed in the ego frame.
struct VehicleState {
  double p_x = 0.0;   ///< position x [m]
  double p_y = 0.0;   ///< position y [m]
  double phi = 0.0;   ///< heading angle [rad]
  double v_x = 0.0;   ///< longitudinal velocity [m/s]
  double v_y = 0.0;   ///< lateral velocity [m/s]
  double omega = 0.0; ///< yaw rate [rad/s]

  Vector6d vec() const {
    Vector6d v;
    v << p_x, p_y, phi, v_x, v_y, omega;
    return v;
  }
  static VehicleState from_vec(const Vector6d& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }
  bool finite() const;
};

struct ControlInput {
  double a = 0.0;     ///< longitudinal acceleration [m/s^2]
  double delta = 0.0; ///< front steering angle [rad]

  Eigen::Vector2d vec() const { return {a, delta}; }
  bool finite() const;
};

/// Single-track dynamic model parameters. Cornering stiffnesses are
/// negative by convention.
struct VehicleParams {
  double m = 1412.0;       ///< mass [kg]
  double l_f = 1.06;       ///< CoG to front axle [m]
  double l_r = 1.85;       ///< CoG to rear axle [m]
  double k_f = -128916.0;  ///< front cornering stiffness [N/rad]
  double k_r = -85944.0;   ///< rear cornering stiffness [N/rad]
  double I_z = 1536.7;     ///< polar moment of inertia [kg m^2]

  double L_k() const { return l_f * k_f - l_r * k_r; }
  void validate() const; ///< throws std::invalid_argument on bad values
};

/// Box bounds on states and controls used by the OCP.
struct StateControlBounds {
  double v_x_min = 0.0, v_x_max = 16.7;
  double v_y_min = -3.0, v_y_max = 3.0;
  double omega_min = -1.0, omega_max = 1.0;
  double a_min = -6.0, a_max = 3.0;
  double delta_min = -0.6, delta_max = 0.6;
  void validate() const;
};

/// Advances the state one sampling period with the backward-Euler discrete
/// single-track model. Throws std::domain_error on non-finite inputs and
/// when either lateral-dynamics denominator falls below 1e-9 in magnitude.
VehicleState step(const VehicleState& state, const ControlInput& input,
                  const VehicleParams& params, double t_s);

/// Analytic Jacobians of step() with respect to state (6x6) and input (6x2).
struct StepJacobians {
  Matrix6d d_state;
  Matrix62d d_input;
};

StepJacobians step_jacobians(const VehicleState& state, const ControlInput& input,
                             const VehicleParams& params, double t_s);

}  // namespace apfmpc
