#include "apfmpc/mpc.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace apfmpc {

namespace {

constexpr int kMaxIterations = 50;
constexpr int kMaxLineSearch = 20;
constexpr double kOptimalityTol = 1e-4;

using ControlVec = Eigen::VectorXd;  // stacked [a_1, delta_1, ..., a_N, delta_N]

ControlVec pack(const std::vector<ControlInput>& u) {
  ControlVec v(2 * u.size());
  for (size_t i = 0; i < u.size(); ++i) {
    v[2 * i] = u[i].a;
    v[2 * i + 1] = u[i].delta;
  }
  return v;
}

std::vector<ControlInput> unpack(const ControlVec& v) {
  std::vector<ControlInput> u(v.size() / 2);
  for (size_t i = 0; i < u.size(); ++i) u[i] = {v[2 * i], v[2 * i + 1]};
  return u;
}

ControlVec clamp_to_bounds(ControlVec v, const StateControlBounds& b) {
  for (Eigen::Index i = 0; i < v.size(); i += 2) {
    v[i] = std::clamp(v[i], b.a_min, b.a_max);
    v[i + 1] = std::clamp(v[i + 1], b.delta_min, b.delta_max);
  }
  return v;
}

// Tracking error with the heading component wrapped to (-pi, pi].
Vector6d tracking_error(const VehicleState& ref, const VehicleState& x) {
  Vector6d e = ref.vec() - x.vec();
  e[2] = wrap_angle(e[2]);
  return e;
}

double state_penalty(const VehicleState& x, const StateControlBounds& b, double w) {
  auto over = [](double v, double lo, double hi) {
    if (v < lo) return lo - v;
    if (v > hi) return v - hi;
    return 0.0;
  };
  const double dvx = over(x.v_x, b.v_x_min, b.v_x_max);
  const double dvy = over(x.v_y, b.v_y_min, b.v_y_max);
  const double dom = over(x.omega, b.omega_min, b.omega_max);
  return w * (dvx * dvx + dvy * dvy + dom * dom);
}

Vector6d state_penalty_gradient(const VehicleState& x, const StateControlBounds& b,
                                double w) {
  auto signed_over = [](double v, double lo, double hi) {
    if (v < lo) return v - lo;
    if (v > hi) return v - hi;
    return 0.0;
  };
  Vector6d g = Vector6d::Zero();
  g[3] = 2.0 * w * signed_over(x.v_x, b.v_x_min, b.v_x_max);
  g[4] = 2.0 * w * signed_over(x.v_y, b.v_y_min, b.v_y_max);
  g[5] = 2.0 * w * signed_over(x.omega, b.omega_min, b.omega_max);
  return g;
}

const EnvironmentSnapshot& env_at(const OcpProblem& p, int step) {
  if (p.env.size() == 1) return p.env.front();
  return p.env[step];
}

double objective_impl(const OcpProblem& p, const std::vector<ControlInput>& u,
                      bool with_penalty, std::vector<VehicleState>* states_out) {
  const int n = p.horizon;
  double cost = 0.0;
  VehicleState x = p.initial;
  if (states_out) states_out->clear();
  for (int k = 0; k < n; ++k) {
    x = step(x, u[k], p.params, p.t_s);
    if (states_out) states_out->push_back(x);

    const Vector6d e = tracking_error(p.reference.states[k], x);
    cost += e.dot(p.weights.q.asDiagonal() * e);
    const Eigen::Vector2d uv = u[k].vec();
    cost += uv.dot(p.weights.r.asDiagonal() * uv);
    if (k > 0) {
      const Eigen::Vector2d du = uv - u[k - 1].vec();
      cost += du.dot(p.weights.r_d.asDiagonal() * du);
    }
    cost += total_field(env_at(p, k), x, p.pf);
    if (with_penalty) cost += state_penalty(x, p.bounds, p.state_penalty_weight);
  }
  return cost;
}

// Gradient of the (penalized) objective by reverse accumulation through the
// single-shooting rollout.
ControlVec objective_gradient(const OcpProblem& p, const std::vector<ControlInput>& u) {
  const int n = p.horizon;
  std::vector<VehicleState> xs(n);
  std::vector<Matrix6d> a_jac(n);
  std::vector<Matrix62d> b_jac(n);

  VehicleState x = p.initial;
  for (int k = 0; k < n; ++k) {
    const StepJacobians jac = step_jacobians(x, u[k], p.params, p.t_s);
    a_jac[k] = jac.d_state;
    b_jac[k] = jac.d_input;
    x = step(x, u[k], p.params, p.t_s);
    xs[k] = x;
  }

  std::vector<Vector6d> stage_gx(n);
  for (int k = 0; k < n; ++k) {
    const Vector6d e = tracking_error(p.reference.states[k], xs[k]);
    stage_gx[k] = -2.0 * (p.weights.q.asDiagonal() * e);
    stage_gx[k] += field_gradient(env_at(p, k), xs[k], p.pf);
    stage_gx[k] += state_penalty_gradient(xs[k], p.bounds, p.state_penalty_weight);
  }

  ControlVec grad = ControlVec::Zero(2 * n);
  Vector6d lambda = stage_gx[n - 1];
  for (int k = n - 1; k >= 0; --k) {
    if (k < n - 1) lambda = stage_gx[k] + a_jac[k + 1].transpose() * lambda;
    grad.segment<2>(2 * k) += b_jac[k].transpose() * lambda;
  }
  for (int k = 0; k < n; ++k) {
    Eigen::Vector2d gu = 2.0 * (p.weights.r.asDiagonal() * u[k].vec());
    if (k > 0) gu += 2.0 * (p.weights.r_d.asDiagonal() * (u[k].vec() - u[k - 1].vec()));
    if (k < n - 1) gu -= 2.0 * (p.weights.r_d.asDiagonal() * (u[k + 1].vec() - u[k].vec()));
    grad.segment<2>(2 * k) += gu;
  }
  return grad;
}

}  // namespace

void MpcWeights::validate() const {
  if ((q.array() < 0.0).any() || (r.array() < 0.0).any() || (r_d.array() < 0.0).any()) {
    throw std::invalid_argument("MpcWeights: weights must be >= 0");
  }
}

void OcpProblem::validate() const {
  if (horizon < 1) throw std::invalid_argument("OcpProblem: horizon must be >= 1");
  if (!(t_s > 0.0)) throw std::invalid_argument("OcpProblem: t_s must be > 0");
  if (static_cast<int>(reference.states.size()) != horizon) {
    throw std::invalid_argument("OcpProblem: reference length must equal horizon");
  }
  if (env.size() != 1 && static_cast<int>(env.size()) != horizon) {
    throw std::invalid_argument("OcpProblem: need 1 or N environment snapshots");
  }
  weights.validate();
  bounds.validate();
  params.validate();
  pf.validate();
}

double evaluate_cost(const OcpProblem& problem, const std::vector<ControlInput>& controls) {
  if (static_cast<int>(controls.size()) != problem.horizon) {
    throw std::invalid_argument("evaluate_cost: control sequence length mismatch");
  }
  return objective_impl(problem, controls, /*with_penalty=*/false, nullptr);
}

double evaluate_objective(const OcpProblem& problem,
                          const std::vector<ControlInput>& controls) {
  if (static_cast<int>(controls.size()) != problem.horizon) {
    throw std::invalid_argument("evaluate_objective: control sequence length mismatch");
  }
  return objective_impl(problem, controls, /*with_penalty=*/true, nullptr);
}

OcpSolution solve(const OcpProblem& problem,
                  const std::optional<std::vector<ControlInput>>& warm_start) {
  problem.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n = problem.horizon;

  ControlVec u = warm_start ? pack(*warm_start) : ControlVec::Zero(2 * n);
  if (warm_start && static_cast<int>(warm_start->size()) != n) {
    throw std::invalid_argument("solve: warm start length mismatch");
  }
  u = clamp_to_bounds(u, problem.bounds);

  double f = objective_impl(problem, unpack(u), true, nullptr);
  if (!std::isfinite(f)) throw std::runtime_error("solve: objective non-finite at start");

  ControlVec grad = objective_gradient(problem, unpack(u));
  ControlVec prev_u, prev_grad;
  bool converged = false;
  int iter = 0;
  double alpha = 1.0 / std::max(1.0, grad.lpNorm<Eigen::Infinity>());

  for (iter = 0; iter < kMaxIterations; ++iter) {
    const ControlVec projected = clamp_to_bounds(u - grad, problem.bounds);
    if ((projected - u).norm() < kOptimalityTol) {
      converged = true;
      break;
    }

    if (prev_u.size() > 0) {
      const ControlVec s = u - prev_u;
      const ControlVec y = grad - prev_grad;
      const double sy = s.dot(y);
      if (sy > 1e-14) alpha = s.dot(s) / sy;  // BB1 step
      alpha = std::clamp(alpha, 1e-8, 1e4);
    }

    double step_alpha = alpha;
    bool improved = false;
    ControlVec u_next;
    double f_next = f;
    for (int ls = 0; ls < kMaxLineSearch; ++ls) {
      u_next = clamp_to_bounds(u - step_alpha * grad, problem.bounds);
      f_next = objective_impl(problem, unpack(u_next), true, nullptr);
      const double decrease = grad.dot(u - u_next);
      if (std::isfinite(f_next) && f_next <= f - 1e-4 * decrease) {
        improved = true;
        break;
      }
      step_alpha *= 0.5;
    }
    if (!improved || f_next >= f) break;

    prev_u = u;
    prev_grad = grad;
    u = u_next;
    f = f_next;
    grad = objective_gradient(problem, unpack(u));
  }

  OcpSolution sol;
  sol.controls = unpack(u);
  sol.cost = objective_impl(problem, sol.controls, true, &sol.states);
  sol.iterations = iter;
  sol.converged = converged;
  sol.solve_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  return sol;
}

std::vector<ControlInput> shift_warm_start(const std::vector<ControlInput>& previous) {
  if (previous.empty()) return {};
  std::vector<ControlInput> shifted(previous.begin() + 1, previous.end());
  shifted.push_back(previous.back());
  return shifted;
}

}  // namespace apfmpc
