#pragma once

#include <optional>
#include <vector>

#include "apfmpc/dynamics.hpp"
#include "apfmpc/potential.hpp"
#include "apfmpc/road.hpp"

namespace apfmpc {

/// Diagonal weights of the tracking, control-energy, and control-rate terms.
struct MpcWeights {
  Vector6d q = (Vector6d() << 1.0, 1.0, 0.5, 2.0, 0.1, 0.1).finished();
  Eigen::Vector2d r{0.5, 10.0};
  Eigen::Vector2d r_d{1.0, 50.0};

  void validate() const;
};

/// One receding-horizon optimal control problem instance.
struct OcpProblem {
  VehicleState initial;
  ReferenceTrajectory reference;            ///< length N
  std::vector<EnvironmentSnapshot> env;     ///< length N (one snapshot per step)
  MpcWeights weights;
  StateControlBounds bounds;
  VehicleParams params;
  PotentialConfig pf;
  int horizon = 10;
  double t_s = 0.05;
  double state_penalty_weight = 1e3;  ///< quadratic penalty outside state box

  void validate() const;
};

struct OcpSolution {
  std::vector<ControlInput> controls;  ///< length N, within bounds
  std::vector<VehicleState> states;    ///< length N, single-shooting rollout
  double cost = 0.0;                   ///< objective at the returned controls
  int iterations = 0;
  bool converged = false;
  double solve_time_ms = 0.0;
};

/// Tracking + energy + rate + potential-field cost of a control sequence
/// rolled out from the problem's initial state.
double evaluate_cost(const OcpProblem& problem, const std::vector<ControlInput>& controls);

/// evaluate_cost plus the quadratic penalty on state-box violations; this is
/// what the solver minimizes.
double evaluate_objective(const OcpProblem& problem,
                          const std::vector<ControlInput>& controls);

/// Projected gradient descent with Barzilai-Borwein steps and Armijo
/// backtracking over box-constrained controls. Never returns an objective
/// above the starting point's. Throws std::runtime_error when the objective
/// is non-finite at the initial point.
OcpSolution solve(const OcpProblem& problem,
                  const std::optional<std::vector<ControlInput>>& warm_start = std::nullopt);

/// Receding-horizon warm start: drop the first control, repeat the last.
std::vector<ControlInput> shift_warm_start(const std::vector<ControlInput>& previous);

}  // namespace apfmpc
