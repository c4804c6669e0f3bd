#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "apfmpc/config.hpp"
#include "apfmpc/mpc.hpp"
#include "apfmpc/potential.hpp"

namespace apfmpc {

/// One logged control step of a trial.
struct TrialStep {
  double t = 0.0;
  VehicleState ev;
  ControlInput control;
  VehicleState ref;  ///< first reference state of the step
  double dp = 0.0;   ///< |ev position - ref position|
  double dv = 0.0;   ///< |v_x - ref v_x|
  double dphi = 0.0; ///< |wrap(phi - ref phi)|
  FieldBreakdown pf; ///< class-wise field sums at the ego state
  double solve_ms = 0.0;
  std::vector<SurroundingVehicle> svs;  ///< world state for replay checks
};

struct TrialLog {
  std::vector<TrialStep> steps;
  std::uint64_t seed = 0;
};

struct TrialOutcome {
  bool success = false;   ///< true iff no collision occurred
  bool collision = false;
  bool crossed_non_traversable = false;
  bool ran_red_light = false;
  bool goal_reached = false;
  bool aborted = false;        ///< solver/dynamics failure ended the trial
  std::string diagnostic;
  double mean_dp = 0.0, mean_dv = 0.0, mean_dphi = 0.0;
  double mean_solve_ms = 0.0, sd_solve_ms = 0.0, max_solve_ms = 0.0;
};

/// Runtime state of one scripted vehicle.
struct SvRuntime {
  const SvScript* script = nullptr;
  std::vector<Vector2d> path;
  double arc = 0.0;
  double lateral_offset = 0.0;
  double speed_offset = 0.0;
  SurroundingVehicle current;
};

struct WorldState {
  double time = 0.0;
  VehicleState ev;
  ControlInput control;
  std::vector<SvRuntime> svs;
};

/// Deterministic closed-loop world for one scenario.
class Simulator {
 public:
  explicit Simulator(const ScenarioConfig& scenario);

  /// Initial world for a trial seed (applies scripted-vehicle jitter).
  WorldState make_world(std::uint64_t seed) const;

  /// Advances the ego with the stored control, scripted vehicles per their
  /// scripts, and simulation time by t_s.
  void tick(WorldState& world, double t_s) const;

  /// Two-circle overlap test; returns the index of the first colliding
  /// scripted vehicle, or -1.
  int detect_collision(const VehicleState& ev,
                       const std::vector<SurroundingVehicle>& svs) const;

  struct ViolationFlags {
    bool crossed_non_traversable = false;
    bool ran_red_light = false;
  };
  /// Rule checks for one step; red-light crossing compares the ego front's
  /// stop-line distance against the previous step's.
  ViolationFlags detect_violations(const VehicleState& ev, double time,
                                   const VehicleState& prev_ev) const;

  /// Full closed loop: query -> reference -> solve -> apply -> tick.
  std::pair<TrialLog, TrialOutcome> run_trial(std::uint64_t seed) const;

  const ScenarioConfig& scenario() const { return scenario_; }
  const std::vector<Vector2d>& route() const { return route_; }

 private:
  SurroundingVehicle sv_pose_at(const SvRuntime& sv) const;
  double sv_speed_at(const SvRuntime& sv, double time) const;

  ScenarioConfig scenario_;
  std::vector<Vector2d> route_;
};

/// Writes the fixed-column per-step CSV (schema documented in the README).
void write_trial_csv(std::ostream& os, const TrialLog& log);

/// Batch summary row per scenario: success rate, error means, timing stats.
struct BatchSummary {
  std::string scenario;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  double mean_dp = 0.0, mean_dv = 0.0, mean_dphi = 0.0;
  double mean_solve_ms = 0.0, sd_solve_ms = 0.0, max_solve_ms = 0.0;
};

BatchSummary summarize(const std::string& scenario_name,
                       const std::vector<TrialOutcome>& outcomes);
void write_summary_csv(std::ostream& os, const BatchSummary& summary);

}  // namespace apfmpc
