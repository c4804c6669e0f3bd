#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "apfmpc/dynamics.hpp"
#include "apfmpc/mpc.hpp"
#include "apfmpc/potential.hpp"
#include "apfmpc/road.hpp"

namespace apfmpc {

enum class SvBehavior { ConstantSpeed, PiecewiseSpeed, LaneFollow };

/// Scripted surrounding-vehicle motion: kinematic advance along a polyline
/// (or straight along the initial heading when no path is given).
struct SvScript {
  SvBehavior behavior = SvBehavior::ConstantSpeed;
  double init_x = 0.0, init_y = 0.0, heading = 0.0;
  double speed = 0.0;                                ///< base speed [m/s]
  std::vector<std::pair<double, double>> schedule;   ///< (time, speed) for PiecewiseSpeed
  std::vector<Vector2d> path;                        ///< for LaneFollow
  bool loop = false;                                 ///< wrap arc length on closed paths
  double length = 4.5, width = 2.0;
  // Uniform jitter half-ranges applied per trial seed.
  double jitter_along = 0.0, jitter_lateral = 0.0, jitter_speed = 0.0;

  void validate() const;
};

struct ScenarioConfig {
  std::string name;
  RoadModel road;
  VehicleState ev_initial;
  int start_node = 0;
  int goal_node = 0;
  double v_ref = 10.0;  ///< m/s
  std::vector<SvScript> sv_scripts;
  VehicleParams params;
  StateControlBounds bounds;
  MpcWeights weights;
  PotentialConfig pf;
  int horizon = 10;
  double t_s = 0.05;
  int trials = 10;
  std::uint64_t seed = 1;
  double time_budget = 60.0;  ///< simulated seconds
  double goal_radius = 3.0;

  void validate() const;
};

/// Parses and validates a scenario config from a JSON file. Unknown keys are
/// errors. Speed values accept explicit "km/h" / "m/s" unit suffixes.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& json_text);

/// Serializes a config back to JSON; load/parse on the result reproduces an
/// equal config.
std::string echo_config(const ScenarioConfig& config);

/// Bundled desk-scale analogues of the three urban scenarios.
ScenarioConfig preset_roundabout();
ScenarioConfig preset_multilane_acc();
ScenarioConfig preset_crossroad();
/// Resolves "roundabout" / "multilane_acc" / "crossroad"; throws otherwise.
ScenarioConfig preset_by_name(const std::string& name);

}  // namespace apfmpc
