#pragma once

#include <utility>
#include <vector>

#include "apfmpc/dynamics.hpp"
#include "apfmpc/road.hpp"

namespace apfmpc {

/// Intensity / shape / range parameters of the four potential classes.
struct PotentialConfig {
  // non-traversable lane markings
  double a_nr = 100.0;
  double b_nr = 2.0;
  double nr_inner = 0.1;  ///< inner cutoff [m]
  double nr_outer = 1.5;  ///< outer cutoff [m]
  // traversable lane markings
  double a_tr = 20.0;
  double b_tr = 1.0;  ///< effective range [m]
  // surrounding vehicles
  double a_v = 5.0;
  double b_v = 1.0;
  double r_v = 1.2;                ///< circle radius [m]
  double v_dist2_floor = 0.01;     ///< squared-distance saturation floor [m^2]
  // traffic lights
  double a_tl1 = 20.0;  ///< longitudinal intensity
  double a_tl2 = 40.0;  ///< lateral intensity
  double tl_dx_min = 0.5;       ///< longitudinal distance clamp [m]
  double tl_lat_min = 0.1;      ///< lateral distance clamp [m]
  double tl_activation = 40.0;  ///< upstream activation window [m]

  double query_range = 50.0;  ///< environment query radius [m]

  void validate() const;
};

struct SurroundingVehicle {
  double p_x = 0.0;
  double p_y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
  double length = 4.5;
  double width = 2.0;
};

/// World features visible to the controller at one time instant.
struct EnvironmentSnapshot {
  std::vector<MarkingObservation> markings;
  std::vector<LightObservation> lights;
  std::vector<SurroundingVehicle> vehicles;
  double lane_width = 3.5;

  static EnvironmentSnapshot from_query(const EnvironmentQuery& query,
                                        std::vector<SurroundingVehicle> vehicles);
};

/// Non-traversable-marking potential: inverse-power middle branch with
/// continuity constants at the 0.1 m and 1.5 m cutoffs.
double pf_non_traversable(double s_r, const PotentialConfig& cfg);

/// Traversable-marking potential: quadratic inside the effective range.
double pf_traversable(double s_r, const PotentialConfig& cfg);

/// Front and rear circle centers of the two-circle footprint.
std::pair<Vector2d, Vector2d> circle_centers(const Vector2d& position, double heading,
                                             double r_v);

/// Vehicle potential summed over the four circle-center pairs; squared
/// distances saturate at the configured floor instead of diverging.
double pf_vehicle(const std::pair<Vector2d, Vector2d>& ev_circles,
                  const SurroundingVehicle& sv, const PotentialConfig& cfg);

/// Traffic-light potential over pre-clamped positive distances.
double pf_traffic_light(double d_x, double d_yl, double d_yr, double c_tl,
                        const PotentialConfig& cfg);

/// Per-class sums of the total potential field at one ego state.
struct FieldBreakdown {
  double nr = 0.0;
  double tr = 0.0;
  double vehicles = 0.0;
  double tl = 0.0;
  double total() const { return nr + tr + vehicles + tl; }
};

FieldBreakdown evaluate_field(const EnvironmentSnapshot& env, const VehicleState& ev_state,
                              const PotentialConfig& cfg);

double total_field(const EnvironmentSnapshot& env, const VehicleState& ev_state,
                   const PotentialConfig& cfg);

/// Analytic gradient of total_field with respect to the 6-component state.
Vector6d field_gradient(const EnvironmentSnapshot& env, const VehicleState& ev_state,
                        const PotentialConfig& cfg);

}  // namespace apfmpc
