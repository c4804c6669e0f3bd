#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "apfmpc/dynamics.hpp"

namespace apfmpc {

using Eigen::Vector2d;

/// Sampled point of a lane centerline: position plus road tangent angle.
///
/// `beta` uses the heading-angle-paralleled (HAP) convention: the lateral
/// axis is (sin beta, cos beta) and the road direction is (cos beta,
/// -sin beta), i.e. beta = -atan2(dy, dx) of the travel direction. With
/// this convention the lateral axis is the left normal of travel.
struct CenterlinePoint {
  double p_x = 0.0;
  double p_y = 0.0;
  double beta = 0.0;  ///< HAP road tangent angle, in (-pi, pi]

  Vector2d pos() const { return {p_x, p_y}; }
};

enum class MarkingKind { NonTraversable, Traversable };
enum class Side { Left, Right };

/// A lane marking referenced to the centerline of the lane that owns it.
/// The marking line itself lies half a lane width to `side` of `polyline`.
struct LaneMarking {
  MarkingKind kind = MarkingKind::NonTraversable;
  Side side = Side::Left;
  std::vector<CenterlinePoint> polyline;  ///< owning-lane centerline samples
  void validate() const;
};

enum class LightPhase { Green, Red, Amber };

struct PhaseEntry {
  LightPhase phase = LightPhase::Green;
  double duration = 1.0;  ///< seconds, > 0
};

/// Signalized stop line. The phase schedule cycles indefinitely.
struct TrafficLight {
  Vector2d stop_point{0.0, 0.0};   ///< a point on the stop line
  double tangent = 0.0;            ///< direction of travel at the stop line, atan2 convention [rad]
  std::vector<PhaseEntry> schedule;
  std::vector<CenterlinePoint> lane_centerline;  ///< lane the light governs

  LightPhase phase_at(double time) const;
  /// 0 when green, 1 otherwise (amber treated as red).
  double indicator_at(double time) const;
  void validate() const;
};

/// Directed lane segment of the lane graph.
struct LaneSegment {
  std::vector<Vector2d> waypoints;
  std::vector<int> successors;
  int left_neighbor = -1;   ///< -1 when absent
  int right_neighbor = -1;

  double arc_length() const;
};

struct RoadModel {
  std::vector<LaneSegment> lanes;
  std::vector<LaneMarking> markings;
  std::vector<TrafficLight> lights;
  double lane_width = 3.5;  ///< w_R [m]

  void validate() const;
};

/// Lateral coordinate of a point in the heading-angle-paralleled frame of
/// the reference centerline point: p_x sin(beta) + p_y cos(beta).
double hap_lateral(const Vector2d& position, const CenterlinePoint& ref);

/// Signed gap between the ego position and a lane marking half a lane width
/// to `side` of the reference centerline point. Positive while the ego is
/// on the legal side of the marking.
double lateral_gap_to_marking(const Vector2d& ev_position,
                              const CenterlinePoint& marking_ref, Side side,
                              double lane_width);

/// Nearest point of a centerline polyline by arc-length projection, with
/// linearly interpolated position and shortest-path-interpolated tangent.
CenterlinePoint project_to_centerline(const std::vector<CenterlinePoint>& polyline,
                                      const Vector2d& position);

struct CenterlineProjection {
  CenterlinePoint point;
  bool interior = true;  ///< false when the query lies longitudinally past an end
};

/// As project_to_centerline, additionally reporting whether the query point
/// projects onto the polyline's interior or overshoots an end.
CenterlineProjection project_to_centerline_ex(const std::vector<CenterlinePoint>& polyline,
                                              const Vector2d& position);

/// Natural cubic spline through 2D waypoints, reparameterized so that the
/// knot parameter matches arc length (fixed-point refit, Gauss-Legendre
/// segment quadrature).
class PathSpline {
 public:
  explicit PathSpline(const std::vector<Vector2d>& waypoints);

  double total_length() const { return knots_.back(); }
  Vector2d position(double s) const;
  double tangent_angle(double s) const;
  double curvature(double s) const;
  /// Arc length of the point on the spline closest to `p`.
  double project(const Vector2d& p) const;

 private:
  struct Poly {  // cubic coefficients per segment, per coordinate
    double a, b, c, d;
    double eval(double t) const { return ((d * t + c) * t + b) * t + a; }
    double deriv(double t) const { return (3.0 * d * t + 2.0 * c) * t + b; }
    double deriv2(double t) const { return 6.0 * d * t + 2.0 * c; }
  };
  void fit(const std::vector<Vector2d>& pts, const std::vector<double>& knots);
  double segment_arc_length(int seg, double t0, double t1) const;
  int locate(double s, double* t_local) const;

  std::vector<double> knots_;
  std::vector<Poly> seg_x_, seg_y_;
};

struct RoutePlan {
  std::vector<int> nodes;
  std::vector<Vector2d> waypoints;
  double cost = 0.0;
};

/// A* over the lane graph with arc-length edge cost and a Euclidean
/// heuristic; ties broken toward the lowest node index. Throws
/// std::runtime_error when the goal is unreachable.
RoutePlan plan_global_path(const RoadModel& road, int start, int goal);

/// Per-step reference states sampled along a spline through the path.
struct ReferenceTrajectory {
  std::vector<VehicleState> states;  ///< length N
};

/// Samples N reference states at arc-length increments v_ref * t_s ahead of
/// the ego's projection onto the path. Past the path end the reference
/// clamps to the terminal waypoint with zero target speed.
ReferenceTrajectory build_reference(const std::vector<Vector2d>& path,
                                    const VehicleState& ev_state, double v_ref,
                                    int n_steps, double t_s);

struct MarkingObservation {
  MarkingKind kind;
  Side side;
  CenterlinePoint ref;   ///< nearest owning-centerline point to the ego
  double distance = 0.0; ///< ego distance to that point [m]
};

struct LightObservation {
  double c_tl = 0.0;
  Vector2d stop_point{0.0, 0.0};
  double tangent = 0.0;
  CenterlinePoint lane_ref;  ///< for the lateral d_yl / d_yr terms
};

struct EnvironmentQuery {
  std::vector<MarkingObservation> markings;
  std::vector<LightObservation> lights;
  std::optional<CenterlinePoint> lane_ref;  ///< nearest lane centerline point
  double lane_width = 3.5;
};

/// Collects road features within `range` of the ego. Light indicators are
/// evaluated at simulation time `time`.
EnvironmentQuery query_environment(const RoadModel& road, const VehicleState& ev_state,
                                   double range, double time);

double wrap_angle(double angle);  ///< wraps to (-pi, pi]

}  // namespace apfmpc
