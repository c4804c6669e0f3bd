#include "apfmpc/road.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace apfmpc {

namespace {

// 10-point Gauss-Legendre rule on [-1, 1].
constexpr double kGaussNodes[10] = {
    -0.9739065285171717, -0.8650633666889845, -0.6794095682990244,
    -0.4333953941292472, -0.1488743389816312, 0.1488743389816312,
    0.4333953941292472,  0.6794095682990244,  0.8650633666889845,
    0.9739065285171717};
constexpr double kGaussWeights[10] = {
    0.0666713443086881, 0.1494513491505806, 0.2190863625159820,
    0.2692667193099963, 0.2955242247147529, 0.2955242247147529,
    0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
    0.0666713443086881};

double interp_angle(double a, double b, double t) {
  const double diff = wrap_angle(b - a);
  return wrap_angle(a + t * diff);
}

std::vector<double> natural_spline_coeffs_rhs(const std::vector<double>& knots,
                                              const std::vector<double>& y) {
  // Solves for second derivatives M_i with natural boundary conditions.
  const int n = static_cast<int>(y.size());
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  std::vector<double> h(n - 1);
  for (int i = 0; i < n - 1; ++i) h[i] = knots[i + 1] - knots[i];

  // Thomas algorithm on the interior tridiagonal system.
  std::vector<double> diag(n - 2), upper(n - 2), rhs(n - 2);
  for (int i = 1; i <= n - 2; ++i) {
    diag[i - 1] = 2.0 * (h[i - 1] + h[i]);
    upper[i - 1] = h[i];
    rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
  }
  for (int i = 1; i < n - 2; ++i) {
    const double w = h[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (int i = n - 3; i >= 0; --i) {
    const double above = (i + 1 <= n - 3) ? upper[i] * m[i + 2] : 0.0;
    m[i + 1] = (rhs[i] - above) / diag[i];
  }
  return m;
}

}  // namespace

double wrap_angle(double angle) {
  double a = std::fmod(angle + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

void LaneMarking::validate() const {
  if (polyline.size() < 2) {
    throw std::invalid_argument("LaneMarking: needs at least 2 polyline points");
  }
  for (size_t i = 0; i + 1 < polyline.size(); ++i) {
    const double d = (polyline[i + 1].pos() - polyline[i].pos()).norm();
    if (d > 10.0) {
      throw std::invalid_argument("LaneMarking: consecutive points farther than 10 m");
    }
  }
}

LightPhase TrafficLight::phase_at(double time) const {
  double cycle = 0.0;
  for (const auto& e : schedule) cycle += e.duration;
  double t = std::fmod(time, cycle);
  if (t < 0.0) t += cycle;
  for (const auto& e : schedule) {
    if (t < e.duration) return e.phase;
    t -= e.duration;
  }
  return schedule.back().phase;
}

double TrafficLight::indicator_at(double time) const {
  return phase_at(time) == LightPhase::Green ? 0.0 : 1.0;
}

void TrafficLight::validate() const {
  if (schedule.empty()) throw std::invalid_argument("TrafficLight: empty schedule");
  for (const auto& e : schedule) {
    if (!(e.duration > 0.0)) {
      throw std::invalid_argument("TrafficLight: phase duration must be > 0");
    }
  }
}

double LaneSegment::arc_length() const {
  double len = 0.0;
  for (size_t i = 0; i + 1 < waypoints.size(); ++i) {
    len += (waypoints[i + 1] - waypoints[i]).norm();
  }
  return len;
}

void RoadModel::validate() const {
  if (!(lane_width > 0.0)) throw std::invalid_argument("RoadModel: lane_width must be > 0");
  for (const auto& m : markings) m.validate();
  for (const auto& l : lights) l.validate();
  for (const auto& lane : lanes) {
    if (lane.waypoints.empty()) {
      throw std::invalid_argument("RoadModel: lane segment with no waypoints");
    }
    for (int s : lane.successors) {
      if (s < 0 || s >= static_cast<int>(lanes.size())) {
        throw std::invalid_argument("RoadModel: successor index out of range");
      }
    }
  }
}

double hap_lateral(const Vector2d& position, const CenterlinePoint& ref) {
  return position.x() * std::sin(ref.beta) + position.y() * std::cos(ref.beta);
}

double lateral_gap_to_marking(const Vector2d& ev_position,
                              const CenterlinePoint& marking_ref, Side side,
                              double lane_width) {
  const double p_y_ev = hap_lateral(marking_ref.pos(), marking_ref);
  const double y_ev = hap_lateral(ev_position, marking_ref);
  if (side == Side::Left) return (p_y_ev + 0.5 * lane_width) - y_ev;
  return y_ev - (p_y_ev - 0.5 * lane_width);
}

CenterlinePoint project_to_centerline(const std::vector<CenterlinePoint>& polyline,
                                      const Vector2d& position) {
  return project_to_centerline_ex(polyline, position).point;
}

CenterlineProjection project_to_centerline_ex(const std::vector<CenterlinePoint>& polyline,
                                              const Vector2d& position) {
  if (polyline.empty()) throw std::invalid_argument("project_to_centerline: empty polyline");
  if (polyline.size() == 1) return {polyline.front(), true};

  double best_d2 = std::numeric_limits<double>::infinity();
  CenterlinePoint best = polyline.front();
  for (size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Vector2d a = polyline[i].pos();
    const Vector2d b = polyline[i + 1].pos();
    const Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (position - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vector2d q = a + t * ab;
    const double d2 = (position - q).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best.p_x = q.x();
      best.p_y = q.y();
      best.beta = interp_angle(polyline[i].beta, polyline[i + 1].beta, t);
    }
  }

  // Travel direction in the HAP convention is (cos beta, -sin beta).
  bool interior = true;
  auto overshoot = [&](const CenterlinePoint& end, double sign) {
    const Vector2d dir{std::cos(end.beta), -std::sin(end.beta)};
    return sign * (position - end.pos()).dot(dir) > 1e-9;
  };
  if ((best.pos() - polyline.front().pos()).norm() < 1e-12 &&
      overshoot(polyline.front(), -1.0)) {
    interior = false;
  }
  if ((best.pos() - polyline.back().pos()).norm() < 1e-12 &&
      overshoot(polyline.back(), 1.0)) {
    interior = false;
  }
  return {best, interior};
}

// ---------------------------------------------------------------------------
// PathSpline

PathSpline::PathSpline(const std::vector<Vector2d>& waypoints) {
  if (waypoints.size() < 2) {
    throw std::invalid_argument("PathSpline: needs at least 2 waypoints");
  }
  const int n = static_cast<int>(waypoints.size());
  std::vector<double> knots(n, 0.0);
  for (int i = 1; i < n; ++i) {
    knots[i] = knots[i - 1] + (waypoints[i] - waypoints[i - 1]).norm();
  }
  if (!(knots.back() > 0.0)) {
    throw std::invalid_argument("PathSpline: degenerate (zero-length) path");
  }
  fit(waypoints, knots);
  // Refit with measured spline arc lengths as knots until self-consistent.
  for (int pass = 0; pass < 6; ++pass) {
    std::vector<double> next(n, 0.0);
    for (int i = 0; i < n - 1; ++i) {
      next[i + 1] = next[i] + segment_arc_length(i, 0.0, knots_[i + 1] - knots_[i]);
    }
    double delta = 0.0;
    for (int i = 0; i < n; ++i) delta = std::max(delta, std::abs(next[i] - knots_[i]));
    fit(waypoints, next);
    if (delta < 1e-12) break;
  }
}

void PathSpline::fit(const std::vector<Vector2d>& pts, const std::vector<double>& knots) {
  const int n = static_cast<int>(pts.size());
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = pts[i].x();
    ys[i] = pts[i].y();
  }
  const std::vector<double> mx = natural_spline_coeffs_rhs(knots, xs);
  const std::vector<double> my = natural_spline_coeffs_rhs(knots, ys);

  knots_ = knots;
  seg_x_.assign(n - 1, {});
  seg_y_.assign(n - 1, {});
  for (int i = 0; i < n - 1; ++i) {
    const double h = knots[i + 1] - knots[i];
    seg_x_[i] = {xs[i], (xs[i + 1] - xs[i]) / h - h * (2.0 * mx[i] + mx[i + 1]) / 6.0,
                 mx[i] / 2.0, (mx[i + 1] - mx[i]) / (6.0 * h)};
    seg_y_[i] = {ys[i], (ys[i + 1] - ys[i]) / h - h * (2.0 * my[i] + my[i + 1]) / 6.0,
                 my[i] / 2.0, (my[i + 1] - my[i]) / (6.0 * h)};
  }
}

double PathSpline::segment_arc_length(int seg, double t0, double t1) const {
  const double half = 0.5 * (t1 - t0);
  const double mid = 0.5 * (t0 + t1);
  double acc = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double t = mid + half * kGaussNodes[k];
    const double dx = seg_x_[seg].deriv(t);
    const double dy = seg_y_[seg].deriv(t);
    acc += kGaussWeights[k] * std::hypot(dx, dy);
  }
  return acc * half;
}

int PathSpline::locate(double s, double* t_local) const {
  const double sc = std::clamp(s, 0.0, knots_.back());
  int seg = static_cast<int>(std::upper_bound(knots_.begin(), knots_.end(), sc) -
                             knots_.begin()) -
            1;
  seg = std::clamp(seg, 0, static_cast<int>(seg_x_.size()) - 1);

  // Newton inversion of the in-segment arc length (parameter is already
  // arc length at knots, so the initial guess is nearly exact).
  double t = sc - knots_[seg];
  const double h = knots_[seg + 1] - knots_[seg];
  for (int it = 0; it < 8; ++it) {
    const double f = segment_arc_length(seg, 0.0, t) - (sc - knots_[seg]);
    const double speed = std::hypot(seg_x_[seg].deriv(t), seg_y_[seg].deriv(t));
    if (speed < 1e-12) break;
    const double step = f / speed;
    t = std::clamp(t - step, 0.0, h);
    if (std::abs(step) < 1e-13) break;
  }
  *t_local = t;
  return seg;
}

Vector2d PathSpline::position(double s) const {
  double t;
  const int seg = locate(s, &t);
  return {seg_x_[seg].eval(t), seg_y_[seg].eval(t)};
}

double PathSpline::tangent_angle(double s) const {
  double t;
  const int seg = locate(s, &t);
  return std::atan2(seg_y_[seg].deriv(t), seg_x_[seg].deriv(t));
}

double PathSpline::curvature(double s) const {
  double t;
  const int seg = locate(s, &t);
  const double dx = seg_x_[seg].deriv(t), dy = seg_y_[seg].deriv(t);
  const double ddx = seg_x_[seg].deriv2(t), ddy = seg_y_[seg].deriv2(t);
  const double speed2 = dx * dx + dy * dy;
  if (speed2 < 1e-12) return 0.0;
  return (dx * ddy - dy * ddx) / std::pow(speed2, 1.5);
}

double PathSpline::project(const Vector2d& p) const {
  const double total = total_length();
  const int samples = std::max<int>(64, 8 * static_cast<int>(seg_x_.size()));
  double best_s = 0.0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    const double s = total * i / samples;
    const double d2 = (position(s) - p).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = s;
    }
  }
  // Golden-section refinement around the best coarse sample.
  double lo = std::max(0.0, best_s - total / samples);
  double hi = std::min(total, best_s + total / samples);
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = (position(x1) - p).squaredNorm();
  double f2 = (position(x2) - p).squaredNorm();
  while (hi - lo > 1e-10) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = (position(x1) - p).squaredNorm();
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = (position(x2) - p).squaredNorm();
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Global path planning

RoutePlan plan_global_path(const RoadModel& road, int start, int goal) {
  const int n = static_cast<int>(road.lanes.size());
  if (start < 0 || start >= n || goal < 0 || goal >= n) {
    throw std::invalid_argument("plan_global_path: node index out of range");
  }

  const Vector2d goal_start = road.lanes[goal].waypoints.front();
  auto heuristic = [&](int node) {
    return (road.lanes[node].waypoints.front() - goal_start).norm();
  };

  struct QueueEntry {
    double f;
    int node;
    bool operator>(const QueueEntry& o) const {
      if (f != o.f) return f > o.f;
      return node > o.node;  // tie-break: lowest index first
    }
  };
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, -1);
  std::vector<bool> closed(n, false);

  g[start] = road.lanes[start].arc_length();
  open.push({g[start] + heuristic(start), start});

  while (!open.empty()) {
    const auto [f, u] = open.top();
    open.pop();
    if (closed[u]) continue;
    closed[u] = true;
    if (u == goal) break;

    auto relax = [&](int v, double edge_cost) {
      if (v < 0 || closed[v]) return;
      const double cand = g[u] + edge_cost;
      if (cand < g[v] - 1e-15) {
        g[v] = cand;
        parent[v] = u;
        open.push({cand + heuristic(v), v});
      }
    };
    const auto& lane = road.lanes[u];
    for (int v : lane.successors) relax(v, road.lanes[v].arc_length());
    for (int v : {lane.left_neighbor, lane.right_neighbor}) {
      if (v >= 0) {
        const double hop =
            (road.lanes[v].waypoints.front() - lane.waypoints.front()).norm();
        relax(v, hop + road.lanes[v].arc_length());
      }
    }
  }

  if (!closed[goal]) throw std::runtime_error("plan_global_path: goal unreachable");

  RoutePlan plan;
  plan.cost = g[goal];
  for (int v = goal; v != -1; v = parent[v]) plan.nodes.push_back(v);
  std::reverse(plan.nodes.begin(), plan.nodes.end());
  for (int node : plan.nodes) {
    for (const auto& wp : road.lanes[node].waypoints) {
      if (!plan.waypoints.empty() && (plan.waypoints.back() - wp).norm() < 1e-9) continue;
      plan.waypoints.push_back(wp);
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Reference trajectory

ReferenceTrajectory build_reference(const std::vector<Vector2d>& path,
                                    const VehicleState& ev_state, double v_ref,
                                    int n_steps, double t_s) {
  if (path.empty()) throw std::invalid_argument("build_reference: empty path");
  if (!(v_ref > 0.0)) throw std::invalid_argument("build_reference: v_ref must be > 0");
  if (n_steps < 1) throw std::invalid_argument("build_reference: n_steps must be >= 1");

  ReferenceTrajectory ref;
  ref.states.reserve(n_steps);

  double path_len = 0.0;
  for (size_t i = 0; i + 1 < path.size(); ++i) path_len += (path[i + 1] - path[i]).norm();
  if (path.size() < 2 || path_len < 1e-9) {
    VehicleState terminal;
    terminal.p_x = path.back().x();
    terminal.p_y = path.back().y();
    terminal.phi = ev_state.phi;
    ref.states.assign(n_steps, terminal);
    return ref;
  }

  const PathSpline spline(path);
  const double s0 = spline.project({ev_state.p_x, ev_state.p_y});
  const double total = spline.total_length();

  for (int k = 1; k <= n_steps; ++k) {
    const double s = s0 + k * v_ref * t_s;
    VehicleState target;
    if (s >= total) {
      const Vector2d p = spline.position(total);
      target.p_x = p.x();
      target.p_y = p.y();
      target.phi = spline.tangent_angle(total);
      target.v_x = 0.0;
    } else {
      const Vector2d p = spline.position(s);
      target.p_x = p.x();
      target.p_y = p.y();
      target.phi = spline.tangent_angle(s);
      target.v_x = v_ref;
      target.omega = v_ref * spline.curvature(s);
    }
    ref.states.push_back(target);
  }
  return ref;
}

// ---------------------------------------------------------------------------
// Environment query

namespace {

std::vector<CenterlinePoint> centerline_from_waypoints(const std::vector<Vector2d>& wps) {
  std::vector<CenterlinePoint> out;
  out.reserve(wps.size());
  for (size_t i = 0; i < wps.size(); ++i) {
    const size_t a = i + 1 < wps.size() ? i : i - 1;
    const size_t b = i + 1 < wps.size() ? i + 1 : i;
    const Vector2d d = wps[b] - wps[a];
    out.push_back({wps[i].x(), wps[i].y(), -std::atan2(d.y(), d.x())});
  }
  return out;
}

}  // namespace

EnvironmentQuery query_environment(const RoadModel& road, const VehicleState& ev_state,
                                   double range, double time) {
  if (!(range > 0.0)) throw std::invalid_argument("query_environment: range must be > 0");
  const Vector2d p{ev_state.p_x, ev_state.p_y};

  EnvironmentQuery out;
  out.lane_width = road.lane_width;
  for (const auto& marking : road.markings) {
    const CenterlineProjection proj = project_to_centerline_ex(marking.polyline, p);
    if (!proj.interior) continue;  // longitudinally past the marking's extent
    const double d = (proj.point.pos() - p).norm();
    if (d <= range) {
      out.markings.push_back({marking.kind, marking.side, proj.point, d});
    }
  }
  for (const auto& light : road.lights) {
    if ((light.stop_point - p).norm() <= range) {
      LightObservation obs;
      obs.c_tl = light.indicator_at(time);
      obs.stop_point = light.stop_point;
      obs.tangent = light.tangent;
      obs.lane_ref = light.lane_centerline.empty()
                         ? CenterlinePoint{light.stop_point.x(), light.stop_point.y(),
                                           light.tangent}
                         : project_to_centerline(light.lane_centerline, p);
      out.lights.push_back(obs);
    }
  }

  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& lane : road.lanes) {
    if (lane.waypoints.size() < 2) continue;
    const auto centerline = centerline_from_waypoints(lane.waypoints);
    const CenterlinePoint ref = project_to_centerline(centerline, p);
    const double d = (ref.pos() - p).norm();
    if (d < best_d) {
      best_d = d;
      out.lane_ref = ref;
    }
  }
  return out;
}

}  // namespace apfmpc
