#include "apfmpc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace apfmpc {

namespace {

double polyline_length(const std::vector<Vector2d>& pts) {
  double len = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) len += (pts[i + 1] - pts[i]).norm();
  return len;
}

// Position and heading at arc length s along a polyline.
void polyline_at(const std::vector<Vector2d>& pts, double s, Vector2d* pos,
                 double* heading) {
  double acc = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vector2d d = pts[i + 1] - pts[i];
    const double seg = d.norm();
    if (acc + seg >= s || i + 2 == pts.size()) {
      const double t = seg > 0.0 ? std::clamp((s - acc) / seg, 0.0, 1.0) : 0.0;
      *pos = pts[i] + t * d;
      *heading = std::atan2(d.y(), d.x());
      return;
    }
    acc += seg;
  }
  *pos = pts.back();
  *heading = 0.0;
}

double polyline_project_arc(const std::vector<Vector2d>& pts, const Vector2d& p) {
  double best_d2 = std::numeric_limits<double>::infinity();
  double best_arc = 0.0;
  double acc = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vector2d d = pts[i + 1] - pts[i];
    const double len2 = d.squaredNorm();
    double t = len2 > 0.0 ? (p - pts[i]).dot(d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double d2 = (pts[i] + t * d - p).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_arc = acc + t * std::sqrt(len2);
    }
    acc += std::sqrt(len2);
  }
  return best_arc;
}

}  // namespace

void SvScript::validate() const {
  if (speed < 0.0) throw std::invalid_argument("SvScript: speed must be >= 0");
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& [t, v] : schedule) {
    if (v < 0.0) throw std::invalid_argument("SvScript: schedule speed must be >= 0");
    if (t <= prev) throw std::invalid_argument("SvScript: schedule times must increase");
    prev = t;
  }
  if (behavior == SvBehavior::LaneFollow && path.size() < 2) {
    throw std::invalid_argument("SvScript: LaneFollow needs a path with >= 2 points");
  }
}

void ScenarioConfig::validate() const {
  road.validate();
  if (start_node < 0 || start_node >= static_cast<int>(road.lanes.size())) {
    throw std::invalid_argument("ScenarioConfig: start_node out of range");
  }
  if (goal_node < 0 || goal_node >= static_cast<int>(road.lanes.size())) {
    throw std::invalid_argument("ScenarioConfig: goal_node out of range");
  }
  if (!(v_ref > 0.0)) throw std::invalid_argument("ScenarioConfig: v_ref must be > 0");
  if (trials < 1) throw std::invalid_argument("ScenarioConfig: trials must be >= 1");
  if (horizon < 1) throw std::invalid_argument("ScenarioConfig: horizon must be >= 1");
  if (!(t_s > 0.0)) throw std::invalid_argument("ScenarioConfig: t_s must be > 0");
  if (!(time_budget > 0.0)) {
    throw std::invalid_argument("ScenarioConfig: time_budget must be > 0");
  }
  for (const auto& s : sv_scripts) s.validate();
  params.validate();
  bounds.validate();
  weights.validate();
  pf.validate();
}

Simulator::Simulator(const ScenarioConfig& scenario) : scenario_(scenario) {
  scenario_.validate();
  route_ = plan_global_path(scenario_.road, scenario_.start_node, scenario_.goal_node)
               .waypoints;
}

WorldState Simulator::make_world(std::uint64_t seed) const {
  WorldState world;
  world.ev = scenario_.ev_initial;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (const auto& script : scenario_.sv_scripts) {
    SvRuntime sv;
    sv.script = &script;
    if (script.path.size() >= 2) {
      sv.path = script.path;
    } else {
      const Vector2d start{script.init_x, script.init_y};
      const Vector2d dir{std::cos(script.heading), std::sin(script.heading)};
      sv.path = {start, start + 2.0e4 * dir};
    }
    // Always draw all three jitters so the RNG stream is stable.
    const double j_along = unit(rng) * script.jitter_along;
    const double j_lat = unit(rng) * script.jitter_lateral;
    const double j_speed = unit(rng) * script.jitter_speed;
    sv.arc = polyline_project_arc(sv.path, {script.init_x, script.init_y}) + j_along;
    const double len = polyline_length(sv.path);
    sv.arc = script.loop ? std::fmod(sv.arc + len, len) : std::clamp(sv.arc, 0.0, len);
    sv.lateral_offset = j_lat;
    sv.speed_offset = j_speed;
    sv.current = sv_pose_at(sv);
    sv.current.speed = sv_speed_at(sv, 0.0);
    world.svs.push_back(std::move(sv));
  }
  return world;
}

SurroundingVehicle Simulator::sv_pose_at(const SvRuntime& sv) const {
  Vector2d pos;
  double heading;
  polyline_at(sv.path, sv.arc, &pos, &heading);
  pos += sv.lateral_offset * Vector2d{-std::sin(heading), std::cos(heading)};
  SurroundingVehicle out;
  out.p_x = pos.x();
  out.p_y = pos.y();
  out.heading = heading;
  out.length = sv.script->length;
  out.width = sv.script->width;
  return out;
}

double Simulator::sv_speed_at(const SvRuntime& sv, double time) const {
  const SvScript& s = *sv.script;
  if (!s.loop && sv.arc >= polyline_length(sv.path)) return 0.0;
  double base = s.speed;
  if (s.behavior == SvBehavior::PiecewiseSpeed) {
    for (const auto& [t, v] : s.schedule) {
      if (time >= t) base = v;
    }
  }
  return std::max(0.0, base + sv.speed_offset);
}

void Simulator::tick(WorldState& world, double t_s) const {
  world.ev = step(world.ev, world.control, scenario_.params, t_s);
  for (auto& sv : world.svs) {
    const double v = sv_speed_at(sv, world.time);
    sv.arc += v * t_s;
    const double len = polyline_length(sv.path);
    if (sv.script->loop && sv.arc > len) sv.arc = std::fmod(sv.arc, len);
    if (!sv.script->loop) sv.arc = std::min(sv.arc, len);
    sv.current = sv_pose_at(sv);
    sv.current.speed = v;
  }
  world.time += t_s;
}

int Simulator::detect_collision(const VehicleState& ev,
                                const std::vector<SurroundingVehicle>& svs) const {
  const double r_v = scenario_.pf.r_v;
  const auto ev_circles = circle_centers({ev.p_x, ev.p_y}, ev.phi, r_v);
  for (size_t k = 0; k < svs.size(); ++k) {
    const auto sv_circles = circle_centers({svs[k].p_x, svs[k].p_y}, svs[k].heading, r_v);
    for (const Vector2d& c : {ev_circles.first, ev_circles.second}) {
      for (const Vector2d& o : {sv_circles.first, sv_circles.second}) {
        if ((c - o).norm() < 2.0 * r_v) return static_cast<int>(k);
      }
    }
  }
  return -1;
}

Simulator::ViolationFlags Simulator::detect_violations(const VehicleState& ev, double time,
                                                       const VehicleState& prev_ev) const {
  ViolationFlags flags;
  const Vector2d p{ev.p_x, ev.p_y};

  for (const auto& marking : scenario_.road.markings) {
    if (marking.kind != MarkingKind::NonTraversable) continue;
    const CenterlineProjection proj = project_to_centerline_ex(marking.polyline, p);
    if (!proj.interior) continue;
    if ((proj.point.pos() - p).norm() > scenario_.pf.query_range) continue;
    if (lateral_gap_to_marking(p, proj.point, marking.side, scenario_.road.lane_width) <
        0.0) {
      flags.crossed_non_traversable = true;
    }
  }

  const double front_offset = 2.0 * scenario_.pf.r_v;
  const Vector2d front = p + front_offset * Vector2d{std::cos(ev.phi), std::sin(ev.phi)};
  const Vector2d prev_front =
      Vector2d{prev_ev.p_x, prev_ev.p_y} +
      front_offset * Vector2d{std::cos(prev_ev.phi), std::sin(prev_ev.phi)};
  for (const auto& light : scenario_.road.lights) {
    if (light.indicator_at(time) == 0.0) continue;
    if ((front - light.stop_point).norm() > 3.0 * scenario_.road.lane_width) continue;
    const Vector2d dir{std::cos(light.tangent), std::sin(light.tangent)};
    const double d_now = (light.stop_point - front).dot(dir);
    const double d_prev = (light.stop_point - prev_front).dot(dir);
    if (d_prev > 0.0 && d_now <= 0.0) flags.ran_red_light = true;
  }
  return flags;
}

std::pair<TrialLog, TrialOutcome> Simulator::run_trial(std::uint64_t seed) const {
  TrialLog log;
  log.seed = seed;
  TrialOutcome outcome;

  WorldState world = make_world(seed);
  std::optional<std::vector<ControlInput>> warm;
  const Vector2d goal = route_.back();
  const int n_steps = static_cast<int>(std::llround(scenario_.time_budget / scenario_.t_s));

  for (int k = 0; k < n_steps; ++k) {
    std::vector<SurroundingVehicle> svs;
    svs.reserve(world.svs.size());
    for (const auto& sv : world.svs) svs.push_back(sv.current);

    TrialStep rec;
    rec.t = world.time;
    rec.ev = world.ev;
    rec.svs = svs;

    try {
      const EnvironmentQuery query = query_environment(
          scenario_.road, world.ev, scenario_.pf.query_range, world.time);
      const EnvironmentSnapshot snapshot = EnvironmentSnapshot::from_query(query, svs);

      OcpProblem problem;
      problem.initial = world.ev;
      problem.reference =
          build_reference(route_, world.ev, scenario_.v_ref, scenario_.horizon, scenario_.t_s);
      problem.env = {snapshot};
      problem.weights = scenario_.weights;
      problem.bounds = scenario_.bounds;
      problem.params = scenario_.params;
      problem.pf = scenario_.pf;
      problem.horizon = scenario_.horizon;
      problem.t_s = scenario_.t_s;

      const OcpSolution sol = solve(problem, warm);
      warm = shift_warm_start(sol.controls);
      world.control = sol.controls.front();

      rec.control = world.control;
      rec.ref = problem.reference.states.front();
      rec.dp = (Vector2d{world.ev.p_x, world.ev.p_y} -
                Vector2d{rec.ref.p_x, rec.ref.p_y})
                   .norm();
      rec.dv = std::abs(world.ev.v_x - rec.ref.v_x);
      rec.dphi = std::abs(wrap_angle(world.ev.phi - rec.ref.phi));
      rec.pf = evaluate_field(snapshot, world.ev, scenario_.pf);
      rec.solve_ms = sol.solve_time_ms;
      log.steps.push_back(rec);

      const VehicleState prev_ev = world.ev;
      tick(world, scenario_.t_s);

      const auto flags = detect_violations(world.ev, world.time, prev_ev);
      outcome.crossed_non_traversable |= flags.crossed_non_traversable;
      outcome.ran_red_light |= flags.ran_red_light;

      std::vector<SurroundingVehicle> svs_now;
      for (const auto& sv : world.svs) svs_now.push_back(sv.current);
      if (detect_collision(world.ev, svs_now) >= 0) {
        outcome.collision = true;
        break;
      }
      if ((Vector2d{world.ev.p_x, world.ev.p_y} - goal).norm() < scenario_.goal_radius) {
        outcome.goal_reached = true;
        break;
      }
    } catch (const std::exception& e) {
      outcome.aborted = true;
      outcome.diagnostic = e.what();
      break;
    }
  }

  outcome.success = !outcome.collision && !outcome.aborted;

  if (!log.steps.empty()) {
    double sum_dp = 0.0, sum_dv = 0.0, sum_dphi = 0.0, sum_ms = 0.0, sum_ms2 = 0.0;
    for (const auto& s : log.steps) {
      sum_dp += s.dp;
      sum_dv += s.dv;
      sum_dphi += s.dphi;
      sum_ms += s.solve_ms;
      sum_ms2 += s.solve_ms * s.solve_ms;
      outcome.max_solve_ms = std::max(outcome.max_solve_ms, s.solve_ms);
    }
    const double n = static_cast<double>(log.steps.size());
    outcome.mean_dp = sum_dp / n;
    outcome.mean_dv = sum_dv / n;
    outcome.mean_dphi = sum_dphi / n;
    outcome.mean_solve_ms = sum_ms / n;
    outcome.sd_solve_ms = std::sqrt(std::max(0.0, sum_ms2 / n - outcome.mean_solve_ms *
                                                                    outcome.mean_solve_ms));
  }
  return {std::move(log), outcome};
}

void write_trial_csv(std::ostream& os, const TrialLog& log) {
  os << "t,p_x,p_y,phi,v_x,v_y,omega,a,delta,ref_px,ref_py,ref_phi,ref_vx,"
        "dp,dv,dphi,F_V,F_NR,F_TR,F_TL,solve_ms\n";
  char buf[640];
  for (const auto& s : log.steps) {
    std::snprintf(buf, sizeof(buf),
                  "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,"
                  "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.3f\n",
                  s.t, s.ev.p_x, s.ev.p_y, s.ev.phi, s.ev.v_x, s.ev.v_y, s.ev.omega,
                  s.control.a, s.control.delta, s.ref.p_x, s.ref.p_y, s.ref.phi,
                  s.ref.v_x, s.dp, s.dv, s.dphi, s.pf.vehicles, s.pf.nr, s.pf.tr,
                  s.pf.tl, s.solve_ms);
    os << buf;
  }
}

BatchSummary summarize(const std::string& scenario_name,
                       const std::vector<TrialOutcome>& outcomes) {
  BatchSummary out;
  out.scenario = scenario_name;
  out.trials = static_cast<int>(outcomes.size());
  if (outcomes.empty()) return out;
  double sd_acc = 0.0;
  for (const auto& o : outcomes) {
    out.successes += o.success ? 1 : 0;
    out.mean_dp += o.mean_dp;
    out.mean_dv += o.mean_dv;
    out.mean_dphi += o.mean_dphi;
    out.mean_solve_ms += o.mean_solve_ms;
    sd_acc += o.sd_solve_ms;
    out.max_solve_ms = std::max(out.max_solve_ms, o.max_solve_ms);
  }
  const double n = static_cast<double>(outcomes.size());
  out.success_rate = out.successes / n;
  out.mean_dp /= n;
  out.mean_dv /= n;
  out.mean_dphi /= n;
  out.mean_solve_ms /= n;
  out.sd_solve_ms = sd_acc / n;
  return out;
}

void write_summary_csv(std::ostream& os, const BatchSummary& s) {
  os << "scenario,trials,successes,success_rate,mean_dp,mean_dv,mean_dphi,"
        "mean_solve_ms,sd_solve_ms,max_solve_ms\n";
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.9g,%.9g,%.9g,%.9g,%.3f,%.3f,%.3f\n",
                s.scenario.c_str(), s.trials, s.successes, s.success_rate, s.mean_dp,
                s.mean_dv, s.mean_dphi, s.mean_solve_ms, s.sd_solve_ms, s.max_solve_ms);
  os << buf;
}

}  // namespace apfmpc
