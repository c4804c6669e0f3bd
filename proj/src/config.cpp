#include "apfmpc/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace apfmpc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& ctx, const std::string& what) {
  throw std::invalid_argument("config: " + ctx + ": " + what);
}

void reject_unknown_keys(const json& j, const std::unordered_set<std::string>& allowed,
                         const std::string& ctx) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) fail(ctx, "unknown key '" + it.key() + "'");
  }
}

double as_number(const json& j, const std::string& ctx) {
  if (!j.is_number()) fail(ctx, "expected a number");
  return j.get<double>();
}

// Speeds accept a plain number (m/s) or a string with an explicit unit
// suffix; km/h converts exactly by *1000/3600.
double as_speed(const json& j, const std::string& ctx) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) fail(ctx, "expected a number or a 'value unit' string");
  const std::string s = j.get<std::string>();
  std::istringstream iss(s);
  double value;
  std::string unit;
  if (!(iss >> value >> unit)) fail(ctx, "cannot parse speed '" + s + "'");
  if (unit == "km/h" || unit == "kmh") return value * 1000.0 / 3600.0;
  if (unit == "m/s" || unit == "mps") return value;
  fail(ctx, "unknown speed unit '" + unit + "'");
}

Vector2d as_vec2(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 2) fail(ctx, "expected [x, y]");
  return {as_number(j[0], ctx), as_number(j[1], ctx)};
}

std::vector<Vector2d> as_points(const json& j, const std::string& ctx) {
  if (!j.is_array()) fail(ctx, "expected an array of [x, y] points");
  std::vector<Vector2d> out;
  for (const auto& e : j) out.push_back(as_vec2(e, ctx));
  return out;
}

std::vector<CenterlinePoint> as_centerline(const json& j, const std::string& ctx) {
  if (!j.is_array()) fail(ctx, "expected an array of [x, y, beta] points");
  std::vector<CenterlinePoint> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3) fail(ctx, "expected [x, y, beta]");
    out.push_back({as_number(e[0], ctx), as_number(e[1], ctx), as_number(e[2], ctx)});
  }
  return out;
}

VehicleState parse_state(const json& j, const std::string& ctx) {
  reject_unknown_keys(j, {"p_x", "p_y", "phi", "v_x", "v_y", "omega"}, ctx);
  VehicleState s;
  if (j.contains("p_x")) s.p_x = as_number(j["p_x"], ctx + ".p_x");
  if (j.contains("p_y")) s.p_y = as_number(j["p_y"], ctx + ".p_y");
  if (j.contains("phi")) s.phi = as_number(j["phi"], ctx + ".phi");
  if (j.contains("v_x")) s.v_x = as_speed(j["v_x"], ctx + ".v_x");
  if (j.contains("v_y")) s.v_y = as_speed(j["v_y"], ctx + ".v_y");
  if (j.contains("omega")) s.omega = as_number(j["omega"], ctx + ".omega");
  return s;
}

RoadModel parse_road(const json& j, const std::string& ctx) {
  reject_unknown_keys(j, {"lane_width", "lanes", "markings", "lights"}, ctx);
  RoadModel road;
  if (j.contains("lane_width")) road.lane_width = as_number(j["lane_width"], ctx);
  if (!j.contains("lanes")) fail(ctx, "missing 'lanes'");
  for (size_t i = 0; i < j["lanes"].size(); ++i) {
    const auto& lj = j["lanes"][i];
    const std::string lctx = ctx + ".lanes[" + std::to_string(i) + "]";
    reject_unknown_keys(lj, {"waypoints", "successors", "left_neighbor", "right_neighbor"},
                        lctx);
    LaneSegment lane;
    if (!lj.contains("waypoints")) fail(lctx, "missing 'waypoints'");
    lane.waypoints = as_points(lj["waypoints"], lctx + ".waypoints");
    if (lj.contains("successors")) {
      for (const auto& s : lj["successors"]) lane.successors.push_back(s.get<int>());
    }
    if (lj.contains("left_neighbor")) lane.left_neighbor = lj["left_neighbor"].get<int>();
    if (lj.contains("right_neighbor")) lane.right_neighbor = lj["right_neighbor"].get<int>();
    road.lanes.push_back(std::move(lane));
  }
  if (j.contains("markings")) {
    for (size_t i = 0; i < j["markings"].size(); ++i) {
      const auto& mj = j["markings"][i];
      const std::string mctx = ctx + ".markings[" + std::to_string(i) + "]";
      reject_unknown_keys(mj, {"kind", "side", "polyline"}, mctx);
      LaneMarking m;
      const std::string kind = mj.value("kind", "");
      if (kind == "non_traversable") m.kind = MarkingKind::NonTraversable;
      else if (kind == "traversable") m.kind = MarkingKind::Traversable;
      else fail(mctx, "kind must be 'non_traversable' or 'traversable'");
      const std::string side = mj.value("side", "");
      if (side == "left") m.side = Side::Left;
      else if (side == "right") m.side = Side::Right;
      else fail(mctx, "side must be 'left' or 'right'");
      if (!mj.contains("polyline")) fail(mctx, "missing 'polyline'");
      m.polyline = as_centerline(mj["polyline"], mctx + ".polyline");
      road.markings.push_back(std::move(m));
    }
  }
  if (j.contains("lights")) {
    for (size_t i = 0; i < j["lights"].size(); ++i) {
      const auto& tj = j["lights"][i];
      const std::string tctx = ctx + ".lights[" + std::to_string(i) + "]";
      reject_unknown_keys(tj, {"stop_point", "tangent", "schedule", "lane_centerline"},
                          tctx);
      TrafficLight light;
      if (!tj.contains("stop_point")) fail(tctx, "missing 'stop_point'");
      light.stop_point = as_vec2(tj["stop_point"], tctx + ".stop_point");
      light.tangent = as_number(tj.value("tangent", json(0.0)), tctx + ".tangent");
      if (!tj.contains("schedule")) fail(tctx, "missing 'schedule'");
      for (const auto& e : tj["schedule"]) {
        if (!e.is_array() || e.size() != 2) fail(tctx, "schedule entries are [phase, s]");
        PhaseEntry entry;
        const std::string phase = e[0].get<std::string>();
        if (phase == "green") entry.phase = LightPhase::Green;
        else if (phase == "red") entry.phase = LightPhase::Red;
        else if (phase == "amber") entry.phase = LightPhase::Amber;
        else fail(tctx, "phase must be green/red/amber");
        entry.duration = as_number(e[1], tctx + ".schedule");
        light.schedule.push_back(entry);
      }
      if (tj.contains("lane_centerline")) {
        light.lane_centerline = as_centerline(tj["lane_centerline"], tctx);
      }
      road.lights.push_back(std::move(light));
    }
  }
  return road;
}

SvScript parse_sv(const json& j, const std::string& ctx) {
  reject_unknown_keys(j,
                      {"behavior", "initial_pose", "speed", "schedule", "path", "loop",
                       "length", "width", "jitter"},
                      ctx);
  SvScript sv;
  const std::string behavior = j.value("behavior", "constant_speed");
  if (behavior == "constant_speed") sv.behavior = SvBehavior::ConstantSpeed;
  else if (behavior == "piecewise_speed") sv.behavior = SvBehavior::PiecewiseSpeed;
  else if (behavior == "lane_follow") sv.behavior = SvBehavior::LaneFollow;
  else fail(ctx, "unknown behavior '" + behavior + "'");
  if (!j.contains("initial_pose")) fail(ctx, "missing 'initial_pose'");
  const auto& pose = j["initial_pose"];
  if (!pose.is_array() || pose.size() != 3) fail(ctx, "initial_pose is [x, y, heading]");
  sv.init_x = as_number(pose[0], ctx);
  sv.init_y = as_number(pose[1], ctx);
  sv.heading = as_number(pose[2], ctx);
  if (j.contains("speed")) sv.speed = as_speed(j["speed"], ctx + ".speed");
  if (j.contains("schedule")) {
    for (const auto& e : j["schedule"]) {
      if (!e.is_array() || e.size() != 2) fail(ctx, "schedule entries are [t, speed]");
      sv.schedule.emplace_back(as_number(e[0], ctx), as_speed(e[1], ctx + ".schedule"));
    }
  }
  if (j.contains("path")) sv.path = as_points(j["path"], ctx + ".path");
  if (j.contains("loop")) sv.loop = j["loop"].get<bool>();
  if (j.contains("length")) sv.length = as_number(j["length"], ctx);
  if (j.contains("width")) sv.width = as_number(j["width"], ctx);
  if (j.contains("jitter")) {
    const auto& jj = j["jitter"];
    reject_unknown_keys(jj, {"along", "lateral", "speed"}, ctx + ".jitter");
    if (jj.contains("along")) sv.jitter_along = as_number(jj["along"], ctx);
    if (jj.contains("lateral")) sv.jitter_lateral = as_number(jj["lateral"], ctx);
    if (jj.contains("speed")) sv.jitter_speed = as_speed(jj["speed"], ctx + ".jitter.speed");
  }
  return sv;
}

ScenarioConfig parse_json(const json& j) {
  reject_unknown_keys(j,
                      {"name", "road", "ev_initial", "start_node", "goal_node", "v_ref",
                       "sv_scripts", "vehicle", "bounds", "weights", "potential",
                       "horizon", "t_s", "trials", "seed", "time_budget", "goal_radius"},
                      "root");
  ScenarioConfig cfg;
  if (!j.contains("name")) fail("root", "missing 'name'");
  cfg.name = j["name"].get<std::string>();
  if (!j.contains("road")) fail("root", "missing 'road'");
  cfg.road = parse_road(j["road"], "road");
  if (j.contains("ev_initial")) cfg.ev_initial = parse_state(j["ev_initial"], "ev_initial");
  if (!j.contains("v_ref")) fail("root", "missing 'v_ref'");
  cfg.v_ref = as_speed(j["v_ref"], "v_ref");
  if (j.contains("start_node")) cfg.start_node = j["start_node"].get<int>();
  if (j.contains("goal_node")) cfg.goal_node = j["goal_node"].get<int>();
  if (j.contains("sv_scripts")) {
    for (size_t i = 0; i < j["sv_scripts"].size(); ++i) {
      cfg.sv_scripts.push_back(
          parse_sv(j["sv_scripts"][i], "sv_scripts[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("vehicle")) {
    const auto& vj = j["vehicle"];
    reject_unknown_keys(vj, {"m", "l_f", "l_r", "k_f", "k_r", "I_z"}, "vehicle");
    if (vj.contains("m")) cfg.params.m = as_number(vj["m"], "vehicle.m");
    if (vj.contains("l_f")) cfg.params.l_f = as_number(vj["l_f"], "vehicle.l_f");
    if (vj.contains("l_r")) cfg.params.l_r = as_number(vj["l_r"], "vehicle.l_r");
    if (vj.contains("k_f")) cfg.params.k_f = as_number(vj["k_f"], "vehicle.k_f");
    if (vj.contains("k_r")) cfg.params.k_r = as_number(vj["k_r"], "vehicle.k_r");
    if (vj.contains("I_z")) cfg.params.I_z = as_number(vj["I_z"], "vehicle.I_z");
  }
  if (j.contains("bounds")) {
    const auto& bj = j["bounds"];
    reject_unknown_keys(bj, {"v_x", "v_y", "omega", "a", "delta"}, "bounds");
    auto pair = [&](const char* key, double* lo, double* hi) {
      if (!bj.contains(key)) return;
      const auto& e = bj[key];
      if (!e.is_array() || e.size() != 2) fail("bounds", std::string(key) + " is [min, max]");
      *lo = as_number(e[0], "bounds");
      *hi = as_number(e[1], "bounds");
    };
    pair("v_x", &cfg.bounds.v_x_min, &cfg.bounds.v_x_max);
    pair("v_y", &cfg.bounds.v_y_min, &cfg.bounds.v_y_max);
    pair("omega", &cfg.bounds.omega_min, &cfg.bounds.omega_max);
    pair("a", &cfg.bounds.a_min, &cfg.bounds.a_max);
    pair("delta", &cfg.bounds.delta_min, &cfg.bounds.delta_max);
  }
  if (j.contains("weights")) {
    const auto& wj = j["weights"];
    reject_unknown_keys(wj, {"q", "r", "r_d"}, "weights");
    if (wj.contains("q")) {
      if (wj["q"].size() != 6) fail("weights.q", "expected 6 entries");
      for (int i = 0; i < 6; ++i) cfg.weights.q[i] = as_number(wj["q"][i], "weights.q");
    }
    if (wj.contains("r")) {
      if (wj["r"].size() != 2) fail("weights.r", "expected 2 entries");
      for (int i = 0; i < 2; ++i) cfg.weights.r[i] = as_number(wj["r"][i], "weights.r");
    }
    if (wj.contains("r_d")) {
      if (wj["r_d"].size() != 2) fail("weights.r_d", "expected 2 entries");
      for (int i = 0; i < 2; ++i) cfg.weights.r_d[i] = as_number(wj["r_d"][i], "weights.r_d");
    }
  }
  if (j.contains("potential")) {
    const auto& pj = j["potential"];
    reject_unknown_keys(pj,
                        {"a_nr", "b_nr", "nr_inner", "nr_outer", "a_tr", "b_tr", "a_v",
                         "b_v", "r_v", "v_dist2_floor", "a_tl1", "a_tl2", "tl_dx_min",
                         "tl_lat_min", "tl_activation", "query_range"},
                        "potential");
    auto num = [&](const char* key, double* dst) {
      if (pj.contains(key)) *dst = as_number(pj[key], std::string("potential.") + key);
    };
    num("a_nr", &cfg.pf.a_nr);
    num("b_nr", &cfg.pf.b_nr);
    num("nr_inner", &cfg.pf.nr_inner);
    num("nr_outer", &cfg.pf.nr_outer);
    num("a_tr", &cfg.pf.a_tr);
    num("b_tr", &cfg.pf.b_tr);
    num("a_v", &cfg.pf.a_v);
    num("b_v", &cfg.pf.b_v);
    num("r_v", &cfg.pf.r_v);
    num("v_dist2_floor", &cfg.pf.v_dist2_floor);
    num("a_tl1", &cfg.pf.a_tl1);
    num("a_tl2", &cfg.pf.a_tl2);
    num("tl_dx_min", &cfg.pf.tl_dx_min);
    num("tl_lat_min", &cfg.pf.tl_lat_min);
    num("tl_activation", &cfg.pf.tl_activation);
    num("query_range", &cfg.pf.query_range);
  }
  if (j.contains("horizon")) cfg.horizon = j["horizon"].get<int>();
  if (j.contains("t_s")) cfg.t_s = as_number(j["t_s"], "t_s");
  if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("time_budget")) cfg.time_budget = as_number(j["time_budget"], "time_budget");
  if (j.contains("goal_radius")) cfg.goal_radius = as_number(j["goal_radius"], "goal_radius");

  cfg.validate();
  return cfg;
}

json state_to_json(const VehicleState& s) {
  return {{"p_x", s.p_x}, {"p_y", s.p_y}, {"phi", s.phi},
          {"v_x", s.v_x}, {"v_y", s.v_y}, {"omega", s.omega}};
}

json road_to_json(const RoadModel& road) {
  json lanes = json::array();
  for (const auto& lane : road.lanes) {
    json wps = json::array();
    for (const auto& w : lane.waypoints) wps.push_back({w.x(), w.y()});
    lanes.push_back({{"waypoints", wps},
                     {"successors", lane.successors},
                     {"left_neighbor", lane.left_neighbor},
                     {"right_neighbor", lane.right_neighbor}});
  }
  json markings = json::array();
  for (const auto& m : road.markings) {
    json poly = json::array();
    for (const auto& p : m.polyline) poly.push_back({p.p_x, p.p_y, p.beta});
    markings.push_back(
        {{"kind", m.kind == MarkingKind::NonTraversable ? "non_traversable" : "traversable"},
         {"side", m.side == Side::Left ? "left" : "right"},
         {"polyline", poly}});
  }
  json lights = json::array();
  for (const auto& l : road.lights) {
    json schedule = json::array();
    for (const auto& e : l.schedule) {
      const char* phase = e.phase == LightPhase::Green  ? "green"
                          : e.phase == LightPhase::Red ? "red"
                                                       : "amber";
      schedule.push_back({phase, e.duration});
    }
    json centerline = json::array();
    for (const auto& p : l.lane_centerline) centerline.push_back({p.p_x, p.p_y, p.beta});
    lights.push_back({{"stop_point", {l.stop_point.x(), l.stop_point.y()}},
                      {"tangent", l.tangent},
                      {"schedule", schedule},
                      {"lane_centerline", centerline}});
  }
  return {{"lane_width", road.lane_width},
          {"lanes", lanes},
          {"markings", markings},
          {"lights", lights}};
}

json sv_to_json(const SvScript& sv) {
  const char* behavior = sv.behavior == SvBehavior::ConstantSpeed    ? "constant_speed"
                         : sv.behavior == SvBehavior::PiecewiseSpeed ? "piecewise_speed"
                                                                     : "lane_follow";
  json schedule = json::array();
  for (const auto& [t, v] : sv.schedule) schedule.push_back({t, v});
  json path = json::array();
  for (const auto& p : sv.path) path.push_back({p.x(), p.y()});
  return {{"behavior", behavior},
          {"initial_pose", {sv.init_x, sv.init_y, sv.heading}},
          {"speed", sv.speed},
          {"schedule", schedule},
          {"path", path},
          {"loop", sv.loop},
          {"length", sv.length},
          {"width", sv.width},
          {"jitter",
           {{"along", sv.jitter_along},
            {"lateral", sv.jitter_lateral},
            {"speed", sv.jitter_speed}}}};
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: parse error: ") + e.what());
  }
  return parse_json(j);
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string echo_config(const ScenarioConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["road"] = road_to_json(cfg.road);
  j["ev_initial"] = state_to_json(cfg.ev_initial);
  j["start_node"] = cfg.start_node;
  j["goal_node"] = cfg.goal_node;
  j["v_ref"] = cfg.v_ref;
  json svs = json::array();
  for (const auto& sv : cfg.sv_scripts) svs.push_back(sv_to_json(sv));
  j["sv_scripts"] = svs;
  j["vehicle"] = {{"m", cfg.params.m},   {"l_f", cfg.params.l_f}, {"l_r", cfg.params.l_r},
                  {"k_f", cfg.params.k_f}, {"k_r", cfg.params.k_r}, {"I_z", cfg.params.I_z}};
  j["bounds"] = {{"v_x", {cfg.bounds.v_x_min, cfg.bounds.v_x_max}},
                 {"v_y", {cfg.bounds.v_y_min, cfg.bounds.v_y_max}},
                 {"omega", {cfg.bounds.omega_min, cfg.bounds.omega_max}},
                 {"a", {cfg.bounds.a_min, cfg.bounds.a_max}},
                 {"delta", {cfg.bounds.delta_min, cfg.bounds.delta_max}}};
  j["weights"] = {{"q", {cfg.weights.q[0], cfg.weights.q[1], cfg.weights.q[2],
                         cfg.weights.q[3], cfg.weights.q[4], cfg.weights.q[5]}},
                  {"r", {cfg.weights.r[0], cfg.weights.r[1]}},
                  {"r_d", {cfg.weights.r_d[0], cfg.weights.r_d[1]}}};
  j["potential"] = {{"a_nr", cfg.pf.a_nr},
                    {"b_nr", cfg.pf.b_nr},
                    {"nr_inner", cfg.pf.nr_inner},
                    {"nr_outer", cfg.pf.nr_outer},
                    {"a_tr", cfg.pf.a_tr},
                    {"b_tr", cfg.pf.b_tr},
                    {"a_v", cfg.pf.a_v},
                    {"b_v", cfg.pf.b_v},
                    {"r_v", cfg.pf.r_v},
                    {"v_dist2_floor", cfg.pf.v_dist2_floor},
                    {"a_tl1", cfg.pf.a_tl1},
                    {"a_tl2", cfg.pf.a_tl2},
                    {"tl_dx_min", cfg.pf.tl_dx_min},
                    {"tl_lat_min", cfg.pf.tl_lat_min},
                    {"tl_activation", cfg.pf.tl_activation},
                    {"query_range", cfg.pf.query_range}};
  j["horizon"] = cfg.horizon;
  j["t_s"] = cfg.t_s;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["time_budget"] = cfg.time_budget;
  j["goal_radius"] = cfg.goal_radius;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Bundled presets

namespace {

constexpr double kPi = 3.14159265358979323846;

// HAP beta of a travel direction (see CenterlinePoint).
double hap_beta(double direction) { return wrap_angle(-direction); }

std::vector<Vector2d> straight(const Vector2d& a, const Vector2d& b, double step) {
  std::vector<Vector2d> out;
  const double len = (b - a).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int i = 0; i <= n; ++i) out.push_back(a + (b - a) * (static_cast<double>(i) / n));
  return out;
}

std::vector<CenterlinePoint> straight_centerline(const Vector2d& a, const Vector2d& b,
                                                 double step) {
  const double beta = hap_beta(std::atan2((b - a).y(), (b - a).x()));
  std::vector<CenterlinePoint> out;
  for (const auto& p : straight(a, b, step)) out.push_back({p.x(), p.y(), beta});
  return out;
}

// Counterclockwise circular arc around `center`.
std::vector<Vector2d> arc(const Vector2d& center, double radius, double theta0,
                          double theta1, double step_deg) {
  std::vector<Vector2d> out;
  const int n = std::max(2, static_cast<int>(std::ceil(std::abs(theta1 - theta0) /
                                                       (step_deg * kPi / 180.0))));
  for (int i = 0; i <= n; ++i) {
    const double th = theta0 + (theta1 - theta0) * i / n;
    out.push_back(center + radius * Vector2d{std::cos(th), std::sin(th)});
  }
  return out;
}

std::vector<CenterlinePoint> arc_centerline(const Vector2d& center, double radius,
                                            double theta0, double theta1, double step_deg) {
  std::vector<CenterlinePoint> out;
  const int n = std::max(2, static_cast<int>(std::ceil(std::abs(theta1 - theta0) /
                                                       (step_deg * kPi / 180.0))));
  for (int i = 0; i <= n; ++i) {
    const double th = theta0 + (theta1 - theta0) * i / n;
    const Vector2d p = center + radius * Vector2d{std::cos(th), std::sin(th)};
    // ccw travel direction is th + pi/2
    out.push_back({p.x(), p.y(), hap_beta(th + kPi / 2.0)});
  }
  return out;
}

}  // namespace

ScenarioConfig preset_multilane_acc() {
  ScenarioConfig cfg;
  cfg.name = "multilane_acc";
  cfg.v_ref = 40.0 * 1000.0 / 3600.0;
  cfg.road.lane_width = 3.5;

  const double kLen = 400.0;
  LaneSegment right, middle, left;
  right.waypoints = straight({0.0, -3.5}, {kLen, -3.5}, 50.0);
  middle.waypoints = straight({0.0, 0.0}, {kLen, 0.0}, 50.0);
  left.waypoints = straight({0.0, 3.5}, {kLen, 3.5}, 50.0);
  right.left_neighbor = 1;
  middle.right_neighbor = 0;
  middle.left_neighbor = 2;
  left.right_neighbor = 1;
  cfg.road.lanes = {right, middle, left};

  // Fig-2-style layout: traversable markings at +-1.75, edges at +-5.25.
  LaneMarking tr_left{MarkingKind::Traversable, Side::Left,
                      straight_centerline({0.0, 0.0}, {kLen, 0.0}, 5.0)};
  LaneMarking tr_right{MarkingKind::Traversable, Side::Right,
                       straight_centerline({0.0, 0.0}, {kLen, 0.0}, 5.0)};
  LaneMarking nr_left{MarkingKind::NonTraversable, Side::Left,
                      straight_centerline({0.0, 3.5}, {kLen, 3.5}, 5.0)};
  LaneMarking nr_right{MarkingKind::NonTraversable, Side::Right,
                       straight_centerline({0.0, -3.5}, {kLen, -3.5}, 5.0)};
  cfg.road.markings = {tr_left, tr_right, nr_left, nr_right};

  cfg.ev_initial = {0.0, 0.0, 0.0, cfg.v_ref, 0.0, 0.0};
  cfg.start_node = 1;
  cfg.goal_node = 1;

  // Lead vehicle ahead in the ego lane; slows from 40 to 20 km/h at t = 9 s.
  SvScript lead;
  lead.behavior = SvBehavior::PiecewiseSpeed;
  lead.init_x = 45.0;
  lead.init_y = 0.0;
  lead.heading = 0.0;
  lead.speed = cfg.v_ref;
  lead.schedule = {{9.0, 20.0 * 1000.0 / 3600.0}};
  lead.path = straight({0.0, 0.0}, {kLen + 200.0, 0.0}, 50.0);
  lead.jitter_along = 4.0;
  lead.jitter_lateral = 0.25;
  lead.jitter_speed = 0.25;
  cfg.sv_scripts = {lead};

  // Stronger vehicle repulsion than the library default so the avoidance
  // term wins against speed tracking early enough to trigger the overtake.
  cfg.pf.a_v = 150.0;
  // Soft enough that lateral tracking can pull the ego back across the
  // broken line once the lead has been passed (the marking ridge repels
  // from both sides).
  cfg.pf.a_tr = 1.0;

  cfg.time_budget = 40.0;
  cfg.trials = 10;
  cfg.seed = 1;
  return cfg;
}

ScenarioConfig preset_crossroad() {
  ScenarioConfig cfg;
  cfg.name = "crossroad";
  cfg.v_ref = 20.0 * 1000.0 / 3600.0;
  cfg.road.lane_width = 3.5;

  // Northbound approach, left turn onto the westbound lane of the cross
  // street (radius-12 arc), then west to the goal.
  LaneSegment approach, turn, exit;
  approach.waypoints = straight({0.0, -60.0}, {0.0, -10.0}, 10.0);
  turn.waypoints = arc({-12.0, -10.0}, 12.0, 0.0, kPi / 2.0, 10.0);
  exit.waypoints = straight({-12.0, 2.0}, {-70.0, 2.0}, 10.0);
  approach.successors = {1};
  turn.successors = {2};
  cfg.road.lanes = {approach, turn, exit};

  LaneMarking appr_left{MarkingKind::NonTraversable, Side::Left,
                        straight_centerline({0.0, -60.0}, {0.0, -10.0}, 5.0)};
  LaneMarking appr_right{MarkingKind::NonTraversable, Side::Right,
                         straight_centerline({0.0, -60.0}, {0.0, -10.0}, 5.0)};
  LaneMarking exit_left{MarkingKind::NonTraversable, Side::Left,
                        straight_centerline({-14.0, 2.0}, {-70.0, 2.0}, 5.0)};
  LaneMarking exit_right{MarkingKind::NonTraversable, Side::Right,
                         straight_centerline({-14.0, 2.0}, {-70.0, 2.0}, 5.0)};
  cfg.road.markings = {appr_left, appr_right, exit_left, exit_right};

  TrafficLight light;
  light.stop_point = {0.0, -10.0};
  light.tangent = kPi / 2.0;  // travel direction north
  light.schedule = {{LightPhase::Green, 3.0}, {LightPhase::Red, 10.0},
                    {LightPhase::Green, 600.0}};
  light.lane_centerline = straight_centerline({0.0, -60.0}, {0.0, -10.0}, 5.0);
  cfg.road.lights = {light};

  cfg.ev_initial = {0.0, -45.0, kPi / 2.0, cfg.v_ref, 0.0, 0.0};
  cfg.start_node = 0;
  cfg.goal_node = 2;

  // Cross traffic passing through the junction while the ego holds at red.
  SvScript westbound;  // on the ego's target lane, travelling west, ahead
  westbound.behavior = SvBehavior::ConstantSpeed;
  westbound.init_x = 30.0;
  westbound.init_y = 2.0;
  westbound.heading = kPi;
  westbound.speed = 6.0;
  westbound.path = straight({40.0, 2.0}, {-200.0, 2.0}, 20.0);
  westbound.jitter_along = 3.0;
  westbound.jitter_speed = 0.3;

  SvScript eastbound;  // crosses the turning arc during the red phase
  eastbound.behavior = SvBehavior::ConstantSpeed;
  eastbound.init_x = -40.0;
  eastbound.init_y = -2.0;
  eastbound.heading = 0.0;
  eastbound.speed = 6.0;
  eastbound.path = straight({-50.0, -2.0}, {200.0, -2.0}, 20.0);
  eastbound.jitter_along = 3.0;
  eastbound.jitter_speed = 0.3;
  cfg.sv_scripts = {westbound, eastbound};

  // Stronger longitudinal light barrier than the library default so braking
  // to a halt wins against the speed-tracking term at v_ref.
  cfg.pf.a_tl1 = 200.0;

  cfg.time_budget = 35.0;
  cfg.trials = 10;
  cfg.seed = 1;
  return cfg;
}

ScenarioConfig preset_roundabout() {
  ScenarioConfig cfg;
  cfg.name = "roundabout";
  cfg.v_ref = 35.0 * 1000.0 / 3600.0;
  cfg.road.lane_width = 3.5;

  const double r_outer = 21.75;
  const double r_inner = 18.25;
  const Vector2d c{0.0, 0.0};

  // 0: east entry, 1-4: outer ring quadrants (ccw from east), 5: west exit,
  // 6-9: inner ring quadrants.
  LaneSegment entry, exit;
  entry.waypoints = straight({r_outer, -45.0}, {r_outer, 0.0}, 7.5);
  entry.successors = {1};
  exit.waypoints = straight({-r_outer, 0.0}, {-r_outer, -45.0}, 7.5);

  std::vector<LaneSegment> lanes(10);
  lanes[0] = entry;
  lanes[5] = exit;
  for (int q = 0; q < 4; ++q) {
    LaneSegment outer, inner;
    outer.waypoints = arc(c, r_outer, q * kPi / 2.0, (q + 1) * kPi / 2.0, 10.0);
    inner.waypoints = arc(c, r_inner, q * kPi / 2.0, (q + 1) * kPi / 2.0, 10.0);
    outer.successors = {1 + (q + 1) % 4};
    inner.successors = {6 + (q + 1) % 4};
    outer.left_neighbor = 6 + q;
    inner.right_neighbor = 1 + q;
    lanes[1 + q] = outer;
    lanes[6 + q] = inner;
  }
  lanes[2].successors.push_back(5);  // exit from the north-west quadrant end
  cfg.road.lanes = lanes;

  // Ring markings leave openings at the east entrance and west exit.
  // Outer edge only over the top arc: the entry and exit corridors hug the
  // lower half of the circle, where the straight edge markings take over.
  const double open = 15.0 * kPi / 180.0;
  LaneMarking ring_outer{MarkingKind::NonTraversable, Side::Right,
                         arc_centerline(c, r_outer, open, kPi - open, 6.0)};
  LaneMarking ring_between{MarkingKind::Traversable, Side::Left,
                           arc_centerline(c, r_outer, 0.0, 2.0 * kPi, 6.0)};
  LaneMarking ring_inner{MarkingKind::NonTraversable, Side::Left,
                         arc_centerline(c, r_inner, 0.0, 2.0 * kPi, 6.0)};
  LaneMarking entry_edge{MarkingKind::NonTraversable, Side::Right,
                         straight_centerline({r_outer, -45.0}, {r_outer, -8.0}, 7.5)};
  LaneMarking exit_edge{MarkingKind::NonTraversable, Side::Right,
                        straight_centerline({-r_outer, -8.0}, {-r_outer, -45.0}, 7.5)};
  cfg.road.markings = {ring_outer, ring_between, ring_inner, entry_edge, exit_edge};

  cfg.ev_initial = {r_outer, -45.0, kPi / 2.0, cfg.v_ref, 0.0, 0.0};
  cfg.start_node = 0;
  cfg.goal_node = 5;

  // Three scripted vehicles circulating the ring.
  auto ring_path = [&](double radius) {
    auto p = arc(c, radius, 0.0, 2.0 * kPi, 7.5);
    return p;
  };
  auto ring_sv = [&](double radius, double angle_deg, double speed) {
    SvScript sv;
    sv.behavior = SvBehavior::LaneFollow;
    const double th = angle_deg * kPi / 180.0;
    sv.init_x = radius * std::cos(th);
    sv.init_y = radius * std::sin(th);
    sv.heading = th + kPi / 2.0;
    sv.speed = speed;
    sv.path = ring_path(radius);
    sv.loop = true;
    sv.jitter_along = 6.0;
    sv.jitter_speed = 0.5;
    return sv;
  };
  cfg.sv_scripts = {ring_sv(r_outer, 75.0, 7.0), ring_sv(r_inner, 160.0, 6.5),
                    ring_sv(r_inner, 300.0, 6.5)};

  // Same rebalancing as the highway preset: strong vehicle repulsion, soft
  // broken-line ridge so the ego can yield, merge, and change lanes.
  cfg.pf.a_v = 150.0;
  cfg.pf.a_tr = 1.0;

  cfg.time_budget = 45.0;
  cfg.trials = 10;
  cfg.seed = 1;
  return cfg;
}

ScenarioConfig preset_by_name(const std::string& name) {
  if (name == "roundabout") return preset_roundabout();
  if (name == "multilane_acc") return preset_multilane_acc();
  if (name == "crossroad") return preset_crossroad();
  throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace apfmpc
