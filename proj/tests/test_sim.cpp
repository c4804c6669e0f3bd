#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "apfmpc/sim.hpp"

using namespace apfmpc;

namespace {

constexpr double kPi = 3.14159265358979323846;

ScenarioConfig short_acc(double budget) {
  ScenarioConfig cfg = preset_multilane_acc();
  cfg.time_budget = budget;
  return cfg;
}

}  // namespace

TEST_CASE("make_world applies seeded jitter deterministically") {
  Simulator sim(preset_multilane_acc());
  WorldState a = sim.make_world(11);
  WorldState b = sim.make_world(11);
  WorldState c = sim.make_world(12);
  REQUIRE(a.svs.size() == 1);
  CHECK(a.svs[0].current.p_x == b.svs[0].current.p_x);
  CHECK(a.svs[0].current.p_y == b.svs[0].current.p_y);
  CHECK(a.svs[0].current.speed == b.svs[0].current.speed);
  CHECK(a.svs[0].current.p_x != c.svs[0].current.p_x);
  // Jitter stays within the configured half-ranges.
  const auto& script = sim.scenario().sv_scripts[0];
  CHECK(std::abs(a.svs[0].current.p_y - script.init_y) <= script.jitter_lateral + 1e-12);
  CHECK(std::abs(a.svs[0].current.speed - script.speed) <= script.jitter_speed + 1e-12);
}

TEST_CASE("tick advances scripted vehicles kinematically") {
  ScenarioConfig cfg = preset_multilane_acc();
  cfg.sv_scripts[0].jitter_along = 0.0;
  cfg.sv_scripts[0].jitter_lateral = 0.0;
  cfg.sv_scripts[0].jitter_speed = 0.0;
  Simulator sim(cfg);
  WorldState w = sim.make_world(1);
  const double x0 = w.svs[0].current.p_x;
  const double v = w.svs[0].current.speed;
  sim.tick(w, 0.05);
  CHECK(w.time == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(w.svs[0].current.p_x == doctest::Approx(x0 + v * 0.05).epsilon(1e-9));
  CHECK(w.svs[0].current.p_y == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("piecewise speed schedule switches at its breakpoint") {
  ScenarioConfig cfg = preset_multilane_acc();
  for (auto& sv : cfg.sv_scripts) {
    sv.jitter_along = sv.jitter_lateral = sv.jitter_speed = 0.0;
  }
  Simulator sim(cfg);
  WorldState w = sim.make_world(1);
  while (w.time < 8.9) sim.tick(w, 0.05);
  const double before = w.svs[0].current.speed;
  while (w.time < 9.2) sim.tick(w, 0.05);
  const double after = w.svs[0].current.speed;
  CHECK(before == doctest::Approx(cfg.v_ref).epsilon(1e-9));
  CHECK(after == doctest::Approx(20.0 * 1000.0 / 3600.0).epsilon(1e-9));
}

TEST_CASE("two-circle collision geometry") {
  Simulator sim(preset_multilane_acc());
  VehicleState ev;  // origin, heading +x
  SurroundingVehicle sv;
  sv.heading = 0.0;
  // Nearest circle pair sits 2 r_V apart when centers are 4.8 m apart.
  sv.p_x = 4.75;
  CHECK(sim.detect_collision(ev, {sv}) == 0);
  sv.p_x = 4.85;
  CHECK(sim.detect_collision(ev, {sv}) == -1);
  sv.p_x = -4.75;  // symmetric behind
  CHECK(sim.detect_collision(ev, {sv}) == 0);
}

TEST_CASE("non-traversable crossing is flagged") {
  Simulator sim(preset_multilane_acc());
  VehicleState prev;
  prev.p_y = 5.0;  // legal side of the solid line at 5.25
  VehicleState ev = prev;
  CHECK_FALSE(sim.detect_violations(prev, 1.0, prev).crossed_non_traversable);
  ev.p_y = 5.5;  // past it
  CHECK(sim.detect_violations(ev, 1.0, prev).crossed_non_traversable);
}

TEST_CASE("red light crossing is flagged only on red") {
  Simulator sim(preset_crossroad());
  VehicleState prev;
  prev.p_x = 0.0;
  prev.p_y = -14.0;
  prev.phi = kPi / 2.0;
  VehicleState ev = prev;
  ev.p_y = -11.0;  // front (at +2.4) passes the stop line at y = -10
  CHECK(sim.detect_violations(ev, 5.0, prev).ran_red_light);    // red phase
  CHECK_FALSE(sim.detect_violations(ev, 1.0, prev).ran_red_light);  // green phase
  // No flag when already past the line before the step.
  VehicleState past = ev;
  CHECK_FALSE(sim.detect_violations(ev, 5.0, past).ran_red_light);
}

TEST_CASE("trial CSV has the fixed schema") {
  Simulator sim(short_acc(0.5));
  auto [log, outcome] = sim.run_trial(3);
  std::ostringstream os;
  write_trial_csv(os, log);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header ==
        "t,p_x,p_y,phi,v_x,v_y,omega,a,delta,ref_px,ref_py,ref_phi,ref_vx,dp,dv,dphi,"
        "F_V,F_NR,F_TR,F_TL,solve_ms");
  int rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == static_cast<int>(log.steps.size()));
}

TEST_CASE("trials are deterministic modulo wall-clock solve time") {
  Simulator sim(short_acc(2.0));
  auto [log_a, out_a] = sim.run_trial(5);
  auto [log_b, out_b] = sim.run_trial(5);
  REQUIRE(log_a.steps.size() == log_b.steps.size());
  for (size_t k = 0; k < log_a.steps.size(); ++k) {
    CHECK(log_a.steps[k].ev.vec() == log_b.steps[k].ev.vec());  // bitwise
    CHECK(log_a.steps[k].control.a == log_b.steps[k].control.a);
    CHECK(log_a.steps[k].control.delta == log_b.steps[k].control.delta);
    CHECK(log_a.steps[k].pf.total() == log_b.steps[k].pf.total());
  }
  CHECK(out_a.collision == out_b.collision);
  CHECK(out_a.goal_reached == out_b.goal_reached);
}

TEST_CASE("logged fields recompute from logged states") {
  ScenarioConfig cfg = preset_crossroad();
  cfg.time_budget = 6.0;  // covers the green-to-red transition
  Simulator sim(cfg);
  auto [log, outcome] = sim.run_trial(2);
  REQUIRE(!log.steps.empty());
  for (const auto& s : log.steps) {
    EnvironmentQuery q = query_environment(cfg.road, s.ev, cfg.pf.query_range, s.t);
    EnvironmentSnapshot env = EnvironmentSnapshot::from_query(q, s.svs);
    FieldBreakdown f = evaluate_field(env, s.ev, cfg.pf);
    CHECK(f.nr == doctest::Approx(s.pf.nr).epsilon(1e-9));
    CHECK(f.tr == doctest::Approx(s.pf.tr).epsilon(1e-9));
    CHECK(f.vehicles == doctest::Approx(s.pf.vehicles).epsilon(1e-9));
    CHECK(f.tl == doctest::Approx(s.pf.tl).epsilon(1e-9));
    const double dp = std::hypot(s.ev.p_x - s.ref.p_x, s.ev.p_y - s.ref.p_y);
    CHECK(dp == doctest::Approx(s.dp).epsilon(1e-12));
    CHECK(std::abs(s.ev.v_x - s.ref.v_x) == doctest::Approx(s.dv).epsilon(1e-12));
  }
}

TEST_CASE("batch summary aggregates outcomes") {
  TrialOutcome good;
  good.success = true;
  good.mean_dp = 0.2;
  good.mean_solve_ms = 1.0;
  good.max_solve_ms = 3.0;
  TrialOutcome bad;
  bad.success = false;
  bad.collision = true;
  bad.mean_dp = 0.4;
  bad.mean_solve_ms = 2.0;
  bad.max_solve_ms = 5.0;
  BatchSummary s = summarize("demo", {good, bad});
  CHECK(s.trials == 2);
  CHECK(s.successes == 1);
  CHECK(s.success_rate == doctest::Approx(0.5));
  CHECK(s.mean_dp == doctest::Approx(0.3));
  CHECK(s.max_solve_ms == 5.0);

  std::ostringstream os;
  write_summary_csv(os, s);
  CHECK(os.str().find("demo") != std::string::npos);
}
