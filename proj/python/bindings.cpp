#include <pybind11/pybind11.h>
#include <pybind11/eigen.h>
#include <pybind11/stl.h>

#include <sstream>

#include "apfmpc/config.hpp"
#include "apfmpc/dynamics.hpp"
#include "apfmpc/mpc.hpp"
#include "apfmpc/potential.hpp"
#include "apfmpc/road.hpp"
#include "apfmpc/sim.hpp"

namespace py = pybind11;
using namespace apfmpc;

PYBIND11_MODULE(_apfmpc, m) {
  m.doc() = "Potential-field NMPC driving library";

  py::class_<VehicleState>(m, "VehicleState")
      .def(py::init<>())
      .def(py::init([](double px, double py_, double phi, double vx, double vy,
                       double omega) {
             return VehicleState{px, py_, phi, vx, vy, omega};
           }),
           py::arg("p_x") = 0.0, py::arg("p_y") = 0.0, py::arg("phi") = 0.0,
           py::arg("v_x") = 0.0, py::arg("v_y") = 0.0, py::arg("omega") = 0.0)
      .def_readwrite("p_x", &VehicleState::p_x)
      .def_readwrite("p_y", &VehicleState::p_y)
      .def_readwrite("phi", &VehicleState::phi)
      .def_readwrite("v_x", &VehicleState::v_x)
      .def_readwrite("v_y", &VehicleState::v_y)
      .def_readwrite("omega", &VehicleState::omega)
      .def("vec", &VehicleState::vec)
      .def_static("from_vec", &VehicleState::from_vec)
      .def("__repr__", [](const VehicleState& s) {
        std::ostringstream os;
        os << "VehicleState(p_x=" << s.p_x << ", p_y=" << s.p_y << ", phi=" << s.phi
           << ", v_x=" << s.v_x << ", v_y=" << s.v_y << ", omega=" << s.omega << ")";
        return os.str();
      });

  py::class_<ControlInput>(m, "ControlInput")
      .def(py::init<>())
      .def(py::init([](double a, double delta) {
             ControlInput u;
             u.a = a;
             u.delta = delta;
             return u;
           }),
           py::arg("a") = 0.0, py::arg("delta") = 0.0)
      .def_readwrite("a", &ControlInput::a)
      .def_readwrite("delta", &ControlInput::delta);

  py::class_<VehicleParams>(m, "VehicleParams")
      .def(py::init<>())
      .def_readwrite("m", &VehicleParams::m)
      .def_readwrite("l_f", &VehicleParams::l_f)
      .def_readwrite("l_r", &VehicleParams::l_r)
      .def_readwrite("k_f", &VehicleParams::k_f)
      .def_readwrite("k_r", &VehicleParams::k_r)
      .def_readwrite("I_z", &VehicleParams::I_z)
      .def("L_k", &VehicleParams::L_k);

  m.def("step", &step, py::arg("state"), py::arg("control"), py::arg("params"),
        py::arg("t_s"), "One backward-Euler step of the single-track model");
  m.def(
      "step_jacobians",
      [](const VehicleState& x, const ControlInput& u, const VehicleParams& p, double ts) {
        StepJacobians j = step_jacobians(x, u, p, ts);
        return py::make_tuple(j.d_state, j.d_input);
      },
      py::arg("state"), py::arg("control"), py::arg("params"), py::arg("t_s"),
      "Analytic Jacobians of step() w.r.t. state and control");

  py::class_<PotentialConfig>(m, "PotentialConfig")
      .def(py::init<>())
      .def_readwrite("a_nr", &PotentialConfig::a_nr)
      .def_readwrite("b_nr", &PotentialConfig::b_nr)
      .def_readwrite("a_tr", &PotentialConfig::a_tr)
      .def_readwrite("b_tr", &PotentialConfig::b_tr)
      .def_readwrite("a_v", &PotentialConfig::a_v)
      .def_readwrite("b_v", &PotentialConfig::b_v)
      .def_readwrite("r_v", &PotentialConfig::r_v)
      .def_readwrite("a_tl1", &PotentialConfig::a_tl1)
      .def_readwrite("a_tl2", &PotentialConfig::a_tl2);

  m.def("pf_non_traversable", &pf_non_traversable, py::arg("s_r"), py::arg("config"));
  m.def("pf_traversable", &pf_traversable, py::arg("s_r"), py::arg("config"));
  m.def("pf_traffic_light", &pf_traffic_light, py::arg("d_x"), py::arg("d_yl"),
        py::arg("d_yr"), py::arg("c_tl"), py::arg("config"));

  py::class_<SurroundingVehicle>(m, "SurroundingVehicle")
      .def(py::init<>())
      .def_readwrite("p_x", &SurroundingVehicle::p_x)
      .def_readwrite("p_y", &SurroundingVehicle::p_y)
      .def_readwrite("heading", &SurroundingVehicle::heading)
      .def_readwrite("speed", &SurroundingVehicle::speed);

  m.def(
      "pf_vehicle",
      [](const VehicleState& ev, const SurroundingVehicle& sv, const PotentialConfig& cfg) {
        return pf_vehicle(circle_centers({ev.p_x, ev.p_y}, ev.phi, cfg.r_v), sv, cfg);
      },
      py::arg("ev_state"), py::arg("sv"), py::arg("config"));

  py::class_<FieldBreakdown>(m, "FieldBreakdown")
      .def_readonly("nr", &FieldBreakdown::nr)
      .def_readonly("tr", &FieldBreakdown::tr)
      .def_readonly("vehicles", &FieldBreakdown::vehicles)
      .def_readonly("tl", &FieldBreakdown::tl)
      .def("total", &FieldBreakdown::total);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readwrite("name", &ScenarioConfig::name)
      .def_readwrite("trials", &ScenarioConfig::trials)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("time_budget", &ScenarioConfig::time_budget)
      .def_readwrite("v_ref", &ScenarioConfig::v_ref)
      .def_readwrite("pf", &ScenarioConfig::pf);

  m.def("preset", &preset_by_name, py::arg("name"),
        "Bundled scenario: roundabout, multilane_acc, or crossroad");
  m.def("parse_config", &parse_config, py::arg("json_text"));
  m.def("load_config", &load_config, py::arg("path"));
  m.def("echo_config", &echo_config, py::arg("config"));

  py::class_<TrialOutcome>(m, "TrialOutcome")
      .def_readonly("success", &TrialOutcome::success)
      .def_readonly("collision", &TrialOutcome::collision)
      .def_readonly("goal_reached", &TrialOutcome::goal_reached)
      .def_readonly("crossed_non_traversable", &TrialOutcome::crossed_non_traversable)
      .def_readonly("ran_red_light", &TrialOutcome::ran_red_light)
      .def_readonly("aborted", &TrialOutcome::aborted)
      .def_readonly("diagnostic", &TrialOutcome::diagnostic)
      .def_readonly("mean_dp", &TrialOutcome::mean_dp)
      .def_readonly("mean_dv", &TrialOutcome::mean_dv)
      .def_readonly("mean_solve_ms", &TrialOutcome::mean_solve_ms)
      .def_readonly("max_solve_ms", &TrialOutcome::max_solve_ms);

  m.def(
      "run_trial",
      [](const ScenarioConfig& cfg, std::uint64_t seed) {
        Simulator sim(cfg);
        auto [log, outcome] = sim.run_trial(seed);
        py::list steps;
        for (const auto& s : log.steps) {
          py::dict d;
          d["t"] = s.t;
          d["p_x"] = s.ev.p_x;
          d["p_y"] = s.ev.p_y;
          d["phi"] = s.ev.phi;
          d["v_x"] = s.ev.v_x;
          d["a"] = s.control.a;
          d["delta"] = s.control.delta;
          d["pf_total"] = s.pf.total();
          steps.append(d);
        }
        return py::make_tuple(steps, outcome);
      },
      py::arg("config"), py::arg("seed"),
      "Runs one closed-loop trial; returns (steps, outcome)");

  m.def(
      "solve_tracking",
      [](const VehicleState& initial, const std::vector<VehicleState>& reference,
         int horizon, double t_s) {
        OcpProblem problem;
        problem.initial = initial;
        problem.reference.states = reference;
        problem.env = {EnvironmentSnapshot{}};
        problem.horizon = horizon;
        problem.t_s = t_s;
        OcpSolution sol = solve(problem);
        py::list controls;
        for (const auto& u : sol.controls) controls.append(py::make_tuple(u.a, u.delta));
        return py::make_tuple(controls, sol.cost, sol.converged);
      },
      py::arg("initial"), py::arg("reference"), py::arg("horizon"), py::arg("t_s"),
      "Solves an obstacle-free tracking problem; returns (controls, cost, converged)");
}
