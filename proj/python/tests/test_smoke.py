import math

import pytest

import _apfmpc as apf


def test_step_straight_line():
    s = apf.VehicleState(p_x=0.0, p_y=0.0, phi=0.0, v_x=10.0)
    p = apf.VehicleParams()
    out = apf.step(s, apf.ControlInput(a=0.0, delta=0.0), p, 0.05)
    assert out.p_x == pytest.approx(0.5)
    assert out.v_x == pytest.approx(10.0)
    assert out.p_y == pytest.approx(0.0)


def test_step_jacobians_shape():
    s = apf.VehicleState(v_x=8.0)
    d_state, d_input = apf.step_jacobians(s, apf.ControlInput(), apf.VehicleParams(), 0.05)
    assert d_state.shape == (6, 6)
    assert d_input.shape == (6, 2)
    # position integrates velocity: d p_x / d v_x = t_s * cos(phi)
    assert d_state[0, 3] == pytest.approx(0.05)


def test_potential_goldens():
    cfg = apf.PotentialConfig()
    assert apf.pf_non_traversable(0.05, cfg) == pytest.approx(9955.5556, rel=1e-3)
    assert apf.pf_non_traversable(1.0, cfg) == pytest.approx(55.5556, rel=1e-3)
    assert apf.pf_traversable(0.5, cfg) == pytest.approx(5.0, rel=1e-3)
    assert apf.pf_traffic_light(10.0, 1.75, 1.75, 1.0, cfg) == pytest.approx(
        47.714, rel=1e-3
    )


def test_pf_vehicle_golden():
    ev = apf.VehicleState()
    sv = apf.SurroundingVehicle()
    sv.p_x = 10.0
    val = apf.pf_vehicle(ev, sv, apf.PotentialConfig())
    assert val == pytest.approx(0.21909, rel=1e-3)


def test_solver_reduces_cost():
    initial = apf.VehicleState(v_x=5.0)
    ref = []
    for k in range(1, 6):
        ref.append(apf.VehicleState(p_x=8.0 * 0.1 * k, v_x=8.0))
    controls, cost, converged = apf.solve_tracking(initial, ref, 5, 0.1)
    assert len(controls) == 5
    assert controls[0][0] > 0.0  # accelerates toward the faster reference
    assert math.isfinite(cost)


def test_preset_roundtrip():
    cfg = apf.preset("crossroad")
    text = apf.echo_config(cfg)
    again = apf.parse_config(text)
    assert apf.echo_config(again) == text


def test_run_trial_smoke():
    cfg = apf.preset("multilane_acc")
    cfg.time_budget = 2.0
    steps, outcome = apf.run_trial(cfg, 7)
    assert len(steps) > 10
    assert not outcome.collision
    assert steps[1]["t"] == pytest.approx(0.05)
