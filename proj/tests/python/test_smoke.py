import json
import math

import pytest

import mamr

CANONICAL = {
    "name": "A_to_B",
    "initial": {"x": 0.0, "y": 1.0, "theta_deg": 30.0},
    "waypoints": [{"x": 2.0, "y": 0.0, "theta_deg": 0.0}],
}


def test_bearing():
    s = mamr.RobotState(x=0.0, y=1.0)
    assert mamr.theta_d1(s, mamr.TargetConfig(2.0, 0.0)) == pytest.approx(math.atan2(-1.0, 2.0))


def test_free_acceleration():
    a = mamr.accel_global(mamr.RobotState(), mamr.ControlInput(1.0), mamr.RobotParams())
    assert tuple(a) == pytest.approx((0.5, 0.0, 0.0))


def test_fixed_axis_and_gains():
    p = mamr.RobotParams()
    a = mamr.fixed_axis_accel(mamr.RobotState(), 1.0, 1, p)
    assert a.thetaddot == pytest.approx(1.0 / 0.6)
    assert mamr.kd_overdamped_bound(10.0, 1.0 / 0.6) == pytest.approx(math.sqrt(24.0))
    p.mass = 1.0
    assert mamr.design_stopping_gains(p, 0.0, 1.0, (-1.0, -2.0)) == pytest.approx((2.0, 3.0))


def test_step_ballistic():
    s = mamr.RobotState(xdot=1.0)
    p = mamr.RobotParams()
    for _ in range(1000):
        s = mamr.step(s, mamr.ControlInput(), p, 1e-3)
    assert s.x == pytest.approx(1.0, abs=1e-9)


def test_canonical_run():
    out = mamr.run_scenario_json(json.dumps(CANONICAL))
    summary = out["summary"]
    assert summary["outcome"] == "done"
    assert summary["final_error_pos"] < 0.05
    assert abs(math.degrees(summary["final_error_theta"])) < 2.0
    assert out["csv"].splitlines()[0] == "t,x,y,theta,xdot,ydot,thetadot,F_d,F1,F2,phase,S1,S2,e_c"
    seq = [p for i, p in enumerate(out["phase"]) if i == 0 or out["phase"][i - 1] != p]
    assert seq == ["Reach1", "Slide1", "Reach2", "Slide2Stop", "Done"]


def test_resolved_scenario_round_trip():
    resolved = mamr.resolve_scenario(json.dumps(CANONICAL))
    assert json.loads(resolved)["initial"]["theta_rad"] == pytest.approx(math.pi / 6)
    assert mamr.resolve_scenario(resolved) == resolved


def test_config_error():
    with pytest.raises(ValueError, match="at least one waypoint"):
        mamr.run_scenario_json(json.dumps({**CANONICAL, "waypoints": []}))


def test_verify_report():
    rep = mamr.verify(samples=100)
    assert rep["passed"]
    assert any(c["name"] == "frame_consistency" for c in rep["checks"])
