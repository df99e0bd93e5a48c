"""Python bindings for the mamr parking simulator."""

from ._core import (
    Accel,
    ConfigError,
    ControlInput,
    Gains,
    ModelKind,
    NumericalError,
    RobotParams,
    RobotState,
    SurfaceEval,
    TargetConfig,
    accel_global,
    design_stopping_gains,
    eval_s1,
    eval_s2,
    fixed_axis_accel,
    kd_overdamped_bound,
    kinetic_energy,
    pivot_gain,
    resolve_scenario,
    run_scenario_file,
    run_scenario_json,
    step,
    theta_d1,
    verify,
)

__all__ = [name for name in dir() if not name.startswith("_")]
