"""Deterministic leader-follower platoon simulator for differential-drive
robots under state-dependent friction, with an adaptive sliding mode
controller and a bounded-gain baseline for comparison."""

from .arena import Arena, SpeedBreaker, breaker_disturbance, friction_scale_at
from .config import (
    ConfigError,
    MetricsConfig,
    RunConfig,
    default_config,
    from_dict,
    load_config,
)
from .control import (
    AdaptiveState,
    AsmcConfig,
    KinematicGains,
    PostureError,
    SlidingVars,
    VelocityCommand,
    VelocityReference,
    adapt_gains,
    adapt_gains_baseline,
    asmc_force,
    asmc_torque,
    baseline_asmc,
    kinematic_control,
    posture_error,
    update_sliding,
)
from .engine import (
    EpisodeAborted,
    SimConfig,
    Trace,
    integrate_plant,
    run_episode,
    run_kinematic_episode,
)
from .metrics import (
    RmsReport,
    build_report,
    export_trace,
    load_trace,
    report_from_trace,
    rms,
)
from .platoon import (
    FollowerTarget,
    Path,
    PlatoonConfig,
    build_path,
    figure_eight,
    follower_target,
    gap_error,
    load_path_xy,
    nearest_index,
    pose_at_arc,
    reference_pose,
    reference_velocity,
    target_waypoint,
)
from .vehicle import (
    ControlWrench,
    RobotParams,
    RobotState,
    WheelSpeeds,
    WheelTorques,
    friction_forces,
    plant_derivative,
    wheel_speeds,
    wheel_torque_split,
    wrench_from_wheel_torques,
)

__version__ = "0.1.0"
