"""Deterministic alternating shared-control teleoperation simulator.

An operator's tracked hand and an automatic grasp pipeline take turns driving
a simulated manipulator: manual motion is re-anchored on every takeover so
the effector never jumps, orientation re-engages through SLERP blending, and
releases trigger preference-aware grasp selection plus a constant-speed
approach. Everything replays byte-identically from recorded inputs.
"""

from ._kernels import backend_name as kernel_backend
from .errors import (
    InvalidInputError,
    ModeViolationError,
    NoFeasibleGraspError,
    TeleograspError,
    TraceParseError,
)
from .geometry import (
    Pose,
    UnitQuaternion,
    angular_chord_distance,
    linear_distance,
    rotation_angle_between,
    slerp,
)
from .grasp_selection import (
    GraspCandidate,
    GraspLibrary,
    SelectionConfig,
    SelectionReport,
    filter_top_k_angular,
    filter_top_k_linear,
    generate_synthetic_library,
    load_library,
    save_library,
    select_grasp,
    select_grasp_baseline,
)
from .kinematics import (
    Joint,
    ManipulabilityScore,
    RobotModel,
    forward_kinematics,
    jacobian,
    joint_limit_margin,
    load_robot_model,
    penalized_manipulability,
    robot_model_from_dict,
    robot_model_to_dict,
    save_robot_model,
    solve_ik,
    yoshikawa_measure,
)
from .models import planar_2r, resolve_model, spatial_6r
from .scenario import (
    ExperimentReport,
    ReplayResult,
    ScenarioConfig,
    Strategy,
    load_scenario_config,
    load_trace,
    replay_trace,
    run_experiment,
)
from .service import Session, session_tick
from .shared_control import (
    CalibrationFrame,
    ControlAnchors,
    ControlState,
    HandSample,
    Mode,
    SharedControlConfig,
    blended_orientation_step,
    initial_state,
    map_orientation,
    map_position,
    step,
    switch_to_automatic,
    switch_to_manual,
)
from .trajectory import (
    MotionMetrics,
    Trajectory,
    compute_metrics,
    plan_approach,
    trajectory_to_csv,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationFrame",
    "ControlAnchors",
    "ControlState",
    "ExperimentReport",
    "GraspCandidate",
    "GraspLibrary",
    "HandSample",
    "InvalidInputError",
    "Joint",
    "ManipulabilityScore",
    "Mode",
    "ModeViolationError",
    "MotionMetrics",
    "NoFeasibleGraspError",
    "Pose",
    "ReplayResult",
    "RobotModel",
    "ScenarioConfig",
    "SelectionConfig",
    "SelectionReport",
    "Session",
    "SharedControlConfig",
    "Strategy",
    "TeleograspError",
    "TraceParseError",
    "Trajectory",
    "UnitQuaternion",
    "angular_chord_distance",
    "blended_orientation_step",
    "compute_metrics",
    "filter_top_k_angular",
    "filter_top_k_linear",
    "forward_kinematics",
    "generate_synthetic_library",
    "initial_state",
    "jacobian",
    "joint_limit_margin",
    "kernel_backend",
    "linear_distance",
    "load_library",
    "load_robot_model",
    "load_scenario_config",
    "load_trace",
    "map_orientation",
    "map_position",
    "penalized_manipulability",
    "plan_approach",
    "planar_2r",
    "replay_trace",
    "resolve_model",
    "robot_model_from_dict",
    "robot_model_to_dict",
    "rotation_angle_between",
    "run_experiment",
    "save_library",
    "save_robot_model",
    "select_grasp",
    "select_grasp_baseline",
    "session_tick",
    "slerp",
    "solve_ik",
    "spatial_6r",
    "step",
    "switch_to_automatic",
    "switch_to_manual",
    "trajectory_to_csv",
    "yoshikawa_measure",
]
