"""Built-in robot models and model-reference resolution.

Model references accepted across the CLI and service are either a path to a
robot JSON file or "builtin:<name>" for one of the models defined here.
"""

from __future__ import annotations

import math

from .errors import InvalidInputError
from .geometry import Pose
from .kinematics import Joint, RobotModel, load_robot_model

BUILTIN_PREFIX = "builtin:"


def planar_2r() -> RobotModel:
    """Two revolute z-axis joints with unit links, moving in the xy plane.

    Task rows restrict to planar position, so the manipulability measure is
    the classic |sin(theta2)| of the 2R arm.
    """
    joint = dict(alpha=0.0, d=0.0, theta_offset=0.0, min_angle=-math.pi, max_angle=math.pi)
    return RobotModel(
        joints=(Joint(a=1.0, **joint), Joint(a=1.0, **joint)),
        base=Pose.identity(),
        tool=Pose.identity(),
        task_rows=(0, 1),
        name="planar_2r",
    )


def spatial_6r() -> RobotModel:
    """Six-axis arm: anthropomorphic shoulder/elbow plus a spherical wrist.

    Proportions are tabletop scale (reach about 0.7 m). Wrist limits span a
    bit more than a full turn so required tool rolls are always interior;
    narrow limits there make the greedy IK stall against the walls.
    """
    joints = (
        Joint(a=0.0, alpha=math.pi / 2, d=0.35, theta_offset=0.0, min_angle=-2.9, max_angle=2.9),
        Joint(a=0.35, alpha=0.0, d=0.0, theta_offset=0.0, min_angle=-2.0, max_angle=2.0),
        Joint(a=0.08, alpha=math.pi / 2, d=0.0, theta_offset=0.0, min_angle=-2.0, max_angle=2.0),
        Joint(a=0.0, alpha=-math.pi / 2, d=0.30, theta_offset=0.0, min_angle=-3.2, max_angle=3.2),
        Joint(a=0.0, alpha=math.pi / 2, d=0.0, theta_offset=0.0, min_angle=-2.4, max_angle=2.4),
        Joint(a=0.0, alpha=0.0, d=0.08, theta_offset=0.0, min_angle=-3.2, max_angle=3.2),
    )
    return RobotModel(
        joints=joints,
        base=Pose.identity(),
        tool=Pose.identity(),
        task_rows=(0, 1, 2, 3, 4, 5),
        name="spatial_6r",
    )


BUILTIN_MODELS = {
    "planar_2r": planar_2r,
    "spatial_6r": spatial_6r,
}


def resolve_model(reference: str) -> RobotModel:
    """Load a model from "builtin:<name>" or from a JSON file path."""
    if reference.startswith(BUILTIN_PREFIX):
        name = reference[len(BUILTIN_PREFIX):]
        try:
            return BUILTIN_MODELS[name]()
        except KeyError:
            known = ", ".join(sorted(BUILTIN_MODELS))
            raise InvalidInputError(
                f"unknown builtin model {name!r} (available: {known})"
            ) from None
    return load_robot_model(reference)
