"""Serial-manipulator model: forward kinematics, geometric Jacobian,
damped-least-squares inverse kinematics, and limit-penalized manipulability.

Heavy math is delegated to the kernel lane in ``_kernels`` (compiled when
available, NumPy otherwise); this module owns validation, types, and JSON IO.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import InvalidInputError
from .geometry import Pose, UnitQuaternion

# Inverse-kinematics configuration (tuning, not contract).
IK_DAMPING = 0.05
IK_STEP_CLAMP = 0.2
IK_POS_TOL = 1e-4
IK_ANG_TOL = 1e-3
IK_MAX_ITERS = 200

_FINITE_FIELDS = ("a", "alpha", "d", "theta_offset", "min_angle", "max_angle")


@dataclass(frozen=True)
class Joint:
    """One revolute joint: standard DH link parameters plus angle limits.

    Lengths (a, d) in meters; angles (alpha, theta_offset, limits) in radians.
    The joint transform is RotZ(theta + theta_offset) . TransZ(d) . TransX(a)
    . RotX(alpha).
    """

    a: float
    alpha: float
    d: float
    theta_offset: float
    min_angle: float
    max_angle: float

    def __post_init__(self):
        for name in _FINITE_FIELDS:
            if not math.isfinite(getattr(self, name)):
                raise InvalidInputError(f"joint field {name} must be finite")
        if not self.min_angle < self.max_angle:
            raise InvalidInputError(
                f"joint limits must satisfy min < max, got [{self.min_angle}, {self.max_angle}]"
            )


@dataclass(frozen=True)
class RobotModel:
    """Immutable revolute-joint chain.

    task_rows picks which end-effector velocity components count as the task
    space (0-2 linear, 3-5 angular). It drives both the manipulability measure
    and IK convergence; the default is the first min(6, joint_count) rows.
    """

    joints: tuple
    base: Pose = None
    tool: Pose = None
    task_rows: tuple = None
    name: str = "robot"

    def __post_init__(self):
        if self.base is None:
            object.__setattr__(self, "base", Pose.identity())
        if self.tool is None:
            object.__setattr__(self, "tool", Pose.identity())
        joints = tuple(self.joints)
        if len(joints) < 2:
            raise InvalidInputError("robot model needs at least 2 joints")
        if not all(isinstance(j, Joint) for j in joints):
            raise InvalidInputError("joints must be Joint instances")
        object.__setattr__(self, "joints", joints)
        if not isinstance(self.base, Pose) or not isinstance(self.tool, Pose):
            raise InvalidInputError("base and tool must be Pose instances")
        rows = self.task_rows
        if rows is None:
            rows = tuple(range(min(6, len(joints))))
        else:
            rows = tuple(int(r) for r in rows)
            if not rows or any(r < 0 or r > 5 for r in rows):
                raise InvalidInputError("task_rows must be a nonempty subset of 0..5")
            if list(rows) != sorted(set(rows)):
                raise InvalidInputError("task_rows must be strictly increasing")
        object.__setattr__(self, "task_rows", rows)

    @property
    def joint_count(self) -> int:
        return len(self.joints)

    # Packed views consumed by the kernels. cached_property writes straight
    # into __dict__, which a frozen dataclass still allows.
    @cached_property
    def _params(self) -> np.ndarray:
        return np.ascontiguousarray(
            [[j.a, j.alpha, j.d, j.theta_offset] for j in self.joints], dtype=float
        )

    @cached_property
    def _limits_min(self) -> np.ndarray:
        return np.ascontiguousarray([j.min_angle for j in self.joints], dtype=float)

    @cached_property
    def _limits_max(self) -> np.ndarray:
        return np.ascontiguousarray([j.max_angle for j in self.joints], dtype=float)

    @cached_property
    def _task_rows(self) -> np.ndarray:
        return np.ascontiguousarray(self.task_rows, dtype=np.int64)

    @cached_property
    def _base_matrix(self) -> np.ndarray:
        return _pose_matrix(self.base)

    @cached_property
    def _tool_matrix(self) -> np.ndarray:
        return _pose_matrix(self.tool)


@dataclass(frozen=True)
class ManipulabilityScore:
    """Limit-penalized manipulability: penalized = yoshikawa * limit_margin."""

    yoshikawa: float
    limit_margin: float
    penalized: float

    def to_dict(self) -> dict:
        return {
            "yoshikawa": self.yoshikawa,
            "limit_margin": self.limit_margin,
            "penalized": self.penalized,
        }


def _pose_matrix(pose: Pose) -> np.ndarray:
    T = np.eye(4)
    T[:3, :3] = pose.orientation.to_rotation_matrix()
    T[:3, 3] = pose.position
    return np.ascontiguousarray(T)


def _validated_theta(model: RobotModel, theta) -> np.ndarray:
    t = np.asarray(theta, dtype=float)
    if t.shape != (model.joint_count,):
        raise InvalidInputError(
            f"expected {model.joint_count} joint angles, got shape {t.shape}"
        )
    if not np.all(np.isfinite(t)):
        raise InvalidInputError("joint angles must be finite")
    return t


def forward_kinematics(model: RobotModel, theta) -> Pose:
    """End-effector pose: base frame, each joint's DH transform, tool frame."""
    t = _validated_theta(model, theta)
    T = _kernels.fk_pose(model._params, t, model._base_matrix, model._tool_matrix)
    return Pose(T[:3, 3].copy(), UnitQuaternion.from_rotation_matrix(T[:3, :3]))


def jacobian(model: RobotModel, theta) -> np.ndarray:
    """Geometric Jacobian (6, n) at the tool point, expressed in world frame.

    Rows 0-2 are linear velocity (m/rad), rows 3-5 angular (rad/rad).
    """
    t = _validated_theta(model, theta)
    return _kernels.jacobian(model._params, t, model._base_matrix, model._tool_matrix)


def yoshikawa_measure(model: RobotModel, theta) -> float:
    """sqrt(det(J Jᵀ)) over the model's task rows; exactly 0 at singularities."""
    J = jacobian(model, theta)[model._task_rows, :]
    gram = J @ J.T
    det = float(np.linalg.det(gram))
    return math.sqrt(det) if det > 0.0 else 0.0


def joint_limit_margin(model: RobotModel, theta) -> float:
    """Product over joints of 4(t-min)(max-t)/(max-min)^2, factors clamped to [0,1].

    1 when every joint sits mid-range, 0 as soon as any joint reaches a limit.
    """
    t = _validated_theta(model, theta)
    margin = 1.0
    for angle, joint in zip(t, model.joints):
        span = joint.max_angle - joint.min_angle
        factor = 4.0 * (angle - joint.min_angle) * (joint.max_angle - angle) / (span * span)
        margin *= min(max(factor, 0.0), 1.0)
    return margin


def penalized_manipulability(model: RobotModel, theta) -> ManipulabilityScore:
    s = yoshikawa_measure(model, theta)
    margin = joint_limit_margin(model, theta)
    return ManipulabilityScore(yoshikawa=s, limit_margin=margin, penalized=s * margin)


def solve_ik(
    model: RobotModel,
    target: Pose,
    seed,
    *,
    damping: float = IK_DAMPING,
    step_clamp: float = IK_STEP_CLAMP,
    pos_tol: float = IK_POS_TOL,
    ang_tol: float = IK_ANG_TOL,
    max_iters: int = IK_MAX_ITERS,
):
    """Damped-least-squares IK from seed toward target.

    Returns the joint vector on convergence, None on failure (a normal,
    reportable outcome: unreachable or awkward targets are expected and are
    filtered out by callers). Results always respect joint limits. Convergence
    is judged on the model's task rows: the selected position components
    within pos_tol (meters) and the selected orientation components within
    ang_tol (radians).
    """
    t = _validated_theta(model, seed)
    if not isinstance(target, Pose):
        raise InvalidInputError("IK target must be a Pose")
    theta, converged, _ = _kernels.ik_dls(
        model._params,
        model._base_matrix,
        model._tool_matrix,
        model._limits_min,
        model._limits_max,
        model._task_rows,
        t,
        target.position,
        target.orientation.as_array(),
        damping,
        step_clamp,
        pos_tol,
        ang_tol,
        int(max_iters),
    )
    return theta if converged else None


def robot_model_to_dict(model: RobotModel) -> dict:
    return {
        "name": model.name,
        "joints": [
            {
                "a": j.a,
                "alpha": j.alpha,
                "d": j.d,
                "theta_offset": j.theta_offset,
                "min": j.min_angle,
                "max": j.max_angle,
            }
            for j in model.joints
        ],
        "base": model.base.to_dict(),
        "tool": model.tool.to_dict(),
        "task_rows": list(model.task_rows),
    }


def robot_model_from_dict(data: dict) -> RobotModel:
    if not isinstance(data, dict):
        raise InvalidInputError(f"robot model must be a JSON object, got {type(data).__name__}")
    try:
        joint_specs = data["joints"]
        base = Pose.from_dict(data["base"])
        tool = Pose.from_dict(data["tool"])
    except KeyError as exc:
        raise InvalidInputError(f"robot model is missing key {exc.args[0]!r}") from exc
    joints = []
    for i, js in enumerate(joint_specs):
        try:
            joints.append(
                Joint(
                    a=float(js["a"]),
                    alpha=float(js["alpha"]),
                    d=float(js["d"]),
                    theta_offset=float(js["theta_offset"]),
                    min_angle=float(js["min"]),
                    max_angle=float(js["max"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"joint {i} is malformed: {exc}") from exc
    return RobotModel(
        joints=tuple(joints),
        base=base,
        tool=tool,
        task_rows=tuple(data["task_rows"]) if "task_rows" in data else None,
        name=str(data.get("name", "robot")),
    )


def load_robot_model(path) -> RobotModel:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"robot model file {path} is not valid JSON: {exc}") from exc
    return robot_model_from_dict(data)


def save_robot_model(model: RobotModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(robot_model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")
