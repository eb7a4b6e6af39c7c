"""Automatic-mode motion: constant-speed straight-line approach with geodesic
orientation interpolation, plus the motion metrics used for comparisons."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .geometry import Pose, linear_distance, rotation_angle_between, slerp

DEFAULT_SPEED = 0.1
DEFAULT_DT = 0.02

# Displacements shorter than this carry no usable heading direction.
_HEADING_EPS = 1e-12


@dataclass(frozen=True)
class Trajectory:
    """Timed pose samples, uniformly spaced by dt except possibly the last.

    Consecutive positions may not move farther than speed * dt (plus float
    slack), so a Trajectory is always executable at its declared speed.
    """

    samples: tuple
    speed: float
    dt: float

    def __post_init__(self):
        samples = tuple((float(t), pose) for t, pose in self.samples)
        if not samples:
            raise InvalidInputError("trajectory needs at least one sample")
        if not self.speed > 0.0:
            raise InvalidInputError(f"speed must be > 0, got {self.speed!r}")
        if not self.dt > 0.0:
            raise InvalidInputError(f"dt must be > 0, got {self.dt!r}")
        step_cap = self.speed * self.dt + 1e-9
        for i, (t, pose) in enumerate(samples):
            if not isinstance(pose, Pose):
                raise InvalidInputError(f"sample {i} pose must be a Pose")
            if i == 0:
                continue
            prev_t, prev_pose = samples[i - 1]
            if not t > prev_t:
                raise InvalidInputError(f"sample times must strictly increase at index {i}")
            if i + 1 < len(samples) and abs((t - prev_t) - self.dt) > 1e-9:
                raise InvalidInputError(f"interior samples must be spaced by dt at index {i}")
            if linear_distance(pose.position, prev_pose.position) > step_cap:
                raise InvalidInputError(
                    f"positional step at index {i} exceeds speed*dt"
                )
        object.__setattr__(self, "samples", samples)


@dataclass(frozen=True)
class MotionMetrics:
    path_length: float
    orientation_travel: float
    completion_time: float
    max_step_heading_change: float

    def to_dict(self) -> dict:
        return {
            "path_length": self.path_length,
            "orientation_travel": self.orientation_travel,
            "completion_time": self.completion_time,
            "max_step_heading_change": self.max_step_heading_change,
        }


def plan_approach(
    start: Pose,
    target: Pose,
    speed: float = DEFAULT_SPEED,
    dt: float = DEFAULT_DT,
) -> Trajectory:
    """Interpolate from start to target at constant linear speed.

    Position moves on the straight segment; orientation follows the SLERP
    geodesic at the same arc-length fraction, so both arrive together. The
    final sample is exactly the target.
    """
    if not isinstance(start, Pose) or not isinstance(target, Pose):
        raise InvalidInputError("start and target must be Pose instances")
    if not speed > 0.0:
        raise InvalidInputError(f"speed must be > 0, got {speed!r}")
    if not dt > 0.0:
        raise InvalidInputError(f"dt must be > 0, got {dt!r}")
    distance = linear_distance(start.position, target.position)
    if distance == 0.0:
        if rotation_angle_between(start.orientation, target.orientation) == 0.0:
            return Trajectory(samples=((0.0, start),), speed=speed, dt=dt)
        # No positional path to stretch the turn over; settle in one step.
        return Trajectory(samples=((0.0, start), (dt, target)), speed=speed, dt=dt)
    total_time = distance / speed
    samples = [(0.0, start)]
    i = 1
    while i * dt < total_time - 1e-12:
        t = i * dt
        fraction = t / total_time
        position = start.position + fraction * (target.position - start.position)
        orientation = slerp(start.orientation, target.orientation, fraction)
        samples.append((t, Pose(position, orientation)))
        i += 1
    samples.append((total_time, target))
    return Trajectory(samples=tuple(samples), speed=speed, dt=dt)


def compute_metrics(traj: Trajectory) -> MotionMetrics:
    """Path length, summed orientation travel, completion time, worst kink.

    The kink metric (max_step_heading_change) is the largest angle between
    consecutive displacement vectors; pairs involving a near-zero displacement
    are skipped since they define no heading.
    """
    samples = traj.samples
    if not samples:
        raise InvalidInputError("trajectory must contain at least one sample")
    if len(samples) == 1:
        return MotionMetrics(0.0, 0.0, samples[-1][0], 0.0)
    path_length = 0.0
    orientation_travel = 0.0
    displacements = []
    for (_, prev), (_, cur) in zip(samples, samples[1:]):
        delta = np.asarray(cur.position) - np.asarray(prev.position)
        path_length += float(np.linalg.norm(delta))
        orientation_travel += rotation_angle_between(prev.orientation, cur.orientation)
        displacements.append(delta)
    max_kink = 0.0
    for u, v in zip(displacements, displacements[1:]):
        nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
        if nu < _HEADING_EPS or nv < _HEADING_EPS:
            continue
        angle = math.atan2(float(np.linalg.norm(np.cross(u, v))), float(np.dot(u, v)))
        max_kink = max(max_kink, angle)
    return MotionMetrics(
        path_length=path_length,
        orientation_travel=orientation_travel,
        completion_time=samples[-1][0],
        max_step_heading_change=max_kink,
    )


def trajectory_to_csv(traj: Trajectory) -> str:
    """CSV export with one row per sample; floats use shortest round-trip form."""
    lines = ["t,px,py,pz,qw,qx,qy,qz"]
    for t, pose in traj.samples:
        px, py, pz = (float(c) for c in pose.position)
        q = pose.orientation
        lines.append(
            f"{t!r},{px!r},{py!r},{pz!r},{q.w!r},{q.x!r},{q.y!r},{q.z!r}"
        )
    return "\n".join(lines) + "\n"


def save_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(trajectory_to_csv(traj))
