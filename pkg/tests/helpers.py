"""Shared non-fixture helpers for the test suite."""

import math
import pathlib

import numpy as np

from teleograsp import Pose, UnitQuaternion

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

# Acceptance-gate result lines, echoed after the run by a conftest hook so
# they stay visible even when pytest captures test output.
ACCEPTANCE_LINES: list = []


def random_unit_quaternion(rng) -> UnitQuaternion:
    v = rng.normal(size=4)
    n = np.linalg.norm(v)
    while n < 1e-6:
        v = rng.normal(size=4)
        n = np.linalg.norm(v)
    v = v / n
    return UnitQuaternion(v[0], v[1], v[2], v[3])


def random_pose(rng, scale: float = 1.0) -> Pose:
    return Pose(rng.uniform(-scale, scale, size=3), random_unit_quaternion(rng))


def comfortable_theta(model, rng) -> np.ndarray:
    """Joint vector in the middle half of every joint's range."""
    lo, hi = model._limits_min, model._limits_max
    return lo + (hi - lo) * (0.25 + 0.5 * rng.random_sample(model.joint_count))


def quaternions_equal_as_rotations(qa: UnitQuaternion, qb: UnitQuaternion, tol: float = 1e-9) -> bool:
    return min(
        float(np.linalg.norm(qa.as_array() - qb.as_array())),
        float(np.linalg.norm(qa.as_array() + qb.as_array())),
    ) <= tol


def deg(x: float) -> float:
    return math.radians(x)


def _small_rotation_vector(q: UnitQuaternion) -> np.ndarray:
    vn = math.sqrt(q.x * q.x + q.y * q.y + q.z * q.z)
    if vn < 1e-15:
        return np.zeros(3)
    scale = 2.0 * math.atan2(vn, q.w) / vn
    return scale * np.array([q.x, q.y, q.z])


def finite_difference_jacobian(model, theta, eps: float = 1e-6) -> np.ndarray:
    """Central-difference geometric Jacobian; the analytic oracle's foil."""
    from teleograsp import forward_kinematics

    theta = np.asarray(theta, dtype=float)
    J = np.zeros((6, theta.size))
    for i in range(theta.size):
        plus = theta.copy()
        minus = theta.copy()
        plus[i] += eps
        minus[i] -= eps
        fp = forward_kinematics(model, plus)
        fm = forward_kinematics(model, minus)
        J[:3, i] = (fp.position - fm.position) / (2.0 * eps)
        delta = fp.orientation * fm.orientation.conjugate()
        J[3:, i] = _small_rotation_vector(delta) / (2.0 * eps)
    return J
