"""Rigid-body primitives: 3-vectors, unit quaternions, SLERP, pose distances.

Quaternions are stored in (w, x, y, z) order and sign-canonicalized at
construction so equal rotations serialize identically. q and -q describe the
same rotation; every rotation-level operation here is insensitive to the sign
of its inputs regardless of canonicalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

# Inputs may drift this far from unit norm before being rejected.
UNIT_NORM_TOL = 1e-6
# Norms already this close to 1 are left alone so that re-wrapping the
# components of an existing unit quaternion is bitwise idempotent (sign
# flips stay exact, which distance invariants rely on).
RENORM_BAND = 1e-9
# Below this rotation angle SLERP degrades to normalized lerp (vanishing sine).
SMALL_ANGLE = 1e-6
# Rotation angles within this band of pi have no unique shortest arc; a
# deterministic axis choice stands in for the tie.
ANTIPODAL_BAND = 1e-6

Vec3 = np.ndarray


def vec3(x: float, y: float, z: float) -> Vec3:
    """Build a finite 3-vector (meters for positions, unitless for directions)."""
    v = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"non-finite vector components: {v!r}")
    return v


def as_vec3(value) -> Vec3:
    """Coerce to a finite float (3,) array, rejecting anything else."""
    v = np.asarray(value, dtype=float)
    if v.shape != (3,):
        raise InvalidInputError(f"expected 3 vector components, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"non-finite vector components: {v!r}")
    return v


def _leading_negative(x: float, y: float, z: float) -> bool:
    for c in (x, y, z):
        if c != 0.0:
            return c < 0.0
    return False


class UnitQuaternion:
    """Unit quaternion (w, x, y, z).

    Construction validates the norm (within UNIT_NORM_TOL of 1), normalizes,
    and canonicalizes the sign: w >= 0, and if w == 0 the first nonzero of
    (x, y, z) is positive.
    """

    __slots__ = ("w", "x", "y", "z")

    def __init__(self, w: float, x: float, y: float, z: float):
        n2 = w * w + x * x + y * y + z * z
        if not math.isfinite(n2):
            raise InvalidInputError("non-finite quaternion components")
        n = math.sqrt(n2)
        if abs(n - 1.0) > UNIT_NORM_TOL:
            raise InvalidInputError(
                f"quaternion norm {n:.9g} not within {UNIT_NORM_TOL:g} of 1"
            )
        if abs(n - 1.0) > RENORM_BAND:
            w, x, y, z = w / n, x / n, y / n, z / n
        if w < 0.0 or (w == 0.0 and _leading_negative(x, y, z)):
            w, x, y, z = -w, -x, -y, -z
        self.w = float(w)
        self.x = float(x)
        self.y = float(y)
        self.z = float(z)

    @classmethod
    def identity(cls) -> "UnitQuaternion":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_axis_angle(cls, axis, angle: float) -> "UnitQuaternion":
        a = as_vec3(axis)
        n = float(np.linalg.norm(a))
        if n < 1e-12:
            raise InvalidInputError("rotation axis must be nonzero")
        h = 0.5 * angle
        s = math.sin(h) / n
        return cls(math.cos(h), a[0] * s, a[1] * s, a[2] * s)

    @classmethod
    def from_array(cls, values) -> "UnitQuaternion":
        q = np.asarray(values, dtype=float)
        if q.shape != (4,):
            raise InvalidInputError(f"expected 4 components (w, x, y, z), got shape {q.shape}")
        return cls(q[0], q[1], q[2], q[3])

    @classmethod
    def from_rotation_matrix(cls, matrix) -> "UnitQuaternion":
        R = np.asarray(matrix, dtype=float)
        if R.shape != (3, 3):
            raise InvalidInputError(f"expected a 3x3 rotation matrix, got shape {R.shape}")
        if not np.all(np.isfinite(R)) or abs(float(np.linalg.det(R)) - 1.0) > 1e-6:
            raise InvalidInputError("matrix is not a proper rotation")
        # Shepperd's method: branch on the largest diagonal contribution.
        tr = R[0, 0] + R[1, 1] + R[2, 2]
        if tr > 0.0:
            s = 2.0 * math.sqrt(tr + 1.0)
            return cls(0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s)
        if R[0, 0] >= R[1, 1] and R[0, 0] >= R[2, 2]:
            s = 2.0 * math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
            return cls((R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s)
        if R[1, 1] >= R[2, 2]:
            s = 2.0 * math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
            return cls((R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s)
        s = 2.0 * math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        return cls((R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def to_rotation_matrix(self) -> np.ndarray:
        w, x, y, z = self.w, self.x, self.y, self.z
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
                [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
                [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
            ]
        )

    def dot(self, other: "UnitQuaternion") -> float:
        return self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z

    def conjugate(self) -> "UnitQuaternion":
        return UnitQuaternion(self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other: "UnitQuaternion") -> "UnitQuaternion":
        # Hamilton product; composition applies `other` first, then `self`.
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return UnitQuaternion(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def rotate(self, v) -> Vec3:
        """Rotate a 3-vector by this quaternion."""
        p = as_vec3(v)
        u = np.array([self.x, self.y, self.z])
        t = 2.0 * np.cross(u, p)
        return p + self.w * t + np.cross(u, t)

    def __repr__(self) -> str:
        return f"UnitQuaternion(w={self.w:.9g}, x={self.x:.9g}, y={self.y:.9g}, z={self.z:.9g})"


def rot_x(angle: float) -> UnitQuaternion:
    return UnitQuaternion(math.cos(0.5 * angle), math.sin(0.5 * angle), 0.0, 0.0)


def rot_y(angle: float) -> UnitQuaternion:
    return UnitQuaternion(math.cos(0.5 * angle), 0.0, math.sin(0.5 * angle), 0.0)


def rot_z(angle: float) -> UnitQuaternion:
    return UnitQuaternion(math.cos(0.5 * angle), 0.0, 0.0, math.sin(0.5 * angle))


def _aligned_components(q0: UnitQuaternion, q1: UnitQuaternion):
    """Components of q1, sign-flipped onto the same hemisphere as q0."""
    if q0.dot(q1) < 0.0:
        return -q1.w, -q1.x, -q1.y, -q1.z
    return q1.w, q1.x, q1.y, q1.z


def rotation_angle_between(qa: UnitQuaternion, qb: UnitQuaternion) -> float:
    """Rotation angle in [0, pi] between the two rotations, sign-insensitive.

    Computed from the chord (a subtraction) rather than acos of the dot, which
    keeps precision for near-identical rotations.
    """
    w, x, y, z = _aligned_components(qa, qb)
    chord = math.sqrt((w - qa.w) ** 2 + (x - qa.x) ** 2 + (y - qa.y) ** 2 + (z - qa.z) ** 2)
    return 4.0 * math.asin(min(0.5 * chord, 1.0))


def angular_chord_distance(qa: UnitQuaternion, qb: UnitQuaternion) -> float:
    """Chord length of the shortest 4-space path between the two orientations.

    min(|qa + qb|, |qa - qb|), in [0, sqrt(2)]; invariant under a sign flip of
    either argument.
    """
    plus = math.sqrt(
        (qa.w + qb.w) ** 2 + (qa.x + qb.x) ** 2 + (qa.y + qb.y) ** 2 + (qa.z + qb.z) ** 2
    )
    minus = math.sqrt(
        (qa.w - qb.w) ** 2 + (qa.x - qb.x) ** 2 + (qa.y - qb.y) ** 2 + (qa.z - qb.z) ** 2
    )
    return min(plus, minus)


def linear_distance(pa, pb) -> float:
    """Euclidean distance between two points, meters."""
    return float(np.linalg.norm(as_vec3(pa) - as_vec3(pb)))


def _slerp_near_antipodal(q0: UnitQuaternion, q1: UnitQuaternion, alpha: float) -> UnitQuaternion:
    # Rotations separated by ~pi admit two equal-length arcs (one around the
    # relative axis, one around its negation). Pin the axis sign with a fixed
    # rule so replays are deterministic; the endpoints are preserved up to
    # quaternion sign.
    rel = q0.conjugate() * q1
    vn = math.sqrt(rel.x * rel.x + rel.y * rel.y + rel.z * rel.z)
    ux, uy, uz = rel.x / vn, rel.y / vn, rel.z / vn
    theta = 2.0 * math.atan2(vn, rel.w)
    if _leading_negative(ux, uy, uz):
        ux, uy, uz = -ux, -uy, -uz
        theta = 2.0 * math.pi - theta
    h = 0.5 * alpha * theta
    s = math.sin(h)
    return q0 * UnitQuaternion(math.cos(h), ux * s, uy * s, uz * s)


def slerp(q0: UnitQuaternion, q1: UnitQuaternion, alpha: float) -> UnitQuaternion:
    """Spherical linear interpolation along the shorter great-circle arc.

    The rotation angle from q0 to the result is alpha times the angle from q0
    to q1. Tiny angles fall back to normalized lerp; near-antipodal rotations
    take a deterministic fixed-axis route (see _slerp_near_antipodal).
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError(f"alpha must be in [0, 1], got {alpha!r}")
    w1, x1, y1, z1 = _aligned_components(q0, q1)
    chord = math.sqrt((w1 - q0.w) ** 2 + (x1 - q0.x) ** 2 + (y1 - q0.y) ** 2 + (z1 - q0.z) ** 2)
    omega = 2.0 * math.asin(min(0.5 * chord, 1.0))  # 4-space arc, in [0, pi/2]
    rotation = 2.0 * omega
    if rotation < SMALL_ANGLE:
        return UnitQuaternion(
            q0.w + alpha * (w1 - q0.w),
            q0.x + alpha * (x1 - q0.x),
            q0.y + alpha * (y1 - q0.y),
            q0.z + alpha * (z1 - q0.z),
        )
    if rotation > math.pi - ANTIPODAL_BAND:
        return _slerp_near_antipodal(q0, q1, alpha)
    s = math.sin(omega)
    c0 = math.sin((1.0 - alpha) * omega) / s
    c1 = math.sin(alpha * omega) / s
    return UnitQuaternion(
        c0 * q0.w + c1 * w1,
        c0 * q0.x + c1 * x1,
        c0 * q0.y + c1 * y1,
        c0 * q0.z + c1 * z1,
    )


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid-body state: position (m) plus unit-quaternion orientation."""

    position: Vec3
    orientation: UnitQuaternion

    def __post_init__(self):
        object.__setattr__(self, "position", as_vec3(self.position))
        if not isinstance(self.orientation, UnitQuaternion):
            raise InvalidInputError("orientation must be a UnitQuaternion")

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.zeros(3), UnitQuaternion.identity())

    def compose(self, other: "Pose") -> "Pose":
        """Rigid composition: apply `other` in this pose's frame."""
        return Pose(
            self.position + self.orientation.rotate(other.position),
            self.orientation * other.orientation,
        )

    def inverse(self) -> "Pose":
        inv = self.orientation.conjugate()
        return Pose(-inv.rotate(self.position), inv)

    def to_dict(self) -> dict:
        return {
            "p": [float(c) for c in self.position],
            "q": [self.orientation.w, self.orientation.x, self.orientation.y, self.orientation.z],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Pose":
        try:
            p, q = data["p"], data["q"]
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"pose must have keys 'p' and 'q', got {data!r}") from exc
        return cls(as_vec3(p), UnitQuaternion.from_array(q))

    def __repr__(self) -> str:
        p = ", ".join(f"{c:.6g}" for c in self.position)
        return f"Pose(position=({p}), orientation={self.orientation!r})"
