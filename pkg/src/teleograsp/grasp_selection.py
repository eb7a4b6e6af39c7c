"""Preference-aware grasp selection.

A stored library of candidate grasp poses is narrowed in three stages: keep
the candidates closest in orientation to the operator's effector pose, keep
the closest of those in position, then pick the finalist whose IK solution
has the highest limit-penalized manipulability. A baseline selector skips the
operator-preference stages and scores the whole library.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NoFeasibleGraspError
from .geometry import Pose, UnitQuaternion, angular_chord_distance, as_vec3, linear_distance
from .kinematics import (
    ManipulabilityScore,
    RobotModel,
    penalized_manipulability,
    solve_ik,
)

DEFAULT_K_ANGULAR = 30
DEFAULT_K_LINEAR = 6


@dataclass(frozen=True)
class GraspCandidate:
    id: int
    object_id: str
    pose: Pose

    def __post_init__(self):
        if not isinstance(self.id, int) or self.id < 0:
            raise InvalidInputError(f"candidate id must be a non-negative int, got {self.id!r}")
        if not isinstance(self.pose, Pose):
            raise InvalidInputError("candidate pose must be a Pose")

    def to_dict(self) -> dict:
        d = self.pose.to_dict()
        return {"id": self.id, "p": d["p"], "q": d["q"]}


@dataclass(frozen=True)
class GraspLibrary:
    object_id: str
    candidates: tuple

    def __post_init__(self):
        candidates = tuple(self.candidates)
        if not candidates:
            raise InvalidInputError("grasp library must contain at least one candidate")
        if not all(isinstance(c, GraspCandidate) for c in candidates):
            raise InvalidInputError("library entries must be GraspCandidate instances")
        ids = [c.id for c in candidates]
        if len(set(ids)) != len(ids):
            raise InvalidInputError("candidate ids must be unique within a library")
        object.__setattr__(self, "candidates", candidates)

    def to_dict(self) -> dict:
        return {
            "object_id": self.object_id,
            "candidates": [c.to_dict() for c in self.candidates],
        }


@dataclass(frozen=True)
class SelectionConfig:
    k_angular: int = DEFAULT_K_ANGULAR
    k_linear: int = DEFAULT_K_LINEAR

    def __post_init__(self):
        if not (isinstance(self.k_angular, int) and self.k_angular >= 1):
            raise InvalidInputError(f"k_angular must be an int >= 1, got {self.k_angular!r}")
        if not (isinstance(self.k_linear, int) and self.k_linear >= 1):
            raise InvalidInputError(f"k_linear must be an int >= 1, got {self.k_linear!r}")
        if self.k_linear > self.k_angular:
            raise InvalidInputError(
                f"k_linear ({self.k_linear}) must not exceed k_angular ({self.k_angular})"
            )


@dataclass(frozen=True)
class SelectionReport:
    """Audit trail of one selection run.

    angular_stage and linear_stage list (candidate id, distance) pairs in
    ascending distance order; discarded_ik_failures lists finalists that had
    no reachable joint solution.
    """

    chosen: GraspCandidate
    chosen_joint_solution: np.ndarray
    chosen_score: ManipulabilityScore
    angular_stage: tuple
    linear_stage: tuple
    discarded_ik_failures: tuple

    def to_dict(self) -> dict:
        return {
            "chosen": {"object_id": self.chosen.object_id, **self.chosen.to_dict()},
            "chosen_joint_solution": [float(v) for v in self.chosen_joint_solution],
            "chosen_score": self.chosen_score.to_dict(),
            "angular_stage": [[i, float(d)] for i, d in self.angular_stage],
            "linear_stage": [[i, float(d)] for i, d in self.linear_stage],
            "discarded_ik_failures": list(self.discarded_ik_failures),
        }


def _checked_candidates(candidates) -> list:
    cs = list(candidates)
    if not cs:
        raise InvalidInputError("candidate list must be non-empty")
    return cs


def filter_top_k_angular(candidates, q_ee: UnitQuaternion, k: int) -> list:
    """min(k, n) candidates nearest in orientation, ascending; ties by id."""
    cs = _checked_candidates(candidates)
    if k < 1:
        raise InvalidInputError(f"k must be >= 1, got {k!r}")
    scored = [(c, angular_chord_distance(c.pose.orientation, q_ee)) for c in cs]
    scored.sort(key=lambda pair: (pair[1], pair[0].id))
    return scored[: min(k, len(scored))]


def filter_top_k_linear(candidates, p_ee, k: int) -> list:
    """min(k, n) candidates nearest in position, ascending; ties by id."""
    cs = _checked_candidates(candidates)
    if k < 1:
        raise InvalidInputError(f"k must be >= 1, got {k!r}")
    p = as_vec3(p_ee)
    scored = [(c, linear_distance(c.pose.position, p)) for c in cs]
    scored.sort(key=lambda pair: (pair[1], pair[0].id))
    return scored[: min(k, len(scored))]


def _validated_seed(model: RobotModel, theta_seed) -> np.ndarray:
    seed = np.asarray(theta_seed, dtype=float)
    if seed.shape != (model.joint_count,):
        raise InvalidInputError(
            f"theta_seed must have {model.joint_count} entries, got shape {seed.shape}"
        )
    if not np.all(np.isfinite(seed)):
        raise InvalidInputError("theta_seed must be finite")
    return seed


def _score_finalists(finalists, model: RobotModel, seed: np.ndarray):
    """IK + manipulability per finalist; returns (scored rows, failed ids)."""
    scored = []
    failures = []
    for candidate, d_l in finalists:
        theta = solve_ik(model, candidate.pose, seed)
        if theta is None:
            failures.append(candidate.id)
            continue
        score = penalized_manipulability(model, theta)
        scored.append((candidate, d_l, theta, score))
    return scored, failures


def _pick_best(scored):
    # Highest penalized manipulability; ties by smaller linear distance, then
    # by smaller id.
    return min(scored, key=lambda row: (-row[3].penalized, row[1], row[0].id))


def select_grasp(
    library: GraspLibrary,
    ee_pose: Pose,
    model: RobotModel,
    theta_seed,
    config: SelectionConfig | None = None,
) -> SelectionReport:
    """Run the full three-stage pipeline against the operator's current pose."""
    if config is None:
        config = SelectionConfig()
    if not isinstance(ee_pose, Pose):
        raise InvalidInputError("ee_pose must be a Pose")
    seed = _validated_seed(model, theta_seed)
    angular = filter_top_k_angular(library.candidates, ee_pose.orientation, config.k_angular)
    linear = filter_top_k_linear([c for c, _ in angular], ee_pose.position, config.k_linear)
    scored, failures = _score_finalists(linear, model, seed)
    if not scored:
        raise NoFeasibleGraspError(
            f"all {len(linear)} finalists for object {library.object_id!r} failed IK"
        )
    chosen, d_l, theta, score = _pick_best(scored)
    return SelectionReport(
        chosen=chosen,
        chosen_joint_solution=theta,
        chosen_score=score,
        angular_stage=tuple((c.id, d) for c, d in angular),
        linear_stage=tuple((c.id, d) for c, d in linear),
        discarded_ik_failures=tuple(failures),
    )


def select_grasp_baseline(library: GraspLibrary, model: RobotModel, theta_seed) -> SelectionReport:
    """Score every candidate in the library and take the global argmax.

    There is no operator pose to measure distances against, so both report
    stages record a full-library scan with distance 0, ordered by id, and the
    distance tie-break reduces to the id tie-break.
    """
    seed = _validated_seed(model, theta_seed)
    ordered = sorted(library.candidates, key=lambda c: c.id)
    scan = [(c, 0.0) for c in ordered]
    scored, failures = _score_finalists(scan, model, seed)
    if not scored:
        raise NoFeasibleGraspError(
            f"all {len(ordered)} candidates for object {library.object_id!r} failed IK"
        )
    chosen, d_l, theta, score = _pick_best(scored)
    stage = tuple((c.id, d) for c, d in scan)
    return SelectionReport(
        chosen=chosen,
        chosen_joint_solution=theta,
        chosen_score=score,
        angular_stage=stage,
        linear_stage=stage,
        discarded_ik_failures=tuple(failures),
    )


def generate_synthetic_library(
    object_pose: Pose,
    object_radius: float,
    count: int = 150,
    seed: int = 0,
    object_id: str = "object",
) -> GraspLibrary:
    """Seeded candidate poses on a sphere around the object.

    Each pose sits object_radius from the object center with its tool z axis
    aimed at the center, rolled by a random angle about that axis. The same
    seed always produces the same library.
    """
    if count < 1:
        raise InvalidInputError(f"count must be >= 1, got {count!r}")
    if not object_radius > 0.0:
        raise InvalidInputError(f"object_radius must be > 0, got {object_radius!r}")
    if not isinstance(object_pose, Pose):
        raise InvalidInputError("object_pose must be a Pose")
    rng = np.random.RandomState(seed)
    center = object_pose.position
    candidates = []
    for i in range(count):
        direction = rng.normal(size=3)
        norm = np.linalg.norm(direction)
        while norm < 1e-9:
            direction = rng.normal(size=3)
            norm = np.linalg.norm(direction)
        direction = direction / norm
        position = center + object_radius * direction
        z_axis = -direction  # approach axis points back at the center
        helper = np.array([0.0, 0.0, 1.0])
        if abs(float(np.dot(z_axis, helper))) > 0.9:
            helper = np.array([1.0, 0.0, 0.0])
        x_axis = np.cross(helper, z_axis)
        x_axis = x_axis / np.linalg.norm(x_axis)
        y_axis = np.cross(z_axis, x_axis)
        R = np.column_stack([x_axis, y_axis, z_axis])
        roll = rng.uniform(0.0, 2.0 * np.pi)
        cr, sr = np.cos(roll), np.sin(roll)
        R = R @ np.array([[cr, -sr, 0.0], [sr, cr, 0.0], [0.0, 0.0, 1.0]])
        orientation = UnitQuaternion.from_rotation_matrix(R)
        candidates.append(GraspCandidate(id=i, object_id=object_id, pose=Pose(position, orientation)))
    return GraspLibrary(object_id=object_id, candidates=tuple(candidates))


def library_from_dict(data: dict) -> GraspLibrary:
    if not isinstance(data, dict):
        raise InvalidInputError(f"grasp library must be a JSON object, got {type(data).__name__}")
    try:
        object_id = str(data["object_id"])
        raw = data["candidates"]
    except KeyError as exc:
        raise InvalidInputError(f"grasp library is missing key {exc.args[0]!r}") from exc
    candidates = []
    for i, entry in enumerate(raw):
        try:
            candidates.append(
                GraspCandidate(
                    id=int(entry["id"]),
                    object_id=object_id,
                    pose=Pose.from_dict({"p": entry["p"], "q": entry["q"]}),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"candidate {i} is malformed: {exc}") from exc
    return GraspLibrary(object_id=object_id, candidates=tuple(candidates))


def load_library(path) -> GraspLibrary:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"grasp library file {path} is not valid JSON: {exc}") from exc
    return library_from_dict(data)


def save_library(library: GraspLibrary, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(library.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
