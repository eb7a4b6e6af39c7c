"""Experiment runner and trace replay.

run_experiment drives both selection strategies over a batch of preparation
poses and objects, producing a deterministic comparative report (JSON plus a
CSV summary). replay_trace feeds a recorded hand trace through the shared
control state machine and logs every commanded pose, which is the regression
harness for the control math.
"""

from __future__ import annotations

import enum
import json
import math
from collections import deque
from dataclasses import dataclass, field
from statistics import fmean

import numpy as np

from .errors import (
    InvalidInputError,
    NoFeasibleGraspError,
    TraceParseError,
)
from .geometry import Pose, UnitQuaternion, as_vec3
from .grasp_selection import (
    GraspLibrary,
    SelectionConfig,
    SelectionReport,
    load_library,
    select_grasp,
    select_grasp_baseline,
)
from .kinematics import RobotModel, forward_kinematics, solve_ik
from .models import resolve_model
from .shared_control import (
    HandSample,
    Mode,
    SharedControlConfig,
    initial_state,
    step,
    switch_to_automatic,
    switch_to_manual,
)
from .trajectory import MotionMetrics, compute_metrics, plan_approach

DEFAULT_SPEED = 0.1

_TRACE_KEYS = {"step", "t", "hand", "event"}
_TRACE_EVENTS = {None, "to_manual", "to_automatic", "grip"}


class Strategy(enum.Enum):
    PREFERENCE_AWARE = "preference_aware"
    MANIPULABILITY_ONLY = "manipulability_only"


@dataclass(frozen=True)
class PreparationSpec:
    """Either an explicit pose list or a count of seeded random poses."""

    poses: tuple | None = None
    count: int | None = None

    def __post_init__(self):
        if (self.poses is None) == (self.count is None):
            raise InvalidInputError("preparation spec needs exactly one of poses or count")
        if self.count is not None and self.count < 1:
            raise InvalidInputError(f"preparation count must be >= 1, got {self.count!r}")
        if self.poses is not None:
            poses = tuple(self.poses)
            if not poses or not all(isinstance(p, Pose) for p in poses):
                raise InvalidInputError("preparation poses must be a non-empty list of Pose")
            object.__setattr__(self, "poses", poses)


@dataclass(frozen=True)
class ScenarioConfig:
    model_ref: str
    library_paths: tuple
    preparation: PreparationSpec
    strategies: tuple = (Strategy.PREFERENCE_AWARE, Strategy.MANIPULABILITY_ONLY)
    speed: float = DEFAULT_SPEED
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    shared_control: SharedControlConfig = field(default_factory=SharedControlConfig)
    output_path: str | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.strategies:
            raise InvalidInputError("at least one strategy is required")
        strategies = tuple(self.strategies)
        if len(set(strategies)) != len(strategies):
            raise InvalidInputError("strategies must be unique")
        if not all(isinstance(s, Strategy) for s in strategies):
            raise InvalidInputError("strategies must be Strategy values")
        object.__setattr__(self, "strategies", strategies)
        object.__setattr__(self, "library_paths", tuple(self.library_paths))
        if not self.library_paths:
            raise InvalidInputError("at least one grasp library is required")
        if not self.speed > 0.0:
            raise InvalidInputError(f"speed must be > 0, got {self.speed!r}")


def scenario_config_from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise InvalidInputError(f"scenario config must be a JSON object, got {type(data).__name__}")
    try:
        model_ref = str(data["model"])
        library_paths = tuple(str(p) for p in data["libraries"])
        prep_raw = data["preparation_poses"]
    except KeyError as exc:
        raise InvalidInputError(f"scenario config is missing key {exc.args[0]!r}") from exc
    if isinstance(prep_raw, list):
        preparation = PreparationSpec(poses=tuple(Pose.from_dict(p) for p in prep_raw))
    elif isinstance(prep_raw, dict) and "count" in prep_raw:
        preparation = PreparationSpec(count=int(prep_raw["count"]))
    else:
        raise InvalidInputError(
            "preparation_poses must be a pose list or an object with a count"
        )
    try:
        strategies = tuple(Strategy(s) for s in data.get("strategies", [s.value for s in Strategy]))
    except ValueError as exc:
        raise InvalidInputError(f"unknown strategy: {exc}") from exc
    selection = SelectionConfig(**data["selection"]) if "selection" in data else SelectionConfig()
    shared = (
        SharedControlConfig(**data["shared_control"])
        if "shared_control" in data
        else SharedControlConfig()
    )
    return ScenarioConfig(
        model_ref=model_ref,
        library_paths=library_paths,
        preparation=preparation,
        strategies=strategies,
        speed=float(data.get("speed", DEFAULT_SPEED)),
        selection=selection,
        shared_control=shared,
        output_path=data.get("out"),
        seed=int(data.get("seed", 0)),
    )


def load_scenario_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"config file {path} is not valid JSON: {exc}") from exc
    return scenario_config_from_dict(data)


@dataclass(frozen=True)
class CaseResult:
    prep_index: int
    object_id: str
    strategy: Strategy
    status: str  # "ok" | "no_feasible_grasp" | "preparation_ik_failure"
    selection: SelectionReport | None
    metrics: MotionMetrics | None

    def to_dict(self) -> dict:
        return {
            "prep_index": self.prep_index,
            "object_id": self.object_id,
            "strategy": self.strategy.value,
            "status": self.status,
            "selection": self.selection.to_dict() if self.selection else None,
            "metrics": self.metrics.to_dict() if self.metrics else None,
        }


@dataclass(frozen=True)
class ExperimentReport:
    model_name: str
    speed: float
    seed: int
    strategies: tuple
    object_ids: tuple
    cases: tuple
    aggregate: dict

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "speed": self.speed,
            "seed": self.seed,
            "strategies": [s.value for s in self.strategies],
            "objects": list(self.object_ids),
            "cases": [c.to_dict() for c in self.cases],
            "aggregate": self.aggregate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        lines = [
            "prep_index,object_id,strategy,status,chosen_id,penalized,"
            "path_length,orientation_travel,completion_time,max_step_heading_change"
        ]
        for c in self.cases:
            chosen = c.selection.chosen.id if c.selection else ""
            penal = repr(c.selection.chosen_score.penalized) if c.selection else ""
            if c.metrics:
                m = c.metrics
                tail = (
                    f"{m.path_length!r},{m.orientation_travel!r},"
                    f"{m.completion_time!r},{m.max_step_heading_change!r}"
                )
            else:
                tail = ",,,"
            lines.append(
                f"{c.prep_index},{c.object_id},{c.strategy.value},{c.status},{chosen},{penal},{tail}"
            )
        return "\n".join(lines) + "\n"

    @property
    def has_failures(self) -> bool:
        return any(c.status != "ok" for c in self.cases)


def _midrange(model: RobotModel) -> np.ndarray:
    return (model._limits_min + model._limits_max) / 2.0


def _generate_preparations(model: RobotModel, count: int, seed: int):
    """Seeded random joint configurations in the comfortable middle band.

    Sampling in joint space guarantees every preparation pose is reachable and
    provides the matching joint vector without an IK solve.
    """
    rng = np.random.RandomState(seed)
    lo, hi = model._limits_min, model._limits_max
    preps = []
    for _ in range(count):
        u = rng.random_sample(model.joint_count)
        theta = lo + (hi - lo) * (0.25 + 0.5 * u)
        preps.append((theta, forward_kinematics(model, theta)))
    return preps


def _resolve_preparations(model: RobotModel, config: ScenarioConfig):
    if config.preparation.count is not None:
        return _generate_preparations(model, config.preparation.count, config.seed)
    home = _midrange(model)
    preps = []
    for pose in config.preparation.poses:
        theta = solve_ik(model, pose, home)
        preps.append((theta, pose))
    return preps


def _load_libraries(config: ScenarioConfig):
    libraries = [load_library(p) for p in config.library_paths]
    ids = [lib.object_id for lib in libraries]
    if len(set(ids)) != len(ids):
        raise InvalidInputError(f"duplicate object ids across libraries: {sorted(ids)}")
    return sorted(libraries, key=lambda lib: lib.object_id)


def _run_case(
    model: RobotModel,
    library: GraspLibrary,
    prep_index: int,
    prep_pose: Pose,
    theta_prep,
    strategy: Strategy,
    config: ScenarioConfig,
    dt: float,
) -> CaseResult:
    if theta_prep is None:
        return CaseResult(prep_index, library.object_id, strategy, "preparation_ik_failure", None, None)
    try:
        if strategy is Strategy.PREFERENCE_AWARE:
            report = select_grasp(library, prep_pose, model, theta_prep, config.selection)
        else:
            report = select_grasp_baseline(library, model, theta_prep)
    except NoFeasibleGraspError:
        return CaseResult(prep_index, library.object_id, strategy, "no_feasible_grasp", None, None)
    traj = plan_approach(prep_pose, report.chosen.pose, config.speed, dt)
    metrics = compute_metrics(traj)
    return CaseResult(prep_index, library.object_id, strategy, "ok", report, metrics)


def _aggregate(cases, strategies) -> dict:
    by_strategy = {}
    for strat in strategies:
        rows = [c for c in cases if c.strategy is strat]
        ok = [c for c in rows if c.status == "ok"]
        entry = {"cases": len(rows), "cases_ok": len(ok), "cases_failed": len(rows) - len(ok)}
        if ok:
            entry["mean_path_length"] = fmean(c.metrics.path_length for c in ok)
            entry["mean_orientation_travel"] = fmean(c.metrics.orientation_travel for c in ok)
            entry["mean_completion_time"] = fmean(c.metrics.completion_time for c in ok)
        by_strategy[strat.value] = entry
    aggregate = {"by_strategy": by_strategy, "pairwise": None}
    if Strategy.PREFERENCE_AWARE in strategies and Strategy.MANIPULABILITY_ONLY in strategies:
        indexed = {(c.prep_index, c.object_id, c.strategy): c for c in cases}
        pairs = 0
        wins = 0
        for (prep, obj, strat), case in indexed.items():
            if strat is not Strategy.PREFERENCE_AWARE or case.status != "ok":
                continue
            other = indexed.get((prep, obj, Strategy.MANIPULABILITY_ONLY))
            if other is None or other.status != "ok":
                continue
            pairs += 1
            if case.metrics.path_length <= other.metrics.path_length:
                wins += 1
        aggregate["pairwise"] = {
            "pairs": pairs,
            "path_length_win_rate": (wins / pairs) if pairs else None,
        }
    return aggregate


def run_experiment(config: ScenarioConfig) -> ExperimentReport:
    """Every (preparation pose, object, strategy) combination, exactly once.

    Per-case selection failures are recorded in the report rather than
    aborting the batch; file and validation problems still raise.
    """
    model = resolve_model(config.model_ref)
    libraries = _load_libraries(config)
    preparations = _resolve_preparations(model, config)
    dt = 1.0 / config.shared_control.sample_rate
    cases = []
    for prep_index, (theta_prep, prep_pose) in enumerate(preparations):
        for library in libraries:
            for strategy in config.strategies:
                cases.append(
                    _run_case(
                        model, library, prep_index, prep_pose, theta_prep, strategy, config, dt
                    )
                )
    cases.sort(key=lambda c: (c.prep_index, c.object_id, c.strategy.value))
    return ExperimentReport(
        model_name=model.name,
        speed=config.speed,
        seed=config.seed,
        strategies=config.strategies,
        object_ids=tuple(lib.object_id for lib in libraries),
        cases=tuple(cases),
        aggregate=_aggregate(cases, config.strategies),
    )


@dataclass(frozen=True)
class TraceRecord:
    step: int
    t: float
    hand: HandSample
    event: str | None


def _parse_trace_line(line_number: int, raw: str, prev_step: int) -> TraceRecord:
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise TraceParseError(line_number, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise TraceParseError(line_number, "record must be a JSON object")
    extra = set(data) - _TRACE_KEYS
    missing = _TRACE_KEYS - set(data)
    if extra:
        raise TraceParseError(line_number, f"unknown fields: {sorted(extra)}")
    if missing:
        raise TraceParseError(line_number, f"missing fields: {sorted(missing)}")
    step_value = data["step"]
    if not isinstance(step_value, int) or step_value < 0:
        raise TraceParseError(line_number, f"step must be a non-negative integer, got {step_value!r}")
    if step_value <= prev_step:
        raise TraceParseError(line_number, f"step {step_value} does not advance past {prev_step}")
    t_value = data["t"]
    if not isinstance(t_value, (int, float)) or not math.isfinite(t_value):
        raise TraceParseError(line_number, f"t must be a finite number, got {t_value!r}")
    if data["event"] not in _TRACE_EVENTS:
        raise TraceParseError(line_number, f"unknown event {data['event']!r}")
    hand_raw = data["hand"]
    if not isinstance(hand_raw, dict) or set(hand_raw) != {"p", "q"}:
        raise TraceParseError(line_number, "hand must be an object with keys p and q")
    try:
        hand = HandSample(
            position=as_vec3(hand_raw["p"]),
            orientation=UnitQuaternion.from_array(hand_raw["q"]),
            step_index=step_value,
        )
    except InvalidInputError as exc:
        raise TraceParseError(line_number, str(exc)) from exc
    return TraceRecord(step=step_value, t=float(t_value), hand=hand, event=data["event"])


def load_trace(path) -> tuple:
    """Parse a JSON-lines hand trace; every problem names its 1-based line."""
    records = []
    prev_step = -1
    with open(path, encoding="utf-8") as fh:
        for line_number, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            record = _parse_trace_line(line_number, raw, prev_step)
            prev_step = record.step
            records.append(record)
    if not records:
        raise TraceParseError(0, "trace contains no records")
    return tuple(records)


@dataclass(frozen=True)
class ReplayResult:
    pose_log: tuple  # JSON strings, one per trace record
    report: dict

    def log_text(self) -> str:
        return "\n".join(self.pose_log) + "\n"

    @property
    def has_failures(self) -> bool:
        return any(g["status"] not in ("ok", "ignored_in_manual") for g in self.report["grips"])


def replay_trace(trace_path, config: ScenarioConfig) -> ReplayResult:
    """Deterministically re-drive the control loop from a recorded trace.

    The session starts with the effector parked at the model's mid-range
    configuration and enters manual mode at the first sample (a leading
    "to_manual" event is therefore redundant but harmless). A "grip" event in
    automatic mode runs preference-aware selection against the first object
    (sorted by id) and queues the planned approach; in manual mode it is
    logged and ignored. Switching to manual aborts any queued approach.
    """
    records = load_trace(trace_path)
    model = resolve_model(config.model_ref)
    libraries = _load_libraries(config)
    library = libraries[0]
    dt = 1.0 / config.shared_control.sample_rate
    home = _midrange(model)
    theta_current = home
    state = initial_state(forward_kinematics(model, home))
    pending: deque = deque()
    grips = []
    log_lines = []
    for index, record in enumerate(records):
        if index == 0 and record.event != "to_manual":
            state = switch_to_manual(state, record.hand)
        if record.event == "to_manual":
            state = switch_to_manual(state, record.hand)
            pending.clear()
        elif record.event == "to_automatic":
            state = switch_to_automatic(state)
        elif record.event == "grip":
            if state.mode is Mode.AUTOMATIC:
                grips.append(
                    _execute_grip(
                        record.step, state.last_commanded, model, library,
                        theta_current, config, dt, pending,
                    )
                )
                if grips[-1]["status"] == "ok":
                    theta_current = np.asarray(grips[-1].pop("_theta"))
            else:
                grips.append({"step": record.step, "status": "ignored_in_manual"})
        automatic_pose = None
        if state.mode is Mode.AUTOMATIC and pending:
            automatic_pose = pending.popleft()
        state, commanded = step(state, record.hand, config.shared_control, automatic_pose)
        entry = {
            "step": record.step,
            "t": record.t,
            "mode": state.mode.value,
            "blending": state.blending_active,
            "event": record.event,
        }
        entry.update(commanded.to_dict())
        log_lines.append(json.dumps(entry, sort_keys=True))
    report = {
        "model": model.name,
        "object": library.object_id,
        "total_steps": len(records),
        "grips": grips,
        "final_commanded": state.last_commanded.to_dict(),
    }
    return ReplayResult(pose_log=tuple(log_lines), report=report)


def _execute_grip(
    step_index: int,
    current_pose: Pose,
    model: RobotModel,
    library: GraspLibrary,
    theta_current,
    config: ScenarioConfig,
    dt: float,
    pending: deque,
) -> dict:
    try:
        selection = select_grasp(library, current_pose, model, theta_current, config.selection)
    except NoFeasibleGraspError:
        return {"step": step_index, "status": "no_feasible_grasp"}
    traj = plan_approach(current_pose, selection.chosen.pose, config.speed, dt)
    pending.clear()
    # The first sample restates the current pose; queue only the motion.
    pending.extend(pose for _, pose in traj.samples[1:])
    metrics = compute_metrics(traj)
    return {
        "step": step_index,
        "status": "ok",
        "selection": selection.to_dict(),
        "metrics": metrics.to_dict(),
        "_theta": [float(v) for v in selection.chosen_joint_solution],
    }


def replay_report_to_json(result: ReplayResult) -> str:
    return json.dumps(result.report, indent=2, sort_keys=True) + "\n"
