"""Live teleoperation session host.

Session is the deterministic core: one authoritative loop owner that applies
validated client messages in order, advances the shared-control simulation by
one fixed tick, and emits a snapshot. The FastAPI layer underneath is thin
plumbing: it assigns the single operator role, validates ingress, runs the
tick loop, and broadcasts snapshots; it never touches simulation state
directly.
"""

import asyncio
import math
from collections import deque

import numpy as np

from .errors import InvalidInputError, NoFeasibleGraspError, TeleograspError
from .geometry import (
    Pose,
    UnitQuaternion,
    as_vec3,
    linear_distance,
    rotation_angle_between,
)
from .grasp_selection import SelectionConfig, select_grasp
from .kinematics import (
    RobotModel,
    forward_kinematics,
    robot_model_to_dict,
    solve_ik,
)
from .shared_control import (
    HandSample,
    Mode,
    SharedControlConfig,
    initial_state,
    step,
    switch_to_automatic,
    switch_to_manual,
)
from .trajectory import plan_approach

DEFAULT_SPEED = 0.1

# Preview throttling: the selection pipeline (six IK solves) is the expensive
# path, so it reruns at most every PREVIEW_MIN_TICKS and only after the hand
# actually moved.
PREVIEW_MIN_TICKS = 5
PREVIEW_MIN_TRANSLATION = 1e-3  # m
PREVIEW_MIN_ROTATION = math.radians(0.5)

# Display-only joint tracking gets a small budget; unreachable manual targets
# simply leave the arm where it was.
TRACK_IK_MAX_ITERS = 25

_MESSAGE_SCHEMAS = {
    "hand_pose": {"p", "q"},
    "toggle_mode": set(),
    "grip": set(),
    "select_object": {"object_id"},
    "set_config": {"alpha", "k_angular", "k_linear"},
}


def parse_client_message(raw) -> tuple[str, int, dict]:
    """Validate one inbound envelope; returns (type, seq, payload).

    Anything off-schema raises InvalidInputError; the caller turns that into
    an error reply for the offending client without touching session state.
    """
    if not isinstance(raw, dict):
        raise InvalidInputError("message must be a JSON object")
    if set(raw) != {"type", "seq", "payload"}:
        raise InvalidInputError("message envelope must have exactly type, seq, payload")
    kind = raw["type"]
    seq = raw["seq"]
    payload = raw["payload"]
    if not isinstance(kind, str):
        raise InvalidInputError("message type must be a string")
    if not isinstance(seq, int) or seq < 0:
        raise InvalidInputError("message seq must be a non-negative integer")
    if not isinstance(payload, dict):
        raise InvalidInputError("message payload must be an object")
    if kind not in _MESSAGE_SCHEMAS:
        raise InvalidInputError(f"unknown message type {kind!r}")
    allowed = _MESSAGE_SCHEMAS[kind]
    extra = set(payload) - allowed
    if extra:
        raise InvalidInputError(f"unknown payload fields for {kind}: {sorted(extra)}")
    if kind == "hand_pose" and set(payload) != {"p", "q"}:
        raise InvalidInputError("hand_pose payload must have exactly p and q")
    if kind == "select_object" and set(payload) != {"object_id"}:
        raise InvalidInputError("select_object payload must have exactly object_id")
    return kind, seq, payload


class Session:
    """Deterministic simulation session: same messages at same ticks, same snapshots."""

    def __init__(
        self,
        model: RobotModel,
        libraries,
        selection: SelectionConfig | None = None,
        shared: SharedControlConfig | None = None,
        speed: float = DEFAULT_SPEED,
    ):
        libs = sorted(libraries, key=lambda lib: lib.object_id)
        if not libs:
            raise InvalidInputError("session needs at least one grasp library")
        ids = [lib.object_id for lib in libs]
        if len(set(ids)) != len(ids):
            raise InvalidInputError("session libraries must have unique object ids")
        self.model = model
        self.libraries = {lib.object_id: lib for lib in libs}
        self.selection_config = selection if selection is not None else SelectionConfig()
        self.shared_config = shared if shared is not None else SharedControlConfig()
        if not speed > 0.0:
            raise InvalidInputError(f"speed must be > 0, got {speed!r}")
        self.speed = speed
        self.dt = 1.0 / self.shared_config.sample_rate
        self.current_object = ids[0]

        self._theta = (model._limits_min + model._limits_max) / 2.0
        start_pose = forward_kinematics(model, self._theta)
        self._state = initial_state(start_pose)
        self._tick = 0
        self._hand_position = np.zeros(3)
        self._hand_orientation = UnitQuaternion.identity()
        self._pending: deque = deque()
        self._selected_grasp = None
        self._preview = None
        self._preview_tick = None
        self._preview_hand = (self._hand_position.copy(), self._hand_orientation)
        self._ignored_grips = 0
        # Motion accumulated since session start.
        self._path_length = 0.0
        self._orientation_travel = 0.0
        self._max_kink = 0.0
        self._last_position = np.array(start_pose.position)
        self._last_orientation = start_pose.orientation
        self._last_displacement = None

    @property
    def tick_count(self) -> int:
        return self._tick

    def describe(self) -> dict:
        """Static session description the console fetches once at connect."""
        return {
            "model": robot_model_to_dict(self.model),
            "libraries": [lib.to_dict() for lib in self.libraries.values()],
            "speed": self.speed,
            "sample_rate": self.shared_config.sample_rate,
            "selection": {
                "k_angular": self.selection_config.k_angular,
                "k_linear": self.selection_config.k_linear,
            },
            "alpha": self.shared_config.alpha,
        }

    def _hand_sample(self) -> HandSample:
        return HandSample(
            position=self._hand_position.copy(),
            orientation=self._hand_orientation,
            step_index=self._tick,
        )

    def _apply(self, kind: str, payload: dict) -> None:
        if kind == "hand_pose":
            position = as_vec3(payload["p"])
            orientation = UnitQuaternion.from_array(payload["q"])
            self._hand_position = position
            self._hand_orientation = orientation
        elif kind == "toggle_mode":
            if self._state.mode is Mode.AUTOMATIC:
                self._state = switch_to_manual(self._state, self._hand_sample())
                self._pending.clear()
            else:
                self._state = switch_to_automatic(self._state)
        elif kind == "grip":
            if self._state.mode is Mode.MANUAL:
                self._ignored_grips += 1
                return
            self._execute_grip()
        elif kind == "select_object":
            object_id = payload["object_id"]
            if object_id not in self.libraries:
                known = ", ".join(sorted(self.libraries))
                raise InvalidInputError(f"unknown object {object_id!r} (loaded: {known})")
            self.current_object = object_id
        elif kind == "set_config":
            if "alpha" in payload:
                self.shared_config = SharedControlConfig(
                    alpha=float(payload["alpha"]),
                    blend_epsilon=self.shared_config.blend_epsilon,
                    sample_rate=self.shared_config.sample_rate,
                )
            k_angular = payload.get("k_angular", self.selection_config.k_angular)
            k_linear = payload.get("k_linear", self.selection_config.k_linear)
            self.selection_config = SelectionConfig(k_angular=int(k_angular), k_linear=int(k_linear))

    def _execute_grip(self) -> None:
        library = self.libraries[self.current_object]
        report = select_grasp(
            library, self._state.last_commanded, self.model, self._theta, self.selection_config
        )
        trajectory = plan_approach(
            self._state.last_commanded, report.chosen.pose, self.speed, self.dt
        )
        self._pending.clear()
        self._pending.extend(pose for _, pose in trajectory.samples[1:])
        self._selected_grasp = {
            "object_id": library.object_id,
            "id": report.chosen.id,
            "pose": report.chosen.pose.to_dict(),
            "score": report.chosen_score.to_dict(),
        }

    def _maybe_refresh_preview(self) -> None:
        if self._state.mode is not Mode.MANUAL:
            return
        if self._preview_tick is not None and self._tick - self._preview_tick < PREVIEW_MIN_TICKS:
            return
        prev_pos, prev_orient = self._preview_hand
        moved = linear_distance(self._hand_position, prev_pos) > PREVIEW_MIN_TRANSLATION
        turned = rotation_angle_between(self._hand_orientation, prev_orient) > PREVIEW_MIN_ROTATION
        if self._preview_tick is not None and not (moved or turned):
            return
        self._preview_tick = self._tick
        self._preview_hand = (self._hand_position.copy(), self._hand_orientation)
        library = self.libraries[self.current_object]
        try:
            report = select_grasp(
                library, self._state.last_commanded, self.model, self._theta, self.selection_config
            )
        except NoFeasibleGraspError:
            self._preview = None
            return
        self._preview = {
            "object_id": library.object_id,
            "chosen_id": report.chosen.id,
            "penalized": report.chosen_score.penalized,
            "angular_ids": [i for i, _ in report.angular_stage],
            "linear_ids": [i for i, _ in report.linear_stage],
            "ik_failures": list(report.discarded_ik_failures),
        }

    def _track_joints(self, commanded: Pose) -> None:
        solution = solve_ik(
            self.model, commanded, self._theta, max_iters=TRACK_IK_MAX_ITERS
        )
        if solution is not None:
            self._theta = solution

    def _accumulate_metrics(self, commanded: Pose) -> None:
        delta = np.asarray(commanded.position) - self._last_position
        distance = float(np.linalg.norm(delta))
        self._path_length += distance
        self._orientation_travel += rotation_angle_between(
            self._last_orientation, commanded.orientation
        )
        if distance > 1e-12:
            if self._last_displacement is not None:
                u, v = self._last_displacement, delta
                kink = math.atan2(float(np.linalg.norm(np.cross(u, v))), float(np.dot(u, v)))
                self._max_kink = max(self._max_kink, kink)
            self._last_displacement = delta
        self._last_position = np.array(commanded.position)
        self._last_orientation = commanded.orientation

    def tick(self, messages=()) -> tuple[dict, list]:
        """Apply messages in arrival order, advance one step, emit a snapshot.

        messages is an iterable of (client_id, raw_envelope). Returns the
        snapshot envelope plus [(client_id, error_envelope)] replies for
        malformed or rejected messages; those never alter session state.
        """
        replies = []
        for client_id, raw in messages:
            seq = raw.get("seq") if isinstance(raw, dict) else None
            try:
                kind, seq, payload = parse_client_message(raw)
                self._apply(kind, payload)
            except TeleograspError as exc:
                replies.append((client_id, self._error_envelope(str(exc), seq)))
        automatic_pose = None
        if self._state.mode is Mode.AUTOMATIC and self._pending:
            automatic_pose = self._pending.popleft()
        self._state, commanded = step(
            self._state, self._hand_sample(), self.shared_config, automatic_pose
        )
        self._track_joints(commanded)
        self._accumulate_metrics(commanded)
        self._maybe_refresh_preview()
        snapshot = {
            "type": "snapshot",
            "seq": self._tick,
            "payload": {
                "tick": self._tick,
                "mode": self._state.mode.value,
                "commanded_pose": commanded.to_dict(),
                "joint_configuration": [float(v) for v in self._theta],
                "selected_grasp": self._selected_grasp,
                "pipeline_preview": self._preview,
                "metrics_so_far": {
                    "path_length": self._path_length,
                    "orientation_travel": self._orientation_travel,
                    "completion_time": self._tick * self.dt,
                    "max_step_heading_change": self._max_kink,
                },
                "blending_active": self._state.blending_active,
            },
        }
        self._tick += 1
        return snapshot, replies

    def _error_envelope(self, message: str, in_reply_to) -> dict:
        return {
            "type": "error",
            "seq": self._tick,
            "payload": {"message": message, "in_reply_to": in_reply_to},
        }


def session_tick(session: Session, pending_messages=()) -> tuple[dict, list]:
    """Functional alias for Session.tick, mirroring the module's operation set."""
    return session.tick(pending_messages)


def build_app(session: Session):
    """FastAPI app exposing /session (websocket) and /health around one Session."""
    import contextlib

    from fastapi import FastAPI, WebSocket, WebSocketDisconnect

    manager = _ConnectionManager(session)

    @contextlib.asynccontextmanager
    async def lifespan(app):
        manager.task = asyncio.create_task(manager.run())
        try:
            yield
        finally:
            manager.task.cancel()

    app = FastAPI(lifespan=lifespan)
    app.state.manager = manager

    @app.get("/health")
    async def health():
        return {"status": "ok", "tick": session.tick_count}

    @app.websocket("/session")
    async def session_socket(websocket: WebSocket):
        await manager.connect(websocket)
        try:
            while True:
                raw = await websocket.receive_json()
                await manager.ingress(websocket, raw)
        except WebSocketDisconnect:
            await manager.disconnect(websocket)

    return app


class _ConnectionManager:
    """Socket bookkeeping: operator role, message queue, snapshot broadcast."""

    def __init__(self, session: Session):
        self.session = session
        self.connections: list = []  # ordered by connect time
        self.operator = None
        self.inbox: deque = deque()
        self.task = None
        self.lock = asyncio.Lock()

    def _role_envelope(self, role: str) -> dict:
        return {
            "type": "role",
            "seq": self.session.tick_count,
            "payload": {"role": role},
        }

    async def connect(self, websocket) -> None:
        await websocket.accept()
        async with self.lock:
            self.connections.append(websocket)
            role = "observer"
            if self.operator is None:
                self.operator = websocket
                role = "operator"
        await websocket.send_json(self._role_envelope(role))

    async def disconnect(self, websocket) -> None:
        async with self.lock:
            if websocket in self.connections:
                self.connections.remove(websocket)
            if self.operator is websocket:
                # Oldest surviving connection inherits control.
                self.operator = self.connections[0] if self.connections else None
                if self.operator is not None:
                    try:
                        await self.operator.send_json(self._role_envelope("operator"))
                    except Exception:
                        pass

    async def ingress(self, websocket, raw) -> None:
        # model_description is read-only and answered immediately; control
        # messages go through the tick queue, operators only.
        if isinstance(raw, dict) and raw.get("type") == "model_description":
            await websocket.send_json(
                {
                    "type": "model_description",
                    "seq": self.session.tick_count,
                    "payload": self.session.describe(),
                }
            )
            return
        if websocket is not self.operator:
            await websocket.send_json(
                {
                    "type": "error",
                    "seq": self.session.tick_count,
                    "payload": {
                        "message": "observers cannot send control messages",
                        "in_reply_to": raw.get("seq") if isinstance(raw, dict) else None,
                    },
                }
            )
            return
        self.inbox.append((id(websocket), websocket, raw))

    async def run(self) -> None:
        dt = self.session.dt
        while True:
            batch = []
            by_id = {}
            while self.inbox:
                client_id, websocket, raw = self.inbox.popleft()
                batch.append((client_id, raw))
                by_id[client_id] = websocket
            snapshot, replies = self.session.tick(batch)
            for client_id, envelope in replies:
                websocket = by_id.get(client_id)
                if websocket is not None:
                    try:
                        await websocket.send_json(envelope)
                    except Exception:
                        pass
            async with self.lock:
                targets = list(self.connections)
            for websocket in targets:
                try:
                    await websocket.send_json(snapshot)
                except Exception:
                    pass
            await asyncio.sleep(dt)
