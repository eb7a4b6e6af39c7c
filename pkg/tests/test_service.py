import json
import math

import numpy as np
import pytest

from teleograsp import (
    Pose,
    SelectionConfig,
    Session,
    SharedControlConfig,
    UnitQuaternion,
    forward_kinematics,
    generate_synthetic_library,
    rotation_angle_between,
    session_tick,
    spatial_6r,
)
from teleograsp.geometry import rot_x, vec3
from teleograsp.service import build_app, parse_client_message


def demo_library(model, offset=(0.02, 0.03, 0.06), count=150, seed=11, object_id="demo"):
    home = (model._limits_min + model._limits_max) / 2
    center = forward_kinematics(model, home).position + np.asarray(offset)
    return generate_synthetic_library(
        Pose(center, UnitQuaternion.identity()), 0.08, count=count, seed=seed, object_id=object_id
    )


@pytest.fixture
def session(spatial):
    return Session(spatial, [demo_library(spatial)], speed=0.5)


def envelope(kind, seq, payload=None):
    return {"type": kind, "seq": seq, "payload": payload or {}}


def hand_message(seq, p, q=None):
    quat = q or UnitQuaternion.identity()
    return envelope("hand_pose", seq, {"p": list(p), "q": [quat.w, quat.x, quat.y, quat.z]})


def run_schedule(session, schedule, total_ticks):
    """Run a fixed message schedule; returns every snapshot envelope."""
    snapshots = []
    for t in range(total_ticks):
        snapshot, _ = session.tick(schedule.get(t, ()))
        snapshots.append(snapshot)
    return snapshots


class TestParsing:
    def test_valid_message(self):
        kind, seq, payload = parse_client_message(hand_message(3, [0, 0, 0]))
        assert kind == "hand_pose"
        assert seq == 3
        assert set(payload) == {"p", "q"}

    @pytest.mark.parametrize(
        "raw",
        [
            "not a dict",
            {},
            {"type": "hand_pose", "seq": 0},
            {"type": "warp", "seq": 0, "payload": {}},
            {"type": "hand_pose", "seq": "x", "payload": {"p": [0, 0, 0], "q": [1, 0, 0, 0]}},
            {"type": "hand_pose", "seq": 0, "payload": {"p": [0, 0, 0]}},
            {"type": "hand_pose", "seq": 0, "payload": {"p": [0, 0, 0], "q": [1, 0, 0, 0], "extra": 1}},
            {"type": "toggle_mode", "seq": 0, "payload": {"force": True}},
        ],
    )
    def test_malformed_rejected(self, raw):
        from teleograsp.errors import TeleograspError

        with pytest.raises(TeleograspError):
            parse_client_message(raw)


class TestSessionLoop:
    def test_ticks_increase_by_one(self, session):
        snaps = run_schedule(session, {}, 10)
        ticks = [s["payload"]["tick"] for s in snaps]
        assert ticks == list(range(10))
        seqs = [s["seq"] for s in snaps]
        assert seqs == ticks

    def test_deterministic_snapshot_stream(self, spatial):
        def schedule():
            return {
                0: ((1, hand_message(0, [0.0, 0.0, 0.0], rot_x(3.0))),),
                1: ((1, envelope("toggle_mode", 1)),),
                3: ((1, hand_message(2, [0.02, 0.01, 0.0], rot_x(3.0))),),
                8: ((1, envelope("toggle_mode", 3)),),
                9: ((1, envelope("grip", 4)),),
            }

        a = run_schedule(Session(spatial, [demo_library(spatial)], speed=0.5), schedule(), 40)
        b = run_schedule(Session(spatial, [demo_library(spatial)], speed=0.5), schedule(), 40)
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_stationary_manual_snapshots_static(self, session):
        # alpha = 1 finishes orientation blending on the first manual step, so
        # everything after that is genuinely stationary.
        session.tick(((1, envelope("set_config", 0, {"alpha": 1.0})),))
        session.tick(((1, envelope("toggle_mode", 1)),))
        snaps = run_schedule(session, {}, 8)
        stable_fields = (
            "mode",
            "commanded_pose",
            "joint_configuration",
            "selected_grasp",
            "pipeline_preview",
            "blending_active",
        )
        last = snaps[-1]["payload"]
        for snap in snaps[2:]:
            for field in stable_fields:
                assert snap["payload"][field] == last[field]
            assert snap["payload"]["metrics_so_far"]["path_length"] == pytest.approx(
                last["metrics_so_far"]["path_length"], abs=0.0
            )

    def test_toggle_to_manual_keeps_position(self, session):
        before, _ = session.tick()
        after, _ = session.tick(((1, envelope("toggle_mode", 0)),))
        assert after["payload"]["mode"] == "manual"
        assert np.allclose(
            after["payload"]["commanded_pose"]["p"],
            before["payload"]["commanded_pose"]["p"],
            atol=1e-12,
        )

    def test_toggle_back_to_automatic(self, session):
        session.tick(((1, envelope("toggle_mode", 0)),))
        snap, _ = session.tick(((1, envelope("toggle_mode", 1)),))
        assert snap["payload"]["mode"] == "automatic"
        assert snap["payload"]["blending_active"] is False

    def test_manual_hand_tracking(self, session):
        session.tick(((1, hand_message(0, [0.0, 0.0, 0.0])),))
        base, _ = session.tick(((1, envelope("toggle_mode", 1)),))
        moved, _ = session.tick(((1, hand_message(2, [0.03, -0.01, 0.02])),))
        got = np.asarray(moved["payload"]["commanded_pose"]["p"])
        want = np.asarray(base["payload"]["commanded_pose"]["p"]) + [0.03, -0.01, 0.02]
        assert np.allclose(got, want, atol=1e-12)

    def test_grip_approach_reaches_candidate(self, session):
        snap, _ = session.tick(((1, envelope("grip", 0)),))
        selected = snap["payload"]["selected_grasp"]
        assert selected is not None
        target_p = np.asarray(selected["pose"]["p"])
        target_q = UnitQuaternion.from_array(selected["pose"]["q"])
        last = snap
        for _ in range(400):
            last, _ = session.tick()
            if not session._pending:
                break
        final = last["payload"]["commanded_pose"]
        assert np.linalg.norm(np.asarray(final["p"]) - target_p) < 1e-9
        assert rotation_angle_between(UnitQuaternion.from_array(final["q"]), target_q) < 1e-9

    def test_grip_in_manual_ignored(self, session):
        session.tick(((1, envelope("toggle_mode", 0)),))
        snap, replies = session.tick(((1, envelope("grip", 1)),))
        assert replies == []
        assert snap["payload"]["selected_grasp"] is None
        assert snap["payload"]["mode"] == "manual"

    def test_malformed_message_never_alters_state(self, spatial):
        twin_a = Session(spatial, [demo_library(spatial)], speed=0.5)
        twin_b = Session(spatial, [demo_library(spatial)], speed=0.5)
        bad = {"type": "hand_pose", "seq": 9, "payload": {"p": [0, 0, 0], "q": [9, 9, 9, 9]}}
        snap_a, replies = twin_a.tick(((7, bad),))
        snap_b, _ = twin_b.tick()
        assert len(replies) == 1
        client_id, error = replies[0]
        assert client_id == 7
        assert error["type"] == "error"
        assert error["payload"]["in_reply_to"] == 9
        assert json.dumps(snap_a, sort_keys=True) == json.dumps(snap_b, sort_keys=True)

    def test_invalid_select_object_refused(self, session):
        snap, replies = session.tick(((1, envelope("select_object", 0, {"object_id": "ghost"})),))
        assert len(replies) == 1
        assert "ghost" in replies[0][1]["payload"]["message"]

    def test_select_object_switches_library(self, spatial):
        session = Session(
            spatial,
            [demo_library(spatial), demo_library(spatial, offset=(0.0, -0.05, 0.08), seed=4, object_id="second")],
            speed=0.5,
        )
        session.tick(((1, envelope("select_object", 0, {"object_id": "second"})),))
        snap, _ = session.tick(((1, envelope("grip", 1)),))
        assert snap["payload"]["selected_grasp"]["object_id"] == "second"

    def test_set_config_updates_selection(self, session):
        session.tick(((1, envelope("set_config", 0, {"k_angular": 12, "k_linear": 2})),))
        assert session.selection_config == SelectionConfig(k_angular=12, k_linear=2)

    def test_set_config_alpha_changes_blend_rate(self, spatial):
        fast = Session(spatial, [demo_library(spatial)], speed=0.5)
        slow = Session(spatial, [demo_library(spatial)], speed=0.5)
        twist = rot_x(3.0)
        for session, alpha in ((fast, 0.9), (slow, 0.1)):
            session.tick(((1, envelope("set_config", 0, {"alpha": alpha})),))
            session.tick(((1, hand_message(1, [0, 0, 0], twist)),))
            session.tick(((1, envelope("toggle_mode", 2)),))
        snap_fast, _ = fast.tick()
        snap_slow, _ = slow.tick()
        target = twist
        residual_fast = rotation_angle_between(
            UnitQuaternion.from_array(snap_fast["payload"]["commanded_pose"]["q"]), target
        )
        residual_slow = rotation_angle_between(
            UnitQuaternion.from_array(snap_slow["payload"]["commanded_pose"]["q"]), target
        )
        assert residual_fast < residual_slow

    def test_preview_appears_after_manual_motion(self, session):
        session.tick(((1, envelope("toggle_mode", 0)),))
        for i in range(1, 12):
            session.tick(((1, hand_message(i, [0.003 * i, 0.0, 0.0], rot_x(3.0))),))
        snap, _ = session.tick()
        preview = snap["payload"]["pipeline_preview"]
        assert preview is not None
        assert preview["object_id"] == "demo"
        assert len(preview["linear_ids"]) <= 6

    def test_session_tick_alias(self, session):
        snapshot, replies = session_tick(session, ())
        assert snapshot["type"] == "snapshot"
        assert replies == []

    def test_describe_contents(self, session, spatial):
        info = session.describe()
        assert info["speed"] == 0.5
        assert info["sample_rate"] == 50.0
        assert len(info["model"]["joints"]) == spatial.joint_count
        assert info["libraries"][0]["object_id"] == "demo"
        assert info["selection"] == {"k_angular": 30, "k_linear": 6}


class TestWebSocket:
    @pytest.fixture
    def client(self, spatial):
        from fastapi.testclient import TestClient

        session = Session(spatial, [demo_library(spatial)], speed=0.5)
        app = build_app(session)
        with TestClient(app) as client:
            yield client

    def receive_until(self, socket, kind, limit=100):
        for _ in range(limit):
            message = socket.receive_json()
            if message["type"] == kind:
                return message
        raise AssertionError(f"no {kind} message within {limit} frames")

    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert body["tick"] >= 0

    def test_first_client_is_operator_and_gets_snapshots(self, client):
        with client.websocket_connect("/session") as socket:
            role = socket.receive_json()
            assert role["type"] == "role"
            assert role["payload"]["role"] == "operator"
            snap = self.receive_until(socket, "snapshot")
            payload = snap["payload"]
            assert {"tick", "mode", "commanded_pose", "joint_configuration"} <= set(payload)

    def test_second_client_is_observer_and_cannot_drive(self, client):
        with client.websocket_connect("/session") as first:
            first.receive_json()
            with client.websocket_connect("/session") as second:
                role = second.receive_json()
                assert role["payload"]["role"] == "observer"
                second.send_json(envelope("toggle_mode", 0))
                reply = self.receive_until(second, "error")
                assert "observer" in reply["payload"]["message"]

    def test_model_description_available_to_observers(self, client):
        with client.websocket_connect("/session") as first:
            first.receive_json()
            with client.websocket_connect("/session") as second:
                second.receive_json()
                second.send_json(envelope("model_description", 0))
                info = self.receive_until(second, "model_description")
                assert "model" in info["payload"]
                assert "libraries" in info["payload"]

    def test_operator_toggle_reflected_in_snapshots(self, client):
        with client.websocket_connect("/session") as socket:
            socket.receive_json()
            socket.send_json(envelope("toggle_mode", 0))
            for _ in range(100):
                message = socket.receive_json()
                if message["type"] == "snapshot" and message["payload"]["mode"] == "manual":
                    break
            else:
                raise AssertionError("mode never became manual")
