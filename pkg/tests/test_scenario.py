import json
import math

import numpy as np
import pytest

import teleograsp.grasp_selection as gs
from teleograsp import (
    GraspCandidate,
    GraspLibrary,
    HandSample,
    InvalidInputError,
    Pose,
    SharedControlConfig,
    TraceParseError,
    UnitQuaternion,
    forward_kinematics,
    generate_synthetic_library,
    initial_state,
    penalized_manipulability,
    rotation_angle_between,
    save_library,
    spatial_6r,
    step,
    switch_to_manual,
)
from teleograsp.geometry import rot_x, vec3
from teleograsp.scenario import (
    PreparationSpec,
    ScenarioConfig,
    Strategy,
    load_trace,
    replay_report_to_json,
    replay_trace,
    run_experiment,
    scenario_config_from_dict,
)

from helpers import FIXTURES, comfortable_theta


@pytest.fixture
def demo_config():
    return ScenarioConfig(
        model_ref="builtin:spatial_6r",
        library_paths=(str(FIXTURES / "library_demo.json"),),
        preparation=PreparationSpec(count=1),
        speed=0.5,
        seed=0,
    )


def write_trace(path, records):
    path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in records), encoding="utf-8")


def manual_record(step_index, t, p, q=None, event=None):
    quat = q or UnitQuaternion.identity()
    return {
        "step": step_index,
        "t": t,
        "hand": {"p": list(p), "q": [quat.w, quat.x, quat.y, quat.z]},
        "event": event,
    }


class TestConfigParsing:
    def test_full_document(self, tmp_path):
        lib_path = tmp_path / "lib.json"
        lib = generate_synthetic_library(
            Pose(vec3(0.4, 0.0, 0.3), UnitQuaternion.identity()), 0.08, count=3, seed=0
        )
        save_library(lib, lib_path)
        cfg = scenario_config_from_dict(
            {
                "model": "builtin:spatial_6r",
                "libraries": [str(lib_path)],
                "preparation_poses": {"count": 4},
                "strategies": ["preference_aware"],
                "selection": {"k_angular": 10, "k_linear": 3},
                "shared_control": {"alpha": 0.5},
                "speed": 0.25,
                "seed": 17,
            }
        )
        assert cfg.model_ref == "builtin:spatial_6r"
        assert cfg.preparation.count == 4
        assert cfg.strategies == (Strategy.PREFERENCE_AWARE,)
        assert cfg.selection.k_angular == 10
        assert cfg.shared_control.alpha == 0.5
        assert cfg.speed == 0.25
        assert cfg.seed == 17

    def test_explicit_pose_list(self):
        cfg = scenario_config_from_dict(
            {
                "model": "builtin:spatial_6r",
                "libraries": ["x.json"],
                "preparation_poses": [{"p": [0.4, 0.0, 0.3], "q": [1, 0, 0, 0]}],
            }
        )
        assert len(cfg.preparation.poses) == 1
        assert cfg.strategies == (Strategy.PREFERENCE_AWARE, Strategy.MANIPULABILITY_ONLY)

    def test_missing_key_rejected(self):
        with pytest.raises(InvalidInputError):
            scenario_config_from_dict({"model": "builtin:spatial_6r"})

    def test_unknown_strategy_rejected(self):
        with pytest.raises(InvalidInputError):
            scenario_config_from_dict(
                {
                    "model": "builtin:spatial_6r",
                    "libraries": ["x.json"],
                    "preparation_poses": {"count": 1},
                    "strategies": ["psychic"],
                }
            )

    def test_preparation_spec_needs_exactly_one_source(self):
        with pytest.raises(InvalidInputError):
            PreparationSpec(poses=(), count=3)
        with pytest.raises(InvalidInputError):
            PreparationSpec()

    def test_duplicate_strategies_rejected(self):
        with pytest.raises(InvalidInputError):
            ScenarioConfig(
                model_ref="builtin:spatial_6r",
                library_paths=("x.json",),
                preparation=PreparationSpec(count=1),
                strategies=(Strategy.PREFERENCE_AWARE, Strategy.PREFERENCE_AWARE),
            )


class TestTraceParsing:
    def test_malformed_json_names_line(self, tmp_path):
        path = tmp_path / "trace.jsonl"
        good = json.dumps(manual_record(0, 0.0, [0, 0, 0]))
        path.write_text(good + "\n{not json\n", encoding="utf-8")
        with pytest.raises(TraceParseError) as err:
            load_trace(path)
        assert err.value.line_number == 2

    def test_missing_key_names_line(self, tmp_path):
        path = tmp_path / "trace.jsonl"
        bad = {"step": 0, "t": 0.0, "hand": {"p": [0, 0, 0], "q": [1, 0, 0, 0]}}
        path.write_text(json.dumps(bad) + "\n", encoding="utf-8")
        with pytest.raises(TraceParseError) as err:
            load_trace(path)
        assert err.value.line_number == 1

    def test_non_monotonic_step_rejected(self, tmp_path):
        path = tmp_path / "trace.jsonl"
        write_trace(path, [manual_record(0, 0.0, [0, 0, 0]), manual_record(0, 0.02, [0, 0, 0])])
        with pytest.raises(TraceParseError) as err:
            load_trace(path)
        assert err.value.line_number == 2

    def test_unknown_event_rejected(self, tmp_path):
        path = tmp_path / "trace.jsonl"
        write_trace(path, [manual_record(0, 0.0, [0, 0, 0], event="dance")])
        with pytest.raises(TraceParseError):
            load_trace(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "trace.jsonl"
        path.write_text("", encoding="utf-8")
        with pytest.raises(TraceParseError) as err:
            load_trace(path)
        assert err.value.line_number == 0

    def test_valid_trace_loads(self):
        records = load_trace(FIXTURES / "trace_demo.jsonl")
        assert len(records) == 120
        assert records[0].step == 0
        assert records[40].event == "to_automatic"


class TestReplay:
    def test_pure_manual_following_matches_direct_recomputation(self, tmp_path, demo_config):
        path = tmp_path / "trace.jsonl"
        q = rot_x(3.0)
        records = [
            manual_record(k, round(0.02 * k, 6), [0.01 * k, 0.0, 0.002 * k], q) for k in range(8)
        ]
        write_trace(path, records)
        result = replay_trace(path, demo_config)
        assert len(result.pose_log) == 8
        assert result.report["grips"] == []

        model = spatial_6r()
        home = (model._limits_min + model._limits_max) / 2
        state = initial_state(forward_kinematics(model, home))
        config = demo_config.shared_control
        state = switch_to_manual(
            state, HandSample(vec3(0.0, 0.0, 0.0), q, 0)
        )
        expected = []
        for k in range(8):
            sample = HandSample(vec3(0.01 * k, 0.0, 0.002 * k), q, k)
            if k == 0:
                pose = Pose(
                    state.anchors.effector_anchor + (sample.position - state.anchors.hand_anchor),
                    state.last_commanded.orientation,
                )
            state, pose = step(state, sample, config) if k > 0 else (state, state.last_commanded)
            expected.append(pose)

        first = json.loads(result.pose_log[0])
        assert first["mode"] == "manual"
        for k in (3, 7):
            entry = json.loads(result.pose_log[k])
            assert np.allclose(entry["p"], expected[k].position, atol=1e-12)

    def test_continuity_at_manual_switch(self, tmp_path, demo_config):
        path = tmp_path / "trace.jsonl"
        records = [
            manual_record(0, 0.0, [0.0, 0.0, 0.0]),
            manual_record(1, 0.02, [0.01, 0.0, 0.0], event="to_automatic"),
            manual_record(2, 0.04, [0.30, 0.20, 0.10]),
            manual_record(3, 0.06, [0.30, 0.20, 0.10], event="to_manual"),
            manual_record(4, 0.08, [0.30, 0.20, 0.10]),
        ]
        write_trace(path, records)
        result = replay_trace(path, demo_config)
        before = json.loads(result.pose_log[2])
        at_switch = json.loads(result.pose_log[3])
        assert np.linalg.norm(np.asarray(before["p"]) - np.asarray(at_switch["p"])) < 1e-12

    def test_grip_in_manual_is_ignored(self, tmp_path, demo_config):
        path = tmp_path / "trace.jsonl"
        records = [
            manual_record(0, 0.0, [0.0, 0.0, 0.0]),
            manual_record(1, 0.02, [0.0, 0.0, 0.0], event="grip"),
            manual_record(2, 0.04, [0.0, 0.0, 0.0]),
        ]
        write_trace(path, records)
        result = replay_trace(path, demo_config)
        assert [g["status"] for g in result.report["grips"]] == ["ignored_in_manual"]
        assert not result.has_failures

    def test_grip_in_automatic_tracks_selected_candidate(self, tmp_path, demo_config):
        path = tmp_path / "trace.jsonl"
        records = [manual_record(0, 0.0, [0.0, 0.0, 0.0], rot_x(3.0))]
        records.append(manual_record(1, 0.02, [0.0, 0.0, 0.0], rot_x(3.0), event="to_automatic"))
        records.append(manual_record(2, 0.04, [0.0, 0.0, 0.0], rot_x(3.0), event="grip"))
        for k in range(3, 90):
            records.append(manual_record(k, round(0.02 * k, 6), [0.0, 0.0, 0.0], rot_x(3.0)))
        write_trace(path, records)
        result = replay_trace(path, demo_config)
        grips = result.report["grips"]
        assert [g["status"] for g in grips] == ["ok"]
        chosen = grips[0]["selection"]["chosen"]
        lib = json.loads((FIXTURES / "library_demo.json").read_text())
        cand = next(c for c in lib["candidates"] if c["id"] == chosen["id"])
        final = json.loads(result.pose_log[-1])
        assert np.allclose(final["p"], cand["p"], atol=1e-9)

    def test_switch_to_manual_aborts_pending_approach(self, tmp_path, demo_config):
        path = tmp_path / "trace.jsonl"
        records = [
            manual_record(0, 0.0, [0.0, 0.0, 0.0], rot_x(3.0)),
            manual_record(1, 0.02, [0.0, 0.0, 0.0], rot_x(3.0), event="to_automatic"),
            manual_record(2, 0.04, [0.0, 0.0, 0.0], rot_x(3.0), event="grip"),
            manual_record(3, 0.06, [0.0, 0.0, 0.0], rot_x(3.0)),
            manual_record(4, 0.08, [0.0, 0.0, 0.0], rot_x(3.0), event="to_manual"),
            manual_record(5, 0.10, [0.0, 0.0, 0.0], rot_x(3.0)),
        ]
        write_trace(path, records)
        result = replay_trace(path, demo_config)
        at_switch = json.loads(result.pose_log[4])
        after = json.loads(result.pose_log[5])
        assert at_switch["mode"] == "manual"
        assert np.allclose(after["p"], at_switch["p"], atol=1e-12)

    def test_golden_replay_is_reproducible_and_matches_disk(self, demo_config):
        first = replay_trace(FIXTURES / "trace_demo.jsonl", demo_config)
        second = replay_trace(FIXTURES / "trace_demo.jsonl", demo_config)
        assert first.log_text() == second.log_text()
        assert replay_report_to_json(first) == replay_report_to_json(second)

        golden_log = (FIXTURES / "golden_replay_log.jsonl").read_text(encoding="utf-8")
        assert first.log_text() == golden_log

        golden_report = json.loads((FIXTURES / "golden_replay_report.json").read_text())
        report = first.report
        assert [g["status"] for g in report["grips"]] == [
            g["status"] for g in golden_report["grips"]
        ]
        assert (
            report["grips"][0]["selection"]["chosen"]["id"]
            == golden_report["grips"][0]["selection"]["chosen"]["id"]
        )
        got_theta = report["grips"][0]["selection"]["chosen_joint_solution"]
        want_theta = golden_report["grips"][0]["selection"]["chosen_joint_solution"]
        assert np.allclose(got_theta, want_theta, atol=1e-9)


class TestExperiment:
    def small_config(self, tmp_path, rng, strategies=None, prep_count=2):
        model = spatial_6r()
        paths = []
        for i, center in enumerate([(0.42, 0.10, 0.36), (0.40, -0.12, 0.30)]):
            lib = generate_synthetic_library(
                Pose(vec3(*center), UnitQuaternion.identity()),
                0.08,
                count=40,
                seed=50 + i,
                object_id=f"object_{i}",
            )
            p = tmp_path / f"lib_{i}.json"
            save_library(lib, p)
            paths.append(str(p))
        return ScenarioConfig(
            model_ref="builtin:spatial_6r",
            library_paths=tuple(paths),
            preparation=PreparationSpec(count=prep_count),
            strategies=strategies or (Strategy.PREFERENCE_AWARE, Strategy.MANIPULABILITY_ONLY),
            speed=0.1,
            seed=5,
        )

    def test_every_combination_appears_once(self, tmp_path, rng):
        config = self.small_config(tmp_path, rng)
        report = run_experiment(config)
        keys = [(c.prep_index, c.object_id, c.strategy.value) for c in report.cases]
        assert len(keys) == len(set(keys)) == 2 * 2 * 2
        assert keys == sorted(keys)

    def test_single_cell_report(self, tmp_path, rng):
        config = self.small_config(tmp_path, rng, strategies=(Strategy.PREFERENCE_AWARE,), prep_count=1)
        report = run_experiment(config)
        assert len(report.cases) == 2  # one prep, one strategy, two objects

    def test_deterministic_json(self, tmp_path, rng):
        config = self.small_config(tmp_path, rng)
        a = run_experiment(config).to_json()
        b = run_experiment(config).to_json()
        assert a == b

    def test_aggregate_means_match_cases(self, tmp_path, rng):
        config = self.small_config(tmp_path, rng)
        report = run_experiment(config)
        for strategy in config.strategies:
            ok = [
                c.metrics.path_length
                for c in report.cases
                if c.strategy is strategy and c.status == "ok"
            ]
            agg = report.aggregate["by_strategy"][strategy.value]
            assert abs(agg["mean_path_length"] - sum(ok) / len(ok)) < 1e-12

    def test_preparation_on_candidate_gives_zero_path(self, tmp_path, rng, monkeypatch):
        model = spatial_6r()
        theta = comfortable_theta(model, rng)
        prep = forward_kinematics(model, theta)
        lib = generate_synthetic_library(
            Pose(prep.position + np.array([0.0, 0.0, 0.08]), UnitQuaternion.identity()),
            0.08,
            count=30,
            seed=2,
            object_id="obj",
        )
        cands = lib.candidates + (GraspCandidate(id=999, object_id="obj", pose=prep),)
        lib = GraspLibrary(object_id="obj", candidates=cands)
        p = tmp_path / "lib.json"
        save_library(lib, p)
        fixed = penalized_manipulability(model, theta)
        monkeypatch.setattr(gs, "penalized_manipulability", lambda m, t: fixed)
        config = ScenarioConfig(
            model_ref="builtin:spatial_6r",
            library_paths=(str(p),),
            preparation=PreparationSpec(poses=(prep,)),
            strategies=(Strategy.PREFERENCE_AWARE,),
            speed=0.1,
        )
        report = run_experiment(config)
        case = report.cases[0]
        assert case.status == "ok"
        assert case.selection.chosen.id == 999
        assert case.metrics.path_length < 1e-9

    def test_infeasible_object_recorded_not_fatal(self, tmp_path, rng):
        far = generate_synthetic_library(
            Pose(vec3(5.0, 5.0, 5.0), UnitQuaternion.identity()), 0.05, count=5, seed=1, object_id="far"
        )
        p = tmp_path / "far.json"
        save_library(far, p)
        config = ScenarioConfig(
            model_ref="builtin:spatial_6r",
            library_paths=(str(p),),
            preparation=PreparationSpec(count=1),
            strategies=(Strategy.PREFERENCE_AWARE,),
            seed=3,
        )
        report = run_experiment(config)
        assert [c.status for c in report.cases] == ["no_feasible_grasp"]
        assert report.has_failures

    def test_csv_export_shape(self, tmp_path, rng):
        config = self.small_config(tmp_path, rng, strategies=(Strategy.PREFERENCE_AWARE,), prep_count=1)
        report = run_experiment(config)
        csv_text = report.to_csv()
        lines = csv_text.strip().split("\n")
        assert lines[0].startswith("prep_index,object_id,strategy,status")
        assert len(lines) == len(report.cases) + 1
