"""Regenerates the committed fixture files in this directory.

Run manually from the repository root after an intentional behavior change:

    python3 tests/fixtures/generate.py

Outputs: trace_demo.jsonl (input trace), library_demo.json (grasp library),
golden_replay_log.jsonl and golden_replay_report.json (expected replay
outputs; numeric comparisons in tests use tolerances, so these stay valid
across kernel lanes).
"""

import json
import math
import pathlib

import numpy as np

from teleograsp import (
    Pose,
    UnitQuaternion,
    forward_kinematics,
    generate_synthetic_library,
    save_library,
    spatial_6r,
)
from teleograsp.geometry import rot_x, rot_z
from teleograsp.scenario import (
    PreparationSpec,
    ScenarioConfig,
    replay_report_to_json,
    replay_trace,
)

HERE = pathlib.Path(__file__).parent

STEPS = 120
DT = 0.02
EVENTS = {40: "to_automatic", 45: "grip", 105: "to_manual"}


def hand_position(k: int):
    return [
        0.05 * math.sin(2 * math.pi * k / 80),
        0.04 * k / STEPS,
        0.04 * (1 - math.cos(2 * math.pi * k / STEPS)),
    ]


def hand_orientation(k: int) -> UnitQuaternion:
    return rot_x(3.0) * rot_z(0.2 * math.sin(2 * math.pi * k / 100))


def main():
    model = spatial_6r()
    home = (model._limits_min + model._limits_max) / 2
    start = forward_kinematics(model, home)

    records = []
    for k in range(STEPS):
        q = hand_orientation(k)
        records.append(
            {
                "step": k,
                "t": round(k * DT, 6),
                "hand": {"p": hand_position(k), "q": [q.w, q.x, q.y, q.z]},
                "event": EVENTS.get(k),
            }
        )
    trace_path = HERE / "trace_demo.jsonl"
    trace_path.write_text(
        "".join(json.dumps(r, sort_keys=True) + "\n" for r in records), encoding="utf-8"
    )

    # Effector position when automatic mode takes over (last manual sample is
    # step 39); the object sits a short approach away from it.
    p0 = np.asarray(hand_position(0))
    grip_zone = np.asarray(start.position) + (np.asarray(hand_position(39)) - p0)
    center = grip_zone + np.array([0.02, 0.03, 0.06])
    library = generate_synthetic_library(
        Pose(center, UnitQuaternion.identity()), 0.08, count=150, seed=11, object_id="demo"
    )
    library_path = HERE / "library_demo.json"
    save_library(library, library_path)

    config = ScenarioConfig(
        model_ref="builtin:spatial_6r",
        library_paths=(str(library_path),),
        preparation=PreparationSpec(count=1),
        speed=0.5,
        seed=0,
    )
    result = replay_trace(trace_path, config)
    grip_statuses = [g["status"] for g in result.report["grips"]]
    if grip_statuses != ["ok"]:
        raise SystemExit(f"fixture grip did not succeed: {grip_statuses}")
    (HERE / "golden_replay_log.jsonl").write_text(result.log_text(), encoding="utf-8")
    (HERE / "golden_replay_report.json").write_text(
        replay_report_to_json(result), encoding="utf-8"
    )
    print(f"wrote fixtures to {HERE}")
    print("grip:", result.report["grips"][0]["selection"]["chosen"]["id"])


if __name__ == "__main__":
    main()
