"""Command-line entry points.

Exit codes: 0 success, 1 validation or file error, 2 the run completed but
some cases failed (the report is still written).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import TeleograspError
from .geometry import Pose, UnitQuaternion, vec3
from .grasp_selection import (
    SelectionConfig,
    generate_synthetic_library,
    load_library,
    save_library,
)
from .models import resolve_model
from .scenario import (
    load_scenario_config,
    replay_report_to_json,
    replay_trace,
    run_experiment,
)
from .service import Session, build_app
from .shared_control import SharedControlConfig

CASE_FAILURES_EXIT = 2


def _fail(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
def main():
    """Deterministic alternating shared-control grasping simulator."""


@main.command("gen-library")
@click.option("--object-id", default="object", show_default=True, help="Object name stored in the library.")
@click.option("--center", nargs=3, type=float, default=(0.4, 0.0, 0.3), show_default=True, help="Object center (m).")
@click.option("--radius", type=float, default=0.08, show_default=True, help="Grasp standoff radius (m).")
@click.option("--count", type=int, default=150, show_default=True, help="Number of candidate poses.")
@click.option("--seed", type=int, default=0, show_default=True, help="RNG seed.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Output JSON path.")
def gen_library(object_id, center, radius, count, seed, out):
    """Generate a synthetic grasp-candidate library around an object."""
    try:
        pose = Pose(vec3(*center), UnitQuaternion.identity())
        library = generate_synthetic_library(
            pose, radius, count=count, seed=seed, object_id=object_id
        )
        save_library(library, out)
    except (TeleograspError, OSError) as exc:
        _fail(str(exc))
    click.echo(f"wrote {out} ({count} candidates for {object_id!r})")


@main.command("run")
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Override the report path.")
def run(config_path, seed, out):
    """Run the strategy-comparison experiment described by a config file."""
    from dataclasses import replace

    try:
        config = load_scenario_config(config_path)
        if seed is not None:
            config = replace(config, seed=seed)
        if out is not None:
            config = replace(config, output_path=out)
        report = run_experiment(config)
        report_path = Path(config.output_path or "report.json")
        report_path.write_text(report.to_json(), encoding="utf-8")
        csv_path = report_path.with_suffix(".csv")
        csv_path.write_text(report.to_csv(), encoding="utf-8")
    except (TeleograspError, OSError) as exc:
        _fail(str(exc))
    failed = sum(1 for c in report.cases if c.status != "ok")
    click.echo(f"wrote {report_path} and {csv_path} ({len(report.cases)} cases, {failed} failed)")
    if report.has_failures:
        sys.exit(CASE_FAILURES_EXIT)


@main.command("replay")
@click.argument("trace_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--out", type=click.Path(dir_okay=False), default="replay_log.jsonl", show_default=True, help="Commanded-pose log path.")
def replay(trace_path, config_path, seed, out):
    """Replay a recorded hand trace and log every commanded pose."""
    from dataclasses import replace

    try:
        config = load_scenario_config(config_path)
        if seed is not None:
            config = replace(config, seed=seed)
        result = replay_trace(trace_path, config)
        log_path = Path(out)
        log_path.write_text(result.log_text(), encoding="utf-8")
        report_path = log_path.with_suffix(".report.json")
        report_path.write_text(replay_report_to_json(result), encoding="utf-8")
    except (TeleograspError, OSError) as exc:
        _fail(str(exc))
    click.echo(
        f"wrote {log_path} and {report_path} "
        f"({result.report['total_steps']} steps, {len(result.report['grips'])} grips)"
    )
    if result.has_failures:
        sys.exit(CASE_FAILURES_EXIT)


def _serve_settings(config_path):
    selection = SelectionConfig()
    shared = SharedControlConfig()
    speed = 0.1
    if config_path is not None:
        with open(config_path, encoding="utf-8") as fh:
            data = json.load(fh)
        if "selection" in data:
            selection = SelectionConfig(**data["selection"])
        if "shared_control" in data:
            shared = SharedControlConfig(**data["shared_control"])
        speed = float(data.get("speed", speed))
    return selection, shared, speed


@main.command("serve")
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--model", "model_ref", default="builtin:spatial_6r", show_default=True, help="Robot model path or builtin:<name>.")
@click.option("--library", "library_paths", multiple=True, type=click.Path(exists=True, dir_okay=False), help="Grasp library JSON (repeatable).")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON with selection/shared_control/speed settings.")
def serve(port, host, model_ref, library_paths, config_path):
    """Host a live teleoperation session over a websocket."""
    try:
        model = resolve_model(model_ref)
        if library_paths:
            libraries = [load_library(p) for p in library_paths]
        else:
            # Out-of-the-box demo: one synthetic object in front of the arm.
            center = Pose(vec3(0.45, 0.0, 0.35), UnitQuaternion.identity())
            libraries = [
                generate_synthetic_library(center, 0.08, count=150, seed=0, object_id="demo")
            ]
        selection, shared, speed = _serve_settings(config_path)
        session = Session(model, libraries, selection=selection, shared=shared, speed=speed)
        app = build_app(session)
    except (TeleograspError, OSError, json.JSONDecodeError) as exc:
        _fail(str(exc))
    import uvicorn

    click.echo(f"serving on ws://{host}:{port}/session")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
