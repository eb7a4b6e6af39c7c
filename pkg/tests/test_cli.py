import json

from click.testing import CliRunner

from teleograsp.cli import main

from helpers import FIXTURES


def invoke(args, cwd=None):
    runner = CliRunner()
    return runner.invoke(main, args, catch_exceptions=False)


def write_config(path, libraries, prep={"count": 1}, extra=None):
    data = {
        "model": "builtin:spatial_6r",
        "libraries": [str(p) for p in libraries],
        "preparation_poses": prep,
        "speed": 0.5,
        "seed": 0,
    }
    if extra:
        data.update(extra)
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TestGenLibrary:
    def test_writes_valid_library(self, tmp_path):
        out = tmp_path / "lib.json"
        result = invoke(["gen-library", "--count", "12", "--seed", "3", "--out", str(out)])
        assert result.exit_code == 0, result.output
        data = json.loads(out.read_text())
        assert len(data["candidates"]) == 12
        assert data["object_id"] == "object"

    def test_deterministic_bytes(self, tmp_path):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        for out in (a, b):
            result = invoke(["gen-library", "--count", "20", "--seed", "7", "--out", str(out)])
            assert result.exit_code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_custom_center_and_object(self, tmp_path):
        out = tmp_path / "lib.json"
        result = invoke(
            [
                "gen-library",
                "--object-id",
                "mug",
                "--center",
                "0.5",
                "0.1",
                "0.4",
                "--radius",
                "0.05",
                "--count",
                "5",
                "--out",
                str(out),
            ]
        )
        assert result.exit_code == 0
        data = json.loads(out.read_text())
        assert data["object_id"] == "mug"

    def test_invalid_count_fails_with_one(self, tmp_path):
        out = tmp_path / "lib.json"
        result = invoke(["gen-library", "--count", "0", "--out", str(out)])
        assert result.exit_code == 1


class TestRun:
    def make_library(self, tmp_path):
        lib = tmp_path / "lib.json"
        result = invoke(
            ["gen-library", "--center", "0.43", "0.0", "0.05", "--radius", "0.08",
             "--count", "30", "--seed", "2", "--out", str(lib)]
        )
        assert result.exit_code == 0
        return lib

    def test_writes_report_and_csv(self, tmp_path):
        lib = self.make_library(tmp_path)
        config = write_config(tmp_path / "config.json", [lib])
        out = tmp_path / "report.json"
        result = invoke(["run", str(config), "--out", str(out)])
        assert result.exit_code in (0, 2), result.output
        report = json.loads(out.read_text())
        assert "cases" in report and "aggregate" in report
        assert (tmp_path / "report.csv").exists()

    def test_byte_identical_across_runs(self, tmp_path):
        lib = self.make_library(tmp_path)
        config = write_config(tmp_path / "config.json", [lib])
        outs = []
        for name in ("r1.json", "r2.json"):
            out = tmp_path / name
            result = invoke(["run", str(config), "--out", str(out)])
            assert result.exit_code in (0, 2)
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_seed_override_changes_report(self, tmp_path):
        lib = self.make_library(tmp_path)
        config = write_config(tmp_path / "config.json", [lib], prep={"count": 2})
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        assert invoke(["run", str(config), "--out", str(a)]).exit_code in (0, 2)
        assert invoke(["run", str(config), "--seed", "99", "--out", str(b)]).exit_code in (0, 2)
        assert json.loads(a.read_text())["seed"] != json.loads(b.read_text())["seed"]

    def test_invalid_config_exits_one(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"model": "builtin:spatial_6r"}), encoding="utf-8")
        result = invoke(["run", str(config)])
        assert result.exit_code == 1

    def test_unreachable_object_exits_two(self, tmp_path):
        lib = tmp_path / "far.json"
        assert (
            invoke(
                ["gen-library", "--center", "9", "9", "9", "--count", "4", "--out", str(lib)]
            ).exit_code
            == 0
        )
        config = write_config(tmp_path / "config.json", [lib])
        out = tmp_path / "report.json"
        result = invoke(["run", str(config), "--out", str(out)])
        assert result.exit_code == 2
        assert out.exists()


class TestReplay:
    def test_golden_replay_via_cli(self, tmp_path):
        config = write_config(
            tmp_path / "config.json", [FIXTURES / "library_demo.json"]
        )
        out = tmp_path / "log.jsonl"
        result = invoke(
            ["replay", str(FIXTURES / "trace_demo.jsonl"), str(config), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        golden = (FIXTURES / "golden_replay_log.jsonl").read_bytes()
        assert out.read_bytes() == golden
        report = json.loads((tmp_path / "log.report.json").read_text())
        assert [g["status"] for g in report["grips"]] == ["ok"]

    def test_malformed_trace_exits_one_naming_line(self, tmp_path):
        trace = tmp_path / "trace.jsonl"
        trace.write_text('{"step": 0, "t": 0.0}\n', encoding="utf-8")
        config = write_config(tmp_path / "config.json", [FIXTURES / "library_demo.json"])
        result = invoke(["replay", str(trace), str(config)])
        assert result.exit_code == 1
        assert "line 1" in result.output

    def test_missing_trace_file_refused_by_click(self, tmp_path):
        config = write_config(tmp_path / "config.json", [FIXTURES / "library_demo.json"])
        result = invoke(["replay", str(tmp_path / "nope.jsonl"), str(config)])
        assert result.exit_code != 0


class TestServe:
    def test_help_lists_flags(self):
        result = invoke(["serve", "--help"])
        assert result.exit_code == 0
        for flag in ("--port", "--model", "--library", "--config"):
            assert flag in result.output

    def test_top_level_help(self):
        result = invoke(["--help"])
        assert result.exit_code == 0
        for command in ("gen-library", "run", "replay", "serve"):
            assert command in result.output
