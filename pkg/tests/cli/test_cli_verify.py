import json

import pytest
from click.testing import CliRunner

from unison_sim.cli.main import cli
from unison_sim.core.campaign import forge_root_creation
from unison_sim.core.trace_io import read_trace, write_trace


@pytest.fixture
def runner():
    return CliRunner()


def _record(runner, *extra):
    result = runner.invoke(
        cli, ["run", "--graph", "gen:ring:5", "--seed", "3", "--stop-on", "never", "--max-steps", "60", *extra]
    )
    assert result.exit_code == 0, result.output


def test_verify_legal_trace(runner):
    with runner.isolated_filesystem():
        _record(runner)
        result = runner.invoke(cli, ["verify", "trace.jsonl"])
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        assert report["status"] == "pass"
        assert report["invariants"] == []
        assert report["bounds"] == []
        assert {r["name"] for r in report["reports"]} == {"invariants", "bounds", "times"}


def test_verify_table_and_report_file(runner):
    with runner.isolated_filesystem():
        _record(runner)
        result = runner.invoke(cli, ["verify", "trace.jsonl", "--table", "--report", "report.json"])
        assert result.exit_code == 0
        assert "Status: pass" in result.output
        with open("report.json") as f:
            assert json.load(f)["status"] == "pass"


def test_verify_forged_root_creation(runner):
    with runner.isolated_filesystem():
        _record(runner)
        write_trace(forge_root_creation(read_trace("trace.jsonl")), "forged.jsonl")
        result = runner.invoke(cli, ["verify", "forged.jsonl"])
        assert result.exit_code == 1
        report = json.loads(result.output)
        assert report["status"] == "invariant-violation"
        assert "root-monotonicity" in {v["check"] for v in report["invariants"]}


def test_verify_truncated_trace(runner):
    with runner.isolated_filesystem():
        _record(runner)
        with open("trace.jsonl") as f:
            lines = f.readlines()
        with open("truncated.jsonl", "w") as f:
            f.writelines(lines[:-1])
        result = runner.invoke(cli, ["verify", "truncated.jsonl"])
        assert result.exit_code == 3


def test_verify_missing_file(runner):
    with runner.isolated_filesystem():
        result = runner.invoke(cli, ["verify", "nowhere.jsonl"])
        assert result.exit_code == 3


def test_verify_simulation_trace(runner):
    with runner.isolated_filesystem():
        result = runner.invoke(
            cli, ["simulate", "--graph", "gen:path:3", "--values", "5,2,9", "--init", "clean-uniform:0", "--daemon", "sync"]
        )
        assert result.exit_code == 0, result.output
        result = runner.invoke(cli, ["verify", "trace.jsonl"])
        assert result.exit_code == 0
        names = {r["name"] for r in json.loads(result.output)["reports"]}
        assert {"simulation", "lazy"} <= names
