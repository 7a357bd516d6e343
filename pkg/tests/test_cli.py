"""Command-line interface: verbs, exit codes, output shapes."""
from __future__ import annotations

import json

import pytest

from prange.cli import format_interval, main

FAST = ["--particles", "300", "--iters", "120", "--seed", "0"]
UNBOUNDED = [{"lo": 0.0, "loClosed": True, "hi": None, "hiClosed": False}]


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def tri(models_dir) -> str:
    return str(models_dir / "triangle.json")


class TestBasicVerbs:
    def test_load_reports_counts(self, capsys, models_dir):
        code, out, _ = run(capsys, ["load", tri(models_dir), "--json"])
        assert code == 0
        assert json.loads(out) == {"ok": True, "entities": 3,
                                   "constraints": 3, "parameters": 3}

    def test_params_lists_declared_values(self, capsys, models_dir):
        code, out, _ = run(capsys, ["params", tri(models_dir), "--json"])
        assert code == 0
        rows = json.loads(out)["parameters"]
        assert {r["name"]: r["value"] for r in rows} == {
            "d1": 10.0, "d2": 20.0, "d3": 15.0}

    def test_solve_at_declared_values(self, capsys, models_dir):
        code, out, _ = run(capsys, ["solve", tri(models_dir), "--json"] + FAST)
        assert code == 0
        payload = json.loads(out)
        assert payload["residual"] < 1e-10
        assert set(payload["solution"]) == {
            "P1.x", "P1.y", "P2.x", "P2.y", "P3.x", "P3.y"}


class TestRangesVerb:
    def test_one_shot_selection(self, capsys, models_dir):
        code, out, _ = run(capsys, ["ranges", tri(models_dir),
                                    "--select", "d2,d3", "--json"] + FAST)
        assert code == 0
        ranges = json.loads(out)["ranges"]
        assert ranges["d2"]["intervals"] == UNBOUNDED
        assert ranges["d3"]["intervals"] == UNBOUNDED
        assert ranges["d2"]["seed"] != ranges["d3"]["seed"]

    def test_seed_env_default_is_reproducible(self, capsys, models_dir, monkeypatch):
        monkeypatch.setenv("PRANGE_SEED", "7")
        argv = ["ranges", tri(models_dir), "--select", "d2,d3", "--json",
                "--particles", "300", "--iters", "120"]
        _, first, _ = run(capsys, argv)
        _, second, _ = run(capsys, argv)
        assert json.loads(first) == json.loads(second)

    def test_missing_selection_is_usage_error(self, capsys, models_dir):
        code, _, err = run(capsys, ["ranges", tri(models_dir)])
        assert code == 1
        assert "--select" in err

    def test_bad_model_path_is_model_error(self, capsys):
        code, _, err = run(capsys, ["load", "no/such/file.json"])
        assert code == 2
        assert "model error" in err

    def test_bad_flag_value_is_usage_error(self, capsys, models_dir):
        code, _, _ = run(capsys, ["ranges", tri(models_dir),
                                  "--select", "d2,d3", "--particles", "0"])
        assert code == 1


class TestSessionFlow:
    def test_select_assign_finalize_round_trip(self, capsys, models_dir, tmp_path):
        session = str(tmp_path / "s.json")
        base = ["--session", session] + FAST

        code, _, _ = run(capsys, ["select", tri(models_dir),
                                  "--select", "d2,d3"] + base)
        assert code == 0

        code, out, _ = run(capsys, ["assign", tri(models_dir), "d2=20", "--json"] + base)
        assert code == 0
        assert json.loads(out)["assigned"] == {"d2": 20.0}

        code, _, err = run(capsys, ["assign", tri(models_dir), "d3=5"] + base)
        assert code == 4
        assert "[10, 30]" in err

        code, _, _ = run(capsys, ["assign", tri(models_dir), "d3=20"] + base)
        assert code == 0

        code, out, _ = run(capsys, ["finalize", tri(models_dir), "--json"] + base)
        assert code == 0
        assert json.loads(out)["residual"] < 1e-10

    def test_undo_restores_unassigned(self, capsys, models_dir, tmp_path):
        session = str(tmp_path / "s.json")
        base = ["--session", session] + FAST
        run(capsys, ["select", tri(models_dir), "--select", "d2,d3"] + base)
        run(capsys, ["assign", tri(models_dir), "d2=20", "--json"] + base)

        code, out, _ = run(capsys, ["undo", tri(models_dir), "--json"] + base)
        assert code == 0
        assert json.loads(out)["assigned"] == {}

        code, _, _ = run(capsys, ["undo", tri(models_dir)] + base)
        assert code == 1

    def test_report_includes_context(self, capsys, models_dir, tmp_path):
        session = str(tmp_path / "s.json")
        base = ["--session", session] + FAST
        run(capsys, ["select", tri(models_dir), "--select", "d2,d3"] + base)
        code, out, _ = run(capsys, ["report", tri(models_dir)] + base)
        assert code == 0
        payload = json.loads(out)
        assert payload["fixed"] == {"d1": 10.0}
        assert payload["assigned"] == {}
        for rep in payload["ranges"].values():
            assert set(rep) == {"parameter", "intervals", "seed", "provenance"}

    def test_malformed_pair_is_usage_error(self, capsys, models_dir):
        code, _, _ = run(capsys, ["assign", tri(models_dir),
                                  "--select", "d2,d3", "d2:20"])
        assert code == 1
        code, _, _ = run(capsys, ["assign", tri(models_dir),
                                  "--select", "d2,d3", "d2=abc"])
        assert code == 1


class TestFormatting:
    @pytest.mark.parametrize("rep,expect", [
        ({"lo": 10.0, "loClosed": True, "hi": 30.0, "hiClosed": True}, "[10, 30]"),
        ({"lo": 0.0, "loClosed": False, "hi": None, "hiClosed": False}, "(0, +inf)"),
        ({"lo": 5.0, "loClosed": True, "hi": 5.0, "hiClosed": True}, "[5, 5]"),
    ])
    def test_interval_rendering(self, rep, expect):
        assert format_interval(rep) == expect
