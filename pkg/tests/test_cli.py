"""CLI（main / run_from_file / batch_run）のテスト.

テスト方針:
  1. 各サブコマンドが成果物を書き出し、終了コード 0 を返す
  2. 検証エラーは終了コード 2 と stderr の JSON で報告される
  3. 同じ入力からは同じバイト列が出力される
"""
import asyncio
import json

import pandas as pd
import pytest

from batch_run import batch_run
from hwm.solitons import single_soliton
from main import build_parser, config_from_args, main
from models.schemas import RationalMapJSON
from run_from_file import run_from_file
from workflows import checks


# ============================================================
# ヘルパー
# ============================================================
def _run(*argv) -> int:
    return asyncio.run(main(list(argv)))


def _build(out, name="single", *extra) -> int:
    return _run("--output-dir", str(out), "--name", name, "--quiet", "build", *extra)


def _write_bad_map(path):
    """留数 A = diag(1, 0) が冪零でない写像 JSON."""
    data = {
        "d": 2,
        "k": 1,
        "U_inf": [[{"re": 1.0}, {}], [{}, {"re": -1.0}]],
        "poles": [{"z": {"im": -1.0}, "A": [[{"re": 1.0}, {}], [{}, {}]]}],
        "sphere": True,
    }
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


# ============================================================
# 1. 引数の解釈
# ============================================================
class TestParser:
    def test_build_arguments(self):
        args = build_parser().parse_args(["build", "multi", "--v=-0.5,0.5", "--y=-40,40"])
        config = config_from_args(args)
        assert config.command == "build"
        assert config.kind == "multi"
        assert config.v == [-0.5, 0.5]
        assert config.y == [-40.0, 40.0]

    def test_check_arguments(self):
        args = build_parser().parse_args(["check", "map.json", "--suite", "full", "--cayley-M", "16"])
        config = config_from_args(args)
        assert config.input_map == "map.json"
        assert config.suite == "full"
        assert config.cayley.M == 16

    def test_stereographic_coefficients(self):
        args = build_parser().parse_args(["build", "stereographic", "--P", "0,1", "--Q", "1"])
        config = config_from_args(args)
        assert [c.to_complex() for c in config.P] == [0, 1]
        assert [c.to_complex() for c in config.Q] == [1]


# ============================================================
# 2. サブコマンド
# ============================================================
class TestCommands:
    def test_build_single(self, tmp_path):
        assert _build(tmp_path, "single", "single", "--v", "0.5") == 0
        data = RationalMapJSON.model_validate_json((tmp_path / "single_map.json").read_text())
        assert data.sphere
        assert len(data.poles) == 1
        assert data.poles[0].z.im == pytest.approx(-1.0)

    def test_build_stereographic(self, tmp_path):
        assert _build(tmp_path, "stereo", "stereographic", "--P", "0,0,1", "--Q", "1") == 0
        data = RationalMapJSON.model_validate_json((tmp_path / "stereo_map.json").read_text())
        assert len(data.poles) == 2

    def test_build_constant(self, tmp_path):
        assert _build(tmp_path, "const", "constant", "--d", "3", "--k", "1") == 0
        data = RationalMapJSON.model_validate_json((tmp_path / "const_map.json").read_text())
        assert data.poles == []
        assert not data.sphere

    def test_evolve(self, tmp_path):
        assert _build(tmp_path, "two", "multi", "--v=-0.5,0.5", "--y=-40,40") == 0
        code = _run(
            "--output-dir", str(tmp_path), "--name", "two", "--quiet",
            "evolve", str(tmp_path / "two_map.json"), "--times", "0,1,10", "--grid-points", "11",
        )
        assert code == 0
        for index in range(3):
            assert (tmp_path / f"two_snapshot_{index:03d}.json").exists()
        frame = pd.read_csv(tmp_path / "two_samples.csv")
        assert len(frame) == 3 * 11
        assert {"t", "x", "U11_re", "U12_im", "u1", "u2", "u3"} <= set(frame.columns)
        norms = frame["u1"] ** 2 + frame["u2"] ** 2 + frame["u3"] ** 2
        assert norms.to_numpy() == pytest.approx(1.0, abs=1e-9)
        diagnostics = json.loads((tmp_path / "two_diagnostics.json").read_text())
        assert len(diagnostics["rows"]) == 3
        assert diagnostics["max_spectrum_drift"] < 1e-8

    def test_spectrum(self, tmp_path):
        assert _build(tmp_path, "single", "single", "--v", "0.3") == 0
        code = _run("--output-dir", str(tmp_path), "--name", "single", "--quiet", "spectrum", str(tmp_path / "single_map.json"))
        assert code == 0
        report = json.loads((tmp_path / "single_spectrum.json").read_text())
        assert report["eigenvalues"] == pytest.approx([0.3])
        assert report["traces"]["2"] == pytest.approx(0.91)
        assert report["essential_spectrum"] == [-1.0, 1.0]

    def test_resolve(self, tmp_path):
        assert _build(tmp_path, "single", "single", "--v", "0.3") == 0
        code = _run(
            "--output-dir", str(tmp_path), "--name", "single", "--quiet",
            "resolve", str(tmp_path / "single_map.json"), "--t-list", "10,100",
        )
        assert code == 0
        report = json.loads((tmp_path / "single_resolution.json").read_text())
        assert report["solitons"][0]["v"] == pytest.approx(0.3)
        assert len(report["convergence"]) == 2
        frame = pd.read_csv(tmp_path / "single_convergence.csv")
        assert list(frame.columns) == ["t", "sup", "H0.5", "H1"]

    def test_check_fast(self, tmp_path):
        assert _build(tmp_path, "single", "single", "--v", "0.5") == 0
        code = _run("--output-dir", str(tmp_path), "--name", "single", "--quiet", "check", str(tmp_path / "single_map.json"))
        report = json.loads((tmp_path / "single_check.json").read_text())
        assert code == 0, [c for c in report["checks"] if not c["passed"]]
        assert report["passed"]
        names = {check["name"] for check in report["checks"]}
        assert {"validate", "conservation", "time_reversal", "residue_dynamics"} <= names


# ============================================================
# 3. エラーと終了コード
# ============================================================
class TestExitCodes:
    def test_velocity_out_of_range(self, tmp_path, capsys):
        assert _build(tmp_path, "bad", "single", "--v", "1.5") == 2
        payload = json.loads(capsys.readouterr().err)
        assert payload["exit_code"] == 2

    def test_common_factor(self, tmp_path, capsys):
        assert _build(tmp_path, "bad", "stereographic", "--P=-1,0,1", "--Q=-1,1") == 2
        payload = json.loads(capsys.readouterr().err)
        assert payload["error"] == "StereographicError"
        assert not (tmp_path / "bad_map.json").exists()

    def test_separation(self, tmp_path, capsys):
        assert _build(tmp_path, "bad", "multi", "--v=-0.5,0.5", "--y=-1,1") == 2
        assert json.loads(capsys.readouterr().err)["error"] == "SeparationError"

    def test_evolve_rejects_invalid_map(self, tmp_path, capsys):
        path = _write_bad_map(tmp_path / "bad_map.json")
        assert _run("--output-dir", str(tmp_path), "--quiet", "evolve", str(path)) == 2
        payload = json.loads(capsys.readouterr().err)
        assert payload["report"]["passed"] is False

    def test_mismatched_multi_lengths(self, tmp_path, capsys):
        assert _build(tmp_path, "bad", "multi", "--v=-0.5,0.0,0.5", "--y=-40,40") == 2
        payload = json.loads(capsys.readouterr().err)
        assert payload["error"] == "ValueError"
        assert payload["exit_code"] == 2

    def test_unknown_map_key(self, tmp_path, capsys):
        path = tmp_path / "legacy_map.json"
        data = {
            "d": 2,
            "k": 1,
            "U_inf": [[{"re": 1.0}, {}], [{}, {"re": -1.0}]],
            "residues": [{"z": {"im": -1.0}, "e": [{"re": 1.0}, {}], "xi": [{}, {"re": 1.0}]}],
        }
        path.write_text(json.dumps(data), encoding="utf-8")
        assert _run("--output-dir", str(tmp_path), "--quiet", "spectrum", str(path)) == 2
        assert json.loads(capsys.readouterr().err)["error"] == "ValidationError"

    def test_rank_two_residue(self, tmp_path, capsys):
        path = tmp_path / "rank_map.json"
        data = {
            "d": 2,
            "k": 1,
            "U_inf": [[{"re": 1.0}, {}], [{}, {"re": -1.0}]],
            "poles": [{"z": {"im": -1.0}, "A": [[{"re": 1.0}, {}], [{}, {"re": 1.0}]]}],
        }
        path.write_text(json.dumps(data), encoding="utf-8")
        assert _run("--output-dir", str(tmp_path), "--quiet", "spectrum", str(path)) == 2
        assert json.loads(capsys.readouterr().err)["error"] == "RankError"

    def test_check_reports_validation_failure(self, tmp_path):
        path = _write_bad_map(tmp_path / "bad_map.json")
        assert _run("--output-dir", str(tmp_path), "--name", "bad", "--quiet", "check", str(path)) == 2
        report = json.loads((tmp_path / "bad_check.json").read_text())
        assert not report["passed"]
        assert [check["name"] for check in report["checks"]] == ["validate"]

    def test_unexpected_exception_becomes_failed_check(self, monkeypatch):
        def broken(map):
            raise ZeroDivisionError("division by zero")

        monkeypatch.setattr(checks, "FAST_CHECKS", [checks.FAST_CHECKS[0], ("commutator_identity", broken)])
        report = asyncio.run(checks.run_checks(single_soliton(0.5).profile, verbose=False))
        assert not report.passed
        failed = [check for check in report.checks if not check.passed]
        assert [check.name for check in failed] == ["commutator_identity"]
        assert failed[0].detail.startswith("ZeroDivisionError")


# ============================================================
# 4. 決定性とファイル実行
# ============================================================
class TestDeterminism:
    def test_same_bytes(self, tmp_path):
        for sub in ("a", "b"):
            assert _build(tmp_path / sub, "two", "multi", "--v=-0.5,0.5", "--y=-40,40") == 0
            code = _run(
                "--output-dir", str(tmp_path / sub), "--name", "two", "--quiet",
                "evolve", str(tmp_path / sub / "two_map.json"), "--times", "0,5", "--grid-points", "5",
            )
            assert code == 0
        for name in ("two_map.json", "two_snapshot_001.json", "two_samples.csv", "two_diagnostics.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


class TestRunFromFile:
    def test_build_then_spectrum(self, tmp_path):
        inputs = tmp_path / "inputs"
        inputs.mkdir()
        out = tmp_path / "out"
        (inputs / "01_build.json").write_text(
            json.dumps({"name": "s", "command": "build", "kind": "single", "v": [0.2]}), encoding="utf-8"
        )
        (inputs / "02_spectrum.json").write_text(
            json.dumps({"name": "s", "command": "spectrum", "input_map": str(out / "s_map.json")}), encoding="utf-8"
        )
        codes = asyncio.run(batch_run(str(inputs), str(out), verbose=False))
        assert codes == {"01_build.json": 0, "02_spectrum.json": 0}
        assert json.loads((out / "s_spectrum.json").read_text())["eigenvalues"] == pytest.approx([0.2])

    def test_missing_file(self, tmp_path):
        assert asyncio.run(run_from_file(str(tmp_path / "missing.json"), verbose=False)) == 2

    def test_invalid_config(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"command": "build", "v": [2.0]}), encoding="utf-8")
        assert asyncio.run(run_from_file(str(path), str(tmp_path), verbose=False)) == 2

    def test_empty_directory(self, tmp_path):
        assert asyncio.run(batch_run(str(tmp_path), verbose=False)) == {}
