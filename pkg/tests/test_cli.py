import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from shadowkink import cli

SPEC_I = {"family": "rational-grad", "params": []}
A_HALF = float(np.sqrt(2.0) / 2.0)


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def _run(capsys, argv):
    code = cli.run(argv)
    out = capsys.readouterr().out.strip().splitlines()
    return code, json.loads(out[-1])


def test_thresholds_command(tmp_path, capsys):
    cfg = _write(tmp_path, "thr.json", {"spec": SPEC_I, "output_dir": str(tmp_path / "out")})
    code, payload = _run(capsys, ["thresholds", "--config", cfg])
    assert code == 0 and payload["status"] == "ok"
    report = json.loads((tmp_path / "out" / "thresholds.json").read_text())
    assert report["a_star_lower"] == pytest.approx(1.41421, abs=1e-5)


def test_pii_command_with_figure(tmp_path, capsys):
    cfg = _write(
        tmp_path, "pii.json",
        {"spec": SPEC_I, "alpha": -0.25, "branch": "minus", "output_dir": str(tmp_path / "out")},
    )
    code, payload = _run(capsys, ["pii", "--config", cfg])
    assert code == 0
    report = json.loads((tmp_path / "out" / "pii_alpha-0.25_minus.json").read_text())
    assert report["sign_changes"] == 1
    assert (tmp_path / "out" / "pii_alpha-0.25_minus.csv").exists()
    assert (tmp_path / "out" / "pii_alpha-0.25_minus.png").exists()


def test_no_figures_flag(tmp_path, capsys):
    cfg = _write(
        tmp_path, "pii.json",
        {"spec": SPEC_I, "alpha": -0.25, "branch": "minus", "output_dir": str(tmp_path / "out")},
    )
    code, _ = _run(capsys, ["pii", "--config", cfg, "--no-figures"])
    assert code == 0
    assert not (tmp_path / "out" / "pii_alpha-0.25_minus.png").exists()


def test_solve_rejects_nonpositive_amplitude(tmp_path, capsys):
    cfg = _write(
        tmp_path, "solve.json",
        {"spec": SPEC_I, "epsilon": 0.02, "a": A_HALF, "output_dir": str(tmp_path / "out")},
    )
    code, payload = _run(capsys, ["solve", "--config", cfg, "--a", "-1"])
    assert code == 2
    assert set(payload) == {"code", "message", "context"}
    assert "positive" in payload["message"]


def test_unknown_keys_rejected(tmp_path, capsys):
    cfg = _write(tmp_path, "bad.json", {"spec": SPEC_I, "bogus": 1})
    code, payload = _run(capsys, ["thresholds", "--config", cfg])
    assert code == 2 and payload["code"] == "config"
    cfg2 = _write(tmp_path, "bad2.json", {"spec": SPEC_I, "solver": {"nope": 1}, "epsilon": 0.02, "a": 0.7})
    code2, payload2 = _run(capsys, ["solve", "--config", cfg2])
    assert code2 == 2 and payload2["code"] == "config"


def test_missing_config_file(tmp_path, capsys):
    code, payload = _run(capsys, ["validate", "--config", str(tmp_path / "nope.json")])
    assert code == 2 and payload["code"] == "config"


def test_validate_command(tmp_path, capsys):
    cfg = _write(tmp_path, "val.json", {"spec": SPEC_I, "output_dir": str(tmp_path / "out")})
    code, _ = _run(capsys, ["validate", "--config", cfg])
    assert code == 0
    report = json.loads((tmp_path / "out" / "assumptions.json").read_text())
    assert report["passed"] is True
    assert {c["name"] for c in report["clauses"]} >= {"mu-even", "f-odd", "f-integrable"}


def test_solve_and_rerun_byte_identical(tmp_path, capsys):
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    cfg = _write(
        tmp_path, "solve.json",
        {"spec": SPEC_I, "epsilon": 0.02, "a": A_HALF, "output_dir": str(out1)},
    )
    code, payload = _run(capsys, ["solve", "--config", cfg])
    assert code == 0
    code, _ = _run(capsys, ["solve", "--config", cfg, "--out", str(out2)])
    assert code == 0
    for name in sorted(p.name for p in out1.iterdir()):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


def test_eta_command(tmp_path, capsys):
    cfg = _write(
        tmp_path, "eta.json",
        {"spec": SPEC_I, "epsilon": 0.02, "a": A_HALF, "output_dir": str(tmp_path / "out")},
    )
    code, _ = _run(capsys, ["eta", "--config", cfg])
    assert code == 0
    assert (tmp_path / "out" / "eta_eps0.02_a0.707107.csv").exists()


def test_spectrum_command(tmp_path, capsys):
    cfg = _write(
        tmp_path, "spec.json",
        {"spec": SPEC_I, "alpha": -0.25, "branch": "minus", "T": 10.0, "k": 3,
         "output_dir": str(tmp_path / "out")},
    )
    code, _ = _run(capsys, ["spectrum", "--config", cfg])
    assert code == 0
    report = json.loads((tmp_path / "out" / "spectrum_alpha-0.25_minus.json").read_text())
    assert len(report["eigenvalues"]) == 3
    assert report["eigenvalues"][0] >= -1e-6


def test_backlund_command_pole_is_status_4(tmp_path, capsys):
    cfg = _write(
        tmp_path, "bk.json",
        {"spec": SPEC_I, "alpha": -0.25, "branch": "minus", "direction": "down",
         "output_dir": str(tmp_path / "out")},
    )
    code, payload = _run(capsys, ["backlund", "--config", cfg])
    assert code == 4 and payload["code"] == "pole"


def test_backlund_command_down_from_plus(tmp_path, capsys):
    cfg = _write(
        tmp_path, "bk.json",
        {"spec": SPEC_I, "alpha": -0.25, "branch": "plus", "direction": "down",
         "output_dir": str(tmp_path / "out")},
    )
    code, _ = _run(capsys, ["backlund", "--config", cfg])
    assert code == 0
    report = json.loads((tmp_path / "out" / "backlund_alpha-1.25_down.json").read_text())
    assert report["residual_inf"] <= 1e-6


def test_console_script_entry_point(tmp_path):
    exe = shutil.which("shadow-kink")
    if exe is None:
        pytest.skip("console script not installed")
    cfg = tmp_path / "thr.json"
    cfg.write_text(json.dumps({"spec": SPEC_I, "output_dir": str(tmp_path / "out")}))
    proc = subprocess.run(
        [exe, "thresholds", "--config", str(cfg)], capture_output=True, text=True, timeout=300
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout.strip().splitlines()[-1])["status"] == "ok"
