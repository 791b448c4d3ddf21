import json

import numpy as np

from sbo_lab.cli import main
from sbo_lab.io import read_csv, read_snapshot

ZERO_CONFIG = """
grid: {L: 20.0, N: 64}
init:
  u0: {family: plane-wave, amplitude: 0.0}
  v0: {family: plane-wave, amplitude: 0.0}
horizon: {T: 0.1}
"""

SMALL_CONFIG = """
grid: {L: 40.0, N: 128}
init:
  u0: {family: gaussian, amplitude: 0.05, width: 2.0, center: 20.0, wavenumber: 1.0}
  v0: {family: gaussian, amplitude: 0.05, width: 3.0, center: 20.0}
horizon: {T: 0.2}
controls: {rel_tol: 1.0e-10}
estimates: {samples: 3}
"""


def _write(tmp_path, text):
    p = tmp_path / "cfg.yaml"
    p.write_text(text)
    return str(p)


def test_run_zero_data(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", _write(tmp_path, ZERO_CONFIG), "--out", str(out), "--quiet"]) == 0
    header, data = read_csv(out / "diagnostics.csv")
    assert header == "t,E1,E2,E3,E4,Em_s,Hs_u,Hs_v,vx_inf,acc_L1,acc_L2sq".split(",")
    assert np.all(data[:, 1:] == 0)
    assert read_snapshot(out / "final.sbo").t == 0.1
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passed"] and not summary["partial"]


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, "params: {lambda: 1.5}\n")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "lambda must be in (0,1]" in capsys.readouterr().err


def test_diff_run_and_rescale_check(tmp_path):
    cfg = _write(tmp_path, SMALL_CONFIG)
    out = tmp_path / "d"
    assert main(["diff-run", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    for name in ("run_a.csv", "run_b.csv", "diff.csv", "lipschitz.json"):
        assert (out / name).exists()
    assert main(["rescale-check", "--config", cfg, "--out", str(tmp_path / "r"), "--quiet"]) == 0


def test_failed_check_gives_exit_one(tmp_path):
    text = SMALL_CONFIG.replace("amplitude: 0.05, width: 2.0", "amplitude: 0.5, width: 2.0")
    cfg = _write(tmp_path, text + "diagnostics: {e34_rel_tol: 1.0e-300}\n")
    out = tmp_path / "f"
    assert main(["run", "--config", cfg, "--out", str(out), "--quiet"]) == 1
    assert not json.loads((out / "summary.json").read_text())["passed"]


def test_aborted_run_flags_partial(tmp_path):
    text = SMALL_CONFIG.replace("controls: {rel_tol: 1.0e-10}", "controls: {max_steps: 2, dt_init: 1.0e-4}")
    cfg = _write(tmp_path, text)
    out = tmp_path / "p"
    assert main(["run", "--config", cfg, "--out", str(out), "--quiet"]) == 3
    summary = json.loads((out / "summary.json").read_text())
    assert summary["partial"] and "max_steps" in summary["error"]


def test_estimates_deterministic_and_seed_override(tmp_path):
    cfg = _write(tmp_path, SMALL_CONFIG)
    outs = [tmp_path / n for n in ("e1", "e2", "e3")]
    assert main(["estimates", "--config", cfg, "--out", str(outs[0]), "--quiet"]) == 0
    assert main(["estimates", "--config", cfg, "--out", str(outs[1]), "--quiet"]) == 0
    main(["estimates", "--config", cfg, "--out", str(outs[2]), "--quiet", "--seed", "5"])
    a, b, c = ((o / "estimates.json").read_bytes() for o in outs)
    assert a == b
    assert a != c
