import csv
import json

import numpy as np
import pytest

from qmflow import cli, spaceform


def test_sphere_preset_converges(tmp_path, capsys):
    assert cli.main(["flow", "--preset", "sphere", "--out", str(tmp_path)]) == 0
    final = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert final["status"] == "converged"
    for name in ("trajectory.ndjson", "trajectory.csv", "trajectory_final_profile.txt"):
        assert (tmp_path / name).exists()


def test_t_end_exit_code_and_determinism(tmp_path):
    args = ["flow", "--preset", "perturbed-sphere t_end=0.05", "--samples", "5"]
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 6
    assert cli.main(args + ["--out", str(tmp_path / "b")]) == 6
    a = (tmp_path / "a" / "trajectory.ndjson").read_text()
    assert a == (tmp_path / "b" / "trajectory.ndjson").read_text()
    assert len(a.splitlines()) == 1 + 6 + 1


def test_profile_file_round_trip(tmp_path):
    assert cli.main(["flow", "--preset", "perturbed-sphere t_end=0.02", "--out", str(tmp_path / "a")]) == 6
    ini = tmp_path / "run.ini"
    ini.write_text(f"[flow]\nt_end = 0.02\n[initial]\nprofile = {tmp_path / 'a' / 'trajectory_final_profile.txt'}\n")
    assert cli.main(["flow", "--config", str(ini), "--out", str(tmp_path / "b")]) == 6


def test_usage_errors(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[flow]\ncfl = -1\n")
    assert cli.main(["flow", "--config", str(bad)]) == 2
    assert f"{bad}:" in capsys.readouterr().err
    assert cli.main(["flow", "--preset", "nonesuch"]) == 2
    assert cli.main(["frobnicate"]) == 2
    assert cli.main(["flow", "--preset", "perturbed-sphere delta=0.3 mode=6",
                     "--out", str(tmp_path)]) == 2


def test_check_suites_pass():
    assert cli.main(["check", "spaceform"]) == 0
    assert cli.main(["check", "integrals"]) == 0


def test_check_detects_broken_trig_kernel(monkeypatch, capsys):
    real = spaceform._c
    monkeypatch.setattr(spaceform, "_c", lambda K, r: real(K, r) * (1 + 1e-6))
    assert cli.main(["check", "spaceform"]) == 1
    assert "FAILED spaceform" in capsys.readouterr().err


def test_elliptic_subcommand(tmp_path, capsys):
    ini = tmp_path / "e.ini"
    ini.write_text("[elliptic]\nf = norm\nalpha = 1\nr = 0.6\ngrid = 32\n")
    assert cli.main(["elliptic", "--config", str(ini), "--out", str(tmp_path)]) == 0
    rec = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert rec["converged"] and rec["residual"] < 1e-10
    assert rec["sphereFitRadius"] == pytest.approx(0.6, abs=1e-8)
    ini.write_text("[elliptic]\nequation = soliton\nf = mean\nr = 0.6\ngrid = 64\n")
    assert cli.main(["elliptic", "--config", str(ini), "--out", str(tmp_path)]) == 0
    ini.write_text("[elliptic]\nf = cubic\n")
    assert cli.main(["elliptic", "--config", str(ini), "--out", str(tmp_path)]) == 2


def test_sweep(tmp_path, capsys):
    ini = tmp_path / "s.ini"
    ini.write_text("[flow]\nN = 64\nt_end = 0.02\n[sweep]\nell = 0, 1, 2\n")
    assert cli.main(["sweep", "--config", str(ini), "--out", str(tmp_path), "--workers", "1"]) == 0
    with open(tmp_path / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["ell"]) for r in rows] == [0, 1, 2]
    assert all(r["status"] == "t-end" and float(r["drift"]) < 1e-6 for r in rows)
    assert (tmp_path / "job_002.ndjson").exists()
    ini.write_text("[sweep]\nell =\n")
    assert cli.main(["sweep", "--config", str(ini), "--out", str(tmp_path)]) == 2
    ini.write_text("[initial]\npreset = random\n[sweep]\ndelta = 0.1\n")
    assert cli.main(["sweep", "--config", str(ini), "--out", str(tmp_path)]) == 2
