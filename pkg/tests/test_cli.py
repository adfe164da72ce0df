import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from memflux.cli import main
from memflux.material import preset

SMALL = "sweep:\n  theta_steps: 3\n  current_steps: 3\n"


def read_stdout_csv(capsys):
    text = capsys.readouterr().out
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array(rows[1:], dtype=float)


def test_curve_default_monotone(capsys):
    assert main(["curve"]) == 0
    header, data = read_stdout_csv(capsys)
    assert header == ["H_A_per_m", "J_T", "B_T"]
    assert len(data) == 701
    assert np.all(np.diff(data[:, 1]) >= 0)
    assert np.all(np.diff(data[:, 2]) > 0)


def test_curve_ndfeb_remanence(capsys):
    assert main(["curve", "--material", "NdFeB-1.2T", "--h-min", "-10", "--h-max", "0", "--samples", "11"]) == 0
    _, data = read_stdout_csv(capsys)
    assert data[-1, 0] == 0 and data[-1, 2] == 1.2


def test_curve_round_radius_only_changes_the_fillet(capsys):
    args = ["curve", "--h-min", "-330", "--h-max", "110", "--samples", "4401"]
    main(args + ["--R", "0"])
    _, sharp = read_stdout_csv(capsys)
    main(args + ["--R", "100000"])
    _, round_ = read_stdout_csv(capsys)
    loop = preset("studied-LCF").loop
    diff = np.abs(round_[:, 1] - sharp[:, 1])
    inside = (sharp[:, 0] > loop.fillet_H_lo) & (sharp[:, 0] < loop.fillet_H_hi)
    assert np.all(diff[~inside] < 1e-8)
    # The 100 A/m grid misses the knee itself by a few tens of A/m.
    assert 0.99 * loop.sag < diff.max() <= loop.sag + 1e-9


def test_curve_recoil_columns_and_file_spec(tmp_path, capsys):
    spec = tmp_path / "mat.yaml"
    spec.write_text("Br: 0.9\niHc: 150000\nmu_rec: 1.2\nmu_g: 40\n")
    out = tmp_path / "c.csv"
    assert main(["curve", "--material", str(spec), "--recoil", "0.5", "--output", str(out), "--samples", "21"]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0][-2:] == ["B_recoil_T", "J_recoil_T"]
    assert len(rows) == 22


def test_simulate(capsys):
    assert main(["simulate", "--id", "0", "--iq", "0"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["ms_flux"] == pytest.approx(1.0, abs=1e-9)
    assert rec["delta_rad"] == pytest.approx(0.0, abs=1e-12)
    assert main(["simulate", "--id", "0", "--iq", "60"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["ms_b_m3"] > rec["ms_b_m2"]


def test_sweep_writes_csv_and_plots(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(SMALL)
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(cfg), "--out-dir", str(out), "--plot", "--metric", "ms_flux"]) == 0
    rows = list(csv.reader((out / "sweep.csv").open()))
    assert len(rows) == 10
    assert len(rows[0]) == 11  # i_d, i_q, eight metrics, error
    assert sorted(p.name for p in out.glob("*.svg")) == ["ms_flux.svg"]
    assert "ms_flux" in capsys.readouterr().out


def test_sweep_parallel_matches_serial(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(SMALL)
    main(["sweep", "--config", str(cfg), "--out-dir", str(tmp_path / "a")])
    main(["sweep", "--config", str(cfg), "--out-dir", str(tmp_path / "b"), "--parallel", "3"])
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()


def test_sweep_reports_failed_points(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(SMALL + "protocol:\n  durations: [0.1667, 0.1667, 0.5, 1, 1]\n")
    assert main(["sweep", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 1
    assert "interval 2" in capsys.readouterr().err


def test_materials(tmp_path, capsys):
    export = tmp_path / "m.yaml"
    assert main(["materials", "--export", str(export)]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 8
    mnbi = next(r for r in rows if r[0] == "MnBi")
    assert "positive" in mnbi[-1].lower()
    assert export.read_text().count("name:") == 7


def test_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("motor:\n  pole_pair: 3\n")
    assert main(["simulate", "--id", "0", "--iq", "0", "--config", str(bad)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError"
    assert main(["curve", "--material", "unobtainium"]) == 2


def test_console_script_help():
    r = subprocess.run([sys.executable, "-m", "memflux.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    assert "simulate" in r.stdout
