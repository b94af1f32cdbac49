import csv
import json
import subprocess
import sys

import pytest

from gibbslab import cli


def _run(*argv):
    return cli.main([str(a) for a in argv])


def test_theorem1_seeds_rows(tmp_path):
    assert _run("verify-theorem1", "--seeds", 3, "--out", tmp_path) == 0
    with open(tmp_path / "theorem1.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3 and all(r["bound_satisfied"] == "true" for r in rows)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["theorem1"]["instances"] == 3
    assert set(manifest["outputs"]) == {"theorem1.csv", "theorem1_epsilon.csv", "theorem1_summary.json"}
    assert set(manifest["software"]) == {"gibbslab", "numpy", "scipy", "kernel_backend", "python"}


def test_worker_count_does_not_change_outputs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run("verify-theorem1", "--seeds", 3, "--workers", 1, "--out", a) == 0
    assert _run("verify-theorem1", "--seeds", 3, "--workers", 2, "--out", b) == 0
    for name in ("theorem1.csv", "theorem1_epsilon.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_beta_reports_one_outcome(tmp_path):
    assert _run("run-algorithm", "--m", 10, "--realizations", 1, "--beta", 0.3, "--q", 3, "--r", 11,
                "--out", tmp_path) == 0
    summary = json.loads((tmp_path / "algorithm_summary.json").read_text())
    assert summary["outcomes"] == 1 and len(summary["results"]) == 1
    res = summary["results"][0]
    assert res["r"] == 11 and res["q"] == 3 and res["triangle_satisfied"]
    assert abs(res["beta_outcome"] - 0.3) <= res["delta_beta"]


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "k.yaml"
    cfg.write_text("experiment: kernel\nkernel:\n  r_max: 6\n")
    assert _run("verify-kernel", "--config", cfg, "--r-max", 5, "--out", tmp_path / "o") == 0
    rows = list(csv.DictReader(open(tmp_path / "o" / "fg.csv", newline="")))
    assert max(int(r["r"]) for r in rows) == 5


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("experiment: kernel\nkernel:\n  r_maxx: 6\n")
    assert _run("verify-kernel", "--config", bad, "--out", tmp_path) == 2
    assert "bad.yaml:3:" in capsys.readouterr().err
    other = tmp_path / "other.yaml"
    other.write_text("experiment: counting\n")
    assert _run("verify-kernel", "--config", other, "--out", tmp_path) == 2
    assert _run("verify-counting", "--m", 30, "--out", tmp_path) == 3
    assert _run("run-algorithm", "--r", 10, "--out", tmp_path) == 2
    assert _run("run-algorithm", "--m", 10, "--beta", 50.0, "--realizations", 1, "--out", tmp_path) == 2
    with pytest.raises(SystemExit) as exc:
        _run("verify-counting", "--bogus")
    assert exc.value.code == 2


def test_strict_flags_failed_checks(tmp_path, monkeypatch):
    monkeypatch.setitem(cli.RUNNERS, "kernel", lambda cfg: ({}, {"violations": 1}, False))
    assert _run("verify-kernel", "--out", tmp_path) == 0
    assert _run("verify-kernel", "--strict", "--out", tmp_path) == 1


def test_plot_is_deterministic(tmp_path):
    assert _run("verify-kernel", "--r-max", 8, "--out", tmp_path) == 0
    assert _run("verify-theorem1", "--seeds", 2, "--out", tmp_path) == 0
    assert _run("plot", tmp_path) == 0
    first = {p.name: p.read_bytes() for p in tmp_path.glob("*.svg")}
    assert set(first) == {"fg.svg", "theorem1_epsilon.svg"}
    assert _run("plot", tmp_path) == 0
    assert first == {p.name: p.read_bytes() for p in tmp_path.glob("*.svg")}
    assert b"<dc:date>" not in first["fg.svg"]


def test_plot_edge_cases(tmp_path):
    empty = tmp_path / "fg.csv"
    empty.write_text("r,q,r_minus_q,numeric,closed_form,satisfied\r\n")
    with pytest.warns(UserWarning, match="no data rows"):
        assert _run("plot", empty) == 0
    assert not (tmp_path / "fg.svg").exists()
    empty.write_text("r,q\r\n1,1\r\n")
    assert _run("plot", empty) == 2
    unknown = tmp_path / "other.csv"
    unknown.write_text("a\r\n1\r\n")
    assert _run("plot", unknown) == 2
    assert _run("plot", tmp_path / "missing") == 2


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "gibbslab.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("gibbslab ")
