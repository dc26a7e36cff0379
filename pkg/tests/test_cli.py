from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest

from ratchetlab import closedform as cf
from ratchetlab.cli import main, speed_table
from ratchetlab.closedform import RatchetParams


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), stdout=out)
    return code, out.getvalue()


def test_speed_text_and_json():
    code, out = run("speed", "--model", "bm", "--gamma", "0.5", "--mu", "0")
    assert code == 0 and out == "0.364505566474\n"
    code, out = run("speed", "--model", "bm", "--gamma", "0", "--mu", "3")
    assert code == 0 and float(out) == 0.0
    code, out = run("speed", "--model", "ou", "--mu", "1", "--format", "json")
    rec = json.loads(out)
    assert rec == {"model": "ou", "gamma": 0.5, "mu": 1.0, "speed": float(f"{cf.ou_speed(RatchetParams.ou(1)):.12g}")}


@pytest.mark.parametrize("argv", [
    ("speed", "--model", "ou", "--gamma", "0.5", "--mu", "0"),
    ("speed", "--model", "bm"),
    ("speed", "--model", "xx", "--mu", "1"),
    ("speed", "--mu", "-1"),
    ("speed", "--mu", "1", "--seed", "-3"),
    ("table", "--steps", "1"),
    ("simulate", "--mu", "1", "--dt", "2", "--T", "1"),
    ("simulate", "--mu", "1", "--kind", "chain", "--validate"),
    ("verify", "--suite", "speed", "--n", "10"),
    ("verify", "--suite", "nope"),
    ("couple", "--x-hi", "0", "--x-lo", "1"),
    (),
])
def test_usage_errors_exit_2(argv, capsys):
    code, _ = run(*argv)
    assert code == 2
    assert "usage" in capsys.readouterr().err


def test_table(tmp_path):
    code, out = run("table")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "mu,v_bm,v_ou" and len(lines) == 82
    assert lines[1].endswith(",") and lines[1].startswith("0.0,")
    rows = [tuple(float(v) for v in ln.split(",")) for ln in lines[2:]]
    diffs = [vb - vo for _, vb, vo in rows]
    assert sum(1 for a, b in zip(diffs, diffs[1:]) if (a > 0) != (b > 0)) == 1
    p = tmp_path / "t.csv"
    assert run("table", "--out", str(p))[0] == 0
    assert p.read_text() == out
    assert speed_table(0.5, 0.0, 1.0, 3)[0][2] is None


def test_table_io_error_exit_1(tmp_path):
    code, _ = run("table", "--out", str(tmp_path / "missing" / "t.csv"))
    assert code == 1


def test_simulate_path_deterministic(tmp_path):
    args = ("simulate", "--model", "ou", "--mu", "1", "--T", "5", "--dt", "0.01", "--seed", "7", "--validate")
    j1, j2 = tmp_path / "j1.csv", tmp_path / "j2.csv"
    c1, o1 = run(*args, "--jumps-out", str(j1))
    c2, o2 = run(*args, "--jumps-out", str(j2))
    assert c1 == c2 == 0 and o1 == o2 and j1.read_bytes() == j2.read_bytes()
    assert o1.startswith("t,x,r\n") and len(o1.splitlines()) == 502
    assert j1.read_text().startswith("t,r_before,r_after,x\n")
    _, o3 = run(*args[:-2], "8")
    assert o3 != o1


def test_simulate_chain():
    code, out = run("simulate", "--kind", "chain", "--mu", "1", "--n", "50", "--burn-in", "5", "--seed", "3")
    assert code == 0 and out.splitlines()[0] == "k,y,w,eta_mean" and len(out.splitlines()) == 51


def test_seed_from_environment(monkeypatch):
    base = ("simulate", "--mu", "1", "--T", "1", "--dt", "0.01")
    monkeypatch.setenv("RATCHETLAB_SEED", "0x11")
    a = run(*base)[1]
    assert a == run(*base, "--seed", "17")[1]
    monkeypatch.delenv("RATCHETLAB_SEED")
    assert run(*base)[1] == run(*base, "--seed", "0x5EED")[1]
    monkeypatch.setenv("RATCHETLAB_SEED", "zz")
    assert run(*base)[0] == 2


def test_verify_specfun_round_trip(tmp_path):
    p = tmp_path / "v.json"
    code, _ = run("verify", "--suite", "specfun", "--out", str(p))
    rep = json.loads(p.read_text())
    assert code == 0 and rep["pass"] is True and rep["suite"] == "specfun"
    # re-evaluating the pass predicate reproduces the exit code
    assert (0 if all(v["pass"] for v in rep["verdicts"]) else 1) == code
    for v in rep["verdicts"]:
        assert set(v) >= {"test", "params", "estimate", "reference", "tolerance", "pass"}


def test_verify_exit_code_matches_report():
    code, out = run("verify", "--suite", "invariant", "--mu", "1", "--n", "1000", "--seed", "1")
    rep = json.loads(out)
    assert code == (0 if rep["pass"] else 1)


def test_verify_json_independent_of_workers():
    args = ("verify", "--suite", "clt", "--model", "bm", "--mu", "1", "--n", "500", "--T", "5", "--dt", "0.01")
    _, a = run(*args, "--workers", "1")
    _, b = run(*args, "--workers", "2")
    assert a == b


def test_couple_csv_independent_of_workers():
    args = ("couple", "--model", "ou", "--mu", "1", "--n", "6", "--T", "10", "--seed", "5")
    c1, a = run(*args, "--workers", "1")
    c2, b = run(*args, "--workers", "2")
    assert c1 == c2 == 0 and a == b
    assert a.splitlines()[0] == "replica,time,coupled" and len(a.splitlines()) == 7


def test_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": "ou", "mu": 2.0}))
    assert run("speed", "--config", str(cfg))[1] == run("speed", "--model", "ou", "--mu", "2")[1]
    assert run("speed", "--config", str(cfg), "--mu", "1")[1] == run("speed", "--model", "ou", "--mu", "1")[1]
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run("speed", "--config", str(cfg), "--mu", "1")[0] == 2
    cfg.write_text("[1, 2]")
    assert run("speed", "--config", str(cfg), "--mu", "1")[0] == 2


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ratchetlab.cli", "speed", "--mu", "1"], capture_output=True,
                          text=True)
    assert proc.returncode == 0
    assert float(proc.stdout) == pytest.approx(cf.bm_speed(RatchetParams.bm(1.0)), rel=1e-11)
    proc = subprocess.run([sys.executable, "-m", "ratchetlab.cli", "speed", "--model", "ou", "--mu", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
