"""The ten acceptance criteria at their stated tolerances.

Each test records one PASS/FAIL line (printed in the terminal summary by
conftest.py) and then asserts the criterion.  Nothing here is tuned to
pass: seeds are the package default 0x5EED and the tolerances are the
stated ones.
"""
from __future__ import annotations

import io
import json
import math
import time

import numpy as np
import pytest

from ratchetlab import closedform as cf
from ratchetlab.cli import main, speed_table
from ratchetlab.closedform import RatchetParams
from ratchetlab.verify import (clt_suite, couple_suite, density_checks, invariant_suite, killing_suite,
                               path_lln_verdict, specfun_suite, speed_suite)

SEED = 0x5EED
RESULTS: dict[int, tuple[bool, str]] = {}


def record(k: int, ok: bool, line: str) -> None:
    RESULTS[k] = (bool(ok), line)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {line}")


def fails(verdicts):
    return [f"{v.test}{json.dumps(v.params, sort_keys=True)}" for v in verdicts if not v.passed]


def test_criterion_01_special_function_identities():
    t0 = time.perf_counter()
    vs = specfun_suite()
    dt = time.perf_counter() - t0
    ok = not fails(vs) and dt < 10.0
    worst = {v.test: v.estimate for v in vs}
    record(1, ok, f"{len(vs)} identities, runtime {dt:.1f}s (< 10s); "
                  f"wronskian {worst['airy_wronskian']:.1e}, int Ai - 1/3 {abs(worst['airy_integral'] - 1/3):.1e}, "
                  f"kummer {worst['kummer_transformation']:.1e}, recurrence {worst['tricomi_recurrence']:.1e}, "
                  f"U x^a - 1 at 200 {worst['tricomi_asymptotic']:.1e}; failing: {fails(vs) or 'none'}")
    assert ok


def test_criterion_02_bm_speed_closed_form():
    t0 = time.perf_counter()
    # Ai(0) and Ai'(0) from Gamma constants evaluated by the standard library
    ai0 = 3 ** (-2 / 3) / math.gamma(2 / 3)
    aip0 = -(3 ** (-1 / 3)) / math.gamma(1 / 3)
    ref = -aip0 / (2 * ai0)
    v0 = cf.bm_speed(RatchetParams.bm(0.0))
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for mu, g in zip(rng.uniform(0.0, 8.0, 50), rng.uniform(0.01, 20.0, 50)):
        c = (2 * g) ** (1 / 3)
        lhs = cf.bm_speed(RatchetParams.bm(mu, g))
        rhs = c * cf.bm_speed(RatchetParams.bm(mu / c))
        worst = max(worst, abs(lhs - rhs))
    dt = time.perf_counter() - t0
    ok = abs(v0 - ref) <= 1e-10 and worst <= 1e-12 and dt < 1.0
    record(2, ok, f"bm_speed(0, 1/2) = {v0!r} vs {ref!r} (diff {abs(v0 - ref):.1e}); "
                  f"scaling max diff {worst:.1e} over 50 points; runtime {dt:.2f}s")
    assert ok


def test_criterion_03_exact_sampler_lln():
    t0 = time.perf_counter()
    vs = []
    for p in (RatchetParams.bm(0.0), RatchetParams.bm(1.0), RatchetParams.ou(1.0)):
        vs += speed_suite(p, 100_000, SEED)
    dt = time.perf_counter() - t0
    ok = not fails(vs) and dt < 120.0
    parts = [f"{v.params['model']} mu={v.params['mu']:g}: {v.estimate['mean']:.5f} vs {v.reference:.5f} "
             f"(|d|/se {abs(v.estimate['mean'] - v.reference) / v.estimate['stderr']:.2f})" for v in vs]
    record(3, ok, "; ".join(parts) + f"; runtime {dt:.0f}s (< 120s)")
    assert ok


def test_criterion_04_path_lln():
    t0 = time.perf_counter()
    vs = [path_lln_verdict(p, 200, SEED, 500.0, 1e-3, 0.02)
          for p in (RatchetParams.bm(0.0), RatchetParams.bm(1.0), RatchetParams.ou(1.0))]
    dt = time.perf_counter() - t0
    ok = not fails(vs) and dt < 600.0
    parts = [f"{v.params['model']} mu={v.params['mu']:g}: {v.estimate['mean']:.4f} vs {v.reference:.4f} "
             f"(tol {v.tolerance:.4f})" for v in vs]
    record(4, ok, "; ".join(parts) + f"; runtime {dt:.0f}s (< 600s)")
    assert ok


def test_criterion_05_clt():
    t0 = time.perf_counter()
    parts, ok = [], True
    for p in (RatchetParams.bm(1.0), RatchetParams.ou(1.0)):
        ks, sig = clt_suite(p, 2000, SEED, 500.0, 1e-3)
        ok &= ks.passed and sig.passed
        parts.append(f"{p.model.value}: KS p={ks.estimate['p_value']:.4f} "
                     f"[{'ok' if ks.passed else 'below 0.01'}; centred on own mean p="
                     f"{ks.details['p_value_own_mean']:.2f}, mean offset {ks.details['mean_offset']:.3f}], "
                     f"sigma regen {sig.estimate['sigma_regen']:.4f} vs empirical {sig.reference:.4f} "
                     f"(rel {sig.estimate['rel_diff']:.3f})")
    dt = time.perf_counter() - t0
    ok &= dt < 1800.0
    record(5, ok, "; ".join(parts) + f"; runtime {dt:.0f}s")
    assert ok


def test_criterion_06_invariant_density():
    vs = []
    for p in (RatchetParams.bm(0.0), RatchetParams.bm(1.0), RatchetParams.ou(1.0)):
        vs += invariant_suite(p, 100_000, SEED)
    ks = [f"{v.params['model']} mu={v.params['mu']:g} D={v.estimate:.4f}" for v in vs if v.test == "invariant_ks"]
    ode = {v.test: v.estimate for v in vs if v.test in ("f_nu_ode", "h_ode", "h_second_derivative_zero")}
    ok = not fails(vs)
    record(6, ok, f"KS {', '.join(ks)} (<= 0.02); f_nu ODE residual {ode['f_nu_ode']:.1e}, "
                  f"h''(0) {ode['h_second_derivative_zero']:.1e}; failing: {fails(vs) or 'none'}")
    assert ok


def test_criterion_07_killing_identities():
    vs = killing_suite()
    n_bm = sum(1 for v in vs if v.test == "killing_mean_identity" and v.params["model"] == "bm")
    n_ou = sum(1 for v in vs if v.test == "killing_mean_identity" and v.params["model"] == "ou")
    mass = max(abs(v.estimate - 1.0) for v in vs if v.test == "killing_mass")
    mean = max(abs(v.estimate - v.reference) for v in vs if v.test == "killing_mean_identity")
    ratio = max(abs(v.estimate - v.reference) for v in vs if v.test == "inv_expectation_ratio")
    ok = not fails(vs) and n_bm == 6 and n_ou == 6
    record(7, ok, f"{n_bm} BM + {n_ou} OU points; mass err {mass:.1e}, mean identity err {mean:.1e}, "
                  f"E[Y]/E[eta] - v {ratio:.1e}")
    assert ok


def test_criterion_08_speed_table_crossover():
    rows = speed_table(0.5, 0.0, 8.0, 81)
    mus = np.array([r[0] for r in rows[1:]])
    d = np.array([r[1] - r[2] for r in rows[1:]])
    changes = int(np.count_nonzero(np.diff(np.sign(d)) != 0))
    i03 = int(np.argmin(np.abs(mus - 0.3)))
    k = int(np.argmax(d < 0))
    ok = d[i03] > 0 and np.all(d[mus >= 1.0] < 0) and changes == 1
    record(8, ok, f"v_bm - v_ou at mu=0.3: {d[i03]:.4f}; max over mu>=1: {d[mus >= 1.0].max():.2e}; "
                  f"{changes} sign change, between mu={mus[k - 1]:.1f} and {mus[k]:.1f}")
    assert ok


def test_criterion_09_coupling_bounds():
    bm = couple_suite(RatchetParams.bm(1.0), 2000, SEED, 1.0, 0.0, 0.3)
    ou = couple_suite(RatchetParams.ou(1.0), 2000, SEED, 1.0, 0.0, t_values=(0.5, 1.0, 2.0))
    b = bm[0]
    parts = [f"BM E[e^(0.3T)] = {b.estimate['mean']:.4f} +- {b.estimate['stderr']:.4f} vs bound {b.reference:.4f}"]
    for v in ou:
        parts.append(f"OU t={v.params['t']:g}: P[T>t] = {v.estimate['mean']:.4f} vs printed Erf bound "
                     f"{v.reference:.4f} [{'ok' if v.passed else 'exceeded'}]; exact hitting tail "
                     f"{v.details['hitting_tail_exact']:.4f} [{'ok' if v.details['within_exact_bound'] else 'exceeded'}]")
    ok = not fails(bm + ou)
    record(9, ok, "; ".join(parts))
    assert ok


def _cli(*argv):
    out = io.StringIO()
    code = main(list(argv), stdout=out)
    return code, out.getvalue()


def test_criterion_10_determinism(tmp_path):
    commands = [
        ("table",),
        ("speed", "--model", "ou", "--mu", "1", "--format", "json"),
        ("simulate", "--model", "bm", "--mu", "1", "--T", "20", "--seed", "11"),
        ("simulate", "--model", "ou", "--mu", "1", "--T", "20", "--seed", "11", "--jumps-out", "JUMPS"),
        ("simulate", "--kind", "chain", "--model", "ou", "--mu", "1", "--n", "2000", "--seed", "11"),
        ("verify", "--suite", "speed", "--mu", "1", "--n", "2000", "--paths", "4", "--T", "20"),
        ("verify", "--suite", "clt", "--model", "ou", "--mu", "1", "--n", "500", "--T", "10"),
        ("couple", "--model", "bm", "--mu", "1", "--n", "20", "--T", "20"),
        ("couple", "--model", "ou", "--mu", "1", "--n", "20", "--T", "20"),
    ]
    bad = []
    for cmd in commands:
        outs = []
        for i, workers in enumerate(("1", "1", "2")):
            argv = [a if a != "JUMPS" else str(tmp_path / f"j{i}.csv") for a in cmd]
            extra = [] if cmd[0] in ("table", "speed") else ["--workers", workers]
            code, out = _cli(*argv, *extra)
            jumps = (tmp_path / f"j{i}.csv").read_bytes() if "JUMPS" in cmd else b""
            outs.append((code, out.encode(), jumps))
        if not (outs[0] == outs[1] == outs[2]):
            bad.append(" ".join(cmd))
    ok = not bad
    record(10, ok, f"{len(commands)} commands rerun twice with 1 worker and once with 2: "
                   f"{'byte-identical' if ok else 'differences in ' + '; '.join(bad)}")
    assert ok
