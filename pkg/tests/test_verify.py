from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import special

from ratchetlab.closedform import RatchetParams
from ratchetlab.verify import (MIN_N, SUITES, couple_suite, density_checks, invariant_cdf, ou_hitting_tail,
                               ou_hitting_tail_quoted, run_suite)


def test_hitting_tail_small_drift_limit():
    # as mu -> 0 the OU hitting tail becomes the Brownian erf(x / sqrt(2 t))
    for t in (0.5, 1.0, 3.0):
        assert float(ou_hitting_tail(1.3, 1e-9, t)) == pytest.approx(special.erf(1.3 / math.sqrt(2 * t)), rel=1e-6)


def test_hitting_tail_time_change():
    # X_t = e^{-mu t}(x + W(tau)), tau = (e^{2 mu t} - 1)/(2 mu): survival is erf(x / sqrt(2 tau))
    mu, x, t = 0.7, 0.9, 1.4
    tau = math.expm1(2 * mu * t) / (2 * mu)
    assert float(ou_hitting_tail(x, mu, t)) == pytest.approx(special.erf(x / math.sqrt(2 * tau)), rel=1e-13)
    # the printed form differs by a factor sqrt(2 mu) inside erf; equal only at mu = 1/2
    assert float(ou_hitting_tail_quoted(x, 0.5, t)) == pytest.approx(float(ou_hitting_tail(x, 0.5, t)), rel=1e-13)
    assert float(ou_hitting_tail_quoted(x, 1.0, t)) < float(ou_hitting_tail(x, 1.0, t))


def test_invariant_cdf_shape():
    cdf = invariant_cdf(RatchetParams.ou(1.0))
    z = np.linspace(0, 10, 101)
    F = cdf(z)
    assert F[0] == 0.0 and F[-1] == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(F) >= 0)


def test_density_checks_pass():
    for p in (RatchetParams.bm(0.0), RatchetParams.bm(2.0, 3.0), RatchetParams.ou(1.0), RatchetParams.ou(0.5, 2.0)):
        assert all(v.passed for v in density_checks(p)), p


def test_couple_suite_structure():
    vs = couple_suite(RatchetParams.ou(1.0), 100, 1, t_values=(1.0, 2.0), horizon=20.0)
    assert [v.params["t"] for v in vs] == [1.0, 2.0]
    assert all("hitting_tail_exact" in v.details for v in vs)
    with pytest.raises(ValueError):
        couple_suite(RatchetParams.bm(0.5), 100, 1, alpha=0.3)


def test_run_suite_dispatch():
    assert set(MIN_N) == set(SUITES)
    with pytest.raises(ValueError):
        run_suite("speed", None, 1000, 1)
    with pytest.raises(ValueError):
        run_suite("bogus", RatchetParams.bm(1.0), 1000, 1)
    vs = run_suite("speed", RatchetParams.bm(1.0), 5000, 1, paths=3, horizon=10.0)
    assert [v.test for v in vs] == ["chain_speed", "path_lln"]
