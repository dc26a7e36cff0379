from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate as si

from ratchetlab.quadrature import Decay, QuadratureError, cell_integrals, gauss_legendre, integrate, \
    integrate_semiinfinite


@pytest.mark.parametrize("f, a, b", [
    (np.sin, 0.0, math.pi),
    (lambda x: np.exp(-x * x), -3.0, 2.0),
    (lambda x: np.sqrt(x), 0.0, 1.0),
    (lambda x: 1.0 / (1.0 + 25 * x * x), -1.0, 1.0),
    (lambda x: np.cos(40 * x), 0.0, 1.0),
])
def test_finite_vs_scipy(f, a, b):
    ref, _ = si.quad(f, a, b, epsabs=1e-13, epsrel=1e-13, limit=500)
    assert abs(integrate(f, a, b) - ref) <= 1e-11 * max(1.0, abs(ref))


def test_reversed_and_empty():
    assert integrate(np.exp, 1.0, 0.0) == pytest.approx(-(math.e - 1.0), rel=1e-14)
    assert integrate(np.exp, 2.0, 2.0) == 0.0


def test_budget_exhausted():
    with pytest.raises(QuadratureError):
        integrate(lambda x: np.sin(1.0 / np.maximum(x, 1e-300)), 0.0, 1.0, max_panels=50)


def test_nonfinite_integrand():
    with pytest.raises(QuadratureError):
        integrate(lambda x: 1.0 / (x - 0.5) * 0 + np.where(x > 0.2, np.nan, 1.0), 0.0, 1.0)


@pytest.mark.parametrize("f, decay, a", [
    (lambda x: np.exp(-x), Decay.EXP, 0.0),
    (lambda x: x ** 2 * np.exp(-0.3 * x), Decay.EXP, 0.0),
    (lambda x: np.exp(-x * x / 2), Decay.GAUSS, 0.0),
    (lambda x: np.exp(-(x - 3) ** 2), "gauss", 1.0),
    (lambda x: np.exp(-2 * x) * (1 + np.sin(x)), "exp", 2.5),
])
def test_semiinfinite_vs_scipy(f, decay, a):
    ref, _ = si.quad(f, a, np.inf, epsabs=1e-14, epsrel=1e-13, limit=500)
    assert abs(integrate_semiinfinite(f, decay, a=a) - ref) <= 1e-10 * max(1.0, abs(ref))


def test_semiinfinite_no_decay():
    with pytest.raises(QuadratureError):
        integrate_semiinfinite(lambda x: np.ones_like(x), Decay.GAUSS)


def test_gauss_legendre_exact_for_polynomials():
    x, w = gauss_legendre(10)
    assert np.sum(w) == pytest.approx(2.0, rel=1e-15)
    assert np.sum(w * x ** 18) == pytest.approx(2.0 / 19.0, rel=1e-13)


def test_cell_integrals():
    nodes = np.array([0.0, 0.1, 0.5, 1.7, 4.0])
    cells = cell_integrals(np.exp, nodes)
    assert np.allclose(cells, np.diff(np.exp(nodes)), rtol=1e-14, atol=0)
