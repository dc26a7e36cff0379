from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate as si
from scipy import special

from ratchetlab import closedform as cf
from ratchetlab.closedform import DegeneracyError, Model, RatchetParams

# frozen from mpmath (40 digits): speeds, and E_x[tau], phi(x), psi(x) of the
# canonical BM basis by mpmath quadrature
BM_SPEED0 = 0.3645055664736135
BM_SPEEDS = [(0.5, 0.1777007993007799), (1.0, 0.08816098357185051), (2.0, 0.029169481230444105),
             (4.0, 0.007737932785957132)]
BM_KILL = [
    (0.0, 0.0, 2.575798633708138, 1.1153535259122478, 1.2298532548920014),
    (0.0, 1.0, 1.9687076423826804, 0.42503366117496016, 1.4417569338855423),
    (1.0, 0.0, 4.887712917891242, 0.42503366117496016, 13.343515104195609),
    (1.0, 2.0, 2.610767964916388, 0.15300278308046797, 108.09133759254593),
    (0.5, 3.0, 0.9688620653025389, 0.05857770932973033, 95.74880253327102),
]
# (mu, gamma, speed, stationary mean inter-jump time), mpmath hyperu
OU_REF = [
    (1.0, 0.5, 0.10633471592222687, 3.8623810879769334),
    (0.3, 0.5, 0.22316397034554405, 2.690322122304469),
    (2.0, 0.5, 0.0586989089378126, 5.183648046637043),
    (0.5, 1.0, 0.2752792900547651, 1.712162228545659),
    (1.5, 2.0, 0.24535082692343602, 1.275804924473988),
]


def test_params_validation():
    with pytest.raises(ValueError):
        RatchetParams.bm(-1.0)
    with pytest.raises(ValueError):
        RatchetParams.ou(1.0, float("nan"))
    p = RatchetParams("ou", 1, 2)
    assert p.model is Model.OU and p.as_dict() == {"model": "ou", "gamma": 1.0, "mu": 2.0}


def test_bm_speed_zero_drift_from_gamma_constants():
    # -Ai'(0) / (2 Ai(0)) with Ai(0) = 3^{-2/3}/Gamma(2/3), Ai'(0) = -3^{-1/3}/Gamma(1/3)
    ref = 3 ** (1 / 3) * math.gamma(2 / 3) / (2 * math.gamma(1 / 3))
    assert abs(cf.bm_speed(RatchetParams.bm(0.0)) - ref) <= 1e-12
    assert abs(ref - BM_SPEED0) <= 1e-15


@pytest.mark.parametrize("mu, v", BM_SPEEDS)
def test_bm_speed_frozen(mu, v):
    assert cf.bm_speed(RatchetParams.bm(mu)) == pytest.approx(v, rel=1e-12)


def test_bm_speed_vs_scipy_airy():
    for mu in np.linspace(0, 6, 25):
        ai, aip, _, _ = special.airy(mu * mu)
        assert cf.bm_speed(RatchetParams.bm(mu)) == pytest.approx(-0.5 * aip / ai - mu / 2, rel=1e-11, abs=1e-14)


def test_bm_speed_large_drift_asymptotics():
    # Ai'/Ai(s) = -sqrt(s) - 1/(4s) + ..., so v ~ 1/(8 mu^2)
    mu = 200.0
    assert cf.bm_speed(RatchetParams.bm(mu)) * 8 * mu * mu == pytest.approx(1.0, rel=1e-3)
    assert cf.bm_speed(RatchetParams.bm(3.0, 0.0)) == 0.0


def test_bm_speed_decreasing_in_mu_and_increasing_in_gamma():
    vs = [cf.bm_speed(RatchetParams.bm(m)) for m in np.linspace(0, 8, 81)]
    assert np.all(np.diff(vs) < 0)
    ws = [cf.bm_speed(RatchetParams.bm(1.0, g)) for g in (0.1, 0.5, 1.0, 5.0)]
    assert np.all(np.diff(ws) > 0)


def test_scaling_identity_random_points():
    rng = np.random.default_rng(20240101)
    for mu, g in zip(rng.uniform(0, 6, 50), rng.uniform(0.01, 10, 50)):
        c = (2 * g) ** (1 / 3)
        lhs = cf.bm_speed(RatchetParams.bm(mu, g))
        rhs = c * cf.bm_speed(RatchetParams.bm(mu / c))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_scaling_map():
    smap = cf.canonicalize_bm(RatchetParams.bm(2.0, 4.0))
    assert smap.mu_canonical == pytest.approx(1.0)
    assert smap.speed(cf.bm_speed(RatchetParams.bm(1.0))) == pytest.approx(
        cf.bm_speed(RatchetParams.bm(2.0, 4.0)), rel=1e-13)
    with pytest.raises(ValueError):
        cf.canonicalize_bm(RatchetParams.bm(1.0, 0.0))


@pytest.mark.parametrize("mu, g, v, eeta", OU_REF)
def test_ou_speed_frozen(mu, g, v, eeta):
    p = RatchetParams.ou(mu, g)
    assert cf.ou_speed(p) == pytest.approx(v, rel=1e-10)
    assert cf.ou_eta_mean(p) == pytest.approx(eeta, rel=1e-10)


def test_ou_speed_errors_and_zero_gamma():
    with pytest.raises(ValueError):
        cf.ou_speed(RatchetParams.ou(0.0))
    assert cf.ou_speed(RatchetParams.ou(1.0, 0.0)) == 0.0
    with pytest.raises(ValueError):
        cf.ou_speed(RatchetParams.bm(1.0))


def test_ou_invariant_density_normalized():
    p = RatchetParams.ou(1.0)
    val, _ = si.quad(lambda z: cf.ou_invariant_density(p, z), 0, np.inf, epsabs=1e-13)
    assert val == pytest.approx(1.0, abs=1e-10)
    # stationary mean inter-jump time is f(0)/gamma
    assert cf.ou_eta_mean(p) == pytest.approx(cf.ou_invariant_density(p, 0.0) / 0.5, rel=1e-12)


def test_bm_invariant_density_normalized_and_mean_gap():
    for mu in (0.0, 1.0, 2.5):
        val, _ = si.quad(lambda z: cf.bm_invariant_density(mu, z), 0, np.inf, epsabs=1e-13)
        assert val == pytest.approx(1.0, abs=1e-10)
        mean, _ = si.quad(lambda z: z * cf.bm_invariant_density(mu, z), 0, np.inf, epsabs=1e-13)
        ey, _ = cf.bm_inv_expectations(mu)
        # the gap after a jump is U times the killing position, so E[Y] is the mean gap
        assert ey == pytest.approx(mean, rel=1e-8)


@pytest.mark.parametrize("mu", [0.0, 0.5, 1.0, 2.0])
def test_inv_expectations_ratio_is_speed(mu):
    ey, eeta = cf.bm_inv_expectations(mu)
    assert abs(ey / eeta - cf.bm_speed(RatchetParams.bm(mu))) <= 1e-9


@pytest.mark.parametrize("mu, x, et, phi, psi", BM_KILL)
def test_bm_basis_and_killing_time_frozen(mu, x, et, phi, psi):
    b = cf.bm_green_basis(mu)
    assert float(b.phi(x)) == pytest.approx(phi, rel=1e-12)
    assert float(b.psi(x)) == pytest.approx(psi, rel=1e-12)
    assert cf.bm_expected_killing_time(mu, x) == pytest.approx(et, rel=1e-10)


@pytest.mark.parametrize("basis", [cf.bm_green_basis(0.0), cf.bm_green_basis(1.3),
                                   cf.ou_green_basis(RatchetParams.ou(1.0)),
                                   cf.ou_green_basis(RatchetParams.ou(0.4, 1.5))],
                         ids=["bm0", "bm1.3", "ou1", "ou0.4"])
def test_green_basis_properties(basis):
    x = np.linspace(0, 6, 61)
    assert np.allclose(basis.wronskian(x), 1.0, atol=1e-9)
    assert abs(float(basis.psi_prime(0.0))) <= 1e-9 * max(1.0, abs(float(basis.psi_prime(3.0))))
    assert np.all(np.diff(basis.phi(x)) < 0) and np.all(basis.phi(x) > 0)
    assert np.all(np.diff(basis.psi(x)[1:]) > 0)
    # symmetry of the Green function
    assert float(basis.green(1.0, 2.5)) == float(basis.green(2.5, 1.0))


def test_green_basis_generator_ode():
    # 1/2 f'' - mu f' = gamma x f for BM (gamma = 1/2)
    mu = 0.8
    b = cf.bm_green_basis(mu)
    h = 1e-4
    for f, fp in ((b.phi, b.phi_prime), (b.psi, b.psi_prime)):
        for x in (0.3, 1.0, 2.5):
            d2 = (fp(x + h) - fp(x - h)) / (2 * h)
            assert 0.5 * d2 - mu * fp(x) == pytest.approx(0.5 * x * f(x), rel=1e-6)


def test_green_basis_rejects_noncanonical():
    with pytest.raises(ValueError):
        cf.green_basis(RatchetParams.bm(1.0, 2.0))
    assert isinstance(cf.green_basis(RatchetParams.ou(1.0)), cf.GreenBasis)
    assert issubclass(DegeneracyError, ArithmeticError)


@pytest.mark.parametrize("mu, x", [(0.0, 0.0), (1.0, 1.0), (2.0, 0.5)])
def test_bm_killing_mass_and_mean(mu, x):
    b = cf.bm_green_basis(mu)
    f = lambda y: cf.killing_density(b, x, y)
    mass = si.quad(f, 0, x)[0] + si.quad(f, x, np.inf, epsabs=1e-13)[0] if x > 0 else si.quad(f, 0, np.inf)[0]
    assert mass == pytest.approx(1.0, abs=1e-8)
    assert cf.killing_mean(b, x) == pytest.approx(cf.bm_killing_mean(mu, x), abs=1e-7)


@pytest.mark.parametrize("mu, g, x", [(1.0, 0.5, 0.0), (1.0, 0.5, 2.0), (0.5, 2.0, 1.0)])
def test_ou_killing_mean_identity(mu, g, x):
    p = RatchetParams.ou(mu, g)
    b = cf.ou_green_basis(p)
    assert cf.killing_mean(b, x) == pytest.approx(cf.ou_killing_mean(p, x), abs=1e-6)


def test_ou_h_ode():
    p = RatchetParams.ou(1.0)
    h = 1e-3
    for z in (0.2, 1.0, 2.0):
        f = lambda t: cf.ou_h(p, t)
        d1 = (f(z + h) - f(z - h)) / (2 * h)
        d2 = (f(z + h) - 2 * f(z) + f(z - h)) / h ** 2
        assert abs(0.5 * d2 + z * d1 - 0.5 * z * f(z)) <= 1e-6 * abs(f(0.0))
    assert float(cf.ou_h_prime(p, 0.5)) == pytest.approx((f(0.5 + h) - f(0.5 - h)) / (2 * h), rel=1e-6)


def test_fig2_single_crossover():
    mus = np.linspace(0, 8, 81)[1:]
    d = np.array([cf.bm_speed(RatchetParams.bm(m)) - cf.ou_speed(RatchetParams.ou(m)) for m in mus])
    assert np.count_nonzero(np.diff(np.sign(d)) != 0) == 1
    assert d[np.argmin(np.abs(mus - 0.3))] > 0
    assert np.all(d[mus >= 1.0] < 0)


def test_speed_dispatch():
    assert cf.speed(RatchetParams.bm(1.0)) == cf.bm_speed(RatchetParams.bm(1.0))
    assert cf.speed(RatchetParams.ou(1.0)) == cf.ou_speed(RatchetParams.ou(1.0))


def test_inv_expectations_zero_drift_values():
    ey, eeta = cf.bm_inv_expectations(0.0)
    ai0, aip0, _, _ = special.airy(0.0)
    assert eeta == pytest.approx(6 * ai0, rel=1e-11)
    assert ey == pytest.approx(-3 * aip0, rel=1e-11)
    assert eeta == pytest.approx(2.13017, abs=1e-5) and ey == pytest.approx(0.77646, abs=1e-5)


def test_green_function_lower_branch_and_mean_bound():
    mu = 1.0
    b = cf.bm_green_basis(mu)
    y = np.array([0.3, 1.0, 4.0])
    assert np.allclose(b.green(0.0, y), float(b.psi(0.0)) * b.phi(y), rtol=1e-14)
    bound0 = float(b.phi(0.0)) * float(b.psi(0.0)) + mu * cf.bm_expected_killing_time(mu, 0.0)
    for x in (0.0, 0.5, 2.0, 5.0):
        assert cf.bm_killing_mean(mu, x) <= x + bound0
