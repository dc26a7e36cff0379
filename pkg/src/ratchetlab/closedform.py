"""Closed-form predictions for the Brownian and Ornstein-Uhlenbeck ratchets.

Conventions
-----------
* BM ratchet: the particle is a Brownian motion with drift ``-mu`` reflected
  at the boundary R; the boundary jumps at rate ``gamma * (X - R)`` to a point
  uniform on ``[R, X]``.  The Green-function machinery is written for the
  canonical rate ``gamma = 1/2``; other rates go through :class:`ScalingMap`.
* OU ratchet: as above with drift ``-mu * (X - R)``.

Between two jumps the gap ``X - R`` is a reflected diffusion killed at rate
``gamma * gap``.  Its generator ``L u = u''/2 + b(x) u' - gamma x u`` has a
decreasing solution ``phi`` and an increasing solution ``psi`` with
``psi'(0) = 0``; the Green function against the speed density ``m`` is
``G(x, y) = phi(max(x, y)) psi(min(x, y))`` when the scale-weighted
Wronskian ``e^{-B(x)} (psi' phi - psi phi')`` equals one, where
``B' = 2 b`` (``B(x) = 2 mu x`` for BM, ``mu x^2`` for OU).
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import specfun
from .quadrature import Decay, integrate, integrate_semiinfinite

__all__ = [
    "Model",
    "RatchetParams",
    "ScalingMap",
    "GreenBasis",
    "DegeneracyError",
    "canonicalize_bm",
    "bm_speed",
    "ou_speed",
    "speed",
    "bm_green_basis",
    "bm_green",
    "bm_expected_killing_time",
    "bm_killing_density",
    "bm_killing_mean",
    "bm_invariant_density",
    "bm_inv_expectations",
    "ou_h",
    "ou_h_prime",
    "ou_green_basis",
    "ou_expected_killing_time",
    "ou_killing_density",
    "ou_killing_mean",
    "ou_invariant_density",
    "ou_eta_mean",
    "expected_killing_time",
    "killing_density",
    "killing_mean",
    "green_basis",
]

ArrayFn = Callable[[np.ndarray], np.ndarray]


class DegeneracyError(ArithmeticError):
    """Raised when a constructed Green basis fails its runtime validation."""


class Model(str, enum.Enum):
    BM = "bm"
    OU = "ou"


@dataclass(frozen=True)
class RatchetParams:
    """Model tag plus jump-rate coefficient ``gamma`` and drift ``mu``."""

    model: Model
    gamma: float = 0.5
    mu: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "mu", float(self.mu))
        if not (math.isfinite(self.gamma) and self.gamma >= 0.0):
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma!r}")
        if not (math.isfinite(self.mu) and self.mu >= 0.0):
            raise ValueError(f"mu must be finite and >= 0, got {self.mu!r}")

    @classmethod
    def bm(cls, mu: float, gamma: float = 0.5) -> "RatchetParams":
        return cls(Model.BM, gamma, mu)

    @classmethod
    def ou(cls, mu: float, gamma: float = 0.5) -> "RatchetParams":
        return cls(Model.OU, gamma, mu)

    def as_dict(self) -> dict:
        return {"model": self.model.value, "gamma": self.gamma, "mu": self.mu}


def _require_ou(params: RatchetParams, need_gamma: bool = False) -> RatchetParams:
    if params.model is not Model.OU:
        raise ValueError("expected OU parameters")
    if params.mu <= 0.0:
        raise ValueError(
            "the OU formulas need mu > 0; for the driftless limit use the BM "
            "ratchet with mu = 0 (bm_speed(RatchetParams.bm(0, gamma)))"
        )
    if need_gamma and params.gamma <= 0.0:
        raise ValueError("this OU quantity needs gamma > 0")
    return params


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingMap:
    """Map from a (gamma, mu) BM ratchet to the canonical gamma = 1/2 one.

    ``X^{gamma,mu}_t = space_scale * X^{1/2,mu_canonical}_{time_scale * t}``.
    """

    mu_canonical: float
    space_scale: float
    time_scale: float

    def speed(self, v_canonical: float) -> float:
        return self.space_scale * self.time_scale * v_canonical

    def length(self, l_canonical):
        return self.space_scale * l_canonical

    def time(self, t_canonical):
        return t_canonical / self.time_scale


def canonicalize_bm(params: RatchetParams) -> ScalingMap:
    """Scaling map of a BM ratchet with gamma > 0 onto gamma = 1/2."""
    if params.model is not Model.BM:
        raise ValueError("canonicalize_bm needs BM parameters")
    if params.gamma <= 0.0:
        raise ValueError("gamma = 0 has no canonical form (the speed is 0)")
    if params.gamma == 0.5:
        return ScalingMap(params.mu, 1.0, 1.0)
    c = (2.0 * params.gamma) ** (1.0 / 3.0)
    return ScalingMap(params.mu / c, 1.0 / c, c * c)


# ---------------------------------------------------------------------------
# speeds
# ---------------------------------------------------------------------------


def bm_speed(params: RatchetParams) -> float:
    """Speed of the Brownian ratchet.

    ``v = -(gamma^{1/3} / 2^{2/3}) Ai'(s)/Ai(s) - mu/2`` with
    ``s = (2 gamma)^{-2/3} mu^2``; exactly 0 for gamma = 0.  The ratio
    Ai'/Ai is evaluated from exponentially scaled Airy functions, so any
    argument s >= 0 is allowed.
    """
    if params.model is not Model.BM:
        raise ValueError("bm_speed needs BM parameters")
    g, mu = params.gamma, params.mu
    if g == 0.0:
        return 0.0
    c = (2.0 * g) ** (1.0 / 3.0)
    s = (mu / c) ** 2
    return -0.5 * c * float(specfun.airy_log_derivative(s)) - 0.5 * mu


def _ou_a0(params: RatchetParams) -> float:
    return params.gamma ** 2 / (4.0 * params.mu ** 3)


def _ou_p(params: RatchetParams, x):
    mu, g = params.mu, params.gamma
    return g / mu ** 1.5 + math.sqrt(mu) * np.asarray(x, dtype=float)


def _ou_log_h(params: RatchetParams, x):
    """Return (m, L, m_d, L_d) with h = m e^L and h' = m_d e^{L_d}."""
    mu, g = params.mu, params.gamma
    x = np.asarray(x, dtype=float)
    a = 0.5 - _ou_a0(params)
    p = _ou_p(params, x)
    z = p * p
    um, ul = specfun.tricomi_u_scaled(a, 0.5, z)
    pre = -g * x / mu - mu * x * x
    L = pre + ul
    # h' = e^{pre} [(-g/mu - 2 mu x) U(a, 1/2, z) + 2 sqrt(mu) p U'(a, 1/2, z)]
    # with U'(a, 1/2, z) = -a U(a + 1, 3/2, z)
    t1 = (-g / mu - 2.0 * mu * x) * um
    zz = np.atleast_1d(z)
    vm = np.zeros_like(zz)
    vl = np.zeros_like(zz)
    pv = np.broadcast_to(np.atleast_1d(p), zz.shape).copy()
    pos = zz > 0
    if np.any(pos):
        vm[pos], vl[pos] = specfun.tricomi_u_scaled(a + 1.0, 1.5, zz[pos])
    # p U(a+1, 3/2, p^2) -> sqrt(pi)/Gamma(a+1) as p -> 0
    vm[~pos] = math.sqrt(math.pi) * specfun.rgamma(a + 1.0)
    pv[~pos] = 1.0
    if np.ndim(z) == 0:
        vm, vl, pv = float(vm[0]), float(vl[0]), float(pv[0])
    t2 = 2.0 * math.sqrt(mu) * pv * (-a) * vm
    # combine on the larger log-scale
    lmax = np.maximum(ul, vl)
    md = t1 * np.exp(ul - lmax) + t2 * np.exp(vl - lmax)
    return um, L, md, pre + lmax


def ou_h(params: RatchetParams, x):
    """``h(x) = exp(-gamma x/mu - mu x^2) U(1/2 - gamma^2/(4 mu^3), 1/2, p(x)^2)``."""
    _require_ou(params)
    m, L, _, _ = _ou_log_h(params, x)
    out = np.asarray(m) * np.exp(L)
    return float(out) if np.ndim(out) == 0 else out


def ou_h_prime(params: RatchetParams, x):
    """Analytic derivative of :func:`ou_h` (chain rule plus dU/dz = -a U(a+1, b+1, z))."""
    _require_ou(params)
    _, _, md, Ld = _ou_log_h(params, x)
    out = np.asarray(md) * np.exp(Ld)
    return float(out) if np.ndim(out) == 0 else out


def _ou_h_normalized(params: RatchetParams) -> ArrayFn:
    """h(x)/h(0), computed on log scales to avoid overflow."""
    m0, L0, _, _ = _ou_log_h(params, 0.0)

    def f(x):
        m, L, _, _ = _ou_log_h(params, x)
        return m / m0 * np.exp(L - L0)

    return f


@functools.lru_cache(maxsize=256)
def _ou_h_integral_rel(params: RatchetParams) -> float:
    """Integral of h(x)/h(0) over [0, infinity)."""
    return integrate_semiinfinite(_ou_h_normalized(params), Decay.GAUSS, scale=1.0 / math.sqrt(params.mu))


def _ou_speed_formula(params: RatchetParams) -> float:
    """The h-based speed formula evaluated without special-casing gamma = 0."""
    m0, L0, md0, Ld0 = _ou_log_h(params, 0.0)
    ratio = md0 / m0 * math.exp(Ld0 - L0)  # h'(0)/h(0)
    return float(-0.5 * ratio - params.mu * _ou_h_integral_rel(params))


def ou_speed(params: RatchetParams) -> float:
    """Speed of the OU ratchet, ``-h'(0)/(2 h(0)) - mu * int h / h(0)``.

    Exactly 0 for gamma = 0.  Raises ``ValueError`` for mu = 0.
    """
    _require_ou(params)
    if params.gamma == 0.0:
        return 0.0
    return _ou_speed_formula(params)


def speed(params: RatchetParams) -> float:
    """Dispatch to :func:`bm_speed` or :func:`ou_speed`."""
    return bm_speed(params) if params.model is Model.BM else ou_speed(params)


# ---------------------------------------------------------------------------
# Green bases
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GreenBasis:
    """Fundamental solutions of the killed generator and the measures.

    ``Phi = weight * phi`` and ``Psi = weight * psi`` where ``weight`` is
    ``e^{-B}``; ``m = 2 weight`` is the speed density and ``k`` the killing
    density (``gamma * y * m(y)``).
    """

    phi: ArrayFn
    psi: ArrayFn
    phi_prime: ArrayFn
    psi_prime: ArrayFn
    weight: ArrayFn
    killing_rate: float
    decay: Decay
    length_scale: float
    label: str = ""

    def Phi(self, x):
        return self.weight(x) * self.phi(x)

    def Psi(self, x):
        return self.weight(x) * self.psi(x)

    def m(self, y):
        return 2.0 * self.weight(y)

    def k(self, y):
        y = np.asarray(y, dtype=float)
        return self.killing_rate * y * self.m(y)

    def wronskian(self, x):
        """Scale-weighted Wronskian ``e^{-B(x)} (psi' phi - psi phi')``."""
        return self.weight(x) * (self.psi_prime(x) * self.phi(x) - self.psi(x) * self.phi_prime(x))

    def green(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        hi = np.maximum(x, y)
        lo = np.minimum(x, y)
        return self.phi(hi) * self.psi(lo)


def _arr(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


def _ret(v: np.ndarray, like):
    return float(v[0]) if np.ndim(like) == 0 else v.reshape(np.shape(like))


@functools.lru_cache(maxsize=64)
def bm_green_basis(mu: float) -> GreenBasis:
    """Green basis of killed reflected BM with drift -mu at gamma = 1/2.

    ``phi = pi e^{mu x} Ai(mu^2 + x)``,
    ``psi = e^{mu x} (C Ai(mu^2 + x) + Bi(mu^2 + x))`` with ``C`` chosen so
    ``psi'(0) = 0``.  Everything is evaluated with exponentially scaled Airy
    functions.
    """
    mu = float(mu)
    if not (math.isfinite(mu) and mu >= 0.0):
        raise ValueError("mu must be >= 0")
    s0 = mu * mu
    q0 = specfun.airy_scaled(s0)
    zeta0 = (2.0 / 3.0) * s0 ** 1.5
    denom = mu * q0.ai + q0.ai_prime
    if denom == 0.0:  # pragma: no cover - negative by theory
        raise DegeneracyError("mu Ai(mu^2) + Ai'(mu^2) vanished")
    cs = -(mu * q0.bi + q0.bi_prime) / denom  # C = cs * e^{2 zeta0}

    def parts(x):
        x = _arr(x)
        if np.any(x < 0):
            raise ValueError("x must be >= 0")
        s = s0 + x
        q = specfun.airy_scaled(s)
        zeta = (2.0 / 3.0) * s ** 1.5
        return x, q, zeta

    def phi(x):
        xa, q, zeta = parts(x)
        return _ret(np.pi * np.exp(mu * xa - zeta) * q.ai, x)

    def phi_prime(x):
        xa, q, zeta = parts(x)
        return _ret(np.pi * np.exp(mu * xa - zeta) * (mu * q.ai + q.ai_prime), x)

    def psi(x):
        xa, q, zeta = parts(x)
        e2 = np.exp(2.0 * (zeta0 - zeta))
        return _ret(np.exp(mu * xa + zeta) * (cs * q.ai * e2 + q.bi), x)

    def psi_prime(x):
        xa, q, zeta = parts(x)
        e2 = np.exp(2.0 * (zeta0 - zeta))
        val = cs * (mu * q.ai + q.ai_prime) * e2 + mu * q.bi + q.bi_prime
        return _ret(np.exp(mu * xa + zeta) * val, x)

    def weight(x):
        return np.exp(-2.0 * mu * np.asarray(x, dtype=float))

    scale = 1.0 if mu < 1.0 else 1.0 / mu
    return GreenBasis(phi, psi, phi_prime, psi_prime, weight, 0.5, Decay.EXP, scale, f"bm(mu={mu})")


def _ou_even_parts(params: RatchetParams, x: np.ndarray, odd: bool):
    """psi_1 and its derivative (without the e^{-gamma x/mu} factor applied)."""
    mu, g = params.mu, params.gamma
    a0 = _ou_a0(params)
    p = _ou_p(params, x)
    z = p * p
    sq = math.sqrt(mu)
    if not odd:
        m0 = specfun.kummer_m(-a0, 0.5, z)
        m1 = specfun.kummer_m(1.0 - a0, 1.5, z)
        val = -m0
        der = -(-(g / mu) * m0 + 2.0 * sq * p * (-a0 / 0.5) * m1)
    else:
        m0 = specfun.kummer_m(0.5 - a0, 1.5, z)
        m1 = specfun.kummer_m(1.5 - a0, 2.5, z)
        val = p * m0
        der = -(g / mu) * p * m0 + sq * m0 + p * 2.0 * sq * p * ((0.5 - a0) / 1.5) * m1
    return val, der


def _ou_phi_parts(params: RatchetParams, x: np.ndarray):
    mu, g = params.mu, params.gamma
    a0 = _ou_a0(params)
    p = _ou_p(params, x)
    z = p * p
    um, ul = specfun.tricomi_u_scaled(-a0, 0.5, z)
    vm, vl = specfun.tricomi_u_scaled(1.0 - a0, 1.5, z)
    val = um * np.exp(ul)
    # dU/dz(-a0, 1/2, z) = a0 U(1 - a0, 3/2, z)
    der = -(g / mu) * val + 2.0 * math.sqrt(mu) * p * a0 * vm * np.exp(vl)
    return val, der


@functools.lru_cache(maxsize=64)
def ou_green_basis(params: RatchetParams) -> GreenBasis:
    """Green basis of the killed reflected OU process (drift -mu x, rate gamma x).

    ``phi = e^{-gamma x/mu} U(-a0, 1/2, p^2)`` with ``a0 = gamma^2/(4 mu^3)``;
    ``psi`` is ``psi_1 - (psi_1'(0)/phi'(0)) phi`` rescaled to unit
    scale-weighted Wronskian, where ``psi_1 = -e^{-gamma x/mu} M(-a0, 1/2, p^2)``
    (or ``e^{-gamma x/mu} p M(1/2 - a0, 3/2, p^2)`` when a0 is within 0.02
    of a positive integer and the even solution is proportional to phi).
    The conditions psi'(0) = 0, psi > 0 increasing, phi > 0 decreasing and
    a unit Wronskian are validated at construction time.

    Raises
    ------
    DegeneracyError
        If phi'(0) vanishes or the validation fails.
    """
    _require_ou(params, need_gamma=True)
    mu, g = params.mu, params.gamma
    a0 = _ou_a0(params)
    odd = a0 >= 0.5 and abs(a0 - round(a0)) < 0.02

    phi0, dphi0 = (float(v[0]) for v in _ou_phi_parts(params, _arr(0.0)))
    if dphi0 == 0.0 or not math.isfinite(dphi0):
        raise DegeneracyError(f"phi'(0) = {dphi0!r} for {params}")
    p10, dp10 = (float(v[0]) for v in _ou_even_parts(params, _arr(0.0), odd))
    c = dp10 / dphi0

    def raw_phi(x):
        xa = _arr(x)
        v, d = _ou_phi_parts(params, xa)
        e = np.exp(-g * xa / mu)
        return v * e, d * e

    def raw_psi(x):
        xa = _arr(x)
        v1, d1 = _ou_even_parts(params, xa, odd)
        v0, d0 = _ou_phi_parts(params, xa)
        e = np.exp(-g * xa / mu)
        return (v1 - c * v0) * e, (d1 - c * d0) * e

    # normalize where phi is O(1)
    grid = np.linspace(0.0, 4.0 / math.sqrt(mu), 65)
    ph_g, dph_g = raw_phi(grid)
    with np.errstate(divide="ignore"):
        xstar = float(grid[np.argmin(np.abs(np.log(np.abs(ph_g))))])
    f, df = (float(v[0]) for v in raw_phi(xstar))
    s, ds = (float(v[0]) for v in raw_psi(xstar))
    w = math.exp(-mu * xstar * xstar) * (ds * f - s * df)
    if w == 0.0 or not math.isfinite(w):
        raise DegeneracyError(f"vanishing Wronskian for {params}")

    def phi(x):
        return _ret(raw_phi(x)[0], x)

    def phi_prime(x):
        return _ret(raw_phi(x)[1], x)

    def psi(x):
        return _ret(raw_psi(x)[0] / w, x)

    def psi_prime(x):
        return _ret(raw_psi(x)[1] / w, x)

    def weight(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-mu * x * x)

    basis = GreenBasis(phi, psi, phi_prime, psi_prime, weight, g, Decay.GAUSS,
                       1.0 / math.sqrt(mu), f"ou(mu={mu}, gamma={g})")
    _validate_basis(basis, grid)
    return basis


def _validate_basis(basis: GreenBasis, grid: np.ndarray):
    ph = basis.phi(grid)
    ps = basis.psi(grid)
    dps0 = float(basis.psi_prime(0.0))
    bad = []
    if not np.all(np.isfinite(ph)) or not np.all(np.isfinite(ps)):
        bad.append("non-finite values")
    if np.any(ph <= 0) or np.any(np.diff(ph) >= 0):
        bad.append("phi not positive decreasing")
    if np.any(ps <= 0) or np.any(np.diff(ps[1:]) <= 0):
        bad.append("psi not positive increasing")
    scale = max(1.0, abs(float(basis.psi_prime(grid[-1]))))
    if abs(dps0) > 1e-8 * scale:
        bad.append(f"psi'(0) = {dps0!r}")
    wr = basis.wronskian(grid[::8])
    if np.any(np.abs(wr - 1.0) > 1e-7):
        bad.append("Wronskian not 1")
    if bad:
        raise DegeneracyError(f"{basis.label}: " + "; ".join(bad))


def green_basis(params: RatchetParams) -> GreenBasis:
    """BM basis at the canonical mu of ``params`` or the OU basis."""
    if params.model is Model.BM:
        if params.gamma != 0.5:
            raise ValueError("the BM Green basis is canonical (gamma = 1/2); use canonicalize_bm")
        return bm_green_basis(params.mu)
    return ou_green_basis(params)


def bm_green(mu: float, x: float, y: float) -> float:
    """Green function G(x, y) of killed reflected BM (gamma = 1/2)."""
    return bm_green_basis(mu).green(x, y)


# ---------------------------------------------------------------------------
# killing functionals (basis-generic)
# ---------------------------------------------------------------------------


def _int_to(f: ArrayFn, x: float) -> float:
    return integrate(f, 0.0, x, tol=1e-13, initial_panels=max(2, int(math.ceil(x)))) if x > 0 else 0.0


def _int_from(f: ArrayFn, basis: GreenBasis, x: float) -> float:
    return integrate_semiinfinite(f, basis.decay, a=x, tol=1e-12, scale=basis.length_scale)


def expected_killing_time(basis: GreenBasis, x: float) -> float:
    """``E_x[tau] = phi(x) int_0^x psi m + psi(x) int_x^inf phi m``."""
    x = float(x)
    lower = _int_to(lambda y: basis.psi(y) * basis.m(y), x)
    upper = _int_from(lambda y: basis.phi(y) * basis.m(y), basis, x)
    return float(basis.phi(x)) * lower + float(basis.psi(x)) * upper


def killing_density(basis: GreenBasis, x: float, y):
    """Density of the position at killing time, ``G(x, y) k(y)``."""
    return basis.green(x, y) * basis.k(y)


def killing_mean(basis: GreenBasis, x: float) -> float:
    """Mean killing position ``int y G(x, y) k(y) dy`` by quadrature."""
    x = float(x)
    lower = _int_to(lambda y: y * basis.psi(y) * basis.k(y), x)
    upper = _int_from(lambda y: y * basis.phi(y) * basis.k(y), basis, x)
    return float(basis.phi(x)) * lower + float(basis.psi(x)) * upper


def bm_expected_killing_time(mu: float, x: float) -> float:
    """E_x of the killing time of reflected BM (drift -mu, gamma = 1/2)."""
    return expected_killing_time(bm_green_basis(mu), x)


def bm_killing_density(mu: float, x: float, y):
    """Density at y of the killing position started at x (gamma = 1/2)."""
    return killing_density(bm_green_basis(mu), x, y)


def bm_killing_mean(mu: float, x: float) -> float:
    """Closed-form mean killing position ``x + phi(x) psi(0) - mu E_x[tau]``."""
    b = bm_green_basis(mu)
    return float(x) + float(b.phi(x)) * float(b.psi(0.0)) - mu * bm_expected_killing_time(mu, x)


def ou_expected_killing_time(params: RatchetParams, x: float) -> float:
    return expected_killing_time(ou_green_basis(params), x)


def ou_killing_density(params: RatchetParams, x: float, y):
    return killing_density(ou_green_basis(params), x, y)


def ou_killing_mean(params: RatchetParams, x: float) -> float:
    """Closed-form mean killing position ``x - mu/gamma + phi(x) Psi(0)``."""
    b = ou_green_basis(params)
    return float(x) - params.mu / params.gamma + float(b.phi(x)) * float(b.Psi(0.0))


# ---------------------------------------------------------------------------
# invariant densities
# ---------------------------------------------------------------------------


def _bm_phi_shape(mu: float) -> ArrayFn:
    """``e^{-mu z} Ai(mu^2 + z)``, the unnormalized invariant density."""
    s0 = mu * mu

    def f(z):
        z = np.asarray(z, dtype=float)
        s = s0 + z
        q = specfun.airy_scaled(s)
        return np.exp(-mu * z - (2.0 / 3.0) * s ** 1.5) * q.ai

    return f


@functools.lru_cache(maxsize=128)
def _bm_k_prime(mu: float) -> float:
    return integrate_semiinfinite(_bm_phi_shape(mu), Decay.EXP, tol=1e-13)


def bm_invariant_density(mu: float, z):
    """Invariant density of the gap chain, ``Phi(z) / int Phi`` (gamma = 1/2)."""
    mu = float(mu)
    out = _bm_phi_shape(mu)(_arr(z)) / _bm_k_prime(mu)
    return _ret(out, z)


def bm_inv_expectations(mu: float) -> tuple[float, float]:
    """Stationary means of the gap after a jump and of the inter-jump time.

    With ``K' = int_0^inf e^{-mu x} Ai(mu^2 + x) dx``:
    ``E[Y] = -(mu Ai(mu^2) + Ai'(mu^2)) / K'`` and ``E[eta] = 2 Ai(mu^2) / K'``
    (gamma = 1/2).  Their ratio is the speed.
    """
    mu = float(mu)
    q = specfun.airy_scaled(mu * mu)
    e = math.exp(-(2.0 / 3.0) * mu ** 3)
    kp = _bm_k_prime(mu)
    ey = -(mu * q.ai + q.ai_prime) * e / kp
    eeta = 2.0 * q.ai * e / kp
    return ey, eeta


def ou_invariant_density(params: RatchetParams, z):
    """Normalized ``h``: the invariant density of the OU gap chain."""
    _require_ou(params, need_gamma=True)
    out = _ou_h_normalized(params)(_arr(z)) / _ou_h_integral_rel(params)
    return _ret(out, z)


def ou_eta_mean(params: RatchetParams) -> float:
    """Stationary mean inter-jump time ``f_nu(0) / gamma`` of the OU ratchet."""
    _require_ou(params, need_gamma=True)
    return 1.0 / (_ou_h_integral_rel(params) * params.gamma)
