"""Exact sampling of the gap chain at jump times.

Starting from gap ``x``, the killed reflected diffusion is killed at a
position ``Z`` with density ``G(x, z) k(z)``.  The boundary then jumps to a
uniform point, giving the new gap ``Y = U Z`` and boundary increment
``W = Z - Y``.  The inter-jump time is accounted through its conditional
mean ``E_x[tau]`` (a Rao-Blackwellization), so the chain is free of any
time discretization.

The killing-position CDF factorizes as

    F_x(z) = phi(x) A(min(z, x)) + psi(x) (B(x) - B(z)) 1{z > x}

with ``A(z) = int_0^z psi k`` and ``B(z) = int_z^inf phi k``.  ``A`` and
``B`` are tabulated once per parameter set on 2048 nodes (geometric near 0),
interpolated with cubic splines and inverted with monotone cubic (PCHIP)
interpolation.
"""
from __future__ import annotations

import functools
import io
import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.interpolate import CubicSpline, PchipInterpolator

from .closedform import (GreenBasis, Model, RatchetParams, ScalingMap, bm_green_basis,
                         canonicalize_bm, ou_green_basis)
from .mcstats import Estimate, ratio_batch_means
from .pathsim import RatchetPath, fmt
from .quadrature import cell_integrals, integrate
from .seeding import DEFAULT_SEED, Stream, stream

__all__ = [
    "TabulationError",
    "KillingKernel",
    "JumpSample",
    "ChainRun",
    "killing_kernel",
    "sample_killing_position",
    "sample_killing_positions",
    "step_chain",
    "run_chain",
    "chain_speed",
    "extract_regenerations",
    "chain_csv",
]

_TAIL_LIMIT = 1e-9


class TabulationError(RuntimeError):
    """The tabulated killing CDF does not cover the requested mass."""


# ---------------------------------------------------------------------------
# piecewise-cubic evaluation in numba
# ---------------------------------------------------------------------------


@njit(cache=True)
def _pp_eval(brk, c, x):
    n = brk.shape[0]
    i = np.searchsorted(brk, x, side="right") - 1
    if i < 0:
        i = 0
    elif i > n - 2:
        i = n - 2
    d = x - brk[i]
    return ((c[0, i] * d + c[1, i]) * d + c[2, i]) * d + c[3, i]


@njit(cache=True)
def _draw_z(x, u, v, z1, zc, lA1, lBc, brk_z, c_mb, c_lA, c_lB, brk_lA, c_zA, brk_mlB, c_zB):
    """Killing position from gap x; u is the CDF level, v = 1 - u.

    Returns (z, status) with status 0 = ok, 1 = beyond the table.
    """
    if x < z1:
        # below the first node A(x) ~ x^2 and the mass below x ~ x^2
        r2 = (x / z1) ** 2
        mb = _pp_eval(brk_z, c_mb, z1) * r2
        lA = lA1 + 2.0 * math.log(x / z1) if x > 0.0 else -np.inf
        lB = _pp_eval(brk_z, c_lB, z1)
    else:
        mb = _pp_eval(brk_z, c_mb, x)
        lA = _pp_eval(brk_z, c_lA, x)
        lB = _pp_eval(brk_z, c_lB, x)
    if mb < 0.0:
        mb = 0.0
    # mass above the table cutoff, psi(x) B(zc) = (1 - mb) B(zc) / B(x)
    if (1.0 - mb) * math.exp(lBc - lB) > _TAIL_LIMIT:
        return zc, 1
    if u < mb:
        lt = lA + math.log(u) - math.log(mb)
        if lt <= lA1:
            z = z1 * math.exp(0.5 * (lt - lA1))
        else:
            z = _pp_eval(brk_lA, c_zA, lt)
        if z > x:
            z = x
        return z, 0
    lt = lB + math.log(v) - math.log1p(-mb)
    if lt < lBc:
        return zc, 1
    z = _pp_eval(brk_mlB, c_zB, -lt)
    if z < x:
        z = x
    return z, 0


@njit(cache=True)
def _cdf_z(x, z, z1, zc, lA1, lBc, brk_z, c_mb, c_lA, c_lB, brk_lA, c_zA, brk_mlB, c_zB):
    """Tabulated ``F_x(z)``, the forward counterpart of :func:`_draw_z`."""
    if z <= 0.0:
        return 0.0
    if x < z1:
        mb = _pp_eval(brk_z, c_mb, z1) * (x / z1) ** 2
        lB = _pp_eval(brk_z, c_lB, z1)
    else:
        mb = _pp_eval(brk_z, c_mb, x)
        lB = _pp_eval(brk_z, c_lB, x)
    if z <= x:
        if z < z1:
            # A(z) ~ z^2 below the first node, and A(x) too when x < z1
            return mb * (z / max(x, z1)) ** 2 if x < z1 else mb * math.exp(lA1 - _pp_eval(brk_z, c_lA, x)) * (z / z1) ** 2
        return mb * math.exp(_pp_eval(brk_z, c_lA, z) - _pp_eval(brk_z, c_lA, x))
    if z >= zc:
        # the mass beyond the cutoff is below the tabulation limit
        return 1.0
    lz = _pp_eval(brk_z, c_lB, max(z, z1))
    return mb + (1.0 - mb) * (1.0 - math.exp(lz - lB))


@njit(cache=True)
def _split(z, u):
    """(u z, (1 - u) z) rounded so that the two parts sum to z exactly.

    The smaller part is recomputed as z minus the larger one; that
    subtraction is exact (Sterbenz), so the sum reproduces z.
    """
    if u <= 0.5:
        big = z - u * z
        small = z - big
        return small, big
    big = z - (1.0 - u) * z
    small = z - big
    return big, small


@njit(cache=True)
def _run(y0, uniforms, z1, zc, lA1, lBc, brk_z, c_mb, c_lA, c_lB, brk_lA, c_zA, brk_mlB, c_zB,
         ys, ws, zs, starts):
    n = ys.shape[0]
    cur = y0
    for k in range(n):
        u = uniforms[3 * k]
        v = uniforms[3 * k + 1]
        split = uniforms[3 * k + 2]
        z, st = _draw_z(cur, u, v, z1, zc, lA1, lBc, brk_z, c_mb, c_lA, c_lB, brk_lA, c_zA, brk_mlB, c_zB)
        if st != 0:
            return k
        y, w = _split(z, split)
        starts[k] = cur
        ys[k] = y
        ws[k] = w
        zs[k] = z
        cur = y
    return n


# ---------------------------------------------------------------------------
# kernel tables
# ---------------------------------------------------------------------------


def _pp(x, y, monotone: bool = True):
    p = PchipInterpolator(x, y) if monotone else CubicSpline(x, y)
    return np.ascontiguousarray(p.x), np.ascontiguousarray(p.c)


def _node_grid(z_min: float, z_max: float, n_nodes: int, ratio: float = 0.05) -> np.ndarray:
    """``n_nodes`` nodes on [0, z_max]: 0, then geometric from ``z_min`` while
    the relative spacing is ``ratio``, then uniform.

    The tables behave like ``log z`` near 0, so the uniform step ``h`` only
    starts at ``z = h / ratio``.
    """
    h = z_max / n_nodes
    for _ in range(50):
        z_g = h / ratio
        n_geo = int(math.ceil(math.log(z_g / z_min) / math.log1p(ratio))) + 1
        h_new = (z_max - z_g) / (n_nodes - 1 - n_geo)
        if abs(h_new - h) <= 1e-12 * h:
            break
        h = h_new
    geo = np.geomspace(z_min, z_g, n_geo)
    lin = np.linspace(z_g, z_max, n_nodes - n_geo)[1:]
    return np.concatenate([[0.0], geo, lin])


@dataclass(frozen=True, eq=False)
class KillingKernel:
    """Tabulated killing-position law and expected killing time.

    All quantities are at the canonical parameters of the chain (gamma = 1/2
    for the BM ratchet).
    """

    basis: GreenBasis
    nodes: np.ndarray
    log_a: np.ndarray
    log_b: np.ndarray
    mass_below: np.ndarray
    eta: np.ndarray
    cutoff: float
    _tables: tuple

    @classmethod
    def build(cls, basis: GreenBasis, n_nodes: int = 2048) -> "KillingKernel":
        scale = basis.length_scale
        # cutoff where the weighted decreasing solution is ~1e-40 of its
        # value at 0
        lphi0 = math.log(float(basis.Phi(0.0)))
        zc = scale
        while math.log(float(basis.Phi(zc))) - lphi0 > -92.0:
            zc *= 1.25
        nodes = _node_grid(1e-7 * scale, zc, n_nodes)
        phi = basis.phi(nodes)
        psi = basis.psi(nodes)
        a_cells = cell_integrals(lambda y: basis.psi(y) * basis.k(y), nodes)
        b_cells = cell_integrals(lambda y: basis.phi(y) * basis.k(y), nodes)
        p_cells = cell_integrals(lambda y: basis.psi(y) * basis.m(y), nodes)
        q_cells = cell_integrals(lambda y: basis.phi(y) * basis.m(y), nodes)
        fk_c = float(basis.phi(zc) * basis.k(zc))
        fm_c = float(basis.phi(zc) * basis.m(zc))
        b_tail = integrate(lambda y: basis.phi(y) * basis.k(y), zc, zc + 20 * scale, tol=1e-12 * fk_c * scale)
        q_tail = integrate(lambda y: basis.phi(y) * basis.m(y), zc, zc + 20 * scale, tol=1e-12 * fm_c * scale)
        A = np.concatenate([[0.0], np.cumsum(a_cells)])
        B = b_tail + np.concatenate([np.cumsum(b_cells[::-1])[::-1], [0.0]])
        P = np.concatenate([[0.0], np.cumsum(p_cells)])
        Q = q_tail + np.concatenate([np.cumsum(q_cells[::-1])[::-1], [0.0]])
        mb = phi * A
        eta = phi * P + psi * Q
        zpos = nodes[1:]
        log_a = np.log(A[1:])
        log_b = np.log(B)
        # forward tables are smooth: cubic splines; the inverses use PCHIP so
        # they stay monotone
        brk_z, c_mb = _pp(zpos, mb[1:], False)
        _, c_lA = _pp(zpos, log_a, False)
        _, c_lB = _pp(zpos, log_b[1:], False)
        brk_lA, c_zA = _pp(log_a, zpos)
        # near 0 the tail integral B barely changes; keep strictly
        # increasing abscissae for the inverse
        mlb = -log_b
        keep = np.concatenate([[True], np.diff(mlb) > 1e-15 * np.maximum(1.0, np.abs(mlb[1:]))])
        keep &= np.concatenate([np.minimum.accumulate(mlb[::-1])[::-1][1:] > mlb[:-1], [True]])
        brk_mlB, c_zB = _pp(mlb[keep], nodes[keep])
        tables = (float(zpos[0]), float(zc), float(log_a[0]), float(log_b[-1]),
                  brk_z, c_mb, c_lA, c_lB, brk_lA, c_zA, brk_mlB, c_zB)
        return cls(basis, nodes, np.concatenate([[-np.inf], log_a]), log_b, mb, eta, float(zc), tables)

    @functools.cached_property
    def _eta_spline(self):
        return CubicSpline(self.nodes, self.eta)

    def expected_killing_time(self, x):
        """E_x[tau] from the tabulated cumulative integrals (cubic spline)."""
        x = np.asarray(x, dtype=float)
        return self._eta_spline(np.minimum(x, self.cutoff))

    def cdf(self, x: float, z):
        """Tabulated killing-position CDF ``F_x(z)``."""
        za = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.array([_cdf_z(float(x), float(v), *self._tables) for v in za])
        return float(out[0]) if np.ndim(z) == 0 else out.reshape(np.shape(z))

    def draw(self, x: float, uniforms: np.ndarray) -> np.ndarray:
        """Killing positions from gap ``x`` for rows (u, v) of ``uniforms``."""
        t = self._tables
        out = np.empty(uniforms.shape[0])
        for i in range(uniforms.shape[0]):
            z, st = _draw_z(float(x), uniforms[i, 0], uniforms[i, 1], *t)
            if st != 0:
                raise TabulationError(f"killing CDF from x={x} does not reach 1 - {_TAIL_LIMIT:g} by the cutoff")
            out[i] = z
        return out


@functools.lru_cache(maxsize=32)
def _kernel_cached(model: Model, mu: float, gamma: float) -> KillingKernel:
    if model is Model.BM:
        return KillingKernel.build(bm_green_basis(mu))
    return KillingKernel.build(ou_green_basis(RatchetParams(Model.OU, gamma, mu)))


def killing_kernel(params: RatchetParams) -> tuple[KillingKernel, ScalingMap | None]:
    """Kernel for the chain of ``params`` and, for BM, the scaling map from
    the canonical chain."""
    if params.gamma <= 0:
        raise ValueError("the jump chain needs gamma > 0")
    if params.model is Model.BM:
        smap = canonicalize_bm(params)
        return _kernel_cached(Model.BM, smap.mu_canonical, 0.5), smap
    return _kernel_cached(Model.OU, params.mu, params.gamma), None


def _uniform_pairs(rng: np.random.Generator, size: int) -> np.ndarray:
    u = rng.random(size)
    # keep u in (0, 1) so both log(u) and log(1 - u) are finite
    u = np.where(u == 0.0, 2.0 ** -54, u)
    return np.column_stack([u, 1.0 - u])


def sample_killing_position(kernel: KillingKernel, x: float, rng: np.random.Generator) -> float:
    """One draw of the killing position from gap ``x`` (inverse CDF)."""
    return float(kernel.draw(x, _uniform_pairs(rng, 1))[0])


def sample_killing_positions(kernel: KillingKernel, x: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` independent killing positions from gap ``x``."""
    return kernel.draw(x, _uniform_pairs(rng, size))


# ---------------------------------------------------------------------------
# the chain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JumpSample:
    """Gap after the jump ``y``, boundary increment ``w``, killing position
    ``z = y + w`` and the conditional mean inter-jump time."""

    y: float
    w: float
    z: float
    eta_mean: float


def step_chain(cur_y: float, kernel: KillingKernel, rng: np.random.Generator) -> JumpSample:
    """One transition of the gap chain (in the kernel's canonical units)."""
    if cur_y < 0:
        raise ValueError("gap must be >= 0")
    z = sample_killing_position(kernel, cur_y, rng)
    u = rng.random()
    y, w = _split(z, u)
    return JumpSample(y, w, z, float(kernel.expected_killing_time(cur_y)))


@dataclass(frozen=True)
class ChainRun:
    """Post-burn-in chain samples in physical units.

    ``starts[k]`` is the gap before transition k, so ``eta_mean[k]`` is the
    expected inter-jump time from ``starts[k]``.
    """

    params: RatchetParams
    y: np.ndarray
    w: np.ndarray
    z: np.ndarray
    eta_mean: np.ndarray
    starts: np.ndarray
    burn_in: int
    seed: int

    def __len__(self) -> int:
        return int(self.y.size)

    def samples(self):
        for k in range(self.y.size):
            yield JumpSample(float(self.y[k]), float(self.w[k]), float(self.z[k]), float(self.eta_mean[k]))


def run_chain(params: RatchetParams, n: int = 100_000, burn_in: int = 1000, seed: int = DEFAULT_SEED,
              y0: float = 0.0) -> ChainRun:
    """Run the gap chain for ``burn_in + n`` steps from ``y0`` and keep the
    last ``n``.  BM chains with gamma != 1/2 are run at the canonical
    parameters and mapped back with the scaling map."""
    if n < 1:
        raise ValueError("n must be >= 1")
    kernel, smap = killing_kernel(params)
    total = n + burn_in
    uniforms = stream(seed, Stream.CHAIN).random(3 * total)
    uniforms = np.where(uniforms == 0.0, 2.0 ** -54, uniforms)
    uniforms[1::3] = 1.0 - uniforms[0::3]
    ys, ws, zs, starts = (np.empty(total) for _ in range(4))
    y0c = y0 if smap is None else y0 / smap.space_scale
    done = _run(float(y0c), uniforms, *kernel._tables, ys, ws, zs, starts)
    if done != total:
        raise TabulationError(f"chain left the tabulated range at step {done}")
    sl = slice(burn_in, total)
    eta = kernel.expected_killing_time(starts[sl])
    y, w, z, st = ys[sl], ws[sl], zs[sl], starts[sl]
    if smap is not None and (smap.space_scale != 1.0 or smap.time_scale != 1.0):
        y, w, z, st = (smap.length(a) for a in (y, w, z, st))
        eta = smap.time(eta)
    return ChainRun(params, y.copy(), w.copy(), z.copy(), np.asarray(eta), st.copy(), burn_in, int(seed))


def chain_speed(params: RatchetParams, n: int = 100_000, burn_in: int = 1000, seed: int = DEFAULT_SEED,
                n_batches: int = 20) -> Estimate:
    """Ratio estimator ``sum(w) / sum(eta_mean)`` with a batch-means error."""
    if n < 1000:
        raise ValueError("chain_speed needs n >= 1000")
    run = run_chain(params, n, burn_in, seed)
    return ratio_batch_means(run.w, run.eta_mean, n_batches)


def chain_csv(run: ChainRun) -> str:
    """``k,y,w,eta_mean`` with one row per kept transition."""
    buf = io.StringIO()
    buf.write("k,y,w,eta_mean\n")
    for k in range(run.y.size):
        buf.write(f"{k},{fmt(run.y[k])},{fmt(run.w[k])},{fmt(run.eta_mean[k])}\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# regenerations of simulated paths
# ---------------------------------------------------------------------------


def extract_regenerations(path: RatchetPath) -> np.ndarray:
    """Regeneration increments ``(rho_{i+1} - rho_i, X_{rho_{i+1}} - X_{rho_i})``.

    The regeneration times are the first touches X = R after each boundary
    jump (the first touch overall for i = 0), as recorded by the path
    simulator.  Returns an array of shape (k, 2), empty when fewer than two
    regenerations occurred.
    """
    t = path.touches
    if t.shape[0] < 2:
        return np.empty((0, 2))
    return np.column_stack([np.diff(t[:, 0]), np.diff(t[:, 1])])
