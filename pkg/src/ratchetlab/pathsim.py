"""Path simulation of reflected diffusions, both ratchets and the couplings.

Every simulation draws its randomness from three independent streams
derived from ``config.seed`` (Gaussian increments, auxiliary uniforms for
bridge maxima / zero crossings, and the jump clock with reset uniforms), so
a given ``(params, config)`` always produces the same path.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .closedform import Model, RatchetParams
from .seeding import DEFAULT_SEED, Stream, stream

__all__ = [
    "SimConfig",
    "RatchetPath",
    "CouplingResult",
    "PathInvariantError",
    "n_steps",
    "simulate_rbm",
    "simulate_rou",
    "simulate_ratchet",
    "simulate_bm_ratchet",
    "simulate_ou_ratchet",
    "simulate_killing",
    "simulate_coupling",
    "validate_path",
    "path_csv",
    "jumps_csv",
    "fmt",
]


class PathInvariantError(AssertionError):
    """A simulated path violates one of the ratchet invariants."""


@dataclass(frozen=True)
class SimConfig:
    """Time step, horizon, initial gap and root seed of a simulation."""

    dt: float = 1e-3
    horizon: float = 500.0
    x0: float = 0.0
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ValueError("horizon must be positive")
        if self.dt > self.horizon:
            raise ValueError("dt must not exceed the horizon")
        if not (self.x0 >= 0 and math.isfinite(self.x0)):
            raise ValueError("x0 must be >= 0")
        object.__setattr__(self, "seed", int(self.seed) & ((1 << 64) - 1))


def n_steps(config: SimConfig) -> int:
    """Number of grid steps, ``ceil(T/dt)`` (robust to rounding)."""
    q = config.horizon / config.dt
    n = math.ceil(q - 1e-9 * q)
    return max(1, n)


def _grid(config: SimConfig):
    n = n_steps(config)
    return n, config.horizon / n


@dataclass(frozen=True)
class RatchetPath:
    """A simulated ratchet.

    ``times``, ``x`` and ``r`` hold the whole grid when the path was
    recorded, otherwise only the initial and final grid points.
    ``jumps`` has columns (t, r_before, r_after, x_at_jump).  ``touches``
    has columns (t, x) and lists the first grid time after each jump (and
    after the start) at which the particle touched the boundary; these are
    the regeneration times.
    """

    params: RatchetParams
    config: SimConfig
    times: np.ndarray
    x: np.ndarray
    r: np.ndarray
    jumps: np.ndarray
    touches: np.ndarray
    recorded: bool = True

    @property
    def x_end(self) -> float:
        return float(self.x[-1])

    @property
    def n_jumps(self) -> int:
        return int(self.jumps.shape[0])


def _initial_cap(params: RatchetParams, horizon: float) -> int:
    # generous guess of the jump count; doubled on overflow
    return int(64 + 4.0 * max(params.gamma, 0.05) * horizon * 2.0)


def simulate_ratchet(params: RatchetParams, config: SimConfig, record: bool = True) -> RatchetPath:
    """Simulate the BM or OU ratchet by its graphical construction."""
    if params.model is Model.OU and params.mu <= 0.0:
        raise ValueError("the OU ratchet needs mu > 0")
    kern = K.bm_ratchet if params.model is Model.BM else K.ou_ratchet
    n, dt = _grid(config)
    cap = _initial_cap(params, config.horizon)
    normals = aux = None
    while True:
        if normals is None:
            normals = stream(config.seed, Stream.NOISE).standard_normal(n)
            aux = 1.0 - stream(config.seed, Stream.AUX).random(n)
        # the first draws of a stream do not depend on how many are taken,
        # so enlarging the buffer leaves the path unchanged
        jump_u = 1.0 - stream(config.seed, Stream.JUMPS).random(2 * cap + 2)
        m = n + 1 if record else 1
        xs = np.empty(m)
        rs = np.empty(m)
        jt, jrb, jra, jx = (np.empty(cap) for _ in range(4))
        tt = np.empty(cap + 1)
        tx = np.empty(cap + 1)
        out = np.zeros(5)
        kern(params.gamma, params.mu, config.x0, dt, normals, aux, jump_u, record,
             xs, rs, jt, jrb, jra, jx, tt, tx, out)
        if int(out[2]) == K.OK:
            break
        cap *= 2
    nj, nt = int(out[0]), int(out[1])
    jumps = np.column_stack([jt[:nj], jrb[:nj], jra[:nj], jx[:nj]])
    touches = np.column_stack([tt[:nt], tx[:nt]])
    if record:
        times = np.arange(n + 1) * dt
        times[-1] = config.horizon
    else:
        times = np.array([0.0, config.horizon])
        xs = np.array([config.x0, out[3]])
        rs = np.array([0.0, out[4]])
    return RatchetPath(params, config, times, xs, rs, jumps, touches, record)


def simulate_bm_ratchet(params: RatchetParams, config: SimConfig, record: bool = True) -> RatchetPath:
    if params.model is not Model.BM:
        raise ValueError("expected BM parameters")
    return simulate_ratchet(params, config, record)


def simulate_ou_ratchet(params: RatchetParams, config: SimConfig, record: bool = True) -> RatchetPath:
    if params.model is not Model.OU:
        raise ValueError("expected OU parameters")
    return simulate_ratchet(params, config, record)


def simulate_rbm(mu: float, config: SimConfig) -> np.ndarray:
    """Reflected BM with drift -mu on the grid (exact in law at grid points)."""
    if mu < 0:
        raise ValueError("mu must be >= 0")
    n, dt = _grid(config)
    normals = stream(config.seed, Stream.NOISE).standard_normal(n)
    aux = 1.0 - stream(config.seed, Stream.AUX).random(n)
    zs = np.empty(n + 1)
    K.rbm_path(float(mu), config.x0, dt, normals, aux, zs)
    return zs


def simulate_rou(mu: float, config: SimConfig) -> np.ndarray:
    """Reflected OU (drift -mu x) on the grid via the exact transition."""
    if not mu > 0:
        raise ValueError("the reflected OU process needs mu > 0")
    n, dt = _grid(config)
    normals = stream(config.seed, Stream.NOISE).standard_normal(n)
    zs = np.empty(n + 1)
    K.rou_path(float(mu), config.x0, dt, normals, zs)
    return zs


def simulate_killing(params: RatchetParams, x: float, dt: float, seed: int,
                     chunk: int = 4096, max_time: float = 1e6) -> tuple[float, float]:
    """One killing time and killing position of the killed reflected process.

    The gap starts at ``x`` and is killed at rate ``gamma * gap`` (the
    between-jumps dynamics of the ratchet); same discretization as
    :func:`simulate_ratchet`.
    """
    if params.gamma <= 0:
        raise ValueError("killing needs gamma > 0")
    is_ou = params.model is Model.OU
    if is_ou and params.mu <= 0:
        raise ValueError("the OU ratchet needs mu > 0")
    g_noise = stream(seed, Stream.NOISE)
    g_aux = stream(seed, Stream.AUX)
    clock = -math.log(1.0 - stream(seed, Stream.JUMPS).random())
    state = np.array([x, 0.0, clock, 0.0, 0.0, 0.0, 0.0, x])
    while state[3] < max_time:
        normals = g_noise.standard_normal(chunk)
        aux = 1.0 - g_aux.random(chunk)
        K.killed_chunk(is_ou, params.gamma, params.mu, dt, normals, aux, state)
        if state[4] > 0:
            return float(state[3]), float(state[5])
    raise RuntimeError("no killing before max_time")  # pragma: no cover


@dataclass(frozen=True)
class CouplingResult:
    """Coupling time (censored at the horizon when ``coupled`` is False)."""

    time: float
    coupled: bool
    dominance_ok: bool


def simulate_coupling(params: RatchetParams, x_hi: float, x_lo: float, config: SimConfig) -> CouplingResult:
    """Run two ratchets from initial gaps ``x_hi >= x_lo`` on shared noise.

    BM: both share the driving path and the Poisson points; coupling is the
    first time the two levels coincide.  OU: coupling is the first time the
    upper gap touches 0 or a shared jump point falls below the lower gap.
    The dominance of the upper process is asserted on every run.
    """
    if not x_hi >= x_lo >= 0:
        raise ValueError("need x_hi >= x_lo >= 0")
    if params.model is Model.OU and params.mu <= 0:
        raise ValueError("the OU ratchet needs mu > 0")
    kern = K.bm_coupling if params.model is Model.BM else K.ou_coupling
    n, dt = _grid(config)
    cap = _initial_cap(params, config.horizon)
    normals = stream(config.seed, Stream.NOISE).standard_normal(n)
    aux = 1.0 - stream(config.seed, Stream.AUX).random(n)
    while True:
        jump_u = 1.0 - stream(config.seed, Stream.JUMPS).random(2 * cap + 2)
        out = np.zeros(4)
        kern(params.gamma, params.mu, float(x_hi), float(x_lo), dt, normals, aux, jump_u, out)
        if int(out[3]) == K.OK:
            break
        cap *= 2
    if out[2] != 1.0:
        raise PathInvariantError("coupled processes lost their order")
    return CouplingResult(float(out[0]), bool(out[1]), True)


def validate_path(path: RatchetPath, atol: float = 1e-12) -> None:
    """Check the ratchet invariants; raise :class:`PathInvariantError`."""
    x, r, j = path.x, path.r, path.jumps
    scale = 1.0 + float(np.max(np.abs(x)))
    tol = atol * scale
    problems = []
    if np.any(np.diff(r) < 0):
        problems.append("boundary decreases")
    if np.any(x < r - tol):
        problems.append("particle below boundary")
    if j.size:
        t, rb, ra, xj = j.T
        if np.any(rb > ra) or np.any(ra > xj + tol):
            problems.append("jump not inside [r_before, x]")
        if np.any(np.diff(t) < 0):
            problems.append("jump times not ordered")
        if np.any(np.abs((xj - rb) - ((ra - rb) + (xj - ra))) > tol):
            problems.append("gap not conserved at a jump")
        if np.any(rb[1:] != ra[:-1]):
            problems.append("boundary moved between jumps")
        if path.recorded:
            nj_grid = int(np.count_nonzero(np.diff(r)))
            if nj_grid > j.shape[0]:
                problems.append("boundary moved without a recorded jump")
    if path.touches.size and np.any(np.diff(path.touches[:, 0]) <= 0):
        problems.append("touch times not increasing")
    if problems:
        raise PathInvariantError("; ".join(problems))


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------


def fmt(v: float) -> str:
    """Shortest round-trip decimal representation of a float."""
    return repr(float(v))


def _csv(header: str, cols) -> str:
    buf = io.StringIO()
    buf.write(header + "\n")
    for row in zip(*cols):
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def path_csv(path: RatchetPath) -> str:
    """``t,x,r`` with one row per grid point."""
    return _csv("t,x,r", (path.times, path.x, path.r))


def jumps_csv(path: RatchetPath) -> str:
    """``t,r_before,r_after,x`` with one row per boundary jump."""
    j = path.jumps
    return _csv("t,r_before,r_after,x", (j[:, 0], j[:, 1], j[:, 2], j[:, 3]))
