"""Verification suites shared by the command line and the test-suite.

Each suite returns a list of :class:`~ratchetlab.mcstats.Verdict`.  Suites
are deterministic functions of their arguments (including the root seed and
independent of the number of workers), so their JSON output is reproducible
byte for byte.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import closedform as cf
from . import specfun
from .closedform import Model, RatchetParams
from .jumpchain import chain_speed, extract_regenerations, run_chain
from .mcstats import Estimate, Verdict, clt_verdict, ks_1samp, ks_2samp, lln_verdict, regen_sigma, run_replicas
from .pathsim import SimConfig, simulate_coupling, simulate_ratchet
from .quadrature import Decay, cell_integrals, integrate, integrate_semiinfinite

__all__ = [
    "SUITES",
    "MIN_N",
    "DEFAULT_N",
    "EndpointTask",
    "CouplingTask",
    "specfun_suite",
    "speed_suite",
    "path_lln_verdict",
    "clt_suite",
    "invariant_suite",
    "killing_suite",
    "couple_suite",
    "invariant_cdf",
    "ou_hitting_tail",
    "ou_hitting_tail_quoted",
    "run_suite",
]

SUITES = ("speed", "clt", "invariant", "couple", "specfun")
MIN_N = {"speed": 1000, "clt": 500, "invariant": 1000, "couple": 100, "specfun": 0}
DEFAULT_N = {"speed": 100_000, "clt": 2000, "invariant": 100_000, "couple": 2000, "specfun": 0}


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------


def specfun_suite() -> list[Verdict]:
    """Identity checks for the Airy, Kummer and Tricomi evaluators."""
    out = []
    x = np.linspace(0.0, 40.0, 200)
    q = specfun.airy(x)
    w = q.ai * q.bi_prime - q.ai_prime * q.bi
    err = float(np.max(np.abs(w * math.pi - 1.0)))
    out.append(Verdict("airy_wronskian", {"x": [0.0, 40.0], "points": 200}, err, 1.0 / math.pi, 1e-10, err <= 1e-10))

    xn = np.linspace(-5.0, 0.0, 51)
    qn = specfun.airy(xn)
    errn = float(np.max(np.abs((qn.ai * qn.bi_prime - qn.ai_prime * qn.bi) * math.pi - 1.0)))
    out.append(Verdict("airy_wronskian_negative", {"x": [-5.0, 0.0], "points": 51}, errn, 1.0 / math.pi, 1e-10,
                       errn <= 1e-10))

    integral = integrate_semiinfinite(lambda t: specfun.airy_scaled(t).ai * np.exp(-(2.0 / 3.0) * t ** 1.5),
                                      Decay.EXP, tol=1e-13)
    out.append(Verdict("airy_integral", {}, integral, 1.0 / 3.0, 1e-8, abs(integral - 1.0 / 3.0) <= 1e-8))

    # Kummer transformation U(a, 1/2, x) = x^{1/2} U(a + 1/2, 3/2, x)
    worst = 0.0
    for a in (-2.3, -0.4, 0.1, 0.5):
        for xv in np.linspace(0.1, 30.0, 40):
            u = specfun.tricomi_u(a, 0.5, xv)
            v = math.sqrt(xv) * specfun.tricomi_u(a + 0.5, 1.5, xv)
            worst = max(worst, abs(u - v) / abs(u))
    out.append(Verdict("kummer_transformation", {"a": [-2.3, -0.4, 0.1, 0.5], "x": [0.1, 30.0]}, worst, 0.0, 1e-9,
                       worst <= 1e-9))

    # U(a, b+1, x) = U(a, b, x) + a U(a+1, b+1, x)
    worst = 0.0
    for a in (-2.3, -0.4, 0.1, 0.7, 1.6):
        for b in (0.5, 1.5, -0.5):
            for xv in (0.3, 1.0, 4.0, 12.0, 30.0):
                lhs = specfun.tricomi_u(a, b + 1.0, xv)
                rhs = specfun.tricomi_u(a, b, xv) + a * specfun.tricomi_u(a + 1.0, b + 1.0, xv)
                worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    out.append(Verdict("tricomi_recurrence", {"a": [-2.3, -0.4, 0.1, 0.7, 1.6], "b": [-0.5, 0.5, 1.5]}, worst, 0.0,
                       1e-9, worst <= 1e-9))

    # M contiguous relation (b - a) M(a-1) + (2a - b + x) M(a) - a M(a+1) = 0
    worst = 0.0
    for a in (-1.7, 0.3, 2.2):
        for b in (0.5, 1.5):
            for xv in (0.5, 3.0, 15.0, 28.0):
                t1 = (b - a) * specfun.kummer_m(a - 1.0, b, xv)
                t2 = (2 * a - b + xv) * specfun.kummer_m(a, b, xv)
                t3 = a * specfun.kummer_m(a + 1.0, b, xv)
                worst = max(worst, abs(t1 + t2 - t3) / max(abs(t1), abs(t2), abs(t3)))
    out.append(Verdict("kummer_recurrence", {"a": [-1.7, 0.3, 2.2], "b": [0.5, 1.5]}, worst, 0.0, 1e-9,
                       worst <= 1e-9))

    xs = np.linspace(0.05, 100.0, 60)
    e1 = float(np.max(np.abs(specfun.tricomi_u(0.5, 1.5, xs) * np.sqrt(xs) - 1.0)))
    out.append(Verdict("tricomi_half_three_halves", {"x": [0.05, 100.0]}, e1, 1.0, 1e-10, e1 <= 1e-10))
    e0 = max(float(np.max(np.abs(specfun.tricomi_u(0.0, b, xs) - 1.0))) for b in (0.5, 1.5, 2.5))
    out.append(Verdict("tricomi_a_zero", {"b": [0.5, 1.5, 2.5]}, e0, 1.0, 1e-10, e0 <= 1e-10))

    # U x^a = 1 - a (a - b + 1) / x + ...; the pairs keep that term small
    worst = 0.0
    for a, b in ((0.7, 0.5), (-0.4, 0.5), (1.3, 1.5), (0.3, 0.5)):
        worst = max(worst, abs(specfun.tricomi_u(a, b, 200.0) * 200.0 ** a - 1.0))
    out.append(Verdict("tricomi_asymptotic", {"x": 200.0}, worst, 1.0, 0.01, worst <= 0.01))
    return out


# ---------------------------------------------------------------------------
# speed: exact chain and path replicas
# ---------------------------------------------------------------------------


def speed_suite(params: RatchetParams, n: int = 100_000, seed: int = 0x5EED, burn_in: int = 1000) -> list[Verdict]:
    """Jump-chain ratio estimator against the closed-form speed (3 stderr)."""
    v = cf.speed(params)
    est = chain_speed(params, n, burn_in, seed)
    tol = 3.0 * est.stderr
    return [Verdict("chain_speed", params.as_dict() | {"n": n, "burn_in": burn_in, "seed": seed}, est.as_dict(), v,
                    tol, abs(est.mean - v) <= tol)]


@dataclass(frozen=True)
class EndpointTask:
    """Picklable replica task: run one ratchet path, return (X_T, increments)."""

    params: RatchetParams
    horizon: float = 500.0
    dt: float = 1e-3
    x0: float = 0.0

    def __call__(self, seed: int):
        cfg = SimConfig(self.dt, self.horizon, self.x0, seed)
        path = simulate_ratchet(self.params, cfg, record=False)
        return path.x_end, extract_regenerations(path)


def _endpoints(params, n, seed, horizon, dt, workers):
    res = run_replicas(EndpointTask(params, horizon, dt), n, seed, workers)
    ends = np.array([r[0] for r in res])
    incs = [r[1] for r in res]
    return ends, incs


def path_lln_verdict(params: RatchetParams, n: int = 200, seed: int = 0x5EED, horizon: float = 500.0,
                     dt: float = 1e-3, allowance: float = 0.02, workers: int = 1) -> Verdict:
    """Mean of X_T / T over ``n`` replicas within 3 stderr + allowance of the speed."""
    ends, _ = _endpoints(params, n, seed, horizon, dt, workers)
    return lln_verdict(ends / horizon, cf.speed(params), allowance, "path_lln",
                       params.as_dict() | {"n": n, "T": horizon, "dt": dt, "seed": seed})


def clt_suite(params: RatchetParams, n: int = 2000, seed: int = 0x5EED, horizon: float = 500.0, dt: float = 1e-3,
              workers: int = 1, sigma_rtol: float = 0.15) -> list[Verdict]:
    """KS test of standardized endpoints and the regeneration sigma check."""
    v = cf.speed(params)
    ends, incs = _endpoints(params, n, seed, horizon, dt, workers)
    meta = params.as_dict() | {"n": n, "T": horizon, "dt": dt, "seed": seed}
    ks = clt_verdict(ends, v, horizon)
    # diagnostics: the same test centred on the sample mean separates a shift
    # of the centre (finite-T transient) from a wrong shape
    offset = float(np.mean(ends) - horizon * v)
    ks_own = clt_verdict(ends, float(np.mean(ends)) / horizon, horizon)
    diag = {"mean_offset": offset, "p_value_own_mean": ks_own.p_value}
    out = [Verdict("clt_ks", meta, ks.as_dict(), "N(0,1)", 0.01, ks.p_value >= 0.01, diag)]
    sd_emp = float(np.std(ends - horizon * v, ddof=1) / math.sqrt(horizon))
    pooled = np.concatenate([i for i in incs if i.size]) if any(i.size for i in incs) else np.empty((0, 2))
    if pooled.shape[0] >= 100:
        rs = regen_sigma(pooled)
        rel = abs(rs.sigma - sd_emp) / sd_emp
        details = {"r": rs.r, "m": rs.m, "beta2": rs.beta2, "cycles": rs.n, "regen_speed": rs.speed}
        out.append(Verdict("clt_sigma", meta, {"sigma_regen": rs.sigma, "rel_diff": rel}, sd_emp, sigma_rtol,
                           rel <= sigma_rtol, details))
    else:
        out.append(Verdict("clt_sigma", meta, None, sd_emp, sigma_rtol, False, {"error": "too few regenerations"}))
    return out


# ---------------------------------------------------------------------------
# invariant distribution and killing functionals
# ---------------------------------------------------------------------------


def _canonical_density(params: RatchetParams):
    """(density, length scale) of the chain's gap marginal in physical units."""
    if params.model is Model.BM:
        smap = cf.canonicalize_bm(params)
        s = smap.space_scale
        mu_c = smap.mu_canonical
        return (lambda z: cf.bm_invariant_density(mu_c, np.asarray(z) / s) / s), s * (1.0 if mu_c < 1 else 1.0 / mu_c)
    return (lambda z: cf.ou_invariant_density(params, z)), cf.ou_green_basis(params).length_scale


def invariant_cdf(params: RatchetParams, n_grid: int = 4000):
    """CDF of the invariant gap law by cumulative quadrature and PCHIP."""
    dens, scale = _canonical_density(params)
    zmax = scale
    while dens(zmax) > 1e-18 * dens(0.0):
        zmax *= 1.5
    grid = np.linspace(0.0, zmax, n_grid)
    cells = cell_integrals(dens, grid)
    F = np.concatenate([[0.0], np.cumsum(cells)])
    F /= F[-1]
    p = PchipInterpolator(grid, F, extrapolate=False)

    def cdf(z):
        z = np.asarray(z, dtype=float)
        return np.where(z >= zmax, 1.0, np.nan_to_num(p(np.clip(z, 0.0, zmax)), nan=1.0))

    return cdf


def _derivs(f, z, h):
    """First and second derivatives by five-point central differences."""
    fm2, fm1, f0, fp1, fp2 = (f(z + k * h) for k in (-2, -1, 0, 1, 2))
    d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h)
    d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h)
    return d1, d2


def invariant_suite(params: RatchetParams, n: int = 100_000, seed: int = 0x5EED, burn_in: int = 1000,
                    ks_tol: float = 0.02) -> list[Verdict]:
    """Chain y-marginal against the analytic invariant density, W against Y,
    and the ODE / shape checks of the density."""
    meta = params.as_dict() | {"n": n, "seed": seed}
    run = run_chain(params, n, burn_in, seed)
    cdf = invariant_cdf(params)
    ks = ks_1samp(run.y, cdf)
    out = [Verdict("invariant_ks", meta, ks.statistic, "f_nu", ks_tol, ks.statistic <= ks_tol, ks.as_dict())]
    ks2 = ks_2samp(run.y, run.w)
    out.append(Verdict("w_y_same_law", meta, ks2.statistic, 0.0, ks_tol, ks2.statistic <= ks_tol, ks2.as_dict()))
    out.extend(density_checks(params))
    return out


def density_checks(params: RatchetParams) -> list[Verdict]:
    """ODE residuals and shape of the invariant density (no randomness)."""
    out = []
    grid = np.linspace(0.05, 6.0, 120)
    if params.model is Model.BM:
        mu = cf.canonicalize_bm(params).mu_canonical
        f = lambda z: cf.bm_invariant_density(mu, z)
        d1, d2 = _derivs(f, grid, 1e-3)
        res = float(np.max(np.abs(d2 + 2.0 * mu * d1 - grid * f(grid))))
        out.append(Verdict("f_nu_ode", {"mu": mu, "gamma": 0.5}, res, 0.0, 1e-6, res <= 1e-6))
        vals = f(np.linspace(0.0, 10.0, 400))
        dec = bool(np.all(np.diff(vals) < 0) and np.all(vals > 0))
        out.append(Verdict("f_nu_decreasing", {"mu": mu}, dec, True, None, dec))
        return out
    mu, g = params.mu, params.gamma
    f = lambda z: cf.ou_invariant_density(params, z)
    d1, d2 = _derivs(f, grid, 1e-3)
    res = float(np.max(np.abs(0.5 * d2 + mu * grid * d1 - g * grid * f(grid))))
    out.append(Verdict("h_ode", params.as_dict(), res, 0.0, 1e-5, res <= 1e-5))
    # h is even-extendable at 0 only up to its odd first derivative, so use
    # a one-sided third-order stencil
    hz = 1e-3
    v = f(np.arange(5) * hz)
    d2_0 = float((35 * v[0] - 104 * v[1] + 114 * v[2] - 56 * v[3] + 11 * v[4]) / (12 * hz ** 2))
    out.append(Verdict("h_second_derivative_zero", params.as_dict(), d2_0, 0.0, 1e-5, abs(d2_0) <= 1e-5))
    vals = cf.ou_h(params, np.linspace(0.0, 8.0, 400))
    pos = bool(np.all(vals > 0))
    dec = bool(np.all(np.diff(vals) < 0))
    out.append(Verdict("h_positive", params.as_dict(), pos, True, None, pos))
    out.append(Verdict("h_decreasing", params.as_dict(), dec, True, None, dec))
    return out


def _killing_mass(basis, x: float) -> float:
    f = lambda y: cf.killing_density(basis, x, y)
    below = integrate(f, 0.0, x, tol=1e-13) if x > 0 else 0.0
    return below + integrate_semiinfinite(f, basis.decay, a=x, tol=1e-12, scale=basis.length_scale)


def killing_suite(points_bm=((0.0, 0.0), (0.0, 1.0), (0.0, 3.0), (1.0, 0.0), (1.0, 1.0), (1.0, 3.0)),
                  points_ou=((1.0, 0.5, 0.0), (1.0, 0.5, 1.0), (1.0, 0.5, 3.0), (0.5, 0.5, 0.5),
                             (2.0, 1.0, 1.0), (0.7, 1.5, 2.0))) -> list[Verdict]:
    """Killing mass, mean identities and the stationary-expectation ratio."""
    out = []
    for mu, x in points_bm:
        b = cf.bm_green_basis(mu)
        mass = _killing_mass(b, x)
        mean_q = cf.killing_mean(b, x)
        mean_c = cf.bm_killing_mean(mu, x)
        p = {"model": "bm", "mu": mu, "gamma": 0.5, "x": x}
        out.append(Verdict("killing_mass", p, mass, 1.0, 1e-7, abs(mass - 1.0) <= 1e-7))
        out.append(Verdict("killing_mean_identity", p, mean_q, mean_c, 1e-7, abs(mean_q - mean_c) <= 1e-7))
    for mu, g, x in points_ou:
        params = RatchetParams.ou(mu, g)
        b = cf.ou_green_basis(params)
        mass = _killing_mass(b, x)
        mean_q = cf.killing_mean(b, x)
        mean_c = cf.ou_killing_mean(params, x)
        p = params.as_dict() | {"x": x}
        out.append(Verdict("killing_mass", p, mass, 1.0, 1e-7, abs(mass - 1.0) <= 1e-7))
        out.append(Verdict("killing_mean_identity", p, mean_q, mean_c, 1e-6, abs(mean_q - mean_c) <= 1e-6))
    for mu in (0.0, 0.5, 1.0, 2.0):
        ey, eeta = cf.bm_inv_expectations(mu)
        v = cf.bm_speed(RatchetParams.bm(mu))
        out.append(Verdict("inv_expectation_ratio", {"mu": mu, "gamma": 0.5}, ey / eeta, v, 1e-9,
                           abs(ey / eeta - v) <= 1e-9))
    return out


# ---------------------------------------------------------------------------
# coupling
# ---------------------------------------------------------------------------


def ou_hitting_tail_quoted(x0: float, mu: float, t):
    """Quoted tail bound for the OU coupling time, equal to the exact tail only at mu = 1/2:
    ``Erf(x0 / sqrt(2 (e^{2 mu t} - 1)))``."""
    t = np.asarray(t, dtype=float)
    return specfun.erf_fn(x0 / np.sqrt(2.0 * np.expm1(2.0 * mu * t)))


def ou_hitting_tail(x0: float, mu: float, t):
    """Exact tail ``P_x0[H_0 > t]`` of the hitting time of 0 for
    dX = -mu X dt + dB: ``Erf(x0 sqrt(mu) / sqrt(e^{2 mu t} - 1))``."""
    t = np.asarray(t, dtype=float)
    return specfun.erf_fn(x0 * math.sqrt(mu) / np.sqrt(np.expm1(2.0 * mu * t)))


@dataclass(frozen=True)
class CouplingTask:
    params: RatchetParams
    x_hi: float
    x_lo: float
    horizon: float = 50.0
    dt: float = 1e-3

    def __call__(self, seed: int):
        r = simulate_coupling(self.params, self.x_hi, self.x_lo, SimConfig(self.dt, self.horizon, 0.0, seed))
        return r.time, r.coupled


def coupling_times(params: RatchetParams, x_hi: float, x_lo: float, n: int, seed: int, horizon: float = 50.0,
                   dt: float = 1e-3, workers: int = 1):
    res = run_replicas(CouplingTask(params, x_hi, x_lo, horizon, dt), n, seed, workers)
    return np.array([r[0] for r in res]), np.array([r[1] for r in res], dtype=bool)


def couple_suite(params: RatchetParams, n: int = 2000, seed: int = 0x5EED, x_hi: float = 1.0, x_lo: float = 0.0,
                 alpha: float = 0.3, t_values=(0.5, 1.0, 2.0), horizon: float = 50.0, dt: float = 1e-3,
                 workers: int = 1) -> list[Verdict]:
    """Exponential moment (BM) or tail (OU) of the coupling time against the
    hitting-time bounds."""
    times, coupled = coupling_times(params, x_hi, x_lo, n, seed, horizon, dt, workers)
    meta = params.as_dict() | {"n": n, "seed": seed, "x_hi": x_hi, "x_lo": x_lo, "T": horizon, "dt": dt}
    censored = int(np.count_nonzero(~coupled))
    if params.model is Model.BM:
        mu = params.mu
        if not 0.0 <= alpha <= 0.5 * mu * mu:
            raise ValueError("the exponential-moment bound needs 0 <= alpha <= mu^2/2")
        bound = math.exp(x_hi * (mu - math.sqrt(mu * mu - 2.0 * alpha)))
        est = Estimate.from_samples(np.exp(alpha * times))
        tol = 3.0 * est.stderr
        return [Verdict("coupling_exp_moment", meta | {"alpha": alpha}, est.as_dict(), bound, tol,
                        est.mean <= bound + tol and censored == 0, {"censored": censored})]
    out = []
    for t in t_values:
        p = float(np.mean(times > t))
        se = math.sqrt(max(p * (1.0 - p), 1e-300) / n)
        quoted = float(ou_hitting_tail_quoted(x_hi, params.mu, t))
        exact = float(ou_hitting_tail(x_hi, params.mu, t))
        out.append(Verdict("coupling_tail", meta | {"t": t}, {"mean": p, "stderr": se}, quoted, 3.0 * se,
                           p <= quoted + 3.0 * se and censored == 0,
                           {"censored": censored, "hitting_tail_exact": exact,
                            "within_exact_bound": p <= exact + 3.0 * se}))
    return out


# ---------------------------------------------------------------------------
# dispatcher
# ---------------------------------------------------------------------------


def run_suite(suite: str, params: RatchetParams | None, n: int, seed: int, workers: int = 1,
              **kw) -> list[Verdict]:
    """Run one named suite."""
    if suite == "specfun":
        return specfun_suite()
    if params is None:
        raise ValueError(f"suite {suite!r} needs model parameters")
    if suite == "speed":
        out = speed_suite(params, n, seed)
        if kw.get("paths"):
            out.append(path_lln_verdict(params, kw["paths"], seed, kw.get("horizon", 500.0), kw.get("dt", 1e-3),
                                        workers=workers))
        return out
    if suite == "clt":
        return clt_suite(params, n, seed, kw.get("horizon", 500.0), kw.get("dt", 1e-3), workers)
    if suite == "invariant":
        out = invariant_suite(params, n, seed)
        if kw.get("killing", True):
            out.extend(killing_suite())
        return out
    if suite == "couple":
        return couple_suite(params, n, seed, kw.get("x_hi", 1.0), kw.get("x_lo", 0.0), kw.get("alpha", 0.3),
                            horizon=kw.get("couple_horizon", 50.0), dt=kw.get("dt", 1e-3), workers=workers)
    raise ValueError(f"unknown suite {suite!r}")
