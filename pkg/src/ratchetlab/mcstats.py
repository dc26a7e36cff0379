"""Replica orchestration, estimators and statistical verdicts."""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy import special

from .seeding import derive_seed, derive_seeds

__all__ = [
    "Estimate",
    "KsReport",
    "RegenStats",
    "Verdict",
    "ReplicaError",
    "derive_seed",
    "derive_seeds",
    "run_replicas",
    "batch_means",
    "ratio_batch_means",
    "kolmogorov_sf",
    "ks_1samp",
    "ks_2samp",
    "normal_cdf",
    "lln_verdict",
    "clt_verdict",
    "regen_sigma",
]


@dataclass(frozen=True)
class Estimate:
    """Point estimate with standard error and a normal 95% interval."""

    mean: float
    stderr: float
    n: int

    @property
    def ci95(self) -> tuple[float, float]:
        return (self.mean - 1.96 * self.stderr, self.mean + 1.96 * self.stderr)

    @classmethod
    def from_samples(cls, x) -> "Estimate":
        x = np.asarray(x, dtype=float)
        if x.size == 0:
            raise ValueError("no samples")
        sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
        return cls(float(np.mean(x)), sd / math.sqrt(x.size), int(x.size))

    def as_dict(self) -> dict:
        lo, hi = self.ci95
        return {"mean": self.mean, "stderr": self.stderr, "n": self.n, "ci95": [lo, hi]}


@dataclass(frozen=True)
class KsReport:
    """Kolmogorov-Smirnov statistic with its asymptotic p-value."""

    statistic: float
    n: float
    p_value: float

    def as_dict(self) -> dict:
        return {"statistic": self.statistic, "n": self.n, "p_value": self.p_value}


@dataclass(frozen=True)
class RegenStats:
    """Plug-in regeneration estimates: mean cycle length r, mean cycle
    displacement m, the centred variance beta2 and sigma = beta / sqrt(r)."""

    r: float
    m: float
    beta2: float
    sigma: float
    n: int
    degenerate: bool = False

    @property
    def speed(self) -> float:
        return self.m / self.r


@dataclass(frozen=True)
class Verdict:
    """One accept/reject decision, serializable as JSON."""

    test: str
    params: dict
    estimate: Any
    reference: Any
    tolerance: Any
    passed: bool
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {
            "test": self.test,
            "params": self.params,
            "estimate": self.estimate,
            "reference": self.reference,
            "tolerance": self.tolerance,
            "pass": bool(self.passed),
        }
        if self.details:
            d["details"] = self.details
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# replicas
# ---------------------------------------------------------------------------


class ReplicaError(RuntimeError):
    """A replica task failed; ``index`` names the replica."""

    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"replica {index} failed: {cause!r}")
        self.index = index
        self.cause = cause


def run_replicas(task: Callable[[int], Any], n: int, root_seed: int, workers: int = 1,
                 offset: int = 0) -> list:
    """Run ``task(derive_seed(root_seed, i))`` for i = offset .. offset+n-1.

    Outputs are returned in replica order whatever the number of worker
    processes.  ``task`` must be picklable when ``workers > 1``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    seeds = [derive_seed(root_seed, offset + i) for i in range(n)]
    if workers <= 1:
        out = []
        for i, s in enumerate(seeds):
            try:
                out.append(task(s))
            except Exception as exc:
                raise ReplicaError(offset + i, exc) from exc
        return out
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(task, s) for s in seeds]
        out = []
        for i, f in enumerate(futures):
            try:
                out.append(f.result())
            except Exception as exc:
                raise ReplicaError(offset + i, exc) from exc
        return out


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


def _batches(x: np.ndarray, n_batches: int) -> np.ndarray:
    size = x.size // n_batches
    if size < 1:
        raise ValueError("fewer samples than batches")
    return x[: size * n_batches].reshape(n_batches, size).mean(axis=1)


def batch_means(x, n_batches: int = 20) -> Estimate:
    """Mean of a correlated series with a batch-means standard error."""
    x = np.asarray(x, dtype=float)
    bm = _batches(x, n_batches)
    return Estimate(float(np.mean(x)), float(np.std(bm, ddof=1) / math.sqrt(n_batches)), int(x.size))


def ratio_batch_means(num, den, n_batches: int = 20) -> Estimate:
    """Ratio ``sum(num) / sum(den)`` with a batch-means (delta-method) error."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    ratio = float(np.sum(num) / np.sum(den))
    d = _batches(num - ratio * den, n_batches)
    se = float(np.std(d, ddof=1) / math.sqrt(n_batches) / np.mean(den))
    return Estimate(ratio, se, int(num.size))


def regen_sigma(increments) -> RegenStats:
    """Plug-in estimates of r, m, beta^2 and sigma = beta / sqrt(r).

    ``increments`` is a sequence of (dt, dx) regeneration-cycle pairs.  The
    result is flagged ``degenerate`` when all cycle lengths are equal.
    """
    inc = np.asarray(increments, dtype=float).reshape(-1, 2)
    if inc.shape[0] < 2:
        raise ValueError("need at least two increments")
    dt, dx = inc[:, 0], inc[:, 1]
    r = float(np.mean(dt))
    m = float(np.mean(dx))
    beta2 = float(np.var(dx - dt * (m / r), ddof=1))
    degenerate = bool(np.all(dt == dt[0]))
    return RegenStats(r, m, beta2, math.sqrt(beta2 / r), int(inc.shape[0]), degenerate)


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov
# ---------------------------------------------------------------------------


def kolmogorov_sf(lam):
    """Survival function of the Kolmogorov distribution,
    ``P(K > lam) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lam^2)``.

    For small ``lam`` the equivalent Jacobi-theta form
    ``1 - sqrt(2 pi)/lam sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 lam^2))`` is used.
    """
    lam_a = np.atleast_1d(np.asarray(lam, dtype=float))
    out = np.empty_like(lam_a)
    for i, l in enumerate(lam_a):
        if l <= 0:
            out[i] = 1.0
        elif l < 1.0:
            s = 0.0
            for k in range(1, 50):
                t = math.exp(-((2 * k - 1) ** 2) * math.pi ** 2 / (8 * l * l))
                s += t
                if t < 1e-18:
                    break
            out[i] = 1.0 - math.sqrt(2 * math.pi) / l * s
        else:
            s = 0.0
            for k in range(1, 100):
                t = math.exp(-2.0 * k * k * l * l)
                s += t if k % 2 else -t
                if t < 1e-18:
                    break
            out[i] = 2.0 * s
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if np.ndim(lam) == 0 else out


def ks_1samp(samples, cdf: Callable[[np.ndarray], np.ndarray]) -> KsReport:
    """One-sample KS distance against a reference CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("no samples")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    d = min(max(d, 0.0), 1.0)
    return KsReport(d, n, kolmogorov_sf(math.sqrt(n) * d))


def ks_2samp(a, b) -> KsReport:
    """Two-sample KS distance; ``n`` is the effective size n1 n2 / (n1 + n2)."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    allx = np.concatenate([a, b])
    fa = np.searchsorted(a, allx, side="right") / a.size
    fb = np.searchsorted(b, allx, side="right") / b.size
    d = float(np.max(np.abs(fa - fb)))
    ne = a.size * b.size / (a.size + b.size)
    return KsReport(d, ne, kolmogorov_sf(math.sqrt(ne) * d))


def normal_cdf(x):
    """Standard normal CDF."""
    return special.ndtr(np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------


def lln_verdict(endpoints: Sequence[float], v_formula: float, bias_allowance: float = 0.0,
                test: str = "lln", params: dict | None = None) -> Verdict:
    """Pass iff ``|mean - v| <= 3 stderr + bias_allowance``."""
    est = Estimate.from_samples(endpoints)
    tol = 3.0 * est.stderr + bias_allowance
    ok = abs(est.mean - v_formula) <= tol
    return Verdict(test, params or {}, est.as_dict(), float(v_formula), tol, ok)


def clt_verdict(endpoints: Sequence[float], v: float, T: float) -> KsReport:
    """KS test of ``(X_T - T v) / sd`` against N(0, 1), sd being the
    empirical standard deviation of ``X_T - T v``."""
    x = np.asarray(endpoints, dtype=float) - T * v
    if x.size < 2:
        raise ValueError("need at least two endpoints")
    sd = float(np.std(x, ddof=1))
    return ks_1samp(x / sd, normal_cdf)
