"""Simulation harness: windowed estimator series, Pearson correlations across
windows, replication summaries and an empirical covariance oracle.

Every window draws from its own Philox stream keyed by
``SeedSequence(seed, spawn_key=(replication, window))``, so results do not
depend on how replications are scheduled across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .asymptotics import (
    ConditionViolated,
    EstimatorPairSpec,
    QuantileKind,
    TransformSpec,
    asymptotic_pair,
    scale_for_sample_sizes,
)
from .distributions import Distribution, MomentUnavailable, abs_partial_expectation, summarize
from .estimators import dispersion_estimate, loc_scale_quantile, sample_quantile

__all__ = [
    "DegenerateSeries",
    "SimulationConfig",
    "SimulationSummary",
    "window_rng",
    "simulate_series",
    "pearson_correlation",
    "fisher_ci",
    "run_experiment",
    "theoretical_correlation",
    "true_dispersion",
    "OracleResult",
    "empirical_covariance",
]


class DegenerateSeries(ValueError):
    """A correlation input is constant, so Pearson's coefficient is undefined."""


@dataclass(frozen=True)
class SimulationConfig:
    dist: Distribution
    spec: EstimatorPairSpec
    n: int = 252
    l: int = 50
    reps: int = 1000
    seed: int = 0
    v: int = 1
    w: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.l < 3:
            raise ValueError(f"l must be >= 3, got {self.l}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if self.v < 1 or self.w < 1:
            raise ValueError(f"v and w must be >= 1, got {self.v}, {self.w}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    @property
    def window_size(self) -> int:
        return self.n * max(self.v, self.w)


@dataclass(frozen=True)
class SimulationSummary:
    mean_corr: float
    empirical_ci: tuple
    theoretical_corr: Optional[float]
    fisher_ci: Optional[tuple]
    reps_used: int
    correlations: np.ndarray = field(compare=False, repr=False, default=None)


def window_rng(seed: int, replication: int, window: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(replication, window))
    return np.random.Generator(np.random.Philox(ss))


def _draw_windows(dist: Distribution, seed: int, replication: int, count: int,
                  size: int) -> np.ndarray:
    if not dist.sigma > 0:
        raise ValueError("degenerate distribution: sigma must be positive")
    out = np.empty((count, size))
    for j in range(count):
        out[j] = dist.sample(window_rng(seed, replication, j), size)
    return out


def _quantile_estimates(x, dist, kind: QuantileKind, p: float):
    if kind is QuantileKind.SAMPLE:
        return sample_quantile(x, p)
    return loc_scale_quantile(x, p, dist, mean_known=kind is QuantileKind.LOCSCALE_KNOWN_MEAN)


def _apply(h, values):
    """Apply a transform to a series.  Custom transforms act through their
    linearisation, which leaves correlations unchanged up to sign."""
    spec = TransformSpec.from_preset(h, 1.0) if isinstance(h, str) else h
    return spec.apply(values, 0.0)


def simulate_series(config: SimulationConfig, replication_index: int):
    """Quantile and dispersion estimates on ``l`` disjoint windows.

    Each window holds ``max(v, w) n`` draws; the quantile estimator reads the
    first ``v n`` and the dispersion estimator the first ``w n`` of them.
    """
    c = config
    x = _draw_windows(c.dist, c.seed, replication_index, c.l, c.window_size)
    qs = _quantile_estimates(x[:, : c.v * c.n], c.dist, c.spec.quantile_kind, c.spec.p)
    ds = dispersion_estimate(x[:, : c.w * c.n], c.spec.dispersion)
    return _apply(c.spec.h1, qs), _apply(c.spec.h2, ds)


def pearson_correlation(xs, ys) -> float:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError(f"series must be 1-d of equal length, got {xs.shape} and {ys.shape}")
    if xs.size < 3:
        raise ValueError(f"need at least 3 points, got {xs.size}")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateSeries("constant series has no correlation")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def fisher_ci(rho: float, l: int, level: float = 0.95) -> tuple:
    """Confidence interval for a correlation estimated from ``l`` pairs."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [-1, 1], got {rho}")
    if l < 4:
        raise ValueError(f"l must be >= 4, got {l}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    if abs(rho) == 1.0:
        return (rho, rho)
    z = math.atanh(rho)
    half = float(special.ndtri(0.5 * (1.0 + level))) / math.sqrt(l - 3)
    return (math.tanh(z - half), math.tanh(z + half))


def _one_replication(args):
    config, i = args
    return pearson_correlation(*simulate_series(config, i))


def theoretical_correlation(config: SimulationConfig) -> Optional[float]:
    """Asymptotic correlation for the config, or None when it does not exist."""
    try:
        res = asymptotic_pair(config.dist, config.spec)
    except (MomentUnavailable, ConditionViolated):
        return None
    if (config.v, config.w) != (1, 1):
        res = scale_for_sample_sizes(res, config.v, config.w)
    return res.corr


def run_experiment(config: SimulationConfig) -> SimulationSummary:
    theo = theoretical_correlation(config)
    jobs = [(config, i) for i in range(config.reps)]
    if config.workers > 1 and config.reps > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as ex:
            corrs = list(ex.map(_one_replication, jobs, chunksize=max(1, config.reps // (4 * config.workers))))
    else:
        corrs = [_one_replication(j) for j in jobs]
    corrs = np.asarray(corrs)
    lo, hi = np.percentile(corrs, [2.5, 97.5])
    return SimulationSummary(
        mean_corr=float(corrs.mean()),
        empirical_ci=(float(lo), float(hi)),
        theoretical_corr=theo,
        fisher_ci=None if theo is None else fisher_ci(theo, config.l),
        reps_used=int(corrs.size),
        correlations=corrs,
    )


# ---------------------------------------------------------------------------
# empirical covariance oracle

def true_dispersion(dist: Distribution, disp) -> float:
    if disp.kind == "medianad":
        return summarize(dist).xi
    r = disp.moment_order
    return dist.sigma ** r * abs_partial_expectation(dist, r)


@dataclass(frozen=True)
class OracleResult:
    """Empirical covariance of ``sqrt(n)`` scaled deviations with per-entry
    Monte Carlo standard errors."""

    cov: np.ndarray
    se: np.ndarray
    reps: int


def _cov_with_se(a: np.ndarray, b: np.ndarray):
    da, db = a - a.mean(), b - b.mean()
    prod = da * db
    m = a.size
    return prod.sum() / (m - 1), prod.std(ddof=1) / math.sqrt(m)


def empirical_covariance(dist: Distribution, specs: Sequence[EstimatorPairSpec], n: int,
                         reps: int, seed: int) -> list:
    """One :class:`OracleResult` per spec, all computed on shared samples.

    Transforms in the specs are ignored; the covariances are of the raw
    estimators.
    """
    qkeys = sorted({(s.quantile_kind, s.p) for s in specs}, key=lambda k: (k[0].value, k[1]))
    dkeys = sorted({s.dispersion for s in specs}, key=lambda d: d.name)
    qest = {k: np.empty(reps) for k in qkeys}
    dest = {k: np.empty(reps) for k in dkeys}
    for i in range(reps):
        x = dist.sample(window_rng(seed, i, 0), n)
        for kind, p in qkeys:
            qest[(kind, p)][i] = _quantile_estimates(x, dist, kind, p)
        for d in dkeys:
            dest[d][i] = dispersion_estimate(x, d)
    root = math.sqrt(n)
    out = []
    for s in specs:
        a = root * (qest[(s.quantile_kind, s.p)] - float(dist.ppf(s.p)))
        b = root * (dest[s.dispersion] - true_dispersion(dist, s.dispersion))
        cov, se = np.empty((2, 2)), np.empty((2, 2))
        cov[0, 0], se[0, 0] = _cov_with_se(a, a)
        cov[1, 1], se[1, 1] = _cov_with_se(b, b)
        cov[0, 1], se[0, 1] = _cov_with_se(a, b)
        cov[1, 0], se[1, 0] = cov[0, 1], se[0, 1]
        out.append(OracleResult(cov, se, reps))
    return out
