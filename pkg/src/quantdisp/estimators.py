"""Finite-sample estimators with fixed order-statistic index conventions.

Every estimator reduces along the last axis, so a 2-d array of shape
``(windows, n)`` yields one estimate per window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "Dispersion",
    "VARIANCE",
    "MAD",
    "MEDIAN_AD",
    "abs_moment",
    "parse_dispersion",
    "order_index",
    "sample_quantile",
    "sample_variance",
    "sample_mad",
    "sample_median",
    "sample_median_ad",
    "abs_central_moment",
    "loc_scale_quantile",
    "dispersion_estimate",
]


@dataclass(frozen=True)
class Dispersion:
    """Which measure of dispersion; ``r`` only for ``abs_moment``."""

    kind: str
    r: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("variance", "mad", "medianad", "abs_moment"):
            raise ValueError(f"unknown dispersion kind {self.kind!r}")
        if self.kind == "abs_moment" and (self.r is None or self.r < 1):
            raise ValueError(f"absolute central moment needs integer r >= 1, got {self.r}")

    @property
    def name(self) -> str:
        return f"abs_moment{self.r}" if self.kind == "abs_moment" else self.kind

    @property
    def moment_order(self) -> Optional[int]:
        """The r of the r-th absolute central moment this estimator targets."""
        return {"variance": 2, "mad": 1, "medianad": None}.get(self.kind, self.r)


VARIANCE = Dispersion("variance")
MAD = Dispersion("mad")
MEDIAN_AD = Dispersion("medianad")


def abs_moment(r: int) -> Dispersion:
    return Dispersion("abs_moment", int(r))


def parse_dispersion(text: str) -> Dispersion:
    """Parse ``variance``, ``mad``, ``medianad`` or ``abs_moment<r>``."""
    key = text.strip().lower().replace("-", "").replace("_", "")
    if key in ("variance", "var"):
        return VARIANCE
    if key == "mad":
        return MAD
    if key in ("medianad", "median"):
        return MEDIAN_AD
    if key.startswith("absmoment"):
        return abs_moment(int(key[len("absmoment"):]))
    raise ValueError(f"unknown dispersion {text!r}")


def _as_sample(x, min_n=1) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        raise ValueError("sample must be a sequence")
    if a.shape[-1] < min_n:
        raise ValueError(f"sample needs at least {min_n} values, got {a.shape[-1]}")
    if not np.all(np.isfinite(a)):
        raise ValueError("sample contains non-finite values")
    return a


def order_index(n: int, p: float) -> int:
    """1-based index ``ceil(n p)``, robust to float noise at integer ``n p``."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    x = n * p
    k = round(x) if abs(x - round(x)) < 1e-9 * max(1.0, x) else math.ceil(x)
    return min(max(k, 1), n)


def sample_quantile(x, p: float):
    """The ``ceil(n p)``-th order statistic."""
    a = _as_sample(x)
    k = order_index(a.shape[-1], p)
    return np.partition(a, k - 1, axis=-1)[..., k - 1]


def sample_variance(x):
    """Unbiased variance, denominator ``n - 1``."""
    a = _as_sample(x, min_n=2)
    return np.var(a, axis=-1, ddof=1)


def sample_mad(x):
    """Mean absolute deviation about the sample mean, denominator ``n``."""
    a = _as_sample(x)
    return np.mean(np.abs(a - a.mean(axis=-1, keepdims=True)), axis=-1)


def _median_sorted(s):
    n = s.shape[-1]
    i, j = (n + 1) // 2, (n + 2) // 2
    return 0.5 * (s[..., i - 1] + s[..., j - 1])


def sample_median(x):
    """Average of the ``floor((n+1)/2)``-th and ``floor((n+2)/2)``-th order statistics."""
    a = _as_sample(x)
    return _median_sorted(np.sort(a, axis=-1))


def sample_median_ad(x):
    """Sample median of ``|x - sample_median(x)|``."""
    a = _as_sample(x)
    med = _median_sorted(np.sort(a, axis=-1))
    w = np.abs(a - np.expand_dims(med, -1))
    return _median_sorted(np.sort(w, axis=-1))


def abs_central_moment(x, r: int):
    """``(1/n) sum |x_i - mean|^r``."""
    if r < 1 or int(r) != r:
        raise ValueError(f"r must be a positive integer, got {r}")
    a = _as_sample(x)
    dev = np.abs(a - a.mean(axis=-1, keepdims=True))
    if r == 1:
        return np.mean(dev, axis=-1)
    return np.mean(dev ** int(r), axis=-1)


def loc_scale_quantile(x, p: float, dist, mean_known: bool = False):
    """``mean + sd * q_Y(p)`` with the sample standard deviation ``sd``.

    With ``mean_known`` the location is ``dist.mu`` instead of the sample mean.
    """
    a = _as_sample(x, min_n=2)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    q_y = float(dist.std_ppf(p))
    loc = dist.mu if mean_known else a.mean(axis=-1)
    return loc + np.sqrt(np.var(a, axis=-1, ddof=1)) * q_y


def dispersion_estimate(x, disp: Dispersion):
    if disp.kind == "variance":
        return sample_variance(x)
    if disp.kind == "mad":
        return sample_mad(x)
    if disp.kind == "medianad":
        return sample_median_ad(x)
    return abs_central_moment(x, disp.r)
