"""Closed-form joint asymptotics of quantile and dispersion estimators.

All covariance matrices are those of the ``sqrt(n)``-scaled limit.  The
transforms ``h1`` (quantile) and ``h2`` (dispersion) enter only through their
derivatives at the limit point, so they are passed as :class:`TransformSpec`
values or as preset names resolved at that point.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .distributions import (
    Distribution,
    MomentUnavailable,
    abs_partial_expectation,
    moment_exists,
    partial_expectation,
    standardized_moment,
    summarize,
)
from .estimators import MAD, MEDIAN_AD, VARIANCE, Dispersion

__all__ = [
    "ConditionViolated",
    "QuantileKind",
    "TransformSpec",
    "EstimatorPairSpec",
    "AsymptoticResult",
    "TauSpec",
    "ConditionReport",
    "tau",
    "delta_method",
    "asymptotic_hist_dispersion",
    "asymptotic_hist_medianad",
    "asymptotic_locscale_dispersion",
    "asymptotic_locscale_medianad",
    "asymptotic_hist_abs_moment",
    "asymptotic_pair",
    "vector_asymptotics",
    "scale_for_sample_sizes",
    "validate_conditions",
]

DENSITY_FLOOR = 1e-12


class ConditionViolated(ValueError):
    """A regularity condition needed by a limit theorem fails numerically."""

    def __init__(self, label: str, detail: str):
        self.label = label
        self.detail = detail
        super().__init__(f"{label} violated: {detail}")


class QuantileKind(str, enum.Enum):
    SAMPLE = "sample"
    LOCSCALE = "locscale"
    LOCSCALE_KNOWN_MEAN = "locscale_known"

    @classmethod
    def parse(cls, text: str) -> "QuantileKind":
        key = text.strip().lower().replace("-", "_")
        aliases = {
            "sample": cls.SAMPLE, "hist": cls.SAMPLE, "historical": cls.SAMPLE,
            "locscale": cls.LOCSCALE, "loc_scale": cls.LOCSCALE,
            "locscale_unknown": cls.LOCSCALE,
            "locscale_known": cls.LOCSCALE_KNOWN_MEAN, "loc_scale_known": cls.LOCSCALE_KNOWN_MEAN,
            "known_mean": cls.LOCSCALE_KNOWN_MEAN,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown quantile estimator {text!r}") from None


@dataclass(frozen=True)
class TransformSpec:
    """A differentiable transform evaluated at the limit point."""

    value_at: float
    derivative_at: float
    preset: str = "custom"

    def __post_init__(self):
        if not math.isfinite(self.derivative_at):
            raise ValueError(f"derivative must be finite, got {self.derivative_at}")

    @classmethod
    def from_preset(cls, name: str, x: float) -> "TransformSpec":
        if name == "identity":
            return cls(x, 1.0, name)
        if name == "negate":
            return cls(-x, -1.0, name)
        if name == "square":
            return cls(x * x, 2.0 * x, name)
        if name == "log":
            if x <= 0:
                raise ValueError(f"log transform undefined at {x}")
            return cls(math.log(x), 1.0 / x, name)
        raise ValueError(f"unknown transform preset {name!r}")

    def apply(self, values, at: float):
        """Evaluate the transform on estimates; custom transforms are linearised."""
        values = np.asarray(values, dtype=float)
        if self.preset == "identity":
            return values
        if self.preset == "negate":
            return -values
        if self.preset == "square":
            return values * values
        if self.preset == "log":
            return np.log(values)
        return self.value_at + self.derivative_at * (values - at)


Transform = Union[TransformSpec, str]


def _resolve(h: Transform, x: float) -> TransformSpec:
    return TransformSpec.from_preset(h, x) if isinstance(h, str) else h


def _sgn(x: float) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class EstimatorPairSpec:
    quantile_kind: QuantileKind
    p: float
    dispersion: Dispersion
    h1: Transform = "identity"
    h2: Transform = "identity"

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        object.__setattr__(self, "quantile_kind", QuantileKind(self.quantile_kind))


@dataclass(frozen=True)
class AsymptoticResult:
    """Limit covariance of ``sqrt(n) (h1(q_hat) - h1(q), h2(D_hat) - h2(D))``."""

    cov: np.ndarray = field(compare=False)
    corr: float
    sign_factor: int
    theorem: str

    @property
    def sigma11(self) -> float:
        return float(self.cov[0, 0])

    @property
    def sigma12(self) -> float:
        return float(self.cov[0, 1])

    @property
    def sigma22(self) -> float:
        return float(self.cov[1, 1])


@dataclass(frozen=True)
class TauSpec:
    """``tau_k(eta(X), p)`` with ``eta`` the identity or ``|x - mu|``."""

    eta: str
    k: int
    p: float

    def __post_init__(self):
        if self.eta not in ("identity", "absdev"):
            raise ValueError(f"eta must be 'identity' or 'absdev', got {self.eta!r}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")


# ---------------------------------------------------------------------------
# building blocks in standardised units

def _q_y(dist: Distribution, p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if p == 0.5 and dist.is_symmetric:
        # inverse-cdf round-off would otherwise leave sgn(q) = +-1
        return 0.0
    return float(dist.std_ppf(p))


def _tau_std(dist: Distribution, k: int, p: float, absolute: bool) -> float:
    """tau_k of Y (identity) or |Y| (absolute), in standardised units."""
    q = _q_y(dist, p)
    pe = abs_partial_expectation if absolute else partial_expectation
    return pe(dist, k, q, math.inf) - (1.0 - p) * pe(dist, k)


def tau(dist: Distribution, spec: TauSpec) -> float:
    """``(1-p) (E[eta^k(X) | X > q_X(p)] - E[eta^k(X)])``."""
    if spec.eta == "absdev":
        return dist.sigma ** spec.k * _tau_std(dist, spec.k, spec.p, absolute=True)
    # X^k = sum_j C(k,j) mu^(k-j) sigma^j Y^j
    total = 0.0
    for j in range(1, spec.k + 1):
        coef = math.comb(spec.k, j) * dist.mu ** (spec.k - j) * dist.sigma ** j
        if coef != 0.0:
            total += coef * _tau_std(dist, j, spec.p, absolute=False)
    return total


def _mean_correction(dist: Distribution, r: int) -> float:
    """``-r E[|Y|^(r-1) sgn(Y)]``: the sample-mean term of the r-th absolute moment."""
    pos = abs_partial_expectation(dist, r - 1, 0.0, math.inf)
    neg = abs_partial_expectation(dist, r - 1, -math.inf, 0.0)
    return -r * (pos - neg)


def _abs_moment_terms(dist: Distribution, r: int, c: float) -> float:
    """``Var(|Y|^r + c Y)``."""
    m_r = abs_partial_expectation(dist, r)
    m_2r = abs_partial_expectation(dist, 2 * r)
    # E[|Y|^r Y] = E[|Y|^(r+1) sgn Y]
    cross = (abs_partial_expectation(dist, r + 1, 0.0, math.inf)
             - abs_partial_expectation(dist, r + 1, -math.inf, 0.0))
    e1 = partial_expectation(dist, 1)
    e2 = partial_expectation(dist, 2)
    return m_2r + 2.0 * c * cross + c * c * e2 - (m_r + c * e1) ** 2


def delta_method(cov, jacobian) -> np.ndarray:
    """``J cov J^T``."""
    cov = np.asarray(cov, dtype=float)
    jac = np.atleast_2d(np.asarray(jacobian, dtype=float))
    if jac.shape[1] != cov.shape[0]:
        raise ValueError(f"jacobian shape {jac.shape} incompatible with cov {cov.shape}")
    out = jac @ cov @ jac.T
    return 0.5 * (out + out.T)


def _finish(base: np.ndarray, q_x: float, d: float, h1: Transform, h2: Transform,
            theorem: str) -> AsymptoticResult:
    """Apply the delta method with diagonal Jacobian and form the correlation."""
    t1, t2 = _resolve(h1, q_x), _resolve(h2, d)
    sign = _sgn(t1.derivative_at) * _sgn(t2.derivative_at)
    cov = delta_method(base, np.diag([t1.derivative_at, t2.derivative_at]))
    denom = base[0, 0] * base[1, 1]
    if sign == 0 or denom <= 0.0:
        corr = 0.0
    else:
        corr = sign * float(base[0, 1] / math.sqrt(denom))
        corr = max(-1.0, min(1.0, corr))
    return AsymptoticResult(cov=cov, corr=corr, sign_factor=sign, theorem=theorem)


def _require(dist, order):
    if not moment_exists(dist, order):
        raise MomentUnavailable(order, dist)


def _check_density(dist: Distribution, y: float, label: str, what: str):
    f = float(dist.std_pdf(y)) / dist.sigma
    if not f > DENSITY_FLOOR:
        raise ConditionViolated(label, f"density {f:.3g} at {what} is not positive")


def _hist_abs_cov(dist: Distribution, p: float, r: int, c: float) -> np.ndarray:
    """Unit-transform covariance for sample quantile x r-th absolute moment,
    given the sample-mean correction coefficient ``c``."""
    _require(dist, 2 * r)
    q = _q_y(dist, p)
    _check_density(dist, q, "(Q1)", "q_X(p)")
    f_q = float(dist.std_pdf(q))
    s = dist.sigma
    s11 = s * s * p * (1.0 - p) / (f_q * f_q)
    num = _tau_std(dist, r, p, absolute=True) + c * _tau_std(dist, 1, p, absolute=False)
    s12 = s ** (r + 1) * num / f_q
    s22 = s ** (2 * r) * _abs_moment_terms(dist, r, c)
    return np.array([[s11, s12], [s12, s22]])


# ---------------------------------------------------------------------------
# public operations

def asymptotic_hist_dispersion(dist: Distribution, p: float, r: int,
                               h1: Transform = "identity",
                               h2: Transform = "identity") -> AsymptoticResult:
    """Sample quantile with the sample MAD (``r=1``) or sample variance (``r=2``).

    The cross covariance is ``(tau_r(|X-mu|, p) + (2-r)(2F(mu)-1) tau_1(p)) /
    f(q_X(p))``.  Requires ``E[X^(2r)] < inf``; for ``r=1`` also a positive
    density at the mean.
    """
    if r not in (1, 2):
        raise ValueError(f"r must be 1 or 2, got {r}")
    c = 0.0
    if r == 1:
        _require(dist, 2)
        _check_density(dist, 0.0, "(MD2)", "the mean")
        c = 2.0 * float(dist.std_cdf(0.0)) - 1.0
    base = _hist_abs_cov(dist, p, r, c)
    d = dist.sigma ** r * abs_partial_expectation(dist, r)
    return _finish(base, float(dist.ppf(p)), d, h1, h2, f"hist-dispersion(r={r})")


def asymptotic_hist_abs_moment(dist: Distribution, p: float, r: int,
                               h1: Transform = "identity",
                               h2: Transform = "identity") -> AsymptoticResult:
    """Sample quantile with the r-th absolute central sample moment, any ``r >= 1``.

    The sample-mean correction is ``-r E[(X-mu)^(r-1) sgn(X-mu)^r]``.
    """
    if r < 1 or int(r) != r:
        raise ValueError(f"r must be a positive integer, got {r}")
    r = int(r)
    _require(dist, 2 * r)
    if r == 1:
        _check_density(dist, 0.0, "(MD2)", "the mean")
    c = _mean_correction(dist, r)
    base = _hist_abs_cov(dist, p, r, c)
    d = dist.sigma ** r * abs_partial_expectation(dist, r)
    return _finish(base, float(dist.ppf(p)), d, h1, h2, f"hist-abs-moment(r={r})")


def _medianad_var(summary) -> float:
    """Asymptotic variance of sqrt(n) times the sample MedianAD."""
    return (1.0 + summary.gamma / summary.f_med ** 2) / (4.0 * summary.beta ** 2)


def _check_medianad(dist, summary):
    if not summary.f_med > DENSITY_FLOOR:
        raise ConditionViolated("(MD3)", f"density {summary.f_med:.3g} at the median")
    if not summary.beta > DENSITY_FLOOR:
        raise ConditionViolated("(MD3)", "density vanishes at both median +/- MedianAD")


def asymptotic_hist_medianad(dist: Distribution, p: float,
                             h1: Transform = "identity",
                             h2: Transform = "identity") -> AsymptoticResult:
    """Sample quantile with the sample MedianAD.  No moment conditions."""
    sm = summarize(dist)
    _check_medianad(dist, sm)
    q_x = float(dist.ppf(p))
    f_q = float(dist.pdf(q_x))
    if not f_q > DENSITY_FLOOR:
        raise ConditionViolated("(Q1)", f"density {f_q:.3g} at q_X(p)")
    num = (-max(0.0, sm.F_med_plus_xi - max(sm.F_med_minus_xi, p))
           + 0.5 * (1.0 - p)
           + sm.alpha / sm.f_med * max(-0.5 * p, 0.5 * (p - 1.0)))
    g11 = p * (1.0 - p) / (f_q * f_q)
    g12 = num / (f_q * sm.beta)
    g22 = _medianad_var(sm)
    base = np.array([[g11, g12], [g12, g22]])
    return _finish(base, q_x, sm.xi, h1, h2, "hist-medianad")


def _locscale_var(dist: Distribution, q: float, mean_known: bool) -> float:
    _require(dist, 4)
    e3 = standardized_moment(dist, 3)
    e4 = standardized_moment(dist, 4)
    s2 = dist.sigma ** 2
    if mean_known:
        return s2 * q * q * (e4 - 1.0) / 4.0
    return s2 * (1.0 + q * (q * (e4 - 1.0) / 4.0 + e3))


def asymptotic_locscale_dispersion(dist: Distribution, p: float, r: int,
                                   mean_known: bool = False,
                                   h1: Transform = "identity",
                                   h2: Transform = "identity") -> AsymptoticResult:
    """Location-scale quantile ``mean + sd q_Y(p)`` with the sample MAD or variance.

    With ``mean_known`` the location is fixed, so the sample-mean part of the
    cross covariance drops out and only the ``sd`` part remains.
    """
    if r not in (1, 2):
        raise ValueError(f"r must be 1 or 2, got {r}")
    _require(dist, 4)
    if r == 1:
        _check_density(dist, 0.0, "(MD2)", "the mean")
    q = _q_y(dist, p)
    c = (2 - r) * (2.0 * float(dist.std_cdf(0.0)) - 1.0)
    e3 = standardized_moment(dist, 3)
    # Cov(Y^2, |Y|^r + c Y)
    sd_part = (abs_partial_expectation(dist, r + 2) - abs_partial_expectation(dist, r)
               + c * e3)
    bracket = 0.5 * q * sd_part
    if not mean_known:
        # Cov(Y, |Y|^r + c Y)
        bracket += (partial_expectation(dist, r + 1)
                    + (2 - r) * (2.0 * float(dist.std_cdf(0.0)) - 1.0
                                 - 2.0 * abs_partial_expectation(dist, r + 1, -math.inf, 0.0)))
    s = dist.sigma
    l11 = _locscale_var(dist, q, mean_known)
    l12 = s ** (r + 1) * bracket
    l22 = s ** (2 * r) * _abs_moment_terms(dist, r, c)
    base = np.array([[l11, l12], [l12, l22]])
    d = s ** r * abs_partial_expectation(dist, r)
    tag = "locscale-known-dispersion" if mean_known else "locscale-dispersion"
    return _finish(base, float(dist.ppf(p)), d, h1, h2, f"{tag}(r={r})")


def asymptotic_locscale_medianad(dist: Distribution, p: float, mean_known: bool = False,
                                 h1: Transform = "identity",
                                 h2: Transform = "identity") -> AsymptoticResult:
    """Location-scale quantile with the sample MedianAD.  Needs ``E[X^4] < inf``."""
    _require(dist, 4)
    sm = summarize(dist)
    _check_medianad(dist, sm)
    q = _q_y(dist, p)
    s, m = dist.sigma, dist.mu
    lo = (sm.med - sm.xi - m) / s
    hi = (sm.med + sm.xi - m) / s
    nu = (sm.med - m) / s
    ratio = sm.alpha / sm.f_med  # scale free
    beta_y = sm.beta * s
    pe = partial_expectation

    def weighted(a, b):
        # E[(q Y^2 + 2 Y) 1{a < Y <= b}], dropping 2Y when the mean is known
        out = q * pe(dist, 2, a, b)
        if not mean_known:
            out += 2.0 * pe(dist, 1, a, b)
        return out

    bracket = (-weighted(lo, hi) + ratio * weighted(-math.inf, nu)
               + 0.5 * q * (1.0 - ratio))
    p12 = s * s * bracket / (2.0 * beta_y)
    p11 = _locscale_var(dist, q, mean_known)
    p22 = _medianad_var(sm)
    base = np.array([[p11, p12], [p12, p22]])
    tag = "locscale-known-medianad" if mean_known else "locscale-medianad"
    return _finish(base, float(dist.ppf(p)), sm.xi, h1, h2, tag)


def asymptotic_pair(dist: Distribution, spec: EstimatorPairSpec) -> AsymptoticResult:
    """Dispatch an :class:`EstimatorPairSpec` to the matching closed form."""
    disp, kind = spec.dispersion, spec.quantile_kind
    if kind is QuantileKind.SAMPLE:
        if disp.kind == "medianad":
            return asymptotic_hist_medianad(dist, spec.p, spec.h1, spec.h2)
        if disp.kind == "abs_moment":
            return asymptotic_hist_abs_moment(dist, spec.p, disp.r, spec.h1, spec.h2)
        return asymptotic_hist_dispersion(dist, spec.p, disp.moment_order, spec.h1, spec.h2)
    known = kind is QuantileKind.LOCSCALE_KNOWN_MEAN
    if disp.kind == "medianad":
        return asymptotic_locscale_medianad(dist, spec.p, known, spec.h1, spec.h2)
    if disp.kind == "abs_moment":
        if disp.r not in (1, 2):
            raise ValueError("location-scale quantile pairs only with r in {1, 2}")
        return asymptotic_locscale_dispersion(dist, spec.p, disp.r, known, spec.h1, spec.h2)
    return asymptotic_locscale_dispersion(dist, spec.p, disp.moment_order, known,
                                          spec.h1, spec.h2)


def vector_asymptotics(dist: Distribution, ps: Sequence[float], r: int,
                       jacobian=None) -> np.ndarray:
    """Joint limit covariance of m sample quantiles and the r-th absolute moment.

    Returns ``J S J^T`` where ``S`` is the ``(m+1) x (m+1)`` covariance of
    ``(q_n(p_1), ..., q_n(p_m), m_hat(r))``; ``jacobian=None`` returns ``S``.
    """
    ps = [float(p) for p in ps]
    if not ps:
        raise ValueError("need at least one probability")
    if any(b <= a for a, b in zip(ps, ps[1:])):
        raise ValueError(f"probabilities must be strictly increasing, got {ps}")
    if r in (1, 2):
        c = (2 - r) * (2.0 * float(dist.std_cdf(0.0)) - 1.0)
        if r == 1:
            _require(dist, 2)
            _check_density(dist, 0.0, "(MD2)", "the mean")
    else:
        _require(dist, 2 * r)
        c = _mean_correction(dist, r)
    m = len(ps)
    out = np.empty((m + 1, m + 1))
    qs = [_q_y(dist, p) for p in ps]
    fs = []
    for q in qs:
        _check_density(dist, q, "(Q1)", "q_X(p)")
        fs.append(float(dist.std_pdf(q)) / dist.sigma)
    for i in range(m):
        for j in range(i, m):
            out[i, j] = out[j, i] = ps[i] * (1.0 - ps[j]) / (fs[i] * fs[j])
        out[i, m] = out[m, i] = _hist_abs_cov(dist, ps[i], r, c)[0, 1]
    out[m, m] = dist.sigma ** (2 * r) * _abs_moment_terms(dist, r, c)
    if jacobian is None:
        return out
    return delta_method(out, jacobian)


def scale_for_sample_sizes(base: AsymptoticResult, v: int, w: int) -> AsymptoticResult:
    """Quantile on ``v n`` points, dispersion on ``w n`` points, nested samples.

    The cross covariance shrinks by ``1/max(v, w)`` and the correlation by
    ``sqrt(min(v, w) / max(v, w))``.
    """
    if int(v) != v or int(w) != w or v < 1 or w < 1:
        raise ValueError(f"v and w must be positive integers, got {v}, {w}")
    big = max(v, w)
    cov = np.array(base.cov, dtype=float)
    cov[0, 0] /= v
    cov[1, 1] /= w
    cov[0, 1] = cov[1, 0] = base.cov[0, 1] / big
    corr = base.corr * math.sqrt(min(v, w) / big)
    return replace(base, cov=cov, corr=corr, theorem=f"{base.theorem}+scaling(v={v},w={w})")


# ---------------------------------------------------------------------------
# regularity conditions

@dataclass(frozen=True)
class ConditionCheck:
    label: str
    status: str  # "satisfied" | "violated" | "unknown"
    evidence: str


@dataclass(frozen=True)
class ConditionReport:
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.status == "satisfied" for c in self.checks)

    @property
    def status(self) -> str:
        states = {c.status for c in self.checks}
        if "violated" in states:
            return "violated"
        if "unknown" in states:
            return "unknown"
        return "satisfied"

    def __getitem__(self, label: str) -> ConditionCheck:
        for c in self.checks:
            if c.label == label:
                return c
        raise KeyError(label)

    def summary(self) -> str:
        return ";".join(f"{c.label}={c.status}" for c in self.checks)


def _differentiable_at(dist: Distribution, x: float) -> Optional[bool]:
    """Compare a central difference of the cdf with the density at ``x``."""
    h = 1e-5 * dist.sigma
    fd = float(dist.cdf(x + h) - dist.cdf(x - h)) / (2 * h)
    f = float(dist.pdf(x))
    if not (math.isfinite(fd) and math.isfinite(f)):
        return None
    return abs(fd - f) <= 1e-4 * max(1.0, abs(f))


def _density_check(dist, points, need_all=True):
    vals = {name: float(dist.pdf(x)) for name, x in points.items()}
    smooth = {name: _differentiable_at(dist, x) for name, x in points.items()}
    pos = [v > DENSITY_FLOOR for v in vals.values()]
    ok_pos = all(pos) if need_all else any(pos)
    ev = ", ".join(f"f({k})={v:.6g}" for k, v in vals.items())
    if None in smooth.values():
        return "unknown", ev
    if not all(smooth.values()):
        bad = [k for k, v in smooth.items() if not v]
        return "violated", ev + f"; cdf not differentiable at {','.join(bad)}"
    return ("satisfied" if ok_pos else "violated"), ev


def _moment_check(dist, order, label):
    exists = moment_exists(dist, order)
    ev = f"E|X|^{order:g} {'finite' if exists else 'infinite'}"
    return ConditionCheck(label, "satisfied" if exists else "violated", ev)


def validate_conditions(dist: Distribution, spec: EstimatorPairSpec) -> ConditionReport:
    """Numeric spot checks of the moment, smoothness and positivity conditions
    for the estimator pair.  Never raises for a failing condition."""
    checks = []
    q_x = float(dist.ppf(spec.p))
    if spec.quantile_kind is QuantileKind.SAMPLE:
        status, ev = _density_check(dist, {"q_X(p)": q_x})
        checks.append(ConditionCheck("(Q1)", status, ev))
    else:
        c = _moment_check(dist, 4, "(Q2)")
        checks.append(ConditionCheck("(Q2)", c.status, c.evidence + "; (X-mu)^2 non-degenerate"))
    disp = spec.dispersion
    if disp.kind == "variance":
        c = _moment_check(dist, 4, "(MD1)")
        checks.append(ConditionCheck("(MD1)", c.status, c.evidence + "; (X-mu)^2 non-degenerate"))
    elif disp.kind == "mad":
        m = _moment_check(dist, 2, "(MD2)")
        cont = float(dist.pdf(dist.mu))
        status = m.status
        if status == "satisfied" and not cont > DENSITY_FLOOR:
            status = "violated"
        checks.append(ConditionCheck("(MD2)", status, f"{m.evidence}; f(mu)={cont:.6g}"))
    elif disp.kind == "medianad":
        try:
            sm = summarize(dist)
        except Exception as exc:  # root finding failed: cannot judge
            checks.append(ConditionCheck("(MD3)", "unknown", str(exc)))
        else:
            s1, e1 = _density_check(dist, {"nu": sm.med})
            s2, e2 = _density_check(dist, {"nu-xi": sm.med - sm.xi, "nu+xi": sm.med + sm.xi},
                                    need_all=False)
            order = {"violated": 2, "unknown": 1, "satisfied": 0}
            status = max((s1, s2), key=order.__getitem__)
            checks.append(ConditionCheck("(MD3)", status, f"{e1}, {e2}"))
    else:
        c = _moment_check(dist, 2 * disp.r, f"(M{disp.r})")
        checks.append(c)
        if disp.r == 1:
            cont = float(dist.pdf(dist.mu))
            checks.append(ConditionCheck("(P at mu)", "satisfied" if cont > DENSITY_FLOOR
                                         else "violated", f"f(mu)={cont:.6g}"))
    return ConditionReport(tuple(checks))
