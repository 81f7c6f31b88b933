"""Acceptance criteria, each checked at its stated tolerance.

Every test records one PASS/FAIL line in ``RESULTS``; ``conftest.py`` prints
them at the end of the pytest run, and ``python tests/test_acceptance.py``
runs the criteria directly.
"""
import csv
import io
import math
import time

import numpy as np
import pytest

from quantdisp import cli
from quantdisp.asymptotics import (
    EstimatorPairSpec,
    QuantileKind,
    asymptotic_hist_abs_moment,
    asymptotic_hist_dispersion,
    asymptotic_hist_medianad,
    asymptotic_pair,
    scale_for_sample_sizes,
)
from quantdisp.distributions import MomentUnavailable, gaussian, student, summarize
from quantdisp.estimators import MAD, MEDIAN_AD, VARIANCE
from quantdisp.montecarlo import SimulationConfig, empirical_covariance, fisher_ci, run_experiment

SEED = 20261018
P_GRID = [i / 100 for i in range(1, 100)]
KINDS = list(QuantileKind)
DISPS = [VARIANCE, MAD, MEDIAN_AD]
RESULTS = {}


def record(number, title, failures, detail=""):
    status = "PASS" if not failures else "FAIL"
    line = f"[{status}] criterion {number}: {title}"
    if detail:
        line += f" | {detail}"
    if failures:
        line += " | failing: " + "; ".join(failures)
    RESULTS[number] = line
    print(line)
    assert not failures, line


# 1 -------------------------------------------------------------------------

REFERENCE_CELLS = [
    ("gaussian", gaussian, VARIANCE, 0.55), ("gaussian", gaussian, MAD, 0.48),
    ("gaussian", gaussian, MEDIAN_AD, 0.23),
    ("student(5)", lambda: student(5), VARIANCE, 0.43), ("student(5)", lambda: student(5), MAD, 0.51),
    ("student(5)", lambda: student(5), MEDIAN_AD, 0.23),
    ("student(3)", lambda: student(3), VARIANCE, None), ("student(3)", lambda: student(3), MAD, 0.48),
    ("student(3)", lambda: student(3), MEDIAN_AD, 0.23),
]


def test_criterion_1_reference_correlations():
    summarize.cache_clear()
    start = time.perf_counter()
    failures, shown = [], []
    for label, make, disp, expected in REFERENCE_CELLS:
        spec = EstimatorPairSpec(QuantileKind.SAMPLE, 0.95, disp)
        try:
            value = asymptotic_pair(make(), spec).corr
        except MomentUnavailable:
            value = None
        shown.append(f"{label}/{disp.name}={'NA' if value is None else f'{value:.4f}'}")
        if expected is None:
            if value is not None:
                failures.append(f"{label}/{disp.name} expected NA, got {value:.4f}")
        elif value is None or round(value, 2) != expected or abs(value - expected) > 5e-3:
            failures.append(f"{label}/{disp.name} expected {expected}, got "
                            f"{'NA' if value is None else f'{value:.4f}'}")
    elapsed = time.perf_counter() - start
    if elapsed >= 1.0:
        failures.append(f"runtime {elapsed:.2f}s >= 1s")
    record(1, "reference theoretical correlations at p=0.95", failures, ", ".join(shown) + f", {elapsed:.2f}s")


# 2 -------------------------------------------------------------------------

def test_criterion_2_fisher_intervals():
    cases = [(0.55, (0.32, 0.72)), (0.48, (0.23, 0.67)), (0.43, (0.17, 0.63)),
             (0.51, (0.27, 0.69)), (0.23, (-0.05, 0.48))]
    failures = []
    for rho, expected in cases:
        lo, hi = fisher_ci(rho, 50, 0.95)
        if (round(lo, 2), round(hi, 2)) != expected:
            failures.append(f"{rho}: ({lo:.4f}, {hi:.4f}) vs {expected}")
    record(2, "Fisher intervals at l=50", failures)


# 3 -------------------------------------------------------------------------

def test_criterion_3_desk_replication():
    start = time.perf_counter()
    failures, shown = [], []
    for disp in DISPS:
        cfg = SimulationConfig(gaussian(), EstimatorPairSpec("sample", 0.95, disp),
                               n=252, l=50, reps=200, seed=SEED)
        s = run_experiment(cfg)
        lo, hi = s.empirical_ci
        shown.append(f"{disp.name} {s.mean_corr:.3f} ({lo:.2f};{hi:.2f}) vs {s.theoretical_corr:.3f}")
        if abs(s.mean_corr - s.theoretical_corr) > 0.03:
            failures.append(f"{disp.name} mean off by {abs(s.mean_corr - s.theoretical_corr):.3f}")
        if not lo <= s.theoretical_corr <= hi:
            failures.append(f"{disp.name} theory outside empirical interval")
    elapsed = time.perf_counter() - start
    if elapsed > 300:
        failures.append(f"runtime {elapsed:.0f}s > 300s")
    record(3, "desk-scale replication of the reference cells", failures, "; ".join(shown) + f"; {elapsed:.1f}s")


# 4 -------------------------------------------------------------------------

ORACLE_PAIRS = [
    ("Sigma(1)", QuantileKind.SAMPLE, MAD),
    ("Sigma(2)", QuantileKind.SAMPLE, VARIANCE),
    ("Gamma", QuantileKind.SAMPLE, MEDIAN_AD),
    ("Lambda(2)", QuantileKind.LOCSCALE, VARIANCE),
    ("Pi", QuantileKind.LOCSCALE, MEDIAN_AD),
]


def test_criterion_4_monte_carlo_oracle():
    failures, worst, count = [], 0.0, 0
    for i, dist in enumerate((gaussian(), student(5))):
        specs, names = [], []
        for p in (0.75, 0.95):
            for name, kind, disp in ORACLE_PAIRS:
                specs.append(EstimatorPairSpec(kind, p, disp))
                names.append(f"{dist.label}/{name}/p={p}")
        results = empirical_covariance(dist, specs, n=100_000, reps=200, seed=SEED + i)
        for name, spec, res in zip(names, specs, results):
            theory = asymptotic_pair(dist, spec).cov
            for a, b in ((0, 0), (0, 1), (1, 1)):
                z = (res.cov[a, b] - theory[a, b]) / res.se[a, b]
                worst = max(worst, abs(z))
                count += 1
                if abs(z) > 3:
                    failures.append(f"{name}[{a}{b}] z={z:.2f}")
    record(4, "Monte Carlo oracle equivalence", failures,
           f"{count} entries, max |z| = {worst:.2f}")


# 5 -------------------------------------------------------------------------

def test_criterion_5_scaling_law():
    failures = []
    for dist in (gaussian(), student(5)):
        for r in (1, 2):
            base = asymptotic_hist_dispersion(dist, 0.95, r)
            for v in range(1, 9):
                for w in range(1, 9):
                    s = scale_for_sample_sizes(base, v, w)
                    big = max(v, w)
                    checks = [
                        (s.sigma12, base.sigma12 / big),
                        (s.sigma11, base.sigma11 / v),
                        (s.sigma22, base.sigma22 / w),
                        (s.corr, base.corr * math.sqrt(min(v, w) / big)),
                        (s.corr, s.sigma12 / math.sqrt(s.sigma11 * s.sigma22)),
                    ]
                    for got, want in checks:
                        if abs(got - want) > 1e-12 * max(1.0, abs(want)):
                            failures.append(f"{dist.label} r={r} v={v} w={w}: {got} vs {want}")
    spec = EstimatorPairSpec("sample", 0.95, VARIANCE)
    runs = {}
    for v, w in ((1, 1), (1, 2)):
        runs[(v, w)] = run_experiment(SimulationConfig(gaussian(), spec, n=252, l=50, reps=500,
                                                       seed=SEED, v=v, w=w)).mean_corr
    ratio = runs[(1, 2)] / runs[(1, 1)]
    if abs(ratio - 1 / math.sqrt(2)) > 0.05:
        failures.append(f"Monte Carlo ratio {ratio:.4f}")
    record(5, "scaling law", failures[:5],
           f"algebra on v,w<=8; MC ratio {ratio:.4f} vs {1 / math.sqrt(2):.4f}")


# 6 -------------------------------------------------------------------------

def _corr(dist, kind, p, disp):
    return asymptotic_pair(dist, EstimatorPairSpec(kind, p, disp)).corr


def test_criterion_6_property_suites():
    failures = []
    families = [gaussian(), student(5), student(10)]
    for dist in families:
        for kind in KINDS:
            for disp in DISPS:
                vals = {p: _corr(dist, kind, p, disp) for p in P_GRID}
                if any(abs(c) > 1 for c in vals.values()):
                    failures.append(f"|corr|>1 {dist.label}/{kind.value}/{disp.name}")
                for p in P_GRID:
                    if abs(vals[p] + vals[round(1 - p, 2)]) > 1e-9:
                        failures.append(f"antisymmetry {dist.label}/{kind.value}/{disp.name} p={p}")
                        break
    for make in (lambda m, s: gaussian(m, s), lambda m, s: student(5, m, s)):
        ref = make(0.0, 1.0)
        for mu, sigma in ((3.0, 2.0), (-1.0, 0.5)):
            moved = make(mu, sigma)
            for kind in KINDS:
                for disp in DISPS:
                    for p in P_GRID:
                        if abs(_corr(moved, kind, p, disp) - _corr(ref, kind, p, disp)) > 1e-10:
                            failures.append(f"location-scale {moved.label}/{kind.value}/{disp.name} p={p}")
                            break
    for p in P_GRID:
        ref = asymptotic_hist_medianad(gaussian(), p).corr
        for d in (student(5), student(10)):
            if abs(asymptotic_hist_medianad(d, p).corr - ref) > 1e-8:
                failures.append(f"MedianAD distribution-free {d.label} p={p}")
    for dist in families:
        for r in (1, 2):
            for p in P_GRID:
                a = asymptotic_hist_abs_moment(dist, p, r)
                b = asymptotic_hist_dispersion(dist, p, r)
                if np.max(np.abs(a.cov - b.cov)) > 1e-12 or abs(a.corr - b.corr) > 1e-12:
                    failures.append(f"general-r collapse {dist.label} r={r} p={p}")
                    break
        if abs(asymptotic_hist_medianad(dist, 0.75).corr - 1 / math.sqrt(3)) > 1e-9:
            failures.append(f"1/sqrt(3) at p=0.75 for {dist.label}")
    record(6, "property suites on the p grid", failures[:10])


# 7 -------------------------------------------------------------------------

def test_criterion_7_figure_shape(tmp_path):
    out = tmp_path / "curve.csv"
    code = cli.main(["curve", "--output", str(out)])
    text = out.read_text()
    rows = csv.DictReader(io.StringIO("\n".join(l for l in text.splitlines() if not l.startswith("#"))))
    curves = {}
    for r in rows:
        curves.setdefault((r["dist"], r["quantile_kind"], r["dispersion"]), {})[float(r["p"])] = float(r["corr"])
    failures = [] if code == 0 else [f"curve exit code {code}"]
    for disp in ("variance", "mad", "medianad"):
        sample = curves[("gaussian", "sample", disp)]
        known = curves[("gaussian", "locscale_known", disp)]
        bad = [p for p in sample if p >= 0.6 - 1e-12 and not known[p] > sample[p]]
        if bad:
            failures.append(f"gaussian {disp}: known-mean loc-scale not above sample at p={bad[:3]}")
    med = curves[("gaussian", "sample", "medianad")]
    ps = sorted(med)
    peaks = [p for a, p, b in zip(ps, ps[1:], ps[2:]) if med[p] > med[a] and med[p] > med[b]]
    if peaks != [0.75] or max(med, key=med.get) != 0.75:
        failures.append(f"MedianAD peaks at {peaks}")
    for kind in ("locscale", "locscale_known"):
        g = curves[("gaussian", kind, "medianad")]
        s5 = curves[("student(5)", kind, "medianad")]
        bad = [p for p in g if abs(p - 0.5) > 1e-12 and not abs(s5[p]) < abs(g[p])]
        if bad:
            failures.append(f"student(5) {kind} x medianad not below gaussian at p={bad[:3]}")
    record(7, "curve shape from the curve CSV", failures,
           "magnitudes compared for the Student(5) panel")


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        fn(Path(d))
                else:
                    fn()
            except AssertionError:
                pass
