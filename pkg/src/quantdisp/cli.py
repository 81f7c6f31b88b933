"""Command-line front end: CSV tables of asymptotic and simulated correlations.

Every output starts with ``#`` manifest lines recording the command, the full
resolved flag set, the seed and the package version.  Re-running the recorded
``argv`` reproduces the file byte for byte.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import shlex
import sys
from typing import Iterable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import __version__
from .asymptotics import (
    ConditionViolated,
    EstimatorPairSpec,
    QuantileKind,
    asymptotic_pair,
    scale_for_sample_sizes,
    validate_conditions,
)
from .distributions import Distribution, MomentUnavailable, custom, gaussian, student
from .estimators import parse_dispersion
from .montecarlo import DegenerateSeries, SimulationConfig, run_experiment

EXIT_OK, EXIT_USAGE, EXIT_NA, EXIT_DEGENERATE = 0, 2, 3, 4
NA = "NA"
DEFAULT_SEED = 20190101
DEFAULT_PANELS = ["gaussian", "student:10", "student:5"]


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# value parsing

def _probability(text):
    p = float(text)
    if not 0.0 < p < 1.0:
        raise argparse.ArgumentTypeError(f"probability must lie in (0, 1), got {text}")
    return p


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _quantile_kind(text):
    try:
        return QuantileKind.parse(text).value
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _dispersion(text):
    try:
        return parse_dispersion(text).name
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _transform(text):
    if text not in ("identity", "negate", "log", "square"):
        raise argparse.ArgumentTypeError(f"unknown transform {text!r}")
    return text


def load_custom(path: str, mu: float = 0.0, sigma: float = 1.0) -> Distribution:
    """Grid-tabulated standardised variate from JSON.

    Keys: ``x`` (increasing grid), ``cdf`` (non-decreasing values), optional
    ``pdf`` (defaults to the derivative of the cdf interpolant), optional
    ``max_moment``, ``symmetric`` and ``name``.  The cdf is interpolated with a
    monotone cubic (PCHIP), the pdf linearly; both are flat outside the grid.
    """
    with open(path, encoding="utf-8") as fh:
        spec = json.load(fh)
    x = np.asarray(spec["x"], dtype=float)
    F = np.asarray(spec["cdf"], dtype=float)
    if x.ndim != 1 or x.size < 3 or x.shape != F.shape:
        raise ValueError("custom grid needs matching 1-d 'x' and 'cdf' arrays of length >= 3")
    if np.any(np.diff(x) <= 0) or np.any(np.diff(F) < 0) or F[0] < 0 or F[-1] > 1:
        raise ValueError("custom grid must have increasing x and a non-decreasing cdf in [0, 1]")
    interp = PchipInterpolator(x, F, extrapolate=False)
    lo_val, hi_val = float(F[0]), float(F[-1])

    def cdf(y):
        y = np.asarray(y, dtype=float)
        out = interp(np.clip(y, x[0], x[-1]))
        return np.where(y < x[0], lo_val, np.where(y > x[-1], hi_val, out))

    if "pdf" in spec:
        f = np.asarray(spec["pdf"], dtype=float)
        if f.shape != x.shape or np.any(f < 0):
            raise ValueError("custom 'pdf' must match 'x' and be non-negative")

        def pdf(y):
            return np.interp(y, x, f, left=0.0, right=0.0)
    else:
        deriv = interp.derivative()

        def pdf(y):
            y = np.asarray(y, dtype=float)
            inside = (y >= x[0]) & (y <= x[-1])
            return np.where(inside, deriv(np.clip(y, x[0], x[-1])), 0.0)

    return custom(cdf, pdf, mu=mu, sigma=sigma,
                  max_moment=float(spec.get("max_moment", math.inf)),
                  symmetric=bool(spec.get("symmetric", False)),
                  name=spec.get("name", "custom"), support=(float(x[0]), float(x[-1])), breakpoints=x.tolist())


def make_distribution(name: str, nu: Optional[float], mu: float, sigma: float,
                      custom_file: Optional[str] = None) -> Distribution:
    if name == "gaussian":
        return gaussian(mu, sigma)
    if name == "student":
        if nu is None:
            raise UsageError("--dist student requires --nu")
        return student(nu, mu, sigma)
    if name == "custom":
        if not custom_file:
            raise UsageError("--dist custom requires --custom-file")
        return load_custom(custom_file, mu, sigma)
    raise UsageError(f"unknown distribution {name!r}")


def _panel_distribution(token: str, mu: float, sigma: float) -> Distribution:
    name, _, df = token.partition(":")
    return make_distribution(name, float(df) if df else None, mu, sigma)


# ---------------------------------------------------------------------------
# parser

_OPTIONS: dict = {}


def _opt(sub, cmd, flag, **kw):
    action = sub.add_argument(flag, **kw)
    _OPTIONS.setdefault(cmd, []).append(action)


def _common(sub, cmd, dist_default="gaussian"):
    _opt(sub, cmd, "--dist", choices=["gaussian", "student", "custom"], default=dist_default)
    _opt(sub, cmd, "--nu", type=float, default=None, help="Student degrees of freedom (> 2)")
    _opt(sub, cmd, "--mu", type=float, default=0.0)
    _opt(sub, cmd, "--sigma", type=float, default=1.0)
    _opt(sub, cmd, "--custom-file", default=None, help="JSON grid for --dist custom")
    sub.add_argument("--config", default=None, help="JSON file of flag values; flags win")
    _opt(sub, cmd, "--output", default=None, help="write CSV here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    _OPTIONS.clear()
    parser = argparse.ArgumentParser(
        prog="quantdisp",
        description="Asymptotic and simulated correlations of quantile and dispersion estimators.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("theory", help="closed-form covariances and correlations")
    _common(sp, "theory")
    _opt(sp, "theory", "--p", type=_probability, nargs="+", default=[0.95])
    _opt(sp, "theory", "--dispersion", type=_dispersion, nargs="+",
         default=["variance", "mad", "medianad"])
    _opt(sp, "theory", "--quantile", type=_quantile_kind, nargs="+", default=["sample"])
    _opt(sp, "theory", "--h1", type=_transform, default="identity")
    _opt(sp, "theory", "--h2", type=_transform, default="identity")

    sp = subs.add_parser("curve", help="correlation curves over a grid of p")
    _common(sp, "curve", dist_default=None)
    _opt(sp, "curve", "--panels", nargs="+", default=None,
         help="distributions as gaussian or student:<df>; default gaussian student:10 student:5")
    _opt(sp, "curve", "--p-start", type=_probability, default=0.005)
    _opt(sp, "curve", "--p-stop", type=_probability, default=0.995)
    _opt(sp, "curve", "--p-step", type=float, default=0.005)
    _opt(sp, "curve", "--dispersion", type=_dispersion, nargs="+",
         default=["variance", "mad", "medianad"])
    _opt(sp, "curve", "--quantile", type=_quantile_kind, nargs="+",
         default=["sample", "locscale", "locscale_known"])

    sp = subs.add_parser("simulate", help="Monte Carlo correlations over disjoint windows")
    _common(sp, "simulate")
    _opt(sp, "simulate", "--p", type=_probability, default=0.95)
    _opt(sp, "simulate", "--n", type=_positive_int, nargs="+", default=[126, 252, 504, 1008])
    _opt(sp, "simulate", "--l", type=_positive_int, default=50)
    _opt(sp, "simulate", "--reps", type=_positive_int, default=1000)
    _opt(sp, "simulate", "--seed", type=int, default=DEFAULT_SEED)
    _opt(sp, "simulate", "--dispersion", type=_dispersion, nargs="+",
         default=["variance", "mad", "medianad"])
    _opt(sp, "simulate", "--quantile", type=_quantile_kind, default="sample")
    _opt(sp, "simulate", "--v", type=_positive_int, default=1)
    _opt(sp, "simulate", "--w", type=_positive_int, default=1)
    _opt(sp, "simulate", "--workers", type=_positive_int, default=1)

    sp = subs.add_parser("scaling", help="sample-size scaling of the correlation")
    _common(sp, "scaling")
    _opt(sp, "scaling", "--p", type=_probability, default=0.95)
    _opt(sp, "scaling", "--dispersion", type=_dispersion, default="variance")
    _opt(sp, "scaling", "--quantile", type=_quantile_kind, default="sample")
    _opt(sp, "scaling", "--v", type=_positive_int, nargs="+", default=[1, 2, 4])
    _opt(sp, "scaling", "--w", type=_positive_int, nargs="+", default=[1, 2, 4])
    _opt(sp, "scaling", "--verify", action="store_true", help="append Monte Carlo estimates")
    _opt(sp, "scaling", "--n", type=_positive_int, default=252)
    _opt(sp, "scaling", "--l", type=_positive_int, default=50)
    _opt(sp, "scaling", "--reps", type=_positive_int, default=200)
    _opt(sp, "scaling", "--seed", type=int, default=DEFAULT_SEED)
    _opt(sp, "scaling", "--workers", type=_positive_int, default=1)
    return parser


def _config_tokens(path: str, command: str) -> list:
    """Translate a JSON config into flag tokens placed before the real flags."""
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("--config must hold a JSON object")
    known = {a.dest: a for a in _OPTIONS[command]}
    tokens = []
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise UsageError(f"unknown config key {key!r} for {command}")
        flag = known[dest].option_strings[0]
        if isinstance(value, bool):
            if value:
                tokens.append(flag)
        elif isinstance(value, list):
            tokens += [flag, *map(str, value)]
        elif value is not None:
            tokens += [flag, str(value)]
    return tokens


def parse_args(argv: list) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            extra = _config_tokens(args.config, args.command)
        except (OSError, ValueError, UsageError) as exc:
            parser.error(str(exc))
        cmd_pos = argv.index(args.command)
        args = parser.parse_args(argv[: cmd_pos + 1] + extra + argv[cmd_pos + 1:])
    return args


# ---------------------------------------------------------------------------
# output

def fmt(x) -> str:
    if x is None:
        return NA
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}" if math.isfinite(x) else NA
    return str(x)


def pct(x) -> str:
    return NA if x is None or not math.isfinite(x) else str(int(round(100 * x)))


def _flag_value(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def canonical_argv(args: argparse.Namespace) -> list:
    out = [args.command]
    for action in _OPTIONS[args.command]:
        value = getattr(args, action.dest)
        flag = action.option_strings[0]
        if isinstance(value, bool):
            if value:
                out.append(flag)
        elif value is None:
            continue
        elif isinstance(value, list):
            out += [flag, *map(_flag_value, value)]
        else:
            out += [flag, _flag_value(value)]
    return out


def manifest(args: argparse.Namespace) -> list:
    params = {a.dest: getattr(args, a.dest) for a in _OPTIONS[args.command]}
    return [
        f"# quantdisp {args.command}",
        f"# version: {__version__}",
        f"# seed: {fmt(getattr(args, 'seed', None))}",
        f"# output: {args.output or '-'}",
        f"# argv: {shlex.join(canonical_argv(args))}",
        f"# params: {json.dumps(params, sort_keys=True)}",
    ]


def read_manifest_argv(text: str) -> list:
    """Flags recorded in an output file's ``# argv:`` line."""
    for line in text.splitlines():
        if line.startswith("# argv: "):
            return shlex.split(line[len("# argv: "):])
    raise ValueError("no argv line in manifest")


def render(args, header: list, rows: Iterable[list]) -> str:
    buf = io.StringIO()
    for line in manifest(args):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(c) if not isinstance(c, str) else c for c in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands

def _dist_from_args(args) -> Distribution:
    return make_distribution(args.dist, args.nu, args.mu, args.sigma, args.custom_file)


def cmd_theory(args):
    dist = _dist_from_args(args)
    header = ["dist", "quantile_kind", "dispersion", "p", "sigma11", "sigma12", "sigma22",
              "corr", "corr_pct", "theorem", "conditions"]
    rows, na = [], False
    for kind in args.quantile:
        for disp in args.dispersion:
            for p in args.p:
                spec = EstimatorPairSpec(QuantileKind(kind), p, parse_dispersion(disp),
                                         args.h1, args.h2)
                report = validate_conditions(dist, spec).status
                try:
                    res = asymptotic_pair(dist, spec)
                except (MomentUnavailable, ConditionViolated, ValueError) as exc:
                    na = True
                    rows.append([dist.label, kind, disp, p, NA, NA, NA, NA, NA,
                                 type(exc).__name__, report])
                    continue
                rows.append([dist.label, kind, disp, p, res.sigma11, res.sigma12, res.sigma22,
                             res.corr, pct(res.corr), res.theorem, report])
    return header, rows, EXIT_NA if na else EXIT_OK


def p_grid(start: float, stop: float, step: float) -> list:
    if step <= 0 or start > stop:
        raise UsageError("p grid needs step > 0 and start <= stop")
    k = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 12) for i in range(k + 1)]


def cmd_curve(args):
    if args.dist is not None:
        dists = [_dist_from_args(args)]
    else:
        dists = [_panel_distribution(t, args.mu, args.sigma) for t in args.panels or DEFAULT_PANELS]
    grid = p_grid(args.p_start, args.p_stop, args.p_step)
    header = ["dist", "quantile_kind", "dispersion", "p", "corr", "corr_pct"]
    rows, na = [], False
    for dist in dists:
        for kind in args.quantile:
            for disp in args.dispersion:
                d = parse_dispersion(disp)
                for p in grid:
                    try:
                        c = asymptotic_pair(dist, EstimatorPairSpec(QuantileKind(kind), p, d)).corr
                    except (MomentUnavailable, ConditionViolated):
                        c, na = None, True
                    rows.append([dist.label, kind, disp, p, c, pct(c) if c is not None else NA])
    return header, rows, EXIT_NA if na else EXIT_OK


def cmd_simulate(args):
    dist = _dist_from_args(args)
    header = ["dist", "quantile_kind", "dispersion", "p", "n", "l", "v", "w", "mean_corr",
              "corr_pct", "emp_lo", "emp_hi", "theoretical", "fisher_lo", "fisher_hi",
              "reps", "seed"]
    rows, na = [], False
    for disp in args.dispersion:
        for n in args.n:
            cfg = SimulationConfig(dist, EstimatorPairSpec(QuantileKind(args.quantile), args.p,
                                                           parse_dispersion(disp)),
                                   n=n, l=args.l, reps=args.reps, seed=args.seed,
                                   v=args.v, w=args.w, workers=args.workers)
            s = run_experiment(cfg)
            na |= s.theoretical_corr is None
            fl, fh = s.fisher_ci if s.fisher_ci is not None else (None, None)
            rows.append([dist.label, args.quantile, disp, args.p, n, args.l, args.v, args.w,
                         s.mean_corr, pct(s.mean_corr), s.empirical_ci[0], s.empirical_ci[1],
                         s.theoretical_corr, fl, fh, s.reps_used, args.seed])
    return header, rows, EXIT_NA if na else EXIT_OK


def cmd_scaling(args):
    dist = _dist_from_args(args)
    spec = EstimatorPairSpec(QuantileKind(args.quantile), args.p, parse_dispersion(args.dispersion))
    try:
        base = asymptotic_pair(dist, spec)
    except (MomentUnavailable, ConditionViolated):
        base = None
    header = ["v", "w", "base_corr", "scaled_corr", "ratio", "cov_factor"]
    if args.verify:
        header += ["mc_base_corr", "mc_scaled_corr", "mc_ratio"]
    rows, mc_base = [], None
    for v in args.v:
        for w in args.w:
            ratio = math.sqrt(min(v, w) / max(v, w))
            scaled = None if base is None else scale_for_sample_sizes(base, v, w).corr
            row = [v, w, None if base is None else base.corr, scaled, ratio, 1.0 / max(v, w)]
            if args.verify:
                if mc_base is None:
                    mc_base = _mc_corr(args, dist, spec, 1, 1)
                mc = _mc_corr(args, dist, spec, v, w)
                row += [mc_base, mc, mc / mc_base if mc_base != 0 else None]
            rows.append(row)
    return header, rows, EXIT_NA if base is None else EXIT_OK


def _mc_corr(args, dist, spec, v, w):
    cfg = SimulationConfig(dist, spec, n=args.n, l=args.l, reps=args.reps, seed=args.seed,
                           v=v, w=w, workers=args.workers)
    return run_experiment(cfg).mean_corr


COMMANDS = {"theory": cmd_theory, "curve": cmd_curve, "simulate": cmd_simulate,
            "scaling": cmd_scaling}


def main(argv: Optional[list] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    try:
        header, rows, code = COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        if isinstance(exc, DegenerateSeries):
            print(f"quantdisp: degenerate simulation: {exc}", file=sys.stderr)
            return EXIT_DEGENERATE
        print(f"quantdisp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(args, header, rows)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
