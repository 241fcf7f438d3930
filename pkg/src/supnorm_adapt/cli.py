"""Command-line interface: ``supnorm-adapt {estimate,simulate,oracle,verify-bounds}``.

Every command writes one JSON report (``--output``, default stdout) and,
with ``--csv``, a plot-ready table.  Exit codes: 0 success, 2 invalid
configuration or degenerate grid, 3 malformed input file.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from . import risk_lab as rl
from .bounds import BoundInputs, bound_evaluators
from .densities import by_name
from .estimator import Sample
from .lepski import (
    VARIANTS,
    DegenerateGridError,
    EmpiricalCdfSentinel,
    ResolutionGrid,
    SelectorVariant,
    build_grid,
    select,
    select_with_cdf_constraint,
)
from .piecewise import evaluate
from .spline_kernel import MAX_ORDER, projection_kernel

SCHEMA = "supnorm-adapt/1"
EXIT_OK, EXIT_CONFIG, EXIT_INPUT = 0, 2, 3


class InputError(Exception):
    """The input file is missing or not one number per line."""


class ConfigError(ValueError):
    """Invalid combination of options."""


# ---------------------------------------------------------------------------
# I/O helpers


def read_sample(path: str) -> np.ndarray:
    """One decimal per line; blank lines and ``#`` comments are skipped."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    values = []
    for lineno, raw in enumerate(lines, 1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            x = float(text)
        except ValueError:
            raise InputError(f"{path}:{lineno}: not a number: {text!r}") from None
        if not math.isfinite(x):
            raise InputError(f"{path}:{lineno}: non-finite value {text!r}")
        values.append(x)
    if not values:
        raise InputError(f"{path}: no observations")
    return np.asarray(values)


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_csv(header, rows) -> str:
    """CSV text with ``repr`` floats, so re-reading and re-writing is lossless."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_csv(text: str):
    """Inverse of :func:`write_csv`; numeric cells come back as int or float."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = []
    for row in reader:
        parsed = []
        for cell in row:
            try:
                parsed.append(int(cell))
            except ValueError:
                try:
                    parsed.append(float(cell))
                except ValueError:
                    parsed.append(cell)
        rows.append(parsed)
    return header, rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def _emit(args, payload, csv_table=None):
    doc = {"schema": SCHEMA, "version": f"v{__version__}", "command": args.command,
           "seed": args.seed, "config": _config(args)}
    doc.update(payload)
    text = json.dumps(_jsonable(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    if args.csv and csv_table is not None:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(write_csv(*csv_table))


def _config(args):
    skip = {"func", "output", "csv", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _ladder(text):
    if text is None:
        return None
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if not parts:
        raise ConfigError("n-ladder is empty")
    try:
        ladder = [int(float(p)) if "^" not in p else 2 ** int(p.split("^")[1]) for p in parts]
    except (ValueError, IndexError):
        raise ConfigError(f"cannot parse n-ladder {text!r}") from None
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigError("n-ladder must be strictly increasing")
    return ladder


def _variant(args):
    return SelectorVariant(args.variant, m_draws=args.m_draws,
                           cdf_constraint=getattr(args, "cdf_constraint", False))


def _check_reps(reps, minimum=2):
    if reps < minimum:
        raise ConfigError(f"reps must be at least {minimum}")


# ---------------------------------------------------------------------------
# commands


def _grid_override(args, n, r):
    if args.j_min is None and args.j_max is None:
        return build_grid(n, r)
    base = build_grid(n, r) if (args.j_min is None or args.j_max is None) else None
    j_min = args.j_min if args.j_min is not None else base.j_min
    j_max = args.j_max if args.j_max is not None else base.j_max
    return ResolutionGrid(j_min, j_max)


def cmd_estimate(args) -> int:
    xs = read_sample(args.input)
    s = Sample(xs)
    kernel = projection_kernel(args.order)
    variant = _variant(args)
    grid = _grid_override(args, s.n, args.order)
    if variant.cdf_constraint:
        out = select_with_cdf_constraint(s, kernel, variant, args.seed, grid=grid)
    else:
        out = select(s, kernel, variant, args.seed, grid=grid)
    trace = out.trace
    payload = {
        "n": s.n,
        "grid": {"j_min": trace.grid.j_min, "j_max": trace.grid.j_max},
        "j_hat": trace.j_hat,
        "fallback": trace.fallback,
        "sentinel": trace.sentinel,
        "plug_in_sup": trace.plug_in,
        "cdf_bound": trace.cdf_bound,
        "cdf_distance": {str(k): v for k, v in sorted(trace.cdf_distance.items())},
        "trace": [{"j": t.j, "l": t.l, "statistic": t.statistic, "threshold": t.threshold,
                   "rademacher": t.rademacher, "passed": t.passed} for t in trace.tests],
    }
    if isinstance(out, EmpiricalCdfSentinel):
        x = s.xs
        payload["series"] = {"x": x, "cdf": s.ecdf(x)}
        table = (["x", "cdf"], list(zip(x.tolist(), s.ecdf(x).tolist())))
    else:
        d = out.estimate.density
        per = args.points_per_cell
        u = np.arange(per) / per
        cells = np.arange(d.k_min, d.k_max + 2)
        x = ((cells[:, None] + u[None, :]) * d.width).reshape(-1)
        dens = evaluate(d, x)
        cdf = out.cdf(x)
        payload["total_mass"] = out.cdf.total_mass
        payload["series"] = {"x": x, "density": dens, "cdf": cdf}
        table = (["x", "density", "cdf"], list(zip(x.tolist(), dens.tolist(), cdf.tolist())))
    _emit(args, payload, table)
    return EXIT_OK


def _risk_dict(r: rl.RateRegression):
    return {"slope": r.slope, "half_width": r.half_width, "intercept": r.intercept,
            "n": list(r.ns), "risk": list(r.risks), "risk_stderr": list(r.stderrs),
            "mean_j_hat": list(r.mean_levels)}


def cmd_simulate(args) -> int:
    density = by_name(args.density)
    kernel = projection_kernel(args.order)
    variant = _variant(args)
    ladder = _ladder(args.n_ladder)
    if args.experiment == "rate":
        _check_reps(args.reps)
        ladder = ladder or [2 ** e for e in range(12, 18)]
        if len(ladder) < 5:
            raise ConfigError("rate regression needs at least five n values")
        for n in ladder:
            build_grid(n, args.order)
        fit = rl.rate_regression(density, kernel, variant, ladder, args.reps, args.seed,
                                 threads=args.threads)
        payload = {"experiment": "rate", "adaptive": _risk_dict(fit)}
        rows = [[n, rk, se, lv] for n, rk, se, lv in
                zip(fit.ns, fit.risks, fit.stderrs, fit.mean_levels)]
        header = ["n", "risk", "risk_stderr", "mean_j_hat"]
        if args.control:
            j0 = build_grid(ladder[0], args.order).j_min
            ctl = rl.rate_regression(density, kernel, variant, ladder, args.reps, args.seed,
                                     fixed_level=j0, threads=args.threads)
            payload["control"] = dict(_risk_dict(ctl), fixed_level=j0)
            header += ["control_risk", "control_stderr"]
            rows = [row + [rk, se] for row, rk, se in zip(rows, ctl.risks, ctl.stderrs)]
        table = (header, rows)
    elif args.experiment == "clt":
        _check_reps(args.reps, 200)
        rep = rl.clt_check(density, kernel, variant, args.n, args.reps, args.seed,
                           ladder=tuple(ladder or ()), ladder_reps=args.ladder_reps,
                           threads=args.threads)
        payload = {"experiment": "clt", "n": rep.n, "reps": rep.reps,
                   "ks_estimator": rep.ks_estimator, "ks_calibration": rep.ks_calibration,
                   "mean_j_hat": rep.mean_level, "ladder": list(rep.ladder),
                   "median_gap": list(rep.median_gap)}
        table = (["rep", "estimator", "calibration"],
                 [[i, a, b] for i, (a, b) in enumerate(zip(rep.estimator_stats,
                                                            rep.calibration_stats))])
    else:
        _check_reps(args.reps)
        if args.order != 1:
            raise ConfigError("the constant check is defined for --order 1")
        ladder = ladder or [2 ** 12, 2 ** 14, 2 ** 17]
        rep = rl.asymptotic_constant_check(density, ladder, args.reps, args.seed,
                                           variant=variant, threads=args.threads)
        payload = {"experiment": "constants", "limit": rep.limit, "A": rep.A,
                   "sudakov": rep.sudakov, "ratio_gate": rep.ratio_gate,
                   "constant_gate": rep.constant_gate,
                   "rows": [{"n": n, "j_star": j, "normalized_deviation": m,
                             "normalized_deviation_stderr": se, "ratio": q,
                             "adaptive_risk": a, "adaptive_constant": c}
                            for n, j, m, se, q, a, c in zip(
                                rep.ladder, rep.levels, rep.normalized_deviation,
                                rep.normalized_deviation_se, rep.ratio, rep.adaptive_risk,
                                rep.adaptive_constant)]}
        table = (["n", "j_star", "normalized_deviation", "stderr", "ratio", "adaptive_constant"],
                 [[r["n"], r["j_star"], r["normalized_deviation"],
                   r["normalized_deviation_stderr"], r["ratio"], r["adaptive_constant"]]
                  for r in payload["rows"]])
    _emit(args, payload, table)
    return EXIT_OK


def cmd_oracle(args) -> int:
    _check_reps(args.reps, 50)
    density = by_name(args.density)
    kernel = projection_kernel(args.order)
    grid = build_grid(args.n, args.order)
    star = rl.oracle_jstar(density, kernel, args.n)
    sharp = rl.oracle_jsharp(density, kernel, args.n, args.reps, args.seed, threads=args.threads)
    jh = rl.oracle_jH(density, kernel, args.n, args.reps, args.seed, threads=args.threads)
    rows = []
    for l in grid.levels:
        rows.append({
            "level": l,
            "bias": rl.bias_bound(l, density, kernel),
            "variance_proxy": rl.variance_proxy(l, args.n),
            "E": sharp.table[l]["E"], "E_stderr": sharp.table[l]["E_stderr"],
            "risk": jh.table[l]["risk"], "risk_stderr": jh.table[l]["risk_stderr"],
            "W": rl.local_holder_W(l, density) if kernel.order == 1 else None,
        })
    payload = {"n": args.n, "density": density.name,
               "grid": {"j_min": grid.j_min, "j_max": grid.j_max},
               "j_star": star.level, "j_star_flagged": star.flagged,
               "j_sharp": sharp.level, "j_H": jh.level, "levels": rows}
    header = ["level", "bias", "variance_proxy", "E", "E_stderr", "risk", "risk_stderr", "W"]
    table = (header, [[r[h] if r[h] is not None else "" for h in header] for r in rows])
    _emit(args, payload, table)
    return EXIT_OK


def cmd_verify_bounds(args) -> int:
    _check_reps(args.reps)
    density = by_name(args.density)
    t_ladder = None if args.t_ladder is None else [float(v) for v in args.t_ladder.split(",") if v]
    rep = rl.empirical_violation_rate(density, args.n, args.j, args.reps, args.seed,
                                      t_ladder=t_ladder)
    inputs = BoundInputs(n=args.n, sigma2=rep.sigma2, Esup=rep.centered_mean[0],
                         Erad=rep.rademacher_mean[0])
    names = sorted(bound_evaluators(inputs, 0.0))
    bound_rows = []
    for t in [0.0, *rep.t.tolist()]:
        ev = bound_evaluators(inputs, t)
        bound_rows.append({"t": t, **{k: {"value": ev[k].value, "prefactor": ev[k].prefactor,
                                          "preconditions_ok": ev[k].preconditions_ok}
                                      for k in names}})
    payload = {
        "n": args.n, "j": args.j, "reps": args.reps, "density": density.name,
        "sigma2": rep.sigma2, "V_prime": rep.V_prime,
        "centered_mean": rep.centered_mean[0], "centered_stderr": rep.centered_mean[1],
        "rademacher_mean": rep.rademacher_mean[0], "rademacher_stderr": rep.rademacher_mean[1],
        "sandwich_ok": rep.sandwich_ok, "ok": rep.ok,
        "bounds": bound_rows,
        "violation": [{"t": t, "frequency": f, "frequency_conditional": fc, "bound": b,
                       "binomial_stderr": se, "margin": m}
                      for t, f, fc, b, se, m in zip(rep.t, rep.frequency,
                                                     rep.frequency_conditional, rep.bound,
                                                     rep.binomial_se, rep.margin)],
    }
    table = (["t", "frequency", "frequency_conditional", "bound", "binomial_stderr", "margin"],
             [[r["t"], r["frequency"], r["frequency_conditional"], r["bound"],
               r["binomial_stderr"], r["margin"]] for r in payload["violation"]])
    _emit(args, payload, table)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common(p, *, order=True, variant=True):
    p.add_argument("--seed", type=int, required=True, help="master seed for every random stream")
    p.add_argument("--output", default="-", help="JSON report path (default stdout)")
    p.add_argument("--csv", default=None, help="optional CSV series path")
    p.add_argument("--threads", type=int, default=1, help="worker threads for replications")
    if order:
        p.add_argument("--order", type=int, default=1, choices=range(1, MAX_ORDER + 1),
                       help="spline order r (1 = Haar)")
    if variant:
        p.add_argument("--variant", default="bar-eps",
                       choices=[v.replace("_", "-") for v in VARIANTS])
        p.add_argument("--m-draws", type=int, default=100,
                       help="sign draws for the averaged variants")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="supnorm-adapt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s v{__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="adaptive density and CDF estimate from a sample file")
    _common(p)
    p.add_argument("--input", required=True, help="text file, one observation per line")
    p.add_argument("--cdf-constraint", action="store_true",
                   help="restrict levels to CDFs close to the empirical CDF")
    p.add_argument("--j-min", type=int, default=None)
    p.add_argument("--j-max", type=int, default=None)
    p.add_argument("--points-per-cell", type=int, default=4)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="rate, CLT or constant campaigns")
    _common(p)
    p.add_argument("--experiment", choices=("rate", "clt", "constants"), default="rate")
    p.add_argument("--density", default="triangular")
    p.add_argument("--n-ladder", default=None, help="comma-separated sample sizes, e.g. 2^12,2^13")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--n", type=int, default=2 ** 14, help="sample size for the CLT check")
    p.add_argument("--ladder-reps", type=int, default=100)
    p.add_argument("--control", action="store_true", help="also run the fixed-level control")
    p.add_argument("--cdf-constraint", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="oracle levels with bias, deviation and risk tables")
    _common(p, variant=False)
    p.add_argument("--density", default="triangular")
    p.add_argument("--n", type=int, default=2 ** 14)
    p.add_argument("--reps", type=int, default=100)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify-bounds", help="bound table and empirical violation rates")
    _common(p, order=False, variant=False)
    p.add_argument("--density", default="triangular")
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--j", type=int, default=3)
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--t-ladder", default=None, help="comma-separated deviation levels")
    p.set_defaults(func=cmd_verify_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be positive")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"supnorm-adapt: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DegenerateGridError, ConfigError) as exc:
        print(f"supnorm-adapt: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"supnorm-adapt: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
