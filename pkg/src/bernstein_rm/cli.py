"""Command-line entry point: ``bernstein-rm {fit,lscv,theory,simulate,bench}``.

Exit codes: 0 success, 1 usage error, 2 runtime error (bad data, failed
computation). Numbers are written with 9 significant digits.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import selection
from .asymptotics import C3, optimal_order, theoretical_mise, theory_constants
from .estimators import RecursiveEstimator, make_estimator
from .quadrature import DEFAULT_NODES, gauss_legendre
from .schedules import INTERIOR_EXPONENT, OrderSchedule, StepsizeSchedule, optimal_order_constant
from .simulate import EstimatorSpec, bench_update, format_table, run_table
from .transforms import parse_support
from .zoo import ZOO_IDS, get_density

KINDS = ("recursive", "vitale", "leblanc", "generalized", "multiplicative", "normalized")
SIMULATE_KEYS = {"densities", "estimators", "n", "N", "seed"}
FMT = "%.9g"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _support(text):
    try:
        return parse_support(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _read_lines(path):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise RuntimeError(f"cannot read {path}: {exc.strerror}") from None
    values, lines = [], []
    for lineno, row in enumerate(rows, start=1):
        if not row or not row[0].strip():
            continue
        try:
            value = float(row[0])
        except ValueError:
            if lineno == 1:
                continue
            raise RuntimeError(f"{path}, line {lineno}: not a number: {row[0]!r}") from None
        if not np.isfinite(value):
            raise RuntimeError(f"{path}, line {lineno}: value {row[0].strip()!r} is not finite")
        values.append(value)
        lines.append(lineno)
    if not values:
        raise RuntimeError(f"{path}: no observations")
    return np.array(values), lines


def read_observations(path):
    """One number per line (first CSV column); an optional non-numeric header on line 1."""
    return _read_lines(path)[0]


def _load_unit(path, transform):
    data, lines = _read_lines(path)
    lo, hi = transform.support
    outside = np.flatnonzero((data < lo) | (data > hi))
    if outside.size:
        i = int(outside[0])
        raise RuntimeError(
            f"{path}, line {lines[i]}: {data[i]:g} lies outside the support [{lo:g}, {hi:g}]"
        )
    return transform.forward(data)


def _emit(text, output):
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(output, "w") as fh:
            fh.write(text)


def _json(obj):
    def default(o):
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(f"cannot serialise {type(o).__name__}")

    return json.dumps(obj, indent=2, default=default) + "\n"


def _select_order(kind, y, args):
    if kind == "recursive":
        res = selection.lscv_recursive(y, StepsizeSchedule(args.gamma0))
    elif kind == "vitale":
        res = selection.lscv_vitale(y)
    elif kind in ("leblanc", "generalized"):
        res = selection.lscv_generalized(y, 2 if kind == "leblanc" else args.b)
    else:
        res = selection.lscv_generic(
            y,
            lambda v, m: make_estimator(kind, v, m, b=args.b, eps=args.eps),
            selection.default_batch_candidates(y.size, args.b),
        )
    return res.argmin


def cmd_fit(args):
    transform = _support(args.support)
    y = _load_unit(args.input, transform)
    xq, wq = gauss_legendre(args.grid)
    if args.kind == "recursive":
        a = args.exponent if args.exponent is not None else _select_order("recursive", y, args)
        orders = OrderSchedule(args.c, a)
        est = RecursiveEstimator(StepsizeSchedule(args.gamma0), orders, grid=xq)
        est.update_many(y)
        g = est.values
        meta = {"kind": "recursive", "c": args.c, "a": a, "gamma0": args.gamma0, "n": y.size,
                "mass": 1.0 - est.mass_deficit}
    else:
        m = args.m if args.m is not None else _select_order(args.kind, y, args)
        g = make_estimator(args.kind, y, m, b=args.b, eps=args.eps)(xq)
        meta = {"kind": args.kind, "m": m, "b": args.b, "eps": args.eps, "n": y.size}
    x = transform.backward(xq)
    jac = transform.jacobian(x)
    density = jac * g
    weight = wq / jac
    if args.format == "json":
        _emit(_json({**meta, "x": x, "density": density, "weight": weight}), args.output)
    else:
        buf = io.StringIO()
        buf.write("x,density,weight\n")
        np.savetxt(buf, np.column_stack([x, density, weight]), fmt=FMT, delimiter=",")
        _emit(buf.getvalue(), args.output)


def _parse_candidates(text):
    """``"2:200:2"`` (inclusive range) or ``"4,8,16"``; values may be floats for exponents."""
    if text is None:
        return None
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            lo, hi, step = parts
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            values = [lo + i * step for i in range(count)]
        else:
            values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"bad --candidates {text!r}; use 'lo:hi:step' or a comma list") from None
    return [int(v) if float(v).is_integer() and v >= 1 else round(v, 10) for v in values]


def cmd_lscv(args):
    transform = _support(args.support)
    y = _load_unit(args.input, transform)
    cands = _parse_candidates(args.candidates)
    kind = args.kind
    if kind == "recursive":
        res = selection.lscv_recursive(y, StepsizeSchedule(args.gamma0), cands, c=args.c)
    elif kind == "vitale":
        res = selection.lscv_vitale(y, cands)
    elif kind in ("leblanc", "generalized"):
        res = selection.lscv_generalized(y, 2 if kind == "leblanc" else args.b, cands)
    else:
        b = args.b
        res = selection.lscv_generic(
            y,
            lambda v, m: make_estimator(kind, v, m, b=b, eps=args.eps),
            cands or selection.default_batch_candidates(y.size, b),
        )
    _emit(_json({"kind": kind, "n": int(y.size), **res.as_dict()}), args.output)


def cmd_theory(args):
    tc = theory_constants(get_density(args.density).true_density())
    out = {"density": args.density, "constants": tc.as_dict(), "C3_closed_form": C3, "orders": {}}
    for n in args.n:
        row = {}
        for g0 in (1.0, 8.0 / 9.0, 4.0 / 5.0):
            s = StepsizeSchedule(g0)
            c = optimal_order_constant(tc, s)
            row[f"recursive(gamma0={g0:.4g})"] = {
                "c": c,
                "a": INTERIOR_EXPONENT,
                "m_n": OrderSchedule(c, INTERIOR_EXPONENT)(n),
                "mise": theoretical_mise("recursive", tc, n, stepsize=s),
            }
        for kind, b in (("vitale", 2), ("leblanc", 2), ("generalized", 3), ("generalized", 4),
                        ("multiplicative", 2), ("normalized", 2)):
            label = kind if kind in ("vitale", "leblanc") else f"{kind}(b={b})"
            row[label] = {
                "m": optimal_order(kind, tc, n, b=b),
                "m_unrounded": optimal_order(kind, tc, n, b=b, rounded=False),
                "mise": theoretical_mise(kind, tc, n, b=b),
            }
        out["orders"][str(n)] = row
    _emit(_json(out), args.output)


def load_simulate_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise RuntimeError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"{path}: config must be a JSON object")
    unknown = set(cfg) - SIMULATE_KEYS
    if unknown:
        raise UsageError(f"{path}: unknown config keys {sorted(unknown)}; allowed {sorted(SIMULATE_KEYS)}")
    missing = {"densities", "estimators", "n"} - set(cfg)
    if missing:
        raise UsageError(f"{path}: missing config keys {sorted(missing)}")
    try:
        for d in cfg["densities"]:
            get_density(d)
        specs = [EstimatorSpec.parse(e) for e in cfg["estimators"]]
        ns = [int(n) for n in cfg["n"]]
        N = int(cfg.get("N", 500))
        seed = int(cfg.get("seed", 42))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{path}: {exc}") from None
    if N < 1 or any(n < 1 for n in ns):
        raise UsageError(f"{path}: n and N must be positive")
    return {"densities": list(cfg["densities"]), "estimators": specs, "n": ns, "N": N, "seed": seed}


def cmd_simulate(args):
    cfg = load_simulate_config(args.config)
    reports = run_table(cfg["densities"], cfg["estimators"], cfg["n"], N=cfg["N"], seed=cfg["seed"])
    if args.format == "json":
        rows = [{**r.as_row(), "ise": r.ise} for r in reports]
        _emit(_json(rows), args.output)
    else:
        _emit(format_table(reports, "csv" if args.format == "csv" else "markdown"), args.output)


def cmd_bench(args):
    report = bench_update(args.n_initial, args.n_additional, args.grid, seed=args.seed)
    _emit(_json(report.as_dict()), args.output)


def build_parser():
    p = _Parser(prog="bernstein-rm", description="Recursive Bernstein density estimation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common_fit(sp):
        sp.add_argument("input", help="CSV file, one observation per line")
        sp.add_argument("--support", default="unit", help="'a,b', 'real', 'halfline' or 'unit' (default)")
        sp.add_argument("--kind", choices=KINDS, default="recursive")
        sp.add_argument("--b", type=int, default=2, help="coarse-order divisor (default 2)")
        sp.add_argument("--eps", type=float, default=1e-5, help="multiplicative guard (default 1e-5)")
        sp.add_argument("--gamma0", type=float, default=1.0, help="recursive stepsize gamma0/n")
        sp.add_argument("--c", type=float, default=1.0, help="recursive order constant")
        sp.add_argument("--seed", type=int, default=42, help="accepted for uniformity; fitting is deterministic")
        sp.add_argument("-o", "--output", default=None)

    fit = sub.add_parser("fit", help="fit one estimator and dump it on a quadrature grid")
    common_fit(fit)
    fit.add_argument("--m", type=int, default=None, help="batch order; LSCV-selected when absent")
    fit.add_argument("--exponent", type=float, default=None,
                     help="recursive order exponent a in m_n = c n^a; LSCV-selected when absent")
    fit.add_argument("--grid", type=int, default=DEFAULT_NODES, help="Gauss-Legendre nodes (default 512)")
    fit.add_argument("--format", choices=("csv", "json"), default="csv")
    fit.set_defaults(func=cmd_fit)

    lscv = sub.add_parser(
        "lscv",
        help="least-squares cross-validation",
        description="Default candidates: even m from 2 to 2n (multiples of b for generalized kinds); "
        "recursive exponents 0.10..0.99 step 0.01 with constant c.",
    )
    common_fit(lscv)
    lscv.add_argument("--candidates", default=None, help="'lo:hi:step' or comma list")
    lscv.set_defaults(func=cmd_lscv)

    th = sub.add_parser("theory", help="theory constants, optimal orders and MISE for a zoo density")
    th.add_argument("--density", choices=ZOO_IDS, default="a")
    th.add_argument("--n", type=int, nargs="+", default=[50, 200, 500])
    th.add_argument("-o", "--output", default=None)
    th.set_defaults(func=cmd_theory)

    sim = sub.add_parser("simulate", help="averaged-ISE tables from a JSON config")
    sim.add_argument("config", help="JSON with keys densities, estimators, n, N, seed")
    sim.add_argument("--format", choices=("csv", "markdown", "json"), default="csv")
    sim.add_argument("-o", "--output", default=None)
    sim.set_defaults(func=cmd_simulate)

    bench = sub.add_parser("bench", help="recursive update versus batch refit timing")
    bench.add_argument("--n-initial", type=int, default=500)
    bench.add_argument("--n-additional", type=int, default=500)
    bench.add_argument("--grid", type=int, default=DEFAULT_NODES)
    bench.add_argument("--seed", type=int, default=42)
    bench.add_argument("-o", "--output", default=None)
    bench.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RuntimeError, ValueError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
