"""Command-line front end.

Subcommands ``eval``, ``roots``, ``expand``, ``simulate`` and ``verify``.
Results go to ``--output`` (CSV with a header row, or JSON as
``{"meta": ..., "rows": [...]}``) or to stdout when no path is given.
Exit status: 0 on success, 1 when a verification claim fails, 2 on a usage
error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from datetime import datetime, timezone
from typing import Sequence

import numpy as np

from . import __version__
from .errors import FrachaosError

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# Serialisation
# --------------------------------------------------------------------------


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = "%.17g" % x
    # keep integral floats recognisable as floats after a round trip
    return s if any(c in s for c in ".en") else s + ".0"


def _json(v) -> str:
    # json.dumps writes floats with repr; 17 significant digits are wanted,
    # and non-finite values become strings so the output stays valid JSON
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return fmt_float(v) if math.isfinite(v) else json.dumps(fmt_float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json(x) for x in v) + "]"
    raise TypeError(f"cannot serialise {type(v).__name__}")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    if isinstance(v, (dict, list, tuple)):
        return _json(v)
    return str(v)


def render(meta: dict, rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        body = ",\n".join("  " + _json(r) for r in rows)
        return '{"meta": ' + _json(meta) + ',\n "rows": [\n' + body + ("\n" if rows else "") + " ]}\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(rows[0]) if rows else []
    writer.writerow(header)
    for r in rows:
        writer.writerow([_csv_cell(r[k]) for k in header])
    return buf.getvalue()


def _timestamp(now: bool) -> str:
    if now:
        when = datetime.now(timezone.utc)
    else:
        # fixed unless SOURCE_DATE_EPOCH says otherwise, so reruns are byte-identical
        when = datetime.fromtimestamp(int(os.environ.get("SOURCE_DATE_EPOCH", "0")), timezone.utc)
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def _meta(args, params: dict) -> dict:
    return {
        "command": args.command,
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "timestamp": _timestamp(args.now),
        "params": params,
    }


def _emit(args, meta: dict, rows: list[dict], summary: str) -> None:
    text = render(meta, rows, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)


def _workers() -> int:
    raw = os.environ.get("FRACHAOS_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"FRACHAOS_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise UsageError("FRACHAOS_THREADS must be at least 1")
    return n


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_eval(args) -> int:
    from .pncf import PncfSpec, eval_H
    from .specfun import hermite, pcf_D, pcf_U

    xs = args.x
    if args.kind in ("H", "hermite") and not args.t > 0:
        raise UsageError("--t must be positive")
    if args.kind == "H":
        vals = [float(eval_H(PncfSpec(args.alpha, args.t), x)) for x in xs]
        params = {"kind": "H", "alpha": args.alpha, "t": args.t}
    elif args.kind == "D":
        vals = [float(pcf_D(args.alpha, x)) for x in xs]
        params = {"kind": "D", "alpha": args.alpha}
    elif args.kind == "U":
        if args.a is None:
            raise UsageError("--kind U needs --a")
        vals = [float(pcf_U(args.a, x)) for x in xs]
        params = {"kind": "U", "a": args.a}
    else:
        n = args.alpha
        if n < 0 or not float(n).is_integer():
            raise UsageError("--kind hermite needs a non-negative integer --alpha")
        vals = [float(hermite(int(n), x, args.t)) for x in xs]
        params = {"kind": "hermite", "n": int(n), "t": args.t}
    if args.output:
        rows = [{"x": x, "value": v} for x, v in zip(xs, vals)]
        _emit(args, _meta(args, params), rows, f"eval: {len(rows)} value(s) written to {args.output}")
    else:
        for v in vals:
            print(repr(v))
    return EXIT_OK


def cmd_roots(args) -> int:
    from .ortho import a_conjugate, find_conjugate_roots

    if not args.hi > args.lo:
        raise UsageError("--hi must exceed --lo")
    if not args.step > 0:
        raise UsageError("--step must be positive")
    roots = find_conjugate_roots(args.lo, args.hi, grid_step=args.step, tol=args.tol, exclude_symmetric=args.exclude_symmetric)
    rows = [{"root": r, "partner": 1.0 - r, "a_conjugate": a_conjugate(r)} for r in roots]
    params = {"lo": args.lo, "hi": args.hi, "step": args.step, "tol": args.tol, "exclude_symmetric": args.exclude_symmetric}
    listed = ", ".join(repr(r) for r in roots) or "none"
    _emit(args, _meta(args, params), rows, f"roots: {len(roots)} found in ({args.lo}, {args.hi}): {listed}")
    return EXIT_OK


BUILTIN_FUNCTIONS = {
    "x2": lambda x: x * x,
    "x3": lambda x: x**3,
    "abs": np.abs,
    "exp": np.exp,
    "sqrt_abs": lambda x: np.sqrt(np.abs(x)),
    "sin": np.sin,
    "cos": np.cos,
    "indicator_pos": lambda x: (x > 0).astype(float),
}


def _table_function(path: str):
    from scipy.interpolate import CubicSpline

    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    try:
        float(rows[0][0])
    except (ValueError, IndexError):
        rows = rows[1:]
    try:
        data = np.array([[float(r[0]), float(r[1])] for r in rows])
    except (ValueError, IndexError):
        raise UsageError(f"{path}: expected two numeric columns x, g(x)") from None
    if data.shape[0] < 4:
        raise UsageError(f"{path}: need at least 4 rows for a cubic spline")
    order = np.argsort(data[:, 0])
    x, y = data[order, 0], data[order, 1]
    if np.any(np.diff(x) <= 0):
        raise UsageError(f"{path}: x values must be distinct")
    spline = CubicSpline(x, y)
    lo, hi = x[0], x[-1]

    def g(v):
        v = np.asarray(v, dtype=float)
        return np.where((v >= lo) & (v <= hi), spline(np.clip(v, lo, hi)), 0.0)

    return g


def cmd_expand(args) -> int:
    from .chaos import expand_fractional, expand_polynomial
    from .ortho import AlphaSet, find_conjugate_roots

    if not args.t > 0:
        raise UsageError("--t must be positive")
    if (args.function is None) == (args.table is None):
        raise UsageError("give exactly one of --function and --table")
    g = BUILTIN_FUNCTIONS[args.function] if args.function else _table_function(args.table)
    source = {"function": args.function} if args.function else {"table": args.table}
    if args.basis == "polynomial":
        if args.max_degree < 0:
            raise UsageError("--max-degree must be non-negative")
        exp = expand_polynomial(g, args.max_degree, args.t)
        rows = [{"degree": k, "coefficient": float(c)} for k, c in enumerate(exp.coefficients)]
        params = {"basis": "polynomial", "t": args.t, "max_degree": args.max_degree, **source}
    else:
        if args.alphas:
            aset = AlphaSet.build(args.alphas, args.t)
        else:
            roots = find_conjugate_roots(3.05, 3.95)
            aset = AlphaSet.conjugate_pair(roots[0], args.t)
        exp = expand_fractional(g, aset, args.t)
        rows = [{"alpha": a, "coefficient": float(c)} for a, c in zip(aset.alphas, exp.coefficients)]
        params = {"basis": "fractional", "t": args.t, "alphas": list(aset.alphas), **source}
    meta = _meta(args, params)
    meta["residual"] = exp.residual
    _emit(args, meta, rows, f"expand: {len(rows)} coefficients, residual {exp.residual:.3e}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .stochproc import eval_process, simulate_wiener

    if args.n_paths < 1 or args.n_steps < 1:
        raise UsageError("--n-paths and --n-steps must be positive")
    if not args.t_end > 0:
        raise UsageError("--t-end must be positive")
    times = np.linspace(0.0, args.t_end, args.n_steps + 1)
    ens = simulate_wiener(args.n_paths, times, args.seed, workers=_workers())
    h = eval_process(ens, args.alpha) if args.alpha is not None else None
    rows = []
    for i in range(ens.n_paths):
        for j, t in enumerate(times):
            row = {"path": i, "time": float(t), "w": float(ens.paths[i, j])}
            if h is not None:
                row["h"] = float(h[i, j])
            rows.append(row)
    params = {"n_paths": args.n_paths, "n_steps": args.n_steps, "t_end": args.t_end, "alpha": args.alpha}
    _emit(args, _meta(args, params), rows, f"simulate: {args.n_paths} paths x {args.n_steps + 1} times")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import ALPHA_FLOOR, STOCHASTIC, SUITES, Settings, record, run_suites

    unknown = sorted(set(args.suites) - set(SUITES) - {"all"})
    if unknown:
        raise UsageError(f"unknown suite(s) {', '.join(unknown)}; choose from {', '.join(sorted(SUITES))} or all")
    names = sorted(SUITES) if not args.suites or "all" in args.suites else sorted(set(args.suites))
    if args.seed is None and any(n in STOCHASTIC for n in names):
        raise UsageError(f"--seed is required for the stochastic suites {', '.join(STOCHASTIC)}")
    seed = 0 if args.seed is None else args.seed
    if args.alpha is not None:
        for n in names:
            if n not in ALPHA_FLOOR:
                raise UsageError(f"--alpha is not accepted by suite {n!r}")
            bad = [a for a in args.alpha if not a > ALPHA_FLOOR[n]]
            if bad:
                raise UsageError(f"suite {n!r} needs alpha > {ALPHA_FLOOR[n]:g}, got {bad}")
    cfg = Settings(seed=seed, alphas=tuple(args.alpha) if args.alpha else None)
    claims = run_suites(names, cfg, workers=_workers())
    rows = [record(c, "verify", args.seed) for c in claims]
    checks = [c for c in claims if c.passed is not None]
    failed = [c for c in checks if not c.passed]
    params = {"suites": names, "alpha": list(args.alpha) if args.alpha else None}
    summary = f"verify: {len(checks) - len(failed)}/{len(checks)} checks passed, {len(claims) - len(checks)} reported"
    if failed:
        summary += "; failed: " + ", ".join(sorted({f"{c.suite}.{c.claim}" for c in failed}))
    _emit(args, _meta(args, params), rows, summary)
    return EXIT_FAILED if failed else EXIT_OK


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    from .verify import SUITES

    parser = _Parser(prog="frachaos", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--output", help="write results here instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--now", action="store_true", help="stamp meta with the wall clock")

    p = sub.add_parser("eval", help="evaluate H_alpha, U, D or a Hermite polynomial")
    p.add_argument("--kind", choices=("H", "U", "D", "hermite"), default="H")
    p.add_argument("--alpha", type=float, default=0.0, help="order (degree for hermite)")
    p.add_argument("--a", type=float, help="first parameter of U(a, z)")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--x", type=float, nargs="+", required=True, help="argument(s); z for U and D")
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("roots", help="orders alpha with H_alpha orthogonal to H_(1-alpha)")
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--exclude-symmetric", action="store_true", help="drop the trivial root 1/2")
    common(p)
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("expand", help="chaos coefficients of a function of W_t")
    p.add_argument("--basis", choices=("fractional", "polynomial"), default="polynomial")
    p.add_argument("--function", choices=sorted(BUILTIN_FUNCTIONS))
    p.add_argument("--table", help="two-column CSV of x, g(x)")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--max-degree", type=int, default=4)
    p.add_argument("--alphas", type=float, nargs="+", help="orthogonal orders (default: the pair near 3.60)")
    common(p)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("simulate", help="Wiener path ensemble, optionally with H_alpha(W_t, t)")
    p.add_argument("--n-paths", type=int, required=True)
    p.add_argument("--n-steps", type=int, required=True)
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--alpha", type=float)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("suites", nargs="*", metavar="SUITE", help=f"one of {', '.join(sorted(SUITES))}, or all (default)")
    p.add_argument("--seed", type=int)
    p.add_argument("--alpha", type=float, nargs="+", help="override the orders of the stochastic suites")
    common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**63:
            raise UsageError("--seed must be a non-negative 63-bit integer")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FrachaosError, OverflowError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
