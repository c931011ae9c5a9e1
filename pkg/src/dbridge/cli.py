"""Command-line front end: ``dbridge {spectrum,scan,profile,construct-alpha,linear}``.

Every subcommand writes one table (CSV or JSON) to ``--output`` or stdout.
Exit codes: 0 success, 1 bad input, 2 precision exhausted, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from decimal import Decimal
from pathlib import Path

from . import __version__
from ._io import dump_json, fmt_float
from .alpha import (
    PrecisionExhausted,
    construct_alpha,
    dichotomy_seq,
    load_catalog,
    parse_alpha,
)
from .config import N_MAX, PRECISION_ENV
from .profile import (
    boundary_residual,
    build_profile,
    export_profile,
    kirchhoff_residual,
    ode_residual,
    ode_residual_bound,
)
from .scan import cluster_hits, fit_recurrence, scan_hits, scan_hurwitz
from .spectral_maps import K0
from .spectrum import (
    MINUS,
    PLUS,
    BranchMarker,
    GraphGeometry,
    bifurcation_check,
    branch_solution,
    cluster_interval_minus,
    cluster_interval_plus,
    enumerate_solutions,
    linear_eigenvalues,
    omega_minus,
    omega_plus,
)

EXIT_OK, EXIT_INPUT, EXIT_PRECISION, EXIT_IO = 0, 1, 2, 3


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- formatting


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    if isinstance(v, Decimal):
        return format(v, "f")
    return str(v)


def _csv(columns, rows, notes=()) -> str:
    lines = [",".join(columns)]
    lines += [",".join(_cell(r[c]) for c in columns) for r in rows]
    lines += [f"# {n}" for n in notes]
    return "\n".join(lines) + "\n"


def _emit(args, text: str) -> None:
    if args.output in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    Path(args.output).write_text(text)


def _geometry(args) -> GraphGeometry:
    catalog = load_catalog(args.catalog) if args.catalog else None
    if args.alpha is None:
        raise UsageError("--alpha is required")
    return GraphGeometry(parse_alpha(args.alpha, catalog), args.L)


def _check_nmax(n: int) -> int:
    if not 1 <= n <= N_MAX:
        raise UsageError(f"--nmax must lie in 1..{N_MAX}, got {n}")
    return n


def _extra_bits(digits: int) -> int:
    # enough guard bits that the certified radius sits well below the last digit
    return max(0, math.ceil((digits + 4) * math.log2(10)) - 48)


def _xi_out(ds, digits: int):
    if digits <= 17:
        return ds.xi_tilde
    return Decimal(ds.xi_tilde_decimal(digits))


# ---------------------------------------------------------------- subcommands


def cmd_spectrum(args) -> str:
    geom = _geometry(args)
    sols = enumerate_solutions(geom, _check_nmax(args.nmax))
    rows, counts = [], {"isolated": 0, "branch_plus": 0, "branch_minus": 0}
    for s in sols:
        if isinstance(s, BranchMarker):
            counts["branch_" + s.family] += 1
            rows.append(dict(family=s.family, n=s.n, omega=None, k_n=None, shift=None, branch=True))
        else:
            counts["isolated"] += 1
            rows.append(dict(family=s.family, n=s.n, omega=s.omega, k_n=s.k_n.k, shift=s.shift, branch=False))
    summary = " ".join(f"{k}={v}" for k, v in counts.items())
    cols = ["family", "n", "omega", "k_n", "shift", "branch"]
    if args.format == "json":
        return dump_json({"alpha": geom.alpha.name, "L": geom.L, "rows": rows, "summary": counts}) + "\n"
    return _csv(cols, rows, [summary])


def cmd_scan(args) -> str:
    geom = _geometry(args)
    n_max = _check_nmax(args.nmax)
    digits = args.digits
    hits = scan_hits(geom.alpha, n_max, args.threshold, threads=args.threads)
    lo_p, _ = cluster_interval_plus(geom.L)
    lo_m, _ = cluster_interval_minus(geom.L)
    rows = []
    for h in hits:
        ds = dichotomy_seq(geom.alpha, h.n, extra_bits=_extra_bits(digits)) if digits > 17 else None
        wp, wm = omega_plus(geom, h.n), omega_minus(geom, h.n)
        op = None if wp is None else wp.omega
        om = None if wm is None else wm.omega
        rows.append(
            dict(
                n=h.n,
                xi_tilde=h.xi_tilde if ds is None else _xi_out(ds, digits),
                omega_plus=op,
                omega_minus=om,
                in_I_plus=None if op is None else lo_p <= op <= 0.0,
                in_I_minus=None if om is None else lo_m <= om <= 0.0,
            )
        )
    cols = ["n", "xi_tilde", "omega_plus", "omega_minus", "in_I_plus", "in_I_minus"]
    if args.format != "json":
        return _csv(cols, rows)
    doc = {"alpha": geom.alpha.name, "L": geom.L, "n_max": n_max, "threshold": float(args.threshold), "hits": rows}
    if hits:
        rep = cluster_hits(hits, args.radius)
        doc["clusters"] = [
            {
                "value": c.value,
                "limit": c.limit,
                "spread": c.spread,
                "converged": c.converged,
                "members": list(c.members),
            }
            for c in rep.clusters
        ]
        doc["outliers"] = list(rep.outliers)
        doc["converged"] = rep.converged
    else:
        doc["clusters"] = []
    if not geom.alpha.is_rational:
        hur = scan_hurwitz(geom.alpha, n_max, threads=args.threads)
        doc["hurwitz"] = [
            {"n": n, "omega_minus": w.omega, "in_I_minus": lo_m <= w.omega <= 0.0}
            for n in hur
            if (w := omega_minus(geom, n)) is not None
        ]
    fit = fit_recurrence([h.n for h in hits])
    if fit is not None:
        c1, c2, ok = fit
        doc["recurrence"] = {"c1": str(c1), "c2": str(c2), "holds": ok}
    return dump_json(doc) + "\n"


def cmd_profile(args) -> str:
    geom = _geometry(args)
    if args.n is None or args.n < 1:
        raise UsageError("--n must be a positive integer")
    if args.branch:
        if args.omega is None:
            raise UsageError("--branch needs --omega")
        wave = branch_solution(geom, args.n, args.omega, sign=args.sign)
    else:
        fn = omega_plus if args.family == PLUS else omega_minus
        wave = fn(geom, args.n)
        if wave is None:
            raise UsageError(f"n={args.n} carries a continuous branch for this alpha; use --branch --omega")
    prof = build_profile(wave, geom)
    extra = None
    if args.validate:
        cont, deriv = kirchhoff_residual(prof)
        h = 1e-4
        extra = {
            "kirchhoff_continuity": cont,
            "kirchhoff_derivative": deriv,
            "boundary": boundary_residual(prof),
            "ode": ode_residual(prof, h=h),
            "ode_bound": ode_residual_bound(prof, h=h),
        }
    text = export_profile(prof, args.grid, args.format, extra)
    if extra and args.format == "csv":
        text += "".join(f"# {k}={fmt_float(v)}\n" for k, v in extra.items())
    return text


def cmd_construct_alpha(args) -> str:
    if args.ell is None:
        raise UsageError("--ell is required")
    if args.depth is None:
        raise UsageError("--depth is required")
    alpha, starts = construct_alpha(args.ell, args.depth, terminate=args.terminate)
    ell = float(alpha.ell)
    rows = []
    for j, nj in enumerate(starts, 1):
        ds = dichotomy_seq(alpha, 2**nj, extra_bits=_extra_bits(args.digits))
        row = dict(j=j, n_j=nj, xi_tilde=_xi_out(ds, args.digits), error=abs(float(ds.xi_tilde_q - alpha.ell)))
        if args.omega0:
            row["omega"] = -((4.0 * K0 * K0 * abs(ds.xi_tilde) / args.L) ** 2)
        rows.append(row)
    X, _ = alpha.floor_scaled(1, 128)
    cols = ["j", "n_j", "xi_tilde", "error"] + (["omega"] if args.omega0 else [])
    omega0 = -((4.0 * K0 * K0 * ell / args.L) ** 2)
    if args.format == "json":
        doc = {"ell": str(alpha.ell), "depth": args.depth, "terminated": args.terminate,
               "alpha": alpha.value, "alpha_bits_128": format(X, "032x"), "rows": rows}
        if args.omega0:
            doc["omega0"] = omega0
        return dump_json(doc) + "\n"
    notes = [f"alpha={fmt_float(alpha.value)}", f"alpha_bits_128={X:032x}"]
    if args.omega0:
        notes.append(f"omega0={fmt_float(omega0)}")
    return _csv(cols, rows, notes)


def cmd_linear(args) -> str:
    geom = _geometry(args)
    if args.bifurcate:
        n = args.n if args.n is not None else 1
        if args.eps is None:
            raise UsageError("--bifurcate needs --eps")
        b = bifurcation_check(geom, n, args.eps)
        row = dict(n=n, lam=b.lam, omega=b.omega, k_n=b.k_n, amplitude=b.amplitude, predicted=b.predicted,
                   amplitude_ratio=b.amplitude_ratio, k_predicted=b.k_predicted, k_ratio=b.k_ratio)
        if args.format == "json":
            return dump_json(row) + "\n"
        return _csv(list(row), [row])
    eigs = linear_eigenvalues(geom, _check_nmax(args.nmax))
    rows = [dict(n=e.n, lam=e.lam, q0=e.q0) for e in eigs]
    notes = [] if rows else ["no eigenvalues"]
    if args.format == "json":
        doc = {"alpha": geom.alpha.name, "L": geom.L, "rows": rows}
        if not rows:
            doc["note"] = "no eigenvalues"
        return dump_json(doc) + "\n"
    return _csv(["n", "lam", "q0"], rows, notes)


# ---------------------------------------------------------------- parser


def _fraction(text: str):
    from fractions import Fraction

    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _threads(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("--threads must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--alpha", help="catalog name, p/q, quad:a,b,c,m or a decimal")
    common.add_argument("--L", type=float, default=1.0, help="ring length (default 1)")
    common.add_argument("--catalog", help="extra catalog file of 'name kind params' lines")
    common.add_argument("--config", help="key=value file; flags given on the command line win")
    common.add_argument("--output", "-o", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--digits", type=int, default=17, help="significant digits for xi_tilde (17 or more)")
    common.add_argument("--precision-bits", type=int, help=f"guard bits; same as {PRECISION_ENV}")

    p = _Parser(prog="dbridge", description="Standing waves of the cubic NLS on the double-bridge graph.")
    p.add_argument("--version", action="version", version=f"dbridge {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("spectrum", parents=[common], help="enumerate solutions of (P+) and (P-)")
    s.add_argument("--nmax", type=int, default=10, help="largest mode index n")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("scan", parents=[common], help="hit indices |xi_tilde_n| < threshold")
    s.add_argument("--nmax", type=int, default=10**6, help="scan n = 1..NMAX")
    s.add_argument("--threshold", type=_fraction, default=_fraction("1/4"), help="hit bound on |xi_tilde|, e.g. 1/4")
    s.add_argument("--threads", type=_threads, default=os.cpu_count() or 1, help="worker threads")
    s.add_argument("--radius", type=float, default=1e-6, help="cluster radius on the xi_tilde axis")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("profile", parents=[common], help="sample the four-edge profile")
    s.add_argument("--n", type=int, help="mode index")
    s.add_argument("--family", choices=(PLUS, MINUS), default=PLUS)
    s.add_argument("--branch", action="store_true", help="continuous-branch member at --omega")
    s.add_argument("--omega", type=float, help="frequency (negative)")
    s.add_argument("--sign", type=int, choices=(1, -1), default=1, help="branch shift +gamma or -gamma")
    s.add_argument("--grid", type=int, default=256, help="samples per edge")
    s.add_argument("--validate", action="store_true", help="append Kirchhoff and ODE residuals")
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("construct-alpha", parents=[common], help="build alpha with xi_tilde(2^n_j) -> ell")
    s.add_argument("--ell", type=_fraction, help="target limit, e.g. 21/4")
    s.add_argument("--depth", type=int, help="number of blocks")
    s.add_argument("--terminate", action="store_true", help="stop the expansion after --depth blocks")
    s.add_argument("--omega0", action="store_true", help="report the limiting frequency")
    s.set_defaults(func=cmd_construct_alpha)

    s = sub.add_parser("linear", parents=[common], help="linear eigenvalues and small-amplitude bifurcation")
    s.add_argument("--nmax", type=int, default=10, help="largest mode index n")
    s.add_argument("--bifurcate", action="store_true", help="check small-amplitude bifurcation at mode --n")
    s.add_argument("--n", type=int, help="mode index for --bifurcate")
    s.add_argument("--eps", type=float, help="amplitude for --bifurcate")
    s.set_defaults(func=cmd_linear)

    p._subparsers_map = sub.choices  # type: ignore[attr-defined]
    return p


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _read_config(path: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        k, v = (t.strip() for t in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _apply_config(parser, sub: argparse.ArgumentParser, path: str) -> None:
    actions = {a.dest: a for a in sub._actions}
    updates = {}
    for key, val in _read_config(path).items():
        if key in ("config", "help", "func") or key not in actions:
            raise UsageError(f"unknown config key {key!r}")
        act = actions[key]
        if isinstance(act, argparse._StoreTrueAction):
            low = val.lower()
            if low not in _TRUE | _FALSE:
                raise UsageError(f"config key {key!r} needs a boolean, got {val!r}")
            updates[key] = low in _TRUE
        else:
            if act.choices is not None and act.type is None and val not in act.choices:
                raise UsageError(f"config key {key!r}: invalid choice {val!r}")
            updates[key] = val  # string defaults go through the action's type
    sub.set_defaults(**updates)


def run(argv=None) -> int:
    parser = build_parser()
    saved = os.environ.get(PRECISION_ENV)
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: spectrum, scan, profile, construct-alpha, linear")
        if args.config:
            _apply_config(parser, parser._subparsers_map[args.command], args.config)
            args = parser.parse_args(argv)
        if args.digits < 1:
            raise UsageError("--digits must be positive")
        if args.precision_bits is not None:
            if args.precision_bits < 1:
                raise UsageError("--precision-bits must be positive")
            os.environ[PRECISION_ENV] = str(args.precision_bits)
        _emit(args, args.func(args))
    except PrecisionExhausted as exc:
        print(f"dbridge: precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except OSError as exc:
        print(f"dbridge: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError, TypeError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"dbridge: error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        if saved is None:
            os.environ.pop(PRECISION_ENV, None)
        else:
            os.environ[PRECISION_ENV] = saved
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
