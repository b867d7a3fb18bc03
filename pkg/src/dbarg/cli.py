"""Command-line front end: ``dbarg <subcommand> [options]``.

Every subcommand produces a report {command, config, version, results, errors}
written as JSON (default) or as CSV rows of ``results``.  Exit codes: 0 ok,
2 domain error, 3 convergence failure, 64 malformed arguments.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import time

import numpy as np

from . import __version__
from .acceptance import Settings, exit_code as selftest_exit_code, run_all
from .algebra import (
    Custom,
    ExpPoly,
    LogPowerDerived,
    QExp,
    Representation,
    coherent_vector,
    convergence_radii,
    factorial_table,
    log_moment,
)
from .config import RunConfig, load_config
from .errors import DbargError, InvalidSpec, NonDecayingIntegrand, UnsupportedProvenance
from .kernel import kernel_G
from .quadrature import adjointness_residual, parseval_check, radial_moment, reproducing_check
from .ring import RingCase, vanishing_propagation
from .transport import ExpSumChoice, TransportedPsi, transport_weight
from .weight import (
    Provenance,
    expoly_mellin,
    inverse_mellin_weight,
    log_psi_from_weight,
    logpower_weight,
    q_weight,
)

USAGE_EXIT = 64


class UsageError(Exception):
    exit_code = USAGE_EXIT
    code = "UsageError"


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let "-6..6" and "-1+2i" through as values
        self._negative_number_matcher = re.compile(r"^-[\d.]")

    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def parse_range(text: str) -> list[int]:
    """'-6..6' -> [-6, ..., 6]; '3' -> [3]; '1,4,9' -> [1, 4, 9]."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer range {text!r}") from None


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad complex number {text!r}") from None


def parse_floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _load_table(path: str):
    xs, psis = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                x, p = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if xs:
                    raise InvalidSpec(f"bad row in {path}: {row}") from None
                continue  # header
            xs.append(x)
            psis.append(p)
    if len(xs) < 2:
        raise InvalidSpec("custom table needs at least two samples")
    order = np.argsort(xs)
    xs, psis = np.asarray(xs)[order], np.asarray(psis)[order]
    if np.any(psis <= 0):
        raise InvalidSpec("custom table psi values must be positive")
    return xs, np.log(psis)


def build_psi(args):
    family = args.psi
    if family == "qexp":
        return QExp(args.lam, args.q)
    if family == "expoly":
        if not args.coeffs:
            raise UsageError("--psi expoly needs --coeffs a0,a1,...")
        return ExpPoly(tuple(args.coeffs))
    if family == "logpower":
        return LogPowerDerived(args.nu, args.order)
    if not args.table:
        raise UsageError("--psi custom-table needs --table FILE")
    if args.limit_minus is None or args.limit_plus is None:
        raise UsageError("--psi custom-table needs --limit-minus and --limit-plus")
    xs, logs = _load_table(args.table)
    return Custom(lambda x: float(np.exp(np.interp(x, xs, logs))),
                  args.limit_minus, args.limit_plus, name=args.table)


def build_weight(spec, cfg: RunConfig):
    if isinstance(spec, QExp):
        return q_weight(spec.lam, spec.q)
    if isinstance(spec, LogPowerDerived):
        return logpower_weight(spec.nu, spec.n)
    if isinstance(spec, ExpPoly):
        mellin = expoly_mellin(spec)
        if not mellin.admissible:
            raise NonDecayingIntegrand("no weight: Bernoulli Mellin transform needs p even")
        return inverse_mellin_weight(mellin, c=cfg.contour, tol=cfg.quad_tol)
    raise UnsupportedProvenance("no weight construction for custom psi")


def _num(x):
    """JSON-safe number: infinities and NaN become strings, complex becomes [re, im]."""
    if isinstance(x, (complex, np.complexfloating)):
        return [_num(x.real), _num(x.imag)]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    return x


# ---------------------------------------------------------------------------
# subcommands; each returns a list of result rows
# ---------------------------------------------------------------------------


def cmd_radii(args, cfg):
    r1, r2, kind = convergence_radii(build_psi(args))
    return [{"r1": r1, "r2": r2, "class": kind}]


def cmd_factorials(args, cfg):
    rep = Representation(build_psi(args), args.mu)
    table = factorial_table(rep, args.nmin, args.nmax)
    return [{"n": int(n), "psi_factorial": table.value(int(n)), "log_M": table.log_moment(int(n))}
            for n in table.indices]


def cmd_coherent(args, cfg):
    rep = Representation(build_psi(args), args.mu)
    vec = coherent_vector(rep, args.z, cfg.series_tol)
    rows = [{"n": n, "coefficient": vec.coefficient(n)} for n in range(vec.nmin, vec.nmax + 1)]
    summary = {"n": "summary", "squared_norm": vec.squared_norm(), "tail_bound": vec.tail_bound,
               "eigen_residual": vec.eigen_residual(rep)}
    return [summary] + rows if args.coefficients else [summary]


def cmd_kernel(args, cfg):
    rep = Representation(build_psi(args), args.mu)
    rows = []
    for x in args.x:
        x = x.real if x.imag == 0 else x
        ev = kernel_G(rep, x, cfg.series_tol)
        rows.append({"x": ev.x, "G": ev.value, "tail_bound": ev.tail_bound,
                     "nmin": ev.terms_used[0], "nmax": ev.terms_used[1]})
    return rows


def cmd_weight(args, cfg):
    F = build_weight(build_psi(args), cfg)
    xs = np.geomspace(args.xmin, args.xmax, args.points)
    values = F(xs)
    return [{"x": float(x), "F": float(v), "provenance": F.provenance.value,
             "positivity": F.positivity.value} for x, v in zip(xs, values)]


def cmd_moments(args, cfg):
    spec = build_psi(args)
    F = build_weight(spec, cfg)
    if F.provenance is Provenance.NUMERIC_INVERSE_MELLIN and not F.u_slope > 0:
        raise UnsupportedProvenance(
            "log F^ is not convex at rho = 1; moments of this numerically inverted "
            "weight cancel beyond double precision")
    rows = []
    for n in args.n:
        report = radial_moment(F, n, cfg.quad_tol, cfg.max_nodes)
        oracle = math.exp(log_moment(Representation(spec), n))
        rows.append({"n": n, "quadrature": report.value, "oracle": oracle,
                     "rel_err": abs(report.value - oracle) / oracle,
                     "abs_err_estimate": report.abs_err_estimate, "nodes": report.nodes_used})
    return rows


def _coefficient_draws(seed, nmin, nmax, trials):
    rng = np.random.default_rng(seed)
    size = nmax - nmin + 1
    for _ in range(trials):
        yield nmin, rng.normal(size=size) + 1j * rng.normal(size=size)


def cmd_parseval(args, cfg):
    spec = build_psi(args)
    F = build_weight(spec, cfg)
    rows = []
    for i, coeffs in enumerate(_coefficient_draws(cfg.seed, args.nmin, args.nmax, args.trials)):
        r = parseval_check(F, spec, coeffs, cfg.quad_tol, args.mode, cfg.max_nodes)
        rows.append({"trial": i, "integral": r.value, "l2_norm_sq": r.reference,
                     "rel_mismatch": r.mismatch, "nodes": r.nodes_used})
    return rows


def cmd_reproduce(args, cfg):
    spec = build_psi(args)
    F = build_weight(spec, cfg)
    (coeffs,) = _coefficient_draws(cfg.seed, args.nmin, args.nmax, 1)
    return [{"zeta": z, "mode": args.mode,
             "residual": reproducing_check(F, spec, z, coeffs, cfg.quad_tol, args.mode,
                                           cfg.max_nodes)}
            for z in args.zeta]


def cmd_adjoint(args, cfg):
    spec = build_psi(args)
    F = build_weight(spec, cfg)
    return [{"m": m, "n": n,
             "residual": adjointness_residual(F, spec, m, n, cfg.quad_tol, cfg.max_nodes)}
            for m in args.m for n in args.n]


def cmd_psi_from_f(args, cfg):
    rows = []
    for rho in args.rho:
        lp = log_psi_from_weight(args.nu, args.order, rho)
        row = {"rho": rho, "log_psi": lp, "psi": math.exp(lp) if lp < 709 else math.inf}
        if args.order == 1:
            row["closed_form"] = math.exp((2 * rho + 1) / (4 * args.nu))
        rows.append(row)
    return rows


def cmd_transport(args, cfg):
    try:
        choice = ExpSumChoice.from_json(args.choice)
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        if isinstance(exc, DbargError):
            raise
        raise UsageError(f"--choice must be a JSON list of [a, alpha] pairs: {exc}") from None
    base = build_psi(args)
    F2 = transport_weight(build_weight(base, cfg), choice)
    psi2 = TransportedPsi(base, choice)
    moments = {n: radial_moment(F2, n, cfg.quad_tol, cfg.max_nodes).value for n in args.n}
    rows = []
    for n in args.n:
        row = {"n": n, "M2": moments[n], "psi2_next": psi2(n + 1)}
        if n + 1 in moments:
            row["recursion_rel"] = abs(moments[n + 1] - psi2(n + 1) * moments[n]) / moments[n + 1]
        rows.append(row)
    return rows


def cmd_ring_demo(args, cfg):
    case = RingCase(args.variant, args.q)
    return [{"step": k, "lo": lo, "hi": hi}
            for k in range(1, args.steps + 1)
            for lo, hi in [vanishing_propagation(case, steps=k)]]


def cmd_selftest(args, cfg):
    settings = Settings(cfg.quad_tol, cfg.series_tol, cfg.max_nodes, cfg.seed)
    return run_all(settings)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_psi(p):
    g = p.add_argument_group("psi")
    g.add_argument("--psi", choices=["qexp", "expoly", "logpower", "custom-table"], default="qexp")
    g.add_argument("--lambda", dest="lam", type=float, default=1.0)
    g.add_argument("--q", type=float, default=0.5)
    g.add_argument("--coeffs", type=parse_floats, help="expoly coefficients a0,a1,...")
    g.add_argument("--nu", type=float, default=0.5)
    g.add_argument("--order", type=int, default=1, help="logpower exponent n in (ln x)^(2n)")
    g.add_argument("--table", help="CSV of x,psi samples")
    g.add_argument("--limit-minus", type=float)
    g.add_argument("--limit-plus", type=float)
    g.add_argument("--mu", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file ($DBARG_CONFIG overrides)")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--format", dest="output_format", choices=["json", "csv"])
    common.add_argument("--series-tol", type=float)
    common.add_argument("--quad-tol", type=float)
    common.add_argument("--contour", type=float)
    common.add_argument("--max-nodes", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--timing", action="store_true", help="embed wall-clock time")

    parser = _Parser(prog="dbarg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, psi=True, **kw):
        p = sub.add_parser(name, parents=[common], **kw)
        if psi:
            _add_psi(p)
        p.set_defaults(func=func)
        return p

    add("radii", cmd_radii)
    p = add("factorials", cmd_factorials)
    p.add_argument("--nmin", type=int, default=-5)
    p.add_argument("--nmax", type=int, default=5)
    p = add("coherent", cmd_coherent)
    p.add_argument("--z", type=parse_complex, required=True)
    p.add_argument("--coefficients", action="store_true")
    p = add("kernel", cmd_kernel)
    p.add_argument("--x", type=parse_complex, nargs="+", required=True)
    p = add("weight", cmd_weight)
    p.add_argument("--xmin", type=float, default=1e-3)
    p.add_argument("--xmax", type=float, default=1e3)
    p.add_argument("--points", type=int, default=65)
    p = add("moments", cmd_moments)
    p.add_argument("--n", type=parse_range, default=parse_range("-6..6"))
    for name, func in (("parseval", cmd_parseval), ("reproduce", cmd_reproduce)):
        p = add(name, func)
        p.add_argument("--nmin", type=int, default=-8)
        p.add_argument("--nmax", type=int, default=8)
        p.add_argument("--mode", choices=["analytic", "2d"], default="analytic")
        if name == "parseval":
            p.add_argument("--trials", type=int, default=10)
        else:
            p.add_argument("--zeta", type=parse_complex, nargs="+",
                           default=[0.7 + 0.2j, 1.1, 2 - 1j])
    p = add("adjoint", cmd_adjoint)
    p.add_argument("--m", type=parse_range, default=parse_range("-4..4"))
    p.add_argument("--n", type=parse_range, default=parse_range("-4..4"))
    p = add("psi-from-f", cmd_psi_from_f, psi=False)
    p.add_argument("--nu", type=float, default=0.5)
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--rho", type=parse_floats, default=[-1.0, 0.0, 1.0, 2.0])
    p = add("transport", cmd_transport)
    p.add_argument("--choice", required=True, help='JSON pairs, e.g. "[[1,0],[1,1]]"')
    p.add_argument("--n", type=parse_range, default=parse_range("-4..4"))
    p = add("ring-demo", cmd_ring_demo, psi=False)
    p.add_argument("--variant", choices=["exterior", "disk"], required=True)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=10)
    add("selftest", cmd_selftest, psi=False)
    return parser


# ---------------------------------------------------------------------------
# report assembly
# ---------------------------------------------------------------------------


def _error_entry(exc) -> dict:
    return {"code": exc.code, "message": str(exc), "exit_code": exc.exit_code}


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_num(report), indent=2) + "\n"
    rows = [_num(r) for r in report["results"]]
    out = io.StringIO()
    if rows:
        fields = list(dict.fromkeys(k for r in rows for k in r))
        writer = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v
                             for k, v in r.items()})
    return out.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"dbarg: usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT

    errors, results, code = [], [], 0
    started = time.perf_counter()
    try:
        cfg = load_config(args.config).replace(
            series_tol=args.series_tol, quad_tol=args.quad_tol, contour=args.contour,
            max_nodes=args.max_nodes, seed=args.seed, output_format=args.output_format,
            output=args.output,
        )
    except (DbargError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"dbarg: bad config: {exc}", file=sys.stderr)
        return USAGE_EXIT
    try:
        results = args.func(args, cfg)
    except UsageError as exc:
        print(f"dbarg: usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except DbargError as exc:
        errors.append(_error_entry(exc))
        code = exc.exit_code

    if args.command == "selftest":
        code = selftest_exit_code(results)
        errors = [dict(r.error, criterion=r.number) for r in results if r.error]
        for r in results:
            print(r.line(), file=sys.stderr)
        results = [r.to_dict() for r in results]

    report = {"command": args.command, "config": cfg.to_dict(), "version": __version__,
              "results": results, "errors": errors}
    if args.timing:
        report["wall_clock_s"] = time.perf_counter() - started
    text = render(report, cfg.output_format)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if errors and cfg.output_format == "csv":
        for e in errors:
            print(f"dbarg: {e['code']}: {e['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
