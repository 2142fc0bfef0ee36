"""Command-line entry point.

Exit status: 0 on success, 1 when a check fails (the first counterexample is
printed to stderr), 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import experiments as ex
from . import verify as vf
from .contfrac import parse_alpha
from .errors import CFLengthError, DomainError, NotAdmissibleError, PreconditionError
from .farey import FareyPoint, farey_sequence, neighbors
from .martingale import parse_family
from .stepfn import StepFunction, chi_beta, f_beta, psi

WORKERS_ENV = "FAREYMART_WORKERS"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    out: str | None = None
    format: str = "csv"
    workers: int = 1


# -- output helpers -------------------------------------------------------------------------


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _table(cfg: RunConfig, header, rows) -> str:
    if cfg.format == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=1) + "\n"
    return _csv(header, rows)


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(cfg: RunConfig, rep: vf.CheckReport) -> int:
    if cfg.out:
        payload = {
            "name": rep.name,
            "params": {k: str(v) for k, v in rep.params.items()},
            "passed": rep.passed,
            "checked": rep.checked,
            "counterexample": None if rep.counterexample is None else str(rep.counterexample),
            "residuals": [[str(w), str(r)] for w, r in rep.residuals[:100]],
            "info": {k: str(v) for k, v in rep.info.items()},
        }
        _emit(cfg, json.dumps(payload, indent=1) + "\n")
    print(rep.summary())
    if not rep.passed:
        print(f"counterexample: {rep.counterexample}", file=sys.stderr)
        return 1
    return 0


def _point(text: str) -> FareyPoint:
    try:
        return FareyPoint.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse point {text!r}: {exc}") from None


def _alpha(text: str):
    try:
        return parse_alpha(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- subcommands ------------------------------------------------------------------------------


def cmd_farey(cfg: RunConfig) -> int:
    rows = []
    for b in farey_sequence(cfg.params["Q"]):
        left, right = neighbors(b) if not b.is_zero() else (None, None)
        rows.append([b.num, b.den, str(left or ""), str(right or "")])
    _emit(cfg, _table(cfg, ["num", "den", "left", "right"], rows))
    return 0


def cmd_cf(cfg: RunConfig) -> int:
    alpha = _alpha(cfg.params["alpha"])
    rows = []
    for n in range(1, cfg.params["n"] + 1):
        if not alpha.has(n):
            break
        p, q = alpha.convergent(n)
        E = " ".join(str(b) for b in alpha.intermediate_set(n))
        rows.append([n, alpha.quotient(n), p, q, E])
    _emit(cfg, _table(cfg, ["n", "a_n", "p_n", "q_n", "E_n"], rows))
    return 0


def cmd_basis(cfg: RunConfig) -> int:
    beta = _point(cfg.params["beta"])
    g = chi_beta(beta) if cfg.params["kind"] == "chi" else f_beta(beta)
    if cfg.format == "json":
        _emit(cfg, g.to_json() + "\n")
    else:
        rows = [[str(p), str(v), str(g(p))] for p, v in zip(g.points, g.values)]
        _emit(cfg, _csv(["breakpoint", "arc_value", "point_value"], rows))
    return 0


def _parse_F(text: str):
    if text == "psi":
        return psi()
    if text == "one":
        return StepFunction.constant(1)
    kind, _, arg = text.partition(":")
    if kind == "f":
        return f_beta(_point(arg))
    if kind == "chi":
        return chi_beta(_point(arg))
    if kind == "indicator":
        lo, _, hi = arg.partition(",")
        try:
            return StepFunction.from_arcs([(Fraction(lo), Fraction(hi), 1)])
        except ValueError:
            raise UsageError(f"cannot parse interval {arg!r}") from None
    raise UsageError(f"unknown function {text!r}")


def cmd_expand(cfg: RunConfig) -> int:
    F = _parse_F(cfg.params["F"])
    e = ex.l2_expand(F, cfg.params["Q"])
    rows = [[str(b), c.numerator, c.denominator] for b, c in e.coefficients.items() if c]
    if cfg.format == "json":
        payload = {
            "Q": e.Q,
            "coefficients": {str(b): str(c) for b, c in e.coefficients.items() if c},
            "l2_deficit": str(e.l2_deficit),
            "l1_deficit": str(e.l1_deficit),
        }
        _emit(cfg, json.dumps(payload, indent=1) + "\n")
    else:
        _emit(cfg, _csv(["beta", "c_num", "c_den"], rows))
    print(f"l2_deficit={e.l2_deficit} l1_deficit={e.l1_deficit}", file=sys.stderr)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    p = cfg.params
    which = p["check"]
    if which == "theorem1":
        rep = vf.check_theorem1(_alpha(p["alpha"]), p["n"])
    elif which == "lr":
        rep = vf.check_lr(_alpha(p["alpha"]), p["Q"])
    elif which == "orthonormal":
        rep = vf.check_orthonormal(p["hmax"])
    elif which == "kernel":
        rep = vf.check_kernel(p["triples"], p["q_max"], p["seed"])
    elif which == "mobius":
        rep = vf.check_mobius_range(2, p["q_max"])
    elif which == "xq-mean":
        return _verify_xq(cfg)
    elif which == "martingale":
        try:
            rep = vf.check_martingale(p["order"], p["n"], p["exhaustive"])
        except NotAdmissibleError as exc:
            print(f"FAIL martingale(order={p['order']}): not admissible at index {exc.index}: {exc}")
            print(f"counterexample: index {exc.index}", file=sys.stderr)
            return 1
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from None
    elif which == "stopping":
        rep = vf.check_stopping(p["instances"], p["q_max"], p["seed"])
    elif which == "example4":
        rep = vf.check_example_section4(_point(p["delta"]), p["M"], p["N"], p["Q"][0])
    else:
        raise UsageError(f"unknown check {which!r}")
    return _report(cfg, rep)


def _verify_xq(cfg: RunConfig) -> int:
    p = cfg.params
    rows, sup = vf.xq_error_sweep(p["q_min"], p["q_max"])
    if cfg.out:
        out = []
        for q, scaled in rows:
            exact = vf.xq_integral(q)
            out.append([q, exact.numerator, exact.denominator, "" if scaled is None else f"{float(scaled):.12e}"])
        _emit(cfg, _table(cfg, ["q", "exact_num", "exact_den", "error_scaled"], out))
    passed = sup < vf.XQ_ERROR_GATE
    status = "PASS" if passed else "FAIL"
    print(f"{status} xq-mean(q={p['q_min']}..{p['q_max']}) sup_error_scaled={float(sup):.6f} gate={vf.XQ_ERROR_GATE}")
    if not passed:
        worst = max((r for r in rows if r[1] is not None), key=lambda r: r[1])
        print(f"counterexample: q={worst[0]}", file=sys.stderr)
        return 1
    return 0


def cmd_scan(cfg: RunConfig) -> int:
    p = cfg.params
    alphas = [_alpha(a) for a in (p["alpha"] or ex.DEFAULT_ALPHAS)]
    if p["scan"] == "trichotomy":
        try:
            family = parse_family(p["family"])
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        try:
            records = ex.trichotomy_scan(family, alphas, p["q_max"], cfg.workers)
        except PreconditionError as exc:
            print(f"precondition failed: {exc}", file=sys.stderr)
            return 1
        text = ex.trajectories_json(records) if cfg.format == "json" else ex.trajectories_csv(records)
        _emit(cfg, text)
        for r in records:
            print(f"{r.alpha_id} {r.alpha}: {r.classification}", file=sys.stderr)
        if not all(r.convergent_sums_ok for r in records):
            print("counterexample: convergent-form sum disagrees with T_Q", file=sys.stderr)
            return 1
        return 0
    try:
        scan = ex.conjecture_scan(p["qset"], alphas, p["q_max"])
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    _emit(cfg, ex.series_json(scan) if cfg.format == "json" else ex.series_csv(scan))
    return 0


COMMANDS = {
    "farey": cmd_farey,
    "cf": cmd_cf,
    "basis": cmd_basis,
    "expand": cmd_expand,
    "verify": cmd_verify,
    "scan": cmd_scan,
}


def run(cfg: RunConfig) -> int:
    try:
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"fareymart: error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, CFLengthError, PreconditionError) as exc:
        print(f"fareymart: error: {exc}", file=sys.stderr)
        return 2


# -- argument parsing -------------------------------------------------------------------------


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the artifact to this path")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument(
        "--workers", type=int, default=_default_workers(), help=f"worker threads (default ${WORKERS_ENV} or 1)"
    )

    parser = argparse.ArgumentParser(prog="fareymart", description="Farey-fraction orthonormal system toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("farey", parents=[common], help="list F_Q with neighbors")
    p.add_argument("--Q", "-Q", type=int, required=True)

    p = sub.add_parser("cf", parents=[common], help="partial quotients, convergents and E_n")
    p.add_argument("--alpha", required=True)
    p.add_argument("--n", type=int, default=10)

    p = sub.add_parser("basis", parents=[common], help="f_beta or chi_beta as a step function")
    p.add_argument("--beta", required=True)
    p.add_argument("--kind", choices=["f", "chi"], default="f")

    p = sub.add_parser("expand", parents=[common], help="exact L^2 expansion up to height Q")
    p.add_argument("--F", default="psi", help="psi, one, f:a/q, chi:a/q, indicator:lo,hi")
    p.add_argument("--Q", "-Q", type=int, default=20)

    p = sub.add_parser("verify", parents=[common], help="run an exact checker")
    p.add_argument(
        "check",
        choices=["theorem1", "lr", "xq-mean", "mobius", "orthonormal", "kernel", "martingale", "stopping", "example4"],
    )
    p.add_argument("--alpha", default="sqrt(2)-1")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--Q", "-Q", type=int, nargs="+", default=[10, 100, 1000, 10000])
    p.add_argument("--hmax", type=int, default=40)
    p.add_argument("--q-min", type=int, default=100)
    p.add_argument("--q-max", type=int, default=None)
    p.add_argument("--csv", help="shorthand for --out PATH --format csv")
    p.add_argument("--order", default="height", help="height, stern-brocot or file:<path>")
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--delta", default="1/2")
    p.add_argument("--M", type=int, default=3)
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--triples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("scan", parents=[common], help="finite-Q experiments")
    p.add_argument("scan", choices=["trichotomy", "conjecture"])
    p.add_argument("--alpha", action="append", help="repeatable; defaults to the shipped list")
    p.add_argument("--family", default=ex.DEFAULT_FAMILY)
    p.add_argument("--qset", default="all")
    p.add_argument("--q-max", type=int, default=None)
    return parser


_Q_MAX_DEFAULTS = {
    "xq-mean": 10**4,
    "mobius": 10**4,
    "kernel": 50,
    "stopping": 25,
    "trichotomy": ex.DEFAULT_QMAX,
    "conjecture": 10**4,
}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(ns).items() if k not in ("command", "out", "format", "workers", "csv")}
    out, fmt = ns.out, ns.format
    if getattr(ns, "csv", None):
        out, fmt = ns.csv, "csv"
    if "q_max" in params and params["q_max"] is None:
        key = params.get("check") or params.get("scan")
        params["q_max"] = _Q_MAX_DEFAULTS.get(key)
    return RunConfig(ns.command, params, out, fmt, max(1, ns.workers))


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
