"""Finite-Q experiments: L^2 expansions, trajectory classification at
continued fraction streams, and denominator scans.

Nothing here decides an almost-everywhere statement.  Classifications are
threshold rules applied to exact finite trajectories and are reported as
such.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

import mpmath

from .arith import euler_phi, is_power_of_two, is_prime, is_square
from .contfrac import CFStream, denominator_count, parse_alpha
from .errors import PreconditionError
from .farey import farey_by_height
from .martingale import (
    CoefficientFamily,
    _stream_increments,
    convergent_form_sum,
    parse_family,
)
from .stepfn import PiecewiseLinear, StepFunction, f_beta, inner_product, linear_combination

CONVERGE_TOL = Fraction(1, 2**20)
CONVERGE_WINDOW = 5
OSCILLATION_LEVEL = 10
# square-sum threshold standing in for "finite square sum": L^2 with L = 10
SQUARE_SUM_THRESHOLD = 100


# -- L^2 expansion -----------------------------------------------------------------


@dataclass
class Expansion:
    Q: int
    coefficients: dict
    reconstruction: StepFunction
    l2_deficit: Fraction
    l1_deficit: Fraction


def l2_expand(F, Q: int) -> Expansion:
    """c(beta) = <F, f_beta> for h(beta) <= Q, T_Q = sum c f_beta and the exact
    deficits ||F||^2 - sum c^2 and ||F - T_Q||_1."""
    coeffs = {b: inner_product(F, f_beta(b)) for b in farey_by_height(Q)}
    T = linear_combination((c, f_beta(b)) for b, c in coeffs.items())
    norm = F.norm_squared() if isinstance(F, PiecewiseLinear) else inner_product(F, F)
    l2 = norm - sum((c * c for c in coeffs.values()), Fraction(0))
    if isinstance(F, PiecewiseLinear):
        l1 = (F - PiecewiseLinear.from_step(T)).abs_integral()
    else:
        l1 = abs(F - T).integral()
    return Expansion(Q, coeffs, T, l2, l1)


# -- trajectories ----------------------------------------------------------------------


@dataclass
class TrajectoryRecord:
    alpha_id: int
    alpha: str
    grid: list
    values: list
    sqsums: list
    classification: str
    convergent_sums: list = field(default_factory=list)

    @property
    def convergent_sums_ok(self) -> bool:
        return all(ok for _, _, ok in self.convergent_sums)


def q_grid(alpha: CFStream, Qmax: int) -> list[int]:
    """Powers of 2 from 2 to Qmax together with every q_N(alpha) <= Qmax."""
    grid = set()
    q = 2
    while q <= Qmax:
        grid.add(q)
        q *= 2
    n = 0
    while alpha.has(n + 1) or n == 0:
        qn = alpha.convergent(n)[1]
        if qn > Qmax:
            break
        grid.add(qn)
        if not alpha.has(n + 1):
            break
        n += 1
    return sorted(grid)


def classify(values, level=OSCILLATION_LEVEL, tol=CONVERGE_TOL, window=CONVERGE_WINDOW) -> str:
    """``converging`` if the last ``window`` values pairwise differ by less
    than ``tol``; ``oscillating`` if the path reached both +level and -level;
    ``undecided`` otherwise."""
    tail = values[-window:]
    if len(tail) == window and max(tail) - min(tail) < tol:
        return "converging"
    if max(values, default=0) >= level and min(values, default=0) <= -level:
        return "oscillating"
    return "undecided"


def check_coefficient_bound(c: CoefficientFamily, hmax: int = 40) -> None:
    """Require a declared bound for |c(beta)| h(beta) and test it on F_hmax."""
    if c.hbound is None:
        raise PreconditionError(f"family {c.name} declares no bound for |c(beta)| h(beta)")
    for b in farey_by_height(hmax):
        if abs(c(b)) * b.den > c.hbound:
            raise PreconditionError(f"family {c.name}: |c({b})| h = {abs(c(b)) * b.den} > {c.hbound}")


def trajectory(c: CoefficientFamily, alpha: CFStream, Qmax: int, alpha_id: int = 0) -> TrajectoryRecord:
    grid = q_grid(alpha, Qmax)
    t = sq = Fraction(0)
    values, sqsums = [], []
    incs = iter(_stream_increments(c, alpha, Qmax))
    pending = next(incs, None)
    for Q in grid:
        while pending is not None and pending[0] <= Q:
            u = pending[1]
            t += u
            sq += u * u
            pending = next(incs, None)
        values.append(t)
        sqsums.append(sq)
    # T at Q = q_N against the sum over E_1, ..., E_N
    convergent_sums = []
    N = 1
    while alpha.has(N) and alpha.convergent(N)[1] <= Qmax:
        qN = alpha.convergent(N)[1]
        if qN in grid:
            lhs = values[grid.index(qN)]
            convergent_sums.append((N, qN, lhs == convergent_form_sum(c, alpha, N)))
        N += 1
    return TrajectoryRecord(alpha_id, alpha.key, grid, values, sqsums, classify(values), convergent_sums)


def trichotomy_scan(c: CoefficientFamily, alphas, Qmax: int, workers: int = 1) -> list[TrajectoryRecord]:
    check_coefficient_bound(c)
    alphas = list(alphas)
    jobs = [(c, a, Qmax, i) for i, a in enumerate(alphas)]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda j: trajectory(*j), jobs))
    return [trajectory(*j) for j in jobs]


def consistency_violations(records, threshold=SQUARE_SUM_THRESHOLD) -> list:
    """Records breaking the finite surrogate of "converges iff square sum is
    finite": a small square sum must not oscillate, and a converging path
    must have a small square sum."""
    bad = []
    for r in records:
        small = r.sqsums[-1] < threshold
        if small and r.classification == "oscillating":
            bad.append(r)
        elif not small and r.classification == "converging":
            bad.append(r)
    return bad


def stabilization(c: CoefficientFamily, alpha: CFStream, Qmax: int) -> Fraction:
    """|T_Qmax(alpha) - T_{Qmax/2}(alpha)|."""
    from .martingale import partial_sum_T

    return abs(partial_sum_T(c, Qmax, alpha) - partial_sum_T(c, Qmax // 2, alpha))


def kernel_diagnostic(F, xs, Qs=(10, 100, 1000)) -> list[list[Fraction]]:
    """|int K_Q(x, y) F(y) dy - F(x)| for each x and each Q in ``Qs``."""
    from .stepfn import kernel_section

    out = []
    for x in xs:
        fx = F(x)
        out.append([abs(inner_product(F, kernel_section(x, Q)) - fx) for Q in Qs])
    return out


def monotone_fraction(rows) -> Fraction:
    """Share of rows that are non-increasing."""
    good = sum(1 for r in rows if all(a >= b for a, b in zip(r, r[1:])))
    return Fraction(good, len(rows)) if rows else Fraction(1)


# -- denominator scans ------------------------------------------------------------


def qset_predicate(name: str) -> Callable[[int], bool]:
    """all, primes, squares, powers_of_2, or file:<path> with one integer per line."""
    if name == "all":
        return lambda q: True
    if name == "primes":
        return is_prime
    if name == "squares":
        return is_square
    if name == "powers_of_2":
        return is_power_of_two
    if name.startswith("file:"):
        text = Path(name[5:]).read_text()
        members = {int(tok) for tok in text.split()}
        return members.__contains__
    raise ValueError(f"unknown Q-set {name!r}")


@dataclass
class SeriesScan:
    qset: str
    alphas: list
    Qmax: int
    rows: list  # (q, in_set, series_partial, [count per alpha])

    def final_counts(self) -> list[int]:
        return self.rows[-1][3] if self.rows else [0] * len(self.alphas)


def conjecture_scan(qset: str, alphas, Qmax: int, dps: int = 30) -> SeriesScan:
    """Partial sums of phi(q) log q / q^2 over the set, next to the running
    count of ladder denominators of each alpha that lie in the set."""
    pred = qset_predicate(qset)
    alphas = list(alphas)
    ladders = [set(d for *_, d in a.ladder(Qmax)) for a in alphas]
    counts = [0] * len(alphas)
    rows = []
    with mpmath.workdps(dps):
        s = mpmath.mpf(0)
        for q in range(1, Qmax + 1):
            inside = bool(pred(q))
            if inside:
                s += euler_phi(q) * mpmath.log(q) / q**2
                for i, lad in enumerate(ladders):
                    if q in lad:
                        counts[i] += 1
            rows.append((q, inside, mpmath.nstr(s, 20), list(counts)))
    for i, a in enumerate(alphas):
        if counts[i] != denominator_count(a, pred, Qmax):
            raise RuntimeError(f"count mismatch for {a.key}")
    return SeriesScan(qset, [a.key for a in alphas], Qmax, rows)


# -- output ------------------------------------------------------------------------------


TRAJECTORY_COLUMNS = ["alpha_id", "Q", "T_Q_num", "T_Q_den", "sqsum_num", "sqsum_den", "class"]


def trajectories_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRAJECTORY_COLUMNS)
    for r in records:
        for Q, t, s in zip(r.grid, r.values, r.sqsums):
            w.writerow([r.alpha_id, Q, t.numerator, t.denominator, s.numerator, s.denominator, r.classification])
    return buf.getvalue()


def trajectories_json(records) -> str:
    out = []
    for r in records:
        out.append(
            {
                "alpha_id": r.alpha_id,
                "alpha": r.alpha,
                "class": r.classification,
                "grid": r.grid,
                "T_Q": [str(v) for v in r.values],
                "sqsum": [str(v) for v in r.sqsums],
                "convergent_sums": [[n, q, ok] for n, q, ok in r.convergent_sums],
            }
        )
    return json.dumps(out, indent=1) + "\n"


def series_csv(scan: SeriesScan) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["q", "in_set", "series_partial"] + [f"count_alpha_{i}" for i in range(len(scan.alphas))])
    for q, inside, s, counts in scan.rows:
        w.writerow([q, int(inside), s] + counts)
    return buf.getvalue()


def series_json(scan: SeriesScan) -> str:
    return json.dumps(
        {
            "qset": scan.qset,
            "alphas": scan.alphas,
            "Qmax": scan.Qmax,
            "rows": [[q, int(i), s, c] for q, i, s, c in scan.rows],
        },
        indent=1,
    ) + "\n"


# -- shipped defaults --------------------------------------------------------------------

DEFAULT_ALPHAS = [
    "sqrt(2)-1",
    "(sqrt(5)-1)/2",
    "sqrt(3)-1",
    "rand(seed=1,bound=9)",
    "rand(seed=2,bound=9)",
    "rand(seed=3,bound=9)",
    "rand(seed=4,bound=9)",
    "rand(seed=5,bound=9)",
]
DEFAULT_FAMILY = "sign:1"
DEFAULT_QMAX = 2**24


def default_streams(texts: Optional[list] = None) -> list[CFStream]:
    return [parse_alpha(t) for t in (texts or DEFAULT_ALPHAS)]


def default_trichotomy(family: str = DEFAULT_FAMILY, Qmax: int = DEFAULT_QMAX) -> list[TrajectoryRecord]:
    return trichotomy_scan(parse_family(family), default_streams(), Qmax)
