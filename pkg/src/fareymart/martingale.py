"""Admissible enumerations of Q/Z, Farey partitions, conditional expectations,
martingale-difference checks, partial sums and stopped sums."""

from __future__ import annotations

import random
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from itertools import count, islice
from pathlib import Path
from typing import Callable, Iterable, Optional

from .errors import DomainError, NotAdmissibleError, PreconditionError
from .farey import (
    ZERO,
    ComponentInterval,
    FareyPoint,
    as_fraction,
    children,
    farey_by_height,
    farey_points_of_height,
    farey_sequence,
    neighbors,
)
from .stepfn import StepFunction, f_beta, inner_product, linear_combination

# -- enumerations -------------------------------------------------------------


def by_height():
    """0/1, 1/2, 1/3, 2/3, 1/4, 3/4, ...: height first, then representative."""
    for q in count(1):
        yield from farey_points_of_height(q)


def by_stern_brocot():
    """Points ordered by s(beta), ties by representative (rows of the tree)."""
    yield ZERO
    row = [(0, 1, 1, 1)]  # (a, b, c, d): gap between a/b and c/d
    while True:
        nxt = []
        for a, b, c, d in row:
            m, n = a + c, b + d
            yield FareyPoint(m, n)
            nxt.append((a, b, m, n))
            nxt.append((m, n, c, d))
        row = nxt


@dataclass
class Enumeration:
    kind: str
    prefix: Optional[list] = None

    def __iter__(self):
        if self.kind == "height":
            return by_height()
        if self.kind == "stern-brocot":
            return by_stern_brocot()
        return iter(self.prefix)

    def take(self, n: int) -> list[FareyPoint]:
        out = list(islice(iter(self), n))
        if len(out) < n and self.kind == "custom":
            raise PreconditionError(f"custom enumeration has only {len(out)} entries")
        return out

    @classmethod
    def custom(cls, points: Iterable) -> "Enumeration":
        pts = [p if isinstance(p, FareyPoint) else FareyPoint.parse(str(p)) for p in points]
        return cls("custom", pts)

    @classmethod
    def parse(cls, name: str) -> "Enumeration":
        if name in ("height", "farey"):
            return cls("height")
        if name in ("stern-brocot", "sternbrocot"):
            return cls("stern-brocot")
        if name.startswith("file:"):
            lines = Path(name[5:]).read_text().split()
            return cls.custom(lines)
        raise ValueError(f"unknown enumeration {name!r}")


@dataclass
class Admissibility:
    ok: bool
    index: Optional[int] = None
    point: Optional[FareyPoint] = None
    missing: Optional[FareyPoint] = None

    def __bool__(self):
        return self.ok


def is_admissible(prefix: list[FareyPoint]) -> Admissibility:
    """Check conditions (i)-(iii) on a finite prefix; indices are 1-based."""
    if len(set(prefix)) != len(prefix):
        raise PreconditionError("enumeration prefix has repeated entries")
    if not prefix:
        return Admissibility(True)
    if not prefix[0].is_zero():
        return Admissibility(False, 1, prefix[0], None)
    seen = {prefix[0]}
    for m, beta in enumerate(prefix[1:], start=2):
        for parent in neighbors(beta):
            if parent not in seen:
                return Admissibility(False, m, beta, parent)
        seen.add(beta)
    return Admissibility(True)


# -- partitions -----------------------------------------------------------------


class FareyPartition:
    """Finite sigma-algebra generated by the arcs between marked points."""

    def __init__(self, points: Iterable):
        self.points = sorted({as_fraction(p) for p in points})

    @classmethod
    def farey(cls, Q: int) -> "FareyPartition":
        """M_Q; Q = 0 gives the trivial sigma-algebra."""
        if Q == 0:
            return cls([])
        return cls(b.value for b in farey_sequence(Q))

    def components(self) -> list[tuple[Fraction, Fraction]]:
        pts = self.points
        if not pts:
            return [(Fraction(0), Fraction(1))]
        return [(pts[i], pts[i + 1] if i + 1 < len(pts) else pts[0] + 1) for i in range(len(pts))]

    def component_containing(self, x) -> tuple[Fraction, Fraction]:
        x = as_fraction(x)
        pts = self.points
        if not pts:
            return Fraction(0), Fraction(1)
        i = bisect_left(pts, x)
        if i < len(pts) and pts[i] == x:
            raise DomainError(f"{x} is a marked point")
        lo = pts[i - 1]
        hi = pts[i] if i < len(pts) else pts[0] + 1
        if i == 0:
            return lo, pts[0] + 1
        return lo, hi

    def add(self, x) -> None:
        x = as_fraction(x)
        i = bisect_left(self.points, x)
        if i == len(self.points) or self.points[i] != x:
            self.points.insert(i, x)

    def is_measurable(self, g: StepFunction) -> bool:
        marked = set(self.points)
        return all(p in marked for p in g.points)

    def measure_total(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.components()), Fraction(0))


def conditional_expectation(g, partition: FareyPartition) -> StepFunction:
    """Average of g over each component of the partition."""
    if not partition.points:
        return StepFunction.constant(_integral(g))
    if isinstance(g, StepFunction):
        return StepFunction(partition.points, _component_means(g, partition.points))
    arcs = []
    for lo, hi in partition.components():
        arcs.append((lo, hi, _integrate(g, lo, hi) / (hi - lo)))
    return StepFunction(partition.points, [v for _, _, v in arcs])


def _component_means(g: StepFunction, cuts: list) -> list:
    # one sweep over the merged breakpoints; sums stay local to a component
    if not g.points:
        return [g.values[0]] * len(cuts)
    marks = sorted(set(cuts) | set(g.points))
    n = len(marks)
    means = []
    start = marks.index(cuts[0])
    for k in range(len(cuts)):
        lo = cuts[k]
        hi = cuts[k + 1] if k + 1 < len(cuts) else cuts[0] + 1
        acc = Fraction(0)
        i = start
        while True:
            a = marks[i % n] + (i // n)
            b = marks[(i + 1) % n] + ((i + 1) // n)
            acc += g.arc_value(marks[i % n]) * (b - a)
            i += 1
            if b >= hi:
                break
        start = i
        means.append(acc / (hi - lo))
    return means


def _integral(g) -> Fraction:
    return g.integral()


def _integrate(g, lo, hi) -> Fraction:
    if isinstance(g, StepFunction):
        return g.integrate(lo, hi)
    # piecewise linear: integrate the restriction via an indicator product
    ind = StepFunction.from_arcs([(lo, hi, 1)])
    return inner_product(g, ind)


# -- martingale differences -------------------------------------------------


@dataclass
class MartingaleReport:
    enumeration: str
    n_max: int
    passed: bool
    checked: int
    failure: Optional[str] = None
    failure_index: Optional[int] = None


def verify_martingale_differences(e: Enumeration, n_max: int, exhaustive: bool = False) -> MartingaleReport:
    """Check that f_{beta_{n+1}} is B_{n+1}-measurable and integrates to 0 on
    every component of B_n, for n < n_max.

    By default only the component containing beta_{n+1} is integrated; the
    others are covered by checking that it contains the whole support.  With
    ``exhaustive=True`` every component integral is computed.
    """
    prefix = e.take(n_max)
    adm = is_admissible(prefix)
    if not adm:
        raise NotAdmissibleError(adm.index, adm.point, adm.missing)
    part = FareyPartition([prefix[0]])
    name = e.kind
    for n in range(1, n_max):
        beta = prefix[n]
        f = f_beta(beta)
        part_next = set(part.points) | {beta.value}
        if not all(p in part_next for p in f.points):
            return MartingaleReport(name, n_max, False, n, f"f_{beta} is not B_{n + 1}-measurable", n + 1)
        lo, hi = part.component_containing(beta)
        J = ComponentInterval(FareyPoint.of(lo), FareyPoint.of(hi))
        left, right = neighbors(beta)
        support = ComponentInterval(left, right)
        if not J.contains_interval(support):
            return MartingaleReport(name, n_max, False, n, f"support of f_{beta} leaves its component", n + 1)
        if f.integrate(lo, hi) != 0:
            return MartingaleReport(name, n_max, False, n, f"integral of f_{beta} over {J} is nonzero", n + 1)
        if exhaustive:
            for clo, chi in part.components():
                if f.integrate(clo, chi) != 0:
                    return MartingaleReport(
                        name, n_max, False, n, f"integral of f_{beta} over ({clo}, {chi}) is nonzero", n + 1
                    )
        part.add(beta)
    return MartingaleReport(name, n_max, True, n_max - 1)


def first_nonmeasurable(prefix: list[FareyPoint]) -> Optional[int]:
    """1-based index of the first f_{beta_n} that is not constant on every
    component of B_n, or None."""
    part = FareyPartition([])
    for n, beta in enumerate(prefix, start=1):
        part.add(beta)
        if not part.is_measurable(f_beta(beta)):
            return n
    return None


# -- coefficient families -----------------------------------------------------


@dataclass(frozen=True)
class CoefficientFamily:
    """A pure rule beta -> c(beta).

    ``hbound`` is a declared bound for |c(beta)| h(beta), or None when the
    family is not known to satisfy one.
    """

    name: str
    rule: Callable[[FareyPoint], Fraction]
    hbound: Optional[Fraction] = None

    def __call__(self, beta: FareyPoint) -> Fraction:
        return Fraction(self.rule(beta))


def zero_family() -> CoefficientFamily:
    return CoefficientFamily("zero", lambda b: Fraction(0), Fraction(0))


def one_family() -> CoefficientFamily:
    return CoefficientFamily("one", lambda b: Fraction(1), None)


def delta_family(target: FareyPoint) -> CoefficientFamily:
    return CoefficientFamily(
        f"delta({target})", lambda b: Fraction(1 if b == target else 0), Fraction(target.den)
    )


def psi_coefficient(beta: FareyPoint) -> Fraction:
    """<psi, f_beta> = -1/(2 h(beta) h(beta') h(beta'')), and 0 at beta = 0."""
    if beta.is_zero():
        return Fraction(0)
    left, right = neighbors(beta)
    return Fraction(-1, 2 * beta.den * left.den * right.den)


def psi_family() -> CoefficientFamily:
    return CoefficientFamily("psi", psi_coefficient, Fraction(1, 2))


def inner_product_family(F, name: str = "F") -> CoefficientFamily:
    return CoefficientFamily(name, lambda b: inner_product(F, f_beta(b)), None)


def random_sign_family(seed: int) -> CoefficientFamily:
    """c(beta) = eps(beta)/h(beta), eps = +-1 from a PRNG keyed by (seed, beta)."""

    def rule(b: FareyPoint) -> Fraction:
        eps = 1 if random.Random(f"{seed}:{b.num}/{b.den}").random() < 0.5 else -1
        return Fraction(eps, b.den)

    return CoefficientFamily(f"sign/h(seed={seed})", rule, Fraction(1))


def parity_family() -> CoefficientFamily:
    """c(beta) = (-1)^{h(beta)} / h(beta)."""
    return CoefficientFamily("parity/h", lambda b: Fraction((-1) ** b.den, b.den), Fraction(1))


def children_family(delta: FareyPoint) -> CoefficientFamily:
    """Indicator of {beta: beta' = delta} together with {gamma: gamma'' = delta}."""
    if delta.is_zero():
        raise DomainError("children family needs a nonzero point")

    def rule(b: FareyPoint) -> Fraction:
        if b.is_zero():
            return Fraction(0)
        left, right = neighbors(b)
        return Fraction(1 if (left == delta or right == delta) else 0)

    return CoefficientFamily(f"children({delta})", rule, None)


def random_family(seed: int, bound: int = 3) -> CoefficientFamily:
    """Integer-valued c(beta) in [-bound, bound] keyed by (seed, beta)."""

    def rule(b: FareyPoint) -> Fraction:
        return Fraction(random.Random(f"{seed}|{b.num}/{b.den}").randint(-bound, bound))

    return CoefficientFamily(f"randint(seed={seed})", rule, None)


FAMILIES = {
    "zero": lambda arg: zero_family(),
    "one": lambda arg: one_family(),
    "psi": lambda arg: psi_family(),
    "parity": lambda arg: parity_family(),
    "sign": lambda arg: random_sign_family(int(arg or 0)),
    "delta": lambda arg: delta_family(FareyPoint.parse(arg)),
    "children": lambda arg: children_family(FareyPoint.parse(arg)),
}


def parse_family(text: str) -> CoefficientFamily:
    """``psi``, ``sign:7``, ``delta:1/3``, ``children:2/5``, ``parity``, ..."""
    name, _, arg = text.partition(":")
    if name not in FAMILIES:
        raise ValueError(f"unknown coefficient family {text!r}")
    return FAMILIES[name](arg)


# -- partial sums -----------------------------------------------------------


def U_function(c: CoefficientFamily, q: int) -> StepFunction:
    """U_q = sum over h(beta) = q of c(beta) f_beta."""
    return linear_combination((c(b), f_beta(b)) for b in farey_points_of_height(q))


def T_function(c: CoefficientFamily, Q: int) -> StepFunction:
    """T_Q = sum over h(beta) <= Q of c(beta) f_beta."""
    return linear_combination((c(b), f_beta(b)) for b in farey_by_height(Q))


def S_function(c: CoefficientFamily, e: Enumeration, N: int) -> StepFunction:
    return linear_combination((c(b), f_beta(b)) for b in e.take(N))


def _stream_increments(c: CoefficientFamily, alpha, Q: int):
    """(q, U_q(alpha)) for the ladder denominators q <= Q; U_q vanishes elsewhere."""
    yield 1, c(ZERO)
    for n, m, num, den in alpha.ladder(Q):
        if den == 1:
            continue
        q1 = alpha.convergent(n - 1)[1]
        sign = 1 if n % 2 else -1
        yield den, sign * q1 * c(FareyPoint.of(num, den))


def _is_stream(x) -> bool:
    return hasattr(x, "locate")


def partial_sum_T(c: CoefficientFamily, Q: int, x) -> Fraction:
    """T_Q(x) exactly.  Streams use the convergent decomposition; rational
    points outside F_Q are evaluated term by term."""
    if _is_stream(x) and x.irrational:
        return sum((u for _, u in _stream_increments(c, x, Q)), Fraction(0))
    if _is_stream(x):
        x = x.point
    v = as_fraction(x)
    if v.denominator <= Q:
        raise DomainError(f"{v} lies in F_{Q}")
    total = Fraction(0)
    for b in farey_by_height(Q):
        fx = f_beta(b)(v)
        if fx:
            total += c(b) * fx
    return total


def convergent_form_sum(c: CoefficientFamily, alpha, N: int) -> Fraction:
    """sum_{n=1}^{N} (-1)^{n-1} q_{n-1} sum_{beta in E_n} c(beta)."""
    total = Fraction(0)
    for n in range(1, N + 1):
        q1 = alpha.convergent(n - 1)[1]
        sign = 1 if n % 2 else -1
        total += sign * q1 * sum((c(b) for b in alpha.intermediate_set(n)), Fraction(0))
    return total


def U_values(c: CoefficientFamily, Q: int, x) -> list[Fraction]:
    """[U_1(x), ..., U_Q(x)]."""
    out = [Fraction(0)] * (Q + 1)
    if _is_stream(x) and x.irrational:
        for q, u in _stream_increments(c, x, Q):
            out[q] += u
        return out[1:]
    if _is_stream(x):
        x = x.point
    v = as_fraction(x)
    if v.denominator <= Q:
        raise DomainError(f"{v} lies in F_{Q}")
    for q in range(1, Q + 1):
        out[q] = sum((c(b) * f_beta(b)(v) for b in farey_points_of_height(q)), Fraction(0))
    return out[1:]


def stopping_time(c: CoefficientFamily, Q: int, x, stop: tuple[str, Fraction]):
    """First q <= Q at which the stopping rule fires, or None."""
    kind, L = stop
    L = Fraction(L)
    t = sq = Fraction(0)
    for q, u in enumerate(U_values(c, Q, x), start=1):
        t += u
        sq += u * u
        if kind == "abs_bound" and abs(t) >= L:
            return q
        if kind == "square_sum_bound" and sq >= L:
            return q
    return None


def stopped_sum(c: CoefficientFamily, Q: int, x, stop: tuple[str, Fraction]) -> Fraction:
    """T_Q stopped at eta_L (``("abs_bound", L)``) or tau_L (``("square_sum_bound", L)``)."""
    if stop[0] not in ("abs_bound", "square_sum_bound"):
        raise ValueError(f"unknown stopping rule {stop[0]!r}")
    us = U_values(c, Q, x)
    tau = stopping_time(c, Q, x, stop)
    upto = Q if tau is None else tau
    return sum(us[:upto], Fraction(0))


# -- stopping identity -----------------------------------------------------------


def stopping_identity_check(c: CoefficientFamily, Q: int, sets: list[StepFunction]) -> bool:
    """Verify int (sum chi_{A_q} U_q)^2 = int sum chi_{A_q} U_q^2 exactly.

    ``sets[q-1]`` is the 0/1 indicator of A_q, which must be M_{q-1}-measurable.
    """
    lhs, rhs = stopping_identity_sides(c, Q, sets)
    return lhs == rhs


def stopping_identity_sides(c: CoefficientFamily, Q: int, sets: list[StepFunction]):
    if len(sets) != Q:
        raise ValueError("need one set per q = 1..Q")
    total = StepFunction.constant(0)
    squares = StepFunction.constant(0)
    for q, A in enumerate(sets, start=1):
        if any(v not in (0, 1) for v in A.values):
            raise PreconditionError(f"A_{q} is not an indicator")
        if not FareyPartition.farey(q - 1).is_measurable(A):
            raise PreconditionError(f"A_{q} is not M_{q - 1}-measurable")
        U = U_function(c, q)
        term = A * U
        total = total + term
        squares = squares + term * U
    return inner_product(total, total), squares.integral()


def eta_sets(c: CoefficientFamily, L, Q: int) -> list[StepFunction]:
    """Indicators of A(L, q) = {x: |T_r(x)| < L for r < q}, q = 1..Q."""
    L = Fraction(L)
    sets = [StepFunction.constant(1)]
    T = StepFunction.constant(0)
    for q in range(1, Q):
        T = T + U_function(c, q)
        below = T.map(lambda v: Fraction(1 if abs(v) < L else 0))
        sets.append(sets[-1] * below)
    return sets


def tau_sets(c: CoefficientFamily, L, Q: int) -> list[StepFunction]:
    """Indicators of B(L, q) = {x: sum_{r<q} U_r(x)^2 < L}, q = 1..Q."""
    L = Fraction(L)
    sets = [StepFunction.constant(1)]
    S = StepFunction.constant(0)
    for q in range(1, Q):
        U = U_function(c, q)
        S = S + U * U
        sets.append(S.map(lambda v: Fraction(1 if v < L else 0)))
    return sets


def u_sup_bounds(c: CoefficientFamily, q: int) -> tuple[Fraction, Fraction, Fraction]:
    """(q max|c|/2, sup|U_q|, q max|c|) over points of height q."""
    cmax = max(abs(c(b)) for b in farey_points_of_height(q))
    return q * cmax / 2, U_function(c, q).sup_abs(), q * cmax


def children_partial_sums(delta: FareyPoint, Q: int) -> StepFunction:
    betas, gammas = children(delta, Q)
    return linear_combination((1, f_beta(b)) for b in betas + gammas)
