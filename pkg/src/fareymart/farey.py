"""Exact points of Q/Z, Farey neighbors, Farey sets and component intervals.

Points are stored by their canonical coset representative ``num/den`` in
[0, 1).  Arcs of the circle are handled in *lifted* coordinates: an arc is a
pair ``lo < hi`` with ``hi - lo <= 1`` where ``hi`` may exceed 1 when the arc
wraps past 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import DomainError


@dataclass(frozen=True)
class FareyPoint:
    num: int
    den: int

    def __post_init__(self):
        if self.den < 1 or not 0 <= self.num < self.den or gcd(self.num, self.den) != 1:
            raise ValueError(f"{self.num}/{self.den} is not a reduced point of Q/Z")

    @classmethod
    def of(cls, a, q: int = 1) -> "FareyPoint":
        """Reduce ``a/q`` (or a Fraction / int) modulo 1."""
        x = Fraction(a, q) if q != 1 or not isinstance(a, Fraction) else a
        x = x - math.floor(x)
        return cls(x.numerator, x.denominator)

    @classmethod
    def parse(cls, text: str) -> "FareyPoint":
        text = text.strip()
        if "/" in text:
            a, q = text.split("/")
            return cls.of(int(a), int(q))
        return cls.of(int(text))

    @property
    def height(self) -> int:
        return self.den

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, self.den)

    def is_zero(self) -> bool:
        return self.num == 0

    def __lt__(self, other: "FareyPoint") -> bool:
        return self.num * other.den < other.num * self.den

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"

    __repr__ = __str__


ZERO = FareyPoint(0, 1)


def as_fraction(x) -> Fraction:
    """Coset representative in [0, 1) of a FareyPoint, Fraction or int."""
    if isinstance(x, FareyPoint):
        return x.value
    x = Fraction(x)
    return x - math.floor(x)


def height(x) -> int:
    return as_fraction(x).denominator


def lift(x) -> Fraction:
    """Representative of a right-hand endpoint in (0, 1]: 0 maps to 1."""
    v = as_fraction(x)
    return v if v else Fraction(1)


@dataclass(frozen=True)
class ComponentInterval:
    """The open arc of R/Z running counterclockwise from ``left`` to ``right``.

    ``left == right`` denotes the full circle minus that point.
    """

    left: FareyPoint
    right: FareyPoint

    @property
    def lo(self) -> Fraction:
        return self.left.value

    @property
    def hi(self) -> Fraction:
        r = self.right.value
        return r if r > self.lo else r + 1

    @property
    def measure(self) -> Fraction:
        return self.hi - self.lo

    def is_unimodular(self) -> bool:
        """True when the endpoints are Farey-consecutive (determinant one)."""
        a, q = self.left.num, self.left.den
        c, s = self.right.num, self.right.den
        if self.right.value <= self.lo:
            c += s
        return q * c - a * s == 1

    def contains(self, x) -> bool:
        t = as_fraction(x)
        if t <= self.lo:
            t += 1
        return self.lo < t < self.hi

    def contains_interval(self, other: "ComponentInterval") -> bool:
        t = other.lo
        if t < self.lo:
            t += 1
        return t + other.measure <= self.hi

    def disjoint(self, other: "ComponentInterval") -> bool:
        """Open arcs are disjoint (touching at an endpoint counts as disjoint)."""
        a_lo, a_hi = self.lo, self.hi
        for shift in (-1, 0, 1):
            b_lo, b_hi = other.lo + shift, other.hi + shift
            if max(a_lo, b_lo) < min(a_hi, b_hi):
                return False
        return True

    def mediant(self) -> Fraction:
        """The mediant of the endpoints, a point inside the arc of larger height."""
        a, q = self.left.num, self.left.den
        c, s = self.right.num, self.right.den
        if self.right.value <= self.lo:
            c += s
        return as_fraction(Fraction(a + c, q + s))

    def __str__(self) -> str:
        return f"({self.left}, {self.right})"


def neighbors(beta: FareyPoint) -> tuple[FareyPoint, FareyPoint]:
    """Return ``(beta', beta'')``, the Farey neighbors of ``beta`` at order h(beta).

    With ``beta = a/q`` and ``abar`` the inverse of ``a`` mod ``q``, the left
    neighbor has height ``abar`` and the right one ``q - abar``.
    """
    if beta.is_zero():
        raise DomainError("neighbors are undefined for the zero point")
    a, q = beta.num, beta.den
    abar = pow(a, -1, q)
    r1 = (a * abar - 1) // q
    left = FareyPoint.of(r1, abar)
    right = FareyPoint.of(a - r1, q - abar)
    return left, right


def component(beta: FareyPoint) -> ComponentInterval:
    """Support interval I(beta', beta'') of f_beta; the full circle for beta = 0."""
    if beta.is_zero():
        return ComponentInterval(ZERO, ZERO)
    left, right = neighbors(beta)
    return ComponentInterval(left, right)


def farey_sequence(Q: int) -> list[FareyPoint]:
    """All points of height at most Q in increasing order, starting at 0/1."""
    if Q < 1:
        raise ValueError("Q must be positive")
    out = [ZERO]
    a, b, c, d = 0, 1, 1, Q
    while c < d:
        out.append(FareyPoint(c, d))
        k = (Q + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
    return out


def farey_points_of_height(q: int) -> list[FareyPoint]:
    if q == 1:
        return [ZERO]
    return [FareyPoint(a, q) for a in range(1, q) if gcd(a, q) == 1]


def farey_by_height(Q: int):
    """Points of height at most Q ordered by height, then representative."""
    for q in range(1, Q + 1):
        yield from farey_points_of_height(q)


def _descend(x: Fraction, Q: int) -> ComponentInterval:
    # Stern–Brocot descent for a rational x in (0, 1) of height > Q
    ln, ld, rn, rd = 0, 1, 1, 1
    while True:
        mn, md = ln + rn, ld + rd
        if md > Q:
            return ComponentInterval(FareyPoint.of(ln, ld), FareyPoint.of(rn, rd))
        c = x.numerator * md - mn * x.denominator
        if c < 0:
            rn, rd = mn, md
        elif c > 0:
            ln, ld = mn, md
        else:
            raise DomainError(f"{x} lies in F_{Q}")


def consecutive_pair_at(x, Q: int) -> ComponentInterval:
    """The component interval of R/Z minus F_Q that contains ``x``.

    ``x`` may be a rational (FareyPoint, Fraction) of height > Q or a
    continued fraction stream.
    """
    if Q < 1:
        raise ValueError("Q must be positive")
    if hasattr(x, "locate"):
        return x.locate(Q)[2]
    v = as_fraction(x)
    if v.denominator <= Q:
        raise DomainError(f"{v} lies in F_{Q}")
    return _descend(v, Q)


def sigma_separation(x, y):
    """Smallest Q for which x and y lie in different components of R/Z minus F_Q.

    Returns ``math.inf`` when ``x == y``.  Rational arguments are accepted as
    stand-ins for irrationals; a ``DomainError`` is raised if one of them turns
    into a Farey point before the two are separated.
    """
    cx, cy = _comparator(x), _comparator(y)
    if _same(x, y):
        return math.inf
    ln, ld, rn, rd = 0, 1, 1, 1
    while True:
        mn, md = ln + rn, ld + rd
        sx, sy = cx(Fraction(mn, md)), cy(Fraction(mn, md))
        if sx == 0 or sy == 0:
            raise DomainError("a rational argument reached the Farey set before separation")
        if sx != sy:
            return md
        if sx < 0:
            rn, rd = mn, md
        else:
            ln, ld = mn, md


def _comparator(x):
    if hasattr(x, "compare"):
        return x.compare
    v = as_fraction(x)
    if v == 0:
        raise DomainError("0 is a Farey point of every order")

    def cmp(r: Fraction) -> int:
        return (v > r) - (v < r)

    return cmp


def _same(x, y) -> bool:
    if hasattr(x, "compare") or hasattr(y, "compare"):
        return x is y or getattr(x, "key", None) == getattr(y, "key", 0)
    return as_fraction(x) == as_fraction(y)


def children(delta: FareyPoint, Q: int) -> tuple[list[FareyPoint], list[FareyPoint]]:
    """Points of height at most Q whose left (resp. right) neighbor is ``delta``.

    These are the mediant ladders (m r + r'')/(m s + s'') and (n r + r')/(n s + s')
    built from the lifted neighbors r'/s' < r/s < r''/s''.
    """
    r, s = delta.num, delta.den
    if delta.is_zero():
        rp, sp, rpp, spp = -1, 1, 1, 1
    else:
        left, right = neighbors(delta)
        rp, sp = left.num, left.den
        rpp, spp = (right.num, right.den) if not right.is_zero() else (1, 1)
    betas = []
    m = 1
    while m * s + spp <= Q:
        betas.append(FareyPoint.of(m * r + rpp, m * s + spp))
        m += 1
    gammas = []
    n = 1
    while n * s + sp <= Q:
        gammas.append(FareyPoint.of(n * r + rp, n * s + sp))
        n += 1
    return betas, gammas


def partial_quotients(beta: FareyPoint) -> list[int]:
    """Canonical expansion [0; a_1, ..., a_N] of the representative (a_N >= 2)."""
    a, q = beta.num, beta.den
    out = []
    while a:
        k, rem = divmod(q, a)
        out.append(k)
        q, a = a, rem
    return out


def s_value(beta: FareyPoint) -> int:
    """Sum of partial quotients; 1 for the zero point."""
    if beta.is_zero():
        return 1
    return sum(partial_quotients(beta))
