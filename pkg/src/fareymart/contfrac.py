"""Continued fraction streams, convergents, the sets E_n and the (M, N) locator.

A :class:`CFStream` represents a point of R/Z by its partial quotients
``a_1, a_2, ...`` (``a_0`` is always 0).  Four kinds exist: the canonical
finite expansion of a rational, a quadratic irrational ``(P + sqrt(D))/Q0``
expanded by the periodic algorithm, an explicit list of quotients, and a
seeded stream of uniform quotients in ``[1, bound]``.  The seeded kind is an
experiment device; its quotients are *not* Gauss–Kuzmin distributed.
"""

from __future__ import annotations

import math
import random
import re
from fractions import Fraction
from math import isqrt

from .errors import CFLengthError, DomainError
from .farey import ComponentInterval, FareyPoint


class CFStream:
    """Lazily expanded continued fraction of a point of R/Z.

    Quotients and convergents are cached as they are produced, so a stream is
    mutable while expanding; share it across threads only after
    materializing the prefix you need.
    """

    def __init__(self, kind: str, source, key: str, irrational: bool):
        self.kind = kind
        self.key = key
        self.irrational = irrational
        self._source = source
        self._a = [0]
        self._p = [0, 1, 0]  # p_{-2}, p_{-1}, p_0
        self._q = [1, 0, 1]
        self._exhausted = False

    # -- constructors -----------------------------------------------------

    @classmethod
    def rational(cls, x) -> "CFStream":
        from .farey import partial_quotients

        beta = x if isinstance(x, FareyPoint) else FareyPoint.of(Fraction(x))
        stream = cls("rational", iter(partial_quotients(beta)), str(beta), False)
        stream.point = beta
        return stream

    @classmethod
    def quadratic(cls, P: int, D: int, Q0: int) -> "CFStream":
        """The fractional part of ``(P + sqrt(D)) / Q0``; D must not be a square."""
        if D <= 0 or isqrt(D) ** 2 == D:
            raise DomainError(f"D={D} must be a positive non-square")
        if Q0 == 0:
            raise DomainError("Q0 must be nonzero")
        key = f"quadratic({P},{D},{Q0})"
        if (D - P * P) % Q0:
            P, D, Q0 = P * abs(Q0), D * Q0 * Q0, Q0 * abs(Q0)
        stream = cls("quadratic", _periodic(P, D, Q0), key, True)
        stream.surd = (P, D, Q0)
        return stream

    @classmethod
    def explicit(cls, quotients) -> "CFStream":
        """A finite prefix ``a_1, ..., a_k`` of an irrational expansion."""
        quotients = [int(a) for a in quotients]
        if any(a < 1 for a in quotients):
            raise DomainError("partial quotients must be positive")
        key = "[0;" + ",".join(map(str, quotients)) + "]"
        return cls("explicit", iter(quotients), key, True)

    @classmethod
    def seeded(cls, seed: int, bound: int = 9) -> "CFStream":
        if bound < 1:
            raise DomainError("bound must be positive")
        rng = random.Random(seed)

        def gen():
            while True:
                yield rng.randint(1, bound)

        return cls("seeded", gen(), f"rand(seed={seed},bound={bound})", True)

    # -- quotients and convergents ---------------------------------------

    def _extend(self, k: int) -> bool:
        while len(self._a) <= k:
            if self._exhausted:
                return False
            try:
                a = next(self._source)
            except StopIteration:
                self._exhausted = True
                return False
            self._a.append(a)
            self._p.append(a * self._p[-1] + self._p[-2])
            self._q.append(a * self._q[-1] + self._q[-2])
        return True

    def has(self, k: int) -> bool:
        """Whether quotient ``a_k`` exists (always true for infinite kinds)."""
        return self._extend(k)

    def quotient(self, k: int) -> int:
        if k < 0:
            raise IndexError("quotient index must be nonnegative")
        if not self._extend(k):
            raise CFLengthError(f"{self.key} has only {len(self._a) - 1} partial quotients")
        return self._a[k]

    def quotients(self, n: int) -> list[int]:
        self.quotient(n)
        return self._a[1 : n + 1]

    def convergent(self, n: int) -> tuple[int, int]:
        """``(p_n, q_n)`` for ``n >= -2``."""
        if n < -2:
            raise IndexError("convergent index must be >= -2")
        if n > 0:
            self.quotient(n)
        return self._p[n + 2], self._q[n + 2]

    def length(self):
        """Number of partial quotients, or ``math.inf`` for endless kinds."""
        if self.kind in ("quadratic", "seeded"):
            return math.inf
        while self._extend(len(self._a)):
            pass
        return len(self._a) - 1

    # -- convergent ladder ---------------------------------------------

    def intermediate_set(self, n: int) -> list[FareyPoint]:
        """E_n: the points (m p_{n-1} + p_{n-2}) / (m q_{n-1} + q_{n-2}), m = 1..a_n."""
        if n < 1:
            raise IndexError("E_n is defined for n >= 1")
        a = self.quotient(n)
        p1, q1 = self.convergent(n - 1)
        p2, q2 = self.convergent(n - 2)
        return [FareyPoint.of(m * p1 + p2, m * q1 + q2) for m in range(1, a + 1)]

    def ladder(self, Qmax=None):
        """Yield ``(n, m, numerator, denominator)`` of every convergent and
        intermediate convergent in increasing denominator order.

        Stops at ``Qmax`` (inclusive) or when a finite expansion runs out.
        """
        n = 1
        while self.has(n):
            a = self._a[n]
            p1, q1 = self._p[n + 1], self._q[n + 1]
            p2, q2 = self._p[n], self._q[n]
            for m in range(1, a + 1):
                den = m * q1 + q2
                if Qmax is not None and den > Qmax:
                    return
                yield n, m, m * p1 + p2, den
            n += 1

    def locate(self, Q: int) -> tuple[int, int, ComponentInterval]:
        """Return ``(M, N, interval)`` with 1 <= M <= a_N and
        M q_{N-1} + q_{N-2} <= Q < (M+1) q_{N-1} + q_{N-2}.

        ``interval`` is the component of R/Z minus F_Q containing the point.
        For a rational stream this requires height > Q.
        """
        if Q < 1:
            raise ValueError("Q must be positive")
        if not self.irrational and self.point.den <= Q:
            raise DomainError(f"{self.point} lies in F_{Q}")
        n = 1
        while True:
            if not self.has(n):
                raise CFLengthError(f"{self.key}: expansion exhausted before locating Q={Q}")
            a = self._a[n]
            p1, q1 = self._p[n + 1], self._q[n + 1]
            p2, q2 = self._p[n], self._q[n]
            if q1 + q2 > Q:
                # the last ladder entry <= Q closed row n-1
                N = n - 1
                M = self._a[N]
                p1, q1 = self._p[N + 1], self._q[N + 1]
                p2, q2 = self._p[N], self._q[N]
                break
            if a * q1 + q2 > Q:
                N = n
                M = (Q - q2) // q1
                break
            n += 1
        mid = FareyPoint.of(M * p1 + p2, M * q1 + q2)
        conv = FareyPoint.of(p1, q1)
        if N % 2:
            interval = ComponentInterval(conv, mid)
        else:
            interval = ComponentInterval(mid, conv)
        return M, N, interval

    # -- exact comparison ------------------------------------------------

    def compare(self, r) -> int:
        """Sign of ``alpha - r`` for a rational ``r`` in [0, 1]."""
        r = Fraction(r)
        if self.kind == "rational":
            v = self.point.value
            return (v > r) - (v < r)
        if self.kind == "quadratic":
            return self._compare_surd(r)
        return self._compare_by_convergents(r)

    def _compare_surd(self, r: Fraction) -> int:
        P, D, Q0 = self.surd
        a0 = _surd_floor(P, D, Q0)
        u, v = r.numerator, r.denominator
        # alpha - u/v = ((P - a0 Q0) v - u Q0 + v sqrt(D)) / (Q0 v)
        A = (P - a0 * Q0) * v - u * Q0
        s = 1 if A >= 0 else (1 if v * v * D > A * A else -1)
        return s if Q0 > 0 else -s

    def _compare_by_convergents(self, r: Fraction) -> int:
        # alpha lies strictly between p_{n+1}/q_{n+1} and
        # (p_{n+1}+p_n)/(q_{n+1}+q_n) for every n >= -1
        n = -1
        while True:
            if not self.has(n + 2):
                raise CFLengthError(f"{self.key}: cannot resolve comparison with {r}")
            p1, q1 = self.convergent(n + 1)
            p0, q0 = self.convergent(n)
            lo = Fraction(p1, q1) if q1 else None
            hi = Fraction(p1 + p0, q1 + q0)
            if lo is not None:
                lo, hi = min(lo, hi), max(lo, hi)
                if r <= lo:
                    return 1
                if r >= hi:
                    return -1
            n += 1

    def surrogate(self, Q: int) -> Fraction:
        """A rational of height > Q lying in the same F_Q component as alpha."""
        return self.locate(Q)[2].mediant()

    def __str__(self) -> str:
        return self.key

    __repr__ = __str__


def _surd_floor(P: int, D: int, Q: int) -> int:
    s = isqrt(D)
    if Q > 0:
        return (P + s) // Q
    return (-P - s - 1) // (-Q)


def _periodic(P: int, D: int, Q: int):
    """Partial quotients a_1, a_2, ... of the fractional part of (P + sqrt D)/Q.

    Requires Q | D - P^2; the state stays integral throughout.
    """
    a = _surd_floor(P, D, Q)
    while True:
        # x = (P + sqrt D)/Q, x - a = (P - aQ + sqrt D)/Q, 1/(x - a) = (P' + sqrt D)/Q'
        P = a * Q - P
        Q = (D - P * P) // Q
        a = _surd_floor(P, D, Q)
        yield a


# -- descriptor parsing -------------------------------------------------------

_SURD = re.compile(
    r"""^\(?\s*
    (?:(?P<p>[+-]?\d+)\s*(?P<s1>[+-])\s*)?
    (?P<neg>-)?\s*sqrt\(\s*(?P<d>\d+)\s*\)
    \s*(?:(?P<s2>[+-])\s*(?P<p2>\d+))?
    \s*\)?\s*(?:/\s*(?P<q>[+-]?\d+))?$""",
    re.VERBOSE,
)
_RAND = re.compile(r"^rand\(\s*seed\s*=\s*(-?\d+)\s*(?:,\s*bound\s*=\s*(\d+)\s*)?\)$")
_ALIASES = {"golden": "(1+sqrt(5))/2", "silver": "sqrt(2)-1"}


def parse_alpha(text: str) -> CFStream:
    """Parse a CLI descriptor.

    Accepted forms: ``sqrt(2)-1``, ``(1+sqrt(5))/2``, ``[0;2,2,2]``,
    ``rand(seed=7,bound=9)``, ``a/q`` and the aliases ``golden``/``silver``.
    """
    t = _ALIASES.get(text.strip(), text.strip())
    if t.startswith("["):
        body = t.strip("[]")
        head, _, tail = body.partition(";")
        quotients = [int(v) for v in tail.split(",") if v.strip()] if tail else []
        return CFStream.explicit(quotients)
    m = _RAND.match(t)
    if m:
        return CFStream.seeded(int(m.group(1)), int(m.group(2) or 9))
    m = _SURD.match(t.replace(" ", ""))
    if m and "sqrt" in t:
        P = 0
        if m.group("p") is not None:
            P = int(m.group("p"))
            coef = -1 if m.group("s1") == "-" else 1
        else:
            coef = -1 if m.group("neg") else 1
        if m.group("p2") is not None:
            P += int(m.group("p2")) * (-1 if m.group("s2") == "-" else 1)
        Q0 = int(m.group("q") or 1)
        D = int(m.group("d"))
        s = isqrt(D)
        if s * s == D:
            return CFStream.rational(Fraction(P + coef * s, Q0))
        if coef < 0:
            P, Q0 = -P, -Q0
        stream = CFStream.quadratic(P, D, Q0)
        stream.key = text.strip()
        return stream
    if re.fullmatch(r"[+-]?\d+(/\d+)?", t):
        return CFStream.rational(Fraction(t))
    raise ValueError(f"cannot parse alpha descriptor {text!r}")


def convergent(alpha: CFStream, n: int) -> tuple[int, int]:
    return alpha.convergent(n)


def intermediate_set(alpha: CFStream, n: int) -> list[FareyPoint]:
    return alpha.intermediate_set(n)


def locate_MN(alpha: CFStream, Q: int) -> tuple[int, int, ComponentInterval]:
    return alpha.locate(Q)


def denominator_count(alpha: CFStream, qset, Qmax: int) -> int:
    """|D(alpha) ∩ Qset ∩ [1, Qmax]|, D(alpha) the ladder of denominators."""
    if Qmax < 1:
        return 0
    return sum(1 for _, _, _, den in alpha.ladder(Qmax) if qset(den))


def ladder_denominators(alpha: CFStream, Qmax: int) -> list[int]:
    return [den for _, _, _, den in alpha.ladder(Qmax)]


