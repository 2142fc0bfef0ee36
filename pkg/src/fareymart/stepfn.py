"""Exact normalized step functions and piecewise-linear functions on R/Z.

A :class:`StepFunction` keeps a sorted tuple of breakpoints in [0, 1) and the
value on the open arc that starts at each breakpoint (the last arc wraps past
1).  Only breakpoints where the value changes are stored.  At a breakpoint the
function takes the mean of its one-sided limits unless an explicit override is
given; overrides exist for test scaffolding only.
"""

from __future__ import annotations

import json
from bisect import bisect_left, bisect_right
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError, PreconditionError
from .farey import (
    ComponentInterval,
    FareyPoint,
    as_fraction,
    consecutive_pair_at,
    farey_by_height,
    farey_points_of_height,
    neighbors,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)
_HALF = Fraction(1, 2)


class StepFunction:
    __slots__ = ("points", "values", "overrides", "_cum")

    def __init__(self, points=(), values=(_ZERO,), overrides=None, *, _canonical=False):
        points = tuple(as_fraction(p) for p in points) if not _canonical else tuple(points)
        values = tuple(Fraction(v) for v in values) if not _canonical else tuple(values)
        if not points:
            if len(values) != 1:
                raise ValueError("a constant step function carries exactly one value")
        elif len(points) != len(values):
            raise ValueError("need one arc value per breakpoint")
        if not _canonical:
            order = sorted(range(len(points)), key=points.__getitem__)
            points = tuple(points[i] for i in order)
            values = tuple(values[i] for i in order) if points else values
            if len(set(points)) != len(points):
                raise ValueError("duplicate breakpoints")
            points, values = _canonicalize(points, values)
        self.points = points
        self.values = values
        self.overrides = dict(overrides) if overrides else None
        self._cum = None

    @classmethod
    def constant(cls, c) -> "StepFunction":
        return cls((), (Fraction(c),), _canonical=True)

    @classmethod
    def from_arcs(cls, arcs) -> "StepFunction":
        """Build from ``(lo, hi, value)`` arcs; uncovered parts of the circle are 0."""
        cuts = {}
        for lo, hi, v in arcs:
            lo, hi = Fraction(lo), Fraction(hi)
            if hi - lo >= 1:
                return cls.constant(v)
            cuts[as_fraction(lo)] = Fraction(v)
            cuts.setdefault(as_fraction(hi), _ZERO)
        if not cuts:
            return cls.constant(0)
        pts = sorted(cuts)
        return cls(pts, [cuts[p] for p in pts])

    @classmethod
    def indicator(cls, interval: ComponentInterval) -> "StepFunction":
        return cls.from_arcs([(interval.lo, interval.hi, 1)])

    # -- evaluation ---------------------------------------------------------

    def arc_value(self, x) -> Fraction:
        """Value on the open arc immediately to the right of ``x``."""
        if not self.points:
            return self.values[0]
        return self.values[bisect_right(self.points, as_fraction(x)) - 1]

    def __call__(self, x) -> Fraction:
        x = as_fraction(x)
        if self.overrides and x in self.overrides:
            return self.overrides[x]
        if not self.points:
            return self.values[0]
        i = bisect_left(self.points, x)
        if i < len(self.points) and self.points[i] == x:
            return (self.values[i - 1] + self.values[i]) / 2
        return self.values[i - 1]

    def arcs(self):
        """Yield ``(lo, hi, value)`` with lifted ``hi`` for the wrapping arc."""
        pts, vals = self.points, self.values
        if not pts:
            yield _ZERO, _ONE, vals[0]
            return
        n = len(pts)
        for i in range(n):
            hi = pts[i + 1] if i + 1 < n else pts[0] + 1
            yield pts[i], hi, vals[i]

    def integral(self) -> Fraction:
        if not self.points:
            return self.values[0]
        return sum((v * (hi - lo) for lo, hi, v in self.arcs()), _ZERO)

    def _primitive(self, t: Fraction) -> Fraction:
        # integral over [0, t] for 0 <= t <= 1
        if not self.points:
            return self.values[0] * t
        if self._cum is None:
            cum = [self.values[-1] * self.points[0]]
            for i in range(1, len(self.points)):
                cum.append(cum[-1] + self.values[i - 1] * (self.points[i] - self.points[i - 1]))
            self._cum = cum
        i = bisect_right(self.points, t) - 1
        if i < 0:
            return self.values[-1] * t
        return self._cum[i] + self.values[i] * (t - self.points[i])

    def integrate(self, lo, hi) -> Fraction:
        """Integral over the lifted arc ``[lo, hi]`` (``hi - lo <= 1``)."""
        lo, hi = Fraction(lo), Fraction(hi)
        total = self.integral()

        def G(t):
            k = t.numerator // t.denominator
            return k * total + self._primitive(t - k)

        return G(hi) - G(lo)

    def sup_abs(self) -> Fraction:
        # point values are means of neighboring arc values, so arcs attain the sup
        best = max(abs(v) for v in self.values)
        if self.overrides:
            best = max([best] + [abs(v) for v in self.overrides.values()])
        return best

    def breakpoints(self) -> tuple:
        return self.points

    # -- algebra --------------------------------------------------------

    def combine(self, other: "StepFunction", op) -> "StepFunction":
        """Arc-wise ``op(self, other)``; overrides are dropped."""
        if not self.points and not other.points:
            return StepFunction.constant(op(self.values[0], other.values[0]))
        pts = sorted(set(self.points) | set(other.points))
        vals = [op(self.arc_value(p), other.arc_value(p)) for p in pts]
        p, v = _canonicalize(tuple(pts), tuple(vals))
        return StepFunction(p, v, _canonical=True)

    def map(self, fn) -> "StepFunction":
        if not self.points:
            return StepFunction.constant(fn(self.values[0]))
        p, v = _canonicalize(self.points, tuple(fn(x) for x in self.values))
        return StepFunction(p, v, _canonical=True)

    def __add__(self, other):
        if isinstance(other, StepFunction):
            return self.combine(other, lambda a, b: a + b)
        c = Fraction(other)
        return self.map(lambda a: a + c)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, StepFunction):
            return self.combine(other, lambda a, b: a - b)
        c = Fraction(other)
        return self.map(lambda a: a - c)

    def __neg__(self):
        return self.map(lambda a: -a)

    def __mul__(self, other):
        if isinstance(other, StepFunction):
            return self.combine(other, lambda a, b: a * b)
        c = Fraction(other)
        return self.map(lambda a: a * c)

    __rmul__ = __mul__

    def __abs__(self):
        return self.map(abs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (
            self.points == other.points
            and self.values == other.values
            and (self.overrides or None) == (other.overrides or None)
        )

    def __hash__(self):
        return hash((self.points, self.values))

    def is_constant_on(self, lo, hi) -> bool:
        """True when no breakpoint lies strictly inside the lifted arc (lo, hi)."""
        lo, hi = Fraction(lo), Fraction(hi)
        if not self.points:
            return True
        for p in self.points:
            t = p if p > lo else p + 1
            if t < hi:
                return False
        return True

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        pts = [f"{p.numerator}/{p.denominator}" for p in self.points]
        vals = [str(v) if v.denominator != 1 else f"{v.numerator}/1" for v in self.values]
        return json.dumps({"breakpoints": pts, "values": vals})

    @classmethod
    def from_json(cls, text: str) -> "StepFunction":
        data = json.loads(text)
        pts = [Fraction(p) for p in data["breakpoints"]]
        vals = [Fraction(v) for v in data["values"]]
        if not pts:
            return cls.constant(vals[0])
        return cls(pts, vals)

    def __repr__(self) -> str:
        body = ", ".join(f"{p}:{v}" for p, v in zip(self.points, self.values))
        return f"StepFunction({body or self.values[0]})"


def _canonicalize(points: tuple, values: tuple):
    n = len(points)
    if n == 0:
        return points, values
    keep = [i for i in range(n) if values[i - 1] != values[i]]
    if not keep:
        return (), (values[0],)
    if len(keep) == n:
        return points, values
    return tuple(points[i] for i in keep), tuple(values[i] for i in keep)


class PiecewiseLinear:
    """A normalized function on R/Z that is affine on each arc.

    On the arc starting at ``points[i]`` the value is ``a + b*t`` where ``t``
    is the lifted coordinate (the wrapping arc runs up to ``points[0] + 1``).
    """

    def __init__(self, points, coeffs):
        points = tuple(as_fraction(p) for p in points)
        coeffs = tuple((Fraction(a), Fraction(b)) for a, b in coeffs)
        if not points:
            raise ValueError("a piecewise linear function needs at least one breakpoint")
        if len(points) != len(coeffs):
            raise ValueError("need one (a, b) pair per breakpoint")
        order = sorted(range(len(points)), key=points.__getitem__)
        self.points = tuple(points[i] for i in order)
        self.coeffs = tuple(coeffs[i] for i in order)

    @classmethod
    def sawtooth(cls, shift=0) -> "PiecewiseLinear":
        """x -> psi(x - shift), where psi(x) = x - [x] - 1/2 off the integers."""
        s = as_fraction(shift)
        return cls([s], [(-s - _HALF, 1)])

    @classmethod
    def from_step(cls, g: StepFunction) -> "PiecewiseLinear":
        if not g.points:
            return cls([_ZERO], [(g.values[0], 0)])
        return cls(g.points, [(v, 0) for v in g.values])

    def _affine_at(self, i: int, x: Fraction) -> Fraction:
        a, b = self.coeffs[i]
        t = x if x >= self.points[i] else x + 1
        return a + b * t

    def arc_value(self, x) -> Fraction:
        x = as_fraction(x)
        i = bisect_right(self.points, x) - 1
        return self._affine_at(i, x)

    def __call__(self, x) -> Fraction:
        x = as_fraction(x)
        i = bisect_left(self.points, x)
        if i < len(self.points) and self.points[i] == x:
            right = self._affine_at(i, x)
            a, b = self.coeffs[i - 1]
            left_t = x if i > 0 else x + 1
            return (right + a + b * left_t) / 2
        return self._affine_at(i - 1, x)

    def pieces(self):
        """Yield ``(l, r, a, b)`` covering [0, 1] in order, value a + b*x on (l, r)."""
        pts, cfs = self.points, self.coeffs
        n = len(pts)
        a_w, b_w = cfs[-1]
        if pts[0] > 0:
            yield _ZERO, pts[0], a_w + b_w, b_w
        for i in range(n):
            hi = pts[i + 1] if i + 1 < n else _ONE
            a, b = cfs[i]
            if hi > pts[i]:
                yield pts[i], hi, a, b

    def integral(self) -> Fraction:
        return sum((_int_affine(l, r, a, b) for l, r, a, b in self.pieces()), _ZERO)

    def __add__(self, other):
        return _pl_combine(self, other, 1)

    def __sub__(self, other):
        return _pl_combine(self, other, -1)

    def __mul__(self, c):
        c = Fraction(c)
        return PiecewiseLinear(self.points, [(a * c, b * c) for a, b in self.coeffs])

    __rmul__ = __mul__

    def to_step(self) -> StepFunction:
        """Convert when every slope vanishes."""
        if any(b for _, b in self.coeffs):
            raise ValueError("function is not piecewise constant")
        return StepFunction(self.points, [a for a, _ in self.coeffs])

    def abs_integral(self) -> Fraction:
        total = _ZERO
        for l, r, a, b in self.pieces():
            cuts = [l, r]
            if b:
                z = -a / b
                if l < z < r:
                    cuts = [l, z, r]
            for u, w in zip(cuts, cuts[1:]):
                mid = (u + w) / 2
                sign = 1 if a + b * mid >= 0 else -1
                total += sign * _int_affine(u, w, a, b)
        return total

    def norm_squared(self) -> Fraction:
        return inner_product(self, self)

    def __repr__(self) -> str:
        body = ", ".join(f"{p}:({a}{b:+}x)" for p, (a, b) in zip(self.points, self.coeffs))
        return f"PiecewiseLinear({body})"


def _int_affine(l, r, a, b) -> Fraction:
    return a * (r - l) + b * (r * r - l * l) / 2


def _pieces(g):
    if isinstance(g, StepFunction):
        for lo, hi, v in g.arcs():
            if hi <= 1:
                yield lo, hi, v, _ZERO
            else:
                yield lo, _ONE, v, _ZERO
        if g.points and g.points[0] > 0:
            yield _ZERO, g.points[0], g.values[-1], _ZERO
    else:
        yield from g.pieces()


def _sorted_pieces(g):
    return sorted(_pieces(g), key=lambda p: p[0])


def _merge(g1, g2):
    """Yield ``(l, r, a1, b1, a2, b2)`` on the common refinement of [0, 1]."""
    p1, p2 = _sorted_pieces(g1), _sorted_pieces(g2)
    i = j = 0
    lo = _ZERO
    while i < len(p1) and j < len(p2):
        l1, r1, a1, b1 = p1[i]
        l2, r2, a2, b2 = p2[j]
        hi = min(r1, r2)
        if hi > lo:
            yield lo, hi, a1, b1, a2, b2
        lo = hi
        if r1 == hi:
            i += 1
        if r2 == hi:
            j += 1


def _pl_combine(f, g, sign):
    pts, coeffs = [], []
    for l, r, a1, b1, a2, b2 in _merge(f, g):
        pts.append(l)
        coeffs.append((a1 + sign * a2, b1 + sign * b2))
    return PiecewiseLinear(pts, coeffs)


def inner_product(g1, g2) -> Fraction:
    """Exact integral of g1 * g2 over R/Z (real-valued functions)."""
    if isinstance(g1, StepFunction) and isinstance(g2, StepFunction):
        return _step_inner(g1, g2)
    total = _ZERO
    for l, r, a1, b1, a2, b2 in _merge(g1, g2):
        total += (
            a1 * a2 * (r - l)
            + (a1 * b2 + a2 * b1) * (r * r - l * l) / 2
            + b1 * b2 * (r * r * r - l * l * l) / 3
        )
    return total


def _step_inner(g1: StepFunction, g2: StepFunction) -> Fraction:
    if not g1.points:
        return g1.values[0] * g2.integral()
    if not g2.points:
        return g2.values[0] * g1.integral()
    pts = sorted(set(g1.points) | set(g2.points))
    total = _ZERO
    n = len(pts)
    for k in range(n):
        p = pts[k]
        length = (pts[k + 1] if k + 1 < n else pts[0] + 1) - p
        v = g1.arc_value(p) * g2.arc_value(p)
        if v:
            total += v * length
    return total


def psi() -> PiecewiseLinear:
    return PiecewiseLinear.sawtooth(0)


# -- the basis -----------------------------------------------------------------


@lru_cache(maxsize=65536)
def f_beta(beta: FareyPoint) -> StepFunction:
    """The three-level step function: h(beta') on I(beta', beta), -h(beta'')
    on I(beta, beta''), 0 elsewhere; the constant 1 for beta = 0."""
    if beta.is_zero():
        return StepFunction.constant(1)
    left, right = neighbors(beta)
    vals = {left.value: Fraction(left.den), beta.value: Fraction(-right.den)}
    vals.setdefault(right.value, _ZERO)
    pts = sorted(vals)
    return StepFunction(pts, [vals[p] for p in pts])


def f_beta_sawtooth(beta: FareyPoint) -> PiecewiseLinear:
    """f_beta as h(b) psi(x - b) - h(b') psi(x - b') - h(b'') psi(x - b'')."""
    if beta.is_zero():
        return PiecewiseLinear([_ZERO], [(1, 0)])
    left, right = neighbors(beta)
    saw = PiecewiseLinear.sawtooth
    return saw(beta) * beta.den - saw(left) * left.den - saw(right) * right.den


@lru_cache(maxsize=65536)
def chi_beta(beta: FareyPoint) -> StepFunction:
    """Normalized indicator of I(beta', beta''); the constant 1 for beta = 0."""
    if beta.is_zero():
        return StepFunction.constant(1)
    left, right = neighbors(beta)
    return StepFunction.indicator(ComponentInterval(left, right))


def X_q(q: int) -> StepFunction:
    if q < 1:
        raise ValueError("q must be positive")
    arcs = []
    for beta in farey_points_of_height(q):
        if beta.is_zero():
            return StepFunction.constant(1)
        left, right = neighbors(beta)
        I = ComponentInterval(left, right)
        arcs.append((I.lo, I.hi, 1))
    return StepFunction.from_arcs(arcs)


# -- evaluation at continued fraction streams ------------------------------


def _ladder_value(beta: FareyPoint, alpha) -> int:
    q = beta.den
    if beta.is_zero():
        return 1
    M, N, _ = alpha.locate(q)
    p1, q1 = alpha.convergent(N - 1)
    p2, q2 = alpha.convergent(N - 2)
    if M * q1 + q2 != q:
        return 0
    if (M * p1 + p2 - beta.num) % q:
        return 0
    return q1 if N % 2 else -q1


def evaluate_at_stream(beta: FareyPoint, alpha) -> int:
    """f_beta(alpha) = (-1)^{n-1} q_{n-1}(alpha) if beta lies in E_n(alpha), else 0."""
    if not alpha.irrational:
        raise PreconditionError("evaluate_at_stream needs an irrational stream")
    return _ladder_value(beta, alpha)


def evaluate(g_beta: FareyPoint, x):
    """f_beta at a rational point or a stream."""
    if hasattr(x, "locate"):
        if x.irrational:
            return Fraction(_ladder_value(g_beta, x))
        x = x.point
    return f_beta(g_beta)(x)


# -- kernels ---------------------------------------------------------------


def _component(x, Q: int) -> ComponentInterval:
    try:
        return consecutive_pair_at(x, Q)
    except DomainError:
        raise DomainError(f"{x} lies in F_{Q}") from None


def kernel_value(x, y, Q: int, method: str = "fast") -> Fraction:
    """K_Q(x, y): h(g1) h(g2) when x, y share the component I(g1, g2), else 0.

    ``method="sum"`` evaluates the defining sum over F_Q instead.
    """
    cx, cy = _component(x, Q), _component(y, Q)
    if method == "fast":
        if cx == cy:
            return Fraction(cx.left.den * cx.right.den)
        return _ZERO
    if method != "sum":
        raise ValueError(f"unknown method {method!r}")
    total = _ZERO
    for beta in farey_by_height(Q):
        fx = evaluate(beta, x)
        if fx:
            total += fx * evaluate(beta, y)
    return total


def kernel_section(x, Q: int) -> StepFunction:
    """y -> K_Q(x, y) for fixed x outside F_Q."""
    I = _component(x, Q)
    return StepFunction.from_arcs([(I.lo, I.hi, I.left.den * I.right.den)])


def _weighted_sum(terms) -> StepFunction:
    # sum of c_k f_k by a single arc sweep
    terms = [(c, g) for c, g in terms if c]
    if not terms:
        return StepFunction.constant(0)
    jumps = {}
    for c, g in terms:
        vs = g.values
        for i, p in enumerate(g.points):
            jumps[p] = jumps.get(p, _ZERO) + c * (vs[i] - vs[i - 1])
    if not jumps:
        return StepFunction.constant(sum(c * g.values[0] for c, g in terms))
    pts = sorted(jumps)
    # value on the arc starting at pts[0], then accumulate jumps
    v = sum(c * g.arc_value(pts[0]) for c, g in terms)
    vals = [v]
    for p in pts[1:]:
        v += jumps[p]
        vals.append(v)
    p, v = _canonicalize(tuple(pts), tuple(vals))
    return StepFunction(p, v, _canonical=True)


def linear_combination(terms) -> StepFunction:
    """Exact sum of ``c * g`` over ``(c, g)`` pairs of StepFunctions."""
    return _weighted_sum(list(terms))


def kernel_section_sum(x, Q: int) -> StepFunction:
    """y -> sum over F_Q of f_beta(x) f_beta(y), built term by term."""
    return _weighted_sum((evaluate(b, x), f_beta(b)) for b in farey_by_height(Q))


def J_section(x, Q: int) -> StepFunction:
    """y -> sum over height-Q points of f_beta(x) f_beta(y)."""
    return _weighted_sum((evaluate(b, x), f_beta(b)) for b in farey_points_of_height(Q))


def LQ_RQ(x, Q: int) -> tuple[int, int]:
    """Heights of the left and right endpoints of the F_Q component holding x."""
    I = _component(x, Q)
    return I.left.den, I.right.den
