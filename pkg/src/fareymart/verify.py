"""Checkers that bundle the exact identities of the Farey basis into reports.

Every checker returns a :class:`CheckReport`.  For exact checks the report
passes iff every residual is exactly zero.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any

import mpmath

from .arith import divisors, euler_phi, mobius, prime_divisors, squarefree_divisors
from .contfrac import CFStream, denominator_count
from .errors import DomainError, PreconditionError
from .farey import (
    ComponentInterval,
    FareyPoint,
    farey_by_height,
    farey_points_of_height,
    farey_sequence,
    neighbors,
)
from .stepfn import (
    LQ_RQ,
    PiecewiseLinear,
    StepFunction,
    chi_beta,
    evaluate_at_stream,
    f_beta,
    inner_product,
    kernel_value,
    linear_combination,
)

# Sup of |exact - main_terms| q^2 / log log q over 100 <= q <= 10^4 from
# scripts/calibrate_gates.py is 0.09990 (at q = 101); frozen with a 5% margin.
XQ_ERROR_GATE = 0.105

# Parseval deficit of psi at Q = 1000 must fall below this.  The exact value
# is about 2.29e-10 (scripts/calibrate_gates.py).
PARSEVAL_GATE = Fraction(1, 1000)


@dataclass
class CheckReport:
    name: str
    params: dict
    passed: bool
    counterexample: Any = None
    residuals: list = field(default_factory=list)
    checked: int = 0
    info: dict = field(default_factory=dict)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        args = ", ".join(f"{k}={v}" for k, v in self.params.items())
        line = f"{status} {self.name}({args}) checked={self.checked}"
        if not self.passed:
            line += f" counterexample={self.counterexample}"
        return line


class _Collector:
    """Accumulates residuals and remembers the first nonzero one."""

    def __init__(self, name: str, params: dict):
        self.report = CheckReport(name, params, True)

    def add(self, residual, witness) -> None:
        self.report.checked += 1
        if residual != 0:
            self.report.residuals.append((witness, residual))
            if self.report.passed:
                self.report.passed = False
                self.report.counterexample = witness

    def done(self) -> CheckReport:
        return self.report


def _require_irrational(alpha) -> None:
    if not isinstance(alpha, CFStream) or not alpha.irrational:
        raise PreconditionError("this check needs an irrational stream")


# -- ladder evaluation along a stream ----------------------------------------------


def check_theorem1(alpha: CFStream, n_max: int, sample: int = 200, seed: int = 0) -> CheckReport:
    """f_beta(alpha) = (-1)^{n-1} q_{n-1} on E_n, by two independent routes.

    Route one evaluates the step function f_beta at a rational lying in the
    same F_{h(beta)} component as alpha.  Route two uses the ladder.  Points
    outside every E_n (all of height <= 30, plus a seeded sample up to
    q_{n_max}) must give 0 on both routes.
    """
    _require_irrational(alpha)
    col = _Collector("theorem1", {"alpha": alpha.key, "n_max": n_max})
    members = set()
    for n in range(1, n_max + 1):
        q1 = alpha.convergent(n - 1)[1]
        expected = q1 if n % 2 else -q1
        for beta in alpha.intermediate_set(n):
            members.add(beta)
            direct = f_beta(beta)(alpha.surrogate(beta.den))
            ladder = evaluate_at_stream(beta, alpha)
            col.add(direct - expected, ("E", n, str(beta), "step"))
            col.add(ladder - expected, ("E", n, str(beta), "ladder"))

    top = alpha.convergent(n_max)[1]
    outsiders = [b for b in farey_by_height(min(30, top)) if b not in members]
    rng = random.Random(seed)
    while sample > 0 and top >= 2:
        q = rng.randint(2, top)
        a = rng.randrange(1, q)
        b = FareyPoint.of(a, q)
        if b.den == q and b not in members:
            outsiders.append(b)
            sample -= 1
    for beta in outsiders:
        direct = f_beta(beta)(alpha.surrogate(beta.den))
        col.add(direct, ("outside", str(beta), "step"))
        col.add(evaluate_at_stream(beta, alpha), ("outside", str(beta), "ladder"))
    return col.done()


# -- L_Q and R_Q sums and denominator counts -----------------------------------------


def lr_sums(alpha: CFStream, Q: int) -> dict:
    """Sums of f, f^2, |f|, f^+, f^- over 2 <= h(beta) <= Q at alpha.

    Only points of some E_n contribute, so the ladder suffices.
    """
    s = {"sq": 0, "abs": 0, "sum": 0, "pos": 0, "neg": 0}
    for n, m, num, den in alpha.ladder(Q):
        if den == 1:
            continue
        v = evaluate_at_stream(FareyPoint.of(num, den), alpha)
        s["sq"] += v * v
        s["abs"] += abs(v)
        s["sum"] += v
        s["pos"] += max(v, 0)
        s["neg"] += max(-v, 0)
    return s


def _lr_sums_direct(alpha: CFStream, Q: int) -> dict:
    s = {"sq": 0, "abs": 0, "sum": 0, "pos": 0, "neg": 0}
    for beta in farey_by_height(Q):
        if beta.is_zero():
            continue
        v = f_beta(beta)(alpha.surrogate(Q))
        s["sq"] += v * v
        s["abs"] += abs(v)
        s["sum"] += v
        s["pos"] += max(v, 0)
        s["neg"] += max(-v, 0)
    return s


def check_lr(alpha: CFStream, Qs, direct_upto: int = 60) -> CheckReport:
    """L R = 1 + sum f^2, R + L = 2 + sum |f|, R - L = sum f,
    R = 1 + sum f^+, L = 1 + sum f^- at each Q.

    For Q <= ``direct_upto`` the sums are also recomputed over all of F_Q.
    """
    _require_irrational(alpha)
    Qs = list(Qs)
    col = _Collector("lr", {"alpha": alpha.key, "Q": Qs})
    for Q in Qs:
        L, R = LQ_RQ(alpha, Q)
        routes = [("ladder", lr_sums(alpha, Q))]
        if Q <= direct_upto:
            routes.append(("direct", _lr_sums_direct(alpha, Q)))
        for route, s in routes:
            col.add(1 + s["sq"] - L * R, (Q, route, "LR"))
            col.add(2 + s["abs"] - (R + L), (Q, route, "R+L"))
            col.add(s["sum"] - (R - L), (Q, route, "R-L"))
            col.add(1 + s["pos"] - R, (Q, route, "R"))
            col.add(1 + s["neg"] - L, (Q, route, "L"))
    return col.done()


def check_theorem5(alpha: CFStream, Q: int) -> CheckReport:
    """sum_{h(beta) <= Q} chi_beta(alpha) equals the number of convergent and
    intermediate convergent denominators <= Q."""
    _require_irrational(alpha)
    col = _Collector("theorem5", {"alpha": alpha.key, "Q": Q})
    x = alpha.surrogate(Q)
    lhs = sum(chi_beta(b)(x) for b in farey_by_height(Q))
    col.add(lhs - denominator_count(alpha, lambda q: True, Q), Q)
    return col.done()


# -- orthonormality and the kernel ------------------------------------------------------


def check_orthonormal(hmax: int = 40) -> CheckReport:
    """<f_beta, f_gamma> = delta_{beta gamma} for every pair with heights <= hmax."""
    col = _Collector("orthonormal", {"hmax": hmax})
    basis = [(b, f_beta(b)) for b in farey_by_height(hmax)]
    for i, (b1, g1) in enumerate(basis):
        for b2, g2 in basis[i:]:
            target = 1 if b1 == b2 else 0
            col.add(inner_product(g1, g2) - target, (str(b1), str(b2)))
    return col.done()


def _random_point(rng: random.Random, Q: int) -> Fraction:
    while True:
        x = Fraction(rng.randrange(1, 10**7), 10**7 + rng.randrange(0, 1000))
        if x.denominator > Q and 0 < x < 1:
            return x


def check_kernel(triples: int = 1000, Qmax: int = 50, seed: int = 0) -> CheckReport:
    """K_Q(x, y) by the component formula against the defining sum, random (x, y, Q).

    Half of the y values are chosen close to x so that both outcomes
    (shared component or not) occur.
    """
    col = _Collector("kernel", {"triples": triples, "Qmax": Qmax, "seed": seed})
    rng = random.Random(seed)
    for _ in range(triples):
        Q = rng.randint(1, Qmax)
        x = _random_point(rng, Q)
        if rng.random() < 0.5:
            y = _random_point(rng, Q)
        else:
            y = x + Fraction(rng.randrange(-10**4, 10**4), 10**9 + 7)
            if not 0 < y < 1 or y.denominator <= Q:
                y = _random_point(rng, Q)
        fast = kernel_value(x, y, Q)
        slow = kernel_value(x, y, Q, method="sum")
        col.add(fast - slow, (str(x), str(y), Q))
    return col.done()


# -- mean of X_q ----------------------------------------------------------------------


@lru_cache(maxsize=None)
def _harmonic_table(n: int) -> tuple:
    out = [Fraction(0)]
    for k in range(1, n + 1):
        out.append(out[-1] + Fraction(1, k))
    return tuple(out)


def harmonic(n: int) -> Fraction:
    size = 1
    while size < n:
        size *= 2
    return _harmonic_table(max(size, 64))[n]


def xq_integral_direct(q: int) -> Fraction:
    """sum over height-q points of 1/(h(beta') h(beta''))."""
    total = Fraction(0)
    for b in farey_points_of_height(q):
        left, right = neighbors(b)
        total += Fraction(1, left.den * right.den)
    return total


def xq_integral_coprime(q: int) -> Fraction:
    """sum_{1 <= a <= q, (a, q) = 1} 2/(a q)."""
    return sum((Fraction(2, a * q) for a in range(1, q + 1) if _gcd(a, q) == 1), Fraction(0))


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def xq_integral(q: int) -> Fraction:
    """sum_{(a,q)=1} 2/(a q) through the Mobius sum of harmonic numbers."""
    if q < 2:
        raise DomainError("the X_q mean is defined for q >= 2")
    s = sum((Fraction(mobius(d), d) * harmonic(q // d) for d in squarefree_divisors(q)), Fraction(0))
    return 2 * s / q


def xq_main_terms(q: int, dps: int = 40):
    """2 phi(q)/q^2 (log q + sum_{p|q} log p/(p-1) + Euler's constant)."""
    with mpmath.workdps(dps):
        s = mpmath.log(q) + mpmath.euler
        for p in prime_divisors(q):
            s += mpmath.log(p) / (p - 1)
        return 2 * euler_phi(q) * s / q**2


def xq_mean(q: int, dps: int = 40):
    """(exact, main_terms, error_scaled) for the mean of X_q.

    ``error_scaled`` is |exact - main_terms| q^2 / log log q, or None at q = 2
    where log log q is negative.
    """
    exact = xq_integral(q)
    with mpmath.workdps(dps):
        main = xq_main_terms(q, dps)
        err = abs(mpmath.mpf(exact.numerator) / exact.denominator - main)
        ll = mpmath.log(mpmath.log(q))
        scaled = err * q**2 / ll if ll > 0 else None
    return exact, main, scaled


def xq_error_sweep(q_lo: int = 100, q_hi: int = 10**4):
    """Rows (q, error_scaled) and the sup over the range."""
    rows = []
    sup = 0
    for q in range(q_lo, q_hi + 1):
        _, _, scaled = xq_mean(q, dps=30)
        rows.append((q, scaled))
        if scaled is not None and scaled > sup:
            sup = scaled
    return rows, sup


def check_xq_mean(q_lo: int = 100, q_hi: int = 10**4, gate: float = XQ_ERROR_GATE) -> CheckReport:
    col = _Collector("xq-mean", {"q_lo": q_lo, "q_hi": q_hi, "gate": gate})
    rows, sup = xq_error_sweep(q_lo, q_hi)
    for q, scaled in rows:
        col.add(0 if scaled is None or scaled < gate else scaled, q)
    col.report.info["sup"] = float(sup)
    return col.done()


# -- the Mobius identity -------------------------------------------------------------------


def mobius_log_sides(q: int) -> tuple[dict, dict]:
    """Coefficient vectors over log p of

        -sum_{d|q} mu(d) log d / d   and   phi(q)/q sum_{p|q} log p/(p-1).
    """
    lhs: dict = {}
    for d in divisors(q):
        mu = mobius(d)
        if not mu:
            continue
        for p in prime_divisors(d):
            lhs[p] = lhs.get(p, Fraction(0)) - Fraction(mu, d)
    ratio = Fraction(euler_phi(q), q)
    rhs = {p: ratio / (p - 1) for p in prime_divisors(q)}
    lhs = {p: c for p, c in lhs.items() if c}
    return lhs, rhs


def mobius_identity_check(q: int) -> CheckReport:
    col = _Collector("mobius", {"q": q})
    lhs, rhs = mobius_log_sides(q)
    for p in sorted(set(lhs) | set(rhs)):
        col.add(lhs.get(p, 0) - rhs.get(p, 0), (q, p))
    col.report.checked = max(col.report.checked, 1)
    return col.done()


def check_mobius_range(q_lo: int = 2, q_hi: int = 10**4) -> CheckReport:
    col = _Collector("mobius", {"q_lo": q_lo, "q_hi": q_hi})
    for q in range(q_lo, q_hi + 1):
        lhs, rhs = mobius_log_sides(q)
        for p in sorted(set(lhs) | set(rhs)):
            col.add(lhs.get(p, 0) - rhs.get(p, 0), (q, p))
    return col.done()


# -- the children example ---------------------------------------------------------------


def _lifted_neighbors(delta: FareyPoint):
    left, right = neighbors(delta)
    rpp, spp = (right.num, right.den) if not right.is_zero() else (1, 1)
    return (left.num, left.den), (delta.num, delta.den), (rpp, spp)


def ladders(delta: FareyPoint, M: int, N: int):
    """beta_m = (m r + r'')/(m s + s''), m = 0..M, and gamma_n = (n r + r')/(n s + s'), n = 0..N."""
    (rp, sp), (r, s), (rpp, spp) = _lifted_neighbors(delta)
    betas = [FareyPoint.of(m * r + rpp, m * s + spp) for m in range(M + 1)]
    gammas = [FareyPoint.of(n * r + rp, n * s + sp) for n in range(N + 1)]
    return betas, gammas


def _arc(a: FareyPoint, b: FareyPoint):
    I = ComponentInterval(a, b)
    return I.lo, I.hi


def example_closed_forms(delta: FareyPoint, M: int, N: int) -> tuple[StepFunction, StepFunction]:
    """The three-level closed forms of sum f_{beta_m} and sum f_{gamma_n}."""
    betas, gammas = ladders(delta, M, N)
    left, right = neighbors(delta)
    h = delta.den
    if M:
        lo, hi = _arc(delta, betas[M])
        lo2, hi2 = _arc(betas[M], right)
        beta_form = StepFunction.from_arcs([(lo, hi, M * h), (lo2, hi2, -right.den)])
    else:
        beta_form = StepFunction.constant(0)
    if N:
        lo, hi = _arc(gammas[N], delta)
        lo2, hi2 = _arc(left, gammas[N])
        gamma_form = StepFunction.from_arcs([(lo, hi, -N * h), (lo2, hi2, left.den)])
    else:
        gamma_form = StepFunction.constant(0)
    return beta_form, gamma_form


def check_example_section4(delta: FareyPoint, M: int = 3, N: int = 3, Q: int = 200) -> CheckReport:
    """Closed forms of the two ladder sums, the L^1 residual
    ||f_delta - children sums||_1 = 2/h(delta) and the bound 4/h(delta)."""
    if delta.is_zero():
        raise DomainError("the example needs a nonzero point")
    col = _Collector("example4", {"delta": str(delta), "M": M, "N": N, "Q": Q})
    betas, gammas = ladders(delta, M, N)
    left, right = neighbors(delta)
    col.add(0 if betas[0] == right and gammas[0] == left else 1, "ladder base")
    for b in betas[1:]:
        col.add(0 if neighbors(b)[0] == delta else 1, ("beta'", str(b)))
    for g in gammas[1:]:
        col.add(0 if neighbors(g)[1] == delta else 1, ("gamma''", str(g)))

    beta_form, gamma_form = example_closed_forms(delta, M, N)
    beta_sum = linear_combination((1, f_beta(b)) for b in betas[1:])
    gamma_sum = linear_combination((1, f_beta(g)) for g in gammas[1:])
    col.add(0 if beta_sum == beta_form else 1, "beta ladder closed form")
    col.add(0 if gamma_sum == gamma_form else 1, "gamma ladder closed form")

    kids = [b for b in farey_by_height(Q) if not b.is_zero() and delta in neighbors(b)]
    # neighbors(b) = (b', b''); b' = delta puts b on the beta ladder, b'' = delta on the gamma one
    T = linear_combination((1, f_beta(b)) for b in kids)
    residual = abs(f_beta(delta) - T).integral()
    col.add(residual - Fraction(2, delta.den), ("residual L1", Q))
    norm = abs(T).integral()
    col.add(0 if norm <= Fraction(4, delta.den) else norm, ("children L1", Q))
    col.report.info.update(residual_l1=residual, children_l1=norm)
    return col.done()


# -- Parseval deficits ---------------------------------------------------------------------


def psi_deficit_oracle(Q: int) -> Fraction:
    """||psi - E[psi | M_Q]||^2 from the components: psi has slope 1, so each
    component J contributes |J|^3/12."""
    pts = farey_sequence(Q)
    total = Fraction(0)
    for a, b in zip(pts, pts[1:] + [None]):
        h = a.den * (b.den if b is not None else 1)
        total += Fraction(1, 12 * h**3)
    return total


def parseval_deficits(norm_squared: Fraction, coefficient, Q_max: int) -> list[Fraction]:
    """[d(1), ..., d(Q_max)] with d(Q) = ||F||^2 - sum_{h(beta) <= Q} c(beta)^2."""
    out = []
    d = Fraction(norm_squared)
    for q in range(1, Q_max + 1):
        d -= sum((coefficient(b) ** 2 for b in farey_points_of_height(q)), Fraction(0))
        out.append(d)
    return out


def check_parseval(F, coefficient, Q_max: int, gate: Fraction, oracle=None, name: str = "F") -> CheckReport:
    """Deficits are nonnegative, non-increasing, below ``gate`` at Q_max, and
    equal ``oracle(Q_max)`` when an oracle is given."""
    if isinstance(F, PiecewiseLinear):
        norm = F.norm_squared()
    else:
        norm = inner_product(F, F)
    col = _Collector("parseval", {"F": name, "Q_max": Q_max, "gate": gate})
    ds = parseval_deficits(norm, coefficient, Q_max)
    prev = None
    for Q, d in enumerate(ds, start=1):
        col.add(0 if d >= 0 else d, ("negative", Q))
        if prev is not None:
            col.add(0 if d <= prev else d - prev, ("increase", Q))
        prev = d
    col.add(0 if ds[-1] < gate else ds[-1], ("gate", Q_max))
    if oracle is not None:
        col.add(ds[-1] - oracle(Q_max), ("oracle", Q_max))
    col.report.info["deficit"] = ds[-1]
    return col.done()


# -- stopping identity -------------------------------------------------------------------


def random_measurable_sets(rng: random.Random, Q: int) -> list[StepFunction]:
    """A_q = a random union of components of R/Z minus F_{q-1}, q = 1..Q."""
    sets = []
    for q in range(1, Q + 1):
        if q == 1:
            sets.append(StepFunction.constant(rng.randint(0, 1)))
            continue
        pts = [b.value for b in farey_sequence(q - 1)]
        arcs = []
        for lo, hi in zip(pts, pts[1:] + [Fraction(1)]):
            if rng.random() < 0.5:
                arcs.append((lo, hi, 1))
        sets.append(StepFunction.from_arcs(arcs))
    return sets


def check_stopping(instances: int = 100, Qmax: int = 25, seed: int = 0) -> CheckReport:
    """int (sum chi_{A_q} U_q)^2 = int sum chi_{A_q} U_q^2 on seeded random
    instances.  Sets come from eta_L, tau_L or random unions of components."""
    from .martingale import eta_sets, random_family, stopping_identity_sides, tau_sets

    col = _Collector("stopping", {"instances": instances, "Qmax": Qmax, "seed": seed})
    rng = random.Random(seed)
    for i in range(instances):
        c = random_family(rng.randrange(10**6))
        Q = rng.randint(1, Qmax)
        kind = ("eta", "tau", "random")[i % 3]
        if kind == "eta":
            sets = eta_sets(c, rng.randint(1, 12), Q)
        elif kind == "tau":
            sets = tau_sets(c, rng.randint(1, 60), Q)
        else:
            sets = random_measurable_sets(rng, Q)
        lhs, rhs = stopping_identity_sides(c, Q, sets)
        col.add(lhs - rhs, (i, c.name, Q, kind))
    return col.done()


def check_martingale(order: str, n_max: int, exhaustive: bool = False) -> CheckReport:
    """Martingale-difference property along an enumeration.  An inadmissible
    prefix raises NotAdmissibleError."""
    from .martingale import Enumeration, verify_martingale_differences

    e = Enumeration.parse(order)
    if e.kind == "custom":
        n_max = min(n_max, len(e.prefix))
    rep = verify_martingale_differences(e, n_max, exhaustive)
    col = _Collector("martingale", {"order": order, "n": n_max})
    col.report.checked = rep.checked
    if not rep.passed:
        col.add(1, (rep.failure_index, rep.failure))
    return col.done()
