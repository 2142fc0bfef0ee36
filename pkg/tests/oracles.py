"""Brute-force reference computations used by the tests.

These deliberately avoid the package's algorithms: Farey sets come from a
sorted set of all fractions, neighbors from scanning, components from
scanning, and basis values from the defining three-level rule.
"""

from fractions import Fraction
from math import gcd


def farey_fractions(Q):
    """Sorted reduced fractions a/q in [0, 1) with q <= Q."""
    return sorted({Fraction(a, q) for q in range(1, Q + 1) for a in range(q)})


def scan_neighbors(beta):
    """Left and right neighbors of beta in F_{h(beta)} on the circle."""
    q = beta.denominator
    F = farey_fractions(q)
    i = F.index(beta)
    left = F[i - 1]
    right = F[(i + 1) % len(F)]
    return left, right


def scan_component(x, Q):
    """(left, right) endpoints of the arc of R/Z minus F_Q holding x, as
    fractions in [0, 1); the right endpoint 1 is reported as 0."""
    F = farey_fractions(Q)
    if x in F:
        raise ValueError("x lies in F_Q")
    below = [f for f in F if f < x]
    above = [f for f in F if f > x]
    return below[-1], (above[0] if above else Fraction(0))


def scan_sigma(x, y, Qmax=200):
    for Q in range(1, Qmax + 1):
        if scan_component(x, Q) != scan_component(y, Q):
            return Q
    return None


def brute_f(beta, x):
    """f_beta at a point x that is not a breakpoint, from the definition."""
    if beta == 0:
        return Fraction(1)
    l, r = scan_neighbors(beta)
    hl, hr = l.denominator, r.denominator

    def inside(lo, hi, t):
        # open arc from lo to hi going upward, wrapping past 1
        if lo < hi:
            return lo < t < hi
        return t > lo or t < hi

    if inside(l, beta, x):
        return Fraction(hl)
    if inside(beta, r, x):
        return Fraction(-hr)
    return Fraction(0)


def euclid_quotients(a, q):
    out = []
    while a:
        out.append(q // a)
        a, q = q % a, a
    return out


def ladder_by_recursion(quotients, Qmax):
    """All (m q_{n-1} + q_{n-2}) <= Qmax from the raw recursion, with the
    matching numerators."""
    p2, q2, p1, q1 = 1, 0, 0, 1  # p_{-1}, q_{-1}, p_0, q_0
    out = []
    for a in quotients:
        for m in range(1, a + 1):
            if m * q1 + q2 > Qmax:
                return out
            out.append((m * p1 + p2, m * q1 + q2))
        p2, q2, p1, q1 = p1, q1, a * p1 + p2, a * q1 + q2
    return out


def brute_locate(quotients, Q):
    """(M, N) from scanning every (m, n) pair: the last ladder entry <= Q."""
    p2, q2, p1, q1 = 1, 0, 0, 1
    best = None
    for n, a in enumerate(quotients, start=1):
        for m in range(1, a + 1):
            if m * q1 + q2 <= Q:
                best = (m, n)
        p2, q2, p1, q1 = p1, q1, a * p1 + p2, a * q1 + q2
    return best


def mobius(n):
    res, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            res = -res
        p += 1
    return -res if n > 1 else res


def coprime_range(q):
    return [a for a in range(1, q + 1) if gcd(a, q) == 1]
