"""Oracle sweeps that fix the two calibrated gates in fareymart.verify.

The X_q mean is recomputed here by direct summation of 2/(a q) in
high-precision floating point, independent of the exact Mobius route used
by the package.  The psi deficit oracle sums |J|^3/12 over the components
of R/Z minus F_Q in floating point.

Run:  python3 scripts/calibrate_gates.py [q_hi]
"""

import math
import sys

import mpmath


def phi_and_primes(q):
    primes, n, p = [], q, 2
    while p * p <= n:
        if n % p == 0:
            primes.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        primes.append(n)
    phi = q
    for p in primes:
        phi = phi // p * (p - 1)
    return phi, primes


def xq_direct(q):
    return math.fsum(2.0 / (a * q) for a in range(1, q + 1) if math.gcd(a, q) == 1)


def main_terms(q):
    phi, primes = phi_and_primes(q)
    s = mpmath.log(q) + mpmath.euler + sum(mpmath.log(p) / (p - 1) for p in primes)
    return 2 * phi * s / q**2


def xq_sweep(q_lo=100, q_hi=10**4):
    mpmath.mp.dps = 30
    best, arg = 0.0, None
    for q in range(q_lo, q_hi + 1):
        err = abs(mpmath.mpf(xq_direct(q)) - main_terms(q)) * q**2 / mpmath.log(mpmath.log(q))
        if err > best:
            best, arg = float(err), q
    return best, arg


def psi_deficit(Q):
    # consecutive pairs of F_Q by the next-term recurrence
    a, b, c, d = 0, 1, 1, Q
    total = []
    while c <= Q:
        total.append(1.0 / (12 * (b * d) ** 3))
        k = (Q + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
    return math.fsum(total)


if __name__ == "__main__":
    q_hi = int(sys.argv[1]) if len(sys.argv) > 1 else 10**4
    sup, arg = xq_sweep(100, q_hi)
    print(f"xq error_scaled sup over 100..{q_hi}: {sup:.6f} at q={arg}")
    print(f"psi Parseval deficit at Q=1000: {psi_deficit(1000):.6e}")
