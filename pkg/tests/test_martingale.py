import random
from fractions import Fraction

import pytest

from fareymart.contfrac import parse_alpha
from fareymart.errors import DomainError, NotAdmissibleError, PreconditionError
from fareymart.farey import FareyPoint, farey_by_height, farey_points_of_height, neighbors, s_value
from fareymart.martingale import (
    Enumeration,
    FareyPartition,
    S_function,
    T_function,
    U_function,
    U_values,
    children_partial_sums,
    conditional_expectation,
    delta_family,
    eta_sets,
    first_nonmeasurable,
    inner_product_family,
    is_admissible,
    one_family,
    parity_family,
    partial_sum_T,
    random_family,
    random_sign_family,
    stopped_sum,
    stopping_identity_check,
    stopping_identity_sides,
    stopping_time,
    tau_sets,
    u_sup_bounds,
    verify_martingale_differences,
)
from fareymart.stepfn import LQ_RQ, StepFunction, f_beta, kernel_section, inner_product

P = FareyPoint.parse


def pts(text):
    return [P(t) for t in text.split()]


def test_height_order_prefix():
    got = [str(b) for b in Enumeration("height").take(18)]
    assert got == "0/1 1/2 1/3 2/3 1/4 3/4 1/5 2/5 3/5 4/5 1/6 5/6 1/7 2/7 3/7 4/7 5/7 6/7".split()


def test_stern_brocot_prefix():
    got = [str(b) for b in Enumeration("stern-brocot").take(16)]
    assert got == "0/1 1/2 1/3 2/3 1/4 2/5 3/5 3/4 1/5 2/7 3/8 3/7 4/7 5/8 5/7 4/5".split()


def test_orders_are_monotone_and_complete():
    hs = [b.den for b in Enumeration("height").take(3000)]
    assert hs == sorted(hs)
    sb = Enumeration("stern-brocot").take(3000)
    ss = [s_value(b) for b in sb]
    assert ss == sorted(ss)
    assert len(set(sb)) == len(sb)
    # every point with s <= 12 appears before the first point with s = 13
    cut = ss.index(13)
    assert set(sb[:cut]) == {b for b in farey_by_height(233) if s_value(b) <= 12}


def test_admissibility_examples():
    assert is_admissible(pts("0/1 1/2 1/3 2/3"))
    bad = is_admissible(pts("0/1 1/3 1/2"))
    assert not bad and bad.index == 2 and bad.missing == P("1/2")
    first = is_admissible(pts("1/2 0/1"))
    assert not first and first.index == 1
    with pytest.raises(PreconditionError):
        is_admissible(pts("0/1 1/2 1/2"))


def test_measurability_iff_admissible():
    good = [Enumeration("height").take(60), Enumeration("stern-brocot").take(60)]
    for prefix in good:
        assert first_nonmeasurable(prefix) is None
    rng = random.Random(1)
    for _ in range(40):
        prefix = Enumeration("height").take(30)
        rest = prefix[1:]
        rng.shuffle(rest)
        prefix = [prefix[0]] + rest
        adm = is_admissible(prefix)
        bad = first_nonmeasurable(prefix)
        assert (bad is None) == bool(adm)
        if not adm:
            assert bad == adm.index


def test_containment_ordering():
    # beta_m inside I(beta_l', beta_l'') forces l < m
    for order in ("height", "stern-brocot"):
        prefix = Enumeration(order).take(500)
        for l, b in enumerate(prefix):
            if b.is_zero():
                continue
            left, right = neighbors(b)
            from fareymart.farey import ComponentInterval

            I = ComponentInterval(left, right)
            for m, g in enumerate(prefix):
                if g != b and I.contains(g.value) and g.value not in (left.value, right.value):
                    assert l < m


def test_partition_basics():
    part = FareyPartition.farey(3)
    assert part.measure_total() == 1
    assert len(part.components()) == 4
    assert FareyPartition.farey(0).components() == [(Fraction(0), Fraction(1))]


def test_conditional_expectation_examples():
    for b in list(farey_by_height(12))[1:]:
        f = f_beta(b)
        assert conditional_expectation(f, FareyPartition.farey(b.den - 1)) == StepFunction.constant(0)
        assert conditional_expectation(f, FareyPartition.farey(b.den)) == f
    c = StepFunction.constant(Fraction(7, 3))
    assert conditional_expectation(c, FareyPartition.farey(5)) == c


def test_conditional_expectation_equals_kernel_form():
    g = f_beta(P("2/7")) * 3 + f_beta(P("3/11")) - f_beta(P("1/13"))
    rng = random.Random(2)
    for Q in (1, 4, 9, 12):
        E = conditional_expectation(g, FareyPartition.farey(Q))
        for _ in range(10):
            x = Fraction(rng.randrange(1, 10**6), 10**6 + 3)
            assert E(x) == inner_product(kernel_section(x, Q), g)


@pytest.mark.parametrize("order", ["height", "stern-brocot"])
def test_martingale_differences_pass(order):
    rep = verify_martingale_differences(Enumeration(order), 300)
    assert rep.passed and rep.checked == 299
    assert verify_martingale_differences(Enumeration(order), 80, exhaustive=True).passed


def test_martingale_differences_bad_prefix():
    with pytest.raises(NotAdmissibleError) as err:
        verify_martingale_differences(Enumeration.custom(["0/1", "1/2", "1/4"]), 3)
    assert err.value.index == 3 and err.value.missing == P("1/3")


def test_partial_sum_examples():
    a = parse_alpha("sqrt(2)-1")
    F = f_beta(P("1/2"))
    fam = inner_product_family(F)
    for Q in (2, 5, 9):
        assert partial_sum_T(fam, Q, a) == 1
        x = Fraction(1, 10**6 + 3)
        assert partial_sum_T(fam, Q, x) == F(x)
    for Q in (3, 7, 50, 500):
        assert partial_sum_T(delta_family(P("1/3")), Q, a) == -2
    for text in ["sqrt(2)-1", "golden", "rand(seed=3,bound=9)"]:
        s = parse_alpha(text)
        for Q in (1, 2, 10, 97, 1000):
            L, R = LQ_RQ(s, Q)
            assert partial_sum_T(one_family(), Q, s) == R - L + 1


def test_rational_point_must_avoid_F_Q():
    with pytest.raises(DomainError):
        partial_sum_T(one_family(), 5, Fraction(2, 5))


def test_stream_and_surrogate_agree():
    fam = random_family(4)
    for text in ["sqrt(3)-1", "rand(seed=8,bound=9)"]:
        a = parse_alpha(text)
        for Q in (1, 6, 30):
            assert partial_sum_T(fam, Q, a) == T_function(fam, Q)(a.surrogate(Q))


def test_T_equals_S_at_farey_counts():
    fam = random_family(9)
    e = Enumeration("height")
    N = 0
    for Q in range(1, 16):
        N += len(farey_points_of_height(Q))
        assert T_function(fam, Q) == S_function(fam, e, N)


def test_martingale_property_of_partial_sums():
    for seed in range(3):
        fam = random_family(seed)
        prev = T_function(fam, 1)
        for Q in range(1, 61):
            nxt = prev + U_function(fam, Q + 1)
            assert conditional_expectation(nxt, FareyPartition.farey(Q)) == prev
            prev = nxt


def test_u_sup_bounds():
    for fam in (random_family(2), parity_family(), random_sign_family(5)):
        for q in range(2, 101):
            lo, sup, hi = u_sup_bounds(fam, q)
            assert lo <= sup <= hi


def test_stopped_sum_examples():
    fam = parity_family()
    x = Fraction(123457, 10**6 + 3)
    Q = 40
    assert stopped_sum(fam, Q, x, ("abs_bound", 10**9)) == partial_sum_T(fam, Q, x)
    assert stopped_sum(fam, 1, x, ("abs_bound", Fraction(1, 100))) == fam(FareyPoint.of(0))
    L = Fraction(3, 2)
    t, first = Fraction(0), None
    for q, u in enumerate(U_values(fam, Q, x), start=1):
        t += u
        if first is None and abs(t) >= L:
            first = q
    assert stopping_time(fam, Q, x, ("abs_bound", L)) == first


def test_stopped_sum_bound():
    # |T^(eta_L)| <= L + max_q sup|U_q|
    fam = random_family(6, bound=2)
    L = 5
    M = max(U_function(fam, q).sup_abs() for q in range(1, 21))
    rng = random.Random(0)
    for _ in range(40):
        x = Fraction(rng.randrange(1, 10**6), 10**6 + 3)
        assert abs(stopped_sum(fam, 20, x, ("abs_bound", L))) <= L + M


def test_stopping_identity_cases():
    fam = random_family(1)
    Q = 10
    full = [StepFunction.constant(1)] * Q
    lhs, rhs = stopping_identity_sides(fam, Q, full)
    assert lhs == rhs == inner_product(T_function(fam, Q), T_function(fam, Q))
    assert stopping_identity_sides(fam, Q, [StepFunction.constant(0)] * Q) == (0, 0)
    assert stopping_identity_check(fam, Q, eta_sets(fam, 3, Q))
    assert stopping_identity_check(fam, Q, tau_sets(fam, 20, Q))
    bad = [StepFunction.constant(1)] * Q
    bad[2] = StepFunction.from_arcs([(Fraction(1, 5), Fraction(1, 4), 1)])
    with pytest.raises(PreconditionError):
        stopping_identity_check(fam, Q, bad)


def test_children_partial_sums_closed_under_ladder():
    d = P("2/5")
    T = children_partial_sums(d, 40)
    assert (f_beta(d) - T).__abs__().integral() == Fraction(2, 5)
