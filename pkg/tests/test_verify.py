from fractions import Fraction

import mpmath
import pytest

from fareymart import verify as vf
from fareymart.contfrac import parse_alpha
from fareymart.errors import DomainError, PreconditionError
from fareymart.farey import FareyPoint
from fareymart.martingale import FareyPartition, conditional_expectation, psi_coefficient
from fareymart.stepfn import PiecewiseLinear, StepFunction, f_beta, inner_product, psi

from oracles import coprime_range

P = FareyPoint.parse


def test_xq_mean_examples():
    assert vf.xq_mean(2)[0] == 1
    assert vf.xq_mean(3)[0] == 1
    assert vf.xq_mean(4)[0] == Fraction(2, 3)
    assert vf.xq_mean(2)[2] is None
    with pytest.raises(DomainError):
        vf.xq_mean(1)


def test_xq_three_routes_agree():
    for q in range(2, 300):
        direct = sum(Fraction(2, a * q) for a in coprime_range(q))
        assert vf.xq_integral(q) == direct == vf.xq_integral_direct(q) == vf.xq_integral_coprime(q)


def test_xq_main_terms_value():
    # 2 phi(q)/q^2 (log q + sum log p/(p-1) + gamma) for q = 12
    with mpmath.workdps(30):
        want = 2 * 4 * (mpmath.log(12) + mpmath.log(2) + mpmath.log(3) / 2 + mpmath.euler) / 144
        assert abs(vf.xq_main_terms(12) - want) < mpmath.mpf(10) ** -25


def test_harmonic_numbers():
    assert vf.harmonic(1) == 1
    assert vf.harmonic(4) == Fraction(25, 12)
    assert vf.harmonic(1000) == sum(Fraction(1, k) for k in range(1, 1001))


def test_mobius_examples():
    lhs, rhs = vf.mobius_log_sides(12)
    assert lhs == rhs == {2: Fraction(1, 3), 3: Fraction(1, 6)}
    for p in (2, 3, 5, 97):
        lhs, rhs = vf.mobius_log_sides(p)
        assert lhs == rhs == {p: Fraction(1, p)}
    assert vf.mobius_log_sides(1) == ({}, {})
    assert vf.mobius_identity_check(360).passed


def test_ladder_check_precondition():
    with pytest.raises(PreconditionError):
        vf.check_theorem1(parse_alpha("3/7"), 3)


def test_ladder_check_examples():
    assert vf.check_theorem1(parse_alpha("sqrt(2)-1"), 10).passed
    g = parse_alpha("golden")
    assert all(len(g.intermediate_set(n)) == 1 for n in range(1, 16))
    assert vf.check_theorem1(g, 15).passed


def test_checkers_catch_a_wrong_ladder(monkeypatch):
    import fareymart.verify as mod

    real = mod.evaluate_at_stream
    monkeypatch.setattr(mod, "evaluate_at_stream", lambda b, a: real(b, a) + (1 if b == P("2/5") else 0))
    rep = vf.check_theorem1(parse_alpha("sqrt(2)-1"), 4)
    assert not rep.passed and "2/5" in str(rep.counterexample)
    assert not vf.check_lr(parse_alpha("sqrt(2)-1"), [10]).passed


def test_lr_and_denominator_count_checks():
    for text in ["sqrt(2)-1", "golden", "rand(seed=6,bound=9)"]:
        a = parse_alpha(text)
        assert vf.check_lr(a, [1, 2, 3, 10, 37, 60]).passed
        for Q in (1, 5, 50, 300):
            assert vf.check_theorem5(a, Q).passed


def test_orthonormal_small_and_failing_case(monkeypatch):
    assert vf.check_orthonormal(12).passed
    import fareymart.verify as mod

    monkeypatch.setattr(mod, "inner_product", lambda a, b: Fraction(0))
    assert not vf.check_orthonormal(3).passed


def test_kernel_check_hits_both_cases():
    import random

    from fareymart.stepfn import kernel_value

    rep = vf.check_kernel(60, 20, seed=4)
    assert rep.passed and rep.checked == 60
    rng = random.Random(4)
    hits = set()
    for _ in range(60):
        Q = rng.randint(1, 20)
        x = vf._random_point(rng, Q)
        y = x + Fraction(1, 10**9)
        hits.add(kernel_value(x, y, Q) != 0)
        hits.add(kernel_value(x, Fraction(1, 2) + x / 4, Q) != 0)
    assert hits == {True, False}


def test_children_example():
    rep = vf.check_example_section4(P("1/2"), 3, 3, 50)
    assert rep.passed
    rep = vf.check_example_section4(P("1/3"), 2, 5, 50)
    assert rep.passed and rep.info["residual_l1"] == Fraction(2, 3)
    assert vf.check_example_section4(P("2/5"), 0, 0, 10).passed
    with pytest.raises(DomainError):
        vf.check_example_section4(P("0/1"))


def test_ladder_closed_forms_for_half():
    bf, gf = vf.example_closed_forms(P("1/2"), 3, 3)
    betas, gammas = vf.ladders(P("1/2"), 3, 3)
    assert [str(b) for b in betas] == ["0/1", "2/3", "3/5", "4/7"]
    assert [str(g) for g in gammas] == ["0/1", "1/3", "2/5", "3/7"]
    assert bf(Fraction(13, 24)) == 6 and bf(Fraction(3, 4)) == -1 and bf(Fraction(1, 4)) == 0
    assert gf(Fraction(11, 24)) == -6 and gf(Fraction(1, 4)) == 1


def _projection_deficit(F, Q):
    # ||F||^2 - ||E[F | M_Q]||^2, with E computed component by component
    E = conditional_expectation(F, FareyPartition.farey(Q))
    norm = F.norm_squared() if isinstance(F, PiecewiseLinear) else inner_product(F, F)
    return norm - inner_product(E, E)


def test_parseval_oracles():
    s = psi()
    for Q in range(1, 12):
        ds = vf.parseval_deficits(s.norm_squared(), lambda b: inner_product(s, f_beta(b)), Q)
        assert ds[-1] == vf.psi_deficit_oracle(Q) == _projection_deficit(s, Q)
    chi = StepFunction.from_arcs([(0, Fraction(1, 2), 1)])
    ds = vf.parseval_deficits(inner_product(chi, chi), lambda b: inner_product(chi, f_beta(b)), 20)
    assert ds[0] == Fraction(1, 4) and all(d == 0 for d in ds[1:])
    rep = vf.check_parseval(chi, lambda b: inner_product(chi, f_beta(b)), 20, vf.PARSEVAL_GATE, name="chi")
    assert rep.passed


def test_parseval_psi_moderate():
    rep = vf.check_parseval(psi(), psi_coefficient, 200, vf.PARSEVAL_GATE, vf.psi_deficit_oracle, "psi")
    assert rep.passed and 0 < rep.info["deficit"] < Fraction(1, 10**6)


def test_stopping_and_martingale_checkers():
    assert vf.check_stopping(6, 10, seed=3).passed
    assert vf.check_martingale("height", 100).passed


def test_random_measurable_sets_are_measurable():
    import random

    sets = vf.random_measurable_sets(random.Random(0), 12)
    for q, A in enumerate(sets, start=1):
        assert FareyPartition.farey(q - 1).is_measurable(A)
        assert set(A.values) <= {0, 1}
