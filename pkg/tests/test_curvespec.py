from fractions import Fraction

import mpmath as mp
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from regverify.curvespec import (IntPoly, NotOnUnitCircle, OrderBoundExceeded, ParamError, ParityError,
                                 RepeatedRootError, NoRealRootInUnitIntervalError, aberth_roots, build_curve,
                                 check_assumptions, curve_from_json, genus, is_all_roots_of_unity, preset,
                                 sturm_count, sup_abs_on)
from regverify.hiprec import PrecisionContext

CTX = PrecisionContext.for_digits(30)
EX2_VALID = [(2, 1), (3, 1), (6, 3), (7, 3), (8, 3), (10, 5), (11, 5)]
EX2_SIDE_CONDITION_FAILS = [(4, 1), (5, 1), (9, 3)]


def cyclotomic_product(orders):
    p = IntPoly([1])
    for m in orders:
        p = p * IntPoly([-1] + [0] * (m - 1) + [1])
    return p


def test_intpoly_arithmetic():
    a, b = IntPoly([1, 2]), IntPoly([-1, 0, 1])
    assert (a * b).coeffs == (-1, -2, 1, 2)
    assert (a + b).coeffs == (0, 2, 1)
    assert (b - b).coeffs == (0,)
    assert b.derivative().coeffs == (0, 2)
    q, r = (a * b + IntPoly([3])).divmod_monic(b)
    assert q.coeffs == (1, 2) and r.coeffs == (3,)
    assert a(3) == 7


def test_aberth_reconstructs_polynomial():
    f = IntPoly([0, -1, 0, 1, 1])
    with CTX.workprec():
        roots = aberth_roots(f, CTX)
        prod = [mp.mpf(1)]
        for r in roots:
            prod = [mp.mpf(0)] + prod
            for i in range(len(prod) - 1):
                prod[i] -= r * prod[i + 1]
        for c, ref in zip(prod, f.coeffs):
            assert abs(c - ref) < mp.ldexp(1, -CTX.prec_bits + 16)


def test_build_curve_examples():
    curve = build_curve(2, IntPoly([0, -1, 0, 1, 1]), CTX)
    with CTX.workprec():
        assert abs(curve.lambda_last - mp.mpf("0.7548776662466927600495")) < mp.mpf(10) ** -20
        assert sum(1 for lam in curve.lambdas if mp.im(lam) != 0) == 2
    curve = build_curve(3, IntPoly([0, -1, 1, 1]), CTX)
    with CTX.workprec():
        s5 = mp.sqrt(5)
        assert abs(curve.lambdas[0] + (1 + s5) / 2) < mp.mpf(10) ** -30
        assert abs(curve.lambdas[1] + (1 - s5) / 2) < mp.mpf(10) ** -30
    assert build_curve(2, IntPoly([0, -1, 1]), CTX).lambdas == [1]


def test_build_curve_errors():
    with pytest.raises(RepeatedRootError):
        build_curve(2, IntPoly([0, 1, -2, 1]), CTX)
    with pytest.raises(NoRealRootInUnitIntervalError):
        build_curve(2, IntPoly([0, 2, 0, 1]), CTX, strict=True)


def test_roots_of_unity_examples():
    cert = is_all_roots_of_unity(IntPoly.from_sympy((sympy.Symbol("T") + 1) ** 2 * (sympy.Symbol("T") - 1)))
    assert sorted(cert.orders) == [1, 2, 2]
    T = sympy.Symbol("T")
    cert = is_all_roots_of_unity(IntPoly.from_sympy((T ** 3 - 1) * (T + 1)))
    assert sorted(cert.orders) == [1, 2, 3, 3]
    with pytest.raises(NotOnUnitCircle):
        is_all_roots_of_unity(IntPoly([-1, -1, 1]))


def test_order_bound():
    with pytest.raises(OrderBoundExceeded):
        is_all_roots_of_unity(cyclotomic_product([13]), max_order=6)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(min_value=1, max_value=12), min_size=1, max_size=4))
def test_cyclotomic_products_certified_exactly(orders):
    phi = cyclotomic_product(orders)
    cert = is_all_roots_of_unity(phi)
    assert len(cert.orders) == phi.degree
    # the witness divides exactly
    prod = IntPoly([1])
    for m, e in cert.exponents.items():
        for _ in range(e):
            prod = prod * IntPoly([-1] + [0] * (m - 1) + [1])
    assert prod == phi * cert.quotient


@pytest.mark.parametrize("n", range(2, 7))
def test_ex1_family_passes(n):
    N, f = preset("ex1", n)
    report = check_assumptions(build_curve(N, f, CTX, strict=True), CTX)
    assert report.passed, report.as_dict()
    assert report.certificate is not None


@pytest.mark.parametrize("n,l", EX2_VALID)
def test_ex2_family_passes(n, l):
    N, f = preset("ex2", n, l)
    report = check_assumptions(build_curve(N, f, CTX, strict=True), CTX)
    assert report.passed, report.as_dict()


@pytest.mark.parametrize("n,l", EX2_SIDE_CONDITION_FAILS)
def test_ex2_outside_side_condition_fails_boundedness(n, l):
    N, f = preset("ex2", n, l)
    assert abs(f(Fraction(n + 1 - 2 * l, n + 1))) >= 1
    report = check_assumptions(build_curve(N, f, CTX, strict=True), CTX)
    assert report.roots_of_unity and not report.bounded_on_unit_interval


def test_ex2_side_condition_is_the_critical_value():
    n, l = 3, 1
    N, f = preset("ex2", n, l)
    c = Fraction(n + 1 - 2 * l, n + 1)
    assert abs(f(c)) < 1
    with CTX.workprec():
        assert sup_abs_on(f, 0, Fraction(99, 100), CTX) < 1


def test_check_assumptions_reports_failure():
    # f = T^2 - T: Phi = T^2 - T - 1 has the golden ratio as a root
    report = check_assumptions(build_curve(2, IntPoly([0, -1, 1]), CTX), CTX)
    assert not report.passed
    assert not report.roots_of_unity
    assert "NotOnUnitCircle" in report.witnesses["roots_of_unity_failure"]


def test_preset_values():
    assert preset("ex1", 3)[1].coeffs == (0, -1, 0, 1, 1)
    assert preset("ex2", 3, 1)[1].coeffs == (0, -2, 0, 2, 1)
    assert preset("ex1", 2)[1].coeffs == (0, -1, 1, 1)
    with pytest.raises(ParamError):
        preset("ex2", 3, 2)
    with pytest.raises(ParamError):
        preset("ex2", 3, 3)


def test_genus():
    assert genus(2, 2) == 1 and genus(3, 2) == 1 and genus(2, 3) == 1
    assert genus(2, 4) == 2
    assert genus(4, 2) == 3


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=2, max_value=12), st.integers(min_value=1, max_value=12))
def test_genus_identity(N, n):
    import math
    twice = (N - 1) * n - math.gcd(N, n + 1) + 1
    if twice % 2:
        with pytest.raises(ParityError):
            genus(N, n)
    else:
        assert 2 * genus(N, n) == twice


def test_sturm_count():
    p = IntPoly([-1, 0, 1]).to_sympy()
    assert sturm_count(p, Fraction(-2), Fraction(2)) == 2
    assert sturm_count(p, Fraction(0), Fraction(1)) == 1


def test_sampled_sup_below_one_on_passing_curves():
    for n in range(2, 6):
        N, f = preset("ex1", n)
        with CTX.workprec():
            assert max(abs(f(mp.mpf(j) / 4096)) for j in range(4096)) < 1


def test_curve_from_json(tmp_path):
    assert curve_from_json({"N": 3, "f": [0, -1, 1, 1]})[1].coeffs == (0, -1, 1, 1)
    path = tmp_path / "c.json"
    path.write_text('{"preset": {"family": "ex2", "n": 3, "l": 1}}')
    assert curve_from_json(path)[1].coeffs == (0, -2, 0, 2, 1)
