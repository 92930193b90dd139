import mpmath as mp
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from regverify.curvespec import build_curve, check_assumptions, preset
from regverify.hiprec import PrecisionContext
from regverify.regulator import (IDENTITY, Automorphism, CycleSpec, HypothesisError, SingularityOnPathError, SymbolSpec,
                                 X, Y, beta_k_certificate, curve_for_case, reg_direct, reg_matrix, reg_series,
                                 reg_term_integral, reg_term_integral_sum, root_of_unity_map, series_amplitudes,
                                 series_truncation, standard_symbol)

CTX = PrecisionContext.for_digits(20)
E23 = "-0.47095904334493274691418567400102924042656389674994"
E23P = "-0.66881964039649037504127102520475989774413452667566"
E24_XI_DPRIME = "-0.25869891405241850202655302706581105434092244125967"
E24_ETA_DELTA = "0.28090959342921653089311129619302051571945475691571"


def digits_of(value, ref):
    with mp.workdps(60):
        return float(-mp.log10(abs(mp.mpf(value) - mp.mpf(ref)) / abs(mp.mpf(ref))))


def passing_curve(family, n, N, l=None, ctx=CTX):
    N, f = preset(family, n, l, N)
    curve = build_curve(N, f, ctx, strict=True)
    curve.certificate = check_assumptions(curve, ctx)
    assert curve.certificate.passed
    return curve


@pytest.fixture(scope="module")
def e23():
    return curve_for_case("e23", CTX)


def test_series_reproduces_reference_values():
    ctx = PrecisionContext.for_digits(25)
    assert digits_of(reg_series(curve_for_case("e23", ctx), ctx), E23) >= 25
    assert digits_of(reg_series(curve_for_case("e23p", ctx), ctx), E23P) >= 25


def test_three_way_agreement(e23):
    a = reg_series(e23, CTX)
    b = reg_term_integral_sum(e23, CTX)
    c = reg_direct(e23, standard_symbol("1-Y", 2), CycleSpec("delta"), CTX)
    tol = mp.mpf(10) ** -15
    assert abs(a - b) < tol and abs(a - c) < tol and abs(b - c) < tol


def test_term_vanishes_when_N_divides_k(e23):
    assert reg_term_integral(e23, 2, CTX) == 0
    assert reg_term_integral(e23, 6, CTX) == 0


def test_first_term_matches_series_summand(e23):
    amps = series_amplitudes(e23, CTX)
    with CTX.workprec():
        summand = -amps[0] * mp.sinpi(mp.mpf(1) / 2) / (2 * mp.pi)
        assert abs(reg_term_integral(e23, 1, CTX) - summand) < mp.mpf(10) ** -20


def test_partial_sums_within_tail_bound(e23):
    full = reg_series(e23, CTX)
    amps = series_amplitudes(e23, CTX)
    with CTX.workprec():
        for tol in ("1e-4", "1e-8", "1e-12"):
            K, bound = series_truncation(e23, mp.mpf(tol), CTX)
            partial = -mp.fsum(a * mp.sinpi(mp.mpf(k) / 2) for k, a in enumerate(amps[:K], start=1)) / (2 * mp.pi)
            assert abs(partial - full) <= bound / (2 * mp.pi) + mp.mpf(10) ** -20


def test_values_are_real_and_refinement_stable(e23):
    info = {}
    reg_series(e23, CTX, info=info)
    assert info["max_imag"] < mp.mpf(10) ** -(CTX.digits - 3)
    info = {}
    reg_direct(e23, standard_symbol("1-Y", 2), CycleSpec("delta"), CTX, info=info)
    assert info["imag"] < mp.mpf(10) ** -(CTX.digits - 3)
    assert info["refinement_change"] < mp.mpf(10) ** -(CTX.digits - 5)
    assert info["winding"] is None or abs(info["winding"]) < 1e-6


def test_e24_entries_by_direct_integration():
    curve = curve_for_case("e24", CTX)
    v = reg_direct(curve, standard_symbol("1-Y", 2), CycleSpec("delta_prime"), CTX)
    assert digits_of(v, E24_XI_DPRIME) >= 18
    v = reg_direct(curve, standard_symbol("Y-X^N", 2), CycleSpec("delta"), CTX)
    assert digits_of(v, E24_ETA_DELTA) >= 18


def test_e24_matrix_determinant():
    M = reg_matrix("e24", CTX)
    assert digits_of(M.determinant, "0.44889338217039979100950815236832711055130985508762") >= 16
    assert digits_of(M.entries[1][0], E24_ETA_DELTA) >= 18
    assert digits_of(M.entries[0][1], E24_XI_DPRIME) >= 18


def test_e32k_matrix_structure():
    M = reg_matrix("e32k", CTX)
    assert abs(M.entries[0][1]) < 1e-15 and abs(M.entries[1][0]) < 1e-15
    assert abs(M.entries[1][1] - M.entries[0][0]) < mp.mpf(10) ** -15
    assert abs(M.extra["raw_entries"][1][1] + 3 * M.entries[0][0]) < mp.mpf(10) ** -15
    assert M.checks["adjunction"] < mp.mpf(10) ** -15


def test_automorphism_composition():
    sigma = Automorphism("sigma", -1 / X, Y / X)
    sq = sigma @ sigma
    assert sympy.simplify(sq.x - X) == 0 and sympy.simplify(sq.y + Y) == 0
    four = sigma.power(4)
    assert sympy.simplify(four.x - X) == 0 and sympy.simplify(four.y - Y) == 0
    zeta = root_of_unity_map(3)
    assert sympy.simplify(zeta.power(3).y - Y) == 0
    assert (sigma @ IDENTITY).x == sigma.x


def test_pullback_substitutes():
    sigma = Automorphism("sigma", -1 / X, Y / X)
    (c, f, g), = standard_symbol("1-Y", 4).pullback(sigma).terms
    assert c == 1
    assert sympy.simplify(f - (1 - Y / X)) == 0 and sympy.simplify(g + 1 / X) == 0


def test_cycle_and_symbol_validation():
    with pytest.raises(ValueError):
        CycleSpec("gamma")
    with pytest.raises(ValueError):
        CycleSpec("delta") - CycleSpec("delta_prime")
    with pytest.raises(ValueError):
        standard_symbol("X", 2)
    d = CycleSpec("delta") - CycleSpec("delta").pushforward(root_of_unity_map(3))
    assert [c for c, _ in d.terms] == [1, -1]


def test_failing_curve_is_rejected():
    N, f = preset("ex2", 4, 1, 2)
    curve = build_curve(N, f, CTX)
    with pytest.raises(HypothesisError):
        reg_series(curve, CTX)
    with pytest.raises(HypothesisError):
        beta_k_certificate(curve, CTX)


def test_singular_symbol_on_path(e23):
    with pytest.raises(SingularityOnPathError):
        reg_direct(e23, SymbolSpec.pair(X - sympy.Rational(1, 3), X), CycleSpec("delta"), CTX)


def test_delta_prime_needs_one_negative_root(e23):
    # the e23 curve has a single real branch point, at a positive value
    with pytest.raises(SingularityOnPathError):
        reg_direct(e23, standard_symbol("1-Y", 2), CycleSpec("delta_prime"), CTX)


@pytest.mark.parametrize("family,n,N", [("ex1", 3, 2), ("ex1", 2, 2), ("ex1", 2, 3)])
def test_beta_certificate(family, n, N):
    curve = passing_curve(family, n, N)
    cert = beta_k_certificate(curve, CTX)
    assert len(cert.betas) == 2 * N
    assert all(cert.betas[i] > cert.betas[i + 1] for i in range(2 * N - 1)) and cert.betas[-1] > 0
    assert abs(cert.resummed - reg_series(curve, CTX)) < mp.mpf(10) ** -17
    assert cert.lower_bound > 0


FAST_CURVES = [("ex1", n, None, N) for n in (2, 3, 4) for N in (2, 3, 4, 5)] + [("ex2", 6, 3, N) for N in (2, 3)]


@settings(max_examples=8, deadline=None)
@given(st.sampled_from(FAST_CURVES))
def test_series_is_negative(case):
    family, n, l, N = case
    ctx = PrecisionContext.for_digits(15)
    assert reg_series(passing_curve(family, n, N, l, ctx), ctx) < 0
