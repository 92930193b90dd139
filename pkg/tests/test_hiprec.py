import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regverify.hiprec import (DomainError, PoleError, PrecisionContext, StepTooLargeError, NoConvergenceError,
                              bessel_k0, beta, gamma, log_tracked, pow_principal, tanh_sinh_quadrature,
                              upper_incomplete_gamma)

CTX = PrecisionContext.for_digits(30)


def test_context_validation():
    with pytest.raises(ValueError):
        PrecisionContext(32)
    ctx = PrecisionContext.for_digits(20)
    assert ctx.digits >= 20
    assert ctx.raised(64).prec_bits == ctx.prec_bits + 64


def test_gamma_values_and_poles():
    with CTX.workprec():
        assert abs(gamma(mp.mpf(1) / 2, CTX) - mp.sqrt(mp.pi)) < mp.mpf(10) ** -35
    assert gamma(5, CTX) == 24
    for z in (0, -1, -7):
        with pytest.raises(PoleError):
            gamma(z, CTX)


def test_beta_pole():
    with pytest.raises(PoleError):
        beta(-1, mp.mpf("0.5"), CTX)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.01, max_value=20))
def test_beta_half_shift_identity(x):
    with CTX.workprec():
        x = mp.mpf(x)
        assert abs(beta(x, x + 1, CTX) - beta(x, x, CTX) / 2) <= mp.mpf(10) ** -30 * abs(beta(x, x, CTX))


def test_pow_principal_branch():
    with CTX.workprec():
        v = pow_principal(mp.mpf(-1), mp.mpf(1) / 2, CTX)
        assert abs(v - 1j) < mp.mpf(10) ** -35
        assert pow_principal(0, 2, CTX) == 0
    with pytest.raises(DomainError):
        pow_principal(0, -1, CTX)


def test_log_tracked_closed_loop_winds_once():
    with CTX.workprec():
        prev = mp.log(mp.mpf(1))
        steps = 64
        for j in range(1, steps + 1):
            prev = log_tracked(prev, mp.expjpi(mp.mpf(2 * j) / steps))
        assert abs(prev - 2j * mp.pi) < mp.mpf(10) ** -30


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=-3, max_value=3).filter(lambda k: k != 0), st.floats(min_value=0.2, max_value=5))
def test_log_tracked_winding_number(k, radius):
    with CTX.workprec():
        steps = 32 * abs(k)
        prev = mp.log(mp.mpf(radius))
        for j in range(1, steps + 1):
            prev = log_tracked(prev, radius * mp.expjpi(mp.mpf(2 * k * j) / steps))
        assert abs(prev - mp.log(radius) - 2j * mp.pi * k) < mp.mpf(10) ** -28


def test_log_tracked_rejects_large_step():
    with pytest.raises(StepTooLargeError):
        log_tracked(mp.mpf(0), mp.mpf(-1))


def test_incomplete_gamma():
    with CTX.workprec():
        assert abs(upper_incomplete_gamma(1, 2, CTX) - mp.exp(-2)) < mp.mpf(10) ** -35
    with pytest.raises(DomainError):
        upper_incomplete_gamma(1, 0, CTX)


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=1e-3, max_value=120))
def test_bessel_k0_matches_mpmath(x):
    with CTX.workprec():
        ref = mp.besselk(0, x)
        assert abs(bessel_k0(x, CTX) - ref) <= mp.mpf(10) ** -35 * ref


def test_tanh_sinh_endpoint_singularities():
    with CTX.workprec():
        val = tanh_sinh_quadrature(lambda u, v: 1 / mp.sqrt(u * v), CTX, split=True)
        assert abs(val - mp.pi) < mp.mpf(10) ** -35
        val = tanh_sinh_quadrature(lambda u: mp.log(u), CTX)
        assert abs(val + 1) < mp.mpf(10) ** -35


def test_tanh_sinh_reports_failure():
    with pytest.raises(NoConvergenceError):
        tanh_sinh_quadrature(lambda u: mp.sin(1 / u) / u, CTX, max_level=3)
