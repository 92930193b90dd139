import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regverify.hiprec import DomainError, PrecisionContext
from regverify.lauricella import FDParams, fd_integral, fd_series, pochhammer

CTX = PrecisionContext.for_digits(25)
TOL = mp.mpf(10) ** -20


def test_pochhammer():
    assert pochhammer(mp.mpf(2) / 3, 0, CTX) == 1
    assert pochhammer(1, 5, CTX) == 120
    assert pochhammer(mp.mpf(1) / 2, 2, CTX) == mp.mpf(3) / 4


def test_zero_arguments():
    p = FDParams(mp.mpf("0.3"), (1, 2), mp.mpf("1.7"), (0, 0))
    assert fd_series(p, TOL, CTX) == 1
    with CTX.workprec():
        assert abs(fd_integral(p, CTX) - 1) < TOL


def test_gauss_reduction():
    with CTX.workprec():
        p = FDParams(1, (1,), 2, (mp.mpf(1) / 2,))
        assert abs(fd_series(p, TOL, CTX) - 2 * mp.log(2)) < TOL
        assert abs(fd_integral(FDParams(1, (0,), 2, (mp.mpf("0.9"),)), CTX) - 1) < TOL


def test_appell_oracle():
    with CTX.workprec():
        x = (mp.mpf("0.3"), mp.mpc("-0.2", "0.4"))
        p = FDParams(mp.mpf(1) / 2, (mp.mpf(-1) / 2, mp.mpf(-1) / 2), 2, x)
        ref = mp.appellf1(p.a, p.b[0], p.b[1], p.c, x[0], x[1])
        assert abs(fd_series(p, TOL, CTX) - ref) < TOL
        assert abs(fd_integral(p, CTX) - ref) < TOL


def test_domain_errors():
    with pytest.raises(DomainError):
        fd_series(FDParams(1, (1,), 2, (mp.mpf("1.1"),)), TOL, CTX)
    with pytest.raises(DomainError):
        fd_integral(FDParams(3, (1,), 2, (mp.mpf("0.1"),)), CTX)
    with pytest.raises(ValueError):
        FDParams(1, (1,), -2, (0,))


cplx = st.builds(lambda r, t: mp.mpf(r) * mp.expjpi(mp.mpf(t)),
                 st.floats(min_value=0, max_value=0.5), st.floats(min_value=-1, max_value=1))


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.05, max_value=2), st.floats(min_value=0.1, max_value=2),
       st.lists(st.tuples(st.floats(min_value=-1.5, max_value=1.5), cplx), min_size=1, max_size=3))
def test_dual_method_agreement(a, gap, slots):
    with CTX.workprec():
        b = tuple(mp.mpf(s[0]) for s in slots)
        x = tuple(s[1] for s in slots)
        p = FDParams(mp.mpf(a), b, mp.mpf(a) + mp.mpf(gap), x)
        s, i = fd_series(p, TOL, CTX), fd_integral(p, CTX)
        assert abs(s - i) <= mp.mpf(10) ** -(CTX.digits - 5) * max(1, abs(s))


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=0.1, max_value=1.5), st.floats(min_value=-0.4, max_value=0.4),
       st.floats(min_value=0.05, max_value=0.45))
def test_conjugate_closed_arguments_give_real_values(b, re, im):
    with CTX.workprec():
        z = mp.mpc(re, im)
        p = FDParams(mp.mpf("0.5"), (b, b, b), mp.mpf(2), (z, mp.conj(z), mp.mpf(re)))
        assert abs(mp.im(fd_series(p, TOL, CTX))) < TOL


def test_variable_drop():
    with CTX.workprec():
        x = (mp.mpf("0.2"), mp.mpc("0.1", "0.3"))
        full = fd_series(FDParams(mp.mpf("0.4"), (mp.mpf("0.7"), 0), mp.mpf("1.9"), x), TOL, CTX)
        short = fd_series(FDParams(mp.mpf("0.4"), (mp.mpf("0.7"),), mp.mpf("1.9"), x[:1]), TOL, CTX)
        assert abs(full - short) < TOL


def test_gauss_value_at_one_by_extrapolation():
    with CTX.workprec():
        a, b, c = mp.mpf("0.3"), mp.mpf("0.4"), mp.mpf("1.9")
        exact = mp.gamma(c) * mp.gamma(c - a - b) / (mp.gamma(c - a) * mp.gamma(c - b))
        x = 1 - mp.mpf(10) ** -8
        near = fd_integral(FDParams(a, (b,), c, (x,)), CTX)
        assert abs(near - exact) < mp.mpf(10) ** -6
