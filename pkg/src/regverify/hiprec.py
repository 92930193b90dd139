"""Arbitrary-precision arithmetic layer.

Everything numeric in the package goes through a :class:`PrecisionContext`,
which fixes the mpmath working precision for the duration of a call.  Gamma,
Beta and the incomplete Gamma function delegate to mpmath; ``K0`` and the
tanh-sinh rule are implemented here because their error control matters to
the callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import mpmath as mp

LOG2_10 = math.log2(10)


class HiprecError(ArithmeticError):
    pass


class PoleError(HiprecError):
    pass


class DomainError(HiprecError):
    pass


class StepTooLargeError(HiprecError):
    pass


class NoConvergenceError(HiprecError):
    pass


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision in bits plus the guard digits carried on top of the target."""

    prec_bits: int
    guard_digits: int = 10

    def __post_init__(self):
        if self.prec_bits < 64:
            raise ValueError(f"prec_bits must be >= 64, got {self.prec_bits}")
        if self.guard_digits < 0:
            raise ValueError("guard_digits must be non-negative")

    @classmethod
    def for_digits(cls, digits: int, guard_digits: int = 10) -> "PrecisionContext":
        bits = math.ceil((digits + guard_digits) * LOG2_10)
        return cls(max(64, bits), guard_digits)

    @property
    def digits(self) -> int:
        """Decimal digits the caller may rely on (working digits minus guard)."""
        return max(1, int(self.prec_bits / LOG2_10) - self.guard_digits)

    @property
    def dps(self) -> int:
        return int(self.prec_bits / LOG2_10)

    def workprec(self):
        return mp.workprec(self.prec_bits)

    def raised(self, extra_bits: int) -> "PrecisionContext":
        return PrecisionContext(self.prec_bits + extra_bits, self.guard_digits)

    def quad_tol(self):
        return mp.ldexp(1, -self.prec_bits + 16)


def _is_gamma_pole(z) -> bool:
    z = mp.mpmathify(z)
    if isinstance(z, mp.mpc):
        if z.imag != 0:
            return False
        z = z.real
    return z <= 0 and z == mp.floor(z)


def gamma(z, ctx: PrecisionContext):
    if _is_gamma_pole(z):
        raise PoleError(f"Gamma has a pole at {z}")
    with ctx.workprec():
        return mp.gamma(mp.mpmathify(z))


def beta(a, b, ctx: PrecisionContext):
    with ctx.workprec():
        a, b = mp.mpmathify(a), mp.mpmathify(b)
        for z in (a, b, a + b):
            if _is_gamma_pole(z):
                raise PoleError(f"Beta({a}, {b}) hits a Gamma pole at {z}")
        return mp.beta(a, b)


def pow_principal(z, a, ctx: PrecisionContext):
    """``exp(a * Log z)`` with ``Arg z`` in ``(-pi, pi]``."""
    with ctx.workprec():
        z, a = mp.mpmathify(z), mp.mpmathify(a)
        if z == 0:
            if mp.re(a) <= 0:
                raise DomainError("0 raised to a power with non-positive real part")
            return mp.mpf(0)
        return mp.exp(a * mp.log(z))


def log_tracked(prev, value):
    """Logarithm of ``value`` on the branch continuous with ``prev``.

    Raises StepTooLargeError when ``value`` has moved too far from
    ``exp(prev)`` for the continuation to be unambiguous; the caller is
    expected to refine its step.
    """
    prev, value = mp.mpmathify(prev), mp.mpmathify(value)
    if value == 0:
        raise DomainError("log of zero")
    if abs(value / mp.exp(prev) - 1) >= 1:
        raise StepTooLargeError(f"step from exp({prev}) to {value} is too large")
    w = mp.log(value)
    turns = mp.nint((mp.im(prev) - mp.im(w)) / (2 * mp.pi))
    w = w + 2j * mp.pi * turns
    if abs(mp.im(w - prev)) >= mp.pi:
        raise StepTooLargeError("branch continuation is ambiguous")
    return w


def upper_incomplete_gamma(s, x, ctx: PrecisionContext):
    with ctx.workprec():
        x = mp.mpmathify(x)
        if not x > 0:
            raise DomainError("upper incomplete Gamma needs x > 0")
        return mp.gammainc(mp.mpmathify(s), x)


def bessel_k0(x, ctx: PrecisionContext):
    """Modified Bessel function K0 for real x > 0.

    Power series with the logarithmic term while 2x is below the working
    precision in nats (extra bits cover the cancellation, which grows like
    e^{2x}); asymptotic expansion beyond that, where its smallest term is
    already below the target.
    """
    prec = ctx.prec_bits
    x = mp.mpmathify(x)
    if not x > 0:
        raise DomainError("K0 needs x > 0")
    if 2 * x > (prec + 20) * math.log(2):
        with mp.workprec(prec + 20):
            eps = mp.ldexp(1, -prec - 10)
            total = term = mp.mpf(1)
            k = 0
            while abs(term) >= eps:
                k += 1
                term = -term * (2 * k - 1) ** 2 / (8 * k * x)
                total += term
            r = mp.sqrt(mp.pi / (2 * x)) * mp.exp(-x) * total
    else:
        extra = int(2 * float(x) / math.log(2)) + 20
        with mp.workprec(prec + extra):
            eps = mp.ldexp(1, -prec - extra)
            q = x * x / 4
            term = series = mp.mpf(1)
            weighted = harmonic = mp.mpf(0)
            k = 0
            while True:
                k += 1
                term = term * q / (k * k)
                harmonic += mp.mpf(1) / k
                series += term
                weighted += term * harmonic
                if term < eps * series:
                    break
            r = -(mp.log(x / 2) + mp.euler) * series + weighted
    with mp.workprec(prec):
        return +r


def tanh_sinh_quadrature(
    integrand: Callable,
    ctx: PrecisionContext,
    *,
    split: bool = False,
    max_level: int = 14,
    tol=None,
    atol=0,
    t_max: float = 8.0,
    info: dict | None = None,
):
    """Integrate over (0, 1) with the double-exponential rule.

    With ``split=True`` the integrand is called as ``integrand(u, 1 - u)``
    where the complement is computed without cancellation, so integrands
    singular at u = 1 keep full accuracy.  The step is halved until two
    successive levels agree to ``tol`` (relative, with floor ``atol``).
    """
    with ctx.workprec():
        tol = ctx.quad_tol() if tol is None else mp.mpf(tol)
        atol = mp.mpf(atol)
        eps = mp.ldexp(1, -ctx.prec_bits - 4)
        halfpi = mp.pi / 2

        def contrib(t):
            s = halfpi * mp.sinh(t)
            e = mp.exp(-2 * s)
            u = 1 / (1 + e)
            v = e / (1 + e)
            w = mp.pi * mp.cosh(t) * u * v
            if w == 0:
                return mp.mpf(0)
            y = integrand(u, v) if split else integrand(u)
            return w * y

        # level 0: step 1, walk outwards until both tails are negligible
        total = contrib(mp.mpf(0))
        j = 0
        small = {1: 0, -1: 0}
        while j < t_max:
            j += 1
            for sign in (1, -1):
                if small[sign] >= 2:
                    continue
                c = contrib(mp.mpf(sign * j))
                total += c
                small[sign] = small[sign] + 1 if abs(c) <= eps * max(abs(total), eps) else 0
            if small[1] >= 2 and small[-1] >= 2:
                break
        limit = j
        h = mp.mpf(1)
        estimate = total * h
        for level in range(1, max_level + 1):
            h /= 2
            m = 1
            while m * h <= limit:
                total += contrib(m * h) + contrib(-m * h)
                m += 2
            new = total * h
            diff = abs(new - estimate)
            estimate = new
            if diff <= max(tol * abs(new), atol):
                if info is not None:
                    info.update(level=level, last_change=diff)
                return new
        raise NoConvergenceError(f"tanh-sinh did not converge after {max_level} levels (last change {mp.nstr(diff, 5)})")
