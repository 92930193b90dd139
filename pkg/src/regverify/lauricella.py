"""Pochhammer symbols and the Lauricella function F_D, by series and by integral."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp

from .hiprec import DomainError, PrecisionContext, beta, pow_principal, tanh_sinh_quadrature


class SlowConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FDParams:
    a: object
    b: tuple
    c: object
    x: tuple

    def __post_init__(self):
        if len(self.b) != len(self.x):
            raise ValueError("b and x must have the same length")
        c = mp.mpmathify(self.c)
        if mp.im(c) == 0 and mp.re(c) <= 0 and mp.re(c) == mp.floor(mp.re(c)):
            raise ValueError("c must not be a non-positive integer")


def pochhammer(a, m: int, ctx: PrecisionContext):
    """Rising factorial a (a+1) ... (a+m-1)."""
    if m < 0:
        raise ValueError("m must be non-negative")
    with ctx.workprec():
        acc = mp.mpf(1)
        a = mp.mpmathify(a)
        for j in range(m):
            acc *= a + j
        return acc


def _poly_mul_linear(coeffs: list, root) -> list:
    """coeffs(s) * (1 - root s), coefficients ascending."""
    out = coeffs + [mp.mpf(0)]
    for j in range(len(coeffs), 0, -1):
        out[j] -= root * coeffs[j - 1]
    return out


def fd_series(p: FDParams, tol, ctx: PrecisionContext, max_degree: int | None = None, info: dict | None = None):
    """Sum F_D by total-degree shells.

    The shell of degree d equals e_d (a)_d / (c)_d, where e_d is the
    coefficient of s^d in h(s) = prod (1 - x_i s)^(-b_i).  Since h'/h = p/q
    with q = prod (1 - x_i s), the e_d obey a linear recurrence of order n,
    so each shell costs O(n) instead of a sum over compositions of d.
    """
    with ctx.workprec():
        a, c = mp.mpmathify(p.a), mp.mpmathify(p.c)
        b = [mp.mpmathify(v) for v in p.b]
        x = [mp.mpmathify(v) for v in p.x]
        n = len(x)
        tol = mp.mpf(tol)
        if n == 0 or all(v == 0 for v in x):
            return mp.mpf(1)
        rho = max(abs(v) for v in x)
        if rho >= 1:
            raise DomainError("series needs max |x_i| < 1")
        if max_degree is None:
            max_degree = int(20 * ctx.dps / -math.log10(float(rho))) + 20

        q = [mp.mpf(1)]
        for xi in x:
            q = _poly_mul_linear(q, xi)
        num = [mp.mpf(0)] * n
        for i, xi in enumerate(x):
            part = [mp.mpf(1)]
            for j, xj in enumerate(x):
                if j != i:
                    part = _poly_mul_linear(part, xj)
            for k, v in enumerate(part):
                num[k] += b[i] * xi * v

        e = [mp.mpf(1)]
        ratio = mp.mpf(1)
        total = mp.mpf(1)
        recent = []
        d = 0
        while True:
            acc = mp.fsum(num[j] * e[d - j] for j in range(n) if d - j >= 0)
            acc -= mp.fsum(q[j] * (d + 1 - j) * e[d + 1 - j] for j in range(1, n + 1) if d + 1 - j >= 0)
            e.append(acc / (d + 1))
            ratio *= (a + d) / (c + d)
            d += 1
            shell = e[d] * ratio
            total += shell
            recent = (recent + [abs(shell)])[-3:]
            if d >= 3 and max(recent) * rho / (1 - rho) < tol:
                break
            if d > max_degree:
                raise SlowConvergenceError(f"F_D series not converged after {d} shells (rho = {mp.nstr(rho, 6)})")
        if info is not None:
            info["shells"] = d
        return total


def fd_integral(p: FDParams, ctx: PrecisionContext):
    """F_D from its Euler integral, B(a, c-a) F_D = int_0^1 prod(1 - x_i u)^(-b_i) u^(a-1) (1-u)^(c-a-1) du."""
    with ctx.workprec():
        a, c = mp.mpmathify(p.a), mp.mpmathify(p.c)
        b = [mp.mpmathify(v) for v in p.b]
        x = [mp.mpmathify(v) for v in p.x]
        if not 0 < mp.re(a) < mp.re(c):
            raise DomainError("integral representation needs 0 < Re a < Re c")
        for xi in x:
            if mp.im(xi) == 0 and mp.re(xi) >= 1:
                raise DomainError(f"x = {xi} puts a branch point inside (0, 1]")

        def integrand(u, v):
            val = pow_principal(u, a - 1, ctx) * pow_principal(v, c - a - 1, ctx)
            for xi, bi in zip(x, b):
                if bi != 0:
                    val *= pow_principal(1 - xi * u, -bi, ctx)
            return val

        return tanh_sinh_quadrature(integrand, ctx, split=True) / beta(a, c - a, ctx)
