"""Superelliptic curves Y^N = f(X) with f(T) = T (T - l_1) ... (T - l_n).

Builds the branch points numerically, certifies the hypotheses the regulator
formula relies on (all roots of f - 1 are roots of unity, |f| < 1 on [0, 1),
a unique branch point in (0, 1), positivity of (-1)^(n-1) l_1 ... l_n) and
provides the two example families used throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath as mp
import sympy

from .hiprec import PrecisionContext


class CurveError(ValueError):
    pass


class RepeatedRootError(CurveError):
    pass


class NoRealRootInUnitIntervalError(CurveError):
    pass


class NotOnUnitCircle(CurveError):
    pass


class OrderBoundExceeded(CurveError):
    pass


class ParityError(CurveError):
    pass


class ParamError(CurveError):
    pass


_T = sympy.Symbol("T")


@dataclass(frozen=True)
class IntPoly:
    """Integer polynomial, coefficients in ascending degree."""

    coeffs: tuple[int, ...]

    def __init__(self, coeffs):
        cs = [int(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs:
            cs = [0]
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_monic(self) -> bool:
        return self.coeffs[-1] == 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other: "IntPoly") -> "IntPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return IntPoly([x + y for x, y in zip(a, b)])

    def __sub__(self, other: "IntPoly") -> "IntPoly":
        return self + IntPoly([-c for c in other.coeffs])

    def __mul__(self, other: "IntPoly") -> "IntPoly":
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPoly(out)

    def derivative(self) -> "IntPoly":
        return IntPoly([i * c for i, c in enumerate(self.coeffs)][1:] or [0])

    def divmod_monic(self, divisor: "IntPoly") -> tuple["IntPoly", "IntPoly"]:
        """Exact long division by a monic integer polynomial."""
        if not divisor.is_monic:
            raise ValueError("divisor must be monic")
        rem = list(self.coeffs)
        dd = divisor.degree
        if self.degree < dd:
            return IntPoly([0]), self
        quot = [0] * (self.degree - dd + 1)
        for k in range(self.degree - dd, -1, -1):
            c = rem[k + dd]
            quot[k] = c
            if c:
                for j, d in enumerate(divisor.coeffs):
                    rem[k + j] -= c * d
        return IntPoly(quot), IntPoly(rem[:dd] or [0])

    def to_sympy(self) -> sympy.Poly:
        return sympy.Poly(list(reversed(self.coeffs)), _T, domain="QQ")

    @classmethod
    def from_sympy(cls, expr) -> "IntPoly":
        p = sympy.Poly(expr, _T)
        return cls([int(c) for c in reversed(p.all_coeffs())])

    def __str__(self) -> str:
        return str(self.to_sympy().as_expr())


# ---------------------------------------------------------------- root finding

def aberth_roots(poly: IntPoly, ctx: PrecisionContext, max_iter: int = 1000) -> list:
    """All complex roots of a polynomial by Aberth-Ehrlich iteration."""
    n = poly.degree
    if n < 1:
        return []
    with ctx.workprec():
        lead = mp.mpf(poly.coeffs[-1])
        cs = [mp.mpf(c) / lead for c in poly.coeffs]
        dcs = [i * c for i, c in enumerate(cs)][1:]
        radius = 2 * max(abs(cs[i]) ** (mp.mpf(1) / (n - i)) for i in range(n)) or mp.mpf(1)
        z = [radius / 2 * mp.expj(2 * mp.pi * k / n + mp.mpf("0.4")) for k in range(n)]
        tol = mp.ldexp(1, -ctx.prec_bits + 8)

        def ev(c, x):
            acc = mp.mpc(0)
            for a in reversed(c):
                acc = acc * x + a
            return acc

        for _ in range(max_iter):
            biggest = mp.mpf(0)
            for k in range(n):
                pk = ev(cs, z[k])
                if pk == 0:
                    continue
                ratio = pk / ev(dcs, z[k])
                repulsion = mp.fsum(1 / (z[k] - z[j]) for j in range(n) if j != k)
                step = ratio / (1 - ratio * repulsion)
                z[k] -= step
                biggest = max(biggest, abs(step) / max(abs(z[k]), mp.mpf(1)))
            if biggest < tol:
                break
        # Newton polish at raised precision
        with mp.workprec(ctx.prec_bits + 32):
            polished = []
            for r in z:
                r = mp.mpc(r)
                for _ in range(8):
                    d = ev(dcs, r)
                    if d == 0:
                        break
                    step = ev(cs, r) / d
                    r -= step
                    if abs(step) <= mp.ldexp(abs(r), -ctx.prec_bits - 24):
                        break
                polished.append(r)
        return [+r for r in polished]


def _squarefree(p: sympy.Poly) -> sympy.Poly:
    return sympy.Poly(sympy.quo(p, sympy.gcd(p, p.diff())), p.gens[0], domain="QQ")


def _sturm_sequence(p: sympy.Poly) -> list[sympy.Poly]:
    return sympy.sturm(p)


def _sign_changes(seq, x: Fraction) -> int:
    vals = [s.eval(sympy.Rational(x.numerator, x.denominator)) for s in seq]
    vals = [v for v in vals if v != 0]
    return sum(1 for a, b in zip(vals, vals[1:]) if (a > 0) != (b > 0))


def sturm_count(p: sympy.Poly, a: Fraction, b: Fraction) -> int:
    """Number of distinct real roots of p in the half-open interval (a, b]."""
    if p.degree() <= 0:
        return 0
    seq = _sturm_sequence(_squarefree(p))
    return _sign_changes(seq, a) - _sign_changes(seq, b)


def isolate_real_roots(p: sympy.Poly, a: Fraction, b: Fraction, width=Fraction(1, 2**40)) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals (lo, hi], each holding exactly one root of p in (a, b]."""
    if p.degree() <= 0:
        return []
    p = _squarefree(p)
    seq = _sturm_sequence(p)
    out = []
    stack = [(a, b, _sign_changes(seq, a) - _sign_changes(seq, b))]
    while stack:
        lo, hi, cnt = stack.pop()
        if cnt == 0:
            continue
        if cnt == 1 and hi - lo <= width:
            out.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        left = _sign_changes(seq, lo) - _sign_changes(seq, mid)
        stack.append((mid, hi, cnt - left))
        stack.append((lo, mid, left))
    return sorted(out)


def refine_root(poly: IntPoly, lo: Fraction, hi: Fraction, ctx: PrecisionContext):
    """High-precision root of poly inside an isolating interval."""
    with ctx.workprec():
        d = poly.derivative()
        x = mp.mpf(lo.numerator) / lo.denominator + (mp.mpf(hi.numerator) / hi.denominator - mp.mpf(lo.numerator) / lo.denominator) / 2
        for _ in range(200):
            step = poly(x) / d(x) if d(x) != 0 else 0
            x -= step
            if abs(step) <= mp.ldexp(max(abs(x), mp.mpf(1)), -ctx.prec_bits):
                break
        return x


# ---------------------------------------------------------------- hypotheses

@dataclass
class RootsOfUnityCertificate:
    orders: tuple[int, ...]
    exponents: dict[int, int]
    quotient: IntPoly

    def as_dict(self) -> dict:
        return {
            "orders": list(self.orders),
            "product": " * ".join(f"(T^{m} - 1)^{e}" for m, e in sorted(self.exponents.items())),
            "quotient": list(self.quotient.coeffs),
        }


def is_all_roots_of_unity(phi: IntPoly, max_order: int = 512, ctx: PrecisionContext | None = None) -> RootsOfUnityCertificate:
    """Certify that every root of phi is a root of unity.

    Orders are guessed numerically and then confirmed exactly: phi must
    divide prod (T^m - 1)^{e_m} with zero remainder.
    """
    if not phi.is_monic:
        raise CurveError("phi must be monic")
    ctx = ctx or PrecisionContext.for_digits(40)
    orders: list[int] = []
    _, factors = sympy.sqf_list(phi.to_sympy())
    for factor, mult in factors:
        g = IntPoly([int(c) for c in reversed(factor.all_coeffs())])
        with ctx.workprec():
            for r in aberth_roots(g, ctx):
                if abs(abs(r) - 1) > mp.mpf(10) ** -20:
                    raise NotOnUnitCircle(f"root {mp.nstr(r, 15)} has modulus {mp.nstr(abs(r), 15)}")
                turn = mp.arg(r) / (2 * mp.pi) % 1
                approx = Fraction(str(mp.nstr(turn, 30))).limit_denominator(max_order)
                if abs(turn - mp.mpf(approx.numerator) / approx.denominator) > mp.mpf(10) ** -20:
                    raise OrderBoundExceeded(f"root {mp.nstr(r, 15)} has no order <= {max_order}")
                orders.extend([approx.denominator] * mult)
    exponents: dict[int, int] = {}
    for m in orders:
        exponents[m] = exponents.get(m, 0) + 1
    product = IntPoly([1])
    for m, e in exponents.items():
        for _ in range(e):
            product = product * IntPoly([-1] + [0] * (m - 1) + [1])
    quotient, remainder = product.divmod_monic(phi)
    if any(remainder.coeffs):
        raise OrderBoundExceeded("exact division by the cyclotomic product left a remainder")
    return RootsOfUnityCertificate(tuple(sorted(orders)), exponents, quotient)


@dataclass
class HypothesisReport:
    roots_of_unity: bool
    real_coefficients: bool
    bounded_on_unit_interval: bool
    unique_root_in_unit_interval: bool
    sign_condition: bool
    certificate: RootsOfUnityCertificate | None = None
    witnesses: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all((self.roots_of_unity, self.real_coefficients, self.bounded_on_unit_interval,
                    self.unique_root_in_unit_interval, self.sign_condition))

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "roots_of_unity": self.roots_of_unity,
            "real_coefficients": self.real_coefficients,
            "bounded_on_unit_interval": self.bounded_on_unit_interval,
            "unique_root_in_unit_interval": self.unique_root_in_unit_interval,
            "sign_condition": self.sign_condition,
            "certificate": self.certificate.as_dict() if self.certificate else None,
            "witnesses": self.witnesses,
        }


@dataclass
class CurveSpec:
    N: int
    f: IntPoly
    lambdas: list
    ctx: PrecisionContext
    certificate: HypothesisReport | None = None

    @property
    def n(self) -> int:
        return self.f.degree - 1

    @property
    def lambda_last(self):
        return self.lambdas[-1]

    def real_lambdas(self) -> list:
        return [l for l in self.lambdas if mp.im(l) == 0]

    def f_real(self, t, complement=None):
        """f at a real point, computed from the factored form so it stays real.

        ``complement`` may carry l_n - t computed without cancellation.
        """
        acc = mp.mpf(t)
        for l in self.lambdas[:-1]:
            if mp.im(l) == 0:
                acc *= t - mp.re(l)
            elif mp.im(l) > 0:
                acc *= (t - mp.re(l)) ** 2 + mp.im(l) ** 2
        acc *= -complement if complement is not None else t - mp.re(self.lambdas[-1])
        return acc

    def log_derivative(self, t):
        """f'(t)/f(t)."""
        return 1 / t + mp.fsum(1 / (t - l) for l in self.lambdas)

    def product_sign_value(self) -> int:
        """(-1)^(n-1) l_1 ... l_n, read off the linear coefficient of f."""
        return -self.f.coeffs[1]


def build_curve(N: int, f: IntPoly, ctx: PrecisionContext, strict: bool = False) -> CurveSpec:
    if N < 2:
        raise CurveError("N must be at least 2")
    if not f.is_monic or f.degree < 2 or f.coeffs[0] != 0:
        raise CurveError("f must be monic of degree >= 2 with f(0) = 0")
    g = IntPoly(f.coeffs[1:])
    gs = g.to_sympy()
    if g.coeffs[0] == 0 or (g.degree > 1 and sympy.discriminant(gs) == 0):
        raise RepeatedRootError(f"f = {f} has a repeated root")
    n = g.degree
    n_real = gs.count_roots() if n > 0 else 0
    in_unit = sturm_count(gs, Fraction(0), Fraction(1)) - (1 if g(1) == 0 else 0)
    if strict and in_unit != 1:
        raise NoRealRootInUnitIntervalError(f"f has {in_unit} roots in (0, 1)")
    with ctx.workprec():
        roots = aberth_roots(g, ctx)
        roots.sort(key=lambda r: abs(mp.im(r)))
        real = sorted(mp.re(r) for r in roots[:n_real])
        nonreal = [r for r in roots[n_real:] if mp.im(r) > 0]
        nonreal.sort(key=lambda r: (mp.re(r), mp.im(r)))
        # polish real roots on the real line so they carry no imaginary residue
        real = [_newton_real(g, r, ctx) for r in real]
        inside = [r for r in real if 0 < r < 1]
        outside = [r for r in real if not 0 < r < 1]
        lambdas = list(outside)
        for r in nonreal:
            lambdas.extend([r, mp.conj(r)])
        if len(inside) > 1:
            raise NoRealRootInUnitIntervalError("several branch points in (0, 1); refusing to choose")
        lambdas.extend(inside)
    return CurveSpec(N=N, f=f, lambdas=lambdas, ctx=ctx)


def _newton_real(g: IntPoly, x, ctx: PrecisionContext):
    d = g.derivative()
    with mp.workprec(ctx.prec_bits + 16):
        x = mp.mpf(x)
        for _ in range(50):
            step = g(x) / d(x)
            x -= step
            if abs(step) <= mp.ldexp(max(abs(x), 1), -ctx.prec_bits - 8):
                break
    return +x


def critical_points(f: IntPoly, a: Fraction, b: Fraction, ctx: PrecisionContext) -> list:
    """Critical points of f in the open interval (a, b)."""
    d = f.derivative().to_sympy()
    # a root sitting exactly on b would otherwise be refined from one side
    rb = sympy.Rational(b.numerator, b.denominator)
    while d.degree() > 0 and d.eval(rb) == 0:
        d = sympy.quo(d, sympy.Poly(_T - rb, _T, domain="QQ"))
    dd = IntPoly.from_sympy(d.as_expr() * sympy.lcm([sympy.Rational(c).q for c in d.all_coeffs()]))
    return [refine_root(dd, lo, hi, ctx) for lo, hi in isolate_real_roots(d, a, b)]


def sup_abs_on(f: IntPoly, a, b, ctx: PrecisionContext):
    """max |f| over [a, b] from endpoints and isolated critical points (a, b rational)."""
    a, b = Fraction(a), Fraction(b)
    with ctx.workprec():
        pts = [mp.mpf(a.numerator) / a.denominator, mp.mpf(b.numerator) / b.denominator]
        pts += critical_points(f, a, b, ctx)
        return max(abs(f(x)) for x in pts)


def check_assumptions(curve: CurveSpec, ctx: PrecisionContext | None = None, samples: int = 2**12) -> HypothesisReport:
    ctx = ctx or curve.ctx
    f = curve.f
    witnesses: dict = {}
    phi = f - IntPoly([1])
    cert = None
    try:
        cert = is_all_roots_of_unity(phi)
        unity = True
    except (NotOnUnitCircle, OrderBoundExceeded) as exc:
        unity = False
        witnesses["roots_of_unity_failure"] = f"{type(exc).__name__}: {exc}"

    # |f| < 1 on [0, 1): f(0) = 0, so by continuity this holds iff neither
    # f - 1 nor f + 1 vanishes on (0, 1).  Counted exactly by Sturm sequences.
    zero, one = Fraction(0), Fraction(1)
    hits_one = sturm_count(phi.to_sympy(), zero, one) - (1 if phi(1) == 0 else 0)
    plus = f + IntPoly([1])
    hits_minus_one = sturm_count(plus.to_sympy(), zero, one) - (1 if plus(1) == 0 else 0)
    with ctx.workprec():
        crit = critical_points(f, zero, one, ctx)
        crit_vals = [f(c) for c in crit]
        grid = [f(mp.mpf(j) / samples) for j in range(samples)]
        sample_sup = max(abs(v) for v in grid)
    bounded = hits_one == 0 and hits_minus_one == 0 and f(1) > 0
    witnesses["critical_points"] = [[mp.nstr(c, 20), mp.nstr(v, 20)] for c, v in zip(crit, crit_vals)]
    witnesses["f(1)"] = f(1)
    witnesses["sample_sup_abs_f"] = mp.nstr(sample_sup, 20)
    if bounded and (sample_sup >= 1 or any(abs(v) >= 1 for v in crit_vals)):
        bounded = False
        witnesses["bounded_failure"] = "numerical sample contradicts the exact count"

    g = IntPoly(f.coeffs[1:])
    in_unit = sturm_count(g.to_sympy(), zero, one) - (1 if g(1) == 0 else 0)
    witnesses["roots_in_unit_interval"] = in_unit
    sign_value = curve.product_sign_value()
    witnesses["signed_root_product"] = sign_value
    report = HypothesisReport(
        roots_of_unity=unity,
        real_coefficients=True,
        bounded_on_unit_interval=bounded,
        unique_root_in_unit_interval=in_unit == 1,
        sign_condition=sign_value > 0,
        certificate=cert,
        witnesses=witnesses,
    )
    curve.certificate = report
    return report


# ---------------------------------------------------------------- structure

def genus(N: int, n: int) -> int:
    """Riemann-Hurwitz genus of Y^N = X (X - l_1) ... (X - l_n)."""
    if N < 2 or n < 1:
        raise ParamError("need N >= 2 and n >= 1")
    twice = (N - 1) * n - math.gcd(N, n + 1) + 1
    if twice % 2:
        raise ParityError(f"(N, n) = ({N}, {n}) gives a half-integer genus")
    return twice // 2


def preset(family: str, n: int, l: int | None = None, N: int = 2) -> tuple[int, IntPoly]:
    """The two example families.

    ex1: f = T^(n+1) + T^n - T, so f - 1 = (T^n - 1)(T + 1).
    ex2: f = (T+1)^(n+1-l) (T-1)^l + 1 with l odd and 0 < l < (n+1)/2.
    """
    if n < 1:
        raise ParamError("n must be positive")
    if family == "ex1":
        coeffs = [0] * (n + 2)
        coeffs[n + 1] += 1
        coeffs[n] += 1
        coeffs[1] -= 1
        return N, IntPoly(coeffs)
    if family == "ex2":
        if l is None or l % 2 == 0 or not 0 < 2 * l < n + 1:
            raise ParamError(f"ex2 needs odd l with 0 < l < (n+1)/2, got l={l}")
        return N, IntPoly.from_sympy((_T + 1) ** (n + 1 - l) * (_T - 1) ** l + 1)
    raise ParamError(f"unknown family {family!r}")


def curve_from_json(data: dict | str | Path) -> tuple[int, IntPoly]:
    """Accepts {"N": int, "f": [c0, c1, ...]} or {"N": int, "preset": {...}}."""
    if isinstance(data, (str, Path)):
        data = json.loads(Path(data).read_text())
    if not isinstance(data, dict):
        raise CurveError("curve description must be a JSON object")
    if "preset" in data:
        p = data["preset"]
        if not isinstance(p, dict) or "family" not in p or "n" not in p:
            raise CurveError("preset: needs 'family' and 'n'")
        return preset(p["family"], int(p["n"]), p.get("l"), int(data.get("N", p.get("N", 2))))
    if "N" not in data or "f" not in data:
        raise CurveError("curve: needs 'N' and 'f' (or 'preset')")
    try:
        coeffs = [int(c) for c in data["f"]]
    except (TypeError, ValueError) as exc:
        raise CurveError(f"f: coefficients must be integers ({exc})") from None
    return int(data["N"]), IntPoly(coeffs)
