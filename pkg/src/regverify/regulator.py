"""Regulator pairings r({f, g})(cycle) on superelliptic curves.

Three independent routes are provided for the basic symbol {1 - Y, X} on the
cycle delta = gamma - conj(gamma), gamma(t) = (t, f(t)^(1/N)), t in [0, l_n]:

* ``reg_series``: the hypergeometric series in k, each term a Beta value
  times a Lauricella F_D;
* ``reg_term_integral``: each k-term from its one-dimensional integral;
* ``reg_direct``: the path integral of the real 1-form
  eta(f, g) = log|f| d arg g - log|g| d arg f around the closed cycle.

``reg_direct`` handles arbitrary symbols (including pullbacks and formal
sums) and cycles (pushforwards under automorphisms), which is what the
regulator matrices need.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import mpmath as mp
import sympy

from .curvespec import CurveSpec, build_curve, check_assumptions, critical_points, preset
from .hiprec import DomainError, PrecisionContext, beta, log_tracked, pow_principal, tanh_sinh_quadrature, StepTooLargeError
from .lauricella import FDParams, fd_integral, fd_series

X, Y = sympy.symbols("X Y")


class HypothesisError(ValueError):
    pass


class ConvergenceError(ArithmeticError):
    pass


class SingularityOnPathError(ValueError):
    pass


class OrderingViolation(AssertionError):
    pass


# ---------------------------------------------------------------- symbols, maps, cycles

@dataclass(frozen=True)
class Automorphism:
    """A map (X, Y) -> (x, y) given by rational expressions."""

    name: str
    x: sympy.Expr
    y: sympy.Expr

    def __matmul__(self, other: "Automorphism") -> "Automorphism":
        """self @ other is 'apply other, then self'."""
        sub = {X: other.x, Y: other.y}
        return Automorphism(
            f"{self.name}.{other.name}",
            sympy.simplify(self.x.subs(sub, simultaneous=True)),
            sympy.simplify(self.y.subs(sub, simultaneous=True)),
        )

    def power(self, k: int) -> "Automorphism":
        out = IDENTITY
        for _ in range(k):
            out = self @ out
        return Automorphism(f"{self.name}^{k}" if k != 1 else self.name, out.x, out.y)

    @cached_property
    def _compiled(self):
        exprs = [self.x, self.y, *(sympy.diff(e, v) for e in (self.x, self.y) for v in (X, Y))]
        return [sympy.lambdify((X, Y), e, modules="mpmath") for e in exprs]

    def push(self, x, y, dx, dy):
        fx, fy, jxx, jxy, jyx, jyy = self._compiled
        return fx(x, y), fy(x, y), jxx(x, y) * dx + jxy(x, y) * dy, jyx(x, y) * dx + jyy(x, y) * dy


IDENTITY = Automorphism("id", X, Y)


@dataclass(frozen=True)
class SymbolSpec:
    """Formal sum of symbols, terms (coefficient, f, g) with f, g in X, Y."""

    terms: tuple
    name: str = ""

    @classmethod
    def pair(cls, f, g, name: str = "") -> "SymbolSpec":
        return cls(((1, sympy.sympify(f), sympy.sympify(g)),), name or f"{{{f}, {g}}}")

    def pullback(self, aut: Automorphism, name: str | None = None) -> "SymbolSpec":
        sub = {X: aut.x, Y: aut.y}
        terms = tuple((c, sympy.simplify(f.subs(sub, simultaneous=True)), sympy.simplify(g.subs(sub, simultaneous=True)))
                      for c, f, g in self.terms)
        return SymbolSpec(terms, name or f"{aut.name}^*{self.name}")

    def __sub__(self, other: "SymbolSpec") -> "SymbolSpec":
        return SymbolSpec(self.terms + tuple((-c, f, g) for c, f, g in other.terms), f"{self.name}-{other.name}")

    @cached_property
    def _compiled(self):
        out = []
        for c, f, g in self.terms:
            funcs = [sympy.lambdify((X, Y), e, modules="mpmath")
                     for e in (f, sympy.diff(f, X), sympy.diff(f, Y), g, sympy.diff(g, X), sympy.diff(g, Y))]
            out.append((c, funcs))
        return out


@dataclass(frozen=True)
class CycleSpec:
    """Formal sum of pushforwards of a base cycle.

    base 'delta' is gamma - conj(gamma) over t in (0, l_n); base
    'delta_prime' is the same construction over t in (-inf, l_1] with l_1 the
    unique negative real branch point.
    """

    base: str
    terms: tuple = ((1, IDENTITY),)
    name: str = ""

    def __post_init__(self):
        if self.base not in ("delta", "delta_prime"):
            raise ValueError(f"unknown base cycle {self.base!r}")

    def pushforward(self, aut: Automorphism, name: str | None = None) -> "CycleSpec":
        return CycleSpec(self.base, tuple((c, aut @ a) for c, a in self.terms), name or f"{aut.name}_*{self.name or self.base}")

    def __sub__(self, other: "CycleSpec") -> "CycleSpec":
        if other.base != self.base:
            raise ValueError("cannot combine cycles over different base paths")
        return CycleSpec(self.base, self.terms + tuple((-c, a) for c, a in other.terms), f"{self.name}-{other.name}")


def standard_symbol(name: str, N: int) -> SymbolSpec:
    if name in ("one_minus_y", "1-Y"):
        return SymbolSpec.pair(1 - Y, X, "{1-Y, X}")
    if name in ("y_minus_x_pow", "Y-X^N"):
        return SymbolSpec.pair(Y - X**N, X, f"{{Y-X^{N}, X}}")
    raise ValueError(f"unknown symbol {name!r}")


def root_of_unity_map(N: int, power: int = 1) -> Automorphism:
    return Automorphism(f"zeta{N}^{power}", X, sympy.exp(2 * sympy.pi * sympy.I * power / N) * Y)


# ---------------------------------------------------------------- the series route

def _require_certificate(curve: CurveSpec, ctx: PrecisionContext):
    report = curve.certificate or check_assumptions(curve, ctx)
    if not report.passed:
        raise HypothesisError(f"curve fails the hypotheses: {report.as_dict()}")
    return report


def _series_constants(curve: CurveSpec, ctx: PrecisionContext):
    with ctx.workprec():
        lam_n = mp.re(curve.lambda_last)
        scale = curve.product_sign_value() * lam_n
        ratios = tuple(lam_n / l for l in curve.lambdas[:-1])
        return lam_n, scale, ratios


def _sup_on_path(curve: CurveSpec, ctx: PrecisionContext):
    """sup |f| over [0, l_n]; f vanishes at both ends so a critical point attains it."""
    with ctx.workprec():
        lam_n = mp.re(curve.lambda_last)
        crit = [c for c in critical_points(curve.f, Fraction(0), Fraction(1), ctx) if c < lam_n]
        return max(abs(curve.f(c)) for c in crit)


def _tail_constant(curve: CurveSpec):
    """int_0^1 |f(l_n s)|^(1/N) ds / s at modest precision."""
    low = PrecisionContext(64, 0)
    with low.workprec():
        lam_n = mp.re(curve.lambda_last)

        def integrand(s, v):
            val = abs(curve.f_real(lam_n * s, complement=lam_n * v))
            return val ** (mp.mpf(1) / curve.N) / s

        return tanh_sinh_quadrature(integrand, low, split=True, tol=mp.mpf(10) ** -6)


def series_truncation(curve: CurveSpec, tol, ctx: PrecisionContext) -> tuple[int, object]:
    """Smallest K whose tail bound sum_{k > K} |term_k| is below tol, and the bound.

    |term_k| <= M^((k-1)/N) C0 / (pi k), M = sup |f| on [0, l_n] < 1 and
    C0 = int |f|^(1/N) dt / t, so the tail after K is at most
    C0 M^(K/N) / (pi (K+1) (1 - M^(1/N))).
    """
    with ctx.workprec():
        m = _sup_on_path(curve, ctx)
        c0 = _tail_constant(curve)
        q = m ** (mp.mpf(1) / curve.N)
        k = 1
        while True:
            bound = c0 * q**k / (mp.pi * (k + 1) * (1 - q))
            if bound < tol:
                return k, bound
            k += 1


def series_amplitudes(curve: CurveSpec, ctx: PrecisionContext, tol=None, info: dict | None = None) -> list:
    """A_k / k for k = 1..K, where A_k = (P l_n)^(k/N) B(k/N, k/N) F_D(...)."""
    _require_certificate(curve, ctx)
    with ctx.workprec():
        tol = mp.mpf(10) ** -(ctx.dps - 2) if tol is None else mp.mpf(tol)
        lam_n, scale, ratios = _series_constants(curve, ctx)
        K, bound = series_truncation(curve, tol, ctx)
        use_series = all(abs(x) < 1 for x in ratios)
        out = []
        imag = mp.mpf(0)
        N = curve.N
        for k in range(1, K + 1):
            a = mp.mpf(k) / N
            pref = scale**a * beta(a, a, ctx) / k
            p = FDParams(a, (-a,) * len(ratios), 2 * a + 1, ratios)
            if use_series:
                F = fd_series(p, tol / (10 * max(abs(pref), 1)), ctx)
            else:
                F = fd_integral(p, ctx)
            val = pref * F
            imag = max(imag, abs(mp.im(val)))
            out.append(mp.re(val))
        if info is not None:
            info.update(terms=K, tail_bound=bound, max_imag=imag, method="fd_series" if use_series else "fd_integral")
        return out


def reg_series(curve: CurveSpec, ctx: PrecisionContext, tol=None, info: dict | None = None):
    """r({1 - Y, X})(delta) from the hypergeometric series."""
    local = {} if info is None else info
    amps = series_amplitudes(curve, ctx, tol, local)
    with ctx.workprec():
        N = curve.N
        total = mp.fsum(amp * mp.sinpi(mp.mpf(k) / N) for k, amp in enumerate(amps, start=1) if k % N)
        if local["max_imag"] > mp.mpf(10) ** -(ctx.dps - 3):
            raise ConvergenceError(f"series terms carry an imaginary part {mp.nstr(local['max_imag'], 5)}")
        return -total / (2 * mp.pi)


def reg_term_integral(curve: CurveSpec, k: int, ctx: PrecisionContext, info: dict | None = None):
    """k-th series term from int_0^1 s^(a-1) (1-s)^a prod (1 - x_i s)^a ds, a = k/N.

    ``info["imag"]`` receives the relative imaginary part of the integral,
    which vanishes because the x_i come in conjugate pairs.
    """
    _require_certificate(curve, ctx)
    N = curve.N
    if k % N == 0:
        return mp.mpf(0)
    with ctx.workprec():
        lam_n, scale, ratios = _series_constants(curve, ctx)
        a = mp.mpf(k) / N

        def integrand(s, v):
            val = s ** (a - 1) * v**a
            for x in ratios:
                val *= pow_principal(1 - x * s, a, ctx)
            return val

        value = tanh_sinh_quadrature(integrand, ctx, split=True)
        if info is not None:
            info["imag"] = abs(mp.im(value)) / abs(value)
        integral = mp.re(value)
        # B(a, a) F_D = 2 B(a, a + 1) F_D = 2 * integral
        return -scale**a * mp.sinpi(a) * 2 * integral / (2 * mp.pi * k)


def reg_term_integral_sum(curve: CurveSpec, ctx: PrecisionContext, tol=None):
    with ctx.workprec():
        tol = mp.mpf(10) ** -(ctx.dps - 2) if tol is None else mp.mpf(tol)
        K, _ = series_truncation(curve, tol, ctx)
        return mp.fsum(reg_term_integral(curve, k, ctx) for k in range(1, K + 1))


# ---------------------------------------------------------------- the path-integral route

def _unique_negative_root(curve: CurveSpec):
    neg = [l for l in curve.real_lambdas() if l < 0]
    if len(neg) != 1:
        raise SingularityOnPathError(f"delta_prime needs exactly one negative real branch point, found {len(neg)}")
    return mp.re(neg[0])


def _path_point(curve: CurveSpec, base: str, u, v, ctx: PrecisionContext):
    """(X, Y, dX/du, dY/du) on gamma for the base path, with v = 1 - u."""
    N = curve.N
    lams = curve.lambdas
    if base == "delta":
        lam = mp.re(lams[-1])
        t, dt = lam * u, lam
        pinned = len(lams) - 1
        gap = -lam * v  # t - l_n
    else:
        lam = _unique_negative_root(curve)
        t, dt = lam / u, -lam / u**2
        pinned = next(i for i, l in enumerate(lams) if l == lam)
        gap = lam * v / u  # t - l_1
    ft = t
    dlog = 1 / t
    for i, l in enumerate(lams):
        d = gap if i == pinned else t - l
        dlog += 1 / d
        if i == pinned or mp.im(l) == 0:
            ft *= mp.re(d)
        elif mp.im(l) > 0:
            ft *= mp.re(d) ** 2 + mp.im(d) ** 2
    y = pow_principal(ft, mp.mpf(1) / N, ctx)
    return t, y, dt, y * dlog * dt / N, ft


def _eta(funcs, x, y, dx, dy):
    f, fx, fy, g, gx, gy = funcs
    fv, gv = f(x, y), g(x, y)
    df = fx(x, y) * dx + fy(x, y) * dy
    dg = gx(x, y) * dx + gy(x, y) * dy
    return mp.log(abs(fv)) * mp.im(dg / gv) - mp.log(abs(gv)) * mp.im(df / fv)


def _loop_integrand(curve: CurveSpec, symbol: SymbolSpec, cycle: CycleSpec, ctx: PrecisionContext):
    compiled = symbol._compiled

    def integrand(u, v):
        x, y, dx, dy, ft = _path_point(curve, cycle.base, u, v, ctx)
        if ft >= 0:
            return mp.mpf(0)  # Y real: gamma and its conjugate coincide here
        halves = ((x, y, dx, dy), (mp.conj(x), mp.conj(y), mp.conj(dx), mp.conj(dy)))
        acc = mp.mpf(0)
        for cc, aut in cycle.terms:
            for sign, pt in zip((1, -1), halves):
                px = aut.push(*pt)
                for cs, funcs in compiled:
                    acc += sign * cc * cs * _eta(funcs, *px)
        return acc

    return integrand


def _endpoints(curve: CurveSpec, base: str) -> list:
    """The two ends of gamma as points (X, Y); None stands for the point at infinity."""
    if base == "delta":
        return [(mp.mpf(0), mp.mpf(0)), (mp.re(curve.lambda_last), mp.mpf(0))]
    return [None, (_unique_negative_root(curve), mp.mpf(0))]


def _finite_nonzero_at(func, aut: Automorphism, point) -> bool:
    if point is None:
        return False
    try:
        fx, fy = aut._compiled[:2]
        val = func(fx(*point), fy(*point))
    except ZeroDivisionError:
        return False
    return val != 0 and mp.isfinite(val)


def _winding_of_first_entry(curve: CurveSpec, symbol: SymbolSpec, cycle: CycleSpec, ctx: PrecisionContext, steps: int = 256):
    """Total change of arg f (first symbol entry) around the loop, by continued logarithms.

    Returns None when f has a zero or pole at an end of the path, where the
    change of argument is not defined.
    """
    ends = _endpoints(curve, cycle.base)
    for _, aut in cycle.terms:
        for _, funcs in symbol._compiled:
            if not all(_finite_nonzero_at(funcs[0], aut, e) for e in ends):
                return None
    eps = mp.ldexp(1, -ctx.prec_bits)
    pts = [mp.mpf(j) / steps for j in range(1, steps)] + [1 - eps]
    total = mp.mpf(0)
    for cc, aut in cycle.terms:
        for cs, funcs in symbol._compiled:
            f = funcs[0]

            def value(u, conj):
                x, y, dx, dy, _ = _path_point(curve, cycle.base, u, 1 - u, ctx)
                if conj:
                    x, y, dx, dy = mp.conj(x), mp.conj(y), mp.conj(dx), mp.conj(dy)
                return f(*aut.push(x, y, dx, dy)[:2])

            change = {}
            for conj in (False, True):
                start = prev = mp.log(value(eps, conj))
                lo = eps
                for hi in pts:
                    a = lo
                    while a < hi:
                        b = hi
                        for _ in range(60):
                            try:
                                nxt = log_tracked(prev, value(b, conj))
                                break
                            except StepTooLargeError:
                                b = (a + b) / 2
                        else:
                            raise SingularityOnPathError("argument tracking failed to converge")
                        prev, a = nxt, b
                    lo = hi
                change[conj] = mp.im(prev - start)
            # close the loop: gamma out, jump to conj(gamma), back, jump home
            jump_far = mp.arg(value(1 - eps, True) / value(1 - eps, False))
            jump_near = mp.arg(value(eps, False) / value(eps, True))
            total += cc * cs * (change[False] - change[True] + jump_far + jump_near)
    return total


def _check_path_clear(curve: CurveSpec, symbol: SymbolSpec, cycle: CycleSpec, ctx: PrecisionContext, steps: int = 1024):
    """Reject symbols with a zero or pole inside the path.

    A zero crossed between two samples shows up as a jump of arg close to pi.
    """
    for _, aut in cycle.terms:
        for _, funcs in symbol._compiled:
            for conj in (False, True):
                prev = {}
                for j in range(steps):
                    u = (mp.mpf(j) + mp.mpf(1) / 2) / steps
                    x, y, dx, dy, _ = _path_point(curve, cycle.base, u, 1 - u, ctx)
                    if conj:
                        x, y, dx, dy = mp.conj(x), mp.conj(y), mp.conj(dx), mp.conj(dy)
                    px, py = aut.push(x, y, dx, dy)[:2]
                    for idx in (0, 3):
                        try:
                            val = funcs[idx](px, py)
                        except ZeroDivisionError:
                            val = mp.inf
                        if val == 0 or not mp.isfinite(val):
                            raise SingularityOnPathError(f"symbol entry {'fg'[idx // 3]} is singular on the path at u = {mp.nstr(u, 6)}")
                        if idx in prev and abs(mp.arg(val / prev[idx])) > 3 * mp.pi / 4:
                            raise SingularityOnPathError(f"symbol entry {'fg'[idx // 3]} crosses zero or infinity near u = {mp.nstr(u, 6)}")
                        prev[idx] = val


def reg_direct(curve: CurveSpec, symbol: SymbolSpec, cycle: CycleSpec, ctx: PrecisionContext, info: dict | None = None):
    """r(symbol)(cycle) as (1/2pi) times the loop integral of eta.

    For a closed loop this is the logarithm-and-base-point formula
    integrated by parts; corner terms at zeros and poles of the symbol
    vanish because the tame symbols there are torsion.  The winding of the
    first entry is tracked as a runtime check that the base-point term is
    zero.
    """
    low = PrecisionContext(64, 0)
    with low.workprec():
        _check_path_clear(curve, symbol, cycle, low)
    with ctx.workprec():
        q = {}
        try:
            # absolute floor: some entries vanish identically by symmetry
            value = tanh_sinh_quadrature(_loop_integrand(curve, symbol, cycle, ctx), ctx, split=True, info=q,
                                         atol=ctx.quad_tol())
        except (DomainError, ZeroDivisionError) as exc:
            raise SingularityOnPathError(f"symbol is singular on the path: {exc}") from exc
        result = mp.re(value) / (2 * mp.pi)
    with low.workprec():
        winding = _winding_of_first_entry(curve, symbol, cycle, low)
    if winding is not None and abs(winding) > mp.mpf(10) ** -6:
        raise SingularityOnPathError(f"first symbol entry winds ({mp.nstr(winding / (2 * mp.pi), 6)} turns); base-point term is not zero")
    if info is not None:
        info.update(levels=q.get("level"), refinement_change=q.get("last_change", 0) / (2 * mp.pi),
                    imag=abs(mp.im(value)), winding=winding, base_point_term=mp.mpf(0) if winding is not None else None)
    return result


# ---------------------------------------------------------------- matrices and certificates

@dataclass
class RegulatorMatrix:
    case: str
    entries: list
    determinant: object
    checks: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


def _det(m):
    return mp.det(mp.matrix(m))


def curve_for_case(case: str, ctx: PrecisionContext) -> CurveSpec:
    table = {"e24": ("ex1", 4, 2), "e42": ("ex1", 2, 4), "e32k": ("ex1", 2, 3),
             "e23": ("ex1", 3, 2), "e23p": ("ex2", 3, 2)}
    if case not in table:
        raise ValueError(f"unknown case {case!r}")
    family, n, N = table[case]
    N, f = preset(family, n, 1 if family == "ex2" else None, N)
    curve = build_curve(N, f, ctx, strict=True)
    check_assumptions(curve, ctx)
    return curve


def reg_matrix(case: str, ctx: PrecisionContext, curve: CurveSpec | None = None) -> RegulatorMatrix:
    curve = curve or curve_for_case(case, ctx)
    N = curve.N
    xi = standard_symbol("one_minus_y", N)
    delta = CycleSpec("delta", name="delta")
    with ctx.workprec():
        if case == "e24":
            eta = standard_symbol("y_minus_x_pow", N)
            dprime = CycleSpec("delta_prime", name="delta'")
            entries = [[reg_direct(curve, s, c, ctx) for c in (delta, dprime)] for s in (xi, eta)]
            return RegulatorMatrix(case, entries, abs(_det(entries)))

        if case == "e42":
            sigma = Automorphism("sigma", -1 / X, Y / X)
            powers = [sigma.power(k) for k in range(5)]
            if sympy.simplify(powers[4].x - X) != 0 or sympy.simplify(powers[4].y - Y) != 0:
                raise ValueError("sigma does not have order 4")
            symbols = [xi if i == 0 else xi.pullback(powers[i]) for i in range(3)]
            cycles = [delta if j == 0 else delta.pushforward(powers[j]) for j in range(3)]
            entries = [[reg_direct(curve, s, c, ctx) for c in cycles] for s in symbols]
            # the same numbers with every automorphism moved onto the cycle
            pushed = [reg_direct(curve, xi, delta.pushforward(powers[k]), ctx) if k else entries[0][0] for k in range(4)]
            adjunction = max(abs(entries[i][j] - pushed[(i + j) % 4]) for i in range(3) for j in range(3))
            return RegulatorMatrix(case, entries, abs(_det(entries)), {"adjunction": adjunction}, {"distinct": pushed})

        if case == "e32k":
            zeta, zbar = root_of_unity_map(3, 1), root_of_unity_map(3, 2)
            xi_minus = SymbolSpec(xi.pullback(zeta).terms + tuple((-c, f, g) for c, f, g in xi.pullback(zbar).terms),
                                  "(zeta-zetabar)^*{1-Y, X}")
            d_minus = CycleSpec("delta", ((1, zeta), (-1, zbar)), "(zeta-zetabar)_*delta")
            raw = [[reg_direct(curve, xi, delta, ctx), reg_direct(curve, xi_minus, delta, ctx)],
                   [reg_direct(curve, xi, d_minus, ctx), reg_direct(curve, xi_minus, d_minus, ctx)]]
            # (zeta - zetabar)^2 = -3 on homology: the raw corner entry is -3 r(xi)(delta)
            norm = [row[:] for row in raw]
            norm[1][1] = raw[1][1] / -3
            pushed_corner = reg_direct(curve, xi, CycleSpec("delta", ((1, zeta @ zeta), (-1, IDENTITY), (-1, IDENTITY), (1, zbar @ zbar)), "d"), ctx)
            checks = {"adjunction": abs(raw[1][1] - pushed_corner)}
            return RegulatorMatrix(case, norm, abs(_det(norm)), checks,
                                   {"raw_entries": raw, "raw_determinant": abs(_det(raw))})
    raise ValueError(f"unknown case {case!r}")


@dataclass
class BetaCertificate:
    betas: list
    ordered: bool
    resummed: object
    lower_bound: object


def beta_k_certificate(curve: CurveSpec, ctx: PrecisionContext) -> BetaCertificate:
    """Group the series by k mod 2N and certify the sign of the regulator.

    beta_K = (1/2) sum_{k = K mod 2N} A_k / k; the regulator equals
    -(1/pi) sum_{K<N} sin(pi K/N) (beta_K - beta_{N+K}), which is negative
    once beta_1 > ... > beta_{2N} > 0.
    """
    info: dict = {}
    amps = series_amplitudes(curve, ctx, info=info)
    N = curve.N
    with ctx.workprec():
        betas = [mp.fsum(amps[k - 1] for k in range(K, len(amps) + 1, 2 * N)) / 2 for K in range(1, 2 * N + 1)]
        ordered = all(betas[i] > betas[i + 1] for i in range(2 * N - 1)) and betas[-1] > 0
        if not ordered:
            raise OrderingViolation(f"beta_K not strictly decreasing and positive: {[mp.nstr(b, 8) for b in betas]}")
        resummed = -mp.fsum(mp.sinpi(mp.mpf(K) / N) * (betas[K - 1] - betas[N + K - 1]) for K in range(1, N)) / mp.pi
        lower = abs(resummed) - 2 * (N - 1) * info["tail_bound"]
        return BetaCertificate(betas, ordered, resummed, lower)
