"""Dirichlet coefficients from Euler factors and derivatives of completed L-functions at s = 0.

The completed function is

    Lambda(s) = cond^(s/2) * (2 (2 pi)^-s Gamma(s))^d * L(s),   Lambda(s) = w Lambda(2 - s),

with d = 1 (elliptic curves over Q) or d = 2 (abelian surfaces, elliptic
curves over quadratic fields, products).  Lambda is evaluated by the
smoothed two-sided series

    Lambda(s) = c_d sum_n a_n [(Q/n)^s Phi(s, n tau/Q) + w (Q/n)^(2-s) Phi(2-s, n/(tau Q))]

where Phi is the incomplete Mellin transform of the inverse Mellin kernel:
Gamma(s, x) for d = 1 and int_x^oo 2 K0(2 sqrt u) u^(s-1) du for d = 2.
The result does not depend on tau > 0; comparing two values of tau is the
consistency check that pins down the sign, the conductor and bad factors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product as iproduct
from pathlib import Path

import mpmath as mp
import numpy as np
import sympy

from .hiprec import PrecisionContext, bessel_k0, upper_incomplete_gamma


class LFunctionError(ValueError):
    pass


class BadPrimeError(LFunctionError):
    pass


class TailTooLargeError(ArithmeticError):
    pass


class SignUnknownError(LFunctionError):
    pass


class LSpecError(LFunctionError):
    """Invalid L-spec configuration; the message starts with the offending field path."""


SOURCES = ("elliptic-q", "twist", "elliptic-qi", "genus2-count", "file", "product")


# ---------------------------------------------------------------- finite field counting

def _chi_table(p: int) -> np.ndarray:
    """Quadratic character of F_p as a lookup table."""
    t = np.full(p, -1, dtype=np.int64)
    t[0] = 0
    t[(np.arange(1, p, dtype=np.int64) ** 2) % p] = 1
    return t


def _horner_mod(coeffs, x: np.ndarray, p: int) -> np.ndarray:
    v = np.zeros_like(x)
    for c in reversed(coeffs):
        v = (v * x + int(c) % p) % p
    return v


def _fp2_nonresidue(p: int, chi: np.ndarray) -> int:
    return next(r for r in range(2, p) if chi[r] == -1)


def _fp2_grid(p: int):
    a = np.repeat(np.arange(p, dtype=np.int64), p)
    b = np.tile(np.arange(p, dtype=np.int64), p)
    return a, b


def _fp2_horner(coeffs, a, b, nr: int, p: int):
    """Evaluate an F_p-polynomial at x = a + b alpha, alpha^2 = nr."""
    va = np.zeros_like(a)
    vb = np.zeros_like(a)
    for c in reversed(coeffs):
        va, vb = (va * a + vb * b % p * nr + int(c)) % p, (va * b + vb * a) % p
    return va, vb


def count_hyperelliptic(f, p: int, extension: int = 1) -> int:
    """#C(F_q), q = p or p^2, for y^2 = f(x) of odd degree (one point at infinity)."""
    if p == 2:
        raise BadPrimeError("y^2 = f(x) models are singular in characteristic 2")
    if len(f) % 2 != 0:
        raise LFunctionError("only odd-degree models are supported")
    chi = _chi_table(p)
    if extension == 1:
        v = _horner_mod(f, np.arange(p, dtype=np.int64), p)
        return p + 1 + int(chi[v].sum())
    if extension == 2:
        nr = _fp2_nonresidue(p, chi) if p % 4 == 1 else p - 1
        a, b = _fp2_grid(p)
        va, vb = _fp2_horner(f, a, b, nr, p)
        # a value is a square in F_{p^2} iff its norm is a square in F_p
        norm = (va * va - nr * vb * vb) % p
        return p * p + 1 + int(chi[norm].sum())
    raise ValueError("extension must be 1 or 2")


def _count_weierstrass(a, p: int) -> int:
    """#E(F_p) for y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6, including infinity."""
    a1, a2, a3, a4, a6 = a
    if p <= 3:
        count = 1
        for x, y in iproduct(range(p), repeat=2):
            if (y * y + a1 * x * y + a3 * y - (x ** 3 + a2 * x * x + a4 * x + a6)) % p == 0:
                count += 1
        return count
    # complete the square: (2y + a1 x + a3)^2 = 4 x^3 + b2 x^2 + 2 b4 x + b6
    b2, b4, b6 = a1 * a1 + 4 * a2, a1 * a3 + 2 * a4, a3 * a3 + 4 * a6
    v = _horner_mod([b6, 2 * b4, b2, 4], np.arange(p, dtype=np.int64), p)
    return p + 1 + int(_chi_table(p)[v].sum())


def weierstrass_discriminant(a) -> int:
    a1, a2, a3, a4, a6 = a
    b2, b4, b6 = a1 * a1 + 4 * a2, a1 * a3 + 2 * a4, a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


def _poly_disc(f) -> int:
    t = sympy.Symbol("t")
    return int(sympy.discriminant(sum(int(c) * t ** i for i, c in enumerate(f)), t))


# ---------------------------------------------------------------- local factors

def _as_ainvariants(curve) -> list:
    """Accept a-invariants [a1, a2, a3, a4, a6] or a monic cubic f (y^2 = f) ascending."""
    coeffs = [int(c) for c in getattr(curve, "coeffs", curve)]
    if len(coeffs) == 5:
        return coeffs
    if len(coeffs) == 4 and coeffs[3] == 1:
        return [0, coeffs[2], 0, coeffs[1], coeffs[0]]
    raise LFunctionError("elliptic model must be a-invariants or a monic cubic")


def euler_elliptic_q(curve, p: int, max_degree: int = 2) -> list:
    """Local factor 1 - a_p T + p T^2 at a good prime.

    ``curve`` is either a-invariants (a1, a2, a3, a4, a6) or the ascending
    coefficients of a monic cubic f with y^2 = f(x).
    """
    a = _as_ainvariants(curve)
    if weierstrass_discriminant(a) % p == 0:
        raise BadPrimeError(f"p = {p} divides the discriminant and no bad factor was supplied")
    ap = p + 1 - _count_weierstrass(a, p)
    return [1, -ap, p][: max_degree + 1]


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D / n) for n > 0."""
    if n <= 0:
        raise ValueError("n must be positive")
    result = 1
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        if D % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * int(sympy.jacobi_symbol(D % n, n))


def euler_twist(base_factor, D: int, p: int, max_degree: int = 2) -> list:
    """Twist a local factor by the Kronecker character of D: P(T) -> P(chi_D(p) T)."""
    chi = kronecker(D, p)
    if chi == 0:
        raise BadPrimeError(f"p = {p} divides the twisting discriminant {D}")
    poly = base_factor(p, max_degree) if callable(base_factor) else list(base_factor)
    return [c * chi ** k for k, c in enumerate(poly)][: max_degree + 1]


def _gauss_mul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _qi_discriminant(a4, a6):
    """-16 (4 a4^3 + 27 a6^2) in Z[i], as (re, im)."""
    cube = _gauss_mul(_gauss_mul(a4, a4), a4)
    sq = _gauss_mul(a6, a6)
    return (-16 * (4 * cube[0] + 27 * sq[0]), -16 * (4 * cube[1] + 27 * sq[1]))


def _sqrt_minus_one(p: int) -> list:
    r = sympy.sqrt_mod(p - 1, p, all_roots=True)
    return sorted(r)


def _count_short_fp2_i(a4, a6, p: int) -> int:
    """#E(F_{p^2}) for y^2 = x^3 + a4 x + a6 with a4, a6 in F_p[i], p = 3 mod 4."""
    chi = _chi_table(p)
    a, b = _fp2_grid(p)
    x2a, x2b = (a * a - b * b) % p, (2 * a * b) % p
    x3a, x3b = (x2a * a - x2b * b) % p, (x2a * b + x2b * a) % p
    va = (x3a + a4[0] * a - a4[1] * b + a6[0]) % p
    vb = (x3b + a4[0] * b + a4[1] * a + a6[1]) % p
    norm = (va * va + vb * vb) % p
    return p * p + 1 + int(chi[norm].sum())


def euler_elliptic_qi(a4, a6, p: int, max_degree: int = 4) -> list:
    """Local factor at the rational prime p of L(E/Q(i), s), y^2 = x^3 + a4 x + a6.

    Split p: product of the two degree-2 factors, one per square root of -1
    mod p.  Inert p: 1 - A T^2 + p^2 T^4 from a count over F_{p^2} = F_p[i].
    """
    a4, a6 = tuple(int(c) for c in a4), tuple(int(c) for c in a6)
    if p == 2:
        raise BadPrimeError("p = 2 ramifies in Z[i]; supply its factor")
    disc = _qi_discriminant(a4, a6)
    if p % 4 == 1:
        poly = [1]
        for r in _sqrt_minus_one(p):
            if (disc[0] + disc[1] * r) % p == 0:
                raise BadPrimeError(f"bad reduction above p = {p} (i -> {r})")
            b4 = [0, 0, 0, (a4[0] + a4[1] * r) % p, (a6[0] + a6[1] * r) % p]
            ap = p + 1 - _count_weierstrass(b4, p)
            poly = _poly_mul(poly, [1, -ap, p])
        return poly[: max_degree + 1]
    if disc[0] % p == 0 and disc[1] % p == 0:
        raise BadPrimeError(f"bad reduction at the inert prime {p}")
    if max_degree < 2:
        return [1, 0][: max_degree + 1]
    big = p * p + 1 - _count_short_fp2_i((a4[0] % p, a4[1] % p), (a6[0] % p, a6[1] % p), p)
    return [1, 0, -big, 0, p * p][: max_degree + 1]


def euler_genus2(f, p: int, max_degree: int = 4) -> list:
    """Local factor 1 + c1 T + c2 T^2 + p c1 T^3 + p^2 T^4 of y^2 = f(x), deg f = 5."""
    f = [int(c) for c in getattr(f, "coeffs", f)]
    if len(f) != 6:
        raise LFunctionError("genus-2 counting needs a quintic")
    if p == 2 or f[-1] % p == 0 or _poly_disc(f) % p == 0:
        raise BadPrimeError(f"p = {p} is a bad prime for y^2 = f(x)")
    c1 = count_hyperelliptic(f, p) - p - 1
    if max_degree < 2:
        return [1, c1][: max_degree + 1]
    s2 = p * p + 1 - count_hyperelliptic(f, p, 2)
    c2 = (c1 * c1 - s2) // 2
    return [1, c1, c2, p * c1, p * p][: max_degree + 1]


def _poly_mul(a, b) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


# ---------------------------------------------------------------- specs

@dataclass
class LSpec:
    degree: int
    conductor: int
    gamma_mult: int
    sign: object
    coeffs: dict
    bad_factors: dict = field(default_factory=dict)
    n_max: object = "auto"
    name: str = ""
    provenance: dict = field(default_factory=dict)
    base_dir: str = "."

    def key(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def to_json(self) -> dict:
        coeffs = dict(self.coeffs)
        for k in ("base",):
            if isinstance(coeffs.get(k), LSpec):
                coeffs[k] = coeffs[k].to_json()
        if "factors" in coeffs:
            coeffs["factors"] = [c.to_json() if isinstance(c, LSpec) else c for c in coeffs["factors"]]
        return {"degree": self.degree, "conductor": self.conductor, "gamma_mult": self.gamma_mult,
                "sign": self.sign, "coeffs": coeffs, "n_max": self.n_max,
                "bad_factors": [{"p": p, "poly": list(v)} for p, v in sorted(self.bad_factors.items())]}

    def with_sign(self, w: int) -> "LSpec":
        return LSpec(self.degree, self.conductor, self.gamma_mult, w, self.coeffs, self.bad_factors,
                     self.n_max, self.name, self.provenance, self.base_dir)

    def with_n_max(self, n_max) -> "LSpec":
        return LSpec(self.degree, self.conductor, self.gamma_mult, self.sign, self.coeffs, self.bad_factors,
                     n_max, self.name, self.provenance, self.base_dir)


def _require(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise LSpecError(f"{path or '<root>'}: expected an object")
    if key not in obj:
        raise LSpecError(f"{path}{'.' if path else ''}{key}: missing")
    return obj[key]


def _int_list(v, path: str) -> list:
    if not isinstance(v, list) or not all(isinstance(c, int) and not isinstance(c, bool) for c in v):
        raise LSpecError(f"{path}: expected a list of integers")
    return list(v)


def lspec_from_json(obj, path: str = "", base_dir: str = ".") -> LSpec:
    """Validate a parsed L-spec; errors name the offending field."""
    def at(k):
        return f"{path}.{k}" if path else k

    degree = _require(obj, "degree", path)
    if degree not in (2, 4):
        raise LSpecError(f"{at('degree')}: must be 2 or 4")
    conductor = _require(obj, "conductor", path)
    if not isinstance(conductor, int) or isinstance(conductor, bool) or conductor < 1:
        raise LSpecError(f"{at('conductor')}: must be a positive integer")
    gm = obj.get("gamma_mult", degree // 2)
    if gm not in (1, 2) or 2 * gm != degree:
        raise LSpecError(f"{at('gamma_mult')}: must be degree/2 (1 or 2)")
    sign = obj.get("sign", "solve")
    if sign not in (1, -1, "solve"):
        raise LSpecError(f"{at('sign')}: must be 1, -1 or \"solve\"")
    n_max = obj.get("n_max", "auto")
    if n_max != "auto" and (not isinstance(n_max, int) or n_max < 1):
        raise LSpecError(f"{at('n_max')}: must be a positive integer or \"auto\"")
    bad = {}
    for i, entry in enumerate(obj.get("bad_factors", [])):
        p = _require(entry, "p", at(f"bad_factors[{i}]"))
        if not isinstance(p, int) or not sympy.isprime(p):
            raise LSpecError(f"{at(f'bad_factors[{i}]')}.p: must be a prime")
        poly = _int_list(_require(entry, "poly", at(f"bad_factors[{i}]")), at(f"bad_factors[{i}].poly"))
        if not poly or poly[0] != 1:
            raise LSpecError(f"{at(f'bad_factors[{i}]')}.poly: must start with constant term 1")
        bad[p] = tuple(poly)
    coeffs = dict(_require(obj, "coeffs", path))
    cpath = at("coeffs")
    source = _require(coeffs, "source", cpath)
    if source not in SOURCES:
        raise LSpecError(f"{cpath}.source: unknown source {source!r}")
    if source == "elliptic-q":
        if "a" in coeffs:
            if len(_int_list(coeffs["a"], f"{cpath}.a")) != 5:
                raise LSpecError(f"{cpath}.a: need five a-invariants")
        else:
            f = _int_list(_require(coeffs, "f", cpath), f"{cpath}.f")
            if len(f) != 4 or f[-1] != 1:
                raise LSpecError(f"{cpath}.f: need a monic cubic, ascending coefficients")
    elif source == "twist":
        coeffs["base"] = lspec_from_json(_require(coeffs, "base", cpath), f"{cpath}.base", base_dir)
        D = _require(coeffs, "D", cpath)
        if not isinstance(D, int) or D in (0, 1):
            raise LSpecError(f"{cpath}.D: must be a fundamental discriminant")
    elif source == "elliptic-qi":
        for k in ("a4", "a6"):
            if len(_int_list(_require(coeffs, k, cpath), f"{cpath}.{k}")) != 2:
                raise LSpecError(f"{cpath}.{k}: need [real, imaginary]")
    elif source == "genus2-count":
        if len(_int_list(_require(coeffs, "f", cpath), f"{cpath}.f")) != 6:
            raise LSpecError(f"{cpath}.f: need a quintic, ascending coefficients")
    elif source == "file":
        if not isinstance(_require(coeffs, "path", cpath), str):
            raise LSpecError(f"{cpath}.path: must be a string")
    elif source == "product":
        factors = _require(coeffs, "factors", cpath)
        if not isinstance(factors, list) or len(factors) < 2:
            raise LSpecError(f"{cpath}.factors: need at least two factors")
        coeffs["factors"] = [lspec_from_json(fac, f"{cpath}.factors[{i}]", base_dir) for i, fac in enumerate(factors)]
        if sum(f.degree for f in coeffs["factors"]) != degree:
            raise LSpecError(f"{cpath}.factors: degrees do not add up to {degree}")
    return LSpec(degree, conductor, gm, sign, coeffs, bad, n_max, obj.get("name", ""),
                 dict(obj.get("provenance", {})), base_dir)


def load_lspec(path) -> LSpec:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise LSpecError(f"<root>: malformed JSON ({exc})") from None
    return lspec_from_json(obj, base_dir=str(path.parent))


# ---------------------------------------------------------------- Dirichlet coefficients

def local_factor(spec: LSpec, p: int, max_degree: int) -> list:
    """Euler factor of ``spec`` at p, truncated to T^max_degree."""
    if p in spec.bad_factors:
        return list(spec.bad_factors[p])[: max_degree + 1]
    c = spec.coeffs
    src = c["source"]
    if src == "elliptic-q":
        return euler_elliptic_q(c["a"] if "a" in c else c["f"], p, max_degree)
    if src == "twist":
        return euler_twist(lambda q, k: local_factor(c["base"], q, k), c["D"], p, max_degree)
    if src == "elliptic-qi":
        return euler_elliptic_qi(c["a4"], c["a6"], p, max_degree)
    if src == "genus2-count":
        return euler_genus2(c["f"], p, max_degree)
    if src == "product":
        poly = [1]
        for fac in c["factors"]:
            poly = _poly_mul(poly, local_factor(fac, p, max_degree))
        return poly[: max_degree + 1]
    raise LFunctionError(f"source {src!r} has no local factors")


def read_coefficient_file(path, n_max: int) -> list:
    """Read "n a_n" lines; returns a list indexed by n (a[0] unused)."""
    a = [0] * (n_max + 1)
    seen = set()
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        n, v = (int(t) for t in line.split())
        if n <= n_max:
            a[n] = v
            seen.add(n)
    missing = [n for n in range(1, n_max + 1) if n not in seen]
    if missing:
        raise LFunctionError(f"coefficient file stops before n_max (first missing n = {missing[0]})")
    return a


def _smallest_prime_factors(n: int) -> list:
    spf = list(range(n + 1))
    for i in range(2, int(n ** 0.5) + 1):
        if spf[i] == i:
            for j in range(i * i, n + 1, i):
                if spf[j] == j:
                    spf[j] = i
    return spf


def dirichlet_coefficients(spec: LSpec, n_max: int) -> list:
    """a_1 .. a_{n_max} (index 0 unused) from the Euler product."""
    if spec.coeffs["source"] == "file":
        return read_coefficient_file(Path(spec.base_dir) / spec.coeffs["path"], n_max)
    a = [0] * (n_max + 1)
    if n_max >= 1:
        a[1] = 1
    for p in sympy.primerange(2, n_max + 1):
        k_max = int(math.log(n_max) / math.log(p) + 1e-9)
        while p ** (k_max + 1) <= n_max:
            k_max += 1
        while p ** k_max > n_max:
            k_max -= 1
        poly = local_factor(spec, p, k_max)
        # power series of 1 / poly(T)
        ser = [1]
        for k in range(1, k_max + 1):
            ser.append(-sum(poly[j] * ser[k - j] for j in range(1, min(k, len(poly) - 1) + 1)))
        pk = 1
        for k in range(1, k_max + 1):
            pk *= p
            a[pk] = ser[k]
    spf = _smallest_prime_factors(n_max)
    for n in range(2, n_max + 1):
        p = spf[n]
        m, pk = n, 1
        while m % p == 0:
            m //= p
            pk *= p
        if m > 1:
            a[n] = a[pk] * a[m]
    return a


def weil_violations(spec: LSpec, a: list) -> list:
    """Primes p <= len(a) - 1, not bad, with |a_p| > degree * sqrt(p)."""
    out = []
    for p in sympy.primerange(2, len(a)):
        if p not in spec.bad_factors and a[p] * a[p] > spec.degree ** 2 * p:
            out.append(p)
    return out


# ---------------------------------------------------------------- kernels

_GL_CACHE: dict = {}


def gauss_legendre_nodes(m: int, prec: int) -> list:
    """Nodes and weights on [-1, 1] by Newton iteration on P_m."""
    key = (m, prec)
    if key in _GL_CACHE:
        return _GL_CACHE[key]
    out = []
    with mp.workprec(prec + 20):
        tol = mp.ldexp(1, -prec - 10)
        for i in range(1, m + 1):
            x = mp.cos(mp.pi * (i - mp.mpf(1) / 4) / (m + mp.mpf(1) / 2))
            for _ in range(100):
                p0, p1 = mp.mpf(1), x
                for k in range(2, m + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = m * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < tol:
                    break
            p0, p1 = mp.mpf(1), x
            for k in range(2, m + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = m * (x * p1 - p0) / (x * x - 1)
            out.append((x, 2 / ((1 - x * x) * dp * dp)))
    _GL_CACHE[key] = out
    return out


class K0Kernel:
    """Incomplete Mellin transforms int_x^oo 2 K0(2 sqrt u) u^(s-1) du at a fixed set of x.

    The half-line beyond the smallest x is cut at the points themselves and at
    geometrically spaced points out to where the integrand is negligible; each
    piece gets a Gauss-Legendre rule sized from the Bernstein ellipse that
    avoids the branch point at u = 0.  Nodes, log-nodes and K0 weights are
    computed once; each new s costs one exp per node.
    """

    def __init__(self, xs, ctx: PrecisionContext, sigma_max: float = 4.0):
        self.ctx = ctx
        digits = ctx.dps + 5
        with ctx.workprec():
            pts = sorted(set(mp.mpf(x) for x in xs))
            top = pts[-1]
            eps = mp.mpf(10) ** (-digits)
            extra = []
            X = top
            while 2 * bessel_k0(2 * mp.sqrt(X), ctx) * X ** (sigma_max + 1) > eps:
                X += max(1, X / 8)
                extra.append(X)
            self.points = pts + extra
            self.pieces = []
            for a, b in zip(self.points[:-1], self.points[1:]):
                h, c = (b - a) / 2, (a + b) / 2
                ratio = c / h
                rho = float(ratio + mp.sqrt(ratio * ratio - 1))
                m = max(4, math.ceil(digits * math.log(10) / (2 * math.log(rho))) + 2)
                nodes = []
                for xn, wn in gauss_legendre_nodes(m, ctx.prec_bits):
                    u = c + h * xn
                    nodes.append((mp.log(u), h * wn * 2 * bessel_k0(2 * mp.sqrt(u), ctx)))
                self.pieces.append(nodes)
            self.index = {x: i for i, x in enumerate(self.points)}

    def values(self, s, xs) -> list:
        """Phi(s, x) for each x in xs (all must be among the construction points)."""
        with self.ctx.workprec():
            s1 = mp.mpmathify(s) - 1
            acc = mp.mpf(0)
            cumulative = [None] * len(self.points)
            for i in range(len(self.pieces) - 1, -1, -1):
                acc += mp.fsum(w * mp.exp(s1 * lu) for lu, w in self.pieces[i])
                cumulative[i] = acc
            return [cumulative[self.index[mp.mpf(x)]] for x in xs]


# ---------------------------------------------------------------- completed L-function

def _q_and_const(spec: LSpec):
    d = spec.gamma_mult
    Q = mp.sqrt(spec.conductor) / (2 * mp.pi) ** d
    return Q, 2 ** d


def _tail_log_terms(spec: LSpec, n: np.ndarray, tau: float) -> np.ndarray:
    """Log of an upper envelope for the n-th term of the two-sided series (both halves)."""
    d = spec.gamma_mult
    Q = math.sqrt(spec.conductor) / (2 * math.pi) ** d
    t = min(tau, 1 / tau)
    log_a = np.log(2.0 * n) if spec.degree == 2 else np.log(8.0 * n * n)
    x = n * t / Q
    # tau^(sigma - 1) over sigma in [-1, 3] is at most max(tau, 1/tau)^2
    slack = 2 * abs(math.log(tau)) + math.log(2 * 2 ** d)
    if d == 1:
        # Gamma(sigma, x) <= 2 x^(sigma-1) e^(-x) once x exceeds |sigma| + 2
        body = np.log(2.0) + np.log(Q / n) - x
    else:
        # int_x^oo 2 K0(2 sqrt u) u^(sigma-1) du <= 2 sqrt(pi) x^(sigma-3/4) e^(-2 sqrt x) for large x
        body = math.log(2 * math.sqrt(math.pi)) + 0.75 * np.log(Q / n) - 2 * np.sqrt(x)
    return log_a + slack + body


def tail_estimate(spec: LSpec, n_max: int, tau: float = 1.0) -> float:
    """Upper estimate of sum_{n > n_max} |term_n| (an envelope, not a proof)."""
    total = 0.0
    start = n_max + 1
    block = max(1024, n_max)
    while True:
        n = np.arange(start, start + block, dtype=np.float64)
        logs = _tail_log_terms(spec, n, tau)
        part = float(np.exp(logs).sum())
        total += part
        if logs[-1] < math.log(max(total, 1e-300)) - 50 or part == 0.0:
            return total
        start += block
        block *= 2


def auto_n_max(spec: LSpec, digits: int, tau: float = 1.2) -> int:
    """Smallest n_max whose tail envelope is below 10^-digits for all tau in [1/tau, tau]."""
    target = 10.0 ** (-digits)
    lo, hi = 1, 16
    while tail_estimate(spec, hi, tau) > target:
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail_estimate(spec, mid, tau) > target:
            lo = mid
        else:
            hi = mid
    return hi


class LEvaluator:
    """Caches the coefficients and kernels of one spec at one precision."""

    def __init__(self, spec: LSpec, ctx: PrecisionContext, n_max: int | None = None):
        self.spec, self.ctx = spec, ctx
        if n_max is None:
            n_max = auto_n_max(spec, ctx.dps) if spec.n_max == "auto" else spec.n_max
        self.n_max = n_max
        self.a = dirichlet_coefficients(spec, n_max)
        self.support = [n for n in range(1, n_max + 1) if self.a[n] != 0]
        self._kernels: dict = {}

    def tail(self, tau) -> float:
        return tail_estimate(self.spec, self.n_max, float(tau))

    def _phi(self, s, x_scale) -> list:
        """Phi(s, n * x_scale) for n in the support."""
        ctx = self.ctx
        with ctx.workprec():
            xs = [n * x_scale for n in self.support]
            if self.spec.gamma_mult == 1:
                return [upper_incomplete_gamma(s, x, ctx) for x in xs]
            key = mp.nstr(x_scale, ctx.dps)
            if key not in self._kernels:
                self._kernels[key] = K0Kernel(xs, ctx)
            return self._kernels[key].values(s, xs)

    def halves(self, s, tau=1):
        """(A, B) with Lambda(s) = A + w B."""
        ctx = self.ctx
        with ctx.workprec():
            s, tau = mp.mpmathify(s), mp.mpf(tau)
            Q, c = _q_and_const(self.spec)
            p1 = self._phi(s, tau / Q)
            p2 = self._phi(2 - s, 1 / (tau * Q))
            A = mp.fsum(self.a[n] * mp.power(Q / n, s) * v for n, v in zip(self.support, p1))
            B = mp.fsum(self.a[n] * mp.power(Q / n, 2 - s) * v for n, v in zip(self.support, p2))
            return c * A, c * B

    def completed(self, s, tau=1, tol=None):
        w = self.spec.sign
        if w == "solve":
            raise SignUnknownError("root number not resolved; call solve_sign first")
        if tol is not None and self.tail(tau) > tol:
            raise TailTooLargeError(f"tail estimate {self.tail(tau):.3g} exceeds {float(tol):.3g} at n_max = {self.n_max}")
        A, B = self.halves(s, tau)
        return A + w * B


_EVALUATORS: dict = {}


def evaluator(spec: LSpec, ctx: PrecisionContext, n_max: int | None = None) -> LEvaluator:
    key = (spec.key(), ctx.prec_bits, n_max)
    ev = _EVALUATORS.get(key)
    if ev is None:
        ev = _EVALUATORS[key] = LEvaluator(spec, ctx, n_max)
    return ev


def completed_lambda(spec: LSpec, s, ctx: PrecisionContext, tau=1):
    """Lambda(s) = cond^(s/2) (2 (2 pi)^-s Gamma(s))^d L(s)."""
    ev = evaluator(spec, ctx)
    return ev.completed(s, tau, tol=mp.mpf(10) ** (-ctx.digits))


def fe_residual(spec: LSpec, s, ctx: PrecisionContext, tau=mp.mpf("1.15")):
    """|Lambda(s) - w Lambda(2 - s)| with the two sides split at different tau.

    With tau = 1 this vanishes by construction; with tau != 1 it tests the
    sign, the conductor and every Euler factor at once.
    """
    ev = evaluator(spec, ctx)
    with ctx.workprec():
        return abs(ev.completed(s, tau) - spec.sign * ev.completed(2 - s, 1))


def solve_sign(spec: LSpec, ctx: PrecisionContext, s0=mp.mpf("1.3"), tau=mp.mpf("1.15")):
    """Resolve w = "solve" by requiring Lambda to be independent of tau.

    Returns (spec with the sign filled in, residuals {+1: r, -1: r}).
    """
    ev = evaluator(spec.with_sign(1), ctx)
    with ctx.workprec():
        A1, B1 = ev.halves(s0, 1)
        A2, B2 = ev.halves(s0, tau)
        res = {w: abs((A1 + w * B1) - (A2 + w * B2)) for w in (1, -1)}
        scale = max(abs(A1), abs(B1), 1)
        good = [w for w in (1, -1) if res[w] < mp.mpf(10) ** (-ctx.digits // 2) * scale]
    if len(good) != 1:
        raise SignUnknownError(f"no unique root number: residuals {({k: mp.nstr(v, 5) for k, v in res.items()})}")
    return spec.with_sign(good[0]), res


def _l_from_lambda(spec: LSpec, s, lam):
    d = spec.gamma_mult
    return lam * s ** d / (mp.power(spec.conductor, s / 2) * 2 ** d * mp.power(2 * mp.pi, -d * s) * mp.gamma(s + 1) ** d)


def l_derivative_at_zero(spec: LSpec, r: int, ctx: PrecisionContext, h=None, info: dict | None = None):
    """r-th derivative of L at s = 0 by a Cauchy circle around the origin.

    L(s) = Lambda(s) s^d / (cond^(s/2) 2^d (2 pi)^(-d s) Gamma(s+1)^d) is
    analytic at 0; its Taylor coefficient is the mean of L(h e^(i theta))
    e^(-i r theta) over 16 (r + 1) equally spaced angles.  Lambda is computed
    with r * digits / 4 extra digits to absorb the 1/h^r amplification.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    d = spec.gamma_mult
    if r < d:
        return mp.mpf(0)
    if spec.sign == "solve":
        spec, _ = solve_sign(spec, ctx)
    digits = ctx.digits
    h = mp.mpf(10) ** (-mp.mpf(digits) / 4) if h is None else mp.mpf(h)
    extra = math.ceil(r * digits / 4) + 2
    work = PrecisionContext.for_digits(digits + extra, ctx.guard_digits)
    ev = evaluator(spec, work)
    with work.workprec():
        tol = mp.mpf(10) ** (-(digits + extra))
        if ev.tail(1) > tol:
            raise TailTooLargeError(f"tail estimate {ev.tail(1):.3g} exceeds {float(tol):.3g}")
        M = 16 * (r + 1)
        total = mp.mpc(0)
        for j in range(M):
            z = mp.expjpi(mp.mpf(2 * j) / M)
            s = h * z
            total += _l_from_lambda(spec, s, ev.completed(s)) * z ** (-r)
        value = total / M * mp.factorial(r) / h ** r
        imag = abs(mp.im(value))
        if imag > mp.mpf(10) ** (-(digits - 3)) * max(1, abs(value)):
            raise ArithmeticError(f"derivative has imaginary part {mp.nstr(imag, 5)}")
        if info is not None:
            info.update(n_max=ev.n_max, h=h, nodes=M, imag=imag, sign=spec.sign, tail=ev.tail(1))
        with ctx.workprec():
            return +mp.re(value)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for j in range(total + 1):
        for rest in _compositions(total - j, parts - 1):
            yield (j,) + rest


def leibniz_product_derivative(factors, r: int):
    """r-th derivative at 0 of a product of functions.

    ``factors`` is a list of (derivatives, vanishing_order) where
    derivatives[j] is the j-th derivative at 0 (a list or a dict).  Terms
    in which some factor is differentiated fewer times than its vanishing
    order are zero and dropped.
    """
    total = 0
    for js in _compositions(r, len(factors)):
        if any(j < order for j, (_, order) in zip(js, factors)):
            continue
        coef = math.factorial(r)
        for j in js:
            coef //= math.factorial(j)
        term = coef
        for j, (ds, _) in zip(js, factors):
            try:
                term = term * ds[j]
            except (IndexError, KeyError):
                raise ValueError(f"missing derivative of order {j}") from None
        total = total + term
    return total
