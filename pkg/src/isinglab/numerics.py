"""Scalars, precision handling and polynomial arithmetic.

Two kinds of coefficients coexist:

* exact: ``int``, ``fractions.Fraction`` or :class:`GaussRat` (a complex
  number with rational parts);
* inexact: ``mpmath.mpc`` at the working precision of a
  :class:`PrecisionContext`.

A :class:`Poly` holding only exact coefficients is exact and every operation on
it with exact arguments stays exact.
"""

from __future__ import annotations

import math
import os
import re
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import mpmath
import numpy as np

from .errors import IsingLabError, fail

DEFAULT_DIGITS = 50
PRECISION_ENV = "ISING_LAB_PRECISION"


# ---------------------------------------------------------------------------
# precision
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrecisionContext:
    """Working precision (decimal digits) and the comparison tolerance."""

    working_digits: int = DEFAULT_DIGITS
    tolerance: float = field(default=None)

    def __post_init__(self):
        if int(self.working_digits) != self.working_digits or self.working_digits < 30:
            fail("DOMAIN", f"working_digits must be an integer >= 30, got {self.working_digits}")
        if self.tolerance is None:
            object.__setattr__(self, "tolerance", 10.0 ** (-self.working_digits / 2))
        if not self.tolerance > 0:
            fail("DOMAIN", "tolerance must be positive")

    @contextmanager
    def activate(self):
        """Run a block with mpmath at this precision (plus guard digits)."""
        with mpmath.workdps(self.working_digits + 5):
            yield self

    def escalated(self, factor: int = 2) -> "PrecisionContext":
        return PrecisionContext(self.working_digits * factor)


def default_context() -> PrecisionContext:
    raw = os.environ.get(PRECISION_ENV)
    if raw:
        try:
            return PrecisionContext(int(raw))
        except ValueError:
            fail("PARSE_ERROR", f"{PRECISION_ENV}={raw!r} is not an integer")
    return PrecisionContext()


# ---------------------------------------------------------------------------
# point at infinity
# ---------------------------------------------------------------------------

class _Infinity:
    """The point at infinity of the Riemann sphere (singleton)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(x) -> bool:
    return x is INF


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------

class GaussRat:
    """Complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussRat is immutable")

    @staticmethod
    def _coerce(x):
        if isinstance(x, GaussRat):
            return x
        if isinstance(x, Rational):
            return GaussRat(x, 0)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return GaussRat(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return GaussRat(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return GaussRat(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("GaussRat division by zero")
        num = self * o.conjugate()
        return GaussRat(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return GaussRat(1) / (self ** (-k))
        out, base = GaussRat(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self):
        return GaussRat(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self):
        return math.sqrt(self.abs2())

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            if isinstance(other, complex):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussRat({self.re}, {self.im})"

    def __str__(self):
        return format_exact(self)


ExactTypes = (int, Fraction, GaussRat)


def is_exact(x) -> bool:
    return isinstance(x, (Rational, GaussRat)) and not isinstance(x, bool)


def canon_exact(x):
    """Smallest exact type representing x (int < Fraction < GaussRat)."""
    if isinstance(x, GaussRat):
        if x.im == 0:
            x = x.re
        else:
            return x
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else x
    return x


def exact_div(a, b):
    """a / b without ever falling back to float division."""
    if isinstance(a, GaussRat) or isinstance(b, GaussRat):
        return canon_exact(GaussRat._coerce(a) / GaussRat._coerce(b))
    return canon_exact(Fraction(a) / Fraction(b))


def to_mpc(x):
    """Convert any supported scalar to ``mpmath.mpc`` at the current precision."""
    if isinstance(x, mpmath.mpc):
        return +x
    if isinstance(x, GaussRat):
        return mpmath.mpc(mpmath.mpf(x.re.numerator) / x.re.denominator,
                          mpmath.mpf(x.im.numerator) / x.im.denominator)
    if isinstance(x, Fraction):
        return mpmath.mpc(mpmath.mpf(x.numerator) / x.denominator)
    if isinstance(x, (np.complexfloating, np.floating, np.integer)):
        x = complex(x)
    return mpmath.mpc(x)


def to_exact(x):
    """Exact version of a scalar; floats are converted by their binary value."""
    if is_exact(x):
        return canon_exact(x)
    if isinstance(x, (mpmath.mpc, mpmath.mpf)):
        x = complex(x)
    x = complex(x)
    return canon_exact(GaussRat(Fraction(x.real), Fraction(x.imag)))


def cabs(x) -> float:
    if is_inf(x):
        return math.inf
    if isinstance(x, GaussRat):
        return abs(x)
    return float(abs(x))


def close(a, b, tol: float) -> bool:
    """Tolerance-relative equality |a-b| <= tol * max(1, |a|, |b|)."""
    if is_inf(a) or is_inf(b):
        return a is b
    if is_exact(a) and is_exact(b):
        diff = GaussRat._coerce(a) - GaussRat._coerce(b)
        return abs(diff) <= tol * max(1.0, cabs(a), cabs(b))
    diff = abs(to_mpc(a) - to_mpc(b))
    return diff <= tol * max(1, abs(to_mpc(a)), abs(to_mpc(b)))


def format_exact(x) -> str:
    """Exact scalar as text: ``"3"``, ``"-1/2"``, ``"1/3+2i"``, ``"-5/4i"``."""
    x = canon_exact(x)
    if not isinstance(x, GaussRat):
        return str(x)
    im = x.im
    sign = "-" if im < 0 else "+"
    im_txt = str(abs(im))
    if x.re == 0:
        return f"{'-' if im < 0 else ''}{im_txt}i"
    return f"{x.re}{sign}{im_txt}i"


def parse_exact(text: str):
    """Inverse of :func:`format_exact`."""
    t = str(text).replace(" ", "")
    try:
        if not t.endswith("i"):
            return canon_exact(Fraction(t))
        body = t[:-1]
        k = max(body.rfind("+"), body.rfind("-"))
        re_txt, im_txt = (body[:k], body[k:]) if k > 0 else ("0", body)
        if im_txt in ("", "+", "-"):
            im_txt += "1"
        return canon_exact(GaussRat(Fraction(re_txt), Fraction(im_txt)))
    except (ValueError, ZeroDivisionError):
        fail("PARSE_ERROR", f"not an exact scalar: {text!r}")


def parse_complex(text: str):
    """Parse ``"RE,IM"`` (CLI style) or a single real. Returns an exact value
    when both parts are written as integers or fractions, else ``mpc``."""
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) == 1:
        parts.append("0")
    if len(parts) != 2 or not all(parts):
        fail("PARSE_ERROR", f"expected RE,IM but got {text!r}")
    try:
        re_f, im_f = Fraction(parts[0]), Fraction(parts[1])
    except (ValueError, ZeroDivisionError):
        try:
            return mpmath.mpc(mpmath.mpf(parts[0]), mpmath.mpf(parts[1]))
        except (ValueError, TypeError):
            fail("PARSE_ERROR", f"expected RE,IM but got {text!r}")
    return canon_exact(GaussRat(re_f, im_f))


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

def _is_zero(c) -> bool:
    if is_exact(c):
        return c == 0
    return c == 0


@dataclass(frozen=True)
class Poly:
    """Dense univariate polynomial, lowest degree first."""

    coeffs: tuple

    def __post_init__(self):
        cs = list(self.coeffs)
        exact = all(is_exact(c) for c in cs)
        if exact:
            cs = [canon_exact(c) for c in cs]
        else:
            cs = [to_mpc(c) for c in cs]
        while cs and _is_zero(cs[-1]):
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def exact(self) -> bool:
        return all(is_exact(c) for c in self.coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, j):
        return self.coeffs[j] if 0 <= j < len(self.coeffs) else 0

    def __call__(self, x):
        return poly_eval(self, x)

    def __add__(self, other):
        return poly_add(self, _as_poly(other))

    __radd__ = __add__

    def __sub__(self, other):
        return poly_add(self, poly_scale(_as_poly(other), -1))

    def __rsub__(self, other):
        return poly_add(_as_poly(other), poly_scale(self, -1))

    def __mul__(self, other):
        return poly_mul(self, _as_poly(other))

    __rmul__ = __mul__

    def __neg__(self):
        return poly_scale(self, -1)

    def __pow__(self, k: int):
        out = Poly((1,))
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        if self.exact:
            return f"Poly({[format_exact(c) for c in self.coeffs]})"
        return f"Poly({[mpmath.nstr(c, 8) for c in self.coeffs]})"

    def to_json(self) -> list:
        if self.exact:
            return [format_exact(c) for c in self.coeffs]
        return [mpmath.nstr(c, mpmath.mp.dps, strip_zeros=False) for c in self.coeffs]

    @classmethod
    def from_json(cls, items) -> "Poly":
        out = []
        for s in items:
            s = str(s)
            try:
                out.append(parse_exact(s))
            except IsingLabError:
                out.append(_parse_mpc_text(s))
        return cls(tuple(out))

    def ints(self) -> list:
        """Coefficients as Python ints (only for integer polynomials)."""
        cs = []
        for c in self.coeffs:
            if not isinstance(c, int):
                fail("DOMAIN", "polynomial is not integral")
            cs.append(c)
        return cs


_MPC_TEXT = re.compile(r"^\(?\s*([-+0-9.eE]+)\s*([-+])\s*([0-9.eE+-]+)j\s*\)?$")


def _parse_mpc_text(s: str):
    """Read mpmath's "(a + bj)" form without going through a double."""
    m = _MPC_TEXT.match(s.strip())
    if m is None:
        try:
            return mpmath.mpc(mpmath.mpf(s))
        except (ValueError, TypeError):
            fail("PARSE_ERROR", f"not a polynomial coefficient: {s!r}")
    im = mpmath.mpf(m.group(3))
    return mpmath.mpc(mpmath.mpf(m.group(1)), -im if m.group(2) == "-" else im)


def _as_poly(x) -> Poly:
    return x if isinstance(x, Poly) else Poly((x,))


def poly_from_ints(cs) -> Poly:
    return Poly(tuple(int(c) for c in cs))


def poly_add(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return Poly(tuple(a[j] + b[j] for j in range(n)))


def poly_scale(a: Poly, s) -> Poly:
    return Poly(tuple(c * s for c in a.coeffs))


def _kronecker_mul(a: list, b: list) -> list:
    """Product of two nonnegative integer coefficient lists via a single big
    integer multiplication (Kronecker substitution)."""
    bound = max(a) * max(b) * min(len(a), len(b))
    width = bound.bit_length() + 1
    pa = int("".join(format(c, f"0{width}b") for c in reversed(a)), 2)
    pb = int("".join(format(c, f"0{width}b") for c in reversed(b)), 2)
    n_out = len(a) + len(b) - 1
    bits = format(pa * pb, "b").zfill(n_out * width)
    end = len(bits)
    return [int(bits[end - (k + 1) * width:end - k * width], 2) for k in range(n_out)]


def int_poly_mul(a: list, b: list) -> list:
    """Integer coefficient lists, schoolbook for small inputs."""
    if not a or not b:
        return []
    if min(len(a), len(b)) > 24 and min(a) >= 0 and min(b) >= 0:
        return _kronecker_mul(a, b)
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def poly_mul(a: Poly, b: Poly) -> Poly:
    if a.is_zero() or b.is_zero():
        return Poly(())
    if a.exact and b.exact and all(isinstance(c, int) for c in a.coeffs + b.coeffs):
        return Poly(tuple(int_poly_mul(list(a.coeffs), list(b.coeffs))))
    if not (a.exact and b.exact):
        a = Poly(tuple(to_mpc(c) for c in a.coeffs))
        b = Poly(tuple(to_mpc(c) for c in b.coeffs))
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a.coeffs):
        for j, y in enumerate(b.coeffs):
            out[i + j] = out[i + j] + x * y
    return Poly(tuple(out))


def poly_from_roots(roots, lead=1) -> Poly:
    p = Poly((lead,))
    for r in roots:
        p = p * Poly((-r, 1))
    return p


def poly_derivative(p: Poly) -> Poly:
    return Poly(tuple(j * p.coeffs[j] for j in range(1, len(p))))


def poly_eval(p: Poly, x):
    """Horner evaluation. Exact when p and x are exact, else ``mpc``."""
    if is_inf(x):
        fail("DOMAIN", "cannot evaluate a polynomial at infinity")
    if p.exact and is_exact(x):
        acc = 0
        for c in reversed(p.coeffs):
            acc = acc * x + c
        return canon_exact(acc)
    x = to_mpc(x)
    acc = mpmath.mpc(0)
    for c in reversed(p.coeffs):
        acc = acc * x + (c if isinstance(c, mpmath.mpc) else to_mpc(c))
    return acc


def poly_eval_array(p: Poly, xs: np.ndarray) -> np.ndarray:
    """Double-precision vectorized Horner (for grids)."""
    xs = np.asarray(xs, dtype=complex)
    acc = np.zeros_like(xs)
    for c in reversed(p.coeffs):
        acc = acc * xs + complex(c)
    return acc


def poly_divmod_exact(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    if den.is_zero():
        fail("ZERO_DIVISOR", "division by the zero polynomial")
    if not (num.exact and den.exact):
        fail("DOMAIN", "exact division needs exact coefficients")
    rem = list(num.coeffs)
    dn = den.degree
    lead = den.coeffs[-1]
    dcs = den.coeffs
    if len(rem) - 1 < dn:
        return Poly(()), num
    quot = [0] * (len(rem) - dn)
    for k in range(len(rem) - 1 - dn, -1, -1):
        c = rem[k + dn]
        if c == 0:
            continue
        qk = exact_div(c, lead)
        quot[k] = qk
        for j, dj in enumerate(dcs):
            if dj:
                rem[k + j] = rem[k + j] - qk * dj
    return Poly(tuple(quot)), Poly(tuple(rem[:dn]))


def poly_divide_exact(num: Poly, den: Poly) -> Poly:
    """Quotient num/den, raising NOT_DIVISIBLE when the remainder is nonzero."""
    q, r = poly_divmod_exact(num, den)
    if not r.is_zero():
        fail("NOT_DIVISIBLE", f"remainder of degree {r.degree} is nonzero")
    return q


def poly_taylor_shift(p: Poly, z0) -> Poly:
    """Coefficients of u -> p(z0 + u) (repeated synthetic division)."""
    exact = p.exact and is_exact(z0)
    cs = list(p.coeffs) if exact else [to_mpc(c) for c in p.coeffs]
    if not exact:
        z0 = to_mpc(z0)
    n = len(cs)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            cs[j] = cs[j] + z0 * cs[j + 1]
    return Poly(tuple(cs))


def poly_log_truncate(p: Poly, m: int) -> list:
    """First m+1 Taylor coefficients of log(p(z)/p(0)) at z = 0.

    Uses k p_k = sum_{j=1..k} j a_j p_{k-j}, i.e. p' = p (log p)'.
    """
    if p.is_zero() or _is_zero(p.coeffs[0]):
        fail("CONSTANT_TERM_ZERO", "log needs p(0) != 0")
    exact = p.exact
    pc = list(p.coeffs) if exact else [to_mpc(c) for c in p.coeffs]
    pk = lambda k: pc[k] if k < len(pc) else 0
    p0 = pc[0]
    a = [0] * (m + 1)
    for k in range(1, m + 1):
        s = k * pk(k)
        for j in range(1, k):
            if pk(k - j):
                s = s - j * a[j] * pk(k - j)
        a[k] = exact_div(s, k * p0) if exact else s / (k * p0)
    return a


def series_exp_truncate(a: list, m: int) -> list:
    """exp of a power series with a[0] = 0, truncated to degree m (exact-safe).

    b' = a' b, so k b_k = sum_{j=1..k} j a_j b_{k-j}.
    """
    exact = all(is_exact(c) for c in a)
    b = [1] + [0] * m
    for k in range(1, m + 1):
        s = 0
        for j in range(1, min(k, len(a) - 1) + 1):
            s = s + j * a[j] * b[k - j]
        b[k] = exact_div(s, k) if exact else s / k
    return b


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

def _aberth_double(c: np.ndarray, iters: int = 500) -> np.ndarray:
    """Aberth iteration in complex128; c lowest degree first, c[-1] != 0."""
    n = len(c) - 1
    monic = c / c[-1]
    radius = max(abs(monic[0]) ** (1.0 / n), 1e-3) if monic[0] != 0 else 1.0
    bound = 1 + np.max(np.abs(monic[:-1]))
    radius = min(radius, bound)
    z = radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    rev = monic[::-1]
    drev = np.polyder(rev)
    for _ in range(iters):
        pv = np.polyval(rev, z)
        dv = np.polyval(drev, z)
        with np.errstate(all="ignore"):
            ratio = pv / dv
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1)
            s = (1 / diff).sum(axis=1) - 1
            corr = ratio / (1 - ratio * s)
        corr = np.where(np.isfinite(corr), corr, 0)
        z = z - corr
        if np.max(np.abs(corr)) < 1e-14 * max(1.0, np.max(np.abs(z))):
            break
    return z


def _residual_ok(cs, r, tol):
    val = mpmath.mpc(0)
    scale = mpmath.mpf(0)
    ar = abs(r)
    for c in reversed(cs):
        val = val * r + c
        scale = scale * ar + abs(c)
    return abs(val) <= tol * scale, val


def poly_roots(p: Poly, ctx: PrecisionContext | None = None, max_iter: int = 600) -> list:
    """All complex roots with multiplicity (Aberth iteration, Newton polish).

    A double-precision Aberth pass seeds the iteration, which then continues
    at the context precision. Zero roots are split off exactly.
    """
    ctx = ctx or default_context()
    if p.degree < 1:
        fail("DOMAIN", "poly_roots needs degree >= 1")
    coeffs = list(p.coeffs)
    zeros = 0
    while _is_zero(coeffs[0]):
        coeffs.pop(0)
        zeros += 1
    with ctx.activate():
        cs = [to_mpc(c) for c in coeffs]
        n = len(cs) - 1
        roots = [mpmath.mpc(0)] * zeros
        if n == 0:
            return roots
        if n == 1:
            return roots + [-cs[0] / cs[1]]
        seed = _aberth_double(np.array([complex(c) for c in cs]))
        z = [mpmath.mpc(complex(s)) for s in seed]
        # break exact coincidences from the double pass
        for i in range(n):
            for j in range(i):
                if z[i] == z[j]:
                    z[i] += mpmath.mpf(10) ** (-8) * (1 + 1j) * (i + 1)
        dcs = [k * cs[k] for k in range(1, n + 1)]
        rcs, rdcs = cs[::-1], dcs[::-1]
        eps = mpmath.mpf(10) ** (-(ctx.working_digits + 3))
        for _ in range(max_iter):
            worst = mpmath.mpf(0)
            for i in range(n):
                pv = mpmath.polyval(rcs, z[i])
                dv = mpmath.polyval(rdcs, z[i])
                if pv == 0:
                    continue
                if dv == 0:
                    dv = eps
                ratio = pv / dv
                s = mpmath.fsum(1 / (z[i] - z[j]) for j in range(n) if j != i and z[i] != z[j])
                denom = 1 - ratio * s
                corr = ratio / denom if denom != 0 else ratio
                z[i] -= corr
                rel = abs(corr) / max(1, abs(z[i]))
                if rel > worst:
                    worst = rel
            if worst < eps:
                break
        tol = mpmath.mpf(ctx.tolerance)
        out = []
        for r in z:
            # Newton polish on the original coefficients
            for _ in range(3):
                pv = mpmath.polyval(rcs, r)
                dv = mpmath.polyval(rdcs, r)
                if dv == 0 or pv == 0:
                    break
                step = pv / dv
                cand = r - step
                if abs(mpmath.polyval(rcs, cand)) < abs(pv):
                    r = cand
                else:
                    break
            ok, _ = _residual_ok(cs, r, tol)
            if not ok:
                fail("NON_CONVERGENCE", "root iteration did not reach the residual tolerance")
            out.append(r)
        return roots + out


def distinct_roots(roots, tol: float) -> list:
    """Cluster roots closer than ``1e3 * tol`` (relative); returns
    (representative, multiplicity) pairs."""
    groups = []
    for r in roots:
        for g in groups:
            if abs(g[0] - r) <= 1e3 * tol * max(1, abs(r)):
                g[1] += 1
                break
        else:
            groups.append([r, 1])
    return [(g[0], g[1]) for g in groups]
