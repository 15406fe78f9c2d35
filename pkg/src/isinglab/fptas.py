"""Approximate log Z by truncated Taylor series on a zero-free disk.

Write q(z) = Z(G; 1 + z (beta - 1)), so q(0) = 2^n and q(1) = Z(G; beta).
When beta lies strictly inside the zero-free disk R(eps_Delta), the preimage
of that disk under z -> 1 + z(beta-1) is a disk D in the z-plane containing 0
and 1 on which q has no zeros. Expanding log q around the center z0 of D and
evaluating at 0 and 1 gives log Z - n log 2 up to an explicit tail.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
import math

import mpmath

from .errors import fail
from .exact import ENUM_CAP, ising_poly
from .graphs import MultiGraph, max_degree
from .numerics import (Poly, PrecisionContext, default_context, is_exact, poly_eval,
                       poly_log_truncate, poly_taylor_shift, to_mpc)
from .regions import DiskRegion, epsilon_Delta, r_region

M_CAP = 20000


def q_poly(G: MultiGraph, beta, cap: int = ENUM_CAP) -> Poly:
    """Coefficients of z -> Z(G; 1 + z (beta - 1)). Exact for exact beta."""
    Z = ising_poly(G, cap)
    c = Z.coeffs
    b = beta - 1 if is_exact(beta) else to_mpc(beta) - 1
    out = []
    bj = 1
    for j in range(len(c)):
        s = sum(c[k] * comb(k, j) for k in range(j, len(c)))
        out.append(s * bj)
        bj = bj * b
    q = Poly(tuple(out))
    assert q[0] == 2 ** G.n
    return q


def low_order_coeffs(G: MultiGraph, k: int) -> list:
    """c_j = sum over edge subsets A with |A| = j of 2^{components(A)}, j <= k.

    So that the z^j coefficient of q is (beta - 1)^j c_j.
    """
    if not 0 <= k <= G.m:
        fail("DOMAIN", f"k must lie in [0, {G.m}]")
    parent = list(range(G.n))
    out = [0] * (k + 1)
    edges = G.edges

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    def rec(start, size, comps):
        out[size] += 2 ** comps
        if size == k:
            return
        for i in range(start, len(edges)):
            u, v = edges[i]
            ru, rv = find(u), find(v)
            if ru == rv:
                rec(i + 1, size + 1, comps)
            else:
                parent[ru] = rv
                rec(i + 1, size + 1, comps - 1)
                parent[ru] = ru

    rec(0, 0, G.n)
    return out


def segment_zero_free_disk(beta, Delta: int) -> DiskRegion:
    """Preimage of R(eps_Delta) under z -> 1 + z (beta - 1)."""
    b = complex(beta)
    if b == 1:
        fail("DEGENERATE", "beta = 1: Z = 2^n exactly")
    R = r_region(epsilon_Delta(Delta))
    if not R.contains(b, tol=0, strict=True):
        fail("NOT_IN_REGION", f"beta={b} is not strictly inside R(eps_{Delta})")
    D = DiskRegion((R.center - 1) / (b - 1), R.radius / abs(b - 1))
    assert D.contains(0, 0, strict=True) and D.contains(1, 0, strict=True)
    return D


def truncation_bound(deg: int, t: float, m: int) -> float:
    """deg t^{m+1} / ((m+1)(1-t)): tail of the log series at relative radius t."""
    if not 0 < t < 1:
        fail("DOMAIN", "t must lie in (0, 1)")
    return deg * t ** (m + 1) / ((m + 1) * (1 - t))


@dataclass
class ApproxResult:
    z_hat: object
    Z_hat: object
    m_used: int
    error_bound: float
    t_ratio: float

    def to_json(self) -> dict:
        z, Z = complex(self.z_hat), complex(self.Z_hat)
        return {"z_hat": [z.real, z.imag], "Z_hat": [Z.real, Z.imag], "m_used": self.m_used,
                "error_bound": self.error_bound, "t_ratio": self.t_ratio}


def choose_m(deg: int, t: float, eps: float) -> int:
    """Smallest m with truncation_bound(deg, t, m) <= eps/2."""
    if deg == 0:
        return 0
    m = 0
    while truncation_bound(deg, t, m) > eps / 2:
        m += 1
        if m > M_CAP:
            fail("PRECISION_EXHAUSTED", f"more than {M_CAP} Taylor terms needed (t={t})")
    return m


def approx_log_z(G: MultiGraph, beta, eps: float, Delta: int,
                 ctx: PrecisionContext | None = None, cap: int = ENUM_CAP) -> ApproxResult:
    """z_hat with exp(z_hat) = Z(G; beta) e^{err}, |err| <= eps."""
    ctx = ctx or default_context()
    if not eps > 0:
        fail("DOMAIN", "eps must be positive")
    if eps < 1e3 * 10.0 ** (-ctx.working_digits):
        fail("PRECISION_EXHAUSTED", "eps is below the working precision")
    if max_degree(G) > Delta:
        fail("PRECONDITION", f"max degree {max_degree(G)} exceeds {Delta}")
    with ctx.activate():
        if complex(beta) == 1:
            val = mpmath.mpf(2) ** G.n
            return ApproxResult(mpmath.log(val), val, 0, 0.0, 0.0)
        D = segment_zero_free_disk(beta, Delta)
        z0 = mpmath.mpc(D.center)
        t = max(abs(D.center), abs(1 - D.center)) / D.radius
        q = q_poly(G, beta, cap)
        deg = q.degree
        m = choose_m(deg, t, eps)
        shifted = poly_taylor_shift(Poly(tuple(to_mpc(c) for c in q.coeffs)), z0)
        a = poly_log_truncate(shifted, m)
        u1, u0 = 1 - z0, -z0
        L1 = mpmath.polyval(a[::-1], u1)
        L0 = mpmath.polyval(a[::-1], u0)
        z_hat = G.n * mpmath.log(2) + L1 - L0
        bound = 2 * truncation_bound(deg, t, m) if deg else 0.0
        return ApproxResult(z_hat, mpmath.exp(z_hat), m, float(bound), float(t))


def exact_log_z(G: MultiGraph, beta, ctx: PrecisionContext | None = None, cap: int = ENUM_CAP):
    ctx = ctx or default_context()
    with ctx.activate():
        return mpmath.log(to_mpc(poly_eval(ising_poly(G, cap), beta)))
