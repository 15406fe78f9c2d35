"""Ising-programs, their gadget compilation and weight implementation.

A program is a straight-line list of values a_0 = beta, a_1, a_2, ...
Each step takes the product of some earlier values (at most d = Delta - 1 of
them) and applies g_b = h_b o h_b, where the edge weight b is an earlier
value as well (a_0 unless stated otherwise). A step of kind "h" applies a
single h_b instead. Every step compiles to series/parallel composition of the
gadgets of its inputs, so a program is also a bounded-degree graph whose
terminals have degree 1.

``implement_target`` turns a target weight into a program in three stages:
pick a base value b whose dynamics at 1 is repelling but which still
contracts towards 1; build a family of contractions near 1 from values the
program can generate; and escape from the ball around 1 to the target by
iterating f_b(x) = g_b(x^d).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import cmath
import math
import random

import mpmath
import numpy as np

from .errors import IsingLabError, fail
from .exact import ENUM_CAP, interaction_matrix, implemented_weight, interaction_values
from .graphs import (MultiGraph, Terminals, add_pendant, max_degree, parallel_bundle,
                     parse_graph, series_chain, single_edge)
from .maps import disk_ratio, g_inv_np, g_map, g_np, h_map, h_np
from .numerics import (INF, PrecisionContext, default_context, is_exact, is_inf,
                       poly_eval, poly_roots, to_mpc)

COMPILE_CAP = 20000  # vertices


# ---------------------------------------------------------------------------
# programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    """a_k = g_{a_base}(prod a_f for f in factors), or h_{a_base}(a_f) for kind "h"."""

    factors: tuple
    base: int = 0
    kind: str = "g"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(int(f) for f in self.factors))
        if self.kind not in ("g", "h"):
            fail("PARSE_ERROR", f"unknown step kind {self.kind!r}")
        if not self.factors:
            fail("ARITY", "a step needs at least one factor")
        if self.kind == "h" and len(self.factors) != 1:
            fail("ARITY", "an h-step takes exactly one factor")

    def to_json(self):
        if self.base == 0 and self.kind == "g":
            return list(self.factors)
        return {"factors": list(self.factors), "base": self.base, "kind": self.kind}

    @classmethod
    def from_json(cls, obj) -> "Step":
        if isinstance(obj, (list, tuple)):
            return cls(tuple(obj))
        return cls(tuple(obj["factors"]), int(obj.get("base", 0)), obj.get("kind", "g"))


@dataclass(frozen=True)
class IsingProgram:
    steps: tuple = ()

    def __post_init__(self):
        steps = tuple(s if isinstance(s, Step) else Step(tuple(s)) for s in self.steps)
        object.__setattr__(self, "steps", steps)
        for k, s in enumerate(steps, start=1):
            if not all(0 <= f < k for f in s.factors) or not 0 <= s.base < k:
                fail("DOMAIN", f"step {k} refers to an index >= {k}")

    def __len__(self):
        return len(self.steps)

    def arity(self) -> int:
        return max((len(s.factors) for s in self.steps if s.kind == "g"), default=0)

    def then(self, *steps) -> "IsingProgram":
        return IsingProgram(self.steps + tuple(steps))

    def to_json(self) -> list:
        return [s.to_json() for s in self.steps]

    @classmethod
    def from_json(cls, items) -> "IsingProgram":
        return cls(tuple(Step.from_json(s) for s in items))


@dataclass
class ProgramTrace:
    values: list

    @property
    def final(self):
        return self.values[-1]


def _prod(vals):
    out = 1
    zero = inf = False
    for v in vals:
        if is_inf(v):
            inf = True
        elif v == 0:
            zero = True
        else:
            out = out * v
    if zero and inf:
        return None
    return INF if inf else (0 if zero else out)


def program_eval(p: IsingProgram, beta, ctx: PrecisionContext | None = None) -> ProgramTrace:
    """All values a_0..a_K. Exact for exact beta, else mpc at working precision."""
    ctx = ctx or default_context()
    with ctx.activate():
        vals = [beta if is_exact(beta) else to_mpc(beta)]
        for k, s in enumerate(p.steps, start=1):
            x = _prod(vals[f] for f in s.factors)
            b = vals[s.base]
            try:
                if x is None:
                    raise IsingLabError("INDETERMINATE")
                if is_inf(b):
                    fail("INDETERMINATE", "edge weight INF")
                vals.append(h_map(b, x) if s.kind == "h" else g_map(b, x))
            except IsingLabError as exc:
                if exc.kind == "INDETERMINATE":
                    fail("INDETERMINATE", f"step {k} is indeterminate", step=k)
                raise
    return ProgramTrace(vals)


def compiled_sizes(p: IsingProgram) -> list:
    """Vertex count of every compiled gadget, without building them."""
    n = [2]
    for s in p.steps:
        if s.kind == "h":
            n.append(n[s.base] + n[s.factors[0]] - 1)
        else:
            par = sum(n[f] for f in s.factors) - 2 * (len(s.factors) - 1)
            n.append(2 * n[s.base] + par - 2)
    return n


def program_compile(p: IsingProgram, beta=None, Delta: int | None = None, verify: bool = False,
                    ctx: PrecisionContext | None = None, cap: int = COMPILE_CAP):
    """Gadget graph and terminals implementing the last program value.

    g-steps become series(H_b, parallel(H_f ...), H_b); h-steps become
    series(H_b, H_f). Terminals always have degree 1.
    """
    if Delta is not None:
        d = Delta - 1
        if p.arity() > d:
            fail("ARITY", f"a step has arity {p.arity()} > Delta - 1 = {d}")
    size = compiled_sizes(p)[-1]
    if size > cap:
        fail("TOO_LARGE", f"compiled gadget would have {size} vertices (cap {cap})")
    gad = [single_edge()]
    for s in p.steps:
        Hb = gad[s.base]
        if s.kind == "h":
            gad.append(series_chain([Hb, gad[s.factors[0]]]))
        else:
            par = parallel_bundle([gad[f] for f in s.factors])
            gad.append(series_chain([Hb, par, Hb]))
    G, T = gad[-1]
    if Delta is not None and max_degree(G) > Delta:
        fail("VERIFICATION_FAILED", "compiled gadget exceeds the degree bound")
    if verify:
        if beta is None:
            fail("DOMAIN", "verification needs beta")
        ctx = ctx or default_context()
        want = program_eval(p, beta, ctx).final
        got = implemented_weight(G, T, beta, ctx)
        if not _close(got, want, 1e-9):
            fail("VERIFICATION_FAILED", f"compiled weight {got} != program value {want}")
    return G, T


def _close(a, b, tol):
    if is_inf(a) or is_inf(b):
        return is_inf(a) and is_inf(b)
    a, b = complex(a), complex(b)
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


# ---------------------------------------------------------------------------
# dynamics at the fixed point 1
# ---------------------------------------------------------------------------

@dataclass
class DynamicsInfo:
    beta: complex
    d: int
    multiplier: complex
    repelling: bool
    ratio: float
    conditions: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        m = complex(self.multiplier)
        return {"beta": [self.beta.real, self.beta.imag], "d": self.d,
                "multiplier": [m.real, m.imag], "repelling": self.repelling,
                "ratio": self.ratio, "conditions": self.conditions}


def contraction_factor(beta):
    """z = ((b-1)/(b+1))^2 = g_b'(1)."""
    b = complex(beta)
    return ((b - 1) / (b + 1)) ** 2


def dynamics_info(beta, Delta: int, tol: float = 1e-12) -> DynamicsInfo:
    b = complex(beta)
    if abs(b - 1) <= tol or abs(b + 1) <= tol:
        fail("DEGENERATE", "beta = +-1 has no useful dynamics")
    d = Delta - 1
    z = contraction_factor(b)
    mult = d * z
    ratio = disk_ratio(b)
    # g is the Moebius map x -> ((1+z)x + (1-z)) / ((1-z)x + (1+z))
    g2 = -(1 - z) * z  # g''(1)
    cond = {"z": [z.real, z.imag], "abs_z": abs(z),
            "g1_nonzero_finite": abs(z) > tol,
            "g2_finite": bool(np.isfinite(g2)),
            "z_real": abs(z.imag) <= tol * max(1, abs(z)),
            "unit_modulus_beta": abs(abs(b) - 1) <= tol,
            "contracting_nonreal": 0 < abs(z) < 1 and abs(z.imag) > tol}
    return DynamicsInfo(b, d, mult, abs(mult) > 1 + tol, ratio, cond)


def no_exceptional_points_check(beta, d: int, tol: float = 1e-12) -> dict:
    """f_b(z) = g_b(z^d) has critical points only at 0 and INF (g_b is a
    Moebius map); neither is fixed unless 1 + b^2 = 0, so the exceptional
    set is empty."""
    b = complex(beta)
    if min(abs(b - 1), abs(b + 1), abs(b)) <= tol:
        fail("DOMAIN", "beta must avoid 0 and +-1")
    if abs(1 + b * b) <= tol:
        fail("SPECIAL_POINT", "1 + beta^2 = 0")
    f0 = 2 * b / (1 + b * b)
    finf = (b * b + 1) / (2 * b)
    return {"critical_points": ["0", "inf"], "f_at_0": [f0.real, f0.imag],
            "f_at_inf": [finf.real, finf.imag], "zero_fixed": abs(f0) <= tol,
            "inf_fixed": False, "exceptional_points": 0}


def linearization_residual(beta, a, ctx: PrecisionContext | None = None):
    """|g_b(prod (1+a_j)) - 1 - z sum a_j| at working precision."""
    ctx = ctx or default_context()
    with ctx.activate():
        b = to_mpc(beta)
        z = ((b - 1) / (b + 1)) ** 2
        x = mpmath.mpc(1)
        for aj in a:
            x *= 1 + to_mpc(aj)
        return abs(g_map(b, x) - 1 - z * mpmath.fsum(to_mpc(aj) for aj in a))


def linearization_exponent(beta, d: int, scales=(1e-2, 1e-3, 1e-4, 1e-5, 1e-6), seed: int = 0,
                           ctx: PrecisionContext | None = None) -> float:
    """Least-squares slope of log residual against log max|a_j|."""
    rng = np.random.default_rng(seed)
    direction = rng.normal(size=d) + 1j * rng.normal(size=d)
    direction /= np.max(np.abs(direction))
    xs, ys = [], []
    for s in scales:
        res = linearization_residual(beta, [complex(s * u) for u in direction], ctx)
        xs.append(math.log(s))
        ys.append(math.log(float(res)))
    return float(np.polyfit(xs, ys, 1)[0])


# ---------------------------------------------------------------------------
# getting close to 1
# ---------------------------------------------------------------------------

def _admissible(beta, tol=1e-12):
    b = complex(beta)
    return abs(b.imag) > tol and abs(b - 1j) > tol and abs(b + 1j) > tol


def approach_one(beta, eps: float, d: int, ctx: PrecisionContext | None = None,
                 max_steps: int = 20000):
    """Program whose last value a satisfies 0 < |1 - a| <= eps and Im a != 0.

    ratio < 1: iterate g_b, which contracts towards 1.
    ratio > 1: iterate g_b towards -1, getting c_j, then g_b(c_j^2).
    ratio = 1: first gamma = g_b(b^2), then the previous case with base gamma.
    """
    if d < 2:
        fail("DOMAIN", "needs d >= 2")
    if not _admissible(beta):
        fail("PRECONDITION", "beta must be nonreal and different from +-i")
    ctx = ctx or default_context()
    with ctx.activate():
        b = to_mpc(beta)
        rho = abs(b - 1) / abs(b + 1)
        tol = mpmath.mpf(10) ** (-ctx.working_digits // 2)
        steps = []
        if abs(rho - 1) <= tol:
            steps.append(Step((0, 0)))
            base, start = 1, 1
            gam = g_map(b, b * b)
            rho_g = abs(gam - 1) / abs(gam + 1)
            assert rho_g > 1, "g_b(b^2) should have ratio > 1 for imaginary b"
            vals = [b, gam]
        else:
            base, start, vals = 0, 0, [b]
            rho_g = rho
        bv = vals[base]
        if rho_g < 1:
            cur = start
            for _ in range(max_steps):
                steps.append(Step((cur,), base))
                cur = len(steps)
                vals.append(g_map(bv, vals[-1]))
                if abs(1 - vals[-1]) <= eps:
                    break
            else:
                fail("NON_CONVERGENCE", "iteration cap reached")
        else:
            cur = start
            for _ in range(max_steps):
                steps.append(Step((cur,), base))
                cur = len(steps)
                vals.append(g_map(bv, vals[-1]))
                cand = g_map(bv, vals[-1] ** 2)
                if abs(1 - cand) <= eps:
                    steps.append(Step((cur, cur), base))
                    vals.append(cand)
                    break
            else:
                fail("NON_CONVERGENCE", "iteration cap reached")
        a = vals[-1]
        if a == 1 or abs(a.imag) == 0:
            fail("NON_CONVERGENCE", "value collapsed to 1 or the real axis; raise the precision")
    prog = IsingProgram(tuple(steps))
    return prog, program_eval(prog, beta, ctx).final


# ---------------------------------------------------------------------------
# program DAG builder (double precision guidance, exact replay later)
# ---------------------------------------------------------------------------

class _Builder:
    def __init__(self, beta: complex):
        self.vals = [complex(beta)]
        self.steps = []

    def add(self, step: Step):
        x = 1
        for f in step.factors:
            x *= self.vals[f]
        b = self.vals[step.base]
        with np.errstate(all="ignore"):
            v = h_np(b, x) if step.kind == "h" else g_np(b, x)
        v = complex(v)
        if not cmath.isfinite(v):
            return None
        self.steps.append(step)
        self.vals.append(v)
        return len(self.vals) - 1

    def extract(self, needed) -> tuple[list, dict]:
        """Steps (renumbered) generating the ancestors of ``needed``."""
        keep = set()
        todo = list(needed)
        while todo:
            k = todo.pop()
            if k in keep or k == 0:
                continue
            keep.add(k)
            s = self.steps[k - 1]
            todo.extend(s.factors)
            todo.append(s.base)
        order = sorted(keep)
        remap = {0: 0}
        steps = []
        for k in order:
            s = self.steps[k - 1]
            steps.append(Step(tuple(remap[f] for f in s.factors), remap[s.base], s.kind))
            remap[k] = len(steps)
        return steps, remap


def _good_base(v: complex, d: int, lo: float, hi: float) -> bool:
    if not cmath.isfinite(v) or abs(v + 1) < 1e-9:
        return False
    rr = disk_ratio(v)
    return (lo <= rr <= hi and abs(abs(v) - 1) > 0.05 and abs(v.imag) > 0.05 * abs(v)
            and d * rr * rr > 1)


def choose_base(B: _Builder, d: int, lo: float = 0.72, hi: float = 0.92, seed: int = 1,
                trials: int = 40000) -> int:
    """Index of a value b with |b-1|/|b+1| in [lo, hi] (so f_b repels at 1
    while g_b contracts towards 1), away from the unit circle and the real
    axis. Tries beta itself, then the unit-circle gadget, then a seeded
    random search over short programs."""
    b = B.vals[0]
    if _good_base(b, d, lo, hi):
        return 0
    if abs(abs(b) - 1) <= 0.05:
        i1 = B.add(Step((0,), 0, "h"))  # h_b(b), real for |b| = 1
        if i1 is not None:
            i2 = B.add(Step((0, i1), i1))  # g_{b'}(b b')
            if i2 is not None and _good_base(B.vals[i2], d, lo, hi):
                return i2
    rng = random.Random(seed)
    n0 = len(B.vals)
    best = None
    for _ in range(trials):
        vals = list(B.vals[:n0])
        prog = []
        for _k in range(rng.randint(1, 4)):
            kind = "h" if rng.random() < 0.3 else "g"
            base = rng.randrange(len(vals)) if rng.random() < 0.3 else 0
            ar = 1 if kind == "h" else rng.randint(1, d)
            fs = tuple(rng.randrange(len(vals)) for _ in range(ar))
            x = 1
            for f in fs:
                x *= vals[f]
            with np.errstate(all="ignore"):
                v = complex(h_np(vals[base], x) if kind == "h" else g_np(vals[base], x))
            if not cmath.isfinite(v):
                break
            vals.append(v)
            prog.append(Step(fs, base, kind))
            if _good_base(v, d, lo, hi):
                if best is None or len(prog) < len(best):
                    best = list(prog)
                break
        if best is not None and len(best) <= 2:
            break
    if best is None:
        fail("PRECONDITION", "no usable base value found among short programs")
    idx = None
    for s in best:
        idx = B.add(s)
    return idx


# ---------------------------------------------------------------------------
# covering family near 1
# ---------------------------------------------------------------------------

@dataclass
class CoverFamily:
    builder: object
    base_index: int
    base_value: complex
    d: int
    lambda0_index: int
    lambda_indices: list
    center: complex
    r: float
    pool_indices: list = field(default_factory=list)

    @property
    def lambda0(self) -> complex:
        return self.builder.vals[self.lambda0_index]

    @property
    def lambdas(self) -> list:
        return [self.builder.vals[i] for i in self.lambda_indices]

    def coeffs(self) -> np.ndarray:
        """c_i = lambda_i lambda0^(d-2); Phi_i(x) = g_b(c_i x)."""
        return np.array(self.lambdas) * self.lambda0 ** (self.d - 2)

    def phi(self, i: int, x):
        return g_np(self.base_value, self.coeffs()[i] * x)

    def phi_inv(self, y):
        """All pullbacks Phi_i^{-1}(y), as an array over i."""
        return g_inv_np(self.base_value, y) / self.coeffs()

    def lipschitz(self, samples: int = 360) -> float:
        b = self.base_value
        pts = self.center + 2 * self.r * np.exp(2j * np.pi * np.arange(samples) / samples)
        c = self.coeffs()[:, None]
        u = c * pts[None, :]
        hu = h_np(b, u)
        dh = lambda v: (b * b - 1) / (b + v) ** 2
        der = dh(hu) * dh(u) * c
        return float(np.abs(der).max())

    def to_json(self) -> dict:
        enc = lambda z: [complex(z).real, complex(z).imag]
        return {"base": enc(self.base_value), "lambda0": enc(self.lambda0),
                "lambdas": [enc(v) for v in self.lambdas], "center": enc(self.center),
                "r": self.r, "d": self.d}


def _build_pool(B: _Builder, ib: int, d: int, R: float, cell: float, trials: int, rng) -> list:
    b = B.vals[ib]
    pool = {}
    members = []

    def offer(idx):
        if idx is None:
            return
        y = B.vals[idx]
        if abs(y - 1) < R:
            key = (math.floor((y.real - 1) / cell), math.floor(y.imag / cell))
            if key not in pool:
                pool[key] = idx
                members.append(idx)

    seeds = []
    cur = ib
    for _ in range(400):
        cur = B.add(Step((cur,), ib))
        if cur is None:
            break
        seeds.append(cur)
        offer(cur)
        if abs(B.vals[cur] - 1) < 1e-13:
            break
    near = [s for s in seeds if abs(B.vals[s] - 1) < cell]
    allv = [ib] + seeds
    for _ in range(trials):
        k = rng.randint(1, d)
        src_main = members if members else allv
        fs = []
        for _j in range(k):
            u = rng.random()
            src = src_main if u < 0.8 else (near if near and u < 0.95 else allv)
            fs.append(rng.choice(src))
        # evaluate before committing to keep the DAG small
        x = 1
        for f in fs:
            x *= B.vals[f]
        with np.errstate(all="ignore"):
            y = complex(g_np(b, x))
        if not cmath.isfinite(y) or abs(y - 1) >= R:
            continue
        key = (math.floor((y.real - 1) / cell), math.floor(y.imag / cell))
        if key in pool:
            continue
        offer(B.add(Step(tuple(fs), ib)))
    return members


def build_cover(beta, Delta: int, radii=(0.05, 0.02, 0.01, 0.005, 0.002), grid: int = 24,
                seed: int = 0, trials: int = 60000, B: _Builder | None = None,
                base_index: int | None = None) -> CoverFamily:
    """Contractions Phi_i(x) = g_b(x lambda_i lambda0^(d-2)) whose images
    cover B(1, 2r), with lambda_i generated by the program. r is found by a
    downward search."""
    d = Delta - 1
    if d < 2:
        fail("DOMAIN", "needs Delta >= 3")
    if B is None:
        B = _Builder(complex(beta))
    ib = choose_base(B, d) if base_index is None else base_index
    b = B.vals[ib]
    z = contraction_factor(b)
    rng = random.Random(seed)
    for r in radii:
        pool = _build_pool(B, ib, d, R=2.5 * 2 * r / abs(z), cell=r / 4, trials=trials, rng=rng)
        if not pool:
            continue
        i0 = min(pool, key=lambda i: abs(B.vals[i] - 1))
        lam0 = B.vals[i0]
        if abs(lam0 - 1) >= 2 * r:
            continue
        lin = np.linspace(-1, 1, 2 * grid + 1)
        P = (lin[:, None] + 1j * lin[None, :]).ravel() * 2 * r
        P = 1 + P[np.abs(P) <= 2 * r]
        with np.errstate(all="ignore"):
            W = g_inv_np(b, P) / lam0 ** (d - 2)
        L = np.array([B.vals[i] for i in pool])
        rad = 0.8 * 2 * r
        M = np.abs(W[:, None] / L[None, :] - 1) < rad
        uncovered = np.ones(len(W), dtype=bool)
        chosen = []
        while uncovered.any():
            score = M[uncovered].sum(axis=0)
            k = int(score.argmax())
            if score[k] == 0:
                break
            chosen.append(pool[k])
            uncovered &= ~M[:, k]
        if uncovered.any():
            continue
        cov = CoverFamily(B, ib, b, d, i0, chosen, 1.0, r, pool)
        if cov.lipschitz() >= 0.95:
            continue
        return cov
    fail("COVER_FAILED", "no radius produced a covering family")


def navigate_to(cover: CoverFamily, target, eps: float, max_steps: int = 2000):
    """Greedy pullback: returns (index of the start value, list of lambda
    indices to apply, and the predicted double-precision value).

    The program value is Phi_{i_1}(Phi_{i_2}(... Phi_{i_k}(a_start))).
    """
    y = complex(target)
    B = cover.builder
    if abs(y - cover.center) > 2 * cover.r * (1 + 1e-9):
        fail("PRECONDITION", "target outside the covered ball")
    pool = np.array(cover.pool_indices + [cover.lambda0_index])
    pvals = np.array([B.vals[i] for i in pool])
    b = cover.base_value
    dh = lambda v: (b * b - 1) / (b + v) ** 2
    coeffs = cover.coeffs()
    used = []
    der = 1.0  # |d value / d x_k| so far
    x = y
    for _ in range(max_steps):
        j = int(np.argmin(np.abs(pvals - x)))
        if der * abs(pvals[j] - x) <= eps / 10:
            start = int(pool[j])
            break
        pulls = cover.phi_inv(x)
        dist = np.abs(pulls - cover.center)
        i = int(np.argmin(dist))
        if dist[i] > 2 * cover.r:
            fail("NAVIGATION_STUCK", f"no pullback stays in the ball at step {len(used)}")
        xn = pulls[i]
        u = coeffs[i] * xn
        der *= abs(dh(h_np(b, u)) * dh(u) * coeffs[i])
        used.append(i)
        x = xn
    else:
        fail("NAVIGATION_STUCK", "step cap reached")
    # forward value in double
    v = B.vals[start]
    for i in reversed(used):
        v = complex(g_np(b, coeffs[i] * v))
    return start, [cover.lambda_indices[i] for i in reversed(used)], v


# ---------------------------------------------------------------------------
# escape from the ball around 1
# ---------------------------------------------------------------------------

def _f_and_der(b, d, N, x):
    der = 1
    dh = lambda u: (b * b - 1) / (b + u) ** 2
    for _ in range(N):
        y = x ** d
        hy = h_np(b, y)
        der = der * dh(hy) * dh(y) * d * x ** (d - 1)
        x = h_np(b, hy)
    return x, der


def escape_preimage(b: complex, d: int, lam: complex, center: complex, rad: float,
                    n_cap: int = 60, samples: int = 4000, seed: int = 0,
                    ctx: PrecisionContext | None = None):
    """(N, x, |(f^N)'(x)|) with f_b^N(x) = lam and |x - center| < rad.

    Ball samples are pushed forward under f_b with their derivatives;
    whenever a sample's linearised distance to lam is small, damped Newton
    is run from it, and the root is polished at working precision.
    """
    ctx = ctx or default_context()
    rng = np.random.default_rng(seed)
    x0 = center + np.sqrt(rng.random(samples)) * rad * np.exp(2j * np.pi * rng.random(samples))
    x = x0.copy()
    der = np.ones(samples, dtype=complex)
    dh = lambda u: (b * b - 1) / (b + u) ** 2
    with np.errstate(all="ignore"):
        for N in range(1, n_cap + 1):
            y = x ** d
            hy = h_np(b, y)
            der = der * dh(hy) * dh(y) * d * x ** (d - 1)
            x = h_np(b, hy)
            est = np.abs(x - lam) / np.abs(der)
            est = np.where(np.isfinite(est), est, np.inf)
            for kk in np.argsort(est)[:4]:
                if est[kk] >= 0.02 * rad:
                    break
                xs = x0[kk]
                for _ in range(60):
                    yv, dv = _f_and_der(b, d, N, xs)
                    st = (yv - lam) / dv
                    if not np.isfinite(st):
                        break
                    if abs(st) > 0.1 * rad:
                        st *= 0.1 * rad / abs(st)
                    xs -= st
                    if abs(st) < 1e-15 * max(1, abs(xs)):
                        break
                yv, dv = _f_and_der(b, d, N, xs)
                if abs(xs - center) < rad and abs(yv - lam) < 1e-8 * max(1, abs(lam)):
                    return N, _polish(b, d, N, xs, lam, ctx), abs(dv)
    fail("ESCAPE_CAP", f"no preimage found within {n_cap} iterations")


def _polish(b, d, N, x, lam, ctx):
    with ctx.activate():
        bm, xm, lm = to_mpc(b), to_mpc(x), to_mpc(lam)
        for _ in range(12):
            y, dv = xm, mpmath.mpc(1)
            for _k in range(N):
                u = y ** d
                hu = (bm * u + 1) / (bm + u)
                dv *= (bm * bm - 1) / (bm + hu) ** 2 * (bm * bm - 1) / (bm + u) ** 2 * d * y ** (d - 1)
                y = (bm * hu + 1) / (bm + hu)
            step = (y - lm) / dv
            xm -= step
            if abs(step) < mpmath.mpf(10) ** (-ctx.working_digits):
                break
        return xm


# ---------------------------------------------------------------------------
# implementing arbitrary targets
# ---------------------------------------------------------------------------

@dataclass
class ImplementResult:
    program: IsingProgram
    value: object
    error: float
    base_index: int
    escape_steps: int
    nav_steps: int
    graph: tuple | None = None
    cover_r: float = 0.0

    def to_json(self) -> dict:
        v = complex(self.value)
        return {"program": self.program.to_json(), "value": [v.real, v.imag],
                "error": self.error, "base_index": self.base_index,
                "escape_steps": self.escape_steps, "nav_steps": self.nav_steps,
                "length": len(self.program), "cover_r": self.cover_r}


@lru_cache(maxsize=16)
def _cached_cover(beta: complex, Delta: int, seed: int):
    return build_cover(beta, Delta, seed=seed)


def implement_target(beta, Delta: int, target, eps: float, ctx: PrecisionContext | None = None,
                     seed: int = 0, n_cap: int = 60, tol: float = 1e-12,
                     compile_cap: int = COMPILE_CAP) -> ImplementResult:
    """Program whose last value is within eps of ``target``."""
    ctx = ctx or default_context()
    b0 = complex(beta)
    d = Delta - 1
    if not _admissible(b0, tol):
        fail("PRECONDITION", "beta must be nonreal and different from +-i")
    if disk_ratio(b0) < 1 / math.sqrt(d) - tol:
        fail("PRECONDITION", "|beta-1|/|beta+1| is below 1/sqrt(Delta-1)")
    lam = complex(target)
    cover = _cached_cover(b0, Delta, seed)
    B = cover.builder
    ib, b = cover.base_index, cover.base_value
    lam_idx = [cover.lambda0_index] * (d - 2)
    if abs(lam - cover.center) <= 2 * cover.r * 0.95:
        N, x_star, amp = 0, lam, 1.0
    else:
        N, x_star, amp = escape_preimage(b, d, lam, cover.center, 2 * cover.r * 0.9, n_cap,
                                         seed=seed, ctx=ctx)
    eps_nav = eps / (4 * max(amp, 1.0))
    for attempt in range(4):
        start, lams, _ = navigate_to(cover, complex(x_star), eps_nav)
        needed = [ib, cover.lambda0_index, start] + lams
        steps, remap = B.extract(needed)
        cur = remap[start]
        for li in lams:
            steps.append(Step((cur, remap[li]) + tuple(remap[i] for i in lam_idx), remap[ib]))
            cur = len(steps)
        for _ in range(N):
            steps.append(Step((cur,) * d, remap[ib]))
            cur = len(steps)
        prog = IsingProgram(tuple(steps))
        val = program_eval(prog, b0, ctx).final
        err = float(abs(to_mpc(val) - lam)) if not is_inf(val) else math.inf
        if err <= eps:
            graph = None
            if compiled_sizes(prog)[-1] <= compile_cap:
                graph = program_compile(prog, b0, Delta)
            return ImplementResult(prog, val, err, remap[ib], N, len(lams), graph, cover.r)
        eps_nav /= 10
    fail("VERIFICATION_FAILED", f"achieved error {err} exceeds eps={eps}")


# ---------------------------------------------------------------------------
# zeros of Z give the weight -1
# ---------------------------------------------------------------------------

FIGURE8_TEXT = "6 8\n0 2\n0 3\n2 4\n2 4\n3 5\n3 5\n1 4\n1 5\n"


def figure8_graph() -> tuple[MultiGraph, Terminals]:
    """Six vertices, eight edges, max degree 3; s = 0, t = 1. Its partition
    function has a nonreal zero at which neither pinned sum vanishes."""
    return parse_graph(FIGURE8_TEXT), Terminals(0, 1)


@lru_cache(maxsize=4)
def _figure8_zeros(digits: int):
    from .exact import ising_poly
    G, T = figure8_graph()
    ctx = PrecisionContext(digits)
    P = ising_poly(G)
    M = interaction_matrix(G, T)
    out = []
    with ctx.activate():
        for r in poly_roots(P, ctx):
            if abs(r.imag) > 1e-10 and abs(poly_eval(M.z01, r)) > 1e-10:
                out.append(r)
    return tuple(out)


def zero_registry(Delta: int, digits: int = 50) -> list:
    """Known nonreal zeros of Z for graphs with max degree <= Delta whose
    pinned sums do not all vanish (as complex numbers)."""
    if Delta < 3:
        return []
    return [complex(r) for r in _figure8_zeros(digits)]


def minus_one_from_zero(G: MultiGraph, T: Terminals, beta0, Delta: int,
                        ctx: PrecisionContext | None = None, tol: float | None = None):
    """At a zero beta0 of Z(G) with some pinned sum nonzero, G with a pendant
    edge at each terminal implements the weight -1."""
    ctx = ctx or default_context()
    tol = tol if tol is not None else ctx.tolerance
    T.check(G)
    if max_degree(G) > Delta:
        fail("PRECONDITION", "max degree exceeds Delta", which="max_degree")
    deg = G.degrees()
    if deg[T.s] > Delta - 1 or deg[T.t] > Delta - 1:
        fail("PRECONDITION", "terminal degree exceeds Delta - 1", which="terminal_degree")
    with ctx.activate():
        b = to_mpc(beta0)
        if G.n <= ENUM_CAP:
            M = interaction_matrix(G, T).evaluate(b).as_rows()
        else:
            M = interaction_values(G, T, b)
        scale = max(abs(M[i][j]) for i in (0, 1) for j in (0, 1))
        Z = sum(M[i][j] for i in (0, 1) for j in (0, 1))
        if scale <= tol:
            fail("PRECONDITION", "all pinned sums vanish", which="pinned_nonzero")
        if abs(Z) > tol * max(1, scale):
            fail("PRECONDITION", f"|Z(G; beta0)| = {mpmath.nstr(abs(Z), 5)} is not zero",
                 which="is_zero")
        for i in (0, 1):
            if abs(M[i][0] + M[i][1]) > tol * max(1, scale) * 10:
                fail("PRECONDITION", f"row {i} of the interaction matrix does not sum to 0",
                     which="row_sum")
    H, s2 = add_pendant(G, T.s)
    H, t2 = add_pendant(H, T.t)
    T2 = Terminals(s2, t2)
    w = implemented_weight(H, T2, beta0, ctx)
    if abs(to_mpc(w) + 1) > 1e-6:
        fail("VERIFICATION_FAILED", f"implemented weight {w} is not -1")
    return H, T2
