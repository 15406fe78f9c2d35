"""Exact partition functions by brute-force enumeration.

Z(G; x) = sum over spin assignments of x^(number of monochromatic edges),
stored as an integer coefficient vector. The enumeration is vectorised with
numpy over chunks of configurations; pinned vertices are simply not
enumerated.
"""

from __future__ import annotations

from dataclasses import dataclass
import itertools

import mpmath
import numpy as np

from .errors import fail
from .graphs import MultiGraph, Terminals
from .numerics import (Poly, PrecisionContext, cabs, default_context, exact_div,
                       is_exact, poly_eval, to_mpc)

ENUM_CAP = 24
SUBSET_CAP = 24
_CHUNK = 1 << 18


def _check_cap(k: int, cap: int, what: str):
    if k > cap:
        fail("TOO_LARGE", f"{what} {k} exceeds the enumeration cap {cap}")


def _free_order(G: MultiGraph, pins: dict) -> list:
    for v, s in pins.items():
        if not 0 <= v < G.n:
            fail("DOMAIN", f"pinned vertex {v} out of range")
        if s not in (0, 1):
            fail("DOMAIN", f"pin value must be 0 or 1, got {s}")
    return [v for v in range(G.n) if v not in pins]


def _spin_chunks(G: MultiGraph, pins: dict, cap: int):
    """Yield per-chunk lists of spin arrays (or scalar pins), one per vertex."""
    free = _free_order(G, pins)
    _check_cap(len(free), cap, "free vertex count")
    pos = {v: i for i, v in enumerate(free)}
    total = 1 << len(free)
    for start in range(0, total, _CHUNK):
        x = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        spins = []
        for v in range(G.n):
            if v in pos:
                spins.append(((x >> pos[v]) & 1).astype(np.int8))
            else:
                spins.append(np.int8(pins[v]))
        yield len(x), spins


def _mono_per_config(G: MultiGraph, size: int, spins, edges) -> np.ndarray:
    mono = np.zeros(size, dtype=np.int32)
    for u, v in edges:
        mono += spins[u] == spins[v]
    return mono


def mono_counts(G: MultiGraph, pins: dict | None = None, cap: int = ENUM_CAP) -> list:
    """c[k] = number of configurations extending ``pins`` with k monochromatic edges."""
    pins = dict(pins or {})
    sym = False
    if not pins and G.n > 0:
        # spin-flip symmetry: fix vertex 0 and double
        pins, sym = {0: 0}, True
    loops = sum(1 for u, v in G.edges if u == v)
    proper = [(u, v) for u, v in G.edges if u != v]
    counts = np.zeros(G.m + 1, dtype=np.int64)
    for size, spins in _spin_chunks(G, pins, cap):
        mono = _mono_per_config(G, size, spins, proper) + loops
        counts += np.bincount(mono, minlength=G.m + 1)
    out = [int(c) for c in counts]
    if sym:
        out = [2 * c for c in out]
    if G.n == 0:
        out = [1] + [0] * G.m
    return out


def ising_poly(G: MultiGraph, cap: int = ENUM_CAP) -> Poly:
    """Exact Z(G; x) as an integer polynomial."""
    return Poly(tuple(mono_counts(G, None, cap)))


def ising_poly_pinned(G: MultiGraph, pins: dict, cap: int = ENUM_CAP) -> Poly:
    return Poly(tuple(mono_counts(G, pins, cap)))


@dataclass(frozen=True)
class InteractionMatrix:
    """Pinned partition sums Z^{jk} with s pinned to j and t pinned to k."""

    z00: object
    z01: object
    z10: object
    z11: object

    def as_rows(self):
        return [[self.z00, self.z01], [self.z10, self.z11]]

    def evaluate(self, beta) -> "InteractionMatrix":
        return InteractionMatrix(*(poly_eval(p, beta) for p in (self.z00, self.z01, self.z10, self.z11)))

    def to_json(self) -> dict:
        return {k: getattr(self, k).to_json() for k in ("z00", "z01", "z10", "z11")}


def interaction_matrix(G: MultiGraph, T: Terminals, cap: int = ENUM_CAP) -> InteractionMatrix:
    T.check(G)
    m = {}
    for j in (0, 1):
        for k in (0, 1):
            m[j, k] = ising_poly_pinned(G, {T.s: j, T.t: k}, cap)
    assert m[0, 0] == m[1, 1] and m[0, 1] == m[1, 0], "spin-flip symmetry broken"
    return InteractionMatrix(m[0, 0], m[0, 1], m[1, 0], m[1, 1])


def implemented_weight(G: MultiGraph, T: Terminals, beta, ctx: PrecisionContext | None = None,
                       cap: int = ENUM_CAP):
    """w = Z11(beta)/Z01(beta): the edge weight that (G, T) stands in for.

    Small gadgets use the exact polynomials; larger ones go through
    variable elimination at the working precision.
    """
    ctx = ctx or default_context()
    with ctx.activate():
        if G.n - 2 <= cap:
            M = interaction_matrix(G, T, cap).evaluate(beta)
            z11, z01 = M.z11, M.z01
        else:
            M = interaction_values(G, T, beta)
            z11, z01 = M[1][1], M[0][1]
    if cabs(z01) <= ctx.tolerance:
        fail("NOT_IMPLEMENTING", "Z01 vanishes at this beta", z01=str(z01))
    if is_exact(z11) and is_exact(z01):
        return exact_div(z11, z01)
    with ctx.activate():
        return to_mpc(z11) / to_mpc(z01)


# ---------------------------------------------------------------------------
# heterogeneous edge weights
# ---------------------------------------------------------------------------

def weighted_z_eval(G: MultiGraph, edge_weights, pins: dict | None = None, cap: int = ENUM_CAP):
    """sum over configurations of the product of w_e over monochromatic edges.

    Edges with equal weights are grouped; each configuration is summarised by
    its per-group monochromatic counts, so the final sum is exact when the
    weights are.
    """
    edge_weights = list(edge_weights)
    if len(edge_weights) != G.m:
        fail("ARITY", f"expected {G.m} weights, got {len(edge_weights)}")
    pins = dict(pins or {})
    index = {}
    for w in edge_weights:
        index.setdefault(w, len(index))
    groups = list(index)
    gid = [index[w] for w in edge_weights]
    base = G.m + 1
    if base ** len(groups) >= 2 ** 62:
        # per-group codes would overflow int64; sum out vertices instead
        return eliminate(G, edge_weights, pins=pins)[()]
    tally = {}
    for size, spins in _spin_chunks(G, pins, cap):
        code = np.zeros(size, dtype=np.int64)
        for (u, v), g in zip(G.edges, gid):
            if u == v:
                code += base ** g
            else:
                code += (spins[u] == spins[v]).astype(np.int64) * base ** g
        vals, cnt = np.unique(code, return_counts=True)
        for c, k in zip(vals.tolist(), cnt.tolist()):
            tally[c] = tally.get(c, 0) + k
    exact = all(is_exact(w) for w in groups)
    ws = groups if exact else [to_mpc(w) for w in groups]
    total = 0 if exact else mpmath.mpc(0)
    for code, k in tally.items():
        term = k
        for g in range(len(groups)):
            e = (code // base ** g) % base
            if e:
                term = term * ws[g] ** e
        total = total + term
    return total


# ---------------------------------------------------------------------------
# variable elimination (for gadgets far beyond the enumeration cap)
# ---------------------------------------------------------------------------

def _edge_factor(w):
    return {(0, 0): w, (0, 1): 1, (1, 0): 1, (1, 1): w}


def eliminate(G: MultiGraph, weights, keep=(), pins: dict | None = None):
    """Sum out every vertex except ``keep`` by min-degree variable
    elimination. Returns a dict from spin tuples (ordered as ``keep``) to
    values. Arithmetic follows the weights (exact or mpc)."""
    if not isinstance(weights, (list, tuple)):
        weights = [weights] * G.m
    pins = dict(pins or {})
    keep = tuple(keep)
    one = 1 if all(is_exact(w) for w in weights) else mpmath.mpc(1)
    factors = []  # (scope tuple, table dict)
    scalar = one
    for (u, v), w in zip(G.edges, weights):
        if u == v:
            scalar = scalar * w
        else:
            factors.append(((u, v), _edge_factor(w)))

    # absorb pins by restricting factors
    def restrict(scope, table):
        if not any(x in pins for x in scope):
            return scope, table
        new_scope = tuple(x for x in scope if x not in pins)
        new_table = {}
        for key, val in table.items():
            if all(key[i] == pins[x] for i, x in enumerate(scope) if x in pins):
                new_table[tuple(key[i] for i, x in enumerate(scope) if x not in pins)] = val
        return new_scope, new_table

    factors = [restrict(s, t) for s, t in factors]
    live = [v for v in range(G.n) if v not in pins and v not in keep]
    adj = {v: set() for v in range(G.n)}
    for s, _ in factors:
        for a in s:
            adj[a].update(b for b in s if b != a)
    remaining = set(live)
    while remaining:
        x = min(remaining, key=lambda v: (len(adj[v] & (remaining | set(keep))), v))
        remaining.discard(x)
        touching = [f for f in factors if x in f[0]]
        factors = [f for f in factors if x not in f[0]]
        scope = tuple(sorted({a for s, _ in touching for a in s if a != x}))
        table = {}
        for assign in itertools.product((0, 1), repeat=len(scope)):
            env = dict(zip(scope, assign))
            acc = 0
            for sx in (0, 1):
                env[x] = sx
                prod = one
                for s, t in touching:
                    prod = prod * t[tuple(env[a] for a in s)]
                acc = acc + prod
            table[assign] = acc
        if scope:
            factors.append((scope, table))
            for a in scope:
                adj[a].discard(x)
                adj[a].update(b for b in scope if b != a)
        else:
            scalar = scalar * table[()]
    out = {}
    for assign in itertools.product((0, 1), repeat=len(keep)):
        env = dict(zip(keep, assign))
        prod = scalar
        for s, t in factors:
            prod = prod * t[tuple(env[a] for a in s)]
        out[assign] = prod
    return out


def interaction_values(G: MultiGraph, T: Terminals, beta):
    """2x2 nested list [[Z00, Z01], [Z10, Z11]] at a numeric beta, by elimination."""
    T.check(G)
    w = beta if is_exact(beta) else to_mpc(beta)
    tab = eliminate(G, w, keep=(T.s, T.t))
    return [[tab[0, 0], tab[0, 1]], [tab[1, 0], tab[1, 1]]]


def z_by_elimination(G: MultiGraph, beta):
    w = beta if is_exact(beta) else to_mpc(beta)
    return eliminate(G, w)[()]


# ---------------------------------------------------------------------------
# Tutte (random-cluster) form
# ---------------------------------------------------------------------------

def tutte_counts(G: MultiGraph, cap: int = SUBSET_CAP) -> dict:
    """{(k, a): number of edge subsets with k components and a edges}."""
    _check_cap(G.m, cap, "edge count")
    parent = list(range(G.n))
    rank = [0] * G.n
    counts = {}
    edges = G.edges

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    def rec(i, comps, size):
        if i == len(edges):
            counts[comps, size] = counts.get((comps, size), 0) + 1
            return
        rec(i + 1, comps, size)
        u, v = edges[i]
        ru, rv = find(u), find(v)
        if ru == rv:
            rec(i + 1, comps, size + 1)
            return
        if rank[ru] > rank[rv]:
            ru, rv = rv, ru
        parent[ru] = rv
        bumped = rank[ru] == rank[rv]
        if bumped:
            rank[rv] += 1
        rec(i + 1, comps - 1, size + 1)
        parent[ru] = ru  # roll back
        if bumped:
            rank[rv] -= 1

    rec(0, G.n, 0)
    return counts


def tutte_eval(G: MultiGraph, q, gamma, cap: int = SUBSET_CAP):
    """sum over edge subsets A of q^k(A) gamma^|A|."""
    counts = tutte_counts(G, cap)
    exact = is_exact(q) and is_exact(gamma)
    if not exact:
        q, gamma = to_mpc(q), to_mpc(gamma)
    total = 0
    for (k, a), c in counts.items():
        total = total + c * q ** k * gamma ** a
    return total
