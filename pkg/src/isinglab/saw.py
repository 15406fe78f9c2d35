"""Self-avoiding-walk trees and the zero-freeness certificate built on them.

The tree has one node per self-avoiding walk from the root. When a step
closes a cycle at a vertex u already on the walk, the walk becomes a pinned
leaf. The pin is 1 if the closing edge comes after the edge by which the walk
left u in u's incidence order (edges sorted by index), and 0 otherwise. With
this rule the tree polynomial is divisible by the graph polynomial, which
``divisibility_check`` verifies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import mpmath
import numpy as np

from .errors import IsingLabError, fail
from .exact import ENUM_CAP, ising_poly, z_by_elimination
from .graphs import MultiGraph, max_degree
from .maps import h_map, h_np
from .numerics import (INF, Poly, int_poly_mul, is_exact, is_inf, poly_divide_exact,
                       poly_eval_array, to_mpc)
from .regions import epsilon_Delta, in_R

FREE, PIN0, PIN1 = 0, 1, 2
PIN_NAMES = {FREE: "FREE", PIN0: "PIN0", PIN1: "PIN1"}
TREE_CAP = 10 ** 6


@dataclass
class SAWTree:
    children: list
    pin: list
    origin: list
    root: int = 0

    @property
    def size(self) -> int:
        return len(self.pin)

    def max_children(self, skip_root: bool = True) -> int:
        start = 1 if skip_root else 0
        return max((len(c) for c in self.children[start:]), default=0)

    def to_json(self) -> dict:
        return {"root": self.root,
                "nodes": [{"id": i, "children": list(c), "pin": PIN_NAMES[p], "vertex": o}
                          for i, (c, p, o) in enumerate(zip(self.children, self.pin, self.origin))]}


def build_saw_tree(G: MultiGraph, v: int, cap: int = TREE_CAP) -> SAWTree:
    if G.has_loop():
        fail("HAS_LOOP", "SAW trees are built on loop-free graphs")
    if not 0 <= v < G.n:
        fail("DOMAIN", f"root {v} out of range")
    inc = G.incidence()
    children, pin, origin = [[]], [FREE], [v]
    leave = {v: None}  # vertex on the current walk -> edge used to leave it
    stack = [(0, v, -1, iter(inc[v]))]
    while stack:
        node, x, e_in, it = stack[-1]
        for i, y in it:
            if i == e_in:
                continue
            if len(pin) >= cap:
                fail("TOO_LARGE", f"SAW tree exceeds {cap} nodes")
            c = len(pin)
            children[node].append(c)
            children.append([])
            origin.append(y)
            if y in leave:
                pin.append(PIN1 if i > leave[y] else PIN0)
                continue
            pin.append(FREE)
            leave[x] = i
            leave[y] = None
            stack.append((c, y, i, iter(inc[y])))
            break
        else:
            stack.pop()
            del leave[x]
            if stack:
                leave[stack[-1][1]] = None
    return SAWTree(children, pin, origin, 0)


# ---------------------------------------------------------------------------
# exact tree polynomial
# ---------------------------------------------------------------------------

def _add(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return out


def _shift(a):
    return [0] + a


_LEAF = {FREE: ([1], [1]), PIN0: ([1], []), PIN1: ([], [1])}


def tree_pinned_pair(T: SAWTree, cap: int = TREE_CAP):
    """(Z^0, Z^1) of the tree with the root spin fixed, as integer lists."""
    if T.size > cap:
        fail("TOO_LARGE", "tree exceeds cap")
    vals = {}
    # children always carry larger ids than their parent
    for node in range(T.size - 1, -1, -1):
        kids = T.children[node]
        if not kids:
            vals[node] = _LEAF[T.pin[node]]
            continue
        z0, z1 = [1], [1]
        for c in kids:
            a0, a1 = vals.pop(c)
            z0 = int_poly_mul(z0, _add(_shift(a0), a1))
            z1 = int_poly_mul(z1, _add(a0, _shift(a1)))
        vals[node] = (z0, z1)
    return vals[T.root]


def tree_pinned_poly(T: SAWTree, cap: int = TREE_CAP) -> Poly:
    z0, z1 = tree_pinned_pair(T, cap)
    return Poly(tuple(_add(z0, z1)))


def divisibility_check(G: MultiGraph, v: int, cap: int = ENUM_CAP) -> Poly:
    """Quotient Z(T; x) / Z(G; x); raises DIVISIBILITY_VIOLATION otherwise."""
    T = build_saw_tree(G, v)
    num = tree_pinned_poly(T)
    den = ising_poly(G, cap)
    try:
        return poly_divide_exact(num, den)
    except IsingLabError as exc:
        if exc.kind == "NOT_DIVISIBLE":
            fail("DIVISIBILITY_VIOLATION", f"tree polynomial not divisible (root {v})")
        raise


def divisible_mod(G: MultiGraph, v: int, modulus: int = (1 << 61) - 1, cap: int = ENUM_CAP) -> bool:
    """Fast divisibility screen: Z(G)/2 is monic for connected G, so the
    tree polynomial reduces to zero modulo it in Z_p[x] whenever it divides."""
    T = build_saw_tree(G, v)
    num = tree_pinned_poly(T).ints()
    den = ising_poly(G, cap).ints()
    lead = den[-1]
    inv = pow(lead, -1, modulus)
    rem = [c % modulus for c in num]
    dn = len(den) - 1
    for k in range(len(rem) - 1 - dn, -1, -1):
        q = rem[k + dn] * inv % modulus
        if q:
            for j, dj in enumerate(den):
                rem[k + j] = (rem[k + j] - q * dj) % modulus
    return not any(rem[:dn])


# ---------------------------------------------------------------------------
# ratios
# ---------------------------------------------------------------------------

@dataclass
class RatioResult:
    value: object
    trace: list | None = None


_LEAF_RATIO = {FREE: 1, PIN0: 0, PIN1: INF}


def tree_ratio(T: SAWTree, beta, trace: bool = False) -> RatioResult:
    """Z^1/Z^0 at the root via r = prod_j h_b(r_j) over the children."""
    if not is_exact(beta):
        beta = to_mpc(beta)
    vals = [None] * T.size
    for node in range(T.size - 1, -1, -1):
        kids = T.children[node]
        if not kids:
            vals[node] = _LEAF_RATIO[T.pin[node]]
            continue
        prod = 1
        has_zero = has_inf = False
        for c in kids:
            w = h_map(beta, vals[c])
            if is_inf(w):
                has_inf = True
            elif w == 0:
                has_zero = True
            else:
                prod = prod * w
        if has_zero and has_inf:
            fail("INDETERMINATE", f"0 * INF at node {node}", node=node)
        vals[node] = INF if has_inf else (0 if has_zero else prod)
        if not trace:
            for c in kids:
                vals[c] = None
    return RatioResult(vals[T.root], vals if trace else None)


def pinned_values(T: SAWTree, beta):
    """(Z^0(beta), Z^1(beta)) by numeric DP (mpc or exact)."""
    if not is_exact(beta):
        beta = to_mpc(beta)
    leaf = {FREE: (1, 1), PIN0: (1, 0), PIN1: (0, 1)}
    vals = {}
    for node in range(T.size - 1, -1, -1):
        kids = T.children[node]
        if not kids:
            vals[node] = leaf[T.pin[node]]
            continue
        z0 = z1 = 1
        for c in kids:
            a0, a1 = vals.pop(c)
            z0 = z0 * (beta * a0 + a1)
            z1 = z1 * (a0 + beta * a1)
        vals[node] = (z0, z1)
    return vals[T.root]


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------

@dataclass
class CertificateReport:
    passed: bool
    n_betas: int
    checks: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    tree_nodes: int = 0
    min_abs_z_rel: float = math.inf
    max_arg: float = 0.0
    max_ratio: float = 0.0
    min_re: float = math.inf

    def to_json(self) -> dict:
        return {"passed": self.passed, "n_betas": self.n_betas, "checks": dict(self.checks),
                "failures": self.failures[:20], "tree_nodes": self.tree_nodes,
                "min_abs_z_rel": self.min_abs_z_rel, "max_arg": self.max_arg,
                "max_ratio": self.max_ratio, "min_re": self.min_re}


def _certify_tree(T: SAWTree, betas: np.ndarray, d: int, eps: float, tol: float, report, comp):
    """Post-order walk with one accumulator per open node; only O(depth)
    arrays are alive. Updates ``report`` in place, returns the root ratios
    and a per-beta pass mask."""
    K = len(betas)
    ok = np.ones(K, dtype=bool)
    theta = math.pi / (2 * d)
    leaf_w = {FREE: np.ones(K, dtype=complex), PIN0: 1 / betas, PIN1: betas.copy()}
    leaf_stats = {}
    for p, w in leaf_w.items():
        leaf_stats[p] = (np.abs(np.angle(w)), np.abs(w - 1) / np.abs(w + 1))

    def check_w(w, arg, rat, node):
        good = (arg <= theta + tol) & (rat <= eps + tol)
        if not good.all():
            report.failures.append({"component": comp, "node": int(node), "check": "child_weight",
                                    "beta_index": int(np.argmin(good))})
        report.max_arg = max(report.max_arg, float(arg.max()))
        report.max_ratio = max(report.max_ratio, float(rat.max()))
        return good

    used_leaf = set()
    stack = [(T.root, 0, np.ones(K, dtype=complex))]
    root_r = None
    with np.errstate(all="ignore"):
        while stack:
            node, idx, acc = stack[-1]
            kids = T.children[node]
            if idx < len(kids):
                c = kids[idx]
                stack[-1] = (node, idx + 1, acc)
                if T.children[c]:
                    stack.append((c, 0, np.ones(K, dtype=complex)))
                else:
                    p = T.pin[c]
                    acc *= leaf_w[p]
                    if p not in used_leaf:
                        used_leaf.add(p)
                        arg, rat = leaf_stats[p]
                        ok &= check_w(leaf_w[p], arg, rat, c)
                continue
            stack.pop()
            r = acc
            if stack:
                # a non-root subtree: the ratio must lie in the closed right half-plane
                re_ok = (r.real >= -tol) | ~np.isfinite(r)
                report.min_re = min(report.min_re, float(np.nanmin(np.where(np.isfinite(r), r.real, np.inf))))
                if not re_ok.all():
                    report.failures.append({"component": comp, "node": int(node), "check": "half_plane",
                                            "beta_index": int(np.argmin(re_ok))})
                ok &= re_ok
                w = h_np(betas, r)
                w = np.where(np.isinf(r), betas, w)
                arg = np.abs(np.angle(w))
                rat = np.abs(w - 1) / np.abs(w + 1)
                ok &= check_w(w, arg, rat, node)
                stack[-1][2].__imul__(w)
            else:
                root_r = r
    if root_r is None:  # single isolated vertex
        root_r = np.ones(K, dtype=complex)
    root_ok = np.abs(root_r + 1) > tol
    if not root_ok.all():
        report.failures.append({"component": comp, "node": T.root, "check": "root_not_minus_one",
                                "beta_index": int(np.argmin(root_ok))})
    return root_r, ok & root_ok


def certify_grid(G: MultiGraph, betas, Delta: int, tol: float = 1e-9, z_rel: float = 1e-8,
                 cap: int = ENUM_CAP) -> CertificateReport:
    """Run the zero-freeness certificate for every beta in ``betas``.

    Per connected component a SAW tree is built and walked once, vectorised
    over the betas. Checks: every child weight h_b(r_j) lies in R(eps) and in
    the sector |arg| <= pi/(2d); every non-root subtree ratio has Re >= 0;
    the root ratio is not -1; and |Z(G; beta)| > z_rel * 2^n by direct
    evaluation.
    """
    betas = np.atleast_1d(np.asarray(betas, dtype=complex))
    eps = epsilon_Delta(Delta)
    d = Delta - 1
    for b in betas:
        if not in_R(b, eps, tol):
            fail("PRECONDITION", f"beta={b} is outside R(eps_{Delta})")
    if max_degree(G) > Delta:
        fail("PRECONDITION", f"max degree {max_degree(G)} exceeds {Delta}")
    loops = sum(1 for u, v in G.edges if u == v)
    H = MultiGraph(G.n, tuple(e for e in G.edges if e[0] != e[1]))
    report = CertificateReport(True, len(betas))
    ok = np.ones(len(betas), dtype=bool)
    for ci, comp in enumerate(H.components()):
        sub, _ = H.induced(comp)
        T = build_saw_tree(sub, 0)
        report.tree_nodes += T.size
        if T.max_children() > d:
            fail("CHECK_FAILED", "a non-root tree node has more than Delta-1 children")
        _, comp_ok = _certify_tree(T, betas, d, eps, tol, report, ci)
        ok &= comp_ok
    report.checks["sectors_and_half_plane"] = bool(ok.all())
    # direct evaluation of Z
    if H.n <= cap:
        zp = ising_poly(H, cap)
        zv = poly_eval_array(zp, betas) * betas ** loops
    else:
        zv = np.array([complex(z_by_elimination(G, complex(b))) for b in betas])
    rel = np.abs(zv) / 2.0 ** G.n
    report.min_abs_z_rel = float(rel.min()) if len(rel) else math.inf
    z_ok = rel > z_rel
    if not z_ok.all():
        report.failures.append({"check": "z_nonzero", "beta_index": int(np.argmin(z_ok))})
    report.checks["z_nonzero"] = bool(z_ok.all())
    report.passed = bool(ok.all() and z_ok.all())
    return report


def certify_zero_free(G: MultiGraph, beta, Delta: int, tol: float = 1e-9,
                      raise_on_fail: bool = True) -> CertificateReport:
    rep = certify_grid(G, [complex(beta)], Delta, tol)
    if raise_on_fail and not rep.passed:
        fail("CHECK_FAILED", f"certificate failed: {rep.failures[:1]}", failures=rep.failures)
    return rep


def region_grid(Delta: int, n_radii: int = 20, n_angles: int = 36, shrink: float = 1.0) -> np.ndarray:
    """Polar grid inside the R(eps_Delta) disk: radii (k/n) * shrink * r for
    k = 1..n around the disk center."""
    from .regions import r_region
    D = r_region(epsilon_Delta(Delta))
    rad = D.radius * shrink * np.arange(1, n_radii + 1) / n_radii
    ang = 2 * np.pi * np.arange(n_angles) / n_angles
    return (D.center + rad[:, None] * np.exp(1j * ang)[None, :]).ravel()
