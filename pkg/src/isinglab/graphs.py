"""Undirected multigraphs with loops, terminal pairs and gadget surgery."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import fail


@dataclass(frozen=True)
class MultiGraph:
    """Vertices 0..n-1; ``edges`` is a sorted tuple of pairs (u, v), u <= v.

    Repeated pairs are parallel edges and (u, u) is a loop.
    """

    n: int
    edges: tuple = ()

    def __post_init__(self):
        if self.n < 0:
            fail("DOMAIN", "negative vertex count")
        norm = []
        for e in self.edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < self.n and 0 <= v < self.n):
                fail("DOMAIN", f"edge {e} has an endpoint outside [0, {self.n})")
            norm.append((u, v) if u <= v else (v, u))
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @property
    def m(self) -> int:
        return len(self.edges)

    def degrees(self) -> list:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1  # a loop adds 2
        return deg

    def degree(self, v: int) -> int:
        return self.degrees()[v]

    def has_loop(self) -> bool:
        return any(u == v for u, v in self.edges)

    def incidence(self) -> list:
        """Per vertex, the list of (edge index, other endpoint) in edge order."""
        inc = [[] for _ in range(self.n)]
        for i, (u, v) in enumerate(self.edges):
            inc[u].append((i, v))
            if u != v:
                inc[v].append((i, u))
        return inc

    def components(self) -> list:
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.edges:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
        groups = {}
        for x in range(self.n):
            groups.setdefault(find(x), []).append(x)
        return sorted(groups.values())

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1

    def induced(self, vertices) -> tuple["MultiGraph", dict]:
        """Subgraph on ``vertices`` (relabelled densely) and the relabel map."""
        vertices = sorted(vertices)
        relabel = {v: i for i, v in enumerate(vertices)}
        edges = [(relabel[u], relabel[v]) for u, v in self.edges if u in relabel and v in relabel]
        return MultiGraph(len(vertices), tuple(edges)), relabel


@dataclass(frozen=True)
class Terminals:
    s: int
    t: int

    def __post_init__(self):
        if self.s == self.t:
            fail("DOMAIN", "terminals must be distinct")

    def check(self, G: MultiGraph):
        if not (0 <= self.s < G.n and 0 <= self.t < G.n):
            fail("DOMAIN", f"terminals {self} not in graph with {G.n} vertices")
        return self


def max_degree(G: MultiGraph) -> int:
    return max(G.degrees(), default=0)


def single_edge() -> tuple[MultiGraph, Terminals]:
    return MultiGraph(2, ((0, 1),)), Terminals(0, 1)


def path_graph(k: int) -> MultiGraph:
    """Path with k edges (k+1 vertices)."""
    return MultiGraph(k + 1, tuple((i, i + 1) for i in range(k)))


def cycle_graph(n: int) -> MultiGraph:
    return MultiGraph(n, tuple((i, (i + 1) % n) for i in range(n)))


def complete_graph(n: int) -> MultiGraph:
    return MultiGraph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def _glue(G1: MultiGraph, G2: MultiGraph, fixed: dict) -> tuple[MultiGraph, dict]:
    """Disjoint union where G2's vertices in ``fixed`` map to given G1 vertices.
    Returns the union and the G2 vertex map."""
    vmap = {}
    nxt = G1.n
    for v in range(G2.n):
        if v in fixed:
            vmap[v] = fixed[v]
        else:
            vmap[v] = nxt
            nxt += 1
    edges = list(G1.edges) + [(vmap[u], vmap[v]) for u, v in G2.edges]
    return MultiGraph(nxt, tuple(edges)), vmap


def series_compose(G1: MultiGraph, T1: Terminals, G2: MultiGraph, T2: Terminals):
    """Identify t1 with s2; the new terminals are (s1, t2)."""
    T1.check(G1)
    T2.check(G2)
    G, vmap = _glue(G1, G2, {T2.s: T1.t})
    return G, Terminals(T1.s, vmap[T2.t])


def parallel_compose(G1: MultiGraph, T1: Terminals, G2: MultiGraph, T2: Terminals):
    """Identify s1 with s2 and t1 with t2."""
    T1.check(G1)
    T2.check(G2)
    G, _ = _glue(G1, G2, {T2.s: T1.s, T2.t: T1.t})
    return G, Terminals(T1.s, T1.t)


def series_chain(parts) -> tuple[MultiGraph, Terminals]:
    G, T = parts[0]
    for H, TH in parts[1:]:
        G, T = series_compose(G, T, H, TH)
    return G, T


def parallel_bundle(parts) -> tuple[MultiGraph, Terminals]:
    G, T = parts[0]
    for H, TH in parts[1:]:
        G, T = parallel_compose(G, T, H, TH)
    return G, T


def substitute_edge(G: MultiGraph, e: int, H: MultiGraph, TH: Terminals) -> MultiGraph:
    """Replace edge ``e`` (index into the sorted edge list) by a copy of H,
    gluing TH.s and TH.t onto the endpoints of e."""
    if not 0 <= e < G.m:
        fail("DOMAIN", f"edge index {e} out of range")
    TH.check(H)
    u, v = G.edges[e]
    rest = MultiGraph(G.n, G.edges[:e] + G.edges[e + 1:])
    out, _ = _glue(rest, H, {TH.s: u, TH.t: v})
    return out


def add_pendant(G: MultiGraph, v: int) -> tuple[MultiGraph, int]:
    """Attach a new degree-1 vertex to v; returns the graph and its id."""
    return MultiGraph(G.n + 1, G.edges + ((v, G.n),)), G.n


def canonical_form(G: MultiGraph) -> tuple:
    """Isomorphism-invariant key (brute force over permutations, n <= 9)."""
    import itertools

    if G.n > 9:
        fail("TOO_LARGE", "canonical_form is brute force, n <= 9")
    best = None
    for perm in itertools.permutations(range(G.n)):
        key = tuple(sorted(tuple(sorted((perm[u], perm[v]))) for u, v in G.edges))
        if best is None or key < best:
            best = key
    return (G.n, best)


# ---------------------------------------------------------------------------
# text / JSON
# ---------------------------------------------------------------------------

def parse_graph(text: str) -> MultiGraph:
    """Parse the "n m" header followed by m lines "u v"."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    numbered = [(i + 1, ln) for i, ln in enumerate(lines) if ln]
    if not numbered:
        fail("PARSE_ERROR", "line 1: empty input", line=1)
    lineno, head = numbered[0]
    parts = head.split()
    if len(parts) != 2 or not all(p.lstrip("-").isdigit() for p in parts):
        fail("PARSE_ERROR", f"line {lineno}: expected 'n m'", line=lineno)
    n, m = int(parts[0]), int(parts[1])
    if n < 0 or m < 0:
        fail("PARSE_ERROR", f"line {lineno}: negative counts", line=lineno)
    body = numbered[1:]
    if len(body) != m:
        where = body[m][0] if len(body) > m else lineno
        fail("PARSE_ERROR", f"line {where}: expected {m} edge lines, found {len(body)}", line=where)
    edges = []
    for lineno, ln in body:
        parts = ln.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            fail("PARSE_ERROR", f"line {lineno}: expected 'u v'", line=lineno)
        u, v = int(parts[0]), int(parts[1])
        if u >= n or v >= n:
            fail("PARSE_ERROR", f"line {lineno}: vertex out of range", line=lineno)
        edges.append((u, v))
    return MultiGraph(n, tuple(edges))


def emit_graph(G: MultiGraph) -> str:
    lines = [f"{G.n} {G.m}"] + [f"{u} {v}" for u, v in G.edges]
    return "\n".join(lines) + "\n"


def graph_to_json(G: MultiGraph, T: Terminals | None = None) -> dict:
    out = {"n": G.n, "edges": [list(e) for e in G.edges]}
    if T is not None:
        out["terminals"] = [T.s, T.t]
    return out


def graph_from_json(obj) -> tuple[MultiGraph, Terminals | None]:
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            fail("PARSE_ERROR", f"line {exc.lineno}: {exc.msg}", line=exc.lineno)
    try:
        G = MultiGraph(int(obj["n"]), tuple(tuple(e) for e in obj["edges"]))
        T = Terminals(*obj["terminals"]) if obj.get("terminals") is not None else None
    except (KeyError, TypeError, ValueError) as exc:
        fail("PARSE_ERROR", f"line 1: bad graph JSON ({exc})", line=1)
    return G, T


def load_graph(text: str) -> tuple[MultiGraph, Terminals | None]:
    """Accept either format; JSON is recognised by a leading brace."""
    if text.lstrip().startswith("{"):
        return graph_from_json(text)
    return parse_graph(text), None


def random_bounded_graph(n: int, Delta: int, rng, extra: int | None = None,
                         connected: bool = True) -> MultiGraph:
    """Random simple graph with max degree <= Delta.

    A random spanning tree (respecting the degree bound) is grown first when
    ``connected``; then up to ``extra`` further edges are tried at random.
    """
    deg = [0] * n
    edges = set()
    if connected and n > 1:
        order = list(rng.permutation(n))
        placed = [order[0]]
        for v in order[1:]:
            cands = [u for u in placed if deg[u] < Delta]
            u = cands[int(rng.integers(len(cands)))]
            edges.add((min(u, v), max(u, v)))
            deg[u] += 1
            deg[v] += 1
            placed.append(v)
    if extra is None:
        extra = int(rng.integers(0, n + 1))
    for _ in range(4 * extra):
        if extra <= 0:
            break
        u, v = int(rng.integers(n)), int(rng.integers(n))
        if u == v or (min(u, v), max(u, v)) in edges or deg[u] >= Delta or deg[v] >= Delta:
            continue
        edges.add((min(u, v), max(u, v)))
        deg[u] += 1
        deg[v] += 1
        extra -= 1
    return MultiGraph(n, tuple(sorted(edges)))
