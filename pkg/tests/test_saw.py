from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isinglab.errors import IsingLabError
from isinglab.exact import ising_poly, ising_poly_pinned
from isinglab.graphs import MultiGraph, complete_graph, cycle_graph, parse_graph, random_bounded_graph
from isinglab.saw import (PIN0, PIN1, build_saw_tree, certify_grid, certify_zero_free,
                          divisibility_check, divisible_mod, pinned_values, region_grid,
                          tree_pinned_poly, tree_ratio)

from oracles import naive_saw_tree_poly, naive_z, poly_divides
from test_graphs import multigraphs

FIG8 = "6 8\n0 2\n0 3\n2 4\n2 4\n3 5\n3 5\n1 4\n1 5\n"


def test_triangle_tree_shape():
    T = build_saw_tree(complete_graph(3), 0)
    assert T.children == [[1, 4], [2], [3], [], [5], [6], []]
    assert T.pin == [0, 0, 0, PIN1, 0, 0, PIN0]
    assert T.origin[3] == 0 and T.origin[6] == 0


def test_triangle_tree_polynomial():
    T = build_saw_tree(complete_graph(3), 0)
    P = tree_pinned_poly(T)
    assert P.ints() == [0, 6, 0, 20, 0, 6]
    assert divisibility_check(complete_graph(3), 0).ints() == [1, 0, 3]


def test_tree_is_a_tree_and_bounded():
    G = parse_graph(FIG8)
    for v in range(G.n):
        T = build_saw_tree(G, v)
        for p, kids in enumerate(T.children):
            assert all(c > p for c in kids)
        assert T.max_children() <= 2
        parents = [0] * T.size
        for kids in T.children:
            for c in kids:
                parents[c] += 1
        assert parents[0] == 0 and all(x == 1 for x in parents[1:])


def test_loops_rejected():
    with pytest.raises(IsingLabError) as e:
        build_saw_tree(MultiGraph(2, ((0, 0), (0, 1))), 0)
    assert e.value.kind == "HAS_LOOP"


def test_too_large():
    with pytest.raises(IsingLabError) as e:
        build_saw_tree(complete_graph(7), 0, cap=1000)
    assert e.value.kind == "TOO_LARGE"


@settings(max_examples=60, deadline=None)
@given(multigraphs(max_n=4, max_m=5, loops=False))
def test_tree_poly_matches_walk_enumeration(G):
    T = build_saw_tree(G, 0)
    if T.size > 18:
        return
    assert tree_pinned_poly(T).ints() == naive_saw_tree_poly(G.n, G.edges, 0)


@settings(max_examples=80, deadline=None)
@given(multigraphs(max_n=6, max_m=8, loops=False), st.data())
def test_divisibility_random(G, data):
    if not G.is_connected():
        return
    v = data.draw(st.integers(0, G.n - 1))
    T = build_saw_tree(G, v)
    if T.size > 20000:
        return
    ok, _ = poly_divides(tree_pinned_poly(T).ints(), ising_poly(G).ints())
    assert ok
    assert divisible_mod(G, v)


def test_divisibility_oracle_detects_mismatch():
    G = cycle_graph(5)
    T = build_saw_tree(complete_graph(4), 0)
    ok, _ = poly_divides(tree_pinned_poly(T).ints(), ising_poly(G).ints())
    assert not ok


@settings(max_examples=60, deadline=None)
@given(multigraphs(max_n=5, max_m=6, loops=False), st.fractions(min_value=Fraction(1, 4), max_value=4,
                                                              max_denominator=9))
def test_ratio_equals_pinned_quotient(G, beta):
    # the tree root ratio equals Z(G, v=1)/Z(G, v=0) on the graph itself
    T = build_saw_tree(G, 0)
    if T.size > 5000:
        return
    z0 = naive_z(G.n, G.edges, beta, {0: 0})
    z1 = naive_z(G.n, G.edges, beta, {0: 1})
    r = tree_ratio(T, beta).value
    assert r == Fraction(z1, z0)
    p0, p1 = pinned_values(T, beta)
    assert Fraction(p1, p0) == r


def test_ratio_small_cases():
    # a single edge at beta = 0 contributes 1 whichever spin the root takes
    G = MultiGraph(2, ((0, 1),))
    T = build_saw_tree(G, 0)
    assert tree_ratio(T, 0).value == 1
    T3 = build_saw_tree(complete_graph(3), 0)
    r = tree_ratio(T3, Fraction(2)).value
    assert r == Fraction(ising_poly_pinned(complete_graph(3), {0: 1})(2),
                         ising_poly_pinned(complete_graph(3), {0: 0})(2))


def test_certify_examples():
    rep = certify_zero_free(complete_graph(4), 1.1, 3)
    assert rep.passed and rep.checks["z_nonzero"]
    rep = certify_zero_free(parse_graph(FIG8), 1.2 + 0.3j, 3)
    assert rep.passed


def test_certify_rejects_outside_region():
    with pytest.raises(IsingLabError) as e:
        certify_zero_free(complete_graph(4), 3j, 3)
    assert e.value.kind == "PRECONDITION"
    with pytest.raises(IsingLabError) as e:
        certify_zero_free(complete_graph(5), 1.1, 3)
    assert e.value.kind == "PRECONDITION"


def test_certify_loops_stripped():
    G = MultiGraph(3, ((0, 0), (0, 1), (1, 2)))
    rep = certify_zero_free(G, 1.1 + 0.1j, 4)
    assert rep.passed


@pytest.mark.parametrize("Delta", [3, 4])
def test_certify_grid_random(Delta):
    rng = np.random.default_rng(Delta)
    betas = region_grid(Delta, 10, 18)
    assert len(betas) == 180
    for _ in range(5):
        G = random_bounded_graph(int(rng.integers(3, 9)), Delta, rng)
        rep = certify_grid(G, betas, Delta)
        assert rep.passed, rep.failures[:3]
        assert rep.max_ratio <= np.tan(np.pi / (4 * (Delta - 1))) + 1e-9
        assert rep.max_arg <= np.pi / (2 * (Delta - 1)) + 1e-9


def test_tree_walk_flags_weights_outside_sector():
    # beta = 3i is far outside R(eps_3); the walk itself must report failures
    from isinglab.saw import CertificateReport, _certify_tree
    T = build_saw_tree(complete_graph(4), 0)
    rep = CertificateReport(True, 1)
    _, ok = _certify_tree(T, np.array([3j]), 2, np.tan(np.pi / 8), 1e-9, rep, 0)
    assert not ok.all()
    assert {f["check"] for f in rep.failures} & {"child_weight", "half_plane"}
