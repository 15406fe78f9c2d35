import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isinglab.errors import IsingLabError
from isinglab.exact import ising_poly
from isinglab.fptas import (approx_log_z, choose_m, exact_log_z, low_order_coeffs, q_poly,
                            segment_zero_free_disk, truncation_bound)
from isinglab.graphs import complete_graph, cycle_graph, parse_graph, random_bounded_graph
from isinglab.numerics import GaussRat, PrecisionContext, poly_eval
from isinglab.regions import epsilon_Delta, r_region

from oracles import naive_random_cluster
from test_graphs import multigraphs

FIG8 = "6 8\n0 2\n0 3\n2 4\n2 4\n3 5\n3 5\n1 4\n1 5\n"


def test_q_endpoints_exact():
    G = parse_graph(FIG8)
    b = GaussRat(Fraction(6, 5), Fraction(1, 10))
    q = q_poly(G, b)
    assert q[0] == 2 ** G.n
    assert poly_eval(q, 1) == poly_eval(ising_poly(G), b)


@settings(max_examples=40, deadline=None)
@given(multigraphs(max_n=6, max_m=7), st.integers(0, 4))
def test_low_order_coeffs(G, k):
    k = min(k, G.m)
    b = Fraction(5, 3)
    q = q_poly(G, b)
    c = low_order_coeffs(G, k)
    for j in range(k + 1):
        assert c[j] * (b - 1) ** j == q[j]


def test_low_order_coeffs_oracle():
    # c_j counts subsets of size j weighted by 2^components; compare with the
    # random-cluster oracle by matching its polynomial in gamma
    G = complete_graph(4)
    c = low_order_coeffs(G, G.m)
    for gamma in (Fraction(1, 3), Fraction(-2, 7), 2):
        assert sum(cj * gamma ** j for j, cj in enumerate(c)) == naive_random_cluster(4, G.edges, 2, gamma)


def test_segment_disk_contains_0_and_1():
    D = segment_zero_free_disk(1.2 + 0.1j, 3)
    assert D.contains(0, 0, strict=True) and D.contains(1, 0, strict=True)
    with pytest.raises(IsingLabError) as e:
        segment_zero_free_disk(3j, 3)
    assert e.value.kind == "NOT_IN_REGION"
    with pytest.raises(IsingLabError) as e:
        segment_zero_free_disk(1, 3)
    assert e.value.kind == "DEGENERATE"


def test_truncation_bound_and_m():
    assert truncation_bound(10, 0.5, 3) == pytest.approx(10 * 0.5 ** 4 / (4 * 0.5))
    m = choose_m(10, 0.5, 1e-6)
    assert truncation_bound(10, 0.5, m) <= 5e-7 < truncation_bound(10, 0.5, m - 1)
    assert choose_m(0, 0.5, 1e-6) == 0


def test_triangle_value():
    res = approx_log_z(complete_graph(3), 1.2, 1e-3, 3)
    assert complex(res.Z_hat) == pytest.approx(10.656, rel=1e-3)


def test_beta_one_short_circuit():
    res = approx_log_z(cycle_graph(5), 1, 1e-3, 3)
    assert complex(res.Z_hat) == pytest.approx(32)
    assert res.m_used == 0


def test_preconditions():
    with pytest.raises(IsingLabError) as e:
        approx_log_z(complete_graph(5), 1.1, 1e-3, 3)
    assert e.value.kind == "PRECONDITION"
    with pytest.raises(IsingLabError) as e:
        approx_log_z(complete_graph(3), 1.1, 0, 3)
    assert e.value.kind == "DOMAIN"
    with pytest.raises(IsingLabError) as e:
        approx_log_z(complete_graph(3), 1.1, 1e-40, 3, PrecisionContext(30))
    assert e.value.kind == "PRECISION_EXHAUSTED"


def _err(res, G, beta):
    exact = complex(poly_eval(ising_poly(G), complex(beta)))
    return abs(complex(res.Z_hat) / exact - 1), abs(complex(res.z_hat) - cmath.log(exact))


@pytest.mark.parametrize("Delta", [3, 4])
def test_accuracy_and_bound(Delta):
    rng = np.random.default_rng(11 + Delta)
    D = r_region(epsilon_Delta(Delta))
    for _ in range(20):
        G = random_bounded_graph(int(rng.integers(3, 10)), Delta, rng)
        rho = 0.9 * D.radius * np.sqrt(rng.random())
        beta = D.center + rho * np.exp(2j * np.pi * rng.random())
        for eps in (1e-2, 1e-4):
            res = approx_log_z(G, beta, eps, Delta)
            rel, logerr = _err(res, G, beta)
            assert rel <= eps
            # log error modulo 2 pi i never exceeds the computed bound
            diff = complex(res.z_hat) - complex(exact_log_z(G, beta))
            diff -= 2j * np.pi * round(diff.imag / (2 * np.pi))
            assert abs(diff) <= res.error_bound + 1e-12


def test_error_shrinks_with_m():
    G = parse_graph(FIG8)
    beta = 1.3 + 0.2j
    errs = [_err(approx_log_z(G, beta, eps, 3), G, beta)[0] for eps in (1e-1, 1e-3, 1e-5, 1e-7)]
    assert errs == sorted(errs, reverse=True)
