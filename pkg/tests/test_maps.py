import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from isinglab.errors import IsingLabError
from isinglab.maps import (cayley, cayley_inv, closed_form_iterate, disk_ratio, f_map, g_inv,
                           g_map, g_np, h_inv, h_inv_np, h_map, h_np, iterate)
from isinglab.numerics import INF, GaussRat, is_inf

from oracles import naive_h, naive_iterate

coord = st.fractions(min_value=-6, max_value=6, max_denominator=10)
gauss = st.builds(GaussRat, coord, coord)
cplx = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


def test_infinity_handling():
    assert h_map(3, INF) == 3
    assert is_inf(h_map(3, -3))
    assert h_inv(3, INF) == -3
    assert is_inf(h_inv(3, 3))
    assert disk_ratio(INF) == 1.0 and disk_ratio(-1) == float("inf")


def test_indeterminate():
    with pytest.raises(IsingLabError) as e:
        h_map(1, -1)
    assert e.value.kind == "INDETERMINATE"


def test_exact_values():
    assert h_map(2, 0) == Fraction(1, 2)
    assert g_map(2, 0) == h_map(2, Fraction(1, 2)) == Fraction(4, 5)
    assert f_map(2, 2, 2) == g_map(2, 4)


@settings(max_examples=200)
@given(gauss, gauss)
def test_inverse_exact(b, z):
    assume(b * b != 1 and b + z != 0 and b.abs2() != 0)
    y = h_map(b, z)
    assume(not is_inf(y) and y != b)
    assert h_inv(b, y) == z


@settings(max_examples=200)
@given(gauss, gauss)
def test_h_matches_naive(b, z):
    assume(b + z != 0)
    assert h_map(b, z) == naive_h(b, z)


@settings(max_examples=200)
@given(cplx, cplx)
def test_cayley_conjugacy(b, z):
    assume(abs(b + 1) > 1e-3 and abs(z + 1) > 1e-3 and abs(b + z) > 1e-3)
    lhs = cayley(h_map(b, z))
    rhs = cayley(b) * cayley(z)
    assert abs(complex(lhs) - complex(rhs)) < 1e-8 * max(1, abs(complex(rhs)))
    assert abs(complex(cayley_inv(cayley(z))) - z) < 1e-9 * max(1, abs(z))


@settings(max_examples=200, deadline=None)
@given(gauss, gauss, st.integers(0, 6), st.sampled_from(["h", "g"]))
def test_closed_form_exact(b, x, n, which):
    assume(b != -1 and b * b != 1)
    try:
        want = iterate(b, x, n, which)
    except IsingLabError:
        assume(False)
    got = closed_form_iterate(b, x, n, which)
    assert (is_inf(got) and is_inf(want)) or got == want


def test_numpy_versions_agree():
    rng = np.random.default_rng(0)
    b = 0.3 + 1.1j
    z = rng.normal(size=50) + 1j * rng.normal(size=50)
    assert np.allclose(h_inv_np(b, h_np(b, z)), z)
    assert np.allclose(g_np(b, z), [complex(g_map(b, w)) for w in z])


def test_g_inv_roundtrip():
    b = 2 + 1j
    for z in (0.5, 1 + 1j, -3):
        assert abs(complex(g_inv(b, g_map(b, z))) - z) < 1e-12
