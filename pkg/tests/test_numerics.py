from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from isinglab.errors import IsingLabError
from isinglab.numerics import (GaussRat, INF, Poly, PrecisionContext, close, default_context,
                               distinct_roots, format_exact, int_poly_mul, is_inf, parse_complex,
                               parse_exact, poly_derivative, poly_divide_exact, poly_divmod_exact,
                               poly_eval, poly_from_ints, poly_from_roots, poly_log_truncate,
                               poly_mul, poly_roots, poly_taylor_shift, series_exp_truncate,
                               to_exact, to_mpc)

small_int = st.integers(-50, 50)
fractions = st.fractions(min_value=-20, max_value=20, max_denominator=30)
gauss = st.builds(GaussRat, fractions, fractions)
int_lists = st.lists(small_int, min_size=1, max_size=9)


def naive_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


# --- precision ------------------------------------------------------------

def test_precision_floor():
    with pytest.raises(IsingLabError) as e:
        PrecisionContext(20)
    assert e.value.kind == "DOMAIN"
    ctx = PrecisionContext(40)
    assert ctx.tolerance == pytest.approx(1e-20)
    assert ctx.escalated().working_digits == 80


def test_env_override(monkeypatch):
    monkeypatch.setenv("ISING_LAB_PRECISION", "64")
    assert default_context().working_digits == 64
    monkeypatch.setenv("ISING_LAB_PRECISION", "abc")
    with pytest.raises(IsingLabError):
        default_context()


def test_activate_restores_dps():
    before = mpmath.mp.dps
    with PrecisionContext(60).activate():
        assert mpmath.mp.dps >= 60
    assert mpmath.mp.dps == before


# --- exact scalars ----------------------------------------------------------

@given(gauss, gauss)
def test_gaussrat_field_ops(a, b):
    assert (a + b) - b == a
    assert (a * b).conjugate() == a.conjugate() * b.conjugate()
    if b != 0:
        assert (a / b) * b == a


@given(gauss)
def test_format_parse_roundtrip(x):
    assert parse_exact(format_exact(x)) == to_exact(x)


@pytest.mark.parametrize("text,value", [("3", 3), ("-1/2", Fraction(-1, 2)),
                                        ("1/3+2i", GaussRat(Fraction(1, 3), 2)),
                                        ("-5/4i", GaussRat(0, Fraction(-5, 4)))])
def test_parse_exact_examples(text, value):
    assert parse_exact(text) == value
    assert format_exact(value) == text


def test_parse_complex():
    assert parse_complex("3,0") == 3
    assert parse_complex("1/2,-1/3") == GaussRat(Fraction(1, 2), Fraction(-1, 3))
    # decimals are read exactly
    assert parse_complex("0.25,1e-3") == GaussRat(Fraction(1, 4), Fraction(1, 1000))
    assert parse_complex("-2") == -2
    with pytest.raises(IsingLabError) as e:
        parse_complex("1,2,3")
    assert e.value.kind == "PARSE_ERROR"


def test_infinity_singleton():
    assert is_inf(INF) and not is_inf(0)
    assert close(INF, INF, 1e-9) and not close(INF, 1, 1e-9)


# --- polynomials --------------------------------------------------------------

@given(int_lists, int_lists)
def test_int_mul_matches_schoolbook(a, b):
    got = int_poly_mul(a, b)
    want = naive_mul(a, b)
    while want and want[-1] == 0:
        want.pop()
    while got and got[-1] == 0:
        got.pop()
    assert got == want


@given(int_lists, int_lists.filter(lambda c: c[-1] != 0))
def test_divmod_identity(a, b):
    A, B = poly_from_ints(a), poly_from_ints(b)
    q, r = poly_divmod_exact(A, B)
    assert q * B + r == A
    assert r.degree < B.degree or r.is_zero()


def test_divide_exact_errors():
    with pytest.raises(IsingLabError) as e:
        poly_divide_exact(poly_from_ints([1, 0, 1]), poly_from_ints([1, 1]))
    assert e.value.kind == "NOT_DIVISIBLE"
    with pytest.raises(IsingLabError) as e:
        poly_divide_exact(poly_from_ints([1]), Poly(()))
    assert e.value.kind == "ZERO_DIVISOR"
    assert poly_divide_exact(poly_from_ints([-1, 0, 1]), poly_from_ints([1, 1])) == poly_from_ints([-1, 1])


@given(int_lists, fractions, fractions)
def test_taylor_shift_exact(a, z0, x):
    P = poly_from_ints(a)
    S = poly_taylor_shift(P, z0)
    assert poly_eval(S, x - z0) == poly_eval(P, x)


def test_eval_and_derivative():
    P = poly_from_ints([2, 0, 12, 0, 2])
    assert poly_eval(P, 3) == 2 + 12 * 9 + 2 * 81
    assert poly_derivative(P) == poly_from_ints([0, 24, 0, 8])
    assert poly_eval(P, GaussRat(0, 1)) == 2 - 12 + 2


def test_log_and_exp_series_are_inverse():
    with PrecisionContext(40).activate():
        P = Poly(tuple(mpmath.mpf(c) for c in (3, 1, 4, 1, 5)))
        a = poly_log_truncate(P, 12)
        e = series_exp_truncate(a, 12)
        assert abs(a[0]) < 1e-30  # normalised by the constant term
        for j, c in enumerate(P.coeffs):
            assert abs(3 * e[j] - c) < 1e-30
        for j in range(5, 13):
            assert abs(e[j]) < 1e-30


def test_log_series_needs_constant_term():
    with pytest.raises(IsingLabError) as e:
        poly_log_truncate(poly_from_ints([0, 1]), 3)
    assert e.value.kind == "CONSTANT_TERM_ZERO"


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=1, max_size=6, unique=True))
def test_roots_of_known_product(pts):
    ctx = PrecisionContext(40)
    with ctx.activate():
        roots = [mpmath.mpc(a, b) / 3 for a, b in pts]
        P = poly_from_roots(roots)
        found = poly_roots(P, ctx)
        for r in roots:
            assert min(abs(r - f) for f in found) < 1e-15


def test_roots_repeated():
    ctx = PrecisionContext(40)
    P = poly_mul(poly_from_ints([1, 1]) ** 3, poly_from_ints([-2, 1]))
    with ctx.activate():
        found = poly_roots(P, ctx)
        assert len(found) == 4
        assert min(abs(f - 2) for f in found) < 1e-20
        assert len(distinct_roots(found, 1e-5)) == 2


def test_json_roundtrip():
    P = Poly((1, Fraction(1, 2), GaussRat(0, 3)))
    assert Poly.from_json(P.to_json()) == P
    with mpmath.workdps(30):
        Q = Poly((to_mpc(1.5), to_mpc(2j)))
        R = Poly.from_json(Q.to_json())
        assert all(abs(a - b) < 1e-25 for a, b in zip(Q.coeffs, R.coeffs))
