import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isinglab.errors import IsingLabError
from isinglab.exact import implemented_weight, interaction_matrix
from isinglab.graphs import Terminals, max_degree
from isinglab.gadgets import (IsingProgram, Step, approach_one, build_cover, compiled_sizes,
                              dynamics_info, figure8_graph, implement_target,
                              linearization_exponent, minus_one_from_zero, navigate_to,
                              no_exceptional_points_check, program_compile, program_eval,
                              zero_registry)
from isinglab.maps import g_map, h_map
from isinglab.numerics import GaussRat, PrecisionContext, poly_eval

CTX = PrecisionContext(40)


@st.composite
def programs(draw, max_len=5, max_arity=4, kinds=True):
    steps = []
    for k in range(1, draw(st.integers(1, max_len)) + 1):
        kind = draw(st.sampled_from(["g", "g", "h"])) if kinds else "g"
        base = draw(st.integers(0, k - 1))
        if kind == "h":
            steps.append(Step((draw(st.integers(0, k - 1)),), base, "h"))
        else:
            ar = draw(st.integers(1, max_arity))
            steps.append(Step(tuple(draw(st.integers(0, k - 1)) for _ in range(ar)), base))
    return IsingProgram(tuple(steps))


def test_step_validation():
    with pytest.raises(IsingLabError) as e:
        IsingProgram(((1,),))
    assert e.value.kind == "DOMAIN"
    with pytest.raises(IsingLabError) as e:
        Step((0, 1), 0, "h")
    assert e.value.kind == "ARITY"


def test_program_json_roundtrip():
    p = IsingProgram(((0, 0), (1,), Step((2,), 1, "h")))
    assert IsingProgram.from_json(p.to_json()) == p
    assert p.to_json()[0] == [0, 0]


def test_program_eval_exact():
    b = Fraction(2)
    p = IsingProgram(((0, 0),))
    assert program_eval(p, b).final == g_map(b, b * b)
    q = IsingProgram((Step((0,), 0, "h"),))
    assert program_eval(q, b).final == h_map(b, b) == Fraction(5, 4)


def test_compiled_sizes_predicts_compile():
    p = IsingProgram(((0, 0), (1, 0), Step((2,), 1, "h")))
    G, T = program_compile(p)
    assert compiled_sizes(p)[-1] == G.n


@settings(max_examples=60, deadline=None)
@given(programs(max_len=4, max_arity=2), st.integers(3, 5))
def test_compiled_weight_matches_program(p, Delta):
    if p.arity() > Delta - 1 or compiled_sizes(p)[-1] > 22:
        return
    beta = GaussRat(Fraction(1, 3), Fraction(5, 4))
    G, T = program_compile(p, beta, Delta)
    assert max_degree(G) <= Delta
    deg = G.degrees()
    assert deg[T.s] == 1 and deg[T.t] == 1
    try:
        want = program_eval(p, beta).final
        got = implemented_weight(G, T, beta)
    except IsingLabError as exc:
        assert exc.kind in ("INDETERMINATE", "NOT_IMPLEMENTING")
        return
    assert got == want  # exact arithmetic on both sides


def test_compile_arity_and_size_guards():
    p = IsingProgram(((0, 0, 0),))
    with pytest.raises(IsingLabError) as e:
        program_compile(p, Delta=3)
    assert e.value.kind == "ARITY"
    long = IsingProgram(tuple((k, k) for k in range(20)))
    with pytest.raises(IsingLabError) as e:
        program_compile(long)
    assert e.value.kind == "TOO_LARGE"


def test_compile_verify():
    p = IsingProgram(((0, 0), (1, 0)))
    G, T = program_compile(p, 0.3 + 1.2j, 3, verify=True, ctx=CTX)
    assert G.n == compiled_sizes(p)[-1]


def test_dynamics_info():
    info = dynamics_info(3j, 3)
    assert info.repelling and info.ratio == pytest.approx(1.0)
    assert abs(info.multiplier) == pytest.approx(2.0)
    info = dynamics_info(1.1 + 0.1j, 3)
    assert not info.repelling
    with pytest.raises(IsingLabError) as e:
        dynamics_info(1, 3)
    assert e.value.kind == "DEGENERATE"


@settings(max_examples=200)
@given(st.complex_numbers(min_magnitude=0.05, max_magnitude=20, allow_nan=False, allow_infinity=False),
       st.integers(3, 8))
def test_repelling_iff_above_threshold(b, Delta):
    if min(abs(b - 1), abs(b + 1)) < 1e-3:
        return
    ratio = abs(b - 1) / abs(b + 1)
    if abs(ratio - 1 / math.sqrt(Delta - 1)) < 1e-9:
        return
    assert dynamics_info(b, Delta).repelling == (ratio > 1 / math.sqrt(Delta - 1))


def test_no_exceptional_points():
    out = no_exceptional_points_check(0.3 + 1.2j, 2)
    assert out["exceptional_points"] == 0
    with pytest.raises(IsingLabError) as e:
        no_exceptional_points_check(1j, 2)
    assert e.value.kind == "SPECIAL_POINT"


@pytest.mark.parametrize("beta", [0.3 + 1.2j, 2 + 2j, -0.5 + 0.4j])
def test_linearization_is_quadratic(beta):
    assert linearization_exponent(beta, 2, ctx=CTX) == pytest.approx(2.0, abs=0.1)


@pytest.mark.parametrize("beta", [1.1 + 0.2j, 3j, 0.2 + 3j])
def test_approach_one(beta):
    prog, val = approach_one(beta, 1e-3, 2, CTX)
    v = complex(val)
    assert 0 < abs(1 - v) <= 1e-3 and v.imag != 0


def test_cover_is_contracting():
    cover = build_cover(3j, 3, seed=0)
    assert cover.lipschitz() < 0.95
    start, lams, x = navigate_to(cover, cover.center + 0.5 * cover.r, 1e-6)
    assert abs(x - (cover.center + 0.5 * cover.r)) < 1e-6


@pytest.mark.parametrize("target", [-1, 0.5, 2 + 2j])
def test_implement_target_small(target):
    res = implement_target(3j, 3, target, 1e-4, CTX)
    assert res.error <= 1e-4
    ctx = PrecisionContext(60)
    replay = complex(program_eval(res.program, 3j, ctx).final)
    assert abs(replay - target) <= 1e-4
    assert res.program.arity() <= 2


def test_implement_target_preconditions():
    with pytest.raises(IsingLabError) as e:
        implement_target(1.1 + 0.1j, 3, -1, 1e-3)
    assert e.value.kind == "PRECONDITION"
    with pytest.raises(IsingLabError) as e:
        implement_target(2.0, 3, -1, 1e-3)
    assert e.value.kind == "PRECONDITION"


def test_figure8_zero_gives_minus_one():
    G, T = figure8_graph()
    zeros = zero_registry(3)
    beta0 = min((z for z in zeros), key=lambda z: abs(z - (0.396608 + 0.917988j)))
    assert abs(beta0 - (0.396608 + 0.917988j)) < 1e-5
    with CTX.activate():
        assert abs(poly_eval(interaction_matrix(G, T).z01, mpmath.mpc(beta0))) > 2
    from isinglab.gadgets import _figure8_zeros
    exact_zero = min(_figure8_zeros(50), key=lambda z: abs(complex(z) - beta0))
    H, T2 = minus_one_from_zero(G, T, exact_zero, 3, PrecisionContext(50))
    w = implemented_weight(H, T2, exact_zero, PrecisionContext(50))
    assert abs(complex(w) + 1) < 1e-6
    assert max_degree(H) <= 3


def test_minus_one_preconditions():
    G, T = figure8_graph()
    with pytest.raises(IsingLabError) as e:
        minus_one_from_zero(G, T, 0.5 + 0.5j, 3)
    assert e.value.kind == "PRECONDITION" and e.value.details["which"] == "is_zero"
