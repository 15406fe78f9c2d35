"""The Moebius map h_b(z) = (b z + 1)/(b + z) and its relatives.

h_b sends the ratio of a subtree below an edge to the ratio seen through that
edge; it is also the weight implemented by putting an edge of weight z in
series with an edge of weight b. Infinity is a regular value: h_b(INF) = b and
h_b(-b) = INF.
"""

from __future__ import annotations

import numpy as np

from .errors import fail
from .numerics import INF, exact_div, is_exact, is_inf, to_mpc


def _num(x):
    return x if is_exact(x) else to_mpc(x)


def h_map(beta, z):
    if is_inf(beta):
        fail("DOMAIN", "the edge weight of h must be finite")
    if is_inf(z):
        return _num(beta)
    beta, z = _num(beta), _num(z)
    num = beta * z + 1
    den = beta + z
    if den == 0:
        if num == 0:
            fail("INDETERMINATE", "h_b(z) is 0/0, which needs b = +-1 and z = -b")
        return INF
    if is_exact(num) and is_exact(den):
        return exact_div(num, den)
    return num / den


def g_map(beta, z):
    return h_map(beta, h_map(beta, z))


def h_inv(beta, y):
    """Inverse of h_b: x = (b y - 1)/(b - y), with h_inv(INF) = -b."""
    if is_inf(y):
        return -_num(beta)
    beta, y = _num(beta), _num(y)
    num = beta * y - 1
    den = beta - y
    if den == 0:
        if num == 0:
            fail("INDETERMINATE", "h_b^-1(y) is 0/0")
        return INF
    if is_exact(num) and is_exact(den):
        return exact_div(num, den)
    return num / den


def g_inv(beta, y):
    return h_inv(beta, h_inv(beta, y))


def f_map(beta, z, d: int):
    """f_b(z) = g_b(z^d)."""
    if is_inf(z):
        return g_map(beta, INF)
    return g_map(beta, _num(z) ** d)


def disk_ratio(z):
    """|z-1|/|z+1|: the parameter delta for which z lies on the boundary of
    R(delta). INF at z = -1, 1 at z = INF."""
    if is_inf(z):
        return 1.0
    z = complex(z)
    if z == -1:
        return float("inf")
    return abs(z - 1) / abs(z + 1)


def cayley(z):
    """(z-1)/(z+1); conjugates h_b to multiplication by cayley(b)."""
    if is_inf(z):
        return _num(1)
    z = _num(z)
    if z == -1:
        return INF
    if is_exact(z):
        return exact_div(z - 1, z + 1)
    return (z - 1) / (z + 1)


def cayley_inv(w):
    """(1+w)/(1-w)."""
    if is_inf(w):
        return _num(-1)
    w = _num(w)
    if w == 1:
        return INF
    if is_exact(w):
        return exact_div(1 + w, 1 - w)
    return (1 + w) / (1 - w)


def closed_form_iterate(beta, x, n: int, which: str = "h"):
    """n-fold h_b (or g_b) through the conjugacy
    (h^n(x) - 1)/(h^n(x) + 1) = ((b-1)/(b+1))^n (x-1)/(x+1)."""
    if which not in ("h", "g"):
        fail("DOMAIN", "which must be 'h' or 'g'")
    if n < 0:
        fail("DOMAIN", "n must be nonnegative")
    if n == 0:
        return _num(x) if not is_inf(x) else INF
    if not is_inf(x) and x == 1:
        return _num(1)
    if not is_inf(x) and x == -1:
        return _num(-1)
    k = n if which == "h" else 2 * n
    cb = cayley(beta)
    if is_inf(cb):
        fail("DOMAIN", "b = -1 makes h degenerate")
    cx = cayley(x)
    if is_inf(cx):  # x = -1 handled above; unreachable
        return _num(-1)
    return cayley_inv(cb ** k * cx)


def iterate(beta, x, n: int, which: str = "h"):
    step = h_map if which == "h" else g_map
    for _ in range(n):
        x = step(beta, x)
    return x


# ---------------------------------------------------------------------------
# complex128 versions for grids (no infinity handling beyond numpy's)
# ---------------------------------------------------------------------------

def h_np(beta, z):
    return (beta * z + 1) / (beta + z)


def h_inv_np(beta, y):
    return (beta * y - 1) / (beta - y)


def g_np(beta, z):
    return h_np(beta, h_np(beta, z))


def g_inv_np(beta, y):
    return h_inv_np(beta, h_inv_np(beta, y))


def disk_ratio_np(z):
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.abs(z - 1) / np.abs(z + 1)
