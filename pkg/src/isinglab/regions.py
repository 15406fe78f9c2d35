"""Parameter-plane geometry for the edge interaction beta.

R(delta) = {beta : |beta - 1| / |beta + 1| <= delta}. For delta < 1 this is a
closed disk symmetric about the real axis and invariant under beta -> 1/beta;
for delta = 1 it is the closed right half-plane.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import fail
from .maps import disk_ratio
from .numerics import is_inf

SPECIAL_POINTS = (0, 1, -1, 1j, -1j)
DEFAULT_TOL = 1e-12


def epsilon_Delta(Delta: int) -> float:
    """tan(pi / (4 (Delta - 1)))."""
    if int(Delta) != Delta or Delta < 3:
        fail("DOMAIN", f"Delta must be an integer >= 3, got {Delta}")
    return math.tan(math.pi / (4 * (Delta - 1)))


def epsilon_Delta_mp(Delta: int):
    epsilon_Delta(Delta)
    return mpmath.tan(mpmath.pi / (4 * (Delta - 1)))


@dataclass(frozen=True)
class DiskRegion:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            fail("DOMAIN", "disk radius must be positive")

    def contains(self, z, tol: float = DEFAULT_TOL, strict: bool = False) -> bool:
        dist = abs(complex(z) - self.center)
        if strict:
            return dist < self.radius - tol
        return dist <= self.radius + tol

    def margin(self, z) -> float:
        return self.radius - abs(complex(z) - self.center)

    def boundary(self, k: int = 360) -> np.ndarray:
        t = 2 * np.pi * np.arange(k) / k
        return self.center + self.radius * np.exp(1j * t)

    def to_json(self) -> dict:
        c = complex(self.center)
        return {"center": [c.real, c.imag], "radius": self.radius}


def r_region(delta: float) -> DiskRegion:
    """R(delta) as a disk: center (1+d^2)/(1-d^2), radius 2d/(1-d^2)."""
    if not 0 < delta < 1:
        fail("DOMAIN", f"delta must lie in (0, 1), got {delta}")
    d2 = delta * delta
    return DiskRegion((1 + d2) / (1 - d2), 2 * delta / (1 - d2))


def in_R(beta, delta: float, tol: float = DEFAULT_TOL) -> bool:
    """Membership of beta in R(delta). beta = -1 is never a member."""
    if is_inf(beta):
        return delta >= 1
    ratio = disk_ratio(beta)
    if math.isinf(ratio):
        return False
    return ratio <= delta + tol


def in_R_strict(beta, delta: float, tol: float = DEFAULT_TOL) -> bool:
    if is_inf(beta):
        return False
    return disk_ratio(beta) < delta - tol


def barvinok_delta(Delta: int) -> float:
    """max of sin(a/2) cos(Delta a/2) over 0 < a < 2 pi/(3 Delta).

    The maximiser is bracketed on a coarse grid and refined by golden-section
    search.
    """
    if Delta < 1:
        fail("DOMAIN", "Delta must be >= 1")
    hi = 2 * math.pi / (3 * Delta)
    obj = lambda a: math.sin(a / 2) * math.cos(Delta * a / 2)
    grid = np.linspace(0, hi, 401)
    vals = np.sin(grid / 2) * np.cos(Delta * grid / 2)
    k = int(np.argmax(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    phi = (math.sqrt(5) - 1) / 2
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = obj(c), obj(d)
    while b - a > 1e-13:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = obj(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = obj(d)
    return obj((a + b) / 2)


def _is_real(beta, tol) -> bool:
    return abs(complex(beta).imag) <= tol


def _near_special(beta, tol) -> bool:
    return any(abs(complex(beta) - p) <= tol for p in SPECIAL_POINTS)


def hardness_member(beta, Delta: int, tol: float = DEFAULT_TOL) -> bool:
    """Nonreal, not +-i, and |beta-1|/|beta+1| > 1/sqrt(Delta-1)."""
    if Delta < 3:
        fail("DOMAIN", "Delta must be >= 3")
    if is_inf(beta) or _is_real(beta, tol) or _near_special(beta, tol):
        return False
    return disk_ratio(beta) > 1 / math.sqrt(Delta - 1) + tol


def barvinok_barvinok_member(beta, Delta: int, delta: float | None = None) -> bool:
    """With a = log(beta)/2 (principal branch): is there delta in (0, 1) with
    |Re a| < (1-delta)/Delta and |Im a| <= delta^2/(10 Delta)?

    The best choice of delta is the smallest one meeting the second
    constraint, so feasibility reduces to
    sqrt(10 Delta |Im a|) < 1 - Delta |Re a|. Passing ``delta`` checks that
    fixed value instead.
    """
    beta = complex(beta)
    if beta == 0:
        fail("DOMAIN", "log(0) is undefined")
    a = cmath.log(beta) / 2
    if delta is not None:
        if not 0 < delta < 1:
            fail("DOMAIN", "delta must lie in (0, 1)")
        return abs(a.real) < (1 - delta) / Delta and abs(a.imag) <= delta * delta / (10 * Delta)
    lo = math.sqrt(10 * Delta * abs(a.imag))
    hi = 1 - Delta * abs(a.real)
    return lo < hi and lo < 1


def mann_bremner_member(beta, Delta: int) -> bool:
    """|1 - 1/sqrt(beta)| <= delta_Delta and |1 - sqrt(beta)| <= delta_Delta."""
    s = cmath.sqrt(complex(beta))
    if s == 0:
        return False
    dd = barvinok_delta(Delta)
    return abs(1 - 1 / s) <= dd and abs(1 - s) <= dd


def liu_segment_member(beta, Delta: int, tol: float = DEFAULT_TOL) -> bool:
    """Real beta in ((Delta-2)/Delta, Delta/(Delta-2))."""
    b = complex(beta)
    return abs(b.imag) <= tol and (Delta - 2) / Delta < b.real < Delta / (Delta - 2)


@dataclass
class Classification:
    label: str
    witnesses: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    ratio: float = 0.0

    def to_json(self) -> dict:
        return {"label": self.label,
                "witnesses": [[name, bool(val)] for name, val in self.witnesses],
                "flags": list(self.flags),
                "ratio": self.ratio}


def classify(beta, Delta: int, tol: float = 1e-9, zero_tol: float = 1e-5) -> Classification:
    """Label beta for max degree Delta.

    Priority: SPECIAL_EASY_POINT, FPTAS_ZERO_FREE (strictly inside R(eps)),
    HARD (strictly beyond the hardness threshold), else UNRESOLVED.
    Points matching a known partition-function zero get the HARD-BY-ZERO flag.
    """
    if Delta < 3:
        fail("DOMAIN", "Delta must be >= 3")
    eps = epsilon_Delta(Delta)
    ratio = disk_ratio(beta)
    special = _near_special(beta, tol)
    zero_free = in_R_strict(beta, eps, tol)
    hard = hardness_member(beta, Delta, tol)
    witnesses = [("special_point", special), ("R_eps", zero_free), ("hardness", hard),
                 ("R_barvinok", in_R(beta, barvinok_delta(Delta))),
                 ("barvinok_diamond", complex(beta) != 0 and barvinok_barvinok_member(beta, Delta)),
                 ("liu_segment", liu_segment_member(beta, Delta, tol))]
    if special:
        label = "SPECIAL_EASY_POINT"
    elif zero_free:
        label = "FPTAS_ZERO_FREE"
    elif hard:
        label = "HARD"
    else:
        label = "UNRESOLVED"
    flags = []
    if label == "UNRESOLVED" and liu_segment_member(beta, Delta, tol):
        flags.append("FPTAS-REAL-SEGMENT")
    if not special:
        from .gadgets import zero_registry
        for z in zero_registry(Delta):
            if abs(complex(beta) - z) <= zero_tol:
                flags.append("HARD-BY-ZERO")
                break
    return Classification(label, witnesses, flags, float(ratio))


def lemma_regionR_check(delta: float, n_tau: int = 360, n_theta: int = 360,
                        n_inclusion: int = 2000, seed: int = 0, bound_tol: float = 1e-12,
                        half_circle: bool = False, raise_on_fail: bool = True) -> dict:
    """Numerical check of |(e^{i t} - e^{i s}) / (2 + delta (e^{i t} + e^{i s}))| <= 1
    on a grid, plus the inclusions
    [(1-delta)/(1+delta), (1+delta)/(1-delta)] in U_a B(1,delta)/a in R(delta)
    by sampling a, b in B(1, delta) and testing b/a.

    ``half_circle`` restricts both angles to [0, pi] (the rational
    parametrisation t -> (2t, 1-t^2)/(1+t^2) with t in [-1, 1] covers only
    that arc). On the full circle the bound fails: t = pi + x, s = pi - x with
    cos x = delta gives 1/sqrt(1 - delta^2).
    """
    if not 0 < delta < 1:
        fail("DOMAIN", "delta must lie in (0, 1)")
    span = np.pi if half_circle else 2 * np.pi
    t = span * np.arange(n_tau + half_circle) / n_tau
    s = span * np.arange(n_theta + half_circle) / n_theta
    et, es = np.exp(1j * t)[:, None], np.exp(1j * s)[None, :]
    vals = np.abs((et - es) / (2 + delta * (et + es)))
    k = int(np.argmax(vals))
    vmax = float(vals.flat[k])
    i, j = divmod(k, len(s))
    # real interval: x = b/a with a = 2/(1+x), b = 2x/(1+x), both in B(1, delta)
    lo, hi = (1 - delta) / (1 + delta), (1 + delta) / (1 - delta)
    xs = np.linspace(lo, hi, 201)
    a, b = 2 / (1 + xs), 2 * xs / (1 + xs)
    interval_ok = bool(np.all(np.abs(1 - a) <= delta + 1e-12) and np.all(np.abs(1 - b) <= delta + 1e-12))
    rng = np.random.default_rng(seed)
    rad = delta * np.sqrt(rng.random((2, n_inclusion)))
    ang = 2 * np.pi * rng.random((2, n_inclusion))
    pts = 1 + rad * np.exp(1j * ang)
    quot = pts[1] / pts[0]
    ratios = np.abs(quot - 1) / np.abs(quot + 1)
    inclusion_ok = bool(np.all(ratios <= delta + 1e-12))
    out = {"delta": delta, "max_value": vmax, "argmax": [float(t[i]), float(s[j])],
           "grid": [len(t), len(s)], "half_circle": half_circle,
           "bound_ok": vmax <= 1 + bound_tol, "interval_ok": interval_ok,
           "inclusion_ok": inclusion_ok, "max_quotient_ratio": float(ratios.max())}
    out["passed"] = out["bound_ok"] and interval_ok and inclusion_ok
    if raise_on_fail and not out["bound_ok"]:
        fail("CHECK_FAILED", f"bound exceeded at tau={t[i]}, theta={s[j]}", tau=float(t[i]),
             theta=float(s[j]), value=vmax)
    if raise_on_fail and not (interval_ok and inclusion_ok):
        fail("CHECK_FAILED", "inclusion chain failed", interval=interval_ok, inclusion=inclusion_ok)
    return out


def comparison_table(Delta_min: int = 3, Delta_max: int = 20) -> list:
    if not 3 <= Delta_min <= Delta_max:
        fail("DOMAIN", "need 3 <= Delta_min <= Delta_max")
    rows = []
    for D in range(Delta_min, Delta_max + 1):
        e, dd = epsilon_Delta(D), barvinok_delta(D)
        assert e > dd, f"eps <= delta at Delta={D}"
        rows.append({"Delta": D, "epsilon": e, "delta": dd,
                     "epsilon_scaled": e * (D - 1), "delta_scaled": dd * (D - 1)})
    return rows


TABLE_COLUMNS = ("Delta", "epsilon", "delta", "epsilon_scaled", "delta_scaled")


def table_csv(rows) -> str:
    lines = [",".join(TABLE_COLUMNS)]
    for r in rows:
        lines.append(",".join([str(r["Delta"])] + [f"{r[c]:.9f}" for c in TABLE_COLUMNS[1:]]))
    return "\n".join(lines) + "\n"
