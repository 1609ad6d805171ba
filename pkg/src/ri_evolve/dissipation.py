"""Set-valued dissipation maps S : R -> closed intervals.

Two built-ins are provided: the subdifferential of the absolute value
(``sign_subdifferential``) and the static/dry/viscous friction law
(``sticktion``).  User maps are breakpoint tables with linearly
interpolated endpoints.

The pointwise regularized inclusion ``eps * a + S(a) ∋ g`` is solved by
:func:`viscous_resolvent`.  When ``g`` already lies in ``S(0)`` the rate 0
is returned even if a sliding solution exists as well (stick priority).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np


class NoSolution(ValueError):
    """No rate satisfies the regularized inclusion inside the search bracket."""


@dataclass(frozen=True)
class IntervalValue:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def is_singleton(self) -> bool:
        return self.lo == self.hi

    def contains(self, g: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= g <= self.hi + tol

    def distance(self, g: float) -> float:
        return max(self.lo - g, g - self.hi, 0.0)


@dataclass(frozen=True)
class DissipationMap:
    """A set-valued map with one closed interval per rate.

    ``monotone_decreasing`` records condition S1 in the sign convention
    where the map enters the equation as ``-S``: the flag is set when
    ``sup S(b) <= inf S(a)`` for all ``a > b``.
    """

    name: str
    eval_rule: Callable[[float], tuple[float, float]]
    s_max: float
    monotone_decreasing: bool
    # vectorized closed-form resolvent (eps, g ndarray) -> rates, when known
    closed_resolvent: Optional[Callable[[float, np.ndarray], np.ndarray]] = field(
        default=None, compare=False, repr=False
    )
    # breakpoint table, kept for serialization of user maps
    table: Optional[tuple[tuple[float, float, float], ...]] = field(
        default=None, compare=False, repr=False
    )

    def __call__(self, a: float) -> IntervalValue:
        return eval_map(self, a)


def eval_map(smap: DissipationMap, a: float) -> IntervalValue:
    lo, hi = smap.eval_rule(float(a))
    return IntervalValue(lo, hi)


def contains(smap: DissipationMap, a: float, g: float, tol: float = 0.0) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return eval_map(smap, a).contains(g, tol)


def soft_threshold(g, threshold):
    """Elementwise ``sign(g) * max(|g| - threshold, 0)``."""
    return np.sign(g) * np.maximum(np.abs(g) - threshold, 0.0)


# -- built-ins -------------------------------------------------------------

def _sign_rule(a: float) -> tuple[float, float]:
    if a == 0.0:
        return (-1.0, 1.0)
    s = 1.0 if a > 0 else -1.0
    return (s, s)


def _sign_resolvent(eps: float, g: np.ndarray) -> np.ndarray:
    return soft_threshold(g, 1.0) / eps


def sign_subdifferential() -> DissipationMap:
    """∂|·|: [-1, 1] at zero and sgn(a) elsewhere."""
    return DissipationMap(
        name="sign_subdifferential",
        eval_rule=_sign_rule,
        s_max=1.0,
        monotone_decreasing=True,
        closed_resolvent=_sign_resolvent,
    )


def _sticktion_rule(a: float) -> tuple[float, float]:
    if a == 0.0:
        return (-2.0, 2.0)
    v = math.copysign(1.0, a) + a
    return (v, v)


def _sticktion_resolvent(eps: float, g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    slide = (g - np.sign(g)) / (1.0 + eps)
    return np.where(np.abs(g) <= 2.0, 0.0, slide)


def sticktion() -> DissipationMap:
    """F(0) = [-2, 2], F(a) = {sgn(a) + a}.  Unbounded, hence s_max = inf."""
    return DissipationMap(
        name="sticktion",
        eval_rule=_sticktion_rule,
        s_max=math.inf,
        monotone_decreasing=False,
        closed_resolvent=_sticktion_resolvent,
    )


def constant_map(lo: float, hi: float, name: str = "constant") -> DissipationMap:
    """a -> [lo, hi] for every a."""
    IntervalValue(lo, hi)
    return DissipationMap(
        name=name,
        eval_rule=lambda a: (lo, hi),
        s_max=float(max(abs(lo), abs(hi))),
        # a constant interval is S1-monotone only when it is a single point
        monotone_decreasing=lo == hi,
    )


def table_map(rows: Sequence[Sequence[float]], name: str = "table") -> DissipationMap:
    """User map from rows ``(a, lo, hi)`` with strictly increasing ``a``.

    Endpoints are interpolated linearly between breakpoints and held
    constant beyond the first and last breakpoint.
    """
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3 or len(arr) < 1:
        raise ValueError("table rows must be (a, lo, hi) triples")
    a_pts, lo_pts, hi_pts = arr.T
    if np.any(np.diff(a_pts) <= 0):
        raise ValueError("table abscissae must be strictly increasing")
    if np.any(lo_pts > hi_pts):
        raise ValueError("table has lo > hi")

    def rule(a: float) -> tuple[float, float]:
        return (float(np.interp(a, a_pts, lo_pts)), float(np.interp(a, a_pts, hi_pts)))

    # S1 holds iff every breakpoint value is a singleton and the values increase
    monotone = bool(np.all(lo_pts == hi_pts) and np.all(np.diff(lo_pts) >= 0))
    return DissipationMap(
        name=name,
        eval_rule=rule,
        s_max=float(np.max(np.abs(arr[:, 1:]))),
        monotone_decreasing=monotone,
        table=tuple(tuple(map(float, r)) for r in arr),
    )


BUILTIN_MAPS = {
    "sign_subdifferential": sign_subdifferential,
    "sticktion": sticktion,
}


def map_from_spec(spec) -> DissipationMap:
    """Resolve a config value: a built-in name or a list of (a, lo, hi) rows."""
    if isinstance(spec, str):
        try:
            return BUILTIN_MAPS[spec]()
        except KeyError:
            raise ValueError(f"unknown dissipation map {spec!r}") from None
    return table_map(spec)


# -- resolvent -------------------------------------------------------------

def _classify(smap: DissipationMap, eps: float, g: float, a: float) -> int:
    """-1 if eps*a + S(a) lies below g, +1 if above, 0 if it contains g."""
    lo, hi = smap.eval_rule(a)
    if eps * a + hi < g:
        return -1
    if eps * a + lo > g:
        return 1
    return 0


def _bracket_resolvent(smap: DissipationMap, eps: float, g: float, scan_points: int = 4001) -> float:
    s_bound = smap.s_max if math.isfinite(smap.s_max) else 0.0
    half = (abs(g) + s_bound) / eps + 1.0
    grid = np.linspace(-half, half, scan_points)
    cls = np.array([_classify(smap, eps, g, a) for a in grid])
    roots = [float(a) for a, c in zip(grid, cls) if c == 0]
    for i in np.nonzero(cls[:-1] * cls[1:] < 0)[0]:
        a, b = float(grid[i]), float(grid[i + 1])
        ca = int(cls[i])
        # bisect down to adjacent floats so that a jump in S is told apart
        # from a steep but continuous branch
        for _ in range(200):
            m = 0.5 * (a + b)
            if not a < m < b:
                break
            cm = _classify(smap, eps, g, m)
            if cm == 0:
                a = b = m
                break
            if cm == ca:
                a = m
            else:
                b = m
        resid = min(eval_map(smap, x).distance(g - eps * x) for x in (a, b))
        if resid <= 1e-9 * (1.0 + abs(g)):
            roots.append(a if a == b else 0.5 * (a + b))
    if not roots:
        raise NoSolution(f"{smap.name}: no rate solves eps*a + S(a) ∋ {g} (eps={eps})")
    # nearest-to-zero root, ties resolved toward the positive rate
    return min(roots, key=lambda r: (abs(r), -r))


def viscous_resolvent(smap: DissipationMap, eps: float, g: float) -> float:
    """Rate ``a`` with ``g - eps * a ∈ S(a)``; 0 whenever ``g ∈ S(0)``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if smap.closed_resolvent is not None:
        return float(smap.closed_resolvent(eps, np.asarray(float(g))))
    if contains(smap, 0.0, g):
        return 0.0
    return _bracket_resolvent(smap, eps, float(g))


def scaled_resolvent(smap: DissipationMap, eps: float, g, scale=1.0) -> np.ndarray:
    """Vectorized rates for ``scale * S(a) + eps * a ∋ g`` with ``scale >= 0``.

    For positive scale this is ``viscous_resolvent(eps / scale, g / scale)``;
    where the scale vanishes the inclusion degenerates to ``eps * a = g``.
    """
    g = np.asarray(g, dtype=float)
    scale = np.broadcast_to(np.asarray(scale, dtype=float), g.shape)
    if smap.name == "sign_subdifferential":
        return soft_threshold(g, scale) / eps
    if smap.closed_resolvent is not None and np.all(scale == 1.0):
        return smap.closed_resolvent(eps, g)
    out = np.empty(g.size)
    for i, (gi, si) in enumerate(zip(g.ravel(), scale.ravel())):
        out[i] = viscous_resolvent(smap, eps / si, gi / si) if si > 0 else gi / eps
    return out.reshape(g.shape)


def resolvent_gain(smap: DissipationMap, eps: float) -> float:
    """Upper bound on the slope d(rate)/dg of the resolvent on sliding branches."""
    if smap.name == "sticktion":
        return 1.0 / (1.0 + eps)
    return 1.0 / eps


# -- structural conditions -------------------------------------------------

@dataclass
class ConditionReport:
    s1: bool
    s2: bool
    c3: bool
    c1_proxy: bool
    c2_proxy: bool
    s_max: float
    observed_max: float
    notes: list[str] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return self.s1 and self.s2 and self.c3 and self.c1_proxy and self.c2_proxy


def _interval_gap(x: tuple[float, float], y: tuple[float, float]) -> float:
    return max(0.0, y[0] - x[1], x[0] - y[1])


def check_conditions(
    smap: DissipationMap,
    sample_grid: Sequence[float],
    tol: float = 1e-6,
    refinements: int = 30,
) -> ConditionReport:
    """Check S1, S2, C3 and grid proxies of C1/C2 on ``sample_grid``.

    The C1/C2 proxies approach every grid point from both sides along the
    geometric sequence ``a ± step * 2**-k`` and test whether the endpoint
    values at the finest offset lie within ``tol`` of ``S(a)`` (C1, closed
    graph) and whether nearby values admit close selections (C2).  This is
    necessary evidence only; C2 proper asks for paired selections.
    """
    grid = np.asarray(sample_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("sample_grid must be nonempty")
    if np.any(np.diff(grid) < 0):
        raise ValueError("sample_grid must be sorted")
    vals = [smap.eval_rule(float(a)) for a in grid]
    lo = np.array([v[0] for v in vals])
    hi = np.array([v[1] for v in vals])

    c3 = bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))
    observed = float(np.max(np.maximum(np.abs(lo), np.abs(hi))))
    s2 = bool(math.isfinite(smap.s_max) and observed <= smap.s_max + tol)

    # S1 in the -S convention: for a > b, sup S(b) <= inf S(a) (+ tol)
    running_sup = np.maximum.accumulate(hi)
    s1 = bool(np.all(running_sup[:-1] <= lo[1:] + tol)) if grid.size > 1 else True

    step = float(np.min(np.diff(grid))) if grid.size > 1 else 1.0
    delta = step * 2.0 ** (-refinements)
    c1 = c2 = True
    for a, here in zip(grid, vals):
        for side in (-1.0, 1.0):
            near = smap.eval_rule(float(a + side * delta))
            for endpoint in near:
                if IntervalValue(*here).distance(endpoint) > tol:
                    c1 = False
            if _interval_gap(here, near) > tol:
                c2 = False

    notes = ["C1/C2 are checked through one-sided refinement proxies, not proven"]
    if not math.isfinite(smap.s_max):
        notes.append("map is unbounded (S2 fails by construction)")
    return ConditionReport(
        s1=s1, s2=s2, c3=c3, c1_proxy=c1, c2_proxy=c2,
        s_max=smap.s_max, observed_max=observed, notes=notes,
    )
