"""Scalar rate-independent evolution ``∂R(u') + e(u) ∋ f``.

Two constructive schemes are provided:

* vanishing viscosity: implicit Euler for ``eps u' + ∂R(u') + e(u) ∋ f``
  under a step-size guard that makes every step a strictly monotone scalar
  root problem, followed by the pointwise extremum over a decreasing
  sequence of ``eps``;
* minimizing movements: ``q_k`` = largest minimizer of
  ``Φ(q) = E(q) - f(t_k) q + |q - q_{k-1}|``.

Helpers predict jump levels from the critical values of ``e`` and detect
realized jumps in discrete trajectories.
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .energy import EnergyLandscape, NoPreimage

log = logging.getLogger(__name__)


class GuardViolated(RuntimeError):
    pass


class BracketTooSmall(RuntimeError):
    pass


# -- loading ----------------------------------------------------------------


@dataclass(frozen=True)
class Loading:
    """Piecewise-linear loading through ``(t, f)`` breakpoints."""

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.values) or len(t) < 2:
            raise ValueError("loading needs >= 2 breakpoints of matching length")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("loading times must start at 0 and increase strictly")

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "Loading":
        return cls(tuple(float(p[0]) for p in pairs), tuple(float(p[1]) for p in pairs))

    @classmethod
    def paper(cls) -> "Loading":
        """t on [0,4], 8 - t on [4,10], t - 12 on [10,16]."""
        return cls((0.0, 4.0, 10.0, 16.0), (0.0, 4.0, -2.0, 4.0))

    @classmethod
    def ramp(cls, T: float, slope: float = 1.0, f0: float = 0.0) -> "Loading":
        return cls((0.0, float(T)), (float(f0), float(f0 + slope * T)))

    @classmethod
    def constant(cls, T: float, value: float = 0.0) -> "Loading":
        return cls((0.0, float(T)), (float(value), float(value)))

    @property
    def T(self) -> float:
        return self.times[-1]

    def __call__(self, t):
        return np.interp(t, self.times, self.values)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.times)

    @property
    def value_range(self) -> tuple[float, float]:
        return min(self.values), max(self.values)

    def restrict(self, t0: float, t1: float) -> "Loading":
        """Sub-loading on ``[t0, t1]`` shifted to start at time 0."""
        inner = [(t, v) for t, v in zip(self.times, self.values) if t0 < t < t1]
        pts = [(t0, float(self(t0)))] + inner + [(t1, float(self(t1)))]
        return Loading.from_pairs([(t - t0, v) for t, v in pts])

    def segments(self) -> list[tuple[float, float, int]]:
        """Maximal monotone pieces as ``(t_start, t_end, direction)``."""
        out: list[list] = []
        for (a, b), s in zip(zip(self.times, self.times[1:]), self.slopes):
            d = int(np.sign(s))
            if out and out[-1][2] == d:
                out[-1][1] = b
            else:
                out.append([a, b, d])
        return [tuple(s) for s in out]

    def direction_at(self, t) -> np.ndarray:
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.slopes) - 1)
        return np.sign(self.slopes)[idx]

    def crossings(self, level: float, t0: float = 0.0, t1: Optional[float] = None) -> list[float]:
        """Times in ``[t0, t1]`` at which ``f`` passes through ``level``."""
        t1 = self.T if t1 is None else t1
        out = []
        for (ta, tb), (fa, fb) in zip(zip(self.times, self.times[1:]), zip(self.values, self.values[1:])):
            if fa == fb or not (min(fa, fb) <= level <= max(fa, fb)):
                continue
            t = ta + (level - fa) * (tb - ta) / (fb - fa)
            if t0 <= t <= t1 and (not out or abs(t - out[-1]) > 1e-12):
                out.append(t)
        return out

    def check_initial(self) -> bool:
        ok = abs(self.values[0]) <= 1.0
        if not ok:
            warnings.warn(f"|f(0)| = {abs(self.values[0])} exceeds 1; u(0)=0 is not an equilibrium")
        return ok


def loading_from_spec(spec) -> Loading:
    """``"paper_f"``, ``"ramp:T"``, ``"ramp:T:slope"``, ``"const:T:value"``,
    ``{"breakpoints": [[t, f], ...]}`` or a bare list of pairs."""
    if isinstance(spec, Loading):
        return spec
    if isinstance(spec, str):
        if spec == "paper_f":
            return Loading.paper()
        head, _, rest = spec.partition(":")
        args = [float(v) for v in rest.split(":") if v]
        if head == "ramp" and 1 <= len(args) <= 2:
            return Loading.ramp(*args)
        if head == "const" and 1 <= len(args) <= 2:
            return Loading.constant(*args)
        raise ValueError(f"unknown loading {spec!r}")
    if isinstance(spec, dict) and "breakpoints" in spec:
        return Loading.from_pairs(spec["breakpoints"])
    if isinstance(spec, (list, tuple)):
        return Loading.from_pairs(spec)
    raise ValueError(f"cannot interpret loading spec {spec!r}")


def loading_to_spec(loading: Loading):
    if loading == Loading.paper():
        return "paper_f"
    return {"breakpoints": [[t, v] for t, v in zip(loading.times, loading.values)]}


# -- trajectories -------------------------------------------------------------


@dataclass(frozen=True)
class Jump:
    t: float
    f: float
    u_before: float
    u_after: float

    @property
    def direction(self) -> int:
        return 1 if self.u_after > self.u_before else -1


@dataclass
class Trajectory:
    times: np.ndarray
    values: np.ndarray
    forcing: np.ndarray
    scheme: str
    params: dict = field(default_factory=dict)
    eps: Optional[float] = None
    jumps: list[Jump] = field(default_factory=list)
    members: list[tuple[float, "Trajectory"]] = field(default_factory=list)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.forcing = np.asarray(self.forcing, dtype=float)
        if not (len(self.times) == len(self.values) == len(self.forcing)):
            raise ValueError("times, values and forcing must have equal length")

    def __len__(self) -> int:
        return len(self.times)

    def left_constant(self, t) -> np.ndarray:
        """Value of the piecewise-constant interpolant ``u(t) = u_{k-1}`` on ``[t_{k-1}, t_k)``."""
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 1)
        return self.values[idx]

    def window(self, t0: float, t1: float) -> "Trajectory":
        m = (self.times >= t0 - 1e-12) & (self.times <= t1 + 1e-12)
        return Trajectory(self.times[m], self.values[m], self.forcing[m], self.scheme,
                          dict(self.params), self.eps,
                          [j for j in self.jumps if t0 <= j.t <= t1])

    def to_csv(self, path) -> None:
        eps = "" if self.eps is None else repr(float(self.eps))
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "f", "u", "scheme", "eps"])
            for t, f, u in zip(self.times, self.forcing, self.values):
                w.writerow([repr(float(t)), repr(float(f)), repr(float(u)), self.scheme, eps])

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ValueError(f"{path}: empty trajectory")
        eps = rows[0].get("eps") or None
        return cls(
            times=[float(r["t"]) for r in rows],
            values=[float(r["u"]) for r in rows],
            forcing=[float(r["f"]) for r in rows],
            scheme=rows[0]["scheme"],
            eps=None if eps is None else float(eps),
        )


# -- jump detection -------------------------------------------------------------


@dataclass(frozen=True)
class JumpRule:
    """A step is part of a jump if its increment exceeds ``factor`` times the
    median nonzero increment; a merged run of such steps counts as a jump when
    its total increment exceeds ``gap_fraction`` of the smallest gap width."""

    factor: float = 10.0
    gap_fraction: float = 0.1


def detect_jumps(times, values, forcing, gap_width: Optional[float], rule: JumpRule = JumpRule()) -> list[Jump]:
    values = np.asarray(values, dtype=float)
    inc = np.diff(values)
    mag = np.abs(inc)
    nonzero = mag[mag > 0]
    if nonzero.size == 0:
        return []
    threshold = rule.factor * float(np.median(nonzero))
    min_total = 0.0 if gap_width is None else rule.gap_fraction * gap_width
    flagged = mag > threshold
    jumps = []
    i, n = 0, len(inc)
    while i < n:
        if not flagged[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and flagged[j + 1] and np.sign(inc[j + 1]) == np.sign(inc[i]):
            j += 1
        total = values[j + 1] - values[i]
        if abs(total) > min_total:
            k = i + int(np.argmax(mag[i:j + 1]))
            jumps.append(Jump(t=float(times[k + 1]), f=float(forcing[k + 1]),
                              u_before=float(values[i]), u_after=float(values[j + 1])))
        i = j + 1
    return jumps


def _gap_width(land: EnergyLandscape) -> Optional[float]:
    return land.gap_components(resolution=20001).min_width()


# -- vanishing viscosity --------------------------------------------------------


@dataclass
class VVParams:
    eps: float
    h: Optional[float] = None
    root_tol: float = 1e-12
    eps_sequence: tuple[float, ...] = ()
    jump_rule: JumpRule = field(default_factory=JumpRule)

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.h is not None and not self.h > 0:
            raise ValueError("h must be positive")
        seq = tuple(self.eps_sequence)
        if any(b >= a for a, b in zip(seq, seq[1:])):
            raise ValueError("eps_sequence must be strictly decreasing")


def guard_radius(land: EnergyLandscape, f_val: float, u: float, eps: float, h: float, s_max: float = 1.0) -> float:
    return h * (abs(f_val) + s_max + abs(land.e(u))) / eps + 1.0


def state_range(land: EnergyLandscape, loading: Loading, u0: float = 0.0, s_max: float = 1.0) -> tuple[float, float]:
    """Interval that contains every state reachable under ``loading``."""
    f_lo, f_hi = loading.value_range
    try:
        lo = land.min_preimage(f_lo - s_max)
        hi = land.max_preimage(f_hi + s_max)
    except NoPreimage as exc:
        raise BracketTooSmall(str(exc)) from exc
    return min(lo, u0), max(hi, u0)


def guarded_h(land: EnergyLandscape, loading: Loading, eps: float, u0: float = 0.0, s_max: float = 1.0) -> float:
    """Largest step for which the per-step guard holds along the whole run."""
    land = land.fit_bracket(*loading.value_range)
    lo, hi = state_range(land, loading, u0, s_max)
    f_abs = max(abs(v) for v in loading.values)
    e_abs = float(np.max(np.abs(land.e(np.linspace(lo, hi, 2001)))))
    h = eps / (2.0 * land.lipschitz(lo - 1.0, hi + 1.0))
    for _ in range(50):
        s = h * (f_abs + s_max + e_abs) / eps + 1.0
        h_new = eps / (2.0 * land.lipschitz(lo - s, hi + s))
        if h_new >= h * (1 - 1e-12):
            break
        h = h_new
    return 0.999 * h


def viscous_step(land: EnergyLandscape, f_val: float, u_prev: float, eps: float, h: float,
                 root_tol: float = 1e-12) -> float:
    """One implicit Euler step: find ``δ`` with ``(eps/h) δ + ∂R(δ) + e(u+δ) ∋ f``."""
    s = guard_radius(land, f_val, u_prev, eps, h)
    L = land.lipschitz(u_prev - s, u_prev + s)
    if h > eps / (2.0 * L) * (1.0 + 1e-12):
        raise GuardViolated(f"h={h:g} exceeds eps/(2L)={eps / (2 * L):g} at u={u_prev:g}")
    e = land.e
    g0 = f_val - e(u_prev)
    if -1.0 <= g0 <= 1.0:
        return u_prev
    sgn = 1.0 if g0 > 0 else -1.0
    k = eps / h
    target = f_val - sgn

    def phi(d):
        return k * d + e(u_prev + d) - target

    # phi is increasing with slope >= k/2 on the guard interval
    lo, hi = 0.0, sgn * 2.0 * abs(phi(0.0)) / k
    if abs(hi) > s:
        hi = sgn * s
    if sgn < 0:
        lo, hi = hi, lo
    p_lo, p_hi = phi(lo), phi(hi)
    if p_lo > 0 or p_hi < 0:
        raise GuardViolated(f"no sign change in [{lo:g}, {hi:g}] at u={u_prev:g}")
    de = land.de
    d = 0.5 * (lo + hi)
    for _ in range(200):
        p = phi(d)
        if p > 0:
            hi = d
        else:
            lo = d
        d_new = d - p / (k + de(u_prev + d))
        if not lo < d_new < hi:
            d_new = 0.5 * (lo + hi)
        if abs(d_new - d) <= root_tol or hi - lo <= root_tol:
            d = d_new
            break
        d = d_new
    return u_prev + d


def run_viscous(land: EnergyLandscape, loading: Loading, params: VVParams, u0: float = 0.0) -> Trajectory:
    loading.check_initial()
    land = land.fit_bracket(*loading.value_range)
    h_max = params.h if params.h is not None else guarded_h(land, loading, params.eps, u0)
    n = max(1, int(math.ceil(loading.T / h_max - 1e-9)))
    times = np.linspace(0.0, loading.T, n + 1)
    h = loading.T / n
    forcing = loading(times)
    values = np.empty(n + 1)
    values[0] = u = float(u0)
    eps, tol = params.eps, params.root_tol
    for i in range(1, n + 1):
        u = viscous_step(land, float(forcing[i]), u, eps, h, tol)
        values[i] = u
    log.info("vv eps=%g: %d steps of h=%.3g", eps, n, h)
    traj = Trajectory(times, values, forcing, "vv", params={"eps": eps, "h": h, "root_tol": tol}, eps=eps)
    traj.jumps = detect_jumps(times, values, forcing, _gap_width(land), params.jump_rule)
    return traj


def vanishing_viscosity_limit(land: EnergyLandscape, loading: Loading, eps_sequence: Sequence[float],
                              u0: float = 0.0, h: Optional[float] = None, root_tol: float = 1e-12,
                              jump_rule: JumpRule = JumpRule()) -> Trajectory:
    """Pointwise extremum over ``u_eps``: the supremum on increasing pieces of
    ``f`` and the infimum on decreasing ones (mirror image of the same rule).

    All runs share one step size (the smallest guarded one) unless ``h`` is
    given, so the members live on a common grid.
    """
    seq = tuple(float(v) for v in eps_sequence)
    if not seq or any(b >= a for a, b in zip(seq, seq[1:])):
        raise ValueError("eps_sequence must be non-empty and strictly decreasing")
    land = land.fit_bracket(*loading.value_range)
    if h is None:
        h = min(guarded_h(land, loading, e, u0) for e in seq)
    members = [(e, run_viscous(land, loading, VVParams(e, h, root_tol, jump_rule=jump_rule), u0)) for e in seq]
    grid = min((m for _, m in members), key=len).times
    stack = np.array([m.left_constant(grid) for _, m in members])
    direction = loading.direction_at(grid)
    values = np.where(direction < 0, stack.min(axis=0), stack.max(axis=0))
    values = np.where(direction == 0, stack[-1], values)
    forcing = loading(grid)
    traj = Trajectory(grid, values, forcing, "vv_limit",
                      params={"eps_sequence": list(seq), "h": h, "root_tol": root_tol}, eps=seq[-1])
    traj.members = members
    traj.jumps = detect_jumps(grid, values, forcing, _gap_width(land), jump_rule)
    return traj


# -- minimizing movements ----------------------------------------------------------


@dataclass
class MMParams:
    """``selection="global"`` takes the largest global minimizer of Φ.

    ``selection="extremal"`` keeps a stable state and otherwise moves to the
    farthest local minimizer in the direction of motion; this is the rule
    under which the jump levels ``e(x_min)+1`` / ``e(x_max)-1`` appear.
    """

    partition: np.ndarray
    scan_points: int = 20001
    tie_tol: float = 1e-9
    selection: str = "global"
    jump_rule: JumpRule = field(default_factory=JumpRule)

    def __post_init__(self):
        p = np.asarray(self.partition, dtype=float)
        if p.ndim != 1 or len(p) < 2 or p[0] != 0.0 or np.any(np.diff(p) <= 0):
            raise ValueError("partition must increase strictly from 0")
        self.partition = p
        if self.selection not in ("global", "extremal"):
            raise ValueError(f"selection must be 'global' or 'extremal', got {self.selection!r}")
        if self.scan_points < 3:
            raise ValueError("scan_points must be >= 3")

    @classmethod
    def uniform(cls, T: float, N: int, **kw) -> "MMParams":
        return cls(np.linspace(0.0, T, int(N) + 1), **kw)

    @property
    def N(self) -> int:
        return len(self.partition) - 1


class _Scan:
    """Precomputed scan of ``e`` on the bracket, shared by all steps of a run."""

    def __init__(self, land: EnergyLandscape, n: int):
        self.land = land
        self.x = land.scan_grid(n)
        self.e = np.asarray(land.e(self.x), dtype=float)

    def phi(self, q, f_val, q_prev):
        return self.land._E(q) - f_val * q + abs(q - q_prev)

    def _crossings(self, x: np.ndarray, ex: np.ndarray, level: float) -> list[float]:
        d = ex - level
        idx = np.nonzero((d[:-1] < 0) & (d[1:] >= 0))[0]
        out = []
        e = self.land.e
        for i in idx:
            if d[i + 1] == 0.0:
                out.append(float(x[i + 1]))
            else:
                out.append(optimize.brentq(lambda q: e(q) - level, x[i], x[i + 1], xtol=1e-15, rtol=1e-15))
        return out

    def candidates(self, f_val: float, q_prev: float) -> tuple[bool, list[float], list[float]]:
        e_prev = float(self.land.e(q_prev))
        slack = 1e-13 * (1.0 + abs(f_val))
        stable = -1.0 - slack <= f_val - e_prev <= 1.0 + slack
        right = self.x > q_prev
        xr = np.concatenate([[q_prev], self.x[right]])
        er = np.concatenate([[e_prev], self.e[right]])
        left = self.x < q_prev
        xl = np.concatenate([self.x[left], [q_prev]])
        el = np.concatenate([self.e[left], [e_prev]])
        # interior local minima of Φ: upward zero crossings of the one-sided derivative
        up = [q for q in self._crossings(xr, er, f_val - 1.0) if q > q_prev]
        down = [q for q in self._crossings(xl, el, f_val + 1.0) if q < q_prev]
        return stable, up, down


def mm_step(land: EnergyLandscape, f_val: float, q_prev: float, params: MMParams,
            scan: Optional[_Scan] = None) -> float:
    """``q`` = largest minimizer of ``E(q) - f q + |q - q_prev|`` (see :class:`MMParams`)."""
    scan = scan or _Scan(land, params.scan_points)
    lo, hi = land.bracket
    phi_prev = scan.phi(q_prev, f_val, q_prev)
    if not (scan.phi(lo, f_val, q_prev) > phi_prev and scan.phi(hi, f_val, q_prev) > phi_prev):
        raise BracketTooSmall(f"Φ not coercive on bracket {land.bracket} at f={f_val:g}")
    stable, up, down = scan.candidates(f_val, q_prev)
    if params.selection == "extremal":
        if stable:
            return q_prev
        if up:
            return max(up)
        if down:
            return min(down)
        raise BracketTooSmall(f"no minimizer found in {land.bracket} at f={f_val:g}")
    cands = ([q_prev] if stable else []) + up + down
    if not cands:
        raise BracketTooSmall(f"no minimizer found in {land.bracket} at f={f_val:g}")
    vals = [scan.phi(q, f_val, q_prev) for q in cands]
    vmin = min(vals)
    cut = vmin + params.tie_tol * (1.0 + abs(vmin))
    return max(q for q, v in zip(cands, vals) if v <= cut)


def run_minimizing_movements(land: EnergyLandscape, loading: Loading, params: MMParams, q0: float = 0.0) -> Trajectory:
    loading.check_initial()
    if abs(params.partition[-1] - loading.T) > 1e-12 * max(1.0, loading.T):
        raise ValueError(f"partition ends at {params.partition[-1]}, loading at {loading.T}")
    land = land.fit_bracket(*loading.value_range)
    scan = _Scan(land, params.scan_points)
    times = params.partition
    forcing = loading(times)
    values = np.empty(len(times))
    values[0] = q = float(q0)
    widenings = 0
    k = 1
    while k < len(times):
        try:
            q = mm_step(land, float(forcing[k]), values[k - 1], params, scan)
        except BracketTooSmall:
            # a large load step can make Φ tilt past a bracket end; widen and redo the step
            if widenings >= 10:
                raise
            widenings += 1
            lo, hi = land.bracket
            land = land.with_bracket(lo - (hi - lo) / 2, hi + (hi - lo) / 2)
            scan = _Scan(land, params.scan_points)
            log.info("mm: bracket widened to %s", land.bracket)
            continue
        values[k] = q
        k += 1
    traj = Trajectory(times, values, forcing, "mm",
                      params={"N": params.N, "scan_points": params.scan_points,
                              "tie_tol": params.tie_tol, "selection": params.selection})
    traj.jumps = detect_jumps(times, values, forcing, _gap_width(land), params.jump_rule)
    return traj


# -- jump prediction ---------------------------------------------------------------


@dataclass(frozen=True)
class JumpPrediction:
    t: float
    f_level: float
    scheme: str
    direction: int
    extrapolated: bool = False


def maxwell_level(land: EnergyLandscape, x_max: float, x_min: float) -> Optional[float]:
    """Equal-area level ``c`` between a local max and the next local min:
    the outermost preimages ``a < b`` of ``c`` satisfy ``E(b) - E(a) = c (b - a)``."""
    e_hi, e_lo = land.e(x_max), land.e(x_min)

    def outer(c):
        roots = land.preimages(c)
        a = max((r for r in roots if r <= x_max), default=None)
        b = min((r for r in roots if r >= x_min), default=None)
        return a, b

    def balance(c):
        a, b = outer(c)
        return land._E(b) - land._E(a) - c * (b - a)

    span = e_hi - e_lo
    lo, hi = e_lo + 1e-9 * span, e_hi - 1e-9 * span
    try:
        if balance(lo) * balance(hi) > 0:
            return None
        return optimize.brentq(balance, lo, hi, xtol=1e-13)
    except (NoPreimage, TypeError):
        return None


def predict_jumps(land: EnergyLandscape, loading: Loading, energetic: bool = False) -> list[JumpPrediction]:
    """Jump levels and crossing times from the critical values of ``e``.

    ``vv`` and ``mm`` use the one-sided stability limits (``e(max)+1`` up,
    ``e(min)-1`` down for vv; ``e(min)+1`` up, ``e(max)-1`` down for mm).
    With ``energetic=True`` the equal-area levels ``c±1`` are added under
    the tag ``mm_global``.  With several wells every pair is listed and the
    entries are marked as extrapolated.
    """
    land = land.fit_bracket(*loading.value_range)
    pairs = land.critical_points().pairs()
    multi = len(pairs) > 1
    levels: list[tuple[str, int, float]] = []
    for (x_m, e_max), (x_n, e_min) in pairs:
        levels += [("vv", 1, e_max + 1.0), ("vv", -1, e_min - 1.0),
                   ("mm", 1, e_min + 1.0), ("mm", -1, e_max - 1.0)]
        if energetic:
            c = maxwell_level(land, x_m, x_n)
            if c is not None:
                levels += [("mm_global", 1, c + 1.0), ("mm_global", -1, c - 1.0)]
    out = []
    for t0, t1, d in loading.segments():
        if d == 0:
            continue
        for scheme, direction, level in levels:
            if direction != d:
                continue
            for t in loading.crossings(level, t0, t1):
                out.append(JumpPrediction(t, level, scheme, d, multi))
    return sorted(out, key=lambda p: (p.t, p.scheme))


# -- hysteresis --------------------------------------------------------------------


@dataclass
class JumpMatch:
    prediction: JumpPrediction
    realized: Optional[Jump]

    @property
    def f_error(self) -> float:
        return math.inf if self.realized is None else abs(self.realized.f - self.prediction.f_level)


@dataclass
class HysteresisReport:
    vis: Trajectory
    mm: Trajectory
    predictions: list[JumpPrediction]
    matches: dict[str, list[JumpMatch]]
    tables: dict[str, tuple[list[str], np.ndarray]]
    safety_ok: bool

    def write(self, outdir, svg: bool = True) -> list[str]:
        from .io import write_svg_polyline, write_table
        import os

        os.makedirs(outdir, exist_ok=True)
        paths = []
        for name, (cols, data) in self.tables.items():
            p = os.path.join(outdir, f"{name}.csv")
            write_table(p, cols, data)
            paths.append(p)
            if svg:
                p = os.path.join(outdir, f"{name}.svg")
                write_svg_polyline(p, data[:, 0], data[:, 1], cols[0], cols[1])
                paths.append(p)
        return paths


def match_jumps(jumps: Sequence[Jump], predictions: Sequence[JumpPrediction], scheme: str) -> list[JumpMatch]:
    """Pair every prediction of ``scheme`` with the realized jump of the same
    direction closest in time."""
    out = []
    for p in predictions:
        if p.scheme != scheme:
            continue
        same = [j for j in jumps if j.direction == p.direction]
        best = min(same, key=lambda j: abs(j.t - p.t), default=None)
        out.append(JumpMatch(p, best))
    return out


def loop_area(f: np.ndarray, u: np.ndarray) -> float:
    """Shoelace area enclosed by the closed polygon ``(f, u)``."""
    f = np.asarray(f, dtype=float)
    u = np.asarray(u, dtype=float)
    return 0.5 * abs(float(np.dot(f, np.roll(u, -1)) - np.dot(u, np.roll(f, -1))))


def safety_interval(land: EnergyLandscape) -> Optional[tuple[float, float]]:
    gaps = land.gap_components(resolution=20001).hysteresis_gaps
    if not gaps:
        return None
    vals = land.e(np.array([g for gap in gaps for g in gap]))
    return float(np.min(vals)) - 1.0, float(np.max(vals)) + 1.0


def run_hysteresis(land: EnergyLandscape, loading: Loading, vv: VVParams, mm: MMParams) -> HysteresisReport:
    land = land.fit_bracket(*loading.value_range)
    safe = safety_interval(land)
    turning = list(loading.values[1:-1])
    safety_ok = safe is None or all(not (safe[0] <= v <= safe[1]) for v in turning)
    if not safety_ok:
        warnings.warn(f"loading turns inside the safety interval {safe}")
    vis = run_viscous(land, loading, vv)
    qmm = run_minimizing_movements(land, loading, mm)
    preds = predict_jumps(land, loading, energetic=True)
    matches = {s: match_jumps(tr.jumps, preds, s)
               for s, tr in (("vv", vis), ("mm", qmm), ("mm_global", qmm))}
    lo, hi = state_range(land, loading)
    xs = np.linspace(lo, hi, 1001)
    stride = max(1, len(vis) // 20000)
    tables = {
        "e_graph": (["x", "e"], np.column_stack([xs, land.e(xs)])),
        "f_graph": (["t", "f"], np.column_stack([np.asarray(loading.times), np.asarray(loading.values)])),
        "vis_loop": (["f", "u_vis"], np.column_stack([vis.forcing[::stride], vis.values[::stride]])),
        "mm_loop": (["f", "u_mm"], np.column_stack([qmm.forcing, qmm.values])),
    }
    return HysteresisReport(vis, qmm, preds, matches, tables, safety_ok)


def params_dict(p) -> dict:
    d = asdict(p)
    if "partition" in d:
        d["partition"] = {"T": float(p.partition[-1]), "N": p.N}
    return d
