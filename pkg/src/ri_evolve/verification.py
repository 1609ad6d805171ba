"""Discrete checks of the structural properties of solver output.

Every check is a pure function returning a :class:`CheckReport`; a report
passes iff its worst violation is within its tolerance.  Results on
decreasing pieces of the loading are obtained by reflection
(``u -> -u``, ``e(x) -> -e(-x)``, ``f -> -f``), which maps them onto the
increasing case.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .dissipation import DissipationMap, eval_map
from .energy import EnergyLandscape
from .ode_evolution import JumpRule, Loading, Trajectory, detect_jumps


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    worst: float
    where: Optional[float]
    tol: float
    detail: str = ""

    def record(self) -> dict:
        d = asdict(self)
        d["check"] = d.pop("name")
        d["pass"] = d.pop("passed")
        return d

    def __str__(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        where = "" if self.where is None else f" at {self.where:.6g}"
        return f"[{flag}] {self.name}: worst={self.worst:.3g}{where} (tol {self.tol:.3g}) {self.detail}".rstrip()


def _report(name: str, viol: np.ndarray, where: np.ndarray, tol: float, detail: str = "") -> CheckReport:
    viol = np.asarray(viol, dtype=float)
    if viol.size == 0:
        return CheckReport(name, True, 0.0, None, tol, detail or "no samples")
    i = int(np.argmax(viol))
    worst = float(viol[i])
    return CheckReport(name, worst <= tol, worst, float(np.asarray(where)[i]), tol, detail)


# -- reflection ------------------------------------------------------------------


def reflect_trajectory(traj: Trajectory) -> Trajectory:
    return Trajectory(traj.times, -traj.values, -traj.forcing, traj.scheme, dict(traj.params), traj.eps)


def segment_views(traj: Trajectory, land: EnergyLandscape, loading: Loading):
    """Yield ``(label, trajectory, landscape)`` per monotone piece, reflected
    onto the increasing case.  Each piece includes its starting sample."""
    refl = land.reflected()
    for i, (t0, t1, d) in enumerate(loading.segments()):
        if d == 0:
            continue
        part = traj.window(t0, t1)
        if len(part) < 2:
            continue
        if d > 0:
            yield f"segment {i} (+)", part, land
        else:
            yield f"segment {i} (-)", reflect_trajectory(part), refl


# -- minimizing movements -----------------------------------------------------------


def check_mm_optimality(traj: Trajectory, land: EnergyLandscape, loading: Optional[Loading] = None,
                        tol: float = 1e-7) -> CheckReport:
    """Stick steps need ``|f - e(q)| <= 1``; moving steps need
    ``e(q) + sgn(q - q_prev) = f``."""
    q = traj.values
    f = traj.forcing[1:]
    dq = np.diff(q)
    eq = np.asarray(land.e(q[1:]), dtype=float)
    viol = np.where(dq == 0, np.maximum(np.abs(f - eq) - 1.0, 0.0), np.abs(eq + np.sign(dq) - f))
    return _report("mm_optimality", viol, traj.times[1:], tol)


def check_stick(traj: Trajectory, loading: Optional[Loading] = None, tol: float = 1e-12,
                land: Optional[EnergyLandscape] = None) -> CheckReport:
    """From a start at rest, the state does not move while ``f - e(q_0) <= 1``.

    With ``q_0 = 0`` and ``e(0) = 0`` this is ``q_k = 0`` while ``f(t_k) <= 1``.
    The window ends at the first sample where the threshold is exceeded.
    """
    q0 = traj.values[0]
    e0 = 0.0 if land is None else float(land.e(q0))
    if land is None and q0 != 0.0:
        raise ValueError("pass the landscape when the start state is not 0")
    over = np.nonzero(traj.forcing - e0 > 1.0)[0]
    end = over[0] if over.size else len(traj)
    viol = np.abs(traj.values[:end] - q0)
    return _report("stick", viol, traj.times[:end], tol, f"{end} samples in stick window")


def check_monotone(traj: Trajectory, tol: float = 0.0) -> CheckReport:
    viol = np.maximum(-np.diff(traj.values), 0.0)
    return _report("monotone", viol, traj.times[1:], tol)


def lower_envelope_at(land: EnergyLandscape, q: np.ndarray, resolution: int = 100_000) -> np.ndarray:
    """``e_m(q) = min(e(q), e_m(next grid node))``; exact up to the grid variation of ``e``."""
    env = land.monotone_envelopes(resolution)
    q = np.asarray(q, dtype=float)
    idx = np.clip(np.searchsorted(env.x, q, side="right"), 0, len(env.x) - 1)
    return np.minimum(np.asarray(land.e(q), dtype=float), env.lower[idx])


def check_envelope(traj: Trajectory, land: EnergyLandscape, tol: float = 1e-6,
                   resolution: int = 100_000) -> CheckReport:
    """``|e(q) - e_m(q)|`` along the trajectory."""
    e = np.asarray(land.e(traj.values), dtype=float)
    viol = np.abs(e - lower_envelope_at(land, traj.values, resolution))
    return _report("on_lower_envelope", viol, traj.times, tol)


def mm_lemma_suite(traj: Trajectory, land: EnergyLandscape, loading: Loading,
                   tol_opt: float = 1e-7, tol_stick: float = 1e-12, tol_env: float = 1e-6) -> list[CheckReport]:
    """Optimality, stick, monotonicity and lower-envelope checks per monotone
    piece of the loading (decreasing pieces reflected)."""
    land = land.fit_bracket(*loading.value_range)
    reports = [check_mm_optimality(traj, land, loading, tol_opt)]
    for label, part, seg_land in segment_views(traj, land, loading):
        for r in (check_stick(part, tol=tol_stick, land=seg_land),
                  check_monotone(part),
                  check_envelope(part, seg_land, tol_env)):
            reports.append(CheckReport(f"{r.name} {label}", r.passed, r.worst, r.where, r.tol, r.detail))
    return reports


# -- vanishing viscosity ---------------------------------------------------------------


def check_monotone_in_eps(trajs: Sequence[tuple[float, Trajectory]], tol: float) -> CheckReport:
    """``u_eps <= u_eps' + tol`` whenever ``eps >= eps'`` (common grid = coarsest)."""
    pairs = sorted(trajs, key=lambda p: -p[0])
    if len(pairs) < 2:
        return CheckReport("monotone_in_eps", True, 0.0, None, tol, "fewer than two runs")
    grid = min((tr for _, tr in pairs), key=len).times
    vals = [tr.left_constant(grid) for _, tr in pairs]
    worst, where = -math.inf, None
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if pairs[i][0] < pairs[j][0]:
                continue
            d = vals[i] - vals[j]
            k = int(np.argmax(d))
            if d[k] > worst:
                worst, where = float(d[k]), float(grid[k])
    worst = max(worst, 0.0)
    return CheckReport("monotone_in_eps", worst <= tol, worst, where, tol)


def check_gap_avoidance(traj: Trajectory, gaps: Sequence[tuple[float, float]], margin: float,
                        max_violation_fraction: float) -> CheckReport:
    """Fraction of samples deeper than ``margin`` inside one of ``gaps``."""
    u = traj.values
    inside = np.zeros(len(u), dtype=bool)
    for a, b in gaps:
        inside |= (u > a + margin) & (u < b - margin)
    frac = float(inside.mean()) if len(u) else 0.0
    where = float(traj.times[np.argmax(inside)]) if inside.any() else None
    return CheckReport("gap_avoidance", frac <= max_violation_fraction, frac, where,
                       max_violation_fraction, f"{int(inside.sum())}/{len(u)} samples inside")


def check_ordering(u_vis: Trajectory, u_mm: Trajectory, tol: float) -> CheckReport:
    """``u_vis <= u_mm + tol`` on the coarser of the two grids."""
    grid = min((u_vis, u_mm), key=len).times
    d = u_vis.left_constant(grid) - u_mm.left_constant(grid)
    return _report("ordering", np.maximum(d, 0.0), grid, tol)


def check_discrete_inclusion(traj: Trajectory, smap: DissipationMap, land: EnergyLandscape,
                             loading: Optional[Loading] = None, tol: float = 1e-7,
                             slack: Optional[float] = None) -> CheckReport:
    """Per step, ``S(a_k) ∋ f_k - e(u_k) - eps a_k`` with the forward difference
    rate ``a_k`` (``eps = 0`` for rate-independent trajectories).

    ``slack`` defaults to ``L h`` (``L`` = Lipschitz constant of ``e`` on the
    bracket); the residual is evaluated at the new state, so for the implicit
    schemes in this package it is exact up to the root tolerance.
    """
    t, u, f = traj.times, traj.values, traj.forcing
    h = np.diff(t)
    a = np.diff(u) / h
    eps = traj.eps if traj.scheme in ("vv",) and traj.eps is not None else 0.0
    g = f[1:] - np.asarray(land.e(u[1:]), dtype=float) - eps * a
    if slack is None:
        slack = land.lipschitz_on_bracket * float(np.max(h)) if traj.scheme == "vv_limit" else 0.0
    viol = np.array([eval_map(smap, float(ai)).distance(float(gi)) for ai, gi in zip(a, g)])
    return _report("discrete_inclusion", viol, t[1:], tol + slack)


def realized_jumps(traj: Trajectory, land: EnergyLandscape, rule: JumpRule = JumpRule()):
    return detect_jumps(traj.times, traj.values, traj.forcing,
                        land.gap_components(resolution=20001).min_width(), rule)


# -- fields -----------------------------------------------------------------------------


def check_barriers(values, lower, upper, tol: float, where=None, name: str = "barriers") -> CheckReport:
    """``lower - tol <= values <= upper + tol`` elementwise."""
    v = np.asarray(values, dtype=float)
    lo = np.broadcast_to(np.asarray(lower, dtype=float), v.shape)
    hi = np.broadcast_to(np.asarray(upper, dtype=float), v.shape)
    viol = np.maximum(np.maximum(lo - v, v - hi), 0.0).ravel()
    where = np.arange(viol.size) if where is None else np.broadcast_to(np.asarray(where, dtype=float), v.shape).ravel()
    return _report(name, viol, where, tol)


def summarize(reports: Sequence[CheckReport]) -> bool:
    return all(r.passed for r in reports)
