"""Explicit finite differences for doubly nonlinear inclusions ``S(u_t) + G ∋ f``.

Spatial operators are evaluated explicitly; the set-valued rate law is solved
pointwise through the viscous resolvent ``scale·S(a) + reg_eps·a ∋ g``, which
selects finite transition speeds.  Scenarios:

* ``sticktion_heat``   S = sticktion,  g = f + Δu
* ``nonconvex_cubed``  S = ∂R,         g = f - max(-Δu, 0) - u³  (unit disk)
* ``levelset_mcf``     S = ∂R scaled by |∇u|, g = f - u + |∇u| div(∇u/|∇u|)
"""

from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from .dissipation import DissipationMap, resolvent_gain, scaled_resolvent, sign_subdifferential, sticktion
from .ode_evolution import GuardViolated, Trajectory

log = logging.getLogger(__name__)

KINDS = ("sticktion_heat", "nonconvex_cubed", "levelset_mcf")


@dataclass(frozen=True)
class Grid:
    dim: int
    dx: float
    shape: tuple[int, ...]
    origin: tuple[float, ...]

    def __post_init__(self):
        if self.dim not in (1, 2) or len(self.shape) != self.dim or len(self.origin) != self.dim:
            raise ValueError("dim must be 1 or 2 with matching shape and origin")
        if not self.dx > 0 or min(self.shape) < 3:
            raise ValueError("dx must be positive and every axis needs >= 3 nodes")

    @classmethod
    def square(cls, lo: float, hi: float, n: int, dim: int = 2) -> "Grid":
        return cls(dim, (hi - lo) / (n - 1), (n,) * dim, (lo,) * dim)

    def axes(self) -> list[np.ndarray]:
        return [o + self.dx * np.arange(n) for o, n in zip(self.origin, self.shape)]

    def coords(self) -> tuple[np.ndarray, ...]:
        return self._coords

    @cached_property
    def _coords(self) -> tuple[np.ndarray, ...]:
        out = tuple(np.meshgrid(*self.axes(), indexing="ij"))
        for c in out:
            c.flags.writeable = False
        return out

    def frame(self) -> np.ndarray:
        m = np.zeros(self.shape, dtype=bool)
        if self.dim == 1:
            m[[0, -1]] = True
        else:
            m[[0, -1], :] = True
            m[:, [0, -1]] = True
        return m


@dataclass
class Field:
    """Nodal values with a Dirichlet mask; masked nodes keep ``trace``."""

    grid: Grid
    values: np.ndarray
    fixed: Optional[np.ndarray] = None
    trace: Optional[np.ndarray] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")
        if self.fixed is None:
            self.fixed = self.grid.frame()
        if self.trace is None:
            self.trace = np.where(self.fixed, self.values, 0.0)

    def with_values(self, values: np.ndarray) -> "Field":
        values = np.where(self.fixed, self.trace, values)
        return Field(self.grid, values, self.fixed, self.trace)

    def to_csv(self, path) -> None:
        cols = ["x", "y"][: self.grid.dim] + ["u"]
        xs = [c.ravel() for c in self.grid.coords()]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for row in zip(*xs, self.values.ravel()):
                w.writerow([repr(float(v)) for v in row])


# -- stencils ----------------------------------------------------------------------


def laplacian(field: Field) -> Field:
    """Central second differences on interior nodes; boundary nodes set to 0."""
    u, dx = field.values, field.grid.dx
    out = np.zeros_like(u)
    if field.grid.dim == 1:
        out[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / dx**2
    else:
        out[1:-1, 1:-1] = (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4 * u[1:-1, 1:-1]) / dx**2
    return Field(field.grid, out, field.fixed, np.zeros_like(u))


def _curvature_interior(u: np.ndarray, dx: float, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Interior ``(grad_norm, kappa_term)`` with few temporaries (hot loop)."""
    E, W, N, S = u[2:, 1:-1], u[:-2, 1:-1], u[1:-1, 2:], u[1:-1, :-2]
    c2 = 2.0 * u[1:-1, 1:-1]
    ux = E - W
    ux *= 1.0 / (2 * dx)
    uy = N - S
    uy *= 1.0 / (2 * dx)
    uxx = E + W
    uxx -= c2
    uyy = N + S
    uyy -= c2
    uxy = u[2:, 2:] - u[2:, :-2]
    uxy -= u[:-2, 2:]
    uxy += u[:-2, :-2]
    uxy *= 0.25
    s2 = sigma * sigma
    ux2 = ux * ux
    ux2 += s2
    uy2 = uy * uy
    uy2 += s2
    q = ux2 + uy2
    q -= s2
    num = uxx * uy2
    num += uyy * ux2
    ux *= uy
    ux *= uxy
    ux *= 2.0
    num -= ux
    num *= 1.0 / dx**2
    with np.errstate(invalid="ignore", divide="ignore"):
        kt = np.divide(num, q, out=np.zeros_like(num), where=q > 0)
    return np.sqrt(q), kt


def mean_curvature_terms(field: Field, sigma: float) -> tuple[Field, Field]:
    """``(sqrt(|∇u|²+σ²), |∇u| div(∇u/|∇u|))`` on interior nodes.

    The curvature term uses the expanded form
    ``(uxx (uy²+σ²) - 2 ux uy uxy + uyy (ux²+σ²)) / (|∇u|² + σ²)``.
    """
    if field.grid.dim != 2:
        raise ValueError("mean curvature terms need a 2D grid")
    u = field.values
    gn = np.zeros_like(u)
    kt = np.zeros_like(u)
    gn[1:-1, 1:-1], kt[1:-1, 1:-1] = _curvature_interior(u, field.grid.dx, sigma)
    zero = np.zeros_like(u)
    return Field(field.grid, gn, field.fixed, zero), Field(field.grid, kt, field.fixed, zero)


# -- scenarios ---------------------------------------------------------------------


Forcing = Callable[[tuple, float], np.ndarray]


def zero_forcing(X: tuple, t: float):
    return 0.0


@dataclass
class PDEScenario:
    kind: str
    dissipation: DissipationMap
    forcing: Forcing = zero_forcing
    reg_eps: float = 1e-3
    sigma: Optional[float] = None
    dt: Optional[float] = None
    u_bound: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.reg_eps > 0:
            raise ValueError("reg_eps must be positive")
        if self.sigma is not None and self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    @classmethod
    def sticktion_heat(cls, forcing: Forcing = zero_forcing, reg_eps: float = 1e-3, **kw) -> "PDEScenario":
        return cls("sticktion_heat", sticktion(), forcing, reg_eps, **kw)

    @classmethod
    def nonconvex_cubed(cls, forcing: Forcing = zero_forcing, reg_eps: float = 1e-3, **kw) -> "PDEScenario":
        return cls("nonconvex_cubed", sign_subdifferential(), forcing, reg_eps, **kw)

    @classmethod
    def levelset_mcf(cls, forcing: Forcing = zero_forcing, reg_eps: float = 1e-3, **kw) -> "PDEScenario":
        return cls("levelset_mcf", sign_subdifferential(), forcing, reg_eps, **kw)

    def sigma_for(self, grid: Grid) -> float:
        return 1e-6 * grid.dx if self.sigma is None else self.sigma


def stable_dt(scenario: PDEScenario, grid: Grid, u_max: float = 1.0) -> float:
    """Largest explicit step keeping the update monotone.

    ``dt <= 1 / (gain * (2 dim / dx² + c0))`` with ``gain`` the Lipschitz
    constant of the resolvent in ``g`` and ``c0`` the zero-order coefficient.
    """
    gain = resolvent_gain(scenario.dissipation, scenario.reg_eps)
    c0 = {"sticktion_heat": 0.0, "nonconvex_cubed": 3.0 * u_max**2, "levelset_mcf": 1.0}[scenario.kind]
    return 1.0 / (gain * (2.0 * grid.dim / grid.dx**2 + c0))


def _u_bound(scenario: PDEScenario, field: Field, T: float) -> float:
    if scenario.u_bound is not None:
        return scenario.u_bound
    f_abs = float(np.max(np.abs(scenario.forcing(field.grid.coords(), 0.0)))) if T >= 0 else 0.0
    return max(float(np.max(np.abs(field.values))), (1.0 + f_abs) ** (1.0 / 3.0)) + 1.0


def rate(scenario: PDEScenario, field: Field, t: float) -> np.ndarray:
    """Nodal rate ``a`` solving the regularized pointwise inclusion."""
    u = field.values
    f = np.broadcast_to(np.asarray(scenario.forcing(field.grid.coords(), t), dtype=float), u.shape)
    if scenario.kind == "levelset_mcf":
        gn, kt = _curvature_interior(u, field.grid.dx, scenario.sigma_for(field.grid))
        kt -= u[1:-1, 1:-1]
        kt += f[1:-1, 1:-1]
        a = np.zeros_like(u)
        a[1:-1, 1:-1] = scaled_resolvent(scenario.dissipation, scenario.reg_eps, kt, gn)
        return a
    lap = laplacian(field).values
    if scenario.kind == "sticktion_heat":
        g = f + lap
    else:
        g = f - np.maximum(-lap, 0.0) - u**3
    return scaled_resolvent(scenario.dissipation, scenario.reg_eps, g)


def pde_step(scenario: PDEScenario, field: Field, t: float, dt: Optional[float] = None) -> Field:
    """One explicit step ``u + dt·a`` with Dirichlet data reapplied."""
    dt = scenario.dt if dt is None else dt
    if dt is None:
        raise ValueError("dt must be set on the scenario or passed explicitly")
    limit = stable_dt(scenario, field.grid, _u_bound(scenario, field, t))
    if dt > limit * (1 + 1e-9):
        raise GuardViolated(f"dt={dt:g} exceeds the stability limit {limit:g}")
    a = rate(scenario, field, t)
    return field.with_values(field.values + dt * a)


@dataclass
class PDERun:
    times: list[float]
    snapshots: list[Field]
    dt: float
    steps: int

    def write(self, outdir) -> list[str]:
        os.makedirs(outdir, exist_ok=True)
        paths = []
        for i, (t, fld) in enumerate(zip(self.times, self.snapshots)):
            p = os.path.join(outdir, f"snapshot_{i:04d}.csv")
            fld.to_csv(p)
            paths.append(p)
        return paths


def run_pde(scenario: PDEScenario, u0: Field, T: float, snapshots: int = 10,
            dt: Optional[float] = None) -> PDERun:
    """March to ``T``; ``snapshots`` evenly spaced fields (plus ``t=0``) are kept.

    ``dt=None`` uses ``scenario.dt`` or, failing that, 0.9 times the
    stability limit.
    """
    ub = _u_bound(scenario, u0, T)
    limit = stable_dt(scenario, u0.grid, ub)
    dt = dt if dt is not None else (scenario.dt if scenario.dt is not None else 0.9 * limit)
    if dt > limit * (1 + 1e-9):
        raise GuardViolated(f"dt={dt:g} exceeds the stability limit {limit:g}")
    n = max(1, int(math.ceil(T / dt - 1e-9)))
    dt = T / n
    marks = set(np.unique(np.round(np.linspace(0, n, snapshots + 1)).astype(int)).tolist())
    fld = u0.with_values(u0.values)
    times, snaps = [0.0], [fld]
    for k in range(1, n + 1):
        t = (k - 1) * dt
        fld = fld.with_values(fld.values + dt * rate(scenario, fld, t))
        if k in marks:
            times.append(k * dt)
            snaps.append(fld)
    log.info("%s: %d steps of dt=%.3g", scenario.kind, n, dt)
    return PDERun(times, snaps, dt, n)


# -- radial mean curvature flow -------------------------------------------------------


@dataclass
class RadialResult:
    trajectory: Trajectory
    classification: str
    hit_time: Optional[float]


def radial_mcf_run(n: int, r0: float, reg_eps: float = 1e-3, dt: Optional[float] = None,
                   T: Optional[float] = None, r_floor: float = 1e-3) -> RadialResult:
    """Radius of a sphere under the regularized rate-independent flow.

    ``r' = -soft((n-1)/r, 1) / reg_eps``: the sphere is stable while
    ``(n-1)/r <= 1`` and shrinks otherwise until ``r_floor``.
    """
    if n < 2 or not r0 > 0:
        raise ValueError("need n >= 2 and r0 > 0")
    T = 5.0 * reg_eps if T is None else T
    dt = 1e-3 * reg_eps if dt is None else dt
    steps = max(1, int(math.ceil(T / dt - 1e-9)))
    dt = T / steps
    r = float(r0)
    times, radii = [0.0], [r]
    hit = None
    for k in range(1, steps + 1):
        drive = (n - 1) / r - 1.0
        if drive > 0:
            r = max(r - dt * drive / reg_eps, r_floor)
        times.append(k * dt)
        radii.append(r)
        if r <= r_floor:
            hit = k * dt
            break
    cls = "collapse" if hit is not None else ("stationary" if radii[-1] == r0 else "shrinking")
    traj = Trajectory(times, radii, np.zeros(len(times)), "mcf_radial",
                      params={"n": n, "r0": r0, "reg_eps": reg_eps, "dt": dt, "r_floor": r_floor})
    return RadialResult(traj, cls, hit)


def zero_set_radius(field: Field) -> float:
    """Radius of the disk ``{u < 0}`` from a smeared area estimate."""
    u, dx = field.values, field.grid.dx
    gn, _ = mean_curvature_terms(field, 1e-12)
    g = np.maximum(gn.values, 1e-12)
    frac = np.clip(0.5 - u / (g * dx), 0.0, 1.0)
    frac = np.where(field.fixed, (u < 0).astype(float), frac)
    return math.sqrt(float(frac.sum()) * dx * dx / math.pi)


def disk_field(grid: Grid, r0: float) -> Field:
    X, Y = grid.coords()
    return Field(grid, X**2 + Y**2 - r0**2)


def unit_disk_field(grid: Grid) -> Field:
    """Zero field with every node outside the open unit disk held at 0."""
    X, Y = grid.coords()
    fixed = (X**2 + Y**2 >= 1.0) | grid.frame()
    return Field(grid, np.zeros(grid.shape), fixed, np.zeros(grid.shape))


def scenario_from_name(kind: str, forcing: Forcing = zero_forcing, reg_eps: float = 1e-3,
                       sigma: Optional[float] = None) -> PDEScenario:
    if kind == "sticktion_heat":
        return PDEScenario.sticktion_heat(forcing, reg_eps, sigma=sigma)
    if kind == "nonconvex_cubed":
        return PDEScenario.nonconvex_cubed(forcing, reg_eps, sigma=sigma)
    if kind == "levelset_mcf":
        return PDEScenario.levelset_mcf(forcing, reg_eps, sigma=sigma)
    raise ValueError(f"unknown scenario {kind!r}")
