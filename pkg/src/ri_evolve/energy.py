"""Non-convex energy derivatives ``e`` and their monotone envelopes.

An :class:`EnergyLandscape` wraps ``e`` (polynomial, breakpoint table or
plain callable) on a finite working bracket.  The bracket stands in for the
real line: ``e`` is assumed coercive, so nothing outside a large enough
bracket influences the dynamics.

Envelopes are built on a grid as running extrema,

    e_m(x) = inf_{y >= x} e(y),      e^m(x) = sup_{y <= x} e(y),

i.e. the largest increasing minorant and the smallest increasing majorant.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize


class OutOfBracket(ValueError):
    pass


class NoPreimage(ValueError):
    pass


def _horner(coeffs: Sequence[float], x):
    """Evaluate ``sum c_k x**k``; works on floats and arrays alike."""
    r = coeffs[-1] + 0.0 * np.asarray(x) if np.ndim(x) else coeffs[-1]
    for c in reversed(coeffs[:-1]):
        r = r * x + c
    return r


def _poly_deriv(coeffs: Sequence[float]) -> tuple[float, ...]:
    d = tuple(k * c for k, c in enumerate(coeffs))[1:]
    return d or (0.0,)


def _poly_integ(coeffs: Sequence[float]) -> tuple[float, ...]:
    return (0.0,) + tuple(c / (k + 1) for k, c in enumerate(coeffs))


@dataclass(frozen=True)
class CriticalPoints:
    local_maxima: list[tuple[float, float]]
    local_minima: list[tuple[float, float]]

    def pairs(self) -> list[tuple[tuple[float, float], tuple[float, float]]]:
        """Adjacent (local max, local min) pairs with the max on the left."""
        out = []
        for xm, em in self.local_maxima:
            right = [p for p in self.local_minima if p[0] > xm]
            if right:
                out.append(((xm, em), min(right)))
        return out


@dataclass(frozen=True)
class EnvelopeTable:
    x: np.ndarray
    e: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def lower_at(self, x):
        return np.interp(x, self.x, self.lower)

    def upper_at(self, x):
        return np.interp(x, self.x, self.upper)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "e", "e_m", "e_upper_m"])
            for row in zip(self.x, self.e, self.lower, self.upper):
                w.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class GapSet:
    upper_gaps: list[tuple[float, float]]
    lower_gaps: list[tuple[float, float]]
    hysteresis_gaps: list[tuple[float, float]]

    def min_width(self) -> Optional[float]:
        widths = [b - a for a, b in self.upper_gaps + self.lower_gaps]
        return min(widths) if widths else None


@dataclass(frozen=True)
class EnergyLandscape:
    """``e`` on a working bracket ``[x_lo, x_hi]``.

    Exactly one representation is set: ``coeffs`` (ascending powers),
    ``table`` (x, e pairs, linear in between, linear extension beyond) or
    ``func`` (vectorized callable; derivative by central differences).
    """

    name: str
    bracket: tuple[float, float]
    coeffs: Optional[tuple[float, ...]] = None
    table: Optional[tuple[tuple[float, ...], tuple[float, ...]]] = None
    func: Optional[Callable] = field(default=None, compare=False)
    scan_points: int = 20001

    def __post_init__(self):
        kinds = sum(v is not None for v in (self.coeffs, self.table, self.func))
        if kinds != 1:
            raise ValueError("exactly one of coeffs, table, func must be given")
        lo, hi = self.bracket
        if not lo < 0 < hi:
            raise ValueError(f"bracket {self.bracket} must contain 0 in its interior")

    @property
    def kind(self) -> str:
        if self.coeffs is not None:
            return "polynomial"
        return "table" if self.table is not None else "callable"

    # -- evaluation ---------------------------------------------------------

    @cached_property
    def _table_arrays(self):
        xs, ys = (np.asarray(v, dtype=float) for v in self.table)
        slopes = np.diff(ys) / np.diff(xs)
        # cumulative integral at the breakpoints, shifted so that E(0) = 0
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs))])
        return xs, ys, slopes, cum

    def e(self, x):
        if self.coeffs is not None:
            return _horner(self.coeffs, x)
        if self.table is not None:
            xs, ys, slopes, _ = self._table_arrays
            out = np.interp(x, xs, ys)
            out = np.where(np.asarray(x) < xs[0], ys[0] + slopes[0] * (np.asarray(x) - xs[0]), out)
            out = np.where(np.asarray(x) > xs[-1], ys[-1] + slopes[-1] * (np.asarray(x) - xs[-1]), out)
            return out if np.ndim(x) else float(out)
        return self.func(x)

    __call__ = e

    @cached_property
    def _d1(self):
        return _poly_deriv(self.coeffs)

    @cached_property
    def _d2_roots(self) -> tuple[float, ...]:
        d2 = _poly_deriv(self._d1)
        if len(d2) <= 1:
            return ()
        roots = np.polynomial.polynomial.polyroots(d2)
        return tuple(float(r.real) for r in roots if abs(r.imag) < 1e-12)

    def de(self, x):
        """Derivative of ``e`` (right derivative at table breakpoints)."""
        if self.coeffs is not None:
            return _horner(self._d1, x)
        if self.table is not None:
            xs, _, slopes, _ = self._table_arrays
            idx = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(slopes) - 1)
            out = slopes[idx]
            return out if np.ndim(x) else float(out)
        h = 1e-6 * (1.0 + np.abs(x))
        return (self.func(x + h) - self.func(x - h)) / (2 * h)

    def antiderivative(self, a):
        """``E(a) = ∫_0^a e``; exact for polynomials and tables."""
        lo, hi = self.bracket
        if np.any(np.asarray(a) < lo) or np.any(np.asarray(a) > hi):
            raise OutOfBracket(f"{a} outside bracket {self.bracket}")
        return self._E(a)

    def _E(self, a):
        if self.coeffs is not None:
            return _horner(self._E_coeffs, a)
        if self.table is not None:
            return self._table_E(a) - self._table_E(0.0)
        if np.ndim(a):
            return np.array([self._E(float(v)) for v in np.ravel(a)]).reshape(np.shape(a))
        val, _ = integrate.quad(self.func, 0.0, float(a), epsabs=0.0, epsrel=1e-12, limit=200)
        return val

    @cached_property
    def _E_coeffs(self):
        return _poly_integ(self.coeffs)

    def _table_E(self, a):
        xs, ys, slopes, cum = self._table_arrays
        a = np.asarray(a, dtype=float)
        idx = np.clip(np.searchsorted(xs, a, side="right") - 1, 0, len(xs) - 2)
        x0 = xs[idx]
        y0 = ys[idx]
        s = slopes[idx]
        d = a - x0
        val = cum[idx] + y0 * d + 0.5 * s * d * d
        return val if val.ndim else float(val)

    def lipschitz(self, a: float, b: float) -> float:
        """Lipschitz constant of ``e`` on ``[a, b]``."""
        if a > b:
            a, b = b, a
        if self.coeffs is not None:
            d1 = self._d1
            best = max(abs(_horner(d1, a)), abs(_horner(d1, b)))
            for r in self._d2_roots:
                if a < r < b:
                    best = max(best, abs(_horner(d1, r)))
            return best
        if self.table is not None:
            xs, _, slopes, _ = self._table_arrays
            i0 = max(int(np.searchsorted(xs, a, side="right")) - 1, 0)
            i1 = min(int(np.searchsorted(xs, b, side="left")), len(slopes))
            return float(np.max(np.abs(slopes[min(i0, len(slopes) - 1):max(i1, i0 + 1)])))
        xs = np.linspace(a, b, 401)
        ys = self.func(xs)
        return float(np.max(np.abs(np.diff(ys) / np.diff(xs)))) * 1.05

    @cached_property
    def lipschitz_on_bracket(self) -> float:
        return self.lipschitz(*self.bracket)

    # -- derived landscapes -------------------------------------------------

    def with_bracket(self, lo: float, hi: float) -> "EnergyLandscape":
        return replace(self, bracket=(float(lo), float(hi)))

    def fit_bracket(self, level_lo: float, level_hi: float, margin: float = 1.0) -> "EnergyLandscape":
        """Widen the bracket until ``e(x_lo) < level_lo - margin`` and
        ``e(x_hi) > level_hi + margin``.  Never shrinks it."""
        lo, hi = self.bracket
        for _ in range(64):
            if self.e(lo) < level_lo - margin:
                break
            lo *= 2.0
        else:
            raise ValueError(f"{self.name}: e is not coercive towards -inf")
        for _ in range(64):
            if self.e(hi) > level_hi + margin:
                break
            hi *= 2.0
        else:
            raise ValueError(f"{self.name}: e is not coercive towards +inf")
        if (lo, hi) == self.bracket:
            return self
        return self.with_bracket(lo, hi)

    def reflected(self) -> "EnergyLandscape":
        """``x -> -e(-x)``, which turns decreasing loadings into increasing ones."""
        lo, hi = self.bracket
        if self.coeffs is not None:
            c = tuple(v if k % 2 == 1 else -v for k, v in enumerate(self.coeffs))
            return replace(self, name=f"{self.name}~", coeffs=c, bracket=(-hi, -lo))
        if self.table is not None:
            xs, ys = self.table
            return replace(
                self, name=f"{self.name}~",
                table=(tuple(-v for v in reversed(xs)), tuple(-v for v in reversed(ys))),
                bracket=(-hi, -lo),
            )
        f = self.func
        return replace(self, name=f"{self.name}~", func=lambda x: -f(-x), bracket=(-hi, -lo))

    # -- analysis -----------------------------------------------------------

    def scan_grid(self, n: Optional[int] = None) -> np.ndarray:
        return np.linspace(self.bracket[0], self.bracket[1], n or self.scan_points)

    @cached_property
    def _critical(self) -> CriticalPoints:
        xs = self.scan_grid()
        d = np.asarray(self.de(xs), dtype=float)
        nz = np.nonzero(d)[0]
        maxima, minima = [], []
        for i, j in zip(nz[:-1], nz[1:]):
            if d[i] * d[j] >= 0:
                continue
            a, b = float(xs[i]), float(xs[j])
            if self.table is not None:
                xb = self._table_arrays[0]
                inside = xb[(xb > a) & (xb <= b)]
                x = float(inside[0]) if inside.size else 0.5 * (a + b)
            else:
                x = optimize.brentq(self.de, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps)
            target = maxima if d[i] > 0 else minima
            target.append((x, float(self.e(x))))
        return CriticalPoints(local_maxima=maxima, local_minima=minima)

    def critical_points(self) -> CriticalPoints:
        return self._critical

    @cached_property
    def _fine(self):
        xs = self.scan_grid(max(self.scan_points, 200001))
        return xs, np.asarray(self.e(xs), dtype=float)

    def preimages(self, y: float) -> list[float]:
        """All ``x`` in the bracket with ``e(x) = y`` (tangential touches included)."""
        xs, es = self._fine
        s = es - y
        roots = [float(x) for x in xs[s == 0.0]]
        for i in np.nonzero(np.sign(s[:-1]) * np.sign(s[1:]) < 0)[0]:
            roots.append(optimize.brentq(lambda x: self.e(x) - y, xs[i], xs[i + 1], xtol=1e-14))
        scale = 1e-10 * (1.0 + abs(y))
        cp = self.critical_points()
        for x, ex in cp.local_maxima + cp.local_minima:
            if abs(ex - y) <= scale:
                roots.append(x)
        roots = sorted(roots)
        merged = []
        for r in roots:
            if not merged or r - merged[-1] > 1e-9:
                merged.append(r)
        if not merged:
            raise NoPreimage(f"{y} is not attained by e on {self.bracket}")
        return merged

    def max_preimage(self, y: float) -> float:
        return self.preimages(y)[-1]

    def min_preimage(self, y: float) -> float:
        return self.preimages(y)[0]

    def monotone_envelopes(self, resolution: int = 100_000) -> EnvelopeTable:
        """Running-extremum envelopes on a uniform grid (critical points added)."""
        if resolution < 2:
            raise ValueError("resolution must be at least 2")
        xs = self.scan_grid(resolution)
        cp = self.critical_points()
        extra = [x for x, _ in cp.local_maxima + cp.local_minima]
        if self.table is not None:
            extra += list(self.table[0])
        if extra:
            xs = np.union1d(xs, extra)
        es = np.asarray(self.e(xs), dtype=float)
        lower = np.minimum.accumulate(es[::-1])[::-1]
        upper = np.maximum.accumulate(es)
        return EnvelopeTable(x=xs, e=es, lower=lower, upper=upper)

    def default_gap_tol(self) -> float:
        _, es = self._fine
        return 1e-9 * (1.0 + float(np.max(np.abs(es))))

    def gap_components(self, resolution: int = 100_000, tol: Optional[float] = None) -> GapSet:
        env = self.monotone_envelopes(resolution)
        tol = self.default_gap_tol() if tol is None else tol
        upper = self._refined_runs(env, env.upper - env.e > tol, env.upper)
        lower = self._refined_runs(env, env.e - env.lower > tol, env.lower)
        hyst = []
        for i0, i1 in _runs(env.upper - env.lower > tol):
            a, b = env.x[i0], env.x[i1]
            inside = [g for g in upper + lower if g[1] > a and g[0] < b]
            if inside:
                hyst.append((min(g[0] for g in inside), max(g[1] for g in inside)))
        return GapSet(upper_gaps=upper, lower_gaps=lower, hysteresis_gaps=hyst)

    def _refined_runs(self, env: EnvelopeTable, mask: np.ndarray, level: np.ndarray):
        out = []
        n = len(env.x)
        for i0, i1 in _runs(mask):
            c = float(level[i0])
            left = self._refine_end(env.x[max(i0 - 1, 0)], env.x[i0], c)
            right = self._refine_end(env.x[i1], env.x[min(i1 + 1, n - 1)], c)
            out.append((left, right))
        return out

    def _refine_end(self, a: float, b: float, c: float) -> float:
        fa, fb = self.e(a) - c, self.e(b) - c
        if fa == 0.0:
            return float(a)
        if fb == 0.0:
            return float(b)
        if fa * fb < 0:
            return optimize.brentq(lambda x: self.e(x) - c, a, b, xtol=1e-14)
        # tangential contact happens at a critical point; the tolerance mask
        # can start a few nodes away from it, so search a small neighbourhood
        cp = self.critical_points()
        reach = 1e-3 * (self.bracket[1] - self.bracket[0])
        near = [
            x for x, ex in cp.local_maxima + cp.local_minima
            if abs(ex - c) <= 1e-8 * (1.0 + abs(c)) and a - reach <= x <= b + reach
        ]
        if near:
            mid = 0.5 * (a + b)
            return float(min(near, key=lambda x: abs(x - mid)))
        return float(a if abs(fa) < abs(fb) else b)

    def validate(self, levels: Optional[tuple[float, float]] = None) -> list[str]:
        """Return violated landscape invariants (empty when all hold)."""
        problems = []
        if abs(self.e(0.0)) > 1e-12:
            problems.append("e(0) != 0")
        xs, es = self._fine
        zero = np.abs(es) <= 1e-12 * (1 + np.max(np.abs(es)))
        if np.any(zero & (np.abs(xs) > 2 * (xs[1] - xs[0]))):
            problems.append("e vanishes away from 0")
        if np.any(np.sign(es[xs > 0]) < 0) or np.any(np.sign(es[xs < 0]) > 0):
            problems.append("e changes sign away from 0")
        if levels is not None:
            lo, hi = levels
            if not self.e(self.bracket[0]) < lo - 1 or not self.e(self.bracket[1]) > hi + 1:
                problems.append("bracket too narrow for the loading levels")
        return problems


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive index ranges of consecutive True entries."""
    if not mask.any():
        return []
    padded = np.concatenate([[False], mask, [False]]).astype(np.int8)
    d = np.diff(padded)
    starts = np.nonzero(d == 1)[0]
    ends = np.nonzero(d == -1)[0] - 1
    return list(zip(starts.tolist(), ends.tolist()))


# -- constructors ----------------------------------------------------------

CUBIC_PAPER = (0.0, 5.5, -4.5, 1.0)


def cubic_paper(bracket=(-1.0, 4.0)) -> EnergyLandscape:
    """e(x) = x^3 - 9/2 x^2 + 11/2 x."""
    return EnergyLandscape(name="cubic_paper", bracket=tuple(bracket), coeffs=CUBIC_PAPER)


def polynomial(coeffs: Sequence[float], bracket=(-1.0, 1.0), name="polynomial") -> EnergyLandscape:
    """Polynomial ``e`` from ascending coefficients ``[c0, c1, ...]``."""
    c = tuple(float(v) for v in coeffs)
    while len(c) > 1 and c[-1] == 0.0:
        c = c[:-1]
    land = EnergyLandscape(name=name, bracket=tuple(bracket), coeffs=c)
    return land.fit_bracket(-1.0, 1.0)


def linear(slope: float = 1.0, bracket=(-4.0, 6.0)) -> EnergyLandscape:
    return EnergyLandscape(name="linear", bracket=tuple(bracket), coeffs=(0.0, float(slope)))


def from_table(xs: Sequence[float], es: Sequence[float], name="table") -> EnergyLandscape:
    xs = tuple(float(v) for v in xs)
    es = tuple(float(v) for v in es)
    if len(xs) != len(es) or len(xs) < 2 or any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("table needs >= 2 strictly increasing abscissae")
    return EnergyLandscape(name=name, bracket=(xs[0], xs[-1]), table=(xs, es))


def energy_from_spec(spec) -> EnergyLandscape:
    """Resolve a config value.

    Accepted forms: ``"cubic_paper"``, ``"linear"``, a list of ascending
    polynomial coefficients, ``{"poly": [...]}``, ``{"table": [[x, e], ...]}``
    or a string ``"poly:c0,c1,..."``.
    """
    if isinstance(spec, str):
        if spec == "cubic_paper":
            return cubic_paper()
        if spec == "linear":
            return linear()
        if spec.startswith("poly:"):
            return polynomial([float(v) for v in spec[5:].split(",")])
        raise ValueError(f"unknown energy {spec!r}")
    if isinstance(spec, dict):
        if "poly" in spec:
            return polynomial(spec["poly"])
        if "table" in spec:
            rows = np.asarray(spec["table"], dtype=float)
            return from_table(rows[:, 0], rows[:, 1])
        raise ValueError(f"energy mapping needs 'poly' or 'table', got {sorted(spec)}")
    if isinstance(spec, (list, tuple)):
        return polynomial(spec)
    raise ValueError(f"cannot interpret energy spec {spec!r}")


def energy_to_spec(land: EnergyLandscape):
    if land.name in ("cubic_paper", "linear") and land.coeffs is not None:
        return land.name
    if land.coeffs is not None:
        return {"poly": list(land.coeffs)}
    if land.table is not None:
        return {"table": [list(r) for r in zip(*land.table)]}
    raise ValueError("callable energies cannot be serialized")


def paper_critical_values() -> dict[str, float]:
    """Closed forms for the cubic: extremal points and values."""
    s = math.sqrt(5.0 / 3.0)
    r15 = math.sqrt(15.0)
    return {
        "x_max": 1.5 - 0.5 * s,
        "x_min": 1.5 + 0.5 * s,
        "e_max": (54.0 + 5.0 * r15) / 36.0,
        "e_min": (54.0 - 5.0 * r15) / 36.0,
    }
