"""Seminorm scans over geometric epsilon grids and power-law fits.

A scan records one seminorm of ``T_eps w`` (or of a residual such as
``T_eps w - w``) for each ``eps``; :func:`fit_slope` fits
``log value = slope * log eps + intercept``, so ``slope = s`` reads as
``O(eps^s)``.  :func:`classify` turns fits into moderate / negligible
verdicts.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InsufficientDataError, ParameterError, ResolutionError
from .manifold import SpectralCoefficients, next_pow2, sobolev_norm
from .regularizer import RegularizationProcess, regularize
from .zoo import TestDistribution

FLOOR = 1e-12
#: rounding level relative to the operands of a difference
REL_FLOOR = 1e-13
DEFAULT_SEMINORMS = ("L2", "H1", "H2", "sup", "sup_d1", "sup_d2", "sup_d3", "sup_d4")
MAX_GRID = 1 << 22


def geometric_grid(start: float = 2**-4, ratio: float = 0.5, count: int = 9) -> np.ndarray:
    """``start * ratio^j`` for ``j = 0 .. count-1``."""
    if not 0 < start <= 1:
        raise ParameterError("epsilon grid must start in (0, 1]")
    if not 0.25 <= ratio <= 0.75:
        raise ParameterError("epsilon ratio must lie in [1/4, 3/4]")
    if count < 2:
        raise ParameterError("epsilon grid needs at least two points")
    return start * ratio ** np.arange(count)


def dyadic_grid(j_min: int = 4, j_max: int = 12, per_octave: int = 1) -> np.ndarray:
    """``2^(-j)`` for ``j`` from ``j_min`` to ``j_max`` in steps of ``1/per_octave``."""
    count = (j_max - j_min) * per_octave + 1
    return geometric_grid(2.0**-j_min, 2.0 ** (-1.0 / per_octave), count)


@dataclass(frozen=True)
class EpsilonScan:
    process: str
    distribution: str
    seminorm: str
    eps: np.ndarray
    values: np.ndarray
    scale: np.ndarray | None = None

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if eps.shape != vals.shape or eps.ndim != 1:
            raise ParameterError("eps and values must be 1D arrays of equal length")
        if np.any(eps <= 0) or np.any(eps > 1) or np.any(np.diff(eps) >= 0):
            raise ParameterError("eps must be strictly decreasing within (0, 1]")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ParameterError("scan values must be finite and non-negative")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "values", vals)
        if self.scale is not None:
            object.__setattr__(self, "scale", np.asarray(self.scale, dtype=float))

    def floor(self, floor: float = FLOOR, rel_floor: float = REL_FLOOR) -> np.ndarray:
        """Per-point floor: ``max(floor, rel_floor * scale)``.

        ``scale`` holds the size of the operands for residual and difference
        scans, whose values cannot drop below rounding of those operands.
        """
        out = np.full(self.values.shape, float(floor))
        if self.scale is not None:
            out = np.maximum(out, rel_floor * self.scale)
        return out

    def scaled(self, factor: float) -> "EpsilonScan":
        return EpsilonScan(self.process, self.distribution, self.seminorm, self.eps,
                           self.values * factor,
                           None if self.scale is None else self.scale * abs(factor))

    def rows(self):
        return [(float(e), float(v)) for e, v in zip(self.eps, self.values)]


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r2: float
    max_residual: float
    window: tuple
    n_points: int
    floor_dominated: bool = False

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "max_residual": self.max_residual,
            "window": list(self.window),
            "n_points": self.n_points,
            "floor_dominated": self.floor_dominated,
        }


# -- seminorms ---------------------------------------------------------------
def parse_seminorm(name: str) -> tuple:
    """``"L2"`` -> ("H", 0), ``"H1.5"`` -> ("H", 1.5), ``"sup"`` -> ("sup", 0), ``"sup_d2"`` -> ("sup", 2)."""
    if name == "L2":
        return ("H", 0.0)
    if name == "sup":
        return ("sup", 0)
    m = re.fullmatch(r"H(-?\d+(?:\.\d+)?)", name)
    if m:
        return ("H", float(m.group(1)))
    m = re.fullmatch(r"sup_d(\d+)", name)
    if m:
        return ("sup", int(m.group(1)))
    raise ParameterError(f"unknown seminorm {name!r}")


def sup_grid(c: SpectralCoefficients, resolve: float | None, oversample: int = 16) -> tuple:
    """Grid for sup evaluation: ``oversample`` points per ``2 pi / resolve`` length."""
    M = c.manifold
    n = []
    for K, L in zip(c.k_max, M.side_lengths):
        target = 2 * K + 1
        if K == 0:
            # constant along this direction
            n.append(1)
            continue
        if resolve is not None:
            target = max(target, int(math.ceil(oversample * resolve * L / (2 * math.pi))))
        n.append(next_pow2(target))
    while np.prod(n) > MAX_GRID and max(n) > 1:
        i = int(np.argmax(n))
        if n[i] // 2 < 2 * c.k_max[i] + 1:
            break
        n[i] //= 2
    if np.prod(n) > MAX_GRID:
        raise ResolutionError(f"sup grid {tuple(n)} exceeds {MAX_GRID} points")
    return tuple(n)


def sup_derivative(c: SpectralCoefficients, order: int, grid_points) -> float:
    """Max over the grid and over all partials of total order ``order``."""
    M = c.manifold
    freqs = M.frequency_axes(c.k_max)
    best = 0.0
    for alpha in itertools.product(range(order + 1), repeat=M.dim):
        if sum(alpha) != order:
            continue
        vals = c.values.astype(complex)
        for ax, (f, a) in enumerate(zip(freqs, alpha)):
            if a:
                shape = [1] * M.dim
                shape[ax] = len(f)
                vals = vals * ((1j * f) ** a).reshape(shape)
        full = np.zeros(grid_points, dtype=complex)
        idx = np.ix_(*[np.arange(-k, k + 1) % n for k, n in zip(c.k_max, grid_points)])
        full[idx] = vals
        u = np.fft.ifftn(full) * full.size
        best = max(best, float(np.abs(u).max()))
    return best


def measure(c: SpectralCoefficients, seminorm: str, resolve: float | None = None,
            oversample: int = 16) -> float:
    kind, p = parse_seminorm(seminorm)
    if kind == "H":
        return sobolev_norm(c, p)
    return sup_derivative(c, int(p), sup_grid(c, resolve, oversample))


# -- scans -----------------------------------------------------------------
def _resolve_scale(P: RegularizationProcess, w: TestDistribution | None, eps: float) -> float:
    r = P.filter.b / eps
    if w is not None and w.band is not None:
        r = min(r, w.band)
    return max(r, 1.0)


def scan_coefficients(label: tuple, eps_grid, make: Callable, seminorms: Sequence[str],
                      resolve: Callable | None = None, oversample: int = 16) -> list:
    """Generic scan.

    ``make(eps)`` returns the coefficients to measure, or a pair
    ``(coefficients, reference)`` whose seminorms become the scan scale.
    """
    eps_grid = np.asarray(eps_grid, dtype=float)
    table = {s: [] for s in seminorms}
    scale = {s: [] for s in seminorms}
    with_ref = False
    for eps in eps_grid:
        c = make(eps)
        ref = None
        if isinstance(c, tuple):
            c, ref = c
            with_ref = True
        res = None if resolve is None else resolve(eps)
        for s in seminorms:
            table[s].append(measure(c, s, res, oversample))
            if ref is not None:
                scale[s].append(measure(ref, s, res, oversample))
    return [EpsilonScan(label[0], label[1], s, eps_grid, np.array(table[s]),
                        np.array(scale[s]) if with_ref else None) for s in seminorms]


def run_scan(P: RegularizationProcess, w: TestDistribution, seminorms=DEFAULT_SEMINORMS,
             eps_grid=None, oversample: int = 16, min_points: int = 8) -> list:
    """Seminorms of ``T_eps w`` over ``eps_grid`` (band chosen per eps)."""
    eps_grid = dyadic_grid() if eps_grid is None else np.asarray(eps_grid, dtype=float)
    _check_grid(eps_grid, min_points)
    return scan_coefficients(
        (P.label, w.id), eps_grid, lambda e: regularize(P, w, e), seminorms,
        lambda e: _resolve_scale(P, w, e), oversample,
    )


def residual_scan(P: RegularizationProcess, w: TestDistribution, seminorms=DEFAULT_SEMINORMS,
                  eps_grid=None, oversample: int = 16, min_points: int = 8) -> list:
    """Seminorms of ``T_eps w - w`` (meaningful for band-limited ``w``)."""
    eps_grid = dyadic_grid() if eps_grid is None else np.asarray(eps_grid, dtype=float)
    _check_grid(eps_grid, min_points)

    def make(eps):
        K = P.band(eps, w)
        c = w.coefficients(K)
        return c.with_values(regularize(P, w, eps, K, c).values - c.values), c

    return scan_coefficients((P.label, w.id + ":residual"), eps_grid, make, seminorms,
                             lambda e: _resolve_scale(P, w, e), oversample)


def difference_scan(P1: RegularizationProcess, P2: RegularizationProcess, w: TestDistribution,
                    seminorms=("L2", "sup"), eps_grid=None, oversample: int = 16,
                    min_points: int = 8) -> list:
    """Seminorms of ``T1_eps w - T2_eps w`` on the larger of the two bands."""
    eps_grid = dyadic_grid() if eps_grid is None else np.asarray(eps_grid, dtype=float)
    _check_grid(eps_grid, min_points)

    def make(eps):
        K = tuple(max(a, b) for a, b in zip(P1.band(eps, w), P2.band(eps, w)))
        c = w.coefficients(K)
        t1 = regularize(P1, w, eps, K, c)
        return c.with_values(t1.values - regularize(P2, w, eps, K, c).values), t1

    return scan_coefficients((f"{P1.label}-{P2.label}", w.id), eps_grid, make, seminorms,
                             lambda e: _resolve_scale(P1, w, e), oversample)


def _check_grid(eps_grid: np.ndarray, min_points: int):
    if eps_grid.size < min_points:
        raise InsufficientDataError(f"scan needs at least {min_points} epsilon values")
    ratios = eps_grid[1:] / eps_grid[:-1]
    if np.any(ratios < 0.25 - 1e-12) or np.any(ratios > 0.75 + 1e-12):
        raise ParameterError("consecutive epsilon ratios must lie in [1/4, 3/4]")


# -- fitting -----------------------------------------------------------------
def fit_slope(scan: EpsilonScan, window=None, floor: float = 0.0, min_points: int = 5,
              rel_floor: float = 0.0) -> SlopeFit:
    """Least squares through ``(log eps, log value)`` over ``window = (eps_lo, eps_hi)``.

    Points at or below the floor (see :meth:`EpsilonScan.floor`) are dropped
    as floor-dominated.
    """
    eps, vals = scan.eps, scan.values
    sel = np.ones(eps.size, dtype=bool)
    if window is not None:
        lo, hi = window
        sel &= (eps >= lo * (1 - 1e-12)) & (eps <= hi * (1 + 1e-12))
    in_window = int(sel.sum())
    sel &= vals > scan.floor(floor, rel_floor)
    if sel.sum() < min_points:
        if in_window >= min_points:
            raise InsufficientDataError(
                f"only {int(sel.sum())} of {in_window} points above the floor {floor}"
            )
        raise InsufficientDataError(f"fewer than {min_points} points in the window")
    x = np.log(eps[sel])
    y = np.log(vals[sel])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return SlopeFit(float(slope), float(intercept), r2, float(np.abs(y - pred).max()),
                    (float(eps[sel].min()), float(eps[sel].max())), int(sel.sum()),
                    floor_dominated=bool(sel.sum() < in_window))


def asymptotic_window(scan: EpsilonScan, floor: float = FLOOR, n_points: int = 5,
                      rel_floor: float = REL_FLOOR):
    """Window holding the ``n_points`` smallest eps whose values sit above the floor.

    ``None`` when fewer than ``n_points`` values are above the floor.
    """
    above = np.nonzero(scan.values > scan.floor(floor, rel_floor))[0]
    if above.size < n_points:
        return None
    idx = above[-n_points:]
    return (float(scan.eps[idx].min()), float(scan.eps[idx].max()))


@dataclass(frozen=True)
class Verdict:
    mode: str
    passed: bool
    exponent: float | None
    details: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"mode": self.mode, "passed": self.passed, "exponent": self.exponent,
                "details": self.details}


def classify(scans: Sequence[EpsilonScan], mode: str, m_max: float = 8.0,
             floor: float = FLOOR, tail_points: int = 5, rel_floor: float = REL_FLOOR) -> Verdict:
    """Moderate / negligible verdict over a set of seminorm scans.

    moderate: every scan admits a finite fitted slope; the exponent reported
    is ``N = ceil(-min slope)`` (at least 0).

    negligible: for every scan either all values are below the floor, or the
    slope fitted on the asymptotic window (the ``tail_points`` smallest eps
    above the floor) exceeds ``m_max``.  Values that fall below the floor
    before the window fills are also accepted when the scan ends below the
    floor.  The floor is ``floor`` raised to ``rel_floor`` times the scan
    scale where one is recorded.
    """
    if mode not in ("moderate", "negligible"):
        raise ParameterError(f"unknown classification mode {mode!r}")
    details = []
    if mode == "moderate":
        worst = math.inf
        ok = True
        for sc in scans:
            try:
                fit = fit_slope(sc, floor=floor)
            except InsufficientDataError as exc:
                details.append({"seminorm": sc.seminorm, "ok": False, "reason": str(exc)})
                ok = False
                continue
            good = math.isfinite(fit.slope)
            ok &= good
            worst = min(worst, fit.slope)
            details.append({"seminorm": sc.seminorm, "ok": good, "fit": fit.as_dict()})
        N = None if not math.isfinite(worst) else max(0, int(math.ceil(-worst - 1e-9)))
        return Verdict(mode, bool(ok), N, details)

    ok_all = True
    worst = math.inf
    for sc in scans:
        above = sc.values > sc.floor(floor, rel_floor)
        if not above.any():
            details.append({"seminorm": sc.seminorm, "ok": True, "reason": "below floor"})
            continue
        last_above = int(np.nonzero(above)[0][-1])
        tail_below = last_above < sc.eps.size - 1
        window = asymptotic_window(sc, floor, tail_points, rel_floor)
        if window is None:
            # too few points above the floor to fit; accept if the scan ends below it
            ok = tail_below
            details.append({"seminorm": sc.seminorm, "ok": ok,
                            "reason": "reaches floor" if ok else "insufficient data"})
            ok_all &= ok
            continue
        fit = fit_slope(sc, window, floor=floor, min_points=tail_points, rel_floor=rel_floor)
        ok = fit.slope > m_max
        worst = min(worst, fit.slope)
        details.append({"seminorm": sc.seminorm, "ok": bool(ok), "fit": fit.as_dict(),
                        "reaches_floor": bool(tail_below)})
        ok_all &= ok
    return Verdict(mode, bool(ok_all), None if math.isinf(worst) else worst, details)
