"""Wavefront-set estimation from epsilon-uniform directional decay.

For a probe (base point, window, cone of directions) and each ``eps`` we
compute ``Q_l(eps) = sup_{xi in cone} (1 + |xi|)^l |(phi u_eps)^(xi)|`` at
dyadic ``|xi|`` up to a fixed ``xi_max``.  Fitting ``log Q_l`` against
``log eps`` gives ``Q_l = O(eps^{-N(l)})``.  A direction is regular when
one ``N`` serves every ``l`` (the spread of ``N(l)`` stays below a
threshold) and singular when ``N(l)`` keeps growing with ``l``.

Frequencies are sampled on the dual lattice ``2 pi k / L`` so the windowed
transform can be evaluated either from grid samples (FFT of ``phi * u``) or
directly from coefficients (``sum_k u_k Phi(xi - kappa)``).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import EpsilonScan, dyadic_grid, fit_slope
from .errors import DimensionError, ParameterError
from .filters import plateau_bump
from .manifold import GridFunction, ManifoldModel, SpectralCoefficients
from .regularizer import RegularizationProcess, regularize
from .zoo import TestDistribution

L_VALUES = (2, 4, 6, 8)
SPREAD_THRESHOLD = 0.5
#: noise floor relative to Phi(0) sum |u_k|
ROUNDING = 1e-13
HALF_ANGLE = math.radians(15.0)


@dataclass(frozen=True)
class ConeProbe:
    """Base point, tensor-product bump window of radius ``radius`` and a cone.

    The window is ``prod_i bump(x_i - x0_i)`` with ``bump = 1`` on
    ``[-inner r, inner r]`` and 0 outside ``[-r, r]``; so ``window(x0) = 1``.
    """

    base: tuple
    radius: float = 0.5
    direction: tuple = (1.0,)
    half_angle: float = HALF_ANGLE
    l_values: tuple = L_VALUES
    eps_grid: tuple = tuple(dyadic_grid())
    xi_max: float | None = None
    inner: float = 0.25

    def __post_init__(self):
        v = np.asarray(self.direction, dtype=float)
        nrm = float(np.linalg.norm(v))
        if nrm == 0:
            raise ParameterError("cone direction must be non-zero")
        object.__setattr__(self, "direction", tuple(float(x) for x in v / nrm))
        object.__setattr__(self, "base", tuple(float(x) for x in np.atleast_1d(self.base)))
        object.__setattr__(self, "eps_grid", tuple(float(e) for e in self.eps_grid))
        if len(self.base) != len(self.direction):
            raise DimensionError("base point and direction dimensions differ")
        if not self.radius > 0 or not 0 < self.inner < 1:
            raise ParameterError("window needs radius > 0 and 0 < inner < 1")

    @property
    def dim(self) -> int:
        return len(self.base)

    def window_1d(self, t):
        return plateau_bump(t, self.inner * self.radius, self.radius)

    def window(self, M: ManifoldModel, grid_points=None) -> np.ndarray:
        """Window sampled on a grid of ``M`` (periodic offsets)."""
        out = 1.0
        for X, x0, L in zip(M.grid_coords(grid_points), self.base, M.side_lengths):
            d = (X - x0 + 0.5 * L) % L - 0.5 * L
            out = out * self.window_1d(d)
        return out

    def resolved_xi_max(self, P: RegularizationProcess) -> float:
        """Largest sampled ``|xi|``: a power of 2 at or above ``b / eps_min``."""
        if self.xi_max is not None:
            return float(self.xi_max)
        return float(2.0 ** math.ceil(math.log2(P.filter.b / min(self.eps_grid))))


def cone_samples(M: ManifoldModel, probe: ConeProbe, xi_max: float) -> tuple:
    """Lattice frequencies inside the cone at dyadic magnitudes ``2, 4, .., xi_max``.

    Returns ``(modes, xi)``: integer mode vectors and their physical
    frequencies.  In 1D the cone is the ray; in 2D the central ray and the
    two edge rays are sampled, each rounded to the nearest lattice point.
    """
    if probe.dim != M.dim:
        raise DimensionError("probe and manifold dimensions differ")
    unit = M.wavenumber_unit
    mags = 2.0 ** np.arange(1, int(math.floor(math.log2(xi_max))) + 1)
    d = np.asarray(probe.direction)
    if M.dim == 1:
        rays = [d]
    elif M.dim == 2:
        th = math.atan2(d[1], d[0])
        rays = [np.array([math.cos(th + a), math.sin(th + a)])
                for a in (-probe.half_angle, 0.0, probe.half_angle)]
    else:
        rays = [d]
    modes = []
    for r in rays:
        for m in mags:
            k = np.rint(m * r / unit).astype(int)
            if np.any(k != 0):
                modes.append(tuple(int(v) for v in k))
    modes = np.array(sorted(set(modes)), dtype=int).reshape(-1, M.dim)
    return modes, modes * unit


@functools.lru_cache(maxsize=32)
def _window_table(radius: float, inner: float, L: float, m_max: int) -> np.ndarray:
    """``Phi(2 pi m / L) = int bump(t) exp(-i 2 pi m t / L) dt`` for ``|m| <= m_max`` (real, even)."""
    n = 1 << int(math.ceil(math.log2(max(4 * (m_max + 1), 2**14))))
    t = (np.arange(n) - n // 2) * (L / n)
    t = np.fft.ifftshift(t)
    vals = plateau_bump(t, inner * radius, radius)
    tab = (L / n) * np.fft.fft(vals).real
    out = tab[: m_max + 1].copy()
    out.setflags(write=False)
    return out


def window_transform(M: ManifoldModel, probe: ConeProbe, modes: np.ndarray) -> np.ndarray:
    """``Phi(xi)`` of the window (centred at 0) at lattice modes ``modes`` (shape ``(..., dim)``)."""
    out = np.ones(modes.shape[:-1])
    for i, L in enumerate(M.side_lengths):
        m = np.abs(modes[..., i])
        tab = _window_table(probe.radius, probe.inner, float(L), int(m.max()) if m.size else 0)
        out = out * tab[m]
    return out


def windowed_spectrum_coefficients(c: SpectralCoefficients, probe: ConeProbe,
                                   modes: np.ndarray) -> np.ndarray:
    """``(phi u)^(xi) = sum_k u_k Phi(xi - kappa) exp(-i (xi - kappa) . x0)`` at lattice ``modes``."""
    M = c.manifold
    nz = np.nonzero(c.values)
    coeff = c.values[nz]
    kvec = np.stack([ax[i] for ax, i in zip(M.mode_axes(c.k_max), nz)], axis=-1)
    unit = M.wavenumber_unit
    x0 = np.asarray(probe.base)
    out = np.empty(len(modes), dtype=complex)
    for j, xi in enumerate(modes):
        diff = xi[None, :] - kvec
        phase = np.exp(-1j * ((diff * unit) @ x0))
        out[j] = np.sum(coeff * window_transform(M, probe, diff) * phase)
    return out


def rounding_scale(c: SpectralCoefficients, probe: ConeProbe) -> float:
    """``Phi(0) sum_k |u_k|``: the size every windowed sum is rounded against."""
    phi0 = float(window_transform(c.manifold, probe, np.zeros((1, c.manifold.dim), dtype=int))[0])
    return phi0 * float(np.sum(np.abs(c.values)))


@dataclass(frozen=True)
class DirectionalTable:
    modes: np.ndarray
    xi: np.ndarray
    magnitudes: np.ndarray
    truncated: bool = False
    scale: float = 0.0


def windowed_directional_spectrum(u: GridFunction, probe: ConeProbe, xi_max: float | None = None):
    """Window the grid samples, transform, and read ``|(phi u)^|`` along the cone.

    Uses the FFT of ``phi * u`` (Riemann sum over the grid); lattice modes
    beyond the grid Nyquist band are dropped and flagged.
    """
    M = u.manifold
    n = u.values.shape
    if xi_max is None:
        xi_max = min(ni // 2 * w for ni, w in zip(n, M.wavenumber_unit)) / 2
    modes, xi = cone_samples(M, probe, xi_max)
    prod = probe.window(M, n) * u.values
    spec = np.fft.fftn(prod) * (M.volume / prod.size)
    ok = np.all(np.abs(modes) < np.asarray(n) // 2, axis=1)
    idx = tuple((modes[ok] % np.asarray(n)).T)
    mags = np.abs(spec[idx])
    return DirectionalTable(modes[ok], xi[ok], mags, truncated=bool((~ok).any()))


def directional_table_coefficients(c: SpectralCoefficients, probe: ConeProbe, xi_max: float):
    modes, xi = cone_samples(c.manifold, probe, xi_max)
    vals = windowed_spectrum_coefficients(c, probe, modes)
    return DirectionalTable(modes, xi, np.abs(vals), scale=rounding_scale(c, probe))


def cone_sup(table: DirectionalTable, l: float, floor: float = 0.0) -> float:
    """``max (1 + |xi|)^l max(|(phi u)^(xi)|, floor)`` over the cone samples."""
    r = np.linalg.norm(table.xi, axis=1)
    mags = np.maximum(table.magnitudes, max(floor, 1e-300))
    return float(np.max((1.0 + r) ** l * mags))


@dataclass(frozen=True)
class ConeScan:
    probe: ConeProbe
    eps: np.ndarray
    q: dict            # l -> array of Q_l over eps
    fits: dict         # l -> SlopeFit
    xi_max: float
    floor_dominated: bool
    floor: float = 0.0

    @property
    def orders(self) -> dict:
        """``N(l) = -slope``."""
        return {l: -f.slope for l, f in self.fits.items()}

    def spread(self) -> float:
        """Growth of ``N(l)`` over ``N`` at the smallest usable ``l``.

        An ``N`` that works for the smallest ``l`` and keeps working (up to
        the threshold) for the larger ones is a uniform ``N``; growth is the
        signature of a singular direction.
        """
        orders = self.orders
        ls = sorted(orders)
        return float(max(orders[l] for l in ls) - orders[ls[0]])

    def verdict(self, threshold: float = SPREAD_THRESHOLD) -> str:
        return "singular" if self.spread() >= threshold else "regular"

    def broke_at(self, threshold: float = SPREAD_THRESHOLD):
        """First ``l`` where ``N(l)`` exceeds ``N(l_min)`` by the threshold, if any."""
        orders = self.orders
        ls = sorted(orders)
        for l in ls[1:]:
            if orders[l] - orders[ls[0]] >= threshold:
                return l
        return None


def cone_decay_scan(P: RegularizationProcess, w: TestDistribution, probe: ConeProbe,
                    cache: dict | None = None) -> ConeScan:
    """``Q_l(eps)`` for every ``l`` of the probe and the fitted ``-N(l)``.

    Rounding in the coefficient sums is absolute, of order
    ``1e-16 Phi(0) sum |u_k|``.  Magnitudes are clamped to one
    eps-independent floor above that level, so noise contributes the same
    amount at every eps and cannot fake growth of ``N(l)``.
    """
    eps = np.asarray(probe.eps_grid)
    xi_max = probe.resolved_xi_max(P)
    tables = []
    for e in eps:
        key = ("coeff", float(e))
        c = None if cache is None else cache.get(key)
        if c is None:
            c = regularize(P, w, float(e))
            if cache is not None:
                cache[key] = c
        tables.append(directional_table_coefficients(c, probe, xi_max))
    floor = ROUNDING * max(t.scale for t in tables)
    floor_hit = any(bool(np.any(t.magnitudes < floor)) for t in tables)
    q, fits = {}, {}
    for l in probe.l_values:
        vals = np.array([cone_sup(t, l, floor) for t in tables])
        q[l] = vals
        fits[l] = fit_slope(EpsilonScan(P.label, w.id, f"Q{l}", eps, vals), min_points=5)
    return ConeScan(probe, eps, q, fits, xi_max, floor_hit, floor)


@dataclass
class WavefrontReport:
    distribution: str
    entries: list = field(default_factory=list)
    confusion: dict = field(default_factory=dict)
    tested_range: dict = field(default_factory=dict)

    def singular_pairs(self) -> list:
        return [(e["point"], e["direction"]) for e in self.entries if e["verdict"] == "singular"]

    def as_dict(self) -> dict:
        return {
            "distribution": self.distribution,
            "confusion": self.confusion,
            "tested_range": self.tested_range,
            "entries": self.entries,
        }

    @property
    def sound(self) -> bool:
        """No false negatives and every false positive within the leakage zone."""
        return self.confusion.get("false_negative", 0) == 0 and \
            self.confusion.get("false_positive_far", 0) == 0


def default_directions(dim: int, count: int = 16) -> list:
    if dim == 1:
        return [(1.0,), (-1.0,)]
    ang = 2 * math.pi * np.arange(count) / count
    return [(float(np.round(math.cos(a), 15)), float(np.round(math.sin(a), 15))) for a in ang]


def estimate_wavefront(P: RegularizationProcess, w: TestDistribution, points, directions=None,
                       radius: float = 0.5, eps_grid=None, l_values=L_VALUES,
                       threshold: float = SPREAD_THRESHOLD, leakage_radii: float = 3.0,
                       half_angle: float = HALF_ANGLE) -> WavefrontReport:
    """Classify every (point, direction) probe and compare with the declared wavefront set.

    False positives are split into those within ``leakage_radii`` window
    radii of the singular support (window leakage, tolerated) and the rest.
    """
    M = w.manifold
    directions = default_directions(M.dim) if directions is None else directions
    eps_grid = tuple(dyadic_grid()) if eps_grid is None else tuple(eps_grid)
    cache: dict = {}
    counts = {"true_singular": 0, "true_regular": 0, "false_negative": 0,
              "false_positive_near": 0, "false_positive_far": 0}
    entries = []
    xi_max = None
    for p in points:
        for d in directions:
            probe = ConeProbe(tuple(np.atleast_1d(p)), radius, tuple(d), half_angle,
                              tuple(l_values), eps_grid)
            sc = cone_decay_scan(P, w, probe, cache)
            xi_max = sc.xi_max
            verdict = sc.verdict(threshold)
            truth = w.is_singular(probe.base, probe.direction, half_angle)
            dist = w.singular_distance(probe.base)
            if verdict == "singular" and truth:
                label = "true_singular"
            elif verdict == "regular" and not truth:
                label = "true_regular"
            elif verdict == "regular":
                label = "false_negative"
            elif dist <= leakage_radii * radius:
                label = "false_positive_near"
            else:
                label = "false_positive_far"
            counts[label] += 1
            entries.append({
                "point": list(probe.base),
                "direction": list(probe.direction),
                "verdict": verdict,
                "declared": "singular" if truth else "regular",
                "label": label,
                "orders": {str(l): n for l, n in sc.orders.items()},
                "spread": sc.spread(),
                "broke_at": sc.broke_at(threshold),
                "floor_dominated": sc.floor_dominated,
                "noise_floor": sc.floor,
                "q_table": {str(l): v.tolist() for l, v in sc.q.items()},
            })
    stamp = {
        "eps_min": float(min(eps_grid)),
        "eps_max": float(max(eps_grid)),
        "eps_count": len(eps_grid),
        "xi_max": xi_max,
        "l_values": list(l_values),
        "spread_threshold": threshold,
        "window_radius": radius,
        "half_angle_deg": math.degrees(half_angle),
        "note": "verdicts are falsification tests over the tested range only",
    }
    return WavefrontReport(w.id, entries, counts, stamp)
