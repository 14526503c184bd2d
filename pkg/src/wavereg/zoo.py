"""Test distributions given by exact plane-wave coefficient formulas.

Each member carries ground truth: a support description, the Sobolev order
``s0`` (``w`` lies in ``H^t`` exactly for ``t < s0``) and the wavefront set.
Coefficients are generated on demand for any band, so nothing is ever
sampled on a grid before regularisation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BandLimitError, DimensionError, ParameterError, UnknownDistributionError
from .manifold import (GridFunction, ManifoldModel, SpectralCoefficients, _as_tuple, distance_field,
                       forward_transform, inverse_transform, next_pow2)

ZOO_IDS = ("dirac", "dirac_derivative", "sawtooth_jump", "line_delta", "smooth_bump", "plane_wave")


@dataclass(frozen=True)
class WavefrontComponent:
    """Singular points with their singular directions.

    ``kind == "point"``: the single point ``where``.
    ``kind == "line"``: the hyperplane ``{x_axis = where[axis]}``.
    ``directions is None`` means every direction.
    """

    kind: str
    where: tuple
    directions: tuple | None = None
    axis: int = 0

    def distance(self, M: ManifoldModel, point) -> float:
        p = np.atleast_1d(np.asarray(point, dtype=float))
        if self.kind == "point":
            d = np.abs(p - np.asarray(self.where)) % np.asarray(M.side_lengths)
            d = np.minimum(d, np.asarray(M.side_lengths) - d)
            return float(np.sqrt(np.sum(d**2)))
        L = M.side_lengths[self.axis]
        d = abs(p[self.axis] - self.where[self.axis]) % L
        return float(min(d, L - d))

    def has_direction(self, direction, half_angle: float) -> bool:
        if self.directions is None:
            return True
        v = np.asarray(direction, dtype=float)
        v = v / np.linalg.norm(v)
        cos_tol = math.cos(half_angle)
        return any(float(np.dot(v, d)) >= cos_tol - 1e-12 for d in self.directions)


@dataclass(frozen=True)
class TestDistribution:
    """A distribution on a flat model with ground-truth metadata."""

    __test__ = False  # keep pytest from collecting this class

    id: str
    manifold: ManifoldModel
    generator: Callable = field(repr=False, compare=False)
    support: str
    support_center: tuple | None
    support_radius: float
    sobolev_order: float
    wavefront: tuple
    real: bool = True
    band: float | None = None
    params: dict = field(default_factory=dict, compare=False)

    def coefficients(self, k_max) -> SpectralCoefficients:
        M = self.manifold.with_band(k_max)
        grids = np.meshgrid(*M.mode_axes(), indexing="ij")
        vals = np.asarray(self.generator(M, grids), dtype=complex)
        return SpectralCoefficients(M, vals)

    def singular_distance(self, point) -> float:
        """Distance from ``point`` to the singular support (inf if smooth)."""
        if not self.wavefront:
            return math.inf
        return min(c.distance(self.manifold, point) for c in self.wavefront)

    def is_singular(self, point, direction, half_angle: float = math.radians(15),
                    tol: float = 1e-9) -> bool:
        """Whether ``(point, direction)`` lies in the declared wavefront set."""
        return any(
            c.distance(self.manifold, point) <= tol and c.has_direction(direction, half_angle)
            for c in self.wavefront
        )

    def metadata(self) -> dict:
        wf = []
        for c in self.wavefront:
            wf.append({
                "kind": c.kind,
                "where": list(c.where),
                "axis": c.axis,
                "directions": "all" if c.directions is None else [list(d) for d in c.directions],
            })
        return {
            "id": self.id,
            "manifold": self.manifold.kind,
            "side_lengths": list(self.manifold.side_lengths),
            "support": self.support,
            "support_center": None if self.support_center is None else list(self.support_center),
            "support_radius": self.support_radius,
            "sobolev_order": "inf" if math.isinf(self.sobolev_order) else self.sobolev_order,
            "wavefront": wf,
            "real": self.real,
            "params": {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params.items()},
        }


def _phase(M: ManifoldModel, grids, x0) -> np.ndarray:
    arg = 0.0
    for g, w, x in zip(grids, M.wavenumber_unit, x0):
        arg = arg + g * (w * x)
    return np.exp(-1j * arg)


def _point(M: ManifoldModel, x0) -> tuple:
    if x0 is None:
        return (0.0,) * M.dim
    x0 = tuple(float(v) for v in np.atleast_1d(x0))
    if len(x0) != M.dim:
        raise DimensionError("base point dimension does not match the manifold")
    return x0


def _unit_axes(dim: int) -> tuple:
    out = []
    for i in range(dim):
        for sgn in (1.0, -1.0):
            v = [0.0] * dim
            v[i] = sgn
            out.append(tuple(v))
    return tuple(out)


def make_distribution(id: str, M: ManifoldModel, x0=None, **params) -> TestDistribution:
    """Build a zoo member.

    ``x0`` is the base point (dirac, derivative, jump, bump centre) or, for
    ``line_delta``, a point on the line ``{x_1 = x0_1}``.  Extra parameters:
    ``sigma`` and ``k_bump`` for the bump, ``k0`` for the plane wave.
    """
    if id not in ZOO_IDS:
        raise UnknownDistributionError(id)
    m = M.dim
    vol = M.volume

    if id == "dirac":
        p = _point(M, x0)

        def gen(Mb, grids):
            return _phase(Mb, grids, p) / vol

        return TestDistribution(id, M, gen, "point", p, 0.0, -m / 2,
                                (WavefrontComponent("point", p),), params={"x0": p})

    if id == "dirac_derivative":
        p = _point(M, x0)
        w1 = M.wavenumber_unit[0]

        def gen(Mb, grids):
            return 1j * w1 * grids[0] * _phase(Mb, grids, p) / vol

        return TestDistribution(id, M, gen, "point", p, 0.0, -m / 2 - 1,
                                (WavefrontComponent("point", p),), params={"x0": p})

    if id == "sawtooth_jump":
        if M.kind != "circle":
            raise ParameterError("sawtooth_jump lives on the circle")
        p = _point(M, x0)

        def gen(Mb, grids):
            k = grids[0]
            safe = np.where(k == 0, 1, k)
            return np.where(k == 0, 0.0, _phase(Mb, grids, p) / (2j * math.pi * safe))

        return TestDistribution(id, M, gen, "full", None, math.inf, 0.5,
                                (WavefrontComponent("point", p, _unit_axes(1)),),
                                params={"x0": p})

    if id == "line_delta":
        if M.kind != "torus" or m != 2:
            raise ParameterError("line_delta lives on a 2-torus")
        p = _point(M, x0)
        p = (p[0], 0.0)
        L1 = M.side_lengths[0]

        def gen(Mb, grids):
            on_axis = grids[1] == 0
            return np.where(on_axis, np.exp(-1j * Mb.wavenumber_unit[0] * grids[0] * p[0]) / L1, 0.0)

        comp = WavefrontComponent("line", p, ((1.0, 0.0), (-1.0, 0.0)), axis=0)
        return TestDistribution(id, M, gen, "line", p, 0.0, -0.5, (comp,), params={"x0": p})

    if id == "smooth_bump":
        p = _point(M, x0) if x0 is not None else tuple(L / 2 for L in M.side_lengths)
        sigma = float(params.get("sigma", 0.3))
        k_bump = float(params.get("k_bump", 30.0))
        if sigma <= 0 or k_bump <= 0:
            raise ParameterError("smooth_bump needs sigma > 0 and k_bump > 0")

        def gen(Mb, grids):
            lam = sum((g * w) ** 2 for g, w in zip(grids, Mb.wavenumber_unit))
            vals = np.exp(-0.5 * sigma**2 * lam) * _phase(Mb, grids, p) / vol
            return np.where(lam <= k_bump**2 * (1 + 1e-12), vals, 0.0)

        radius = _effective_radius(M, gen, p, k_bump)
        return TestDistribution(id, M, gen, "ball", p, radius, math.inf, (), band=k_bump,
                                params={"x0": p, "sigma": sigma, "k_bump": k_bump})

    # plane_wave
    k0 = params.get("k0", (1,) * m)
    k0 = tuple(int(v) for v in np.atleast_1d(k0))
    if len(k0) != m:
        raise DimensionError("plane_wave mode must match the manifold dimension")

    def gen(Mb, grids):
        hit = np.ones(grids[0].shape, dtype=bool)
        for g, k in zip(grids, k0):
            hit &= g == k
        return hit.astype(complex)

    band = float(np.linalg.norm(np.asarray(k0) * M.wavenumber_unit))
    return TestDistribution(id, M, gen, "full", None, math.inf, math.inf, (), real=False,
                            band=band, params={"k0": k0})


def _effective_radius(M: ManifoldModel, gen, center, k_bump: float, eta: float = 1e-8) -> float:
    """Distance from ``center`` beyond which the bump stays below ``eta`` of its peak.

    Measured on the manifold from the exact coefficients on an oversampled
    grid.  The bump is band-limited, so this is a threshold support, not an
    exact one; it equals the half-diameter when the bump never drops below
    ``eta``.
    """
    K = tuple(int(math.floor(k_bump / u * (1 + 1e-12))) for u in M.wavenumber_unit)
    Mb = M.with_band(K)
    c = SpectralCoefficients(Mb, np.asarray(gen(Mb, np.meshgrid(*Mb.mode_axes(), indexing="ij")),
                                            dtype=complex))
    n = tuple(max(256, next_pow2(8 * (2 * k + 1))) for k in K)
    mag = np.abs(inverse_transform(c, n).values)
    d = distance_field(Mb, center, n)
    return float(d[mag > eta * mag.max()].max())


def pair(w: TestDistribution, psi: GridFunction, K=None) -> complex:
    """``<w, psi> = vol * sum_k w_k psi_{-k}`` (bilinear, like ``int w psi``)."""
    M = psi.manifold
    K = M.k_max if K is None else tuple(int(v) for v in _as_tuple(K, M.dim, "band"))
    for k, kmax, n in zip(K, M.k_max, psi.values.shape):
        if k > kmax or n < 2 * k + 1:
            raise BandLimitError(f"pairing band {k} exceeds the test function band")
    if psi.values.shape != M.grid_points:
        M = M.with_band(M.k_max, psi.values.shape)
        psi = GridFunction(M, psi.values, psi.real)
    ph = forward_transform(psi, K).values
    wk = w.coefficients(K).values
    flipped = ph[tuple(slice(None, None, -1) for _ in ph.shape)]
    return complex(w.manifold.volume * np.sum(wk * flipped))


def pair_coefficients(w_coeffs: SpectralCoefficients, psi_coeffs: SpectralCoefficients) -> complex:
    """Pairing from two coefficient arrays of the same band."""
    if w_coeffs.values.shape != psi_coeffs.values.shape:
        raise DimensionError("coefficient bands differ")
    flipped = psi_coeffs.values[tuple(slice(None, None, -1) for _ in psi_coeffs.values.shape)]
    return complex(w_coeffs.manifold.volume * np.sum(w_coeffs.values * flipped))


def sobolev_partial_sums(w: TestDistribution, t: float, bands) -> np.ndarray:
    """``vol * sum_{|k|_inf <= K} (1 + lambda_k)^t |w_k|^2`` for each ``K``."""
    K_top = int(max(bands))
    c = w.coefficients(K_top)
    lam = c.eigenvalues()
    dens = w.manifold.volume * (1.0 + lam) ** t * np.abs(c.values) ** 2
    out = []
    for K in bands:
        sl = tuple(slice(K_top - int(K), K_top + int(K) + 1) for _ in range(w.manifold.dim))
        out.append(float(np.sum(dens[sl])))
    return np.array(out)


def sobolev_verdict(w: TestDistribution, t: float, bands=(32, 64, 128, 256)) -> str:
    """``"converges"`` or ``"diverges"`` from the growth of dyadic increments.

    With ``bands`` doubling, increments of the partial sums scale like
    ``2^(2 (t - s0))`` per octave for power-law coefficients; a mean increment
    ratio above 1 signals divergence.
    """
    S = sobolev_partial_sums(w, t, bands)
    inc = np.diff(S)
    if np.all(np.abs(inc) <= 1e-14 * max(abs(S[-1]), 1e-300)):
        return "converges"
    inc = np.maximum(np.abs(inc), 1e-300)
    ratio = float(np.exp(np.mean(np.diff(np.log(inc)))))
    return "diverges" if ratio > 1.0 else "converges"


def zoo_listing(M: ManifoldModel) -> list:
    """Metadata for every member that can live on ``M``."""
    out = []
    for zid in ZOO_IDS:
        try:
            out.append(make_distribution(zid, M).metadata())
        except ParameterError:
            continue
    return out
