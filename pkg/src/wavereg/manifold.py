"""Flat model manifolds (circle, tori) and their exact Laplacian spectra.

Functions on a model are represented in two ways:

* :class:`GridFunction` -- samples on a uniform tensor-product grid,
  ``x_j = j * L / n`` for ``j = 0 .. n-1`` in every direction;
* :class:`SpectralCoefficients` -- a dense array of plane-wave coefficients
  ``u_k`` in the basis ``exp(i <2 pi k / L, x>)`` for ``|k_i| <= K_i``,
  stored centred (array index ``k_i + K_i``).

The basis is *not* normalised: ``||e_k||^2 = vol(M)``, so a Dirac mass has
coefficients ``1 / vol(M)`` and every L2-type norm carries ``vol(M)``.
The Laplacian is the positive one, with eigenvalue
``sum_i (2 pi k_i / L_i)^2`` on ``e_k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BandLimitError, DimensionError, ParameterError

TWO_PI = 2.0 * math.pi


def next_pow2(n: int) -> int:
    return 1 << max(0, int(math.ceil(math.log2(max(n, 1)))))


def _as_tuple(value, dim: int, name: str) -> tuple:
    if np.ndim(value) == 0:
        return (value,) * dim
    value = tuple(value)
    if len(value) != dim:
        raise DimensionError(f"{name} has {len(value)} entries, expected {dim}")
    return value


@dataclass(frozen=True)
class ManifoldModel:
    """A flat compact model: the unit circle or a torus ``prod_i R / L_i Z``.

    ``k_max`` is the largest represented mode per direction and
    ``grid_points`` the sample count per direction; ``n_i >= 2 K_i + 1``
    so that every represented mode is resolved without aliasing.
    """

    kind: str
    side_lengths: tuple
    grid_points: tuple
    k_max: tuple

    def __post_init__(self):
        if self.kind not in ("circle", "torus"):
            raise ParameterError(f"unknown manifold kind {self.kind!r}")
        dim = len(self.side_lengths)
        if not 1 <= dim <= 3:
            raise DimensionError("only dimensions 1, 2 and 3 are supported")
        if self.kind == "circle" and (dim != 1 or not math.isclose(self.side_lengths[0], TWO_PI)):
            raise ParameterError("the circle model has fixed length 2*pi")
        if len(self.grid_points) != dim or len(self.k_max) != dim:
            raise DimensionError("grid_points and k_max must match the dimension")
        for L in self.side_lengths:
            if not L > 0:
                raise ParameterError("side lengths must be positive")
        for n, K in zip(self.grid_points, self.k_max):
            if K < 0:
                raise ParameterError("k_max must be non-negative")
            if n < 2 * K + 1:
                raise BandLimitError(f"grid of {n} points cannot resolve modes up to {K}")

    # -- constructors -----------------------------------------------------
    @classmethod
    def circle(cls, k_max: int, grid_points: int | None = None) -> "ManifoldModel":
        n = grid_points if grid_points is not None else next_pow2(2 * k_max + 1)
        return cls("circle", (TWO_PI,), (int(n),), (int(k_max),))

    @classmethod
    def torus(cls, side_lengths: Sequence[float], k_max, grid_points=None) -> "ManifoldModel":
        L = tuple(float(v) for v in side_lengths)
        K = tuple(int(v) for v in _as_tuple(k_max, len(L), "k_max"))
        if grid_points is None:
            n = tuple(next_pow2(2 * k + 1) for k in K)
        else:
            n = tuple(int(v) for v in _as_tuple(grid_points, len(L), "grid_points"))
        return cls("torus", L, n, K)

    def with_band(self, k_max, grid_points=None) -> "ManifoldModel":
        """Same geometry, different band (and grid sized for it by default)."""
        if self.kind == "circle":
            k = k_max if np.ndim(k_max) == 0 else k_max[0]
            n = grid_points if grid_points is None or np.ndim(grid_points) == 0 else grid_points[0]
            return ManifoldModel.circle(int(k), n)
        return ManifoldModel.torus(self.side_lengths, k_max, grid_points)

    # -- geometry ---------------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.side_lengths)

    @property
    def volume(self) -> float:
        return float(np.prod(self.side_lengths))

    @property
    def spacing(self) -> tuple:
        return tuple(L / n for L, n in zip(self.side_lengths, self.grid_points))

    @property
    def wavenumber_unit(self) -> np.ndarray:
        """``2 pi / L_i``: the physical frequency of mode index 1 per direction."""
        return TWO_PI / np.asarray(self.side_lengths)

    def grid_axes(self, grid_points=None) -> list:
        n = self.grid_points if grid_points is None else _as_tuple(grid_points, self.dim, "grid")
        return [np.arange(ni) * (L / ni) for L, ni in zip(self.side_lengths, n)]

    def grid_coords(self, grid_points=None) -> list:
        return np.meshgrid(*self.grid_axes(grid_points), indexing="ij")

    def mode_axes(self, k_max=None) -> list:
        K = self.k_max if k_max is None else _as_tuple(k_max, self.dim, "k_max")
        return [np.arange(-k, k + 1) for k in K]

    def frequency_axes(self, k_max=None) -> list:
        """Physical wavenumbers ``2 pi k_i / L_i`` per direction."""
        return [ax * w for ax, w in zip(self.mode_axes(k_max), self.wavenumber_unit)]

    def eigenvalues(self, k_max=None) -> np.ndarray:
        """Laplacian eigenvalues on the centred mode array of band ``k_max``."""
        freqs = self.frequency_axes(k_max)
        lam = np.zeros([len(f) for f in freqs])
        for i, f in enumerate(freqs):
            shape = [1] * self.dim
            shape[i] = len(f)
            lam = lam + (f**2).reshape(shape)
        return lam

    def check_band(self, k_max) -> tuple:
        K = tuple(int(v) for v in _as_tuple(k_max, self.dim, "k_max"))
        for k, kmax in zip(K, self.k_max):
            if k > kmax:
                raise BandLimitError(f"mode {k} exceeds the manifold band {kmax}")
        return K


@dataclass(frozen=True)
class GridFunction:
    """Complex samples on a uniform grid of ``manifold``.

    The sample grid defaults to the manifold grid but may be finer (for
    oversampled evaluation) or coarser (subsampling of a finer grid).
    """

    manifold: ManifoldModel
    values: np.ndarray
    real: bool = False

    def __post_init__(self):
        if self.values.ndim != self.manifold.dim:
            raise DimensionError("sample array rank does not match the manifold dimension")
        if self.real and self.values.size and np.iscomplexobj(self.values):
            scale = np.abs(self.values).max()
            if scale > 0 and np.abs(self.values.imag).max() > 1e-12 * scale:
                raise ParameterError("values flagged real carry a non-negligible imaginary part")

    @property
    def grid_points(self) -> tuple:
        return self.values.shape

    @property
    def spacing(self) -> tuple:
        return tuple(L / n for L, n in zip(self.manifold.side_lengths, self.values.shape))

    def coords(self) -> list:
        return self.manifold.grid_coords(self.values.shape)

    def real_values(self) -> np.ndarray:
        return self.values.real if np.iscomplexobj(self.values) else self.values

    def subsample(self, grid_points) -> "GridFunction":
        """Restrict to a coarser grid whose points are a subset of this one."""
        n_new = _as_tuple(grid_points, self.manifold.dim, "grid")
        slices = []
        for n_old, n in zip(self.values.shape, n_new):
            if n_old % n:
                raise DimensionError(f"cannot subsample {n_old} points to {n}")
            slices.append(slice(None, None, n_old // n))
        return GridFunction(self.manifold, self.values[tuple(slices)].copy(), self.real)

    def max_abs(self) -> float:
        return float(np.abs(self.values).max())


@dataclass(frozen=True)
class SpectralCoefficients:
    """Centred dense array of plane-wave coefficients."""

    manifold: ManifoldModel
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.ndim != self.manifold.dim:
            raise DimensionError("coefficient array rank does not match the manifold dimension")
        if any(s % 2 == 0 for s in self.values.shape):
            raise DimensionError("coefficient arrays have odd length 2K+1 per direction")

    @property
    def k_max(self) -> tuple:
        return tuple((s - 1) // 2 for s in self.values.shape)

    def __getitem__(self, k) -> complex:
        k = _as_tuple(k, self.manifold.dim, "mode")
        idx = tuple(int(ki) + K for ki, K in zip(k, self.k_max))
        if any(not 0 <= i < s for i, s in zip(idx, self.values.shape)):
            return 0j
        return complex(self.values[idx])

    def eigenvalues(self) -> np.ndarray:
        return self.manifold.eigenvalues(self.k_max)

    def resized(self, k_max) -> "SpectralCoefficients":
        """Zero-pad or truncate to band ``k_max`` (per direction)."""
        K_new = _as_tuple(k_max, self.manifold.dim, "k_max")
        out = np.zeros([2 * k + 1 for k in K_new], dtype=complex)
        src, dst = [], []
        for k_old, k in zip(self.k_max, K_new):
            m = min(k_old, k)
            src.append(slice(k_old - m, k_old + m + 1))
            dst.append(slice(k - m, k + m + 1))
        out[tuple(dst)] = self.values[tuple(src)]
        return SpectralCoefficients(self.manifold, out)

    def with_values(self, values: np.ndarray) -> "SpectralCoefficients":
        return SpectralCoefficients(self.manifold, values)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        flipped = np.conj(self.values[tuple(slice(None, None, -1) for _ in self.values.shape)])
        scale = max(np.abs(self.values).max(), 1e-300)
        return bool(np.abs(self.values - flipped).max() <= tol * scale)


def forward_transform(u: GridFunction, k_max=None) -> SpectralCoefficients:
    """Coefficients ``u_k = (1/vol) * sum_grid u(x) exp(-i<2 pi k/L, x>) dV``."""
    M = u.manifold
    if u.values.shape != M.grid_points and k_max is None:
        raise DimensionError(
            f"sample grid {u.values.shape} does not match manifold grid {M.grid_points}"
        )
    K = M.k_max if k_max is None else _as_tuple(k_max, M.dim, "k_max")
    for k, n in zip(K, u.values.shape):
        if n < 2 * k + 1:
            raise BandLimitError(f"grid of {n} points cannot resolve modes up to {k}")
    spec = np.fft.fftn(u.values) / u.values.size
    idx = np.ix_(*[np.arange(-k, k + 1) % n for k, n in zip(K, u.values.shape)])
    return SpectralCoefficients(M, spec[idx])


def inverse_transform(c: SpectralCoefficients, grid_points=None) -> GridFunction:
    """Samples of ``sum_k u_k e_k`` on the manifold grid (or a finer one)."""
    M = c.manifold
    M.check_band(c.k_max)
    n = M.grid_points if grid_points is None else _as_tuple(grid_points, M.dim, "grid")
    for k, ni in zip(c.k_max, n):
        if ni < 2 * k + 1:
            raise BandLimitError(f"grid of {ni} points cannot carry modes up to {k}")
    full = np.zeros(n, dtype=complex)
    idx = np.ix_(*[np.arange(-k, k + 1) % ni for k, ni in zip(c.k_max, n)])
    full[idx] = c.values
    vals = np.fft.ifftn(full) * full.size
    return GridFunction(M, vals)


def eigenvalue(M: ManifoldModel, k) -> float:
    k = np.asarray(_as_tuple(k, M.dim, "mode"), dtype=float)
    if np.any(np.abs(k) > np.asarray(M.k_max)):
        raise BandLimitError("mode outside the manifold band")
    return float(np.sum((k * M.wavenumber_unit) ** 2))


def counting_function(M: ManifoldModel, lam: float) -> int:
    """Number of lattice modes (with multiplicity) with eigenvalue <= ``lam``.

    Brute-force enumeration of the full lattice (not limited to ``k_max``),
    sliced along the first direction to bound memory.
    """
    if lam < 0:
        raise ParameterError("lambda must be non-negative")
    unit = M.wavenumber_unit
    reach = [int(math.floor(math.sqrt(lam) / w)) + 1 for w in unit]
    thresh = lam * (1 + 1e-12) + 1e-12
    rest = [np.arange(-r, r + 1) * w for r, w in zip(reach[1:], unit[1:])]
    rest_sq = np.zeros(1)
    for f in rest:
        rest_sq = (rest_sq[:, None] + (f**2)[None, :]).ravel()
    total = 0
    for k0 in range(-reach[0], reach[0] + 1):
        total += int(np.count_nonzero((k0 * unit[0]) ** 2 + rest_sq <= thresh))
    return total


def weyl_constant(M: ManifoldModel) -> float:
    """``vol / ((4 pi)^(m/2) Gamma(m/2 + 1))``."""
    m = M.dim
    return M.volume / ((4 * math.pi) ** (m / 2) * math.gamma(m / 2 + 1))


def sobolev_norm(c: SpectralCoefficients, s: float) -> float:
    """``||(1 + Delta)^(s/2) u||_L2`` with the ``vol(M)`` basis normalisation."""
    weight = (1.0 + c.eigenvalues()) ** s
    return float(math.sqrt(c.manifold.volume * np.sum(weight * np.abs(c.values) ** 2)))


def l2_norm(u: GridFunction) -> float:
    dV = float(np.prod(u.spacing))
    return float(math.sqrt(np.sum(np.abs(u.values) ** 2) * dV))


def geodesic_distance(M: ManifoldModel, x, y):
    """Flat wrap-around distance; broadcasts over leading axes of ``x``/``y``.

    For ``dim > 1`` the last axis indexes coordinates.
    """
    L = np.asarray(M.side_lengths)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if M.dim == 1 and (x.ndim == 0 or x.shape[-1:] != (1,)):
        x = x[..., None]
        y = y[..., None]
    d = np.abs(x - y) % L
    d = np.minimum(d, L - d)
    out = np.sqrt(np.sum(d**2, axis=-1))
    return float(out) if out.ndim == 0 else out


def distance_field(M: ManifoldModel, base, grid_points=None) -> np.ndarray:
    """Distance from every grid point to a base point (array of the grid shape)."""
    coords = M.grid_coords(grid_points)
    base = np.atleast_1d(np.asarray(base, dtype=float))
    sq = 0.0
    for X, b, L in zip(coords, base, M.side_lengths):
        d = np.abs(X - b) % L
        d = np.minimum(d, L - d)
        sq = sq + d**2
    return np.sqrt(sq)
