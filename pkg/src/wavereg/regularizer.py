"""Regularisation processes: spectral multiplier path and leapfrog wave path.

A process maps a distribution ``w`` and a scale ``eps`` to a smooth grid
function ``T_eps w``.  The production path multiplies coefficients by the
effective multiplier; the wave path integrates the wave equation with
leapfrog and accumulates the time integral defining ``T_eps``, so finite
propagation speed is visible in physical space.

Besides the flagship ``wave`` kind the module implements the comparison
processes used as controls:

* ``mollifier``   -- ``F(eps sqrt(lambda))`` (no time cutoff);
* ``heat``        -- ``exp(-eps lambda)``;
* ``sharp``       -- ``1[sqrt(lambda) <= 1/eps]``;
* ``first_order`` -- ``F(eps |k|)`` for ``D = -i d/dtheta`` on the circle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (BandLimitError, DegenerateInputError, ParameterError,
                     ResolutionError, StabilityError)
from .filters import (CutoffSpec, FilterSpec, effective_multiplier, operator_norm_bound,
                      psi_tail_radius)
from .manifold import (GridFunction, ManifoldModel, SpectralCoefficients, _as_tuple,
                       distance_field, inverse_transform)
from .zoo import TestDistribution, make_distribution

KINDS = ("wave", "mollifier", "heat", "sharp", "first_order")
SUPPORT_ETA = 1e-8


@dataclass(frozen=True)
class RegularizationProcess:
    """Manifold + filter + cutoff + evaluation path.

    ``manifold`` fixes the geometry; bands and grids are chosen per ``eps``.
    ``wave_grid`` and ``courant`` configure the leapfrog path, ``time_step``
    overrides the automatically chosen step.
    """

    manifold: ManifoldModel
    filter: FilterSpec = field(default_factory=FilterSpec)
    cutoff: CutoffSpec | None = field(default_factory=CutoffSpec)
    kind: str = "wave"
    path: str = "spectral"
    wave_grid: int = 512
    courant: float = 0.5
    time_step: float | None = None
    name: str = ""
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown process kind {self.kind!r}")
        if self.path not in ("spectral", "wave"):
            raise ParameterError(f"unknown evaluation path {self.path!r}")
        if self.kind == "wave" and self.cutoff is None:
            raise ParameterError("the wave process needs a time cutoff")
        if self.kind == "first_order" and self.manifold.kind != "circle":
            raise ParameterError("the first-order operator is implemented on the circle")
        if not 0 < self.courant <= 1:
            raise StabilityError("Courant number must lie in (0, 1]")

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind == "wave":
            return f"wave(a={self.filter.a},b={self.filter.b},c={self.cutoff.c})"
        return self.kind

    def with_cutoff(self, cutoff: CutoffSpec | None) -> "RegularizationProcess":
        kind = self.kind if cutoff is not None else "mollifier"
        return RegularizationProcess(self.manifold, self.filter, cutoff, kind, self.path,
                                     self.wave_grid, self.courant, self.time_step)

    def on(self, manifold: ManifoldModel) -> "RegularizationProcess":
        return RegularizationProcess(manifold, self.filter, self.cutoff, self.kind, self.path,
                                     self.wave_grid, self.courant, self.time_step, self.name)

    # -- spectral side ----------------------------------------------------
    def band_radius(self, eps: float) -> float:
        """Frequency beyond which the multiplier is below rounding level."""
        _check_eps(eps)
        b = self.filter.b
        base = 2.0 * b / eps
        if self.kind == "wave":
            return max(base, b / eps + psi_tail_radius(self.cutoff))
        if self.kind == "heat":
            return max(base, math.sqrt(40.0 / eps))
        if self.kind == "sharp":
            return max(base, 1.0 / eps)
        return base

    def band(self, eps: float, w: TestDistribution | None = None) -> tuple:
        """Per-direction mode band ``K_i`` for ``eps``, clipped to the modes ``w`` occupies."""
        R = self.band_radius(eps)
        K = [int(math.ceil(R / u)) for u in self.manifold.wavenumber_unit]
        if w is not None:
            occ = occupied_band(w)
            K = [k if o is None else min(k, o) for k, o in zip(K, occ)]
        return tuple(K)

    def multiplier(self, eps: float, freq) -> np.ndarray:
        """Scalar multiplier at frequencies ``freq = sqrt(lambda)`` (``|k|`` for D)."""
        _check_eps(eps)
        freq = np.asarray(freq, dtype=float)
        if self.kind == "mollifier" or self.kind == "first_order":
            return self.filter(eps * freq)
        if self.kind == "heat":
            return np.exp(-eps * freq**2)
        if self.kind == "sharp":
            return (freq <= 1.0 / eps).astype(float)
        uniq, inv = np.unique(freq.ravel(), return_inverse=True)
        key = (float(eps), hash(uniq.tobytes()), uniq.size)
        vals = self._cache.get(key)
        if vals is None:
            vals = effective_multiplier(self.filter, self.cutoff, eps, uniq).values
            if len(self._cache) > 64:
                self._cache.clear()
            self._cache[key] = vals
        return vals[inv].reshape(freq.shape)

    def mode_multiplier(self, eps: float, c: SpectralCoefficients) -> np.ndarray:
        """Multiplier on the mode array of ``c`` (only occupied modes are evaluated)."""
        freq = self.mode_frequencies(c)
        out = np.zeros(freq.shape)
        mask = c.values != 0
        if mask.any():
            out[mask] = self.multiplier(eps, freq[mask])
        return out

    def mode_frequencies(self, c: SpectralCoefficients) -> np.ndarray:
        if self.kind == "first_order":
            k = c.manifold.mode_axes(c.k_max)[0]
            return np.abs(k * c.manifold.wavenumber_unit[0]).astype(float)
        return np.sqrt(c.eigenvalues())

    def norm_bound(self, eps: float) -> float:
        """Operator norm bound on L2 from the time-integral representation."""
        if self.kind == "wave":
            return operator_norm_bound(self.filter, self.cutoff, eps)
        if self.kind in ("mollifier", "first_order"):
            return operator_norm_bound(self.filter, None, eps)
        return 1.0


def _check_eps(eps: float):
    if not 0 < eps <= 1:
        raise ParameterError(f"epsilon must lie in (0, 1], got {eps}")


def occupied_band(w: TestDistribution) -> tuple:
    """Per-direction largest mode index ``w`` can occupy (``None`` = unbounded)."""
    M = w.manifold
    if w.band is not None:
        return tuple(int(math.floor(w.band / u * (1 + 1e-12))) for u in M.wavenumber_unit)
    if w.id == "line_delta":
        return (None, 0)
    return (None,) * M.dim


def regularize(P: RegularizationProcess, w: TestDistribution, eps: float, K=None,
               c: SpectralCoefficients | None = None) -> SpectralCoefficients:
    """Coefficients of ``T_eps w`` on band ``K`` (default: the band rule)."""
    K = _resolve_band(P, w, eps, K)
    if c is None:
        c = w.coefficients(K)
    return c.with_values(P.mode_multiplier(eps, c) * c.values)


def _resolve_band(P: RegularizationProcess, w: TestDistribution, eps: float, K) -> tuple:
    if K is None:
        return P.band(eps, w)
    K = tuple(int(v) for v in _as_tuple(K, w.manifold.dim, "band"))
    need = [int(math.ceil(2 * P.filter.b / eps / u)) for u in P.manifold.wavenumber_unit]
    occ = occupied_band(w)
    for k, n, o in zip(K, need, occ):
        if k < n and (o is None or k < o):
            raise BandLimitError(f"band {k} below the filter band 2b/eps = {n}")
    return K


def apply_spectral(P: RegularizationProcess, w: TestDistribution, eps: float, K=None,
                   grid_points=None) -> GridFunction:
    """``sum_k m_eps(sqrt(lambda_k)) w_k e_k`` sampled on a uniform grid."""
    c = regularize(P, w, eps, K)
    u = inverse_transform(c, grid_points)
    return GridFunction(u.manifold, u.values.real if w.real else u.values, real=w.real)


def kernel_section(P: RegularizationProcess, x0, eps: float, K=None, grid_points=None) -> GridFunction:
    """Kernel row ``K_eps(., x0)``: the process applied to a Dirac mass at ``x0``."""
    return apply_spectral(P, make_distribution("dirac", P.manifold, x0), eps, K, grid_points)


def mollify(F: FilterSpec, w: TestDistribution, eps: float, K=None, grid_points=None) -> GridFunction:
    """Periodic convolution with ``rho_eps``, ``rho^(xi) = F(|xi|)``: coefficient-wise ``F(eps sqrt(lambda))``."""
    P = RegularizationProcess(w.manifold, F, None, kind="mollifier")
    return apply_spectral(P, w, eps, K, grid_points)


def mollifier_coefficients(F: FilterSpec, w: TestDistribution, eps: float, K) -> SpectralCoefficients:
    c = w.coefficients(K)
    return c.with_values(F(eps * np.sqrt(c.eigenvalues())) * c.values)


# -- geometry of supports ---------------------------------------------------
def support_distance(M: ManifoldModel, base, grid_points=None) -> np.ndarray:
    """Distance from each grid point to ``base``.

    ``base`` is a point, a :class:`TestDistribution` (its declared support)
    or ``None`` (the whole manifold).
    """
    shape = M.grid_points if grid_points is None else _as_tuple(grid_points, M.dim, "grid")
    if base is None:
        return np.zeros(shape)
    if isinstance(base, TestDistribution):
        if base.support == "full":
            return np.zeros(shape)
        if base.support == "line":
            comp = base.wavefront[0]
            X = M.grid_coords(shape)[comp.axis]
            L = M.side_lengths[comp.axis]
            d = np.abs(X - comp.where[comp.axis]) % L
            return np.minimum(d, L - d)
        d = distance_field(M, base.support_center, shape)
        return np.maximum(d - base.support_radius, 0.0)
    return distance_field(M, base, shape)


def support_radius(u: GridFunction, base, eta: float = SUPPORT_ETA) -> float:
    """Largest distance from ``base`` among grid points where ``|u| > eta max|u|``."""
    if not 0 < eta < 1:
        raise ParameterError("eta must lie in (0, 1)")
    mag = np.abs(u.values)
    top = mag.max() if mag.size else 0.0
    if not top > 0:
        raise DegenerateInputError("support radius of the zero function")
    d = support_distance(u.manifold, base, u.values.shape)
    return float(d[mag > eta * top].max())


def mass_outside(u: GridFunction, base, radius: float, power: int = 1) -> float:
    """Fraction of ``sum |u|^power`` carried by grid points further than ``radius`` from ``base``."""
    mag = np.abs(u.values) ** power
    total = mag.sum()
    if not total > 0:
        raise DegenerateInputError("mass of the zero function")
    d = support_distance(u.manifold, base, u.values.shape)
    return float(mag[d > radius].sum() / total)


# -- leapfrog wave path -----------------------------------------------------
def _neg_laplacian_h(u: np.ndarray, dx: tuple) -> np.ndarray:
    """Second-order periodic finite-difference ``div grad`` (i.e. ``-Delta_h``)."""
    out = np.zeros_like(u)
    for ax, h in enumerate(dx):
        out += (np.roll(u, 1, ax) - 2 * u + np.roll(u, -1, ax)) / h**2
    return out


def cfl_limit(dx: tuple) -> float:
    return 1.0 / math.sqrt(sum(1.0 / h**2 for h in dx))


def grid_sample(w: TestDistribution, grid_points) -> GridFunction:
    """Sample ``w`` truncated to the full FFT band of the grid (Nyquist mode included).

    A Dirac mass at a grid point becomes the grid-native ``delta_ij / dV``.
    """
    M = w.manifold
    n = _as_tuple(grid_points, M.dim, "grid")
    K = tuple(ni // 2 for ni in n)
    c = w.coefficients(K).values
    full = np.zeros(n, dtype=complex)
    # for even n the +n/2 and -n/2 modes alias to the same FFT bin; keep one
    sl = tuple(slice(0, 2 * k if ni % 2 == 0 else 2 * k + 1) for k, ni in zip(K, n))
    idx_kept = np.ix_(*[(np.arange(-k, k + 1) % ni)[s] for k, ni, s in zip(K, n, sl)])
    full[idx_kept] = c[sl]
    vals = np.fft.ifftn(full) * full.size
    Mg = M.with_band(tuple(max(0, (ni - 1) // 2) for ni in n), n)
    return GridFunction(Mg, vals.real if w.real else vals, real=w.real)


def leapfrog(u0: np.ndarray, dx: tuple, ds: float, steps: int, callback=None) -> np.ndarray:
    """Integrate ``u_ss = -Delta_h u`` with ``u_s(0) = 0`` for ``steps`` steps.

    ``callback(j, u_j)`` is invoked for ``j = 0 .. steps``.
    """
    if ds > cfl_limit(dx) * (1 + 1e-12):
        raise StabilityError(f"time step {ds} exceeds the CFL limit {cfl_limit(dx)}")
    if callback is not None:
        callback(0, u0)
    if steps == 0:
        return u0
    prev = u0
    cur = u0 + 0.5 * ds**2 * _neg_laplacian_h(u0, dx)
    if callback is not None:
        callback(1, cur)
    for j in range(2, steps + 1):
        prev, cur = cur, 2 * cur - prev + ds**2 * _neg_laplacian_h(cur, dx)
        if callback is not None:
            callback(j, cur)
    return cur


def wave_snapshot(w: TestDistribution, s: float, grid_points, courant: float = 1.0) -> GridFunction:
    """Leapfrog solution ``u(s)`` of the wave equation with ``u(0) = w``, ``u_s(0) = 0``.

    The step is ``s / N`` with ``N`` the smallest count respecting the CFL
    limit at the given Courant factor; at factor 1 the numerical domain of
    dependence matches the light cone.
    """
    u0 = grid_sample(w, grid_points)
    dx = u0.spacing
    limit = courant * cfl_limit(dx)
    steps = int(math.ceil(s / limit - 1e-12))
    ds = s / steps if steps else 0.0
    u = leapfrog(u0.values, dx, ds, steps)
    return GridFunction(u0.manifold, u, real=u0.real)


def apply_wave(P: RegularizationProcess, w: TestDistribution, eps: float, k_wave=None) -> GridFunction:
    """``T_eps w`` by leapfrog time stepping on the ``wave_grid`` grid.

    ``w`` is first truncated to ``k_wave`` (default ``wave_grid // 4``).  The
    time integral uses the even-in-s fold
    ``(1/pi) int_0^2c phi_c(s) (F_eps)^(s) u(s) ds`` with trapezoid weights.
    Requires ``b / eps`` inside the truncation band.
    """
    if P.kind != "wave":
        raise ParameterError("the wave path is defined for the wave process only")
    _check_eps(eps)
    M = P.manifold
    n = (P.wave_grid,) * M.dim
    kw = P.wave_grid // 4 if k_wave is None else int(k_wave)
    unit_min = float(np.min(M.wavenumber_unit))
    if P.filter.b / eps > kw * unit_min:
        raise ResolutionError(
            f"eps = {eps} puts the filter band b/eps beyond the wave grid band {kw * unit_min:.1f}"
        )
    Mw = M.with_band((kw,) * M.dim, n)
    c = w.coefficients((kw,) * M.dim)
    u0 = inverse_transform(SpectralCoefficients(Mw, c.values)).values
    if w.real:
        u0 = u0.real
    dx = Mw.spacing
    limit = cfl_limit(dx)
    if P.time_step is not None:
        if P.time_step > limit * (1 + 1e-12):
            raise StabilityError(f"time step {P.time_step} exceeds the CFL limit {limit}")
        ds_max = P.time_step
    else:
        ds_max = min(P.courant * limit, math.pi * eps / (10 * P.filter.b))
    reach = P.cutoff.support
    steps = int(math.ceil(reach / ds_max - 1e-12))
    ds = reach / steps
    s = np.arange(steps + 1) * ds
    weights = np.full(steps + 1, ds)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    g = P.cutoff(s) * P.filter.fourier(s / eps) / eps * weights / math.pi
    acc = np.zeros_like(u0)

    def gather(j, u):
        if g[j] != 0.0:
            np.add(acc, g[j] * u, out=acc)

    leapfrog(u0, dx, ds, steps, gather)
    return GridFunction(Mw, acc, real=w.real)


def leapfrog_frequency(k_phys, dx: float, ds: float) -> np.ndarray:
    """Discrete angular frequency of the leapfrog scheme for physical wavenumber ``k``."""
    nu = ds / dx
    arg = nu * np.sin(0.5 * np.asarray(k_phys) * dx)
    return 2.0 / ds * np.arcsin(np.clip(arg, -1, 1))
