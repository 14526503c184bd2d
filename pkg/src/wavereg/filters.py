"""Filter F, time cutoff phi_c and the effective spectral multiplier.

The regularising operator acts on an eigenfunction with frequency
``lam = sqrt(eigenvalue)`` by the scalar

    m_eps(lam) = (1/2pi) int phi_c(s) (F_eps)^(s) cos(s lam) ds,
    (F_eps)^(s) = F^(s/eps) / eps,

which equals ``(psi_c * F(eps .))(lam)`` with ``psi_c`` the inverse Fourier
transform of ``phi_c``.  Both routes are implemented: the convolution in
frequency space (production) and direct quadrature in ``s`` (cross-check).

Fourier convention: ``F^(s) = int F(x) exp(-i s x) dx``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ResolutionError

#: relative level below which tabulated transforms are treated as zero
TAIL_TOL = 1e-16


def smooth_step(t):
    """C-infinity step ``g(t) / (g(t) + g(1 - t))`` with ``g(t) = exp(-1/t)``.

    Equals 0 for ``t <= 0`` and 1 for ``t >= 1``.
    """
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        g0 = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        s = 1.0 - t
        g1 = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        out = g0 / (g0 + g1)
    return np.where(t <= 0, 0.0, np.where(t >= 1, 1.0, out))


def plateau_bump(x, inner: float, outer: float):
    """Even bump equal to 1 on ``[-inner, inner]`` and 0 outside ``[-outer, outer]``."""
    return smooth_step((outer - np.abs(x)) / (outer - inner))


@dataclass(frozen=True)
class FilterSpec:
    """Even plateau filter: ``F = 1`` on ``[-a, a]``, ``F = 0`` outside ``[-b, b]``."""

    a: float = 1.0
    b: float = 2.0
    resolution: int = 2**16

    def __post_init__(self):
        if not (0 < self.a < self.b):
            raise ParameterError(f"filter needs 0 < a < b, got a={self.a}, b={self.b}")
        if self.resolution < 1024:
            raise ParameterError("filter resolution below 1024 samples")

    def __call__(self, x):
        return plateau_bump(x, self.a, self.b)

    @property
    def mass(self) -> float:
        """``int F = 2a + (b - a)`` (the glue profile is antisymmetric about 1/2)."""
        return self.a + self.b

    @property
    def quadrature_step(self) -> float:
        return 2.0 * self.b / self.resolution

    def fourier(self, s) -> np.ndarray:
        """``F^(s)`` by trapezoidal quadrature on ``resolution`` points over ``[-b, b]``.

        Real-valued (cosine form, using evenness).  Exact to rounding for
        ``|s| < pi / h`` because ``F`` is smooth and compactly supported.
        """
        s = np.asarray(s, dtype=float)
        h = self.quadrature_step
        if s.size and np.abs(s).max() >= 0.5 * math.pi / h:
            raise ResolutionError("frequency beyond half the quadrature Nyquist limit")
        x = np.arange(1, self.resolution // 2) * h
        fx = self(x)
        keep = fx > 0
        x, fx = x[keep], fx[keep]
        flat = s.ravel()
        out = np.empty(flat.shape)
        for start in range(0, flat.size, 256):
            blk = flat[start:start + 256]
            out[start:start + 256] = h * (1.0 + 2.0 * np.cos(np.outer(blk, x)) @ fx)
        return out.reshape(s.shape)

    def fourier_table(self, ds: float) -> np.ndarray:
        """``F^(j ds)`` for ``j = 0, 1, ...`` from one zero-padded FFT."""
        return _fourier_table(self.a, self.b, self.resolution, float(ds))

    def decay_radius(self, tol: float = TAIL_TOL) -> float:
        """Smallest ``R`` with ``|F^(s)| < tol * F^(0)`` for all ``s > R``."""
        ds = math.pi / (10 * self.b)
        tab = self.fourier_table(ds)
        big = np.nonzero(np.abs(tab) >= tol * tab[0])[0]
        return float((big[-1] + 1) * ds)


@functools.lru_cache(maxsize=32)
def _fourier_table(a: float, b: float, resolution: int, ds: float) -> np.ndarray:
    period = 2.0 * math.pi / ds
    if period < 2 * b:
        raise ResolutionError("table spacing too coarse to resolve the filter width")
    n_fft = 1 << int(math.ceil(math.log2(period * resolution / (2 * b))))
    h = period / n_fft
    x = np.fft.fftfreq(n_fft, 1.0 / n_fft) * h
    vals = h * np.fft.rfft(plateau_bump(x, a, b)).real
    # beyond half the sampling Nyquist the table is aliasing-dominated
    keep = int(0.5 * math.pi / h / ds)
    vals = vals[:keep]
    vals.setflags(write=False)
    return vals


@dataclass(frozen=True)
class CutoffSpec:
    """Even time cutoff: ``phi_c = 1`` on ``[-c, c]``, 0 outside ``[-2c, 2c]``."""

    c: float = 0.5
    resolution: int = 2**14

    def __post_init__(self):
        if not self.c > 0:
            raise ParameterError("cutoff parameter c must be positive")

    def __call__(self, s):
        return plateau_bump(s, self.c, 2.0 * self.c)

    @property
    def support(self) -> float:
        return 2.0 * self.c

    def inverse_fourier_table(self, dnu: float) -> np.ndarray:
        """``psi_c(j dnu) = (1/2pi) int phi_c(s) cos(j dnu s) ds``, ``j >= 0``."""
        return _psi_table(self.c, self.resolution, float(dnu))

    def decay_radius(self, tol: float = TAIL_TOL) -> float:
        """Smallest ``W`` with ``|psi_c(nu)| < tol * psi_c(0)`` for ``nu > W``."""
        dnu = 0.05 / self.c
        tab = self.inverse_fourier_table(dnu)
        big = np.nonzero(np.abs(tab) >= tol * tab[0])[0]
        return float((big[-1] + 1) * dnu)


@functools.lru_cache(maxsize=64)
def _psi_table(c: float, resolution: int, dnu: float) -> np.ndarray:
    # refine the spacing by an integer factor until one period holds supp phi_c
    q = max(1, int(math.ceil(4 * c * dnu / (2.0 * math.pi) * 1.0001)))
    fine = dnu / q
    period = 2.0 * math.pi / fine
    n_fft = 1 << int(math.ceil(math.log2(period * resolution / (4 * c))))
    h = period / n_fft
    s = np.fft.fftfreq(n_fft, 1.0 / n_fft) * h
    vals = h * np.fft.rfft(plateau_bump(s, c, 2 * c)).real / (2 * math.pi)
    keep = int(0.5 * math.pi / h / fine)
    vals = vals[:keep:q]
    vals.setflags(write=False)
    return vals


def build_filter(a: float = 1.0, b: float = 2.0, resolution: int = 2**16) -> FilterSpec:
    return FilterSpec(float(a), float(b), int(resolution))


def filter_fourier_transform(F: FilterSpec, s_grid) -> np.ndarray:
    """Complex ``F^`` on ``s_grid`` by full exponential quadrature.

    The imaginary part vanishes by evenness; it is returned so callers can
    check that.  Raises :class:`ResolutionError` when consecutive grid
    points are further apart than ``pi / b`` or exceed the quadrature band.
    """
    s = np.asarray(s_grid, dtype=float).ravel()
    if s.size > 1 and np.diff(np.sort(s)).max() > math.pi / F.b:
        raise ResolutionError("s-grid spacing exceeds the oscillation scale pi/b of F^")
    h = F.quadrature_step
    if s.size and np.abs(s).max() >= 0.5 * math.pi / h:
        raise ResolutionError("frequency beyond half the quadrature Nyquist limit")
    x = (np.arange(F.resolution) - F.resolution // 2) * h
    fx = F(x)
    keep = fx > 0
    x, fx = x[keep], fx[keep]
    out = np.empty(s.shape, dtype=complex)
    for start in range(0, s.size, 128):
        blk = s[start:start + 128]
        out[start:start + 128] = h * (np.exp(-1j * np.outer(blk, x)) @ fx)
    return out


def regularized_moments(fourier, k_max: int, width: float, ds: float) -> np.ndarray:
    """``int s^k G(s) exp(-s^2 / (2 width^2)) ds`` for ``k = 0..k_max``.

    ``fourier`` evaluates ``G`` on an array.  The Gaussian convergence factor
    changes the k-th moment of ``G = F^`` by ``2 pi (F * rho)^(k)(0) - 2 pi
    F^(k)(0)`` with ``rho`` a Gaussian of width ``1/width``; for ``F`` flat on
    ``[-a, a]`` this is ``O(exp(-(a width)^2 / 2))``.  The symmetric grid
    makes odd moments cancel to rounding.
    """
    s_max = 9.0 * width
    n = int(math.ceil(s_max / ds))
    s = np.arange(-n, n + 1) * ds
    g = fourier(s) * np.exp(-0.5 * (s / width) ** 2)
    return np.array([ds * np.sum(s**k * g) for k in range(k_max + 1)])


def moment_check(F: FilterSpec, k_max: int = 6) -> np.ndarray:
    """Moments ``int s^k F^(s) ds``; ideal values ``2 pi`` (k = 0) and 0 (k >= 1)."""
    if k_max > 8:
        raise ParameterError("moment_check supports k_max <= 8")
    width = 12.0 / F.a
    ds = math.pi / (10 * F.b)
    tab = F.fourier_table(ds)
    n_need = int(math.ceil(9.0 * width / ds)) + 1
    if n_need > tab.size:
        raise ResolutionError("filter table too short for the moment quadrature")

    def fhat(s):
        return tab[np.rint(np.abs(s) / ds).astype(int)]

    return regularized_moments(fhat, k_max, width, ds)


@dataclass(frozen=True)
class MultiplierTable:
    eps: float
    lam: np.ndarray
    values: np.ndarray
    path: str


def _convolution_step(F: FilterSpec, phi: CutoffSpec, eps: float) -> float:
    # trapezoid in nu is exact up to aliasing of the integrand's s-spectrum,
    # which lives in |s| <= 2c + eps * R_F
    reach = phi.support + eps * _filter_radius(F)
    return 2.0 * math.pi / (1.25 * reach)


@functools.lru_cache(maxsize=32)
def _filter_radius(F: FilterSpec) -> float:
    return F.decay_radius()


@functools.lru_cache(maxsize=32)
def _cutoff_radius(phi: CutoffSpec) -> float:
    return phi.decay_radius()


def psi_tail_radius(phi: CutoffSpec) -> float:
    return _cutoff_radius(phi)


def multiplier_convolution(F: FilterSpec, phi: CutoffSpec, eps: float, lam) -> np.ndarray:
    """``m_eps(lam) = int psi_c(nu) F(eps (lam - nu)) d nu`` by trapezoid in ``nu``."""
    lam = np.asarray(lam, dtype=float)
    h = _convolution_step(F, phi, eps)
    W = _cutoff_radius(phi)
    tab = phi.inverse_fourier_table(h)
    n = min(int(math.ceil(W / h)), tab.size - 1)
    j = np.arange(-n, n + 1)
    psi = tab[np.abs(j)] * h
    nu = j * h
    flat = lam.ravel()
    out = np.empty(flat.shape)
    chunk = max(1, 2_000_000 // nu.size)
    for start in range(0, flat.size, chunk):
        blk = flat[start:start + chunk]
        arg = np.abs(eps * (blk[:, None] - nu[None, :]))
        # F is exactly 1 on the plateau and 0 beyond b: evaluate the glue only
        vals = (arg <= F.a).astype(float)
        glue = (arg > F.a) & (arg < F.b)
        vals[glue] = F(arg[glue])
        out[start:start + chunk] = vals @ psi
    return out.reshape(lam.shape)


def s_quadrature_grid(F: FilterSpec, phi: CutoffSpec, eps: float, oversample: int = 1):
    """Nodes, trapezoid weights and ``phi_c (F_eps)^`` on ``[0, 2c]``.

    Step ``pi eps / (10 b oversample)``, aligned with the ``F^`` FFT table.
    """
    if oversample < 1 or int(oversample) != oversample:
        raise ResolutionError("oversample must be a positive integer")
    dr = math.pi / (10 * F.b * oversample)
    ds = eps * dr
    n = int(math.ceil(phi.support / ds)) + 1
    tab = F.fourier_table(dr)
    if n > tab.size:
        raise ResolutionError("filter table too short for this epsilon")
    s = np.arange(n) * ds
    w = np.full(n, ds)
    w[0] = 0.5 * ds
    g = phi(s) * tab[:n] / eps
    return s, w, g


def _default_oversample(F: FilterSpec, phi: CutoffSpec, eps: float) -> int:
    """Refinement of the ``pi eps / (10 b)`` step so it is at most ``c / 100``."""
    return max(1, int(math.ceil(math.pi * eps / (10 * F.b) / (phi.c / 100) - 1e-9)))


def multiplier_quadrature(F: FilterSpec, phi: CutoffSpec, eps: float, lam,
                          step: float | None = None) -> np.ndarray:
    """``m_eps(lam) = (1/pi) int_0^2c phi_c(s) (F_eps)^(s) cos(s lam) ds``.

    The trapezoid rule aliases frequency ``lam`` onto ``2 pi / ds - lam``;
    frequencies whose alias falls inside the filter band ``b / eps`` are
    rejected.  The default step also resolves the glue of ``phi_c``
    (at most ``c / 100``), which matters for ``eps`` near 1.
    """
    max_step = math.pi * eps / (10 * F.b)
    oversample = _default_oversample(F, phi, eps)
    if step is not None:
        if step > max_step * (1 + 1e-12):
            raise ResolutionError(f"s-step {step} coarser than pi*eps/(10b) = {max_step}")
        oversample = int(math.ceil(max_step / step - 1e-9))
    s, w, g = s_quadrature_grid(F, phi, eps, oversample)
    wg = w * g / math.pi
    lam = np.asarray(lam, dtype=float)
    ds = s[1] - s[0]
    if lam.size and np.abs(lam).max() > 2 * math.pi / ds - 2 * F.b / eps:
        raise ResolutionError("frequency too high for the s-quadrature step; refine the step")
    flat = lam.ravel()
    out = np.empty(flat.shape)
    chunk = max(1, 4_000_000 // s.size)
    for start in range(0, flat.size, chunk):
        blk = flat[start:start + chunk]
        out[start:start + chunk] = np.cos(np.outer(blk, s)) @ wg
    return out.reshape(lam.shape)


def operator_norm_bound(F: FilterSpec, phi: CutoffSpec | None, eps: float) -> float:
    """``(1/pi) int_0^inf |phi_c(s) (F_eps)^(s)| ds`` (no cutoff: ``phi = 1``)."""
    if phi is None:
        dr = math.pi / (10 * F.b)
        tab = F.fourier_table(dr)
        w = np.full(tab.size, dr)
        w[0] *= 0.5
        return float(np.sum(w * np.abs(tab)) / math.pi)
    s, w, g = s_quadrature_grid(F, phi, eps, _default_oversample(F, phi, eps))
    return float(np.sum(w * np.abs(g)) / math.pi)


def effective_multiplier(F: FilterSpec, phi: CutoffSpec | None, eps: float, lam_grid,
                         path: str = "lambda-convolution") -> MultiplierTable:
    if not 0 < eps <= 1:
        raise ParameterError("epsilon must lie in (0, 1]")
    lam = np.asarray(lam_grid, dtype=float)
    if phi is None:
        vals = F(eps * lam)
    elif path == "lambda-convolution":
        vals = multiplier_convolution(F, phi, eps, lam)
    elif path == "s-quadrature":
        vals = multiplier_quadrature(F, phi, eps, lam)
    else:
        raise ParameterError(f"unknown multiplier path {path!r}")
    return MultiplierTable(eps, lam, vals, path if phi is not None else "no-cutoff")
