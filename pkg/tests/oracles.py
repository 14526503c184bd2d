"""Independent reference computations (adaptive quadrature, direct sums).

Nothing here calls into wavereg's transforms: the filter and cutoff are
re-implemented from their defining formulas and integrated with QUADPACK.
"""
import math

import numpy as np
from scipy import integrate


def step(t):
    if t <= 0:
        return 0.0
    if t >= 1:
        return 1.0
    g0 = math.exp(-1.0 / t)
    g1 = math.exp(-1.0 / (1.0 - t))
    return g0 / (g0 + g1)


def bump(x, inner, outer):
    return step((outer - abs(x)) / (outer - inner))


def filter_hat(s, a=1.0, b=2.0):
    """int F(x) cos(s x) dx, F plateau on [-a, a], zero beyond b."""
    flat = 2 * a * (1.0 if s == 0 else math.sin(s * a) / (s * a))
    if s == 0:
        glue = integrate.quad(lambda x: bump(x, a, b), a, b, epsabs=1e-15, epsrel=1e-13)[0]
    else:
        glue = integrate.quad(lambda x: bump(x, a, b), a, b, weight="cos", wvar=s,
                              epsabs=1e-15, epsrel=1e-13, limit=400)[0]
    return flat + 2 * glue


def psi_c(nu, c=0.5):
    """(1/2pi) int phi_c(s) cos(nu s) ds."""
    flat = 2 * c * (1.0 if nu == 0 else math.sin(nu * c) / (nu * c))
    if nu == 0:
        glue = integrate.quad(lambda s: bump(s, c, 2 * c), c, 2 * c, epsabs=1e-15)[0]
    else:
        glue = integrate.quad(lambda s: bump(s, c, 2 * c), c, 2 * c, weight="cos", wvar=nu,
                              epsabs=1e-15, epsrel=1e-13, limit=400)[0]
    return (flat + 2 * glue) / (2 * math.pi)


def kernel_on_line(x, eps, a=1.0, b=2.0, c=0.5):
    """Kernel of m_eps(|D|) on the line: phi_c(x) F^(x / eps) / (2 pi eps)."""
    return bump(x, c, 2 * c) * filter_hat(x / eps, a, b) / (2 * math.pi * eps)


def multiplier(lam, eps, a=1.0, b=2.0, c=0.5):
    """m_eps(lam) = int kernel(x) cos(lam x) dx over the support of phi_c."""
    f = lambda x: kernel_on_line(x, eps, a, b, c)
    val = integrate.quad(f, 0.0, 2 * c, weight="cos", wvar=lam, epsabs=1e-14, limit=800)[0]
    return 2 * val


def circle_count(lam):
    return 2 * int(math.isqrt(int(math.floor(lam)))) + 1 if lam >= 0 else 0


def torus_count(lam, L1=2 * math.pi, L2=2 * math.pi):
    """Lattice points (2pi k1/L1, 2pi k2/L2) with squared norm <= lam, by a plain loop."""
    w1, w2 = 2 * math.pi / L1, 2 * math.pi / L2
    r1 = int(math.sqrt(lam) / w1) + 1
    total = 0
    for k1 in range(-r1, r1 + 1):
        rest = lam - (k1 * w1) ** 2
        if rest < 0:
            continue
        total += 2 * int(math.floor(math.sqrt(rest) / w2 + 1e-12)) + 1
    return total


def dirac_series_value(x, x0, modes, weights):
    """sum_k weights_k exp(i k (x - x0)) / 2pi on the circle, by an explicit loop."""
    total = 0j
    for k, w in zip(modes, weights):
        total += w * complex(math.cos(k * (x - x0)), math.sin(k * (x - x0)))
    return total / (2 * math.pi)
