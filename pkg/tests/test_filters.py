import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wavereg import (CutoffSpec, FilterSpec, ParameterError, ResolutionError, build_filter,
                     effective_multiplier, filter_fourier_transform, moment_check)
from wavereg.filters import (multiplier_convolution, multiplier_quadrature, operator_norm_bound,
                             plateau_bump, smooth_step)

import oracles

# adaptive-quadrature oracle values (tests/oracles.py), a = 1, b = 2, c = 0.5
FHAT = {0.0: 3.0, 0.5: 2.717391753588764, 1.0: 1.9682687602137081,
        2.5: -0.41993363520411575, 7.0: -0.12040355331459568, 15.0: 0.005775525616255633}
PSI = {0.0: 0.238732414637843, 1.0: 0.21624316495040272, 3.0: 0.08008319781632221,
       8.0: -0.008901951851762124}
MULT = [  # (eps, lambda, m_eps(lambda))
    (1.0, 0.0, 0.6644990846625733),
    (1.0, 1.5, 0.5376825732492662),
    (0.25, 0.0, 1.0533811425479462),
    (0.25, 3.0, 0.9923431986232238),
    (0.25, 4.0, 0.8894519130098971),
    (0.25, 6.0, 0.5138438977599892),
    (0.25, 8.0, 0.10440631636870451),
    (0.25, 10.0, -0.07531730053880215),
    (0.125, 9.5, 0.9298170548599585),
    (0.125, 40.0, 0.0005850917275902012),
]


@given(st.floats(-3, 4))
def test_smooth_step_symmetry(t):
    assert 0.0 <= float(smooth_step(t)) <= 1.0
    assert float(smooth_step(t) + smooth_step(1 - t)) == pytest.approx(1.0, abs=1e-15)


@given(st.floats(0, 1), st.floats(0, 1))
def test_smooth_step_monotone(s, t):
    lo, hi = min(s, t), max(s, t)
    assert smooth_step(lo) <= smooth_step(hi)


@given(st.floats(0.1, 3), st.floats(0.05, 3), st.floats(-10, 10))
def test_filter_plateau_and_support(a, gap, x):
    F = FilterSpec(a, a + gap)
    v = float(F(x))
    if abs(x) <= a:
        assert v == 1.0
    elif abs(x) >= a + gap:
        assert v == 0.0
    else:
        assert 0.0 <= v <= 1.0
    assert float(F(-x)) == v


def test_filter_parameters_validated():
    with pytest.raises(ParameterError):
        FilterSpec(2.0, 1.0)
    with pytest.raises(ParameterError):
        CutoffSpec(0.0)
    assert build_filter(1, 3) == FilterSpec(1.0, 3.0)


def test_filter_mass():
    F = FilterSpec(1.0, 2.5)
    x = np.linspace(-2.5, 2.5, 200001)
    assert F.mass == pytest.approx(np.trapezoid(F(x), x), rel=1e-9)


def test_filter_transform_matches_oracle():
    F = FilterSpec()
    s = np.array(sorted(FHAT))
    ref = np.array([FHAT[v] for v in s])
    assert np.allclose(F.fourier(s), ref, atol=1e-13, rtol=0)
    full = filter_fourier_transform(F, np.linspace(0, 15, 61))
    assert np.abs(full.imag).max() < 1e-13
    assert np.allclose(full.real[[0, 2, 4, 10, 28, 60]], ref, atol=1e-13)


def test_oracle_spot_check():
    assert oracles.filter_hat(2.5) == pytest.approx(FHAT[2.5], abs=1e-13)
    assert oracles.psi_c(3.0) == pytest.approx(PSI[3.0], abs=1e-15)


def test_fourier_table_consistent():
    F = FilterSpec()
    ds = math.pi / 20
    tab = F.fourier_table(ds)
    j = np.arange(0, 400, 37)
    assert np.allclose(tab[j], F.fourier(j * ds), atol=1e-13)


def test_transform_resolution_guard():
    F = FilterSpec()
    with pytest.raises(ResolutionError):
        filter_fourier_transform(F, [0.0, 5.0])
    with pytest.raises(ResolutionError):
        F.fourier([1e6])


def test_cutoff_transform_matches_oracle():
    phi = CutoffSpec()
    tab = phi.inverse_fourier_table(1.0)
    assert np.allclose(tab[[0, 1, 3, 8]], [PSI[k] for k in (0.0, 1.0, 3.0, 8.0)], atol=1e-15)


def test_moments():
    mom = moment_check(FilterSpec())
    assert mom[0] == pytest.approx(2 * math.pi, rel=1e-6)
    assert np.all(np.abs(mom[1:]) < 1e-6)


@pytest.mark.parametrize("path", ["lambda-convolution", "s-quadrature"])
def test_multiplier_matches_oracle(path):
    F, phi = FilterSpec(), CutoffSpec()
    for eps, lam, ref in MULT:
        got = effective_multiplier(F, phi, eps, [lam], path).values[0]
        assert got == pytest.approx(ref, abs=1e-12), (eps, lam)


@given(st.sampled_from([1.0, 0.5, 2**-3, 2**-6, 2**-9, 2**-12]), st.floats(0, 2.5))
def test_two_paths_agree(eps, frac):
    F, phi = FilterSpec(), CutoffSpec()
    lam = np.array([0.0, frac / eps, 2.5 / eps])
    a = multiplier_convolution(F, phi, eps, lam)
    b = multiplier_quadrature(F, phi, eps, lam)
    assert np.abs(a - b).max() < 1e-12


@given(st.floats(0.001, 1.0), st.floats(0, 1e4))
def test_multiplier_even(eps, lam):
    F, phi = FilterSpec(), CutoffSpec()
    v = multiplier_convolution(F, phi, eps, [lam, -lam])
    assert v[0] == pytest.approx(v[1], abs=1e-15)


def test_multiplier_tends_to_one_on_fixed_frequencies():
    F, phi = FilterSpec(), CutoffSpec()
    vals = effective_multiplier(F, phi, 2**-8, [0.0, 5.0, 100.0]).values
    assert np.allclose(vals, 1.0, atol=1e-14)


def test_quadrature_alias_guard():
    F, phi = FilterSpec(), CutoffSpec()
    with pytest.raises(ResolutionError):
        multiplier_quadrature(F, phi, 0.25, [1e5])
    with pytest.raises(ResolutionError):
        multiplier_quadrature(F, phi, 0.25, [1.0], step=1.0)


def test_no_cutoff_is_plain_filter():
    F = FilterSpec()
    lam = np.linspace(0, 100, 11)
    tab = effective_multiplier(F, None, 0.05, lam)
    assert tab.path == "no-cutoff"
    assert np.array_equal(tab.values, F(0.05 * lam))
    with pytest.raises(ParameterError):
        effective_multiplier(F, None, 1.5, lam)


def test_norm_bound_dominates_multiplier():
    F, phi = FilterSpec(), CutoffSpec()
    for eps in (0.5, 0.0625):
        lam = np.linspace(0, 3 * F.b / eps, 301)
        m = multiplier_convolution(F, phi, eps, lam)
        assert np.abs(m).max() <= operator_norm_bound(F, phi, eps) + 1e-12


@given(st.floats(-3, 3))
def test_plateau_bump_is_even(x):
    assert plateau_bump(x, 0.5, 1.0) == plateau_bump(-x, 0.5, 1.0)
