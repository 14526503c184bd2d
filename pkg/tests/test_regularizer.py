import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wavereg import (BandLimitError, ManifoldModel, ParameterError, RegularizationProcess,
                     ResolutionError, StabilityError, apply_spectral, apply_wave,
                     flagship_process, forward_transform, kernel_section, make_distribution,
                     mollify, regularize, support_radius)
from wavereg.filters import FilterSpec, multiplier_convolution, psi_tail_radius
from wavereg.harness import heat_process, sharp_process
from wavereg.regularizer import (cfl_limit, grid_sample, leapfrog, leapfrog_frequency,
                                 mass_outside, occupied_band, wave_snapshot)

# line kernel phi_c(x) F^(x / eps) / (2 pi eps) by adaptive quadrature (tests/oracles.py),
# sampled at x = j * 2 pi / 4096
KERNEL_Q = {
    0.25: {0: 1.909859317102744, 32: 1.8813905956558843, 196: 1.010142808661281,
           391: -0.21166953209730258, 587: -0.005115517783098746, 782: 0.0},
    0.0625: {0: 7.639437268410976, 5: 7.594827457653259, 40: 5.096004658103574,
             100: -0.9827906082178132},
}


@pytest.mark.parametrize("eps", sorted(KERNEL_Q))
def test_kernel_matches_line_kernel(flagship, eps):
    # 2c < pi, so no periodic images reach the sampled points
    u = kernel_section(flagship, (0.0,), eps, grid_points=4096)
    for j, ref in KERNEL_Q[eps].items():
        assert u.values[j] == pytest.approx(ref, abs=1e-13)
    # even kernel
    assert u.values[64] == pytest.approx(u.values[-64], abs=1e-13)


def test_band_rules(circle):
    P = flagship_process(circle)
    W = psi_tail_radius(P.cutoff)
    assert P.band_radius(0.01) == pytest.approx(max(400.0, 200.0 + W))
    assert P.band_radius(2**-12) == pytest.approx(4 * 2**12)
    mol = RegularizationProcess(circle, cutoff=None, kind="mollifier")
    assert mol.band_radius(0.1) == pytest.approx(40.0)
    assert heat_process(circle).band_radius(1.0) == pytest.approx(math.sqrt(40.0))
    assert sharp_process(circle).band_radius(0.1) == pytest.approx(40.0)
    with pytest.raises(ParameterError):
        P.band_radius(0.0)


def test_contrast_multipliers(circle):
    lam = np.array([0.0, 1.0, 9.9, 10.0, 10.1])
    assert np.allclose(heat_process(circle).multiplier(0.1, lam), np.exp(-0.1 * lam**2))
    assert np.array_equal(sharp_process(circle).multiplier(0.1, lam), [1, 1, 1, 1, 0])


def test_process_validation(circle, torus):
    with pytest.raises(ParameterError):
        RegularizationProcess(circle, cutoff=None, kind="wave")
    with pytest.raises(ParameterError):
        RegularizationProcess(torus, cutoff=None, kind="first_order")
    with pytest.raises(StabilityError):
        RegularizationProcess(circle, courant=1.5)


def test_band_below_filter_band_rejected(flagship, circle):
    with pytest.raises(BandLimitError):
        regularize(flagship, make_distribution("dirac", circle), 0.1, K=10)


def test_bandlimited_members_clip_band(flagship, circle, torus):
    bump = make_distribution("smooth_bump", circle)
    assert flagship.band(0.001, bump) == (30,)
    assert occupied_band(make_distribution("line_delta", torus)) == (None, 0)


_LIN_P = flagship_process(ManifoldModel.circle(8))


@given(st.floats(-3, 3), st.floats(-3, 3), st.sampled_from([0.5, 0.1, 0.03]))
def test_linearity(alpha, beta, eps):
    P = _LIN_P
    M = P.manifold
    d = make_distribution("dirac", M, 1.0)
    s = make_distribution("sawtooth_jump", M)
    K = P.band(eps)
    combo = d.coefficients(K).with_values(alpha * d.coefficients(K).values
                                          + beta * s.coefficients(K).values)
    lhs = regularize(P, d, eps, K, combo).values
    rhs = alpha * regularize(P, d, eps, K).values + beta * regularize(P, s, eps, K).values
    assert np.abs(lhs - rhs).max() <= 1e-13 * max(1.0, np.abs(rhs).max())


def test_real_input_gives_real_output(flagship, circle):
    u = apply_spectral(flagship, make_distribution("sawtooth_jump", circle), 0.1)
    assert u.real and not np.iscomplexobj(u.values)


def test_bump_nearly_unchanged_for_small_eps(flagship, circle):
    # the psi_c tail beyond a/eps - 30 decays super-polynomially in 1/eps
    w = make_distribution("smooth_bump", circle)
    c = w.coefficients(30)
    dev = []
    for j in range(5, 10):
        t = regularize(flagship, w, 2.0**-j, K=30)
        dev.append(np.abs(t.values - c.values).max() / np.abs(c.values).max())
    assert dev[0] > dev[1] > dev[2] > 1e-13
    assert dev[2] < 1e-10 and max(dev[3:]) < 1e-14


def test_grid_sample_dirac_is_grid_native(circle):
    u = grid_sample(make_distribution("dirac", circle), 64)
    ref = np.zeros(64)
    ref[0] = 64 / (2 * math.pi)
    assert np.allclose(u.values, ref, atol=1e-12)


def test_leapfrog_courant_one_splits_spike():
    # at unit Courant number leapfrog is exact on the lattice:
    # u(j dx) = (u0(x + j dx) + u0(x - j dx)) / 2
    n, dx = 128, 2 * math.pi / 128
    u0 = np.zeros(n)
    u0[0] = 1.0
    u = leapfrog(u0, (dx,), dx, 10)
    ref = np.zeros(n)
    ref[10] = ref[-10] = 0.5
    assert np.allclose(u, ref, atol=1e-14)


def test_leapfrog_cfl_guard():
    with pytest.raises(StabilityError):
        leapfrog(np.zeros(8), (0.1,), 0.2, 3)
    assert cfl_limit((0.1, 0.1)) == pytest.approx(0.1 / math.sqrt(2))


def test_wave_snapshot_finite_speed(circle):
    snap = wave_snapshot(make_distribution("dirac", circle), 1.0, 2048)
    assert mass_outside(snap, (0.0,), 1.0 + 3 * snap.spacing[0], power=2) < 1e-6


@pytest.mark.parametrize("zid", ["dirac", "sawtooth_jump", "smooth_bump"])
@pytest.mark.parametrize("eps", [0.25, 0.0625])
def test_wave_path_matches_dispersive_multiplier(circle, zid, eps):
    # leapfrog evolves mode k with its discrete frequency; the time integral then
    # applies m_eps at that frequency
    P = flagship_process(circle, wave_grid=512)
    w = make_distribution(zid, circle)
    got = forward_transform(apply_wave(P, w, eps), 128).values
    dx = 2 * math.pi / 512
    ds_max = min(P.courant * cfl_limit((dx,)), math.pi * eps / (10 * P.filter.b))
    steps = math.ceil(P.cutoff.support / ds_max - 1e-12)
    omega = leapfrog_frequency(np.arange(-128, 129), dx, P.cutoff.support / steps)
    ref = multiplier_convolution(P.filter, P.cutoff, eps, omega) * w.coefficients(128).values
    assert np.abs(got - ref).max() < 1e-13 * np.abs(ref).max()


def test_wave_path_agrees_with_spectral_on_bump(circle):
    P = flagship_process(circle, wave_grid=512)
    w = make_distribution("smooth_bump", circle)
    a = apply_wave(P, w, 0.1)
    b = apply_spectral(P, w, 0.1, grid_points=512)
    rel = np.linalg.norm(a.values - b.values) / np.linalg.norm(b.values)
    assert rel < 1e-2


def test_wave_path_resolution_guard(circle):
    P = flagship_process(circle, wave_grid=64)
    with pytest.raises(ResolutionError):
        apply_wave(P, make_distribution("dirac", circle), 0.05)


def test_mollify_is_plain_filter(circle):
    F = FilterSpec()
    w = make_distribution("sawtooth_jump", circle)
    u = mollify(F, w, 0.1, K=40)
    c = forward_transform(u, 40).values
    k = np.arange(-40, 41)
    assert np.allclose(c, F(0.1 * np.abs(k)) * w.coefficients(40).values, atol=1e-15)


def test_support_and_mass_helpers(circle):
    from wavereg import GridFunction
    vals = np.zeros(32)
    vals[[0, 1, 31, 4]] = [1.0, 0.5, 0.5, 1e-3]
    u = GridFunction(circle, vals, real=True)
    h = 2 * math.pi / 32
    assert support_radius(u, (0.0,), 1e-8) == pytest.approx(4 * h)
    assert support_radius(u, (0.0,), 1e-2) == pytest.approx(h)
    assert mass_outside(u, (0.0,), 1.5 * h) == pytest.approx(1e-3 / 2.001)
