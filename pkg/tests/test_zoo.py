import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wavereg import (GridFunction, ManifoldModel, ParameterError, UnknownDistributionError,
                     ZOO_IDS, inverse_transform, make_distribution, pair, zoo_listing)
from wavereg.zoo import sobolev_verdict


def test_ids():
    assert set(ZOO_IDS) == {"dirac", "dirac_derivative", "sawtooth_jump", "line_delta",
                            "smooth_bump", "plane_wave"}
    with pytest.raises(UnknownDistributionError):
        make_distribution("nope", ManifoldModel.circle(4))


def test_dirac_coefficients(circle):
    w = make_distribution("dirac", circle, 0.7)
    c = w.coefficients(5)
    k = np.arange(-5, 6)
    assert np.allclose(c.values, np.exp(-1j * k * 0.7) / (2 * math.pi), atol=1e-16)


def test_sawtooth_samples(circle):
    # partial sums converge to the zero-mean sawtooth (x - pi)/(2 pi) ... with a jump at x0
    w = make_distribution("sawtooth_jump", circle)
    u = inverse_transform(w.coefficients(2000), 8192)
    x = u.coords()[0]
    inner = (x > 0.5) & (x < 2 * math.pi - 0.5)
    target = (math.pi - x[inner]) / (2 * math.pi)
    assert np.abs(u.values.real[inner] - target).max() < 1e-3
    assert np.abs(u.values.imag).max() < 1e-12


def test_bump_is_gaussian_like(circle):
    w = make_distribution("smooth_bump", circle)
    assert w.band == 30.0
    c = w.coefficients(40)
    assert c[31] == 0 and c[30] != 0
    assert c.is_hermitian()
    assert w.support_radius < math.pi


def test_line_delta_torus(torus):
    w = make_distribution("line_delta", torus, (1.0, 0.3))
    c = w.coefficients((4, 3))
    assert np.count_nonzero(c.values[:, 3]) == 9
    assert np.count_nonzero(c.values) == 9
    assert w.is_singular((1.0, 2.0), (1.0, 0.0))
    assert not w.is_singular((1.0, 2.0), (0.0, 1.0))
    with pytest.raises(ParameterError):
        make_distribution("line_delta", ManifoldModel.circle(4))


def test_plane_wave(torus):
    w = make_distribution("plane_wave", torus, k0=(2, -1))
    c = w.coefficients(3)
    assert c[(2, -1)] == 1 and np.count_nonzero(c.values) == 1
    assert not w.real


@pytest.mark.parametrize("zid,s0", [("dirac", -0.5), ("dirac_derivative", -1.5),
                                    ("sawtooth_jump", 0.5)])
def test_sobolev_order(circle, zid, s0):
    w = make_distribution(zid, circle)
    assert w.sobolev_order == s0
    assert sobolev_verdict(w, s0 - 0.25) == "converges"
    assert sobolev_verdict(w, s0 + 0.25) == "diverges"


def test_smooth_members_converge(circle):
    assert sobolev_verdict(make_distribution("smooth_bump", circle), 10.0) == "converges"


@given(st.floats(0, 2 * math.pi))
def test_dirac_pairing_evaluates(x0):
    M = ManifoldModel.circle(16, 64)
    w = make_distribution("dirac", M, x0)
    x = M.grid_coords()[0]
    psi = GridFunction(M, np.cos(3 * x) + 0.5 * np.sin(x), real=True)
    assert pair(w, psi).real == pytest.approx(math.cos(3 * x0) + 0.5 * math.sin(x0), abs=1e-12)


def test_listing(circle, torus):
    ids = [m["id"] for m in zoo_listing(circle)]
    assert "line_delta" not in ids and "sawtooth_jump" in ids
    ids2 = [m["id"] for m in zoo_listing(torus)]
    assert "line_delta" in ids2 and "sawtooth_jump" not in ids2
    meta = make_distribution("dirac", circle).metadata()
    assert meta["sobolev_order"] == -0.5 and meta["support"] == "point"
