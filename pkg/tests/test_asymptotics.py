import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wavereg import (EpsilonScan, InsufficientDataError, ManifoldModel, ParameterError,
                     SpectralCoefficients, classify, dyadic_grid, fit_slope, geometric_grid,
                     make_distribution, residual_scan, run_scan)
from wavereg.asymptotics import asymptotic_window, measure, parse_seminorm, sup_grid


def scan(values, eps=None, scale=None, name="L2"):
    eps = dyadic_grid() if eps is None else eps
    return EpsilonScan("p", "w", name, eps, np.asarray(values, dtype=float), scale)


def test_grids():
    g = dyadic_grid(4, 12, 1)
    assert g.size == 9 and g[0] == 2**-4 and g[-1] == 2**-12
    assert dyadic_grid(4, 12, 2).size == 17
    assert np.allclose(geometric_grid(0.5, 0.75, 3), [0.5, 0.375, 0.28125])
    with pytest.raises(ParameterError):
        geometric_grid(0.5, 0.9, 5)
    with pytest.raises(ParameterError):
        geometric_grid(2.0, 0.5, 5)


def test_scan_validation():
    with pytest.raises(ParameterError):
        scan([1.0, 2.0], eps=[0.1, 0.2])
    with pytest.raises(ParameterError):
        scan([-1.0] * 9)


@given(st.floats(-6, 12), st.floats(-5, 5))
def test_fit_recovers_power_law(slope, logc):
    eps = dyadic_grid()
    fit = fit_slope(scan(np.exp(logc) * eps**slope, eps))
    assert fit.slope == pytest.approx(slope, abs=1e-9)
    assert fit.intercept == pytest.approx(logc, abs=1e-7)
    assert fit.r2 == pytest.approx(1.0) or abs(slope) < 1e-9


def test_fit_drops_floor_points():
    eps = dyadic_grid()
    vals = np.maximum(eps**4, 1e-13)
    fit = fit_slope(scan(vals, eps), floor=1e-12)
    assert fit.floor_dominated and fit.slope == pytest.approx(4.0)
    with pytest.raises(InsufficientDataError):
        fit_slope(scan(np.full(9, 1e-14), eps), floor=1e-12)


def test_relative_floor_uses_scale():
    eps = dyadic_grid()
    sc = scan(np.full(9, 1e-10), eps, scale=np.full(9, 1e4))
    assert np.allclose(sc.floor(), 1e-9)


def test_classify_moderate():
    eps = dyadic_grid()
    v = classify([scan(eps**-1.5, eps), scan(eps**0.2, eps, name="sup")], "moderate")
    assert v.passed and v.exponent == 2


def test_classify_negligible():
    eps = dyadic_grid(4, 12, 2)
    assert classify([scan(eps**10, eps)], "negligible").passed
    assert not classify([scan(eps**3, eps)], "negligible").passed
    # reaches the floor quickly: accepted
    vals = np.where(eps > 2**-5, 1e-3 * eps, 0.0)
    assert classify([scan(vals, eps)], "negligible").passed
    # stalls just above the floor: rejected
    assert not classify([scan(np.full(eps.size, 1e-9), eps)], "negligible").passed
    with pytest.raises(ParameterError):
        classify([scan(eps, eps)], "bogus")


def test_asymptotic_window_takes_smallest_eps():
    eps = dyadic_grid()
    vals = np.where(eps < 2**-9, 0.0, eps**2)
    assert asymptotic_window(scan(vals, eps)) == (2**-9, 2**-5)


def test_parse_seminorm():
    assert parse_seminorm("L2") == ("H", 0.0)
    assert parse_seminorm("H1.5") == ("H", 1.5)
    assert parse_seminorm("sup_d3") == ("sup", 3)
    with pytest.raises(ParameterError):
        parse_seminorm("Linf")


@given(st.integers(1, 20), st.floats(0.1, 10))
def test_seminorms_of_single_mode(k, amp):
    M = ManifoldModel.circle(20)
    vals = np.zeros(41, dtype=complex)
    vals[20 + k] = amp
    c = SpectralCoefficients(M, vals)
    assert measure(c, "sup") == pytest.approx(amp, rel=1e-12)
    assert measure(c, "sup_d2") == pytest.approx(amp * k**2, rel=1e-12)
    assert measure(c, "L2") == pytest.approx(amp * math.sqrt(2 * math.pi), rel=1e-12)
    assert measure(c, "H1") == pytest.approx(amp * math.sqrt(2 * math.pi * (1 + k**2)), rel=1e-12)


def test_sup_grid_constant_axis():
    M = ManifoldModel.torus((2 * math.pi, 2 * math.pi), (1000, 0))
    c = SpectralCoefficients(M, np.zeros((2001, 1), dtype=complex))
    n = sup_grid(c, resolve=2000.0)
    assert n[1] == 1 and n[0] >= 2001


def test_dirac_scan_slopes(flagship, circle):
    scans = run_scan(flagship, make_distribution("dirac", circle), ("L2", "sup"),
                     dyadic_grid(6, 12, 1), min_points=5)
    fits = {s.seminorm: fit_slope(s).slope for s in scans}
    assert fits["L2"] == pytest.approx(-0.5, abs=0.05)
    assert fits["sup"] == pytest.approx(-1.0, abs=0.05)


def test_residual_scan_records_scale(flagship, circle):
    scans = residual_scan(flagship, make_distribution("smooth_bump", circle), ("L2",),
                          dyadic_grid(4, 12, 1), min_points=5)
    sc = scans[0]
    assert sc.scale is not None and np.all(sc.scale > 0)
    assert sc.values[-1] < 1e-12 * sc.scale[-1] + 1e-12
