import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tcdsim.errors import ValidationError
from tcdsim.geometry import (
    AmplitudeMode,
    Geometry,
    ScreenGrid,
    grid_coordinates,
    path_length,
    slit_amplitude,
)

G = Geometry(slit_separation=0.01, screen_distance=1.0, wavenumber=2 * math.pi / 650e-9)
MODES = list(AmplitudeMode)


def test_theta_is_half_separation_over_distance():
    assert G.theta == pytest.approx(0.005)


def test_path_length_examples():
    assert path_length(G, 1, 0.0) == 1.0
    # 1 + (0.01 / 2) * 0.02
    assert path_length(G, 2, 0.02) == pytest.approx(1.0001, abs=1e-15)
    assert path_length(G, 1, 0.3) == path_length(G, 2, -0.3)


def test_geometry_validation():
    with pytest.raises(ValidationError):
        Geometry(0.6, 1.0, 1.0)
    with pytest.raises(ValidationError):
        Geometry(-1e-3, 1.0, 1.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        Geometry(0.2, 1.0, 1.0)
    assert caught


def test_flat_amplitude_on_axis():
    for slit in (1, 2):
        a = slit_amplitude(G, "fraunhofer_flat", slit, 0.0)
        assert a == pytest.approx(np.exp(1j * G.wavenumber * 1.0), abs=1e-15)
        assert abs(a) == pytest.approx(1, abs=1e-15)


def test_spherical_on_axis():
    L = 2.5
    g = Geometry(1e-5, L, 1e6)
    assert slit_amplitude(g, "spherical", 1, 0.0) == pytest.approx(np.exp(1j * 1e6 * L) / L, rel=1e-15)


def test_flat_amplitudes_differ_by_phase():
    y = np.linspace(-0.01, 0.01, 7)
    ratio = slit_amplitude(G, "fraunhofer_flat", 1, y) / slit_amplitude(G, "fraunhofer_flat", 2, y)
    np.testing.assert_allclose(ratio, np.exp(-2j * G.wavenumber * G.theta * y), atol=1e-12)


def test_unknown_slit():
    with pytest.raises(ValidationError):
        path_length(G, 3, 0.0)


@pytest.mark.parametrize("grid, expected", [
    (ScreenGrid(0, 1, 2), [0, 1]),
    (ScreenGrid(-1, 1, 3), [-1, 0, 1]),
])
def test_grid_coordinates(grid, expected):
    np.testing.assert_array_equal(grid_coordinates(grid), expected)


def test_grid_spacing_exact():
    g = ScreenGrid(0, 0.5, 6)
    assert g.spacing == 0.1
    np.testing.assert_allclose(np.diff(g.coordinates), 0.1, atol=1e-16)


def test_grid_validation():
    with pytest.raises(ValidationError):
        ScreenGrid(0, 1, 1)
    with pytest.raises(ValidationError):
        ScreenGrid(1, 0, 5)


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.05, 0.05))
def test_flat_modulus_is_one(y):
    assert abs(slit_amplitude(G, "fraunhofer_flat", 1, y)) == pytest.approx(1, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-6, 1e-3), st.floats(0.5, 5), st.floats(1e5, 1e7), st.floats(-1, 1))
def test_spherical_and_fraunhofer_full_agree_at_small_angle(d, L, k, frac):
    g = Geometry(d, L, k)
    y = frac * 1e-4 * L / g.theta
    for slit in (1, 2):
        s = slit_amplitude(g, "spherical", slit, y)
        f = slit_amplitude(g, "fraunhofer_full", slit, y)
        assert abs(s - f) <= 1e-6 * abs(f)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(MODES), st.floats(-0.1, 0.1))
def test_relative_phase_all_modes(mode, y):
    a1 = slit_amplitude(G, mode, 1, y)
    a2 = slit_amplitude(G, mode, 2, y)
    diff = np.angle(a1) - np.angle(a2)
    target = -2 * G.wavenumber * G.theta * y
    wrapped = (diff - target + math.pi) % (2 * math.pi) - math.pi
    assert abs(wrapped) <= 1e-12 * max(1.0, abs(target))
