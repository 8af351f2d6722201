import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tcdsim.channels import (
    PRESETS,
    FullDecoherence,
    IntensityMixture,
    Isolated,
    Mixed,
    Partial,
    PartialWhichPath,
    TwoSided,
    model_density,
    model_reduced,
)
from tcdsim.errors import InsufficientSpanError, ValidationError
from tcdsim.geometry import DEFAULT_GEOMETRY, DEFAULT_GRID, ScreenGrid
from tcdsim.linalg import DensityOperator, HilbertLayout, partial_trace
from tcdsim.observables import (
    DensityMap2D,
    closed_form,
    delta_profile,
    fringe_ratio,
    harmonic_fit,
    joint_density,
    normalize,
    scaled_max_error,
    single_particle_density,
    visibility,
)

G = DEFAULT_GEOMETRY
GRID = DEFAULT_GRID
A = HilbertLayout.of(("a-slit", 2))
KT = G.wavenumber * G.theta


def brute_joint(rho: np.ndarray, ya: float, yb: float) -> float:
    """Sum over all sixteen matrix elements with explicit flat-mode phases."""
    def amp(slit, y):
        return np.exp(1j * G.wavenumber * G.screen_distance) * np.exp(1j * (-1 if slit == 0 else 1) * KT * y)
    total = 0j
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    total += (rho[2 * i + j, 2 * k + l] * amp(i, ya) * amp(j, yb)
                              * np.conj(amp(k, ya)) * np.conj(amp(l, yb)))
    return total.real


def test_joint_density_matches_brute_sum():
    rho = model_reduced(Mixed(IntensityMixture(0.4, PartialWhichPath.from_real_n(0.55)))).mat
    grid = ScreenGrid(-0.03, 0.05, 5)
    m = joint_density(DensityOperator(model_reduced(Isolated()).layout, rho), G, grid_a=grid)
    for i, ya in enumerate(grid.coordinates):
        for j, yb in enumerate(grid.coordinates):
            assert m.values[i, j] == pytest.approx(brute_joint(rho, ya, yb), abs=1e-13)


def test_single_particle_flat_for_mixed_slits():
    m = single_particle_density(DensityOperator(A, np.eye(2) / 2), G, grid=GRID)
    assert np.ptp(m.values) <= 1e-12


def test_single_particle_coherent_superposition_has_cos2_fringes():
    plus = np.full((2, 2), 0.5)
    m = single_particle_density(DensityOperator(A, plus), G, grid=GRID)
    # |e^{-ikty} + e^{ikty}|^2 / 2 = 2 cos^2(k theta y)
    np.testing.assert_allclose(m.values, 2 * np.cos(KT * GRID.coordinates) ** 2, atol=1e-12)
    assert fringe_ratio(m) == pytest.approx(0.5, abs=1e-12)


def test_single_slit_is_fringe_free():
    m = single_particle_density(DensityOperator(A, np.diag([1.0, 0.0])), G, "spherical", GRID)
    r = G.screen_distance - G.theta * GRID.coordinates
    np.testing.assert_allclose(m.values, 1 / r ** 2, rtol=1e-13)


def test_isolated_joint_density_is_cos2():
    m = joint_density(model_reduced(Isolated()), G, grid_a=GRID)
    ref = closed_form("isolated", G, m.delta_y())
    assert scaled_max_error(m.values, ref) <= 1e-9


def test_full_decoherence_is_flat():
    v = joint_density(model_reduced(FullDecoherence()), G, grid_a=GRID).values
    assert (v.max() - v.min()) <= 1e-12 * v.mean()


def test_partial_shape_matches_closed_form():
    p = PartialWhichPath.from_real_n(0.62)
    m = joint_density(model_reduced(Partial(p)), G, grid_a=GRID)
    ref = closed_form("partial", G, m.delta_y(), n=p.n, m=p.m)
    assert scaled_max_error(m.values, ref) <= 1e-12


def test_closed_form_examples():
    assert closed_form("isolated", G, 0.0) == 1.0
    assert closed_form("isolated", G, math.pi / (2 * KT)) == pytest.approx(0, abs=1e-30)
    np.testing.assert_allclose(closed_form("mixed", G, np.linspace(-1, 1, 9), w1=1.0), 1.0)
    with pytest.raises(ValidationError):
        closed_form("nearfield", G, 0.0)


def test_isolated_law_is_partial_law_at_long_wavelength():
    dy = np.linspace(-0.2, 0.2, 101)
    # cos^2 x = (1 + cos 2x) / 2 = |n|^2 + |m|^2 + 2nm cos 2x at n = m = 1/2
    np.testing.assert_allclose(closed_form("isolated", G, dy), closed_form("partial", G, dy, n=0.5, m=0.5),
                               atol=1e-15)


def test_visibility_examples():
    iso = joint_density(model_reduced(Isolated()), G, grid_a=GRID)
    flat = joint_density(model_reduced(FullDecoherence()), G, grid_a=GRID)
    assert visibility(iso).v == pytest.approx(1, abs=1e-9)
    assert visibility(flat).v == pytest.approx(0, abs=1e-9)
    assert visibility(flat, "minmax").v == pytest.approx(0, abs=1e-12)


def test_minmax_visibility_on_period_aligned_grid():
    # half-period spacing puts grid points on the maxima and zeros of cos^2
    h = math.pi / (2 * KT)
    grid = ScreenGrid(-4 * h, 4 * h, 9)
    rep = visibility(joint_density(model_reduced(Isolated()), G, grid_a=grid), "minmax")
    assert rep.v == pytest.approx(1, abs=1e-9)
    assert rep.v == pytest.approx((rep.max_density - rep.min_density) / (rep.max_density + rep.min_density),
                                  abs=1e-12)


def test_minmax_requires_one_period():
    narrow = ScreenGrid.symmetric(0.002, 21)
    m = joint_density(model_reduced(Isolated()), G, grid_a=narrow)
    with pytest.raises(InsufficientSpanError):
        visibility(m, "minmax")


@pytest.mark.parametrize("n", np.linspace(0.5, 1 / math.sqrt(2), 6))
def test_visibility_equals_4nm(n):
    p = PartialWhichPath.from_real_n(n)
    v = visibility(joint_density(model_reduced(Partial(p)), G, grid_a=GRID)).v
    assert v == pytest.approx(4 * p.n.real * p.m.real, abs=1e-9)


@pytest.mark.parametrize("w1", [0, 0.25, 0.5, 0.75, 1])
def test_visibility_mixture_law(w1):
    v = visibility(joint_density(model_reduced(Mixed(IntensityMixture(w1))), G, grid_a=GRID)).v
    assert v == pytest.approx(1 - w1, abs=1e-9)


def test_normalize():
    grid = ScreenGrid(0, 1, 4)
    m = DensityMap2D(grid, grid, np.full((4, 4), 3.0), geometry=G)
    nm = normalize(m)
    np.testing.assert_allclose(nm.values, 1 / 16, atol=0)
    np.testing.assert_array_equal(normalize(nm).values, nm.values)
    with pytest.raises(ValidationError):
        normalize(DensityMap2D(grid, grid, np.zeros((4, 4))))


def test_normalize_keeps_visibility():
    m = joint_density(model_reduced(Mixed(IntensityMixture(0.35))), G, grid_a=GRID)
    assert visibility(normalize(m)).v == pytest.approx(visibility(m).v, abs=1e-12)
    assert visibility(normalize(m), "minmax").v == pytest.approx(visibility(m, "minmax").v, abs=1e-12)


def test_negative_values_rejected_and_clipped():
    grid = ScreenGrid(0, 1, 2)
    with pytest.raises(ValidationError):
        DensityMap2D(grid, grid, [[1, -1e-6], [1, 1]])
    m = DensityMap2D(grid, grid, [[1, -1e-16], [1, 1]])
    assert m.values.min() == 0


def test_harmonic_fit_recovers_known_harmonic():
    x = np.linspace(-0.3, 0.7, 333)
    c0, c1 = harmonic_fit(x, 2.0 + 0.8 * np.cos(5.0 * x + 0.4), 5.0)
    assert c0 == pytest.approx(2.0, abs=1e-12)
    assert c1 == pytest.approx(0.4 * np.exp(0.4j), abs=1e-12)


def test_delta_profile():
    m = joint_density(model_reduced(Isolated()), G, grid_a=GRID)
    dy, prof = delta_profile(m)
    assert dy.size == 2 * GRID.points - 1
    ref = closed_form("isolated", G, dy)
    assert scaled_max_error(prof, ref) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 40), st.floats(0, 1))
def test_translation_invariance(shift, w1):
    m = joint_density(model_reduced(Mixed(IntensityMixture(w1))), G, grid_a=GRID).values
    n = GRID.points - shift
    np.testing.assert_allclose(m[shift:, shift:], m[:n, :n], atol=1e-12)


@pytest.mark.parametrize("model", list(PRESETS.values()) + [TwoSided(0.2, 0.3),
                                                            Partial(PartialWhichPath(0.6j, math.sqrt(0.14)))])
def test_no_single_particle_fringes(model):
    rho_a = partial_trace(model_density(model), {"a-slit"})
    m = single_particle_density(rho_a, G, grid=GRID)
    assert fringe_ratio(m) <= 1e-9


def test_spherical_mode_visibility_close_to_flat():
    v = visibility(joint_density(model_reduced(Isolated()), G, "spherical", GRID)).v
    assert v == pytest.approx(1, abs=1e-6)
