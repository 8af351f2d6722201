"""
Screen-space observables: single-particle and coincidence densities,
the closed-form fringe laws, and fringe visibility.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import InsufficientSpanError, LayoutError, ValidationError
from .geometry import DEFAULT_MODE, AmplitudeMode, Geometry, ScreenGrid, slit_amplitude
from .linalg import DensityOperator

NEGATIVE_TOL = 1e-9
IMAG_TOL = 1e-12


class Normalization(str, enum.Enum):
    RAW = "raw"
    UNIT_SUM = "unit-sum"


class VisibilityMethod(str, enum.Enum):
    MINMAX = "minmax"
    FOURIER = "fourier"


@dataclass(frozen=True, eq=False)
class DensityMap1D:
    grid: ScreenGrid
    values: np.ndarray
    geometry: Optional[Geometry] = None
    normalization: Normalization = Normalization.RAW

    def __post_init__(self):
        vals = _clean(self.values)
        if vals.shape != (self.grid.points,):
            raise LayoutError(f"expected {self.grid.points} values, got shape {vals.shape}")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True, eq=False)
class DensityMap2D:
    """``values[i, j]`` is the density at ``(grid_a[i], grid_b[j])``."""

    grid_a: ScreenGrid
    grid_b: ScreenGrid
    values: np.ndarray
    geometry: Optional[Geometry] = None
    normalization: Normalization = Normalization.RAW

    def __post_init__(self):
        vals = _clean(self.values)
        if vals.shape != (self.grid_a.points, self.grid_b.points):
            raise LayoutError(f"values shape {vals.shape} does not match the grids")
        object.__setattr__(self, "values", vals)

    def delta_y(self) -> np.ndarray:
        """Matrix of ``y_a - y_b`` aligned with ``values``."""
        return self.grid_a.coordinates[:, None] - self.grid_b.coordinates[None, :]


@dataclass(frozen=True)
class VisibilityReport:
    v: float
    max_density: float
    min_density: float
    method: VisibilityMethod


def _clean(values) -> np.ndarray:
    vals = np.array(values, dtype=float, copy=True)
    if not np.all(np.isfinite(vals)):
        raise ValidationError("density values must be finite")
    if vals.size and vals.min() < -NEGATIVE_TOL:
        raise ValidationError(f"density has a negative value {vals.min():.3g}")
    vals[vals < 0] = 0.0
    vals.setflags(write=False)
    return vals


def _real_density(z: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(z.real)))) if z.size else 1.0
    resid = float(np.max(np.abs(z.imag))) if z.size else 0.0
    if resid > IMAG_TOL * scale:
        raise ValidationError(f"density has imaginary residue {resid:.3g}")
    return z.real


def _slit_amplitudes(g: Geometry, mode: AmplitudeMode, grid: ScreenGrid) -> np.ndarray:
    y = grid.coordinates
    return np.stack([slit_amplitude(g, mode, 1, y), slit_amplitude(g, mode, 2, y)])


def single_particle_density(rho_a: DensityOperator, g: Geometry,
                            mode: AmplitudeMode = DEFAULT_MODE,
                            grid: Optional[ScreenGrid] = None) -> DensityMap1D:
    """``<y|rho_a|y> = sum_ij rho_ij psi_i(y) psi_j(y)*`` over one screen."""
    if grid is None:
        raise ValidationError("single_particle_density needs a screen grid")
    if rho_a.layout.dim != 2:
        raise LayoutError(f"expected a one-particle operator of dim 2, got {rho_a.layout.dim}")
    amp = _slit_amplitudes(g, mode, grid)
    z = np.einsum("ij,iy,jy->y", rho_a.mat, amp, amp.conj())
    return DensityMap1D(grid, _real_density(z), geometry=g)


def joint_density(rho_ab: DensityOperator, g: Geometry,
                  mode: AmplitudeMode = DEFAULT_MODE,
                  grid_a: Optional[ScreenGrid] = None,
                  grid_b: Optional[ScreenGrid] = None) -> DensityMap2D:
    """Coincidence density ``<ya|<yb| rho_ab |yb>|ya>``.

    The system index is ``2*i + j`` for ``|R_{i+1}>|L_{j+1}>``, matching the
    a-slit-major layout.
    """
    if grid_a is None:
        raise ValidationError("joint_density needs a screen grid")
    grid_b = grid_a if grid_b is None else grid_b
    if rho_ab.layout.dim != 4:
        raise LayoutError(f"expected a two-particle operator of dim 4, got {rho_ab.layout.dim}")
    amp_a = _slit_amplitudes(g, mode, grid_a)
    amp_b = _slit_amplitudes(g, mode, grid_b)
    r = rho_ab.mat.reshape(2, 2, 2, 2)
    # contract one screen at a time to keep the intermediate small
    t = np.einsum("ijkl,ia,ka->jla", r, amp_a, amp_a.conj())
    z = np.einsum("jla,jb,lb->ab", t, amp_b, amp_b.conj())
    return DensityMap2D(grid_a, grid_b, _real_density(z), geometry=g)


def closed_form(kind: str, g: Geometry, delta_y, n: complex = None, m: complex = None,
                w1: float = None):
    """Literal unnormalized fringe laws as functions of ``y_a - y_b``.

    ``isolated``: ``cos^2(k theta dy)`` (isolated pair);
    ``full``: constant 1 (full which-path record);
    ``partial``: ``|n|^2 + |m|^2 + (n m* + n* m) cos(2 k theta dy)``;
    ``mixed``: ``w1 + 2 w2 cos^2(k theta dy)``.
    """
    dy = np.asarray(delta_y, dtype=float)
    x = g.wavenumber * g.theta * dy
    if kind == "isolated":
        return np.cos(x) ** 2
    if kind == "full":
        return np.ones_like(dy)
    if kind == "partial":
        if n is None or m is None:
            raise ValidationError("partial law needs n and m")
        n, m = complex(n), complex(m)
        coh = (n * m.conjugate() + n.conjugate() * m).real
        return abs(n) ** 2 + abs(m) ** 2 + coh * np.cos(2.0 * x)
    if kind == "mixed":
        if w1 is None or not 0.0 <= w1 <= 1.0:
            raise ValidationError("mixture law needs w1 in [0, 1]")
        return w1 + 2.0 * (1.0 - w1) * np.cos(x) ** 2
    raise ValidationError(f"unknown closed form {kind!r}")


def normalize(dmap):
    """Rescale to unit sum (fixed-order compensated summation)."""
    total = math.fsum(np.ravel(dmap.values))
    if not total > 0:
        raise ValidationError("cannot normalize an all-zero density map")
    return replace(dmap, values=dmap.values / total, normalization=Normalization.UNIT_SUM)


def harmonic_fit(x, values, omega: float) -> tuple[float, complex]:
    """Least-squares fit ``values ~ c0 + 2 Re(c1 exp(i omega x))``; returns ``(c0, c1)``.

    On grids spanning a whole number of periods this is the ordinary Fourier
    coefficient; elsewhere it stays exact for pure ``a + b cos(omega x + phi)``
    data, which a plain DFT would not.
    """
    x = np.ravel(np.asarray(x, dtype=float))
    y = np.ravel(np.asarray(values, dtype=float))
    xc = 0.5 * (x.max() + x.min())
    phase = omega * (x - xc)
    design = np.column_stack([np.ones_like(phase), np.cos(phase), np.sin(phase)])
    (c0, a, b), *_ = np.linalg.lstsq(design, y, rcond=None)
    c1 = 0.5 * (a - 1j * b) * np.exp(-1j * omega * xc)
    return float(c0), complex(c1)


def fringe_ratio(dmap: DensityMap1D) -> float:
    """``|c1| / c0`` of a single-particle map at spatial frequency ``2 k theta``."""
    if dmap.geometry is None:
        raise ValidationError("map carries no geometry")
    c0, c1 = harmonic_fit(dmap.grid.coordinates, dmap.values, dmap.geometry.fringe_frequency)
    return abs(c1) / c0


def visibility(dmap: DensityMap2D, method: VisibilityMethod = VisibilityMethod.FOURIER,
               geometry: Optional[Geometry] = None) -> VisibilityReport:
    """Fringe visibility of a coincidence map.

    ``minmax`` is ``(max - min) / (max + min)`` over the cells; ``fourier`` is
    ``2 |c1| / c0`` from :func:`harmonic_fit` along ``y_a - y_b``.
    """
    method = VisibilityMethod(method)
    g = geometry or dmap.geometry
    if g is None:
        raise ValidationError("visibility needs the map geometry")
    vals = dmap.values
    vmax, vmin = float(vals.max()), float(vals.min())
    if method is VisibilityMethod.MINMAX:
        dy = dmap.delta_y()
        span = float(dy.max() - dy.min())
        if span < g.fringe_period:
            raise InsufficientSpanError(
                f"y_a - y_b spans {span:.4g}, less than one fringe period {g.fringe_period:.4g}")
        if vmax + vmin <= 0:
            raise ValidationError("visibility of an all-zero map is undefined")
        return VisibilityReport((vmax - vmin) / (vmax + vmin), vmax, vmin, method)
    c0, c1 = harmonic_fit(dmap.delta_y(), vals, g.fringe_frequency)
    if c0 <= 0:
        raise ValidationError("fitted mean density is not positive")
    return VisibilityReport(2.0 * abs(c1) / c0, vmax, vmin, method)


def fit_scale(values, reference) -> float:
    """Least-squares factor ``s`` minimizing ``||values - s * reference||``."""
    v = np.ravel(np.asarray(values, dtype=float))
    r = np.ravel(np.asarray(reference, dtype=float))
    denom = float(np.dot(r, r))
    if denom == 0:
        raise ValidationError("reference is identically zero")
    return float(np.dot(v, r)) / denom


def scaled_max_error(values, reference) -> float:
    """Largest deviation after the best global scale, relative to the map maximum."""
    v = np.asarray(values, dtype=float)
    s = fit_scale(v, reference)
    return float(np.max(np.abs(v - s * np.asarray(reference, dtype=float))) / np.max(np.abs(v)))


def delta_profile(dmap: DensityMap2D) -> tuple[np.ndarray, np.ndarray]:
    """Average the map along lines of constant ``y_a - y_b``.

    Needs equally spaced grids on both screens; returns ``(delta_y, mean density)``.
    """
    ga, gb = dmap.grid_a, dmap.grid_b
    if not math.isclose(ga.spacing, gb.spacing, rel_tol=1e-12):
        raise LayoutError("delta_profile needs equal grid spacing on both screens")
    na, nb = ga.points, gb.points
    offsets = np.subtract.outer(np.arange(na), np.arange(nb))
    shift = nb - 1
    sums = np.bincount((offsets + shift).ravel(), weights=dmap.values.ravel(),
                       minlength=na + nb - 1)
    counts = np.bincount((offsets + shift).ravel(), minlength=na + nb - 1)
    k = np.arange(na + nb - 1) - shift
    dy = (ga.y_min - gb.y_min) + k * ga.spacing
    return dy, sums / counts
