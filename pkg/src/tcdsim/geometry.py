"""
Interferometer geometry and slit-to-screen amplitudes.

The half-angle ``theta`` is taken as ``d / (2 L)``.  With the far-field path
lengths ``r_1 = L - theta*y`` and ``r_2 = L + theta*y`` this gives the usual
two-slit path difference ``r_2 - r_1 = d*y/L``.  Slit 1 always carries the
minus sign; swapping the convention only mirrors every pattern in ``y``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SingularityError, ValidationError


class AmplitudeMode(str, enum.Enum):
    SPHERICAL = "spherical"
    FRAUNHOFER_FULL = "fraunhofer_full"
    FRAUNHOFER_FLAT = "fraunhofer_flat"


DEFAULT_MODE = AmplitudeMode.FRAUNHOFER_FLAT


@dataclass(frozen=True)
class Geometry:
    """Slit separation ``d``, screen distance ``L`` and wavenumber ``k`` (SI units)."""

    slit_separation: float
    screen_distance: float
    wavenumber: float

    def __post_init__(self):
        d, L, k = self.slit_separation, self.screen_distance, self.wavenumber
        for name, val in (("slit_separation", d), ("screen_distance", L), ("wavenumber", k)):
            if not (math.isfinite(val) and val > 0):
                raise ValidationError(f"{name} must be positive and finite, got {val!r}")
        ratio = d / L
        if ratio > 0.5:
            raise ValidationError(f"far-field geometry needs d/L <= 0.5, got {ratio:.3g}")
        if ratio > 0.1:
            warnings.warn(f"d/L = {ratio:.3g} exceeds 0.1; far-field formulas are rough", stacklevel=3)

    @classmethod
    def from_wavelength(cls, slit_separation: float, screen_distance: float,
                        wavelength: float) -> "Geometry":
        if not (math.isfinite(wavelength) and wavelength > 0):
            raise ValidationError(f"wavelength must be positive, got {wavelength!r}")
        return cls(slit_separation, screen_distance, 2.0 * math.pi / wavelength)

    @property
    def theta(self) -> float:
        return self.slit_separation / (2.0 * self.screen_distance)

    @property
    def wavelength(self) -> float:
        return 2.0 * math.pi / self.wavenumber

    @property
    def fringe_frequency(self) -> float:
        """Angular spatial frequency ``2 k theta`` of the coincidence fringes in ``y_a - y_b``."""
        return 2.0 * self.wavenumber * self.theta

    @property
    def fringe_period(self) -> float:
        return 2.0 * math.pi / self.fringe_frequency


# L = 1 m, d = 10 um, lambda = 650 nm
DEFAULT_GEOMETRY = Geometry.from_wavelength(10e-6, 1.0, 650e-9)


@dataclass(frozen=True)
class ScreenGrid:
    """Uniform detector coordinates, endpoints inclusive."""

    y_min: float
    y_max: float
    points: int

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 2:
            raise ValidationError(f"a screen grid needs at least 2 points, got {self.points!r}")
        if not (math.isfinite(self.y_min) and math.isfinite(self.y_max)) or self.y_max <= self.y_min:
            raise ValidationError(f"need y_min < y_max, got ({self.y_min!r}, {self.y_max!r})")
        object.__setattr__(self, "points", int(self.points))

    @classmethod
    def symmetric(cls, half_width: float, points: int) -> "ScreenGrid":
        return cls(-half_width, half_width, points)

    @property
    def spacing(self) -> float:
        return (self.y_max - self.y_min) / (self.points - 1)

    @property
    def coordinates(self) -> np.ndarray:
        return grid_coordinates(self)


# +-100 mm covers about six periods of the default coincidence fringes
DEFAULT_GRID = ScreenGrid.symmetric(0.1, 201)


def grid_coordinates(s: ScreenGrid) -> np.ndarray:
    """Evenly spaced coordinates ``y_min + i * spacing``.

    Computed by index so that symmetric grids are exactly symmetric and the
    endpoints are hit exactly.
    """
    i = np.arange(s.points, dtype=float)
    n = s.points - 1
    return (s.y_min * (n - i) + s.y_max * i) / n


def _slit_sign(slit: int) -> int:
    if slit == 1:
        return -1
    if slit == 2:
        return 1
    raise ValidationError(f"slit must be 1 or 2, got {slit!r}")


def path_length(g: Geometry, slit: int, y):
    """Far-field distance from ``slit`` to screen point ``y``: ``L -/+ theta*y``."""
    return g.screen_distance + _slit_sign(slit) * g.theta * np.asarray(y, dtype=float)


def slit_amplitude(g: Geometry, mode: AmplitudeMode, slit: int, y):
    """Amplitude ``<y|slit>`` on the screen.

    ``spherical`` is ``exp(ikr)/r`` on the linearized path length ``r``;
    ``fraunhofer_full`` is the same expression written as
    ``exp(ik(L -/+ theta y)) / (L -/+ theta y)``, so the two agree to rounding.
    ``fraunhofer_flat`` drops the ``1/r`` factor, leaving a unit-modulus phase.

    The phase ``k r`` is always evaluated as ``kL + k(-/+theta y)``: with
    ``kL ~ 1e7`` rad a single product would lose the relative phase
    ``2 k theta y`` to rounding.
    """
    mode = AmplitudeMode(mode)
    sign = _slit_sign(slit)
    y = np.asarray(y, dtype=float)
    k, L, theta = g.wavenumber, g.screen_distance, g.theta
    phase = np.exp(1j * k * L) * np.exp(1j * sign * k * theta * y)
    if mode is AmplitudeMode.FRAUNHOFER_FLAT:
        return phase
    r = path_length(g, slit, y)
    if np.any(np.abs(r) < 1e-9 * L):
        raise SingularityError("path length vanishes on the requested screen points")
    if mode is AmplitudeMode.SPHERICAL:
        return phase / r
    return phase * (1.0 / r)
