"""
Initial two-particle state and the environment-interaction models.

Basis ordering on the system factor ``[a-slit, b-slit]`` is
``(R1L1, R1L2, R2L1, R2L2)``; the environment factor holds the record
states ``(e0, e1, e2)`` = (nothing recorded, detector 1, detector 2).
Record states are orthonormal by construction.

Only the two populated slit pairs ``R1L2`` and ``R2L1`` are acted on; the
other two pairs keep ``e0``.  On the populated subspace every channel is an
isometry, so norms are preserved exactly (up to rounding).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import LayoutError, ValidationError
from .linalg import (
    A_SLIT,
    B_SLIT,
    ENV_LAYOUT,
    FULL_LAYOUT,
    SYSTEM_LAYOUT,
    DensityOperator,
    StateVector,
    dm_from_state,
    kron,
    mixture,
    partial_trace,
)

SQRT_HALF = math.sqrt(0.5)

# flat indices on the 4-dim system layout
R1L1, R1L2, R2L1, R2L2 = range(4)


@dataclass(frozen=True)
class PartialWhichPath:
    """Record amplitudes: ``n`` for the detector near the scattering slit, ``m`` for the far one.

    Normalization of the four-term entangled state requires
    ``|n|^2 + |m|^2 = 1/2``.
    """

    n: complex
    m: complex

    def __post_init__(self):
        n, m = complex(self.n), complex(self.m)
        if not (np.isfinite(n) and np.isfinite(m)):
            raise ValidationError("n and m must be finite")
        total = abs(n) ** 2 + abs(m) ** 2
        if abs(total - 0.5) > 1e-12:
            raise ValidationError(f"|n|^2 + |m|^2 must equal 1/2, got {total!r}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)

    @classmethod
    def from_real_n(cls, n: float) -> "PartialWhichPath":
        """Real parametrization ``m = sqrt(1/2 - n^2)``, valid for ``n`` in ``[1/2, 1/sqrt 2]``."""
        n = float(n)
        if not (0.5 - 1e-15 <= n <= SQRT_HALF + 1e-15):
            raise ValidationError(f"real n must lie in [1/2, 1/sqrt(2)], got {n!r}")
        n = min(n, SQRT_HALF)
        return cls(n, math.sqrt(max(0.0, 0.5 - n * n)))

    @property
    def coherence(self) -> float:
        """``n m* + n* m`` = ``2 Re(n m*)``."""
        return 2.0 * (self.n * self.m.conjugate()).real

    @property
    def visibility(self) -> float:
        return self.coherence / (abs(self.n) ** 2 + abs(self.m) ** 2)


SMALL_WAVELENGTH = PartialWhichPath(SQRT_HALF, 0.0)
LARGE_WAVELENGTH = PartialWhichPath(0.5, 0.5)


@dataclass(frozen=True)
class Isolated:
    """No environment coupling."""


@dataclass(frozen=True)
class FullDecoherence:
    """Perfect which-path records (short-wavelength photons)."""


@dataclass(frozen=True)
class Partial:
    amplitudes: PartialWhichPath


Inner = Union[PartialWhichPath, FullDecoherence]


def _check_probability(name: str, p: float) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise ValidationError(f"{name} must lie in [0, 1], got {p!r}")
    return p


@dataclass(frozen=True)
class IntensityMixture:
    """Particle ``a`` scatters with probability ``w1``; ``w2 = 1 - w1`` is derived."""

    w1: float
    inner: Inner = FullDecoherence()

    def __post_init__(self):
        object.__setattr__(self, "w1", _check_probability("w1", self.w1))
        if not isinstance(self.inner, (PartialWhichPath, FullDecoherence)):
            raise ValidationError("mixture inner model must be PartialWhichPath or FullDecoherence")

    @property
    def w2(self) -> float:
        return 1.0 - self.w1


@dataclass(frozen=True)
class Mixed:
    mixture: IntensityMixture


@dataclass(frozen=True)
class TwoSided:
    """Light sources on both sides; each particle scatters independently."""

    p_a: float
    p_b: float
    inner: Inner = FullDecoherence()

    def __post_init__(self):
        object.__setattr__(self, "p_a", _check_probability("p_a", self.p_a))
        object.__setattr__(self, "p_b", _check_probability("p_b", self.p_b))

    def as_mixture(self) -> IntensityMixture:
        return IntensityMixture(two_sided_scatter_probability(self.p_a, self.p_b), self.inner)


EnvironmentModel = Union[Isolated, FullDecoherence, Partial, Mixed, TwoSided]

PRESETS: dict[str, EnvironmentModel] = {
    "isolated": Isolated(),
    "small-wavelength": FullDecoherence(),
    "large-wavelength": Partial(LARGE_WAVELENGTH),
    "mixed": Mixed(IntensityMixture(0.3)),
}


def initial_state() -> StateVector:
    """Entangled pair ``(|R1>|L2> + |R2>|L1>) / sqrt 2``."""
    amps = np.zeros(4, dtype=complex)
    amps[R1L2] = amps[R2L1] = SQRT_HALF
    return StateVector(SYSTEM_LAYOUT, amps)


def ready_environment() -> StateVector:
    return StateVector.basis(ENV_LAYOUT, 0)


def attach_environment(v: StateVector) -> StateVector:
    if v.layout != SYSTEM_LAYOUT:
        raise LayoutError(f"expected a state on {SYSTEM_LAYOUT.labels}, got {v.layout.labels}")
    return kron(v, ready_environment())


def _system_env_array(v: StateVector) -> np.ndarray:
    if v.layout != FULL_LAYOUT:
        raise LayoutError(f"expected a state on {FULL_LAYOUT.labels}, got {v.layout.labels}")
    psi = v.amps.reshape(4, 3)
    if np.max(np.abs(psi[:, 1:])) > 1e-12:
        raise ValidationError("environment must be in the ready state e0")
    return psi


def _record(v: StateVector, near: complex, far: complex) -> StateVector:
    # R1L2 e0 -> (near e1 + far e2),  R2L1 e0 -> (near e2 + far e1)
    psi = _system_env_array(v)
    out = psi.copy()
    for pair, (e_near, e_far) in ((R1L2, (1, 2)), (R2L1, (2, 1))):
        c = psi[pair, 0]
        out[pair, :] = 0.0
        out[pair, e_near] = near * c
        out[pair, e_far] = far * c
    return StateVector(FULL_LAYOUT, out.reshape(-1))


def apply_full_decoherence(v: StateVector) -> StateVector:
    """Perfect von Neumann record: ``R1L2 e0 -> R1L2 e1``, ``R2L1 e0 -> R2L1 e2``."""
    return _record(v, 1.0, 0.0)


def apply_partial_decoherence(v: StateVector, p: PartialWhichPath) -> StateVector:
    """Imperfect record; the entangled input maps to
    ``n R1L2 e1 + m R1L2 e2 + n R2L1 e2 + m R2L1 e1``.

    The per-branch amplitudes are ``sqrt 2 * (n, m)`` so that the branch
    weight ``1/sqrt 2`` of the entangled state reproduces ``n`` and ``m``.
    """
    if not isinstance(p, PartialWhichPath):
        raise ValidationError("apply_partial_decoherence needs a PartialWhichPath")
    return _record(v, math.sqrt(2.0) * p.n, math.sqrt(2.0) * p.m)


def diagonal_block() -> np.ndarray:
    """``sum_{i != j} |RiLj><RiLj|`` on the system layout."""
    d = np.zeros((4, 4), dtype=complex)
    d[R1L2, R1L2] = d[R2L1, R2L1] = 1.0
    return d


def coherence_block() -> np.ndarray:
    """``sum_{i != j} |RiLj><RjLi|``, the interference term."""
    x = np.zeros((4, 4), dtype=complex)
    x[R1L2, R2L1] = x[R2L1, R1L2] = 1.0
    return x


def mixed_density(mix: IntensityMixture) -> DensityOperator:
    """``w1 |phi><phi| + w2 |alpha><alpha|`` on the system+environment layout.

    ``alpha`` is the entangled pair with an untouched environment and ``phi``
    the same pair after the inner recording channel.
    """
    if not isinstance(mix, IntensityMixture):
        raise ValidationError("mixed_density needs an IntensityMixture")
    alpha = attach_environment(initial_state())
    phi = _apply_inner(alpha, mix.inner)
    return mixture([mix.w1, mix.w2], [dm_from_state(phi), dm_from_state(alpha)])


def _apply_inner(v: StateVector, inner: Inner) -> StateVector:
    if isinstance(inner, FullDecoherence):
        return apply_full_decoherence(v)
    return apply_partial_decoherence(v, inner)


def reduced_two_particle(x) -> DensityOperator:
    """Trace the environment out of a pure state, a density operator or a mixture."""
    if isinstance(x, IntensityMixture):
        x = mixed_density(x)
    elif isinstance(x, StateVector):
        x = dm_from_state(x)
    if not isinstance(x, DensityOperator):
        raise ValidationError(f"cannot reduce object of type {type(x).__name__}")
    return partial_trace(x, {A_SLIT, B_SLIT})


def two_sided_scatter_probability(p_a: float, p_b: float) -> float:
    """Probability that at least one particle scatters, ``1 - (1-p_a)(1-p_b)``.

    For ``p_a = p_b = p << 1`` this is ``2p - p^2``, i.e. twice the one-sided
    probability to first order.
    """
    p_a = _check_probability("p_a", p_a)
    p_b = _check_probability("p_b", p_b)
    # p_a + p_b - p_a p_b is exact at (0.1, 0.1) where 1 - 0.9*0.9 is not
    return p_a + p_b - p_a * p_b


def pure_components(model: EnvironmentModel) -> list[tuple[float, StateVector]]:
    """Classical branches ``(weight, system+environment state)`` of a model."""
    alpha = attach_environment(initial_state())
    if isinstance(model, Isolated):
        return [(1.0, alpha)]
    if isinstance(model, FullDecoherence):
        return [(1.0, apply_full_decoherence(alpha))]
    if isinstance(model, Partial):
        return [(1.0, apply_partial_decoherence(alpha, model.amplitudes))]
    if isinstance(model, TwoSided):
        model = Mixed(model.as_mixture())
    if isinstance(model, Mixed):
        mix = model.mixture
        return [(mix.w1, _apply_inner(alpha, mix.inner)), (mix.w2, alpha)]
    raise ValidationError(f"unknown environment model {model!r}")


def model_density(model: EnvironmentModel) -> DensityOperator:
    """Full system+environment density operator of a model."""
    if isinstance(model, Mixed):
        return mixed_density(model.mixture)
    if isinstance(model, TwoSided):
        return mixed_density(model.as_mixture())
    (_, state), = pure_components(model)
    return dm_from_state(state)


def model_reduced(model: EnvironmentModel) -> DensityOperator:
    return reduced_two_particle(model_density(model))


def expected_visibility(model: EnvironmentModel) -> float:
    """Closed-form fringe visibility of the coincidence density.

    A scattered branch contributes ``2 Re(n m*) / (|n|^2 + |m|^2)``, an
    unscattered one contributes 1, and mixtures average them with their
    classical weights.
    """
    if isinstance(model, Isolated):
        return 1.0
    if isinstance(model, FullDecoherence):
        return 0.0
    if isinstance(model, Partial):
        return model.amplitudes.visibility
    if isinstance(model, TwoSided):
        model = Mixed(model.as_mixture())
    if isinstance(model, Mixed):
        mix = model.mixture
        inner = 0.0 if isinstance(mix.inner, FullDecoherence) else mix.inner.visibility
        return mix.w1 * inner + mix.w2
    raise ValidationError(f"unknown environment model {model!r}")
