"""Two-particle interferometer with a photon-bath environment.

Density-matrix engine for the entangled double-slit pair, the which-path
recording channels, screen observables, and a Monte Carlo cross-check.
"""

from .channels import (
    LARGE_WAVELENGTH,
    PRESETS,
    SMALL_WAVELENGTH,
    FullDecoherence,
    IntensityMixture,
    Isolated,
    Mixed,
    Partial,
    PartialWhichPath,
    TwoSided,
    apply_full_decoherence,
    apply_partial_decoherence,
    attach_environment,
    expected_visibility,
    initial_state,
    mixed_density,
    model_density,
    model_reduced,
    reduced_two_particle,
    two_sided_scatter_probability,
)
from .geometry import (
    DEFAULT_GEOMETRY,
    DEFAULT_GRID,
    AmplitudeMode,
    Geometry,
    ScreenGrid,
    grid_coordinates,
    path_length,
    slit_amplitude,
)
from .linalg import (
    DensityOperator,
    HilbertLayout,
    StateVector,
    dm_from_state,
    eig_hermitian,
    kron,
    partial_trace,
    purity,
    trace,
)
from .observables import (
    closed_form,
    joint_density,
    normalize,
    single_particle_density,
    visibility,
)

__version__ = "0.1.0"
