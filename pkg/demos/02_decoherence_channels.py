"""Photon scattering that records which slit each particle used.

A complete record (orthogonal detector states) kills the coincidence fringes.
A partial record keeps a visibility of 4nm for real amplitudes n, m.
"""
# %%
import math

import numpy as np

from tcdsim import (
    DEFAULT_GEOMETRY,
    DEFAULT_GRID,
    PartialWhichPath,
    apply_full_decoherence,
    apply_partial_decoherence,
    attach_environment,
    initial_state,
    reduced_two_particle,
)
from tcdsim.observables import joint_density, visibility

g = DEFAULT_GEOMETRY
psi = attach_environment(initial_state())
print("state with the environment attached lives in dimension", psi.layout.dim)

# %% Full record: the bath ends up in |e1> or |e2> depending on the branch.
phi = apply_full_decoherence(psi)
rho = reduced_two_particle(phi)
print("reduced state after a full record:")
print(np.round(rho.mat.real, 3))
v = joint_density(rho, g, grid_a=DEFAULT_GRID).values
print(f"relative flatness of the coincidence map: {(v.max() - v.min()) / v.mean():.1e}")

# %% Partial record at the two wavelength limits and one point in between.
for label, p in [("short wavelength", PartialWhichPath(1 / math.sqrt(2), 0)),
                 ("long wavelength", PartialWhichPath(0.5, 0.5)),
                 ("n = 0.6", PartialWhichPath.from_real_n(0.6))]:
    rho = reduced_two_particle(apply_partial_decoherence(psi, p))
    vis = visibility(joint_density(rho, g, grid_a=DEFAULT_GRID)).v
    print(f"{label:>17}: V = {vis:.6f}   4nm = {4 * (p.n * p.m).real:.6f}")
