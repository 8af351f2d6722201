"""An isolated entangled pair: coincidence fringes without single-particle fringes.

Run with ``python3 demos/01_isolated_fringes.py``.
"""
# %%
import numpy as np

from tcdsim import DEFAULT_GEOMETRY, DEFAULT_GRID, Isolated, model_density, model_reduced
from tcdsim.linalg import partial_trace
from tcdsim.observables import closed_form, fringe_ratio, joint_density, single_particle_density, visibility

g = DEFAULT_GEOMETRY
print(f"k = {g.wavenumber:.4e} 1/m, theta = {g.theta:.2e}, fringe period in dy = {g.fringe_period * 1e3:.1f} mm")

# %% The pair state (|R1 L1> + |R2 L2>)/sqrt2, reduced to the two slit qubits.
rho_ab = model_reduced(Isolated())
print("two-particle density matrix (real part):")
print(np.round(rho_ab.mat.real, 3))

# %% Coincidence map on a 201 x 201 screen grid.
joint = joint_density(rho_ab, g, grid_a=DEFAULT_GRID)
ref = closed_form("isolated", g, joint.delta_y())
print("joint map depends only on dy:", np.allclose(joint.values / joint.values.max(), ref, atol=1e-12))
print(f"coincidence visibility: {visibility(joint).v:.12f}")

# %% One particle alone sees no fringes: its slit qubit is maximally mixed.
rho_a = partial_trace(model_density(Isolated()), {"a-slit"})
single = single_particle_density(rho_a, g, grid=DEFAULT_GRID)
print("rho_a =", np.round(rho_a.mat.real, 3).tolist())
print(f"single-particle fringe ratio |c1|/c0: {fringe_ratio(single):.2e}")
