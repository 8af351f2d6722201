"""Sources where only some pairs scatter a photon.

With probability w1 the pair is decohered and with w2 = 1 - w1 it is left alone;
coincidence visibility is then 1 - w1.  Independent scattering at two sides
with probabilities p_a and p_b gives w1 = p_a + p_b - p_a p_b.
"""
# %%
from tcdsim import DEFAULT_GEOMETRY, DEFAULT_GRID, IntensityMixture, Mixed, TwoSided, model_reduced
from tcdsim import two_sided_scatter_probability
from tcdsim.observables import joint_density, visibility


def coincidence_v(model):
    return visibility(joint_density(model_reduced(model), DEFAULT_GEOMETRY, grid_a=DEFAULT_GRID)).v


for w1 in (0.0, 0.25, 0.5, 0.75, 1.0):
    print(f"w1 = {w1:.2f}: V = {coincidence_v(Mixed(IntensityMixture(w1))):.9f}")

# %% Two independent scattering sites.
w1 = two_sided_scatter_probability(0.1, 0.1)
print(f"p_a = p_b = 0.1 gives w1 = {w1!r}, close to the first-order value 0.2")
print(f"visibility of that source: {coincidence_v(TwoSided(0.1, 0.1)):.9f}")
