"""Sweep the near-detector amplitude n from 1/2 to 1/sqrt2.

Uses the same sweep routine as ``tcd-sim sweep --param n``.
"""
# %%
import math

from tcdsim.cli import run_sweep
from tcdsim.config import ScenarioConfig, SweepSpec

rows = run_sweep(ScenarioConfig(), SweepSpec("n", 0.5, 1 / math.sqrt(2), 11))
print(f"{'n':>8} {'V engine':>12} {'V = 4nm':>12} {'|diff|':>9}")
for r in rows:
    print(f"{r['value']:8.5f} {r['visibility_engine']:12.9f} {r['visibility_expected']:12.9f} {r['abs_diff']:9.1e}")

# %% Bar chart in the terminal, visibility falling to zero as the record sharpens.
for r in rows:
    print(f"{r['value']:.3f} " + "#" * round(40 * r["visibility_engine"]))
