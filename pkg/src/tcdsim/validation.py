"""
Self-check suite behind ``tcd-sim validate``.

Every check pairs the engine with an independent route (closed-form fringe
law, brute-force index summation, or the Monte Carlo sampler) and reports a
measured error against a fixed tolerance.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channels import (
    PRESETS,
    SQRT_HALF,
    FullDecoherence,
    IntensityMixture,
    Isolated,
    Mixed,
    Partial,
    PartialWhichPath,
    apply_full_decoherence,
    attach_environment,
    initial_state,
    model_density,
    model_reduced,
    reduced_two_particle,
    two_sided_scatter_probability,
)
from .geometry import AmplitudeMode, Geometry, ScreenGrid
from .linalg import A_SLIT, FULL_LAYOUT, StateVector, dm_from_state, eig_hermitian, partial_trace
from .montecarlo import SampleConfig, analytic_delta_histogram, sample_events, tv_distance
from .observables import (
    closed_form,
    fringe_ratio,
    joint_density,
    scaled_max_error,
    single_particle_density,
    visibility,
)

FLAT = AmplitudeMode.FRAUNHOFER_FLAT


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: measured {self.measured:.3e} "
                f"(tolerance {self.tolerance:.1e}, {self.seconds:.2f} s)")


def brute_partial_trace(mat: np.ndarray, dims: tuple[int, ...], keep: set[int]) -> np.ndarray:
    """Partial trace by explicit loops over mixed-radix basis indices."""
    kept_dims = [d for i, d in enumerate(dims) if i in keep]
    n_out = math.prod(kept_dims)
    out = np.zeros((n_out, n_out), dtype=complex)

    def flat(digits, ds):
        idx = 0
        for d, dim in zip(digits, ds):
            idx = idx * dim + d
        return idx

    for row in itertools.product(*[range(d) for d in dims]):
        for col in itertools.product(*[range(d) for d in dims]):
            if any(row[i] != col[i] for i in range(len(dims)) if i not in keep):
                continue
            r = flat([row[i] for i in range(len(dims)) if i in keep], kept_dims)
            c = flat([col[i] for i in range(len(dims)) if i in keep], kept_dims)
            out[r, c] += mat[flat(row, dims), flat(col, dims)]
    return out


def _timed(name: str, tol: float, fn: Callable[[], float]) -> CheckResult:
    t0 = time.perf_counter()
    measured = float(fn())
    return CheckResult(name, bool(measured <= tol), measured, tol, time.perf_counter() - t0)


def random_state(rng: np.random.Generator, product: bool) -> StateVector:
    if product:
        parts = [rng.normal(size=d) + 1j * rng.normal(size=d) for d in FULL_LAYOUT.dims]
        amps = parts[0]
        for p in parts[1:]:
            amps = np.kron(amps, p)
    else:
        amps = rng.normal(size=FULL_LAYOUT.dim) + 1j * rng.normal(size=FULL_LAYOUT.dim)
    return StateVector.normalized(FULL_LAYOUT, amps)


def random_amplitudes(rng: np.random.Generator) -> PartialWhichPath:
    t = rng.uniform(0, math.pi / 2)
    n = SQRT_HALF * math.cos(t) * np.exp(1j * rng.uniform(0, 2 * math.pi))
    m = SQRT_HALF * math.sin(t) * np.exp(1j * rng.uniform(0, 2 * math.pi))
    return PartialWhichPath(n, m)


def run_checks(g: Geometry, grid: ScreenGrid, seed: int = 0, samples: int = 1_000_000,
               workers: tuple[int, ...] = (1, 2, 8)) -> list[CheckResult]:
    results = []

    def isolated_fringes():
        m = joint_density(model_reduced(Isolated()), g, FLAT, grid)
        return scaled_max_error(m.values, closed_form("isolated", g, m.delta_y()))

    results.append(_timed("isolated pair reproduces cos^2 fringes", 1e-9, isolated_fringes))

    def full_flat():
        v = joint_density(model_reduced(FullDecoherence()), g, FLAT, grid).values
        return (v.max() - v.min()) / v.mean()

    results.append(_timed("full which-path record gives a flat coincidence map", 1e-12, full_flat))

    def partial_vis():
        worst = 0.0
        for n in np.linspace(0.5, SQRT_HALF, 11):
            p = PartialWhichPath.from_real_n(n)
            v = visibility(joint_density(model_reduced(Partial(p)), g, FLAT, grid)).v
            worst = max(worst, abs(v - 4 * p.n.real * p.m.real))
        return worst

    results.append(_timed("partial record visibility equals 4nm", 1e-9, partial_vis))

    def mixture_vis():
        worst = 0.0
        for w1 in (0.0, 0.25, 0.5, 0.75, 1.0):
            v = visibility(joint_density(model_reduced(Mixed(IntensityMixture(w1))), g, FLAT, grid)).v
            worst = max(worst, abs(v - (1 - w1)))
        return worst

    results.append(_timed("intensity mixture visibility equals 1 - w1", 1e-9, mixture_vis))

    def single():
        worst = 0.0
        for model in PRESETS.values():
            rho_a = partial_trace(model_density(model), {A_SLIT})
            worst = max(worst, fringe_ratio(single_particle_density(rho_a, g, FLAT, grid)))
        return worst

    results.append(_timed("no single-particle fringes for any preset", 1e-9, single))

    def invariants():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(1000):
            model = Mixed(IntensityMixture(rng.uniform(), random_amplitudes(rng)))
            for rho in (model_density(model), model_reduced(model)):
                r = rho.mat
                worst = max(worst,
                            float(np.max(np.abs(r - r.conj().T))) / 1e-12,
                            abs(np.trace(r) - 1) / 1e-12,
                            -float(eig_hermitian(rho)[0]) / 1e-10)
        return worst

    results.append(_timed("random pipelines keep density operators valid (scaled)", 1.0, invariants))

    def ptrace():
        rng = np.random.default_rng(seed + 1)
        worst = 0.0
        for i in range(100):
            rho = dm_from_state(random_state(rng, product=bool(i % 2)))
            for keep in ({0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}):
                labels = {FULL_LAYOUT.labels[k] for k in keep}
                fast = partial_trace(rho, labels).mat
                slow = brute_partial_trace(rho.mat, FULL_LAYOUT.dims, keep)
                worst = max(worst, float(np.max(np.abs(fast - slow))))
        return worst

    results.append(_timed("partial trace matches index-summation oracle", 1e-13, ptrace))

    mc_presets = {
        "isolated": Isolated(),
        "full": FullDecoherence(),
        "partial": Partial(PartialWhichPath.from_real_n(0.6)),
        "mixed": Mixed(IntensityMixture(0.3)),
    }
    cfg = SampleConfig(samples=samples, seed=seed, bins=64)
    for name, model in mc_presets.items():
        def mc(model=model):
            h = sample_events(model, g, grid, cfg)
            return tv_distance(h, analytic_delta_histogram(model, g, grid, cfg))

        results.append(_timed(f"Monte Carlo TV distance, {name}", 0.01, mc))

    def determinism():
        model = mc_presets["partial"]
        runs = [sample_events(model, g, grid, cfg, workers=w).counts.tobytes() for w in workers]
        return float(len(set(runs)) - 1)

    results.append(_timed("Monte Carlo histograms identical across worker counts", 0.0, determinism))

    def two_sided():
        p = two_sided_scatter_probability(0.1, 0.1)
        # 0.19 - 0.2 is 0.01 only up to binary rounding of the decimal literals
        return 0.0 if (p == 0.19 and abs(p - 2 * 0.1) <= 0.01 + 1e-15) else 1.0

    results.append(_timed("two-sided scatter probability is 0.19, about twice 0.1", 0.0, two_sided))

    def chain():
        v = attach_environment(initial_state())
        rho = reduced_two_particle(apply_full_decoherence(v)).mat
        expected = np.zeros((4, 4))
        expected[1, 1] = expected[2, 2] = 0.5
        return float(np.max(np.abs(rho - expected)))

    results.append(_timed("full decoherence reduces to the diagonal block", 1e-15, chain))
    return results
