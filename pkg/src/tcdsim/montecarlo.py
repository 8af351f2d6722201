"""
Monte Carlo coincidence sampler used as an independent check of the
density-matrix engine.

Each event is drawn in two stages.  First the classical branch (scattered or
not, with probabilities ``w1``/``w2``) and the environment record ``e_k`` are
chosen with Born-rule weights.  Then a position pair is drawn from the
conditional pure two-particle state ``<e_k|state>`` by inverting the
discrete CDF of its joint density on a ``grid_points x grid_points`` lattice.

Events are generated in fixed-size blocks, block ``b`` using its own Philox
stream keyed by ``(seed, b)``, so results do not depend on how blocks are
spread over worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .channels import EnvironmentModel, expected_visibility, pure_components
from .errors import SamplingError, ValidationError
from .geometry import DEFAULT_MODE, AmplitudeMode, Geometry, ScreenGrid, slit_amplitude

BLOCK_SIZE = 1 << 16


@dataclass(frozen=True)
class SampleConfig:
    samples: int = 1_000_000
    seed: int = 0
    bins: int = 64
    delta_y_range: Optional[tuple[float, float]] = None
    grid_points: int = 512

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 1:
            raise ValidationError(f"samples must be a positive integer, got {self.samples!r}")
        if int(self.bins) != self.bins or self.bins < 2:
            raise ValidationError(f"bins must be >= 2, got {self.bins!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValidationError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.grid_points < 2:
            raise ValidationError("grid_points must be >= 2")
        if self.delta_y_range is not None:
            lo, hi = self.delta_y_range
            if not lo < hi:
                raise ValidationError(f"delta_y_range must be increasing, got {self.delta_y_range!r}")
            object.__setattr__(self, "delta_y_range", (float(lo), float(hi)))


@dataclass(frozen=True, eq=False)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    total: int

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if edges.ndim != 1 or edges.size != counts.size + 1 or np.any(np.diff(edges) <= 0):
            raise ValidationError("histogram edges must be strictly increasing, one more than bins")
        if np.any(counts < 0) or int(counts.sum()) != int(self.total):
            raise ValidationError("histogram counts must be nonnegative and sum to total")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "total", int(self.total))

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.total if self.total else np.zeros(self.counts.size)


@dataclass(frozen=True, eq=False)
class BinnedDensity:
    """Analytic probability mass per histogram bin."""

    edges: np.ndarray
    probabilities: np.ndarray


@dataclass(frozen=True)
class Outcome:
    weight: float
    branch: int          # index into pure_components(model)
    record: int          # environment record state 0, 1, 2
    state: np.ndarray = field(repr=False)  # normalized 4-vector


@dataclass(frozen=True, eq=False)
class SampleRun:
    histogram: Histogram
    outcomes: tuple[Outcome, ...]
    outcome_counts: np.ndarray

    def branch_counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for o, c in zip(self.outcomes, self.outcome_counts):
            out[o.branch] = out.get(o.branch, 0) + int(c)
        return out

    def record_counts(self, branch: int) -> dict[int, int]:
        return {o.record: int(c) for o, c in zip(self.outcomes, self.outcome_counts)
                if o.branch == branch}


def enumerate_outcomes(model: EnvironmentModel) -> list[Outcome]:
    """Branch/record pairs with nonzero Born weight and their conditional system states."""
    outcomes = []
    for b, (w, state) in enumerate(pure_components(model)):
        if w <= 0:
            continue
        psi = state.amps.reshape(4, 3)
        for k in range(3):
            amp = psi[:, k]
            p = float(np.vdot(amp, amp).real)
            if p > 1e-15:
                outcomes.append(Outcome(w * p, b, k, amp / math.sqrt(p)))
    return outcomes


def sampling_grid(grid: ScreenGrid, cfg: SampleConfig) -> ScreenGrid:
    return ScreenGrid(grid.y_min, grid.y_max, cfg.grid_points)


def _conditional_cdf(state: np.ndarray, g: Geometry, mode: AmplitudeMode,
                     grid: ScreenGrid) -> np.ndarray:
    y = grid.coordinates
    a = np.stack([slit_amplitude(g, mode, 1, y), slit_amplitude(g, mode, 2, y)])
    c = state.reshape(2, 2)
    psi = np.einsum("ij,ia,jb->ab", c, a, a)
    dens = np.abs(psi.ravel()) ** 2
    cdf = np.cumsum(dens)
    total = cdf[-1]
    if not total > 0 or not np.isfinite(total):
        raise SamplingError("conditional joint density is degenerate")
    return cdf / total


def _bin_table(grid: ScreenGrid, cfg: SampleConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bin index for every lattice offset ``ia - ib`` (-1 when out of range)."""
    n = grid.points
    offsets = np.arange(-(n - 1), n)
    dy = offsets * grid.spacing
    lo, hi = cfg.delta_y_range or (float(dy[0]), float(dy[-1]))
    edges = np.linspace(lo, hi, cfg.bins + 1)
    idx = np.searchsorted(edges, dy, side="right") - 1
    idx[dy == hi] = cfg.bins - 1
    idx[(dy < lo) | (dy > hi)] = -1
    return edges, idx, dy


def _run_block(block: int, size: int, seed: int, outcome_cdf: np.ndarray,
               cdfs: list[np.ndarray], n: int, table: np.ndarray, bins: int):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))
    which = np.searchsorted(outcome_cdf, rng.random(size), side="right")
    which = np.minimum(which, len(cdfs) - 1)
    u = rng.random(size)
    counts = np.zeros(bins, dtype=np.int64)
    per_outcome = np.bincount(which, minlength=len(cdfs)).astype(np.int64)
    for j, cdf in enumerate(cdfs):
        sel = which == j
        if not sel.any():
            continue
        cell = np.minimum(np.searchsorted(cdf, u[sel], side="right"), cdf.size - 1)
        ia, ib = np.divmod(cell, n)
        b = table[ia - ib + n - 1]
        counts += np.bincount(b[b >= 0], minlength=bins)
    return counts, per_outcome


def run_sampler(model: EnvironmentModel, g: Geometry, grid: ScreenGrid, cfg: SampleConfig,
                mode: AmplitudeMode = DEFAULT_MODE, workers: int = 1) -> SampleRun:
    """Draw ``cfg.samples`` coincidence events and histogram ``y_a - y_b``."""
    sgrid = sampling_grid(grid, cfg)
    outcomes = enumerate_outcomes(model)
    if not outcomes:
        raise SamplingError("model has no outcome with positive probability")
    weights = np.array([o.weight for o in outcomes])
    outcome_cdf = np.cumsum(weights) / weights.sum()
    cdfs = [_conditional_cdf(o.state, g, mode, sgrid) for o in outcomes]
    edges, table, _ = _bin_table(sgrid, cfg)

    nblocks = -(-cfg.samples // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, cfg.samples - b * BLOCK_SIZE) for b in range(nblocks)]

    def job(b):
        return _run_block(b, sizes[b], int(cfg.seed), outcome_cdf, cdfs, sgrid.points,
                          table, cfg.bins)

    if workers <= 1:
        results = [job(b) for b in range(nblocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, range(nblocks)))
    counts = np.zeros(cfg.bins, dtype=np.int64)
    per_outcome = np.zeros(len(outcomes), dtype=np.int64)
    for c, p in results:
        counts += c
        per_outcome += p
    hist = Histogram(edges, counts, int(counts.sum()))
    return SampleRun(hist, tuple(outcomes), per_outcome)


def sample_events(model: EnvironmentModel, g: Geometry, grid: ScreenGrid, cfg: SampleConfig,
                  mode: AmplitudeMode = DEFAULT_MODE, workers: int = 1) -> Histogram:
    return run_sampler(model, g, grid, cfg, mode=mode, workers=workers).histogram


def analytic_delta_histogram(model: EnvironmentModel, g: Geometry, grid: ScreenGrid,
                             cfg: SampleConfig) -> BinnedDensity:
    """Expected ``y_a - y_b`` bin masses from the closed-form fringe law.

    Far-field densities depend only on ``dy`` as ``1 + V cos(2 k theta dy)``;
    summing that over the sampling lattice gives the exact bin masses of the
    discretized sampler without touching the density-matrix engine.
    """
    sgrid = sampling_grid(grid, cfg)
    edges, table, dy = _bin_table(sgrid, cfg)
    n = sgrid.points
    multiplicity = n - np.abs(np.arange(-(n - 1), n))
    v = expected_visibility(model)
    mass = multiplicity * (1.0 + v * np.cos(g.fringe_frequency * dy))
    keep = table >= 0
    probs = np.bincount(table[keep], weights=mass[keep], minlength=cfg.bins)
    return BinnedDensity(edges, probs / math.fsum(probs))


def engine_delta_histogram(rho_ab, g: Geometry, grid: ScreenGrid, cfg: SampleConfig,
                           mode: AmplitudeMode = DEFAULT_MODE) -> BinnedDensity:
    """Expected bin masses from the engine's joint density on the sampling lattice."""
    from .observables import joint_density

    sgrid = sampling_grid(grid, cfg)
    edges, table, _ = _bin_table(sgrid, cfg)
    vals = joint_density(rho_ab, g, mode, sgrid).values
    n = sgrid.points
    offsets = np.subtract.outer(np.arange(n), np.arange(n)) + n - 1
    b = table[offsets]
    keep = b >= 0
    probs = np.bincount(b[keep], weights=vals[keep], minlength=cfg.bins)
    return BinnedDensity(edges, probs / math.fsum(probs))


def _check_edges(h: Histogram, analytic: BinnedDensity):
    if h.edges.shape != np.shape(analytic.edges) or not np.allclose(
            h.edges, analytic.edges, rtol=0, atol=1e-12 * np.max(np.abs(h.edges))):
        raise ValidationError("histogram and analytic prediction use different bin edges")


def tv_distance(h: Histogram, analytic: BinnedDensity) -> float:
    """Total variation distance ``0.5 * sum |p_i - q_i|``."""
    _check_edges(h, analytic)
    if h.total == 0:
        raise ValidationError("empty histogram")
    p = h.probabilities
    q = np.asarray(analytic.probabilities, dtype=float)
    return 0.5 * math.fsum(np.abs(p - q))


class Chi2Result(NamedTuple):
    statistic: float
    dof: int
    degenerate: bool


def chi2_statistic(h: Histogram, analytic: BinnedDensity, min_expected: float = 5.0) -> Chi2Result:
    """Pearson chi-square against expected counts ``total * q``.

    Adjacent bins are merged left to right until each group expects at
    least ``min_expected`` counts; a short tail joins the last group.
    """
    _check_edges(h, analytic)
    expected = np.asarray(analytic.probabilities, dtype=float) * h.total
    if expected.sum() < min_expected:
        raise ValidationError("too few events for a chi-square test")
    groups_obs, groups_exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(h.counts, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            groups_obs.append(acc_o)
            groups_exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        groups_obs[-1] += acc_o
        groups_exp[-1] += acc_e
    if len(groups_obs) < 2:
        return Chi2Result(0.0, 0, True)
    obs = np.array(groups_obs)
    exp = np.array(groups_exp)
    stat = math.fsum((obs - exp) ** 2 / exp)
    return Chi2Result(stat, len(obs) - 1, False)
