import math

import numpy as np
import pytest

from tcdsim.channels import (
    FullDecoherence,
    IntensityMixture,
    Isolated,
    Mixed,
    Partial,
    PartialWhichPath,
    model_reduced,
)
from tcdsim.errors import ValidationError
from tcdsim.geometry import DEFAULT_GEOMETRY, DEFAULT_GRID
from tcdsim.montecarlo import (
    BinnedDensity,
    Histogram,
    SampleConfig,
    analytic_delta_histogram,
    chi2_statistic,
    engine_delta_histogram,
    enumerate_outcomes,
    run_sampler,
    sample_events,
    tv_distance,
)

G = DEFAULT_GEOMETRY
GRID = DEFAULT_GRID
PARTIAL = Partial(PartialWhichPath.from_real_n(0.6))


def hist(counts, edges=None):
    edges = np.arange(len(counts) + 1.0) if edges is None else edges
    return Histogram(edges, counts, sum(counts))


def test_tv_examples():
    e = np.arange(3.0)
    assert tv_distance(hist([5, 5]), BinnedDensity(e, [0.5, 0.5])) == 0
    assert tv_distance(hist([10, 0]), BinnedDensity(e, [0.0, 1.0])) == 1
    assert tv_distance(hist([5, 5]), BinnedDensity(e, [0.6, 0.4])) == pytest.approx(0.1, abs=1e-15)


def test_tv_edge_mismatch():
    with pytest.raises(ValidationError):
        tv_distance(hist([5, 5]), BinnedDensity(np.array([0.0, 1.5, 2.0]), [0.5, 0.5]))


def test_chi2_examples():
    e = np.arange(3.0)
    assert chi2_statistic(hist([50, 50]), BinnedDensity(e, [0.5, 0.5])) == (0.0, 1, False)
    r = chi2_statistic(hist([60, 40]), BinnedDensity(e, [0.5, 0.5]))
    assert r.statistic == pytest.approx(4.0)
    assert r.dof == 1
    # expected (3, 3): the pair merges into one group
    r = chi2_statistic(hist([4, 2]), BinnedDensity(e, [0.5, 0.5]))
    assert r == (0.0, 0, True)
    with pytest.raises(ValidationError):
        chi2_statistic(hist([1, 1]), BinnedDensity(e, [0.5, 0.5]))


def test_histogram_validation():
    with pytest.raises(ValidationError):
        Histogram([0, 1, 1], [1, 1], 2)
    with pytest.raises(ValidationError):
        Histogram([0, 1, 2], [1, 1], 3)


def test_outcome_weights_follow_born_rule():
    outs = enumerate_outcomes(Mixed(IntensityMixture(0.3, PartialWhichPath.from_real_n(0.6))))
    assert sum(o.weight for o in outs) == pytest.approx(1, abs=1e-14)
    by = {(o.branch, o.record): o.weight for o in outs}
    # each record state carries |n|^2 + |m|^2 = 1/2 of the scattered branch
    assert by[(0, 1)] == pytest.approx(0.15)
    assert by[(0, 2)] == pytest.approx(0.15)
    assert by[(1, 0)] == pytest.approx(0.7)


def test_analytic_prediction_matches_engine_binning():
    cfg = SampleConfig(samples=1, bins=64)
    for model in (Isolated(), FullDecoherence(), PARTIAL, Mixed(IntensityMixture(0.3))):
        a = analytic_delta_histogram(model, G, GRID, cfg)
        e = engine_delta_histogram(model_reduced(model), G, GRID, cfg)
        np.testing.assert_allclose(a.probabilities, e.probabilities, atol=1e-13)


def test_determinism_and_seed_sensitivity():
    cfg = SampleConfig(samples=150_000, seed=11)
    h1 = sample_events(PARTIAL, G, GRID, cfg)
    h2 = sample_events(PARTIAL, G, GRID, cfg)
    h3 = sample_events(PARTIAL, G, GRID, SampleConfig(samples=150_000, seed=12))
    np.testing.assert_array_equal(h1.counts, h2.counts)
    assert not np.array_equal(h1.counts, h3.counts)
    assert h1.total == 150_000


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_worker_count_does_not_change_counts(workers):
    cfg = SampleConfig(samples=300_001, seed=3)
    ref = sample_events(Mixed(IntensityMixture(0.4)), G, GRID, cfg, workers=1)
    got = sample_events(Mixed(IntensityMixture(0.4)), G, GRID, cfg, workers=workers)
    assert got.counts.tobytes() == ref.counts.tobytes()


def test_delta_y_range_restricts_histogram():
    cfg = SampleConfig(samples=50_000, seed=1, bins=10, delta_y_range=(-0.05, 0.05))
    h = sample_events(Isolated(), G, GRID, cfg)
    assert h.edges[0] == -0.05 and h.edges[-1] == 0.05
    assert 0 < h.total < 50_000
    assert tv_distance(h, analytic_delta_histogram(Isolated(), G, GRID, cfg)) < 0.02


def test_branch_frequencies_within_four_sigma():
    w1 = 0.3
    p = PartialWhichPath.from_real_n(0.6)
    n_events = 400_000
    run = run_sampler(Mixed(IntensityMixture(w1, p)), G, GRID,
                      SampleConfig(samples=n_events, seed=5))
    scattered = run.branch_counts()[0]
    sigma = math.sqrt(n_events * w1 * (1 - w1))
    assert abs(scattered - n_events * w1) <= 4 * sigma
    rec = run.record_counts(0)
    # Born weight of detector 1 among scattered events is |n|^2 + |m|^2 over 2(|n|^2 + |m|^2)
    q = 0.5
    sigma = math.sqrt(scattered * q * (1 - q))
    assert abs(rec[1] - scattered * q) <= 4 * sigma


@pytest.mark.slow
@pytest.mark.parametrize("model", [Isolated(), FullDecoherence(), PARTIAL, Mixed(IntensityMixture(0.3))])
def test_million_event_histograms_match(model):
    cfg = SampleConfig(samples=1_000_000, seed=2024)
    h = sample_events(model, G, GRID, cfg, workers=4)
    pred = analytic_delta_histogram(model, G, GRID, cfg)
    assert tv_distance(h, pred) <= 0.01
    chi2 = chi2_statistic(h, pred)
    # loose sanity bound far beyond the 64-bin chi-square bulk
    assert chi2.statistic < 3 * chi2.dof


def test_spherical_mode_sampler_matches_engine_prediction():
    cfg = SampleConfig(samples=200_000, seed=9)
    h = sample_events(Isolated(), G, GRID, cfg, mode="spherical")
    pred = engine_delta_histogram(model_reduced(Isolated()), G, GRID, cfg, mode="spherical")
    assert tv_distance(h, pred) <= 0.01
