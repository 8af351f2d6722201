import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tcdsim.errors import LayoutError, ValidationError
from tcdsim.linalg import (
    FULL_LAYOUT,
    SYSTEM_LAYOUT,
    DensityOperator,
    HilbertLayout,
    StateVector,
    dm_from_state,
    eig_hermitian,
    jacobi_eigvalsh,
    kron,
    partial_trace,
    purity,
    trace,
)

Q1 = HilbertLayout.of(("q1", 2))
Q2 = HilbertLayout.of(("q2", 2))
H = 1 / math.sqrt(2)


def bell_like():
    return StateVector(SYSTEM_LAYOUT, [0, H, H, 0])


def test_layout_rejects_duplicates_and_reports_dim():
    assert FULL_LAYOUT.dim == 12
    assert SYSTEM_LAYOUT.dim == 4
    with pytest.raises(LayoutError):
        HilbertLayout.of(("x", 2), ("x", 3))
    with pytest.raises(LayoutError):
        HilbertLayout.of(("x", 0))


def test_flat_index_is_env_fastest():
    # |R2>|L1>|e2>
    assert FULL_LAYOUT.flat_index((1, 0, 2)) == 6 + 0 + 2


def test_kron_basis_vectors():
    v = kron(StateVector(Q1, [1, 0]), StateVector(Q2, [0, 1]))
    np.testing.assert_array_equal(v.amps, [0, 1, 0, 0])
    assert v.layout.labels == ("q1", "q2")


def test_kron_identity_mixtures():
    rho = kron(DensityOperator(Q1, np.eye(2) / 2), DensityOperator(Q2, np.eye(2) / 2))
    np.testing.assert_allclose(rho.mat, np.eye(4) / 4, atol=0)


def test_kron_plus_states():
    plus = [H, H]
    v = kron(StateVector(Q1, plus), StateVector(Q2, plus))
    np.testing.assert_allclose(v.amps, 0.5, atol=1e-15)


def test_kron_label_clash():
    with pytest.raises(LayoutError, match="conflict"):
        kron(StateVector(Q1, [1, 0]), StateVector(Q1, [1, 0]))


def test_dm_from_state_examples():
    np.testing.assert_array_equal(dm_from_state(StateVector(Q1, [1, 0])).mat, [[1, 0], [0, 0]])
    rho = dm_from_state(StateVector(Q1, [H, 1j * H])).mat
    np.testing.assert_allclose(rho, [[0.5, -0.5j], [0.5j, 0.5]], atol=1e-15)


def test_dm_of_entangled_pair_couples_the_two_populated_pairs():
    rho = dm_from_state(bell_like()).mat
    expected = np.zeros((4, 4))
    for i, j in itertools.product((1, 2), repeat=2):
        expected[i, j] = 0.5
    np.testing.assert_allclose(rho, expected, atol=1e-15)
    assert purity(dm_from_state(bell_like())) == pytest.approx(1, abs=1e-12)


def test_unnormalized_state_rejected():
    with pytest.raises(ValidationError):
        StateVector(Q1, [1, 1])


def test_partial_trace_of_pair_is_maximally_mixed():
    rho_a = partial_trace(dm_from_state(bell_like()), {"a-slit"})
    np.testing.assert_allclose(rho_a.mat, np.eye(2) / 2, atol=1e-15)
    assert rho_a.layout.labels == ("a-slit",)
    assert purity(rho_a) == pytest.approx(0.5, abs=1e-15)


def test_partial_trace_keep_all_is_identity():
    rho = dm_from_state(bell_like())
    np.testing.assert_array_equal(partial_trace(rho, {"b-slit", "a-slit"}).mat, rho.mat)


def test_partial_trace_errors():
    rho = dm_from_state(bell_like())
    with pytest.raises(LayoutError):
        partial_trace(rho, {"nope"})
    with pytest.raises(LayoutError):
        partial_trace(rho, set())


def test_trace_and_purity_examples():
    mixed = DensityOperator(Q1, np.eye(2) / 2)
    assert purity(mixed) == pytest.approx(0.5)
    assert trace(mixed) == pytest.approx(1.0)


def test_eig_examples():
    np.testing.assert_allclose(eig_hermitian(DensityOperator(Q1, np.eye(2) / 2)), [0.5, 0.5])
    np.testing.assert_allclose(eig_hermitian(np.array([[1, 0], [0, 0]])), [0, 1])
    # diagonal 4x4 operator with two entries 1/2: eigenvalues by inspection
    rho = np.diag([0, 0.5, 0.5, 0]).astype(complex)
    np.testing.assert_allclose(eig_hermitian(rho), [0, 0, 0.5, 0.5], atol=1e-15)


def test_eig_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        eig_hermitian(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7, 12, 16])
def test_jacobi_matches_lapack(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        a = (a + a.conj().T) / (2 * n)
        np.testing.assert_allclose(jacobi_eigvalsh(a), np.linalg.eigvalsh(a), atol=1e-13)


def test_jacobi_degenerate_spectrum():
    rng = np.random.default_rng(5)
    q, _ = np.linalg.qr(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
    lam = np.array([0.1, 0.1, 0.1, 0.3, 0.2, 0.2])
    a = q @ np.diag(lam) @ q.conj().T
    np.testing.assert_allclose(jacobi_eigvalsh(a), np.sort(lam), atol=1e-14)


# --- properties -------------------------------------------------------------

dims = st.lists(st.integers(1, 3), min_size=1, max_size=3).filter(lambda d: math.prod(d) <= 12)


@st.composite
def random_density(draw):
    ds = draw(dims)
    layout = HilbertLayout(tuple((f"f{i}", d) for i, d in enumerate(ds)))
    seed = draw(st.integers(0, 2**32 - 1))
    rank = draw(st.integers(1, layout.dim))
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(layout.dim, rank)) + 1j * rng.normal(size=(layout.dim, rank))
    m = g @ g.conj().T
    return DensityOperator(layout, m / np.trace(m).real)


@settings(max_examples=60, deadline=None)
@given(random_density(), st.data())
def test_partial_trace_preserves_trace(rho, data):
    keep = data.draw(st.sets(st.sampled_from(rho.layout.labels), min_size=1))
    red = partial_trace(rho, keep)
    assert trace(red) == pytest.approx(trace(rho), abs=1e-12)
    assert red.layout.labels == tuple(l for l in rho.layout.labels if l in keep)


@settings(max_examples=60, deadline=None)
@given(random_density())
def test_density_invariants_and_spectrum(rho):
    ev = eig_hermitian(rho)
    assert ev[0] >= -1e-10
    assert ev.sum() == pytest.approx(trace(rho), abs=1e-10)
    assert 1 / rho.layout.dim - 1e-10 <= purity(rho) <= 1 + 1e-10


@settings(max_examples=40, deadline=None)
@given(random_density(), random_density())
def test_partial_trace_of_product_recovers_factor(r1, r2):
    r2 = DensityOperator(HilbertLayout(tuple((f"g{i}", d) for i, (_, d) in enumerate(r2.layout.factors))),
                         r2.mat)
    if r1.layout.dim * r2.layout.dim > 144:
        return
    both = kron(r1, r2)
    np.testing.assert_allclose(partial_trace(both, set(r1.layout.labels)).mat, r1.mat, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pure_projector_spectrum_and_product_reduction(seed):
    rng = np.random.default_rng(seed)
    parts = [rng.normal(size=d) + 1j * rng.normal(size=d) for d in FULL_LAYOUT.dims]
    parts = [p / np.linalg.norm(p) for p in parts]
    v = StateVector(FULL_LAYOUT, np.kron(np.kron(parts[0], parts[1]), parts[2]))
    rho = dm_from_state(v)
    ev = eig_hermitian(rho)
    np.testing.assert_allclose(ev, [0] * 11 + [1], atol=1e-10)
    assert purity(partial_trace(rho, {"a-slit", "env"})) == pytest.approx(1, abs=1e-12)
