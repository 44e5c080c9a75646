import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vqembed.errors import DegenerateInputError, InvalidInputError
from vqembed.qinfo import (
    CORRELATION,
    ENTANGLEMENT,
    InfoTable,
    adjacency_from_edges,
    detect_gap,
    entanglement_rel_entropy,
    min_partial_transpose_eig,
    mutual_information,
    normalize,
    pair_tables,
    parity_violation,
    relative_entropy,
    subsystem_mutual_information,
    von_neumann_entropy,
)

from .helpers import random_density, random_pure

BELL = np.array([1, 0, 0, 1]) / np.sqrt(2)


def _haar_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _isotropic(F):
    phi = np.outer(BELL, BELL)
    return F * phi + (1 - F) * (np.eye(4) - phi) / 3


def test_bell_mutual_information():
    assert abs(mutual_information(np.outer(BELL, BELL), 2, 2) - 2 * np.log(2)) < 1e-9


def test_entropy_of_maximally_mixed():
    assert von_neumann_entropy(np.eye(8) / 8) == pytest.approx(np.log(8), abs=1e-12)


def test_relative_entropy_support():
    rho = np.diag([0.5, 0.5])
    assert relative_entropy(rho, np.diag([1.0, 0.0])) == np.inf
    assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("F", [0.6, 0.75, 0.9])
def test_isotropic_closed_form(F):
    ref = F * np.log(2 * F) + (1 - F) * np.log(2 * (1 - F))
    assert abs(entanglement_rel_entropy(_isotropic(F), 2, 2, restarts=2) - ref) < 1e-6


def test_separable_isotropic_is_zero():
    assert entanglement_rel_entropy(_isotropic(0.4), 2, 2, restarts=2) < 1e-6


@pytest.mark.parametrize("seed", range(4))
def test_pure_state_matches_reduced_entropy(seed):
    rng = np.random.default_rng(seed)
    rho = random_pure(rng, 4)
    ref = von_neumann_entropy(rho.reshape(2, 2, 2, 2).trace(axis1=1, axis2=3))
    assert abs(entanglement_rel_entropy(rho, 2, 2, restarts=2, seed=seed) - ref) < 1e-3


def test_partial_transpose_criterion():
    assert min_partial_transpose_eig(np.outer(BELL, BELL), 2, 2) == pytest.approx(-0.5)
    assert min_partial_transpose_eig(_isotropic(0.5), 2, 2) == pytest.approx(0.0, abs=1e-12)


def test_separable_mixture_is_exactly_zero(rng):
    # a mixture of products is separable but not a product state
    rho = sum(w * np.kron(random_density(rng, 2), random_density(rng, 3)) for w in (0.2, 0.3, 0.5))
    assert mutual_information(rho, 2, 3) > 1e-4
    est = entanglement_rel_entropy(rho, 2, 3, details=True)
    assert est.value == 0.0 and est.restarts == 0


def test_product_state_gives_zero(rng):
    rho = np.kron(random_density(rng, 2), random_density(rng, 2))
    assert entanglement_rel_entropy(rho, 2, 2, restarts=1) < 1e-6
    assert mutual_information(rho, 2, 2) < 1e-10


@settings(max_examples=8)
@given(st.integers(0, 2**31 - 1), st.integers(1, 4))
def test_entanglement_below_mutual_information(seed, rank):
    rho = random_density(np.random.default_rng(seed), 4, rank)
    assert entanglement_rel_entropy(rho, 2, 2, restarts=1) <= mutual_information(rho, 2, 2) + 1e-9


@settings(max_examples=20)
@given(st.integers(0, 2**31 - 1))
def test_mutual_information_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 8)
    U = np.kron(_haar_unitary(rng, 2), _haar_unitary(rng, 4))
    a = mutual_information(rho, 2, 4)
    b = mutual_information(U @ rho @ U.conj().T, 2, 4)
    assert a == pytest.approx(b, abs=1e-10)
    assert a >= -1e-12


def test_entanglement_local_unitary_invariance(rng):
    rho = random_density(rng, 4, rank=2)
    U = np.kron(_haar_unitary(rng, 2), _haar_unitary(rng, 2))
    a = entanglement_rel_entropy(rho, 2, 2, restarts=2)
    b = entanglement_rel_entropy(U @ rho @ U.conj().T, 2, 2, restarts=2)
    assert a == pytest.approx(b, abs=1e-5)


def test_details_and_bad_arguments():
    est = entanglement_rel_entropy(np.outer(BELL, BELL), 2, 2, restarts=1, details=True)
    assert est.restarts == 1 and float(est) == est.value
    with pytest.raises(InvalidInputError):
        entanglement_rel_entropy(np.eye(4) / 4, 2, 3)
    with pytest.raises(InvalidInputError):
        entanglement_rel_entropy(np.eye(4) / 4, 2, 2, restarts=0)


def test_subsystem_mutual_information_overlap():
    psi = np.kron(BELL, np.array([1.0, 0.0]))
    rho = np.outer(psi, psi)
    assert subsystem_mutual_information(rho, [0, 1, 2], [0], [1]) == pytest.approx(2 * np.log(2))
    assert subsystem_mutual_information(rho, [0, 1, 2], [0, 1], [1, 2]) == pytest.approx(2 * np.log(2))
    assert subsystem_mutual_information(rho, [0, 1, 2], [0], [2]) == pytest.approx(0.0, abs=1e-12)


def test_info_table_validation():
    with pytest.raises(InvalidInputError):
        InfoTable(2, np.array([[0.0, 1.0], [0.5, 0.0]]), CORRELATION)
    with pytest.raises(InvalidInputError):
        InfoTable(2, np.array([[1.0, 0.0], [0.0, 0.0]]), CORRELATION)
    with pytest.raises(InvalidInputError):
        InfoTable(2, np.array([[0.0, -1.0], [-1.0, 0.0]]), CORRELATION)


def _table(vals):
    n = int(round((1 + np.sqrt(1 + 8 * len(vals))) / 2))
    M = np.zeros((n, n))
    M[np.triu_indices(n, 1)] = vals
    return InfoTable(n, M + M.T, ENTANGLEMENT)


def test_normalize():
    t = normalize(_table([0.2, 0.4, 0.1]))
    assert t.normalized and t.values.max() == 1.0
    with pytest.raises(DegenerateInputError):
        normalize(_table([0.0, 0.0, 0.0]))


def test_detect_gap_example():
    t = _table([0.9, 0.85, 0.01, 0.02, 0.015, 0.8])
    rep = detect_gap(t)
    assert rep.gap_index == 3
    assert sorted(rep.edges()) == [(0, 1), (0, 2), (2, 3)]
    np.testing.assert_array_equal(rep.adjacency, adjacency_from_edges(4, [(0, 1), (0, 2), (2, 3)]))


def test_detect_gap_degenerate():
    with pytest.raises(DegenerateInputError):
        detect_gap(_table([0.3, 0.3, 0.3]))


@settings(max_examples=30)
@given(st.lists(st.floats(1e-3, 1.0), min_size=6, max_size=6, unique=True), st.floats(1e-2, 1e2))
def test_detect_gap_scale_invariant(vals, scale):
    a = detect_gap(_table(vals))
    b = detect_gap(_table([v * scale for v in vals]))
    assert a.gap_index == b.gap_index
    np.testing.assert_array_equal(a.adjacency, b.adjacency)


def test_pair_tables_on_product_state():
    up = np.array([1.0, 0.0])
    psi = np.kron(np.kron(up, up), up)
    for which in (CORRELATION, ENTANGLEMENT):
        t = pair_tables(psi, which, es_opts={"restarts": 1} if which == ENTANGLEMENT else None)
        assert t.n == 3 and np.abs(t.values).max() < 1e-6


def test_pair_tables_groups_on_bell_pairs():
    psi = np.kron(BELL, BELL)
    t = pair_tables(psi, CORRELATION, groups=[[0], [1], [2, 3]])
    assert t.entry(0, 1) == pytest.approx(2 * np.log(2))
    assert t.entry(0, 2) == pytest.approx(0.0, abs=1e-12)


def test_parity_violation():
    assert parity_violation(np.diag([0.5, 0.5])) == 0.0
    assert parity_violation(np.full((2, 2), 0.5)) == 0.5
