import numpy as np
import pytest

from vqembed.errors import InvalidInputError
from vqembed.exact import ground, marginal
from vqembed.models import build_quadratic_fermion, erdos_renyi, free_fermion_energy
from vqembed.qinfo import parity_violation
from vqembed.relax import (
    ClusterLayout,
    check_weights,
    default_weights,
    random_weights,
    reorder_state,
    solve_relaxation,
)

from .helpers import MODEL_BUILDERS

SLACK = 1e-6


def _instance(name, seed, n=6, p=0.5):
    return MODEL_BUILDERS[name](erdos_renyi(n, p, seed))


@pytest.mark.parametrize("name", sorted(MODEL_BUILDERS))
@pytest.mark.parametrize("seed", [0, 1])
def test_sandwich(name, seed):
    H = _instance(name, seed)
    lay = ClusterLayout.singletons(H)
    E0 = ground(H).ground_energy
    tol = SLACK * (1 + abs(E0))
    vals = {s: solve_relaxation(H, lay, s, marginals=False).value for s in ("anderson", "e12_prime", "e12_pairwise")}
    assert vals["anderson"] <= vals["e12_prime"] + tol
    assert vals["e12_prime"] <= vals["e12_pairwise"] + tol
    assert vals["e12_pairwise"] <= E0 + tol


@pytest.mark.parametrize("name", sorted(MODEL_BUILDERS))
@pytest.mark.parametrize("groups", [[[0, 2], [1, 3]], [[0, 3], [1, 2, 4]]])
def test_two_groups_are_exact(name, groups):
    n = sum(len(g) for g in groups)
    H = _instance(name, 2, n=n, p=0.7)
    lay = ClusterLayout.from_groups(H, groups)
    E0 = ground(H).ground_energy
    val = solve_relaxation(H, lay, "e12_pairwise", marginals=False).value
    assert abs(val - E0) <= 1e-5 * (1 + abs(E0))


@pytest.mark.parametrize("name", sorted(MODEL_BUILDERS))
def test_pairwise_equals_sos(name):
    H = _instance(name, 3, n=5)
    lay = ClusterLayout.singletons(H)
    E0 = ground(H).ground_energy
    a = solve_relaxation(H, lay, "e12_pairwise", marginals=False).value
    b = solve_relaxation(H, lay, "e12_sos").value
    assert abs(a - b) <= 1e-5 * (1 + abs(E0))


def test_weight_invariance_and_prime_below():
    H = _instance("tfi", 4)
    lay = ClusterLayout.singletons(H)
    rng = np.random.default_rng(0)
    full, prime = [], []
    for _ in range(3):
        w = random_weights(H, lay, rng)
        check_weights(H, lay, w)
        full.append(solve_relaxation(H, lay, "e12_pairwise", weights=w, marginals=False).value)
        prime.append(solve_relaxation(H, lay, "e12_prime", weights=w, marginals=False).value)
    assert max(full) - min(full) <= 1e-5 * (1 + abs(full[0]))
    assert all(p <= f + 1e-6 for p, f in zip(prime, full))


@pytest.mark.parametrize("seed", range(3))
def test_free_fermions_exact_at_first_level(seed):
    rng = np.random.default_rng(seed)
    T = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    T = 0.5 * (T + T.conj().T)
    H = build_quadratic_fermion(T)
    ref = free_fermion_energy(T)
    val = solve_relaxation(H, ClusterLayout.singletons(H), "e1").value
    assert abs(val - ref) <= 1e-5 * (1 + abs(ref))


def test_e1_is_a_lower_bound():
    H = _instance("xxz", 5)
    assert solve_relaxation(H, ClusterLayout.singletons(H), "e1").value <= ground(H).ground_energy + 1e-6


def test_real_mode_matches_complex():
    H = _instance("xxz", 1, n=5)
    lay = ClusterLayout.singletons(H)
    a = solve_relaxation(H, lay, "e12_pairwise", real=True, marginals=False).value
    b = solve_relaxation(H, lay, "e12_pairwise", real=False, marginals=False).value
    assert abs(a - b) < 1e-6


@pytest.mark.parametrize("name", sorted(MODEL_BUILDERS))
def test_marginals_are_states_and_consistent(name):
    H = _instance(name, 0, n=5)
    res = solve_relaxation(H, ClusterLayout.singletons(H), "e12_pairwise")
    m = res.marginals
    assert not m.warnings
    for rho in m.matrices.values():
        assert abs(np.trace(rho) - 1) < 1e-10
        assert np.linalg.eigvalsh(rho).min() > -1e-10
        if m.kind == "fermion":
            assert parity_violation(rho) < 1e-8
    assert max(m.consistency.values()) < 1e-6


def test_two_group_marginal_is_the_ground_marginal():
    H = _instance("tfi", 1, n=4)
    lay = ClusterLayout.from_groups(H, [[0, 1], [2, 3]])
    res = solve_relaxation(H, lay, "e12_pairwise")
    gs = ground(H)
    assert gs.gap > 1e-3
    ref = marginal(gs.ground_state, [0, 1, 2, 3]).matrix
    np.testing.assert_allclose(res.marginals.matrices[(0, 1)], ref, atol=1e-4)


def test_anderson_with_default_weights_matches_explicit():
    H = _instance("tfi", 2)
    lay = ClusterLayout.singletons(H)
    a = solve_relaxation(H, lay, "anderson")
    b = solve_relaxation(H, lay, "anderson", weights=default_weights(H, lay))
    assert a.value == pytest.approx(b.value, abs=1e-12)
    assert a.weights_digest == b.weights_digest


def test_reorder_state_round_trip(rng):
    from .helpers import random_density

    rho = random_density(rng, 8)
    for kind in ("spin", "fermion"):
        moved = reorder_state(rho, [0, 1, 2], [2, 0], kind)
        back = reorder_state(moved, [2, 0, 1], [0, 1], kind)
        np.testing.assert_allclose(back, rho, atol=1e-14)


def test_layout_validation():
    H = _instance("tfi", 0)
    with pytest.raises(InvalidInputError):
        ClusterLayout.from_groups(H, [[0, 1], [1, 2, 3, 4, 5]])
    with pytest.raises(InvalidInputError):
        ClusterLayout.uniform(H, 0)
    with pytest.raises(InvalidInputError):
        solve_relaxation(H, ClusterLayout.singletons(H), "e3")
    assert ClusterLayout.uniform(H, 4).site_groups() == [[0, 1, 2, 3], [4, 5]]
