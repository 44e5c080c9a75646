import json

import numpy as np
import pytest

from vqembed.algebra import SPIN
from vqembed.errors import InvalidInputError
from vqembed.exact import ground
from vqembed.models import (
    Graph,
    build_disordered_tfi,
    build_hubbard_spinless,
    build_quadratic_fermion,
    build_sk,
    build_tfi,
    build_xxz,
    complete_graph,
    erdos_renyi,
    free_fermion_energy,
    gaussian_stream,
)

from .helpers import MODEL_BUILDERS


def test_erdos_renyi_is_reproducible():
    a = erdos_renyi(10, 0.3, 7)
    b = erdos_renyi(10, 0.3, 7)
    assert a.edges == b.edges
    assert erdos_renyi(10, 0.3, 8).edges != a.edges


def test_erdos_renyi_extremes():
    assert erdos_renyi(5, 0.0, 1).edges == ()
    assert erdos_renyi(5, 1.0, 1).edges == complete_graph(5).edges


def test_erdos_renyi_edge_density():
    counts = [len(erdos_renyi(12, 0.3, s).edges) for s in range(200)]
    assert abs(np.mean(counts) / 66 - 0.3) < 0.02


@pytest.mark.parametrize("n,p", [(0, 0.5), (4, 1.5), (4, -0.1)])
def test_erdos_renyi_rejects_bad_parameters(n, p):
    with pytest.raises(InvalidInputError):
        erdos_renyi(n, p, 0)


def test_graph_json_round_trip(tmp_path):
    g = erdos_renyi(7, 0.5, 3)
    path = tmp_path / "g.json"
    path.write_text(json.dumps(g.to_json()))
    h = Graph.load(path)
    assert h.edges == g.edges and h.n == g.n


def test_graph_validation():
    with pytest.raises(InvalidInputError):
        Graph.from_edges(3, [(0, 0)])
    with pytest.raises(InvalidInputError):
        Graph(3, ((0, 5),))


def test_gaussian_stream_moments():
    z = gaussian_stream(np.random.default_rng(0), 20001)
    assert len(z) == 20001
    assert abs(z.mean()) < 0.03 and abs(z.std() - 1) < 0.03


@pytest.mark.parametrize("name", sorted(MODEL_BUILDERS))
def test_models_hermitian_and_real(name, small_graph):
    H = MODEL_BUILDERS[name](small_graph)
    assert H.total().is_hermitian()
    assert H.is_real()


def test_local_pieces_sum_to_total(small_graph):
    H = build_xxz(small_graph, 0.5)
    acc = sum(H.onsite.values(), H.total().scale(0)) + sum(H.pair.values(), H.total().scale(0))
    assert acc.allclose(H.total())


def test_two_site_tfi_ground_energy():
    g = Graph.from_edges(2, [(0, 1)])
    H = build_tfi(g, [1.0, 1.0], [1.0])
    # -X0 - X1 - Z0Z1 has ground energy -sqrt(5) in the even sector
    assert abs(ground(H).ground_energy + np.sqrt(5.0)) < 1e-12


def test_xxz_two_sites_singlet():
    g = Graph.from_edges(2, [(0, 1)])
    # XX + YY + ZZ has the singlet at -3
    assert abs(ground(build_xxz(g, 1.0)).ground_energy + 3.0) < 1e-12


def test_hubbard_two_sites():
    g = Graph.from_edges(2, [(0, 1)])
    H = build_hubbard_spinless(g, 1.0, 1.0)
    # one particle sector: -t bonding state with U(n0-1/2)(n1-1/2) = -U/4
    assert abs(ground(H).ground_energy - (-1.0 - 0.25)) < 1e-12


def test_quadratic_fermion_matches_exact(rng):
    A = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    T = A + A.conj().T
    H = build_quadratic_fermion(T)
    assert abs(ground(H).ground_energy - free_fermion_energy(T)) < 1e-10


def test_quadratic_fermion_rejects_non_hermitian():
    with pytest.raises(InvalidInputError):
        build_quadratic_fermion(np.array([[0, 1], [0, 0]]))


def test_sk_and_disordered_reproducible():
    a, b = build_sk(5, 1.0, 1.0, 3), build_sk(5, 1.0, 1.0, 3)
    assert a.total().allclose(b.total())
    g = erdos_renyi(6, 0.5, 2)
    c = build_disordered_tfi(g, 1.0, 1.0, 0.5, 4)
    assert c.total().allclose(build_disordered_tfi(g, 1.0, 1.0, 0.5, 4).total())
    assert c.kind == SPIN


def test_relabel_preserves_spectrum(small_graph):
    H = MODEL_BUILDERS["tfi"](small_graph)
    perm = [3, 0, 5, 1, 4, 2]
    assert abs(ground(H).ground_energy - ground(H.relabel(perm)).ground_energy) < 1e-10


def test_coefficient_length_mismatch():
    g = erdos_renyi(4, 1.0, 0)
    with pytest.raises(InvalidInputError):
        build_tfi(g, [1.0, 1.0], [1.0])
