"""Seeded interaction graphs and the benchmark Hamiltonians."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .algebra import (
    FERMION,
    SPIN,
    FermiWord,
    OperatorPolynomial,
    PauliString,
    format_polynomial,
    mul,
)
from .errors import InvalidInputError


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``."""

    n: int
    edges: tuple[tuple[int, int], ...]
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        seen = set()
        for i, j in self.edges:
            if not (0 <= i < j < self.n):
                raise InvalidInputError(f"bad edge ({i}, {j}) for n={self.n}")
            if (i, j) in seen:
                raise InvalidInputError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
        if list(self.edges) != sorted(self.edges):
            raise InvalidInputError("edges must be sorted")

    @classmethod
    def from_edges(cls, n: int, edges, **meta) -> "Graph":
        norm = sorted({(min(int(i), int(j)), max(int(i), int(j))) for i, j in edges})
        if any(i == j for i, j in norm):
            raise InvalidInputError("self-loops are not allowed")
        return cls(int(n), tuple(norm), dict(meta))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        for i, j in self.edges:
            a[i, j] = a[j, i] = True
        return a

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        adj = self.adjacency()
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for u in np.flatnonzero(adj[v]):
                if int(u) not in seen:
                    seen.add(int(u))
                    stack.append(int(u))
        return len(seen) == self.n

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with vertex ``v`` renamed ``perm[v]``."""
        return Graph.from_edges(self.n, [(perm[i], perm[j]) for i, j in self.edges], **dict(self.meta))

    def to_json(self) -> dict:
        out: dict[str, Any] = {"n": self.n, "edges": [list(e) for e in self.edges]}
        if "seed" in self.meta:
            out["seed"] = self.meta["seed"]
        return out

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Graph":
        if "n" not in data or "edges" not in data:
            raise InvalidInputError("graph JSON needs 'n' and 'edges'")
        meta = {"seed": data["seed"]} if "seed" in data else {}
        return cls.from_edges(int(data["n"]), [tuple(e) for e in data["edges"]], **meta)

    @classmethod
    def load(cls, path: str | Path) -> "Graph":
        return cls.from_json(json.loads(Path(path).read_text()))


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p): each pair ``i<j`` in lexicographic order kept with probability ``p``."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if not (0.0 <= p <= 1.0):
        raise InvalidInputError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((i, j))
    return Graph(n, tuple(edges), {"seed": seed, "model": f"er:{n}:{p}"})


def gaussian_stream(rng: np.random.Generator, count: int) -> np.ndarray:
    """Standard normals by Box–Muller on the generator's uniform stream."""
    out = np.empty(count)
    k = 0
    while k < count:
        u1 = 1.0 - rng.random()  # (0, 1]
        u2 = rng.random()
        r = np.sqrt(-2.0 * np.log(u1))
        out[k] = r * np.cos(2 * np.pi * u2)
        if k + 1 < count:
            out[k + 1] = r * np.sin(2 * np.pi * u2)
        k += 2
    return out


@dataclass(frozen=True)
class LocalHamiltonian:
    """``H = sum_i H_{C_i} + sum_{i<j} H_{C_ij}`` over a cluster partition."""

    kind: str
    num_sites: int
    clusters: tuple[tuple[int, ...], ...]
    onsite: Mapping[int, OperatorPolynomial]
    pair: Mapping[tuple[int, int], OperatorPolynomial]
    graph: Graph | None = None
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        covered = sorted(s for c in self.clusters for s in c)
        if covered != list(range(self.num_sites)):
            raise InvalidInputError("clusters must partition the sites")
        for j, h in self.onsite.items():
            if not set(h.support()) <= set(self.clusters[j]):
                raise InvalidInputError(f"onsite term {j} leaves its cluster")
            if not h.is_hermitian():
                raise InvalidInputError(f"onsite term {j} is not Hermitian")
        for (i, j), h in self.pair.items():
            if not i < j:
                raise InvalidInputError("pair keys must satisfy i < j")
            if not set(h.support()) <= set(self.clusters[i]) | set(self.clusters[j]):
                raise InvalidInputError(f"pair term {(i, j)} leaves its clusters")
            if not h.is_hermitian():
                raise InvalidInputError(f"pair term {(i, j)} is not Hermitian")

    @property
    def num_clusters(self) -> int:
        return len(self.clusters)

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Cluster pairs carrying a nonzero interaction."""
        return sorted(k for k, h in self.pair.items() if not h.is_zero())

    def total(self) -> OperatorPolynomial:
        acc = OperatorPolynomial.zero(self.kind, self.num_sites)
        for j in sorted(self.onsite):
            acc = acc + self.onsite[j]
        for key in sorted(self.pair):
            acc = acc + self.pair[key]
        return acc

    def is_real(self) -> bool:
        """True when the matrix image of every term is real."""
        for h in list(self.onsite.values()) + list(self.pair.values()):
            for m, c in h.terms.items():
                if isinstance(m, PauliString):
                    ny = sum(a == "y" for _, a in m.factors)
                    val = c * (1j**ny)
                else:
                    val = c
                if abs(val.imag) > 1e-14:
                    return False
        return True

    def relabel(self, perm: Sequence[int]) -> "LocalHamiltonian":
        """Same model with site ``s`` renamed ``perm[s]`` (singleton clusters only)."""
        if any(len(c) != 1 for c in self.clusters):
            raise InvalidInputError("relabel supports singleton clusters only")
        n = self.num_sites

        def move(p: OperatorPolynomial) -> OperatorPolynomial:
            acc = OperatorPolynomial.zero(p.kind, n)
            for m, c in p.terms.items():
                if isinstance(m, PauliString):
                    term = OperatorPolynomial.identity(p.kind, n, c)
                    for s, a in m.factors:
                        term = mul(term, OperatorPolynomial.monomial(PauliString(((perm[s], a),)), n))
                else:
                    term = OperatorPolynomial.identity(p.kind, n, c)
                    for s in m.creations:
                        term = mul(term, OperatorPolynomial.monomial(FermiWord((perm[s],), ()), n))
                    for s in m.annihilations:
                        term = mul(term, OperatorPolynomial.monomial(FermiWord((), (perm[s],)), n))
                acc = acc + term
            return acc

        onsite = {perm[j]: move(h) for j, h in self.onsite.items()}
        pair = {}
        for (i, j), h in self.pair.items():
            a, b = sorted((perm[i], perm[j]))
            pair[(a, b)] = move(h)
        graph = self.graph.relabel(perm) if self.graph is not None else None
        return LocalHamiltonian(self.kind, n, self.clusters, onsite, pair, graph, dict(self.meta))

    def dump(self) -> dict:
        return {
            "kind": self.kind,
            "num_sites": self.num_sites,
            "onsite": {str(j): format_polynomial(h) for j, h in sorted(self.onsite.items())},
            "pair": {f"{i},{j}": format_polynomial(h) for (i, j), h in sorted(self.pair.items())},
        }


def _singletons(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple((i,) for i in range(n))


def _pauli(n: int, coeff: float, *factors: tuple[int, str]) -> OperatorPolynomial:
    return OperatorPolynomial.monomial(PauliString(tuple(sorted(factors))), n, coeff)


def build_tfi(g: Graph, h: Sequence[float], J: Sequence[float]) -> LocalHamiltonian:
    """``H = -sum_i h_i X_i - sum_{i~j} J_ij Z_i Z_j``."""
    h = np.asarray(h, dtype=float).ravel()
    J = np.asarray(J, dtype=float).ravel()
    if len(h) != g.n or len(J) != len(g.edges):
        raise InvalidInputError("length mismatch between coefficients and graph")
    onsite = {i: _pauli(g.n, -h[i], (i, "x")) for i in range(g.n)}
    pair = {(i, j): _pauli(g.n, -J[k], (i, "z"), (j, "z")) for k, (i, j) in enumerate(g.edges)}
    return LocalHamiltonian(SPIN, g.n, _singletons(g.n), onsite, pair, g, {"model": "tfi"})


def build_xxz(g: Graph, Jz: float) -> LocalHamiltonian:
    """``H = sum_{i~j} X_i X_j + Y_i Y_j + Jz Z_i Z_j``."""
    n = g.n
    pair = {}
    for i, j in g.edges:
        pair[(i, j)] = (
            _pauli(n, 1.0, (i, "x"), (j, "x")) + _pauli(n, 1.0, (i, "y"), (j, "y")) + _pauli(n, Jz, (i, "z"), (j, "z"))
        )
    return LocalHamiltonian(SPIN, n, _singletons(n), {}, pair, g, {"model": "xxz", "Jz": Jz})


def build_hubbard_spinless(g: Graph, t: float, U: float) -> LocalHamiltonian:
    """``H = sum_{i~j} -t (a†_i a_j + a†_j a_i) + U (n_i - 1/2)(n_j - 1/2)``."""
    n = g.n
    pair = {}
    for i, j in g.edges:
        hop = OperatorPolynomial(FERMION, n, {FermiWord((i,), (j,)): -t, FermiWord((j,), (i,)): -t})
        ni = OperatorPolynomial.monomial(FermiWord((i,), (i,)), n) - 0.5
        nj = OperatorPolynomial.monomial(FermiWord((j,), (j,)), n) - 0.5
        pair[(i, j)] = hop + mul(ni, nj).scale(U)
    return LocalHamiltonian(FERMION, n, _singletons(n), {}, pair, g, {"model": "hubbard", "t": t, "U": U})


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)), {"model": f"complete:{n}"})


def build_sk(n: int, h0: float, J0: float, seed: int) -> LocalHamiltonian:
    """Quantum Sherrington–Kirkpatrick model on the complete graph."""
    if n < 2:
        raise InvalidInputError("n must be >= 2")
    g = complete_graph(n)
    rng = np.random.default_rng(seed)
    z = gaussian_stream(rng, n + len(g.edges))
    h = h0 * z[:n]
    J = (J0 / np.sqrt(n)) * z[n:]
    H = build_tfi(g, h, J)
    return LocalHamiltonian(H.kind, n, H.clusters, H.onsite, H.pair, g, {"model": "sk", "seed": seed})


def build_disordered_tfi(g: Graph, h: float, mean: float, sigma: float, seed: int) -> LocalHamiltonian:
    """TFI with uniform field ``h`` and ``J_ij ~ N(mean, sigma^2)``."""
    if sigma < 0:
        raise InvalidInputError("sigma must be nonnegative")
    rng = np.random.default_rng(seed)
    J = mean + sigma * gaussian_stream(rng, len(g.edges))
    return build_tfi(g, np.full(g.n, float(h)), J)


def build_quadratic_fermion(T) -> LocalHamiltonian:
    """``H = sum_ij T_ij a†_i a_j`` split into onsite and hopping terms."""
    T = np.asarray(T, dtype=complex)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise InvalidInputError("T must be square")
    if not np.allclose(T, T.conj().T, atol=1e-12):
        raise InvalidInputError("T must be Hermitian")
    n = T.shape[0]
    onsite = {}
    for i in range(n):
        onsite[i] = OperatorPolynomial.monomial(FermiWord((i,), (i,)), n, T[i, i].real)
    pair = {}
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if abs(T[i, j]) > 0:
                pair[(i, j)] = OperatorPolynomial(FERMION, n, {FermiWord((i,), (j,)): T[i, j], FermiWord((j,), (i,)): T[j, i]})
                edges.append((i, j))
    g = Graph(n, tuple(edges), {"model": "quadratic"})
    return LocalHamiltonian(FERMION, n, _singletons(n), onsite, pair, g, {"model": "quadratic"})


def free_fermion_energy(T) -> float:
    """Sum of the negative single-particle energies."""
    eps = np.linalg.eigvalsh(np.asarray(T, dtype=complex))
    return float(eps[eps < 0].sum())
