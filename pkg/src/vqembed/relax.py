"""Sum-of-squares embedding relaxations and relaxed pair marginals.

Schemes
-------
``e1``            ``max λ  s.t.  H − λ = tr(Y F)``, ``Y ⪰ 0`` (1-SOS).
``e12_pairwise``  ``max Σ_p λ_p  s.t.  Ĥ_p − H̃_p(Y) + Σ X_p,· − λ_p ⪰ 0`` on every
                  pair ``p = (γ, δ)`` and ``Y ⪰ 0``.
``e12_sos``       ``max λ  s.t.  H − λ = tr(Y F) + Σ_p G_p``, ``Y, G_p ⪰ 0``.
``e12_prime``     ``e12_pairwise`` without the communication variables ``X``.
``anderson``      ``Σ_p E0[Ĥ_p]``.

Every reported value is a certified lower bound recomputed from the solver
iterate (see :func:`certify_shifted` and :func:`certify_e1`), so a
loosely converged solve can only under-report.
"""

from __future__ import annotations

import hashlib
import json
import time
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg as sla

from .algebra import (
    FERMION,
    SPIN,
    Monomial,
    OperatorPolynomial,
    adjoint,
    hermitian_basis,
    identity_monomial,
    local_basis,
    monomial_adjoint,
    monomial_sort_key,
    mul,
    to_matrix,
    word_basis,
)
from .conic import (
    BlockBuilder,
    ConicProblem,
    ConicSolution,
    SolverOptions,
    deembed_hermitian,
    embed_any,
    solve,
)
from .errors import DegenerateDualError, InvalidInputError
from .exact import fermion_reorder_unitary, ground_energy_of, partial_trace
from .models import LocalHamiltonian

SCHEMES = ("e1", "e12_pairwise", "e12_sos", "e12_prime", "anderson")
CONSISTENCY_TOL = 1e-4


# ---------------------------------------------------------------------------
# layouts and weights


@dataclass(frozen=True)
class ClusterLayout:
    """Disjoint groups ``V_γ`` of cluster indices and their site lists."""

    groups: tuple[tuple[int, ...], ...]
    clusters: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        flat = [j for g in self.groups for j in g]
        if sorted(flat) != list(range(len(self.clusters))):
            raise InvalidInputError("groups must partition the clusters (disjoint, covering)")
        if any(len(g) == 0 for g in self.groups):
            raise InvalidInputError("empty group")

    @classmethod
    def from_groups(cls, H: LocalHamiltonian, groups: Sequence[Sequence[int]]) -> "ClusterLayout":
        return cls(tuple(tuple(sorted(int(j) for j in g)) for g in groups), tuple(H.clusters))

    @classmethod
    def singletons(cls, H: LocalHamiltonian) -> "ClusterLayout":
        return cls(tuple((j,) for j in range(H.num_clusters)), tuple(H.clusters))

    @classmethod
    def uniform(cls, H: LocalHamiltonian, k: int) -> "ClusterLayout":
        """Consecutive groups of ``k`` clusters (the last may be smaller)."""
        d = H.num_clusters
        if k < 1:
            raise InvalidInputError("k must be >= 1")
        return cls(tuple(tuple(range(s, min(s + k, d))) for s in range(0, d, k)), tuple(H.clusters))

    @property
    def M(self) -> int:
        return len(self.groups)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(a, b) for a in range(self.M) for b in range(a + 1, self.M)]

    def group_of(self) -> dict[int, int]:
        return {j: g for g, members in enumerate(self.groups) for j in members}

    def group_sites(self, g: int) -> tuple[int, ...]:
        return tuple(sorted(s for j in self.groups[g] for s in self.clusters[j]))

    def pair_sites(self, p: tuple[int, int]) -> tuple[int, ...]:
        return tuple(sorted(self.group_sites(p[0]) + self.group_sites(p[1])))

    def pairs_of(self, g: int) -> list[tuple[int, int]]:
        return [p for p in self.pairs if g in p]

    def site_groups(self) -> list[list[int]]:
        return [list(self.group_sites(g)) for g in range(self.M)]

    def to_json(self) -> dict:
        return {"groups": [list(g) for g in self.groups], "sites": self.site_groups()}


@dataclass
class SplitWeights:
    """Convex splitting weights.

    ``w_edge[(edge, pair)]``, ``w_onsite[(edge, endpoint, pair)]`` and
    ``omega[(pair, group)]``. Clusters without incident edges carry their
    onsite term through keys ``(None, endpoint, pair)``.
    """

    w_edge: dict
    w_onsite: dict
    omega: dict

    def digest(self) -> str:
        items = sorted((repr(k), round(v, 15)) for d in (self.w_edge, self.w_onsite, self.omega) for k, v in d.items())
        return hashlib.sha256(json.dumps(items).encode()).hexdigest()[:16]


def admissible_pairs(edge: tuple[int, int], layout: ClusterLayout) -> list[tuple[int, int]]:
    """``I_{i~j}``: pairs whose union contains both endpoints of ``edge``."""
    gof = layout.group_of()
    gi, gj = gof[edge[0]], gof[edge[1]]
    if gi == gj:
        return layout.pairs_of(gi)
    return [(min(gi, gj), max(gi, gj))]


def _weight_slots(H: LocalHamiltonian, layout: ClusterLayout):
    edges = H.edges
    edge_slots = {e: admissible_pairs(e, layout) for e in edges}
    onsite_slots: dict[int, list[tuple]] = {}
    gof = layout.group_of()
    for i in range(H.num_clusters):
        slots = []
        for e in edges:
            if i in e:
                slots.extend((e, i, p) for p in edge_slots[e])
        if not slots:
            slots = [(None, i, p) for p in layout.pairs_of(gof[i])]
        onsite_slots[i] = slots
    omega_slots = {g: layout.pairs_of(g) for g in range(layout.M)}
    return edge_slots, onsite_slots, omega_slots


def _check_pair_layout(layout: ClusterLayout) -> None:
    if layout.M < 2:
        raise InvalidInputError("pair-based schemes need at least two groups")


def default_weights(H: LocalHamiltonian, layout: ClusterLayout) -> SplitWeights:
    """Uniform weights over every admissible slot."""
    _check_pair_layout(layout)
    edge_slots, onsite_slots, omega_slots = _weight_slots(H, layout)
    w_edge = {(e, p): 1.0 / len(ps) for e, ps in edge_slots.items() for p in ps}
    w_on = {s: 1.0 / len(slots) for slots in onsite_slots.values() for s in slots}
    omega = {(p, g): 1.0 / len(ps) for g, ps in omega_slots.items() for p in ps}
    return SplitWeights(w_edge, w_on, omega)


def random_weights(H: LocalHamiltonian, layout: ClusterLayout, rng: np.random.Generator) -> SplitWeights:
    """Dirichlet(1, ..., 1) weights on every simplex constraint."""
    _check_pair_layout(layout)
    edge_slots, onsite_slots, omega_slots = _weight_slots(H, layout)
    w_edge, w_on, omega = {}, {}, {}
    for e, ps in edge_slots.items():
        for p, v in zip(ps, rng.dirichlet(np.ones(len(ps)))):
            w_edge[(e, p)] = float(v)
    for slots in onsite_slots.values():
        for s, v in zip(slots, rng.dirichlet(np.ones(len(slots)))):
            w_on[s] = float(v)
    for g, ps in omega_slots.items():
        for p, v in zip(ps, rng.dirichlet(np.ones(len(ps)))):
            omega[(p, g)] = float(v)
    return SplitWeights(w_edge, w_on, omega)


def check_weights(H: LocalHamiltonian, layout: ClusterLayout, w: SplitWeights, tol: float = 1e-12) -> None:
    edge_slots, onsite_slots, omega_slots = _weight_slots(H, layout)
    for e, ps in edge_slots.items():
        if abs(sum(w.w_edge.get((e, p), 0.0) for p in ps) - 1) > tol:
            raise InvalidInputError(f"edge weights of {e} do not sum to one")
    for i, slots in onsite_slots.items():
        if abs(sum(w.w_onsite.get(s, 0.0) for s in slots) - 1) > tol:
            raise InvalidInputError(f"onsite weights of cluster {i} do not sum to one")
    for g, ps in omega_slots.items():
        if abs(sum(w.omega.get((p, g), 0.0) for p in ps) - 1) > tol:
            raise InvalidInputError(f"omega weights of group {g} do not sum to one")
    if any(v < -tol for d in (w.w_edge, w.w_onsite, w.omega) for v in d.values()):
        raise InvalidInputError("weights must be nonnegative")


def split_hamiltonian(H: LocalHamiltonian, layout: ClusterLayout, weights: SplitWeights | None = None):
    """``{p: Ĥ_p}`` with ``Σ_p Ĥ_p = H``."""
    _check_pair_layout(layout)
    weights = weights or default_weights(H, layout)
    zero = OperatorPolynomial.zero(H.kind, H.num_sites)
    out = {p: zero for p in layout.pairs}
    for (e, p), w in weights.w_edge.items():
        if w:
            out[p] = out[p] + H.pair[e].scale(w)
    for (e, i, p), w in weights.w_onsite.items():
        if w and i in H.onsite:
            out[p] = out[p] + H.onsite[i].scale(w)
    return out


# ---------------------------------------------------------------------------
# shared assembly helpers


def _real_rephase(f: OperatorPolynomial) -> OperatorPolynomial:
    """Multiply Pauli monomials by ``i**(#Y)`` so their matrices are real."""
    if f.kind != SPIN:
        return f
    return OperatorPolynomial(SPIN, f.num_sites, {m: c * (1j ** sum(a == "y" for _, a in m.factors)) for m, c in f.terms.items()})


def _identity_slot(n: int, kind: str) -> int:
    """Position in :func:`local_basis` of the element that completes the identity.

    For spins it is the identity itself; for fermions it is the product of
    ``a a†`` on every site, which equals ``1`` minus the other diagonal products.
    """
    return 0 if kind == SPIN else (4**n - 1) // 3


class _Basis:
    """Concatenated local bases ``W_1`` of all groups.

    Every group's span contains the identity, so all groups after the first
    drop one element (see :func:`_identity_slot`). The concatenation is then
    linearly independent, which keeps the moment matrix strictly feasible
    without changing the cone of 1-SOS operators.
    """

    def __init__(self, H: LocalHamiltonian, layout: ClusterLayout, real: bool):
        self.real = real
        self.funcs: list[OperatorPolynomial] = []
        self.group: list[int] = []
        self.slices: list[slice] = []
        for g in range(layout.M):
            sites = list(layout.group_sites(g))
            fs = local_basis(sites, H.kind, H.num_sites)
            if g > 0:
                del fs[_identity_slot(len(sites), H.kind)]
            if real:
                fs = [_real_rephase(f) for f in fs]
            start = len(self.funcs)
            self.funcs.extend(fs)
            self.group.extend([g] * len(fs))
            self.slices.append(slice(start, start + len(fs)))
        self.adj = [adjoint(f) for f in self.funcs]
        self.size = len(self.funcs)
        self._prod: dict[tuple[int, int], OperatorPolynomial] = {}

    def product(self, a: int, b: int) -> OperatorPolynomial:
        """``f_a† f_b`` (symbolic, cached)."""
        key = (a, b)
        if key not in self._prod:
            self._prod[key] = mul(self.adj[a], self.funcs[b])
        return self._prod[key]


class _YParams:
    """Real parameterization of the Hermitian moment matrix ``Y``."""

    def __init__(self, N: int, real: bool, offset: int):
        iu, ju = np.triu_indices(N)
        self.N = N
        self.real = real
        entries = []  # (i, j, part) part 0 = real/diag, 1 = imaginary
        for i, j in zip(iu, ju):
            entries.append((int(i), int(j), 0))
            if not real and i != j:
                entries.append((int(i), int(j), 1))
        self.entries = entries
        self.offset = offset
        self.count = len(entries)

    @property
    def dim(self) -> int:
        return self.N if self.real else 2 * self.N

    def add_to_block(self, b: BlockBuilder) -> None:
        N = self.N
        for k, (i, j, part) in enumerate(self.entries):
            v = self.offset + k
            if self.real:
                if i == j:
                    b.add_entries(v, [i], [i], [1.0])
                else:
                    b.add_entries(v, [i, j], [j, i], [1.0, 1.0])
            elif part == 0:
                if i == j:
                    b.add_entries(v, [i, N + i], [i, N + i], [1.0, 1.0])
                else:
                    b.add_entries(v, [i, j, N + i, N + j], [j, i, N + j, N + i], [1.0] * 4)
            else:
                # Y_ij = i, Y_ji = -i -> imaginary part B = E_ij - E_ji
                b.add_entries(v, [i, j, N + i, N + j], [N + j, N + i, j, i], [-1.0, 1.0, 1.0, -1.0])

    def matrix(self, y: np.ndarray) -> np.ndarray:
        """Complex Hermitian ``Y`` from parameters."""
        Y = np.zeros((self.N, self.N), dtype=complex)
        for (i, j, part), v in zip(self.entries, y):
            if part == 0:
                Y[i, j] += v
                if i != j:
                    Y[j, i] += v
            else:
                Y[i, j] += 1j * v
                Y[j, i] -= 1j * v
        return Y

    def params(self, Y: np.ndarray) -> np.ndarray:
        out = np.empty(self.count)
        for k, (i, j, part) in enumerate(self.entries):
            out[k] = Y[i, j].real if part == 0 else Y[i, j].imag
        return out

    def polynomial_images(self, k: int, prod_img) -> np.ndarray:
        """Matrix image of the polynomial multiplying parameter ``k`` in ``tr(YF)``.

        ``prod_img(a, b)`` must return the image of ``f_a† f_b``.
        """
        i, j, part = self.entries[k]
        if i == j:
            return prod_img(i, i)
        mji, mij = prod_img(j, i), prod_img(i, j)
        return mji + mij if part == 0 else 1j * (mji - mij)

    def polynomial(self, k: int, basis: _Basis) -> OperatorPolynomial:
        i, j, part = self.entries[k]
        if i == j:
            return basis.product(i, i)
        pji, pij = basis.product(j, i), basis.product(i, j)
        return pji + pij if part == 0 else (pji - pij).scale(1j)


def _embed(M: np.ndarray, real: bool) -> np.ndarray:
    if real:
        return np.ascontiguousarray(M.real)
    return embed_any(M)


def _identity_dim(n_sites: int, real: bool) -> int:
    return (1 << n_sites) * (1 if real else 2)


def _decide_real(H: LocalHamiltonian, real: bool | None) -> bool:
    auto = H.is_real()
    if real is None:
        return auto
    if real and not auto:
        raise InvalidInputError("real arithmetic requested for a complex Hamiltonian")
    return bool(real)


# ---------------------------------------------------------------------------
# pairwise (inequality) schemes


def build_pairwise(
    H: LocalHamiltonian,
    layout: ClusterLayout,
    weights: SplitWeights | None = None,
    communication: bool = True,
    real: bool | None = None,
) -> ConicProblem:
    """Assemble ``e12_pairwise`` (or ``e12_prime`` without communication)."""
    _check_pair_layout(layout)
    weights = weights or default_weights(H, layout)
    check_weights(H, layout, weights)
    real = _decide_real(H, real)
    n = H.num_sites
    pairs = layout.pairs
    hat = split_hamiltonian(H, layout, weights)
    basis = _Basis(H, layout, real)
    nP = len(pairs)
    yp = _YParams(basis.size, real, offset=nP)

    # communication variables: spanning star of the pairs sharing each group
    links = []  # (var, group, p_plus, p_minus, Q)
    nvar = nP + yp.count
    if communication:
        for g in range(layout.M):
            ps = layout.pairs_of(g)
            Qs = hermitian_basis(layout.group_sites(g), H.kind, n, include_identity=False, real_only=real)
            for pj in ps[1:]:
                for Q in Qs:
                    links.append((nvar, g, ps[0], pj, Q))
                    nvar += 1
    m = nvar
    c = np.zeros(m)
    c[:nP] = 1.0

    blocks = []
    # the moment matrix itself
    yb = BlockBuilder(yp.dim, m, tag={"kind": "moment"})
    yp.add_to_block(yb)

    pair_index = {p: k for k, p in enumerate(pairs)}
    # which Y parameters touch which pair, with their weights
    touch: dict[tuple[int, int], list[tuple[int, float]]] = {p: [] for p in pairs}
    for k, (i, j, _part) in enumerate(yp.entries):
        gi, gj = basis.group[i], basis.group[j]
        if gi != gj:
            touch[(min(gi, gj), max(gi, gj))].append((k, 1.0))
        else:
            for p in layout.pairs_of(gi):
                w = weights.omega.get((p, gi), 0.0)
                if w:
                    touch[p].append((k, w))

    for p in pairs:
        sites = layout.pair_sites(p)
        D = _identity_dim(len(sites), real)
        b = BlockBuilder(D, m, tag={"kind": "pair", "pair": p, "sites": sites})
        b.add_constant(_embed(to_matrix(hat[p], sites), real))
        b.add_entries(pair_index[p], np.arange(D), np.arange(D), -np.ones(D))
        cache: dict[tuple[int, int], np.ndarray] = {}

        def prod_img(a: int, bb: int, sites=sites, cache=cache) -> np.ndarray:
            key = (a, bb)
            if key not in cache:
                cache[key] = to_matrix(basis.product(a, bb), sites)
            return cache[key]

        vars_, mats = [], []
        for k, w in touch[p]:
            vars_.append(nP + k)
            mats.append(-w * _embed(yp.polynomial_images(k, prod_img), real))
        if vars_:
            b.add_many(np.array(vars_), np.array(mats))
        for var, g, pplus, pminus, Q in links:
            if p == pplus or p == pminus:
                sign = 1.0 if p == pplus else -1.0
                b.add(var, sign * _embed(to_matrix(Q, sites), real))
        blocks.append(b.build())
    blocks.append(yb.build())
    meta = {
        "scheme": "e12_pairwise" if communication else "e12_prime",
        "real": real,
        "pairs": pairs,
        "num_lambda": nP,
        "shift_blocks": list(range(nP)),
        "kind": H.kind,
        "y": yp,
        "num_comm": len(links),
        "layout": layout,
    }
    return ConicProblem(c, blocks, meta)


def _psd_part(M: np.ndarray) -> np.ndarray:
    w, U = np.linalg.eigh(M)
    return (U * np.maximum(w, 0.0)) @ U.conj().T


def _project_moment(problem: ConicProblem, x: np.ndarray) -> np.ndarray:
    """Copy of ``x`` whose moment-matrix parameters are projected onto the PSD cone."""
    yp: _YParams = problem.meta["y"]
    v = np.array(x, dtype=float)
    sl = slice(yp.offset, yp.offset + yp.count)
    v[sl] = yp.params(_psd_part(yp.matrix(v[sl])))
    return v


def certify_shifted(problem: ConicProblem, x: np.ndarray) -> tuple[float, np.ndarray]:
    """Rigorous lower bound from any iterate of a pairwise or SOS problem.

    After projecting ``Y`` onto the PSD cone, every remaining block ``B_k`` is
    an operator ``B_k - e_k`` with ``e_k = λ_min(B_k)`` made PSD by a scalar
    shift, so ``c . x + Σ_k e_k`` is a valid bound.
    """
    v = _project_moment(problem, x)
    shifts = np.array([np.linalg.eigvalsh(problem.blocks[k].matrix(v))[0] for k in problem.meta["shift_blocks"]])
    return float(problem.c @ v + shifts.sum()), shifts


def certify_pairwise(problem: ConicProblem, x: np.ndarray) -> tuple[float, np.ndarray]:
    """Certified bound and per-pair shifted values ``λ_p + λ_min(B_p)``."""
    value, shifts = certify_shifted(problem, x)
    nP = problem.meta["num_lambda"]
    return value, np.asarray(x[:nP], dtype=float) + shifts


# ---------------------------------------------------------------------------
# equality (SOS identity) schemes


def _rep(m: Monomial) -> Monomial:
    adj = monomial_adjoint(m)
    return min(m, adj, key=monomial_sort_key)


def hermitian_coordinates(p: OperatorPolynomial, tol: float = 1e-13) -> dict[tuple, float]:
    """Coordinates of a Hermitian ``p`` in the basis of :func:`hermitian_basis`.

    Keys are ``(m, 0)`` for ``m`` (self-adjoint) or ``m + m†`` and ``(m, 1)``
    for ``i(m - m†)``, where ``m`` is the representative of ``{m, m†}``.
    """
    out: dict[tuple, float] = {}
    for m, c in p.terms.items():
        r = _rep(m)
        if r != m:
            continue
        if monomial_adjoint(m) == m:
            out[(m, 0)] = out.get((m, 0), 0.0) + c.real
        else:
            out[(m, 0)] = out.get((m, 0), 0.0) + c.real
            out[(m, 1)] = out.get((m, 1), 0.0) + c.imag
    return {k: v for k, v in out.items() if abs(v) > tol}


def coordinate_polynomial(coords: Mapping[tuple, float], kind: str, num_sites: int) -> OperatorPolynomial:
    terms: dict[Monomial, complex] = {}
    for (m, part), v in coords.items():
        adj = monomial_adjoint(m)
        if adj == m:
            terms[m] = terms.get(m, 0) + v
        elif part == 0:
            terms[m] = terms.get(m, 0) + v
            terms[adj] = terms.get(adj, 0) + v
        else:
            terms[m] = terms.get(m, 0) + 1j * v
            terms[adj] = terms.get(adj, 0) - 1j * v
    return OperatorPolynomial(kind, num_sites, terms)


def _coordinate_keys(sites: Sequence[int], kind: str, real: bool) -> list[tuple]:
    keys = []
    for m in word_basis(sites, kind):
        if _rep(m) != m:
            continue
        if kind == SPIN:
            if real and sum(a == "y" for _, a in m.factors) % 2:
                continue
            keys.append((m, 0))
        elif monomial_adjoint(m) == m:
            keys.append((m, 0))
        else:
            keys.append((m, 0))
            if not real:
                keys.append((m, 1))
    return keys


def build_e1(H: LocalHamiltonian, layout: ClusterLayout, real: bool | None = None) -> ConicProblem:
    """Assemble ``e1`` with the operator identity eliminated.

    The identity ``H - λ = tr(Y F)`` gives one real equation per Hermitian
    coordinate; all solutions are ``v0 + N z`` and the PSD block is written in
    the free coordinates ``z``.
    """
    real = _decide_real(H, real)
    basis = _Basis(H, layout, real)
    yp = _YParams(basis.size, real, offset=1)
    ident = OperatorPolynomial.identity(H.kind, H.num_sites)
    columns = [hermitian_coordinates(ident)] + [hermitian_coordinates(yp.polynomial(k, basis)) for k in range(yp.count)]
    rhs = hermitian_coordinates(H.total())
    keys = sorted({k for col in columns for k in col} | set(rhs), key=lambda k: (monomial_sort_key(k[0]), k[1]))
    row = {k: i for i, k in enumerate(keys)}
    E = np.zeros((len(keys), len(columns)))
    for j, col in enumerate(columns):
        for k, v in col.items():
            E[row[k], j] = v
    h = np.zeros(len(keys))
    for k, v in rhs.items():
        h[row[k]] = v
    v0, *_ = np.linalg.lstsq(E, h, rcond=None)
    if np.linalg.norm(E @ v0 - h) > 1e-8 * (1 + np.linalg.norm(h)):
        raise InvalidInputError("Hamiltonian is not representable as a 1-SOS plus a constant on this layout")
    Nmat = sla.null_space(E, rcond=1e-10)
    m = Nmat.shape[1]
    Ymap = BlockBuilder(yp.dim, yp.count + 1)
    _YParams(basis.size, real, offset=1).add_to_block(Ymap)
    Ablk = Ymap.build()
    yb = BlockBuilder(yp.dim, m, tag={"kind": "moment"})
    yb.add_constant(np.asarray(Ablk.A @ v0).reshape(yp.dim, yp.dim))
    yb.add_many(np.arange(m), np.asarray(Ablk.A @ Nmat).T.reshape(m, yp.dim, yp.dim))
    meta = {
        "scheme": "e1",
        "real": real,
        "offset": float(v0[0]),
        "v0": v0,
        "N": Nmat,
        "E": E,
        "h": h,
        "keys": keys,
        "y": yp,
        "layout": layout,
        "kind": H.kind,
    }
    return ConicProblem(Nmat[0].copy(), [yb.build()], meta)


def certify_e1(problem: ConicProblem, z: np.ndarray) -> float:
    """Rigorous lower bound for an ``e1`` iterate.

    ``Y`` is projected onto the PSD cone and the residual operator
    ``H - λ - tr(Y F)`` is bounded by the l1 norm of its monomial
    coefficients (every canonical monomial has operator norm at most one).
    """
    meta = problem.meta
    yp: _YParams = meta["y"]
    v = meta["v0"] + meta["N"] @ z
    sl = slice(1, 1 + yp.count)
    v[sl] = yp.params(_psd_part(yp.matrix(v[sl])))
    r = meta["h"] - meta["E"] @ v
    resid = 0.0
    for (m, part), val in zip(meta["keys"], r):
        weight = 1.0 if monomial_adjoint(m) == m else 2.0
        resid += weight * abs(val)
    return float(v[0] - resid)


def build_e12_sos(H: LocalHamiltonian, layout: ClusterLayout, real: bool | None = None) -> ConicProblem:
    """Assemble ``e12_sos``: ``H - λ = tr(Y F) + Σ_p G_p`` with ``Y, G_p ⪰ 0``.

    Each ``G_p`` is expanded in the Hermitian coordinates of its pair. Every
    coordinate has a pivot pair (the first pair containing its support); the
    pivot coefficient is eliminated through the identity, the others stay
    free. The result needs no numerical elimination.
    """
    _check_pair_layout(layout)
    real = _decide_real(H, real)
    n = H.num_sites
    basis = _Basis(H, layout, real)
    yp = _YParams(basis.size, real, offset=1)
    pairs = layout.pairs
    pivot: dict[tuple, int] = {}
    free: list[tuple[tuple, int]] = []
    for k, p in enumerate(pairs):
        for key in _coordinate_keys(layout.pair_sites(p), H.kind, real):
            if key in pivot:
                free.append((key, k))
            else:
                pivot[key] = k
    nvar = 1 + yp.count + len(free)
    c = np.zeros(nvar)
    c[0] = 1.0

    def split_by_pivot(coords: Mapping[tuple, float]) -> dict[int, dict[tuple, float]]:
        out: dict[int, dict[tuple, float]] = {}
        for key, v in coords.items():
            if key not in pivot:
                raise InvalidInputError(f"term {key[0]} is not supported on any pair")
            out.setdefault(pivot[key], {})[key] = v
        return out

    builders = []
    for k, p in enumerate(pairs):
        sites = layout.pair_sites(p)
        builders.append(BlockBuilder(_identity_dim(len(sites), real), nvar, tag={"kind": "sos", "pair": p, "sites": sites}))

    def image(coords, k):
        return _embed(to_matrix(coordinate_polynomial(coords, H.kind, n), layout.pair_sites(pairs[k])), real)

    for k, part in split_by_pivot(hermitian_coordinates(H.total())).items():
        builders[k].add_constant(image(part, k))
    ident_key = (identity_monomial(H.kind), 0)
    builders[pivot[ident_key]].add(0, -image({ident_key: 1.0}, pivot[ident_key]))
    per_block: dict[int, tuple[list[int], list[np.ndarray]]] = {k: ([], []) for k in range(len(pairs))}
    for j in range(yp.count):
        for k, part in split_by_pivot(hermitian_coordinates(yp.polynomial(j, basis))).items():
            per_block[k][0].append(1 + j)
            per_block[k][1].append(-image(part, k))
    for t, (key, k) in enumerate(free):
        var = 1 + yp.count + t
        per_block[k][0].append(var)
        per_block[k][1].append(image({key: 1.0}, k))
        per_block[pivot[key]][0].append(var)
        per_block[pivot[key]][1].append(-image({key: 1.0}, pivot[key]))
    for k, (vars_, mats) in per_block.items():
        if vars_:
            builders[k].add_many(np.array(vars_), np.array(mats))
    yb = BlockBuilder(yp.dim, nvar, tag={"kind": "moment"})
    yp.add_to_block(yb)
    blocks = [b.build() for b in builders] + [yb.build()]
    meta = {
        "scheme": "e12_sos",
        "real": real,
        "pairs": pairs,
        "y": yp,
        "shift_blocks": list(range(len(pairs))),
        "num_free": len(free),
        "layout": layout,
        "kind": H.kind,
    }
    return ConicProblem(c, blocks, meta)


def build_e12_pairwise(H: LocalHamiltonian, layout: ClusterLayout, weights: SplitWeights | None = None,
                       real: bool | None = None) -> ConicProblem:
    return build_pairwise(H, layout, weights, communication=True, real=real)


def build_e12_prime(H: LocalHamiltonian, layout: ClusterLayout, weights: SplitWeights | None = None,
                    real: bool | None = None) -> ConicProblem:
    return build_pairwise(H, layout, weights, communication=False, real=real)



# ---------------------------------------------------------------------------
# marginals


@dataclass
class RelaxedMarginals:
    """Unit-trace pair density matrices on ``V_γ ∪ V_δ`` (sites sorted)."""

    kind: str
    layout: ClusterLayout
    matrices: dict[tuple[int, int], np.ndarray]
    consistency: dict[int, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def sites(self, p: tuple[int, int]) -> tuple[int, ...]:
        return self.layout.pair_sites(p)

    def reordered(self, p: tuple[int, int], first: Sequence[int]) -> np.ndarray:
        """Pair state with the sites ``first`` moved to the leading slots."""
        return reorder_state(self.matrices[p], self.sites(p), first, self.kind)

    def group_marginal(self, p: tuple[int, int], g: int) -> np.ndarray:
        gs = self.layout.group_sites(g)
        rho = self.reordered(p, gs)
        return partial_trace(rho, list(range(len(gs))), len(self.sites(p)))


def reorder_state(rho: np.ndarray, sites: Sequence[int], first: Sequence[int], kind: str) -> np.ndarray:
    """Move ``first`` to the front of the slot order (fermionic signs for fermions)."""
    sites = list(sites)
    first = list(first)
    new = first + [s for s in sites if s not in first]
    if new == sites:
        return rho
    if kind == FERMION:
        U = fermion_reorder_unitary(sites, new)
        return U @ rho @ U.T
    n = len(sites)
    perm = [sites.index(s) for s in new]
    t = rho.reshape([2] * (2 * n)).transpose(perm + [n + k for k in perm])
    return t.reshape(rho.shape)


def extract_marginals(problem: ConicProblem, sol: ConicSolution, tol_feas: float = 1e-7) -> RelaxedMarginals:
    """Normalized pair certificates of a pairwise problem, with consistency residuals."""
    meta = problem.meta
    if "num_lambda" not in meta:
        raise InvalidInputError("marginals are only defined for pairwise schemes")
    layout: ClusterLayout = meta["layout"]
    kind = FERMION if problem.meta.get("kind") == FERMION else None
    mats = {}
    notes = []
    for k, p in enumerate(meta["pairs"]):
        Z = sol.duals[k]
        rho = Z.astype(complex) if meta["real"] else deembed_hermitian(Z)
        tr = float(np.trace(rho).real)
        if tr <= 1e-8:
            raise DegenerateDualError(f"certificate of pair {p} has trace {tr:.2e}")
        rho = rho / tr
        w, U = np.linalg.eigh(rho)
        if w[0] < -10 * tol_feas:
            notes.append(f"pair {p}: eigenvalue {w[0]:.2e} below -10*tol_feas clipped")
        rho = (U * np.maximum(w, 0.0)) @ U.conj().T
        rho = rho / np.trace(rho).real
        mats[p] = 0.5 * (rho + rho.conj().T)
    kind = meta.get("kind", SPIN)
    out = RelaxedMarginals(kind, layout, mats, {}, notes)
    for g in range(layout.M):
        ps = layout.pairs_of(g)
        red = [out.group_marginal(p, g) for p in ps]
        resid = max((float(np.abs(r - red[0]).max()) for r in red[1:]), default=0.0)
        out.consistency[g] = resid
        if resid > CONSISTENCY_TOL:
            out.warnings.append(f"group {g}: consistency residual {resid:.2e}")
    return out


# ---------------------------------------------------------------------------
# orchestration


@dataclass
class RelaxationResult:
    scheme: str
    value: float
    solution: ConicSolution | None
    marginals: RelaxedMarginals | None
    timing: dict
    layout: ClusterLayout
    weights_digest: str | None = None
    raw_objective: float | None = None

    def to_json(self) -> dict:
        res = None
        if self.solution is not None:
            res = dict(self.solution.residuals)
            res["status"] = self.solution.status
            res["iterations"] = self.solution.iterations
        return {
            "scheme": self.scheme,
            "value": self.value,
            "raw_objective": self.raw_objective,
            "residuals": res,
            "timing": self.timing,
            "layout": self.layout.to_json(),
            "weights_digest": self.weights_digest,
        }


def anderson_bound(H: LocalHamiltonian, layout: ClusterLayout, weights: SplitWeights | None = None) -> float:
    hat = split_hamiltonian(H, layout, weights)
    return float(sum(ground_energy_of(hp, layout.pair_sites(p)) for p, hp in hat.items()))


def solve_relaxation(
    H: LocalHamiltonian,
    layout: ClusterLayout,
    scheme: str,
    weights: SplitWeights | None = None,
    opts: SolverOptions | None = None,
    marginals: bool = True,
    real: bool | None = None,
) -> RelaxationResult:
    """Build, solve and certify one scheme."""
    if scheme not in SCHEMES:
        raise InvalidInputError(f"unknown scheme {scheme!r}")
    opts = opts or SolverOptions()
    t0 = time.perf_counter()
    if scheme == "anderson":
        val = anderson_bound(H, layout, weights)
        return RelaxationResult(scheme, val, None, None, {"total": time.perf_counter() - t0}, layout,
                                (weights or default_weights(H, layout)).digest())
    if scheme in ("e12_pairwise", "e12_prime"):
        weights = weights or default_weights(H, layout)
        prob = build_pairwise(H, layout, weights, communication=(scheme == "e12_pairwise"), real=real)
    elif scheme == "e1":
        prob = build_e1(H, layout, real=real)
    else:
        prob = build_e12_sos(H, layout, real=real)
    t1 = time.perf_counter()
    sol = solve(prob, opts)
    t2 = time.perf_counter()
    if scheme in ("e12_pairwise", "e12_prime"):
        value, _ = certify_pairwise(prob, sol.x)
        raw = sol.objective_value
        margs = None
        if marginals:
            try:
                margs = extract_marginals(prob, sol, opts.tol_feas)
            except DegenerateDualError as exc:
                warnings.warn(str(exc))
    elif scheme == "e12_sos":
        value, _ = certify_shifted(prob, sol.x)
        raw = sol.objective_value
        margs = None
    else:
        value = certify_e1(prob, sol.x)
        raw = sol.objective_value + prob.meta["offset"]
        margs = None
    timing = {"build": t1 - t0, "solve": t2 - t1, "total": time.perf_counter() - t0}
    digest = weights.digest() if weights is not None else None
    return RelaxationResult(scheme, value, sol, margs, timing, layout, digest, raw)
