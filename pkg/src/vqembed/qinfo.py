"""Entropies, mutual information and relative entropy of entanglement.

All logarithms are natural. Pair tables are filled from two-group density
matrices, either relaxed marginals or exact ones, and thresholded with a
largest-ratio gap rule for graph reconstruction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import FERMION, SPIN
from .errors import DegenerateInputError, InvalidInputError
from .exact import DensityMatrix, marginal, partial_trace
from .relax import RelaxedMarginals, reorder_state

EIG_CUTOFF = 1e-12
GAP_FLOOR = 1e-10
PARITY_TOL = 1e-8
TABLE_ZERO = 1e-10
PPT_TOL = 1e-12


def _matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)


def von_neumann_entropy(rho) -> float:
    """``-tr(rho ln rho)``; eigenvalues below ``1e-12`` are dropped."""
    w = np.linalg.eigvalsh(_matrix(rho))
    w = w[w > EIG_CUTOFF]
    return float(-(w * np.log(w)).sum())


def _reduce(rho: np.ndarray, dA: int, dB: int) -> tuple[np.ndarray, np.ndarray]:
    t = rho.reshape(dA, dB, dA, dB)
    return np.einsum("ajbj->ab", t), np.einsum("iaib->ab", t)


def _check_dims(rho: np.ndarray, dA: int, dB: int) -> None:
    if rho.shape != (dA * dB, dA * dB):
        raise InvalidInputError(f"state of shape {rho.shape} does not match dimensions {dA}x{dB}")


def mutual_information(rho_ab, dimA: int, dimB: int) -> float:
    """``S(A) + S(B) - S(AB)`` with the first factor of dimension ``dimA``."""
    rho = _matrix(rho_ab)
    _check_dims(rho, dimA, dimB)
    ra, rb = _reduce(rho, dimA, dimB)
    return von_neumann_entropy(ra) + von_neumann_entropy(rb) - von_neumann_entropy(rho)


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """``tr rho (ln rho - ln sigma)``; ``inf`` when the support condition fails."""
    w, U = np.linalg.eigh(sigma)
    overlap = np.real(np.einsum("ik,ij,jk->k", U.conj(), rho, U))
    if np.any((w <= 0) & (overlap > EIG_CUTOFF)):
        return np.inf
    logs = np.log(np.maximum(w, 1e-300))
    return float(-von_neumann_entropy(rho) - overlap @ logs)


def subsystem_mutual_information(rho: np.ndarray, sites: Sequence[int], A: Sequence[int], B: Sequence[int],
                                 kind: str = SPIN) -> float:
    """``I(A, B)`` from a state on ``sites``.

    Overlapping subsystems use ``max{I(A, B \\ A), I(B, A \\ B)}``.
    """
    A = [int(a) for a in A]
    B = [int(b) for b in B]
    sites = [int(s) for s in sites]
    if not set(A) | set(B) <= set(sites):
        raise InvalidInputError("subsystems must lie inside the state's sites")
    if set(A) & set(B):
        candidates = []
        b_rest = [b for b in B if b not in A]
        a_rest = [a for a in A if a not in B]
        if b_rest:
            candidates.append(subsystem_mutual_information(rho, sites, A, b_rest, kind))
        if a_rest:
            candidates.append(subsystem_mutual_information(rho, sites, B, a_rest, kind))
        return max(candidates, default=0.0)
    moved = reorder_state(rho, sites, A + B, kind)
    n = len(sites)
    joint = partial_trace(moved, list(range(len(A) + len(B))), n)
    return mutual_information(joint, 1 << len(A), 1 << len(B))


# ---------------------------------------------------------------------------
# relative entropy of entanglement


@dataclass
class EntanglementEstimate:
    value: float
    converged: bool
    restarts: int
    history: list[float] = field(default_factory=list)

    def __float__(self) -> float:
        return self.value


def _log_derivative(sigma: np.ndarray, rho: np.ndarray, floor: float) -> tuple[np.ndarray, float]:
    """Gradient of ``-tr(rho ln sigma)`` and its value (eigenvalues floored)."""
    w, U = np.linalg.eigh(sigma)
    w = np.maximum(w, floor)
    lw = np.log(w)
    r = U.conj().T @ rho @ U
    diff = w[:, None] - w[None, :]
    same = np.abs(diff) < 1e-14 * np.maximum(w[:, None], w[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.where(same, 1.0 / w[:, None], (lw[:, None] - lw[None, :]) / np.where(same, 1.0, diff))
    grad = -(U @ (L * r) @ U.conj().T)
    value = float(-np.real(np.diag(r)) @ lw)
    return 0.5 * (grad + grad.conj().T), value


def _project_spectraplex(mats: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{X_i >= 0, sum_i tr X_i = 1}``."""
    w, U = np.linalg.eigh(0.5 * (mats + mats.conj().transpose(0, 2, 1)))
    flat = w.ravel()
    srt = np.sort(flat)[::-1]
    css = np.cumsum(srt) - 1.0
    k = np.arange(1, len(srt) + 1)
    cond = srt - css / k > 0
    rho_idx = np.flatnonzero(cond)[-1]
    theta = css[rho_idx] / (rho_idx + 1)
    wp = np.maximum(w - theta, 0.0)
    return np.einsum("kij,kj,klj->kil", U, wp, U.conj())


def _assemble(SA: np.ndarray, SB: np.ndarray) -> np.ndarray:
    dA, dB = SA.shape[1], SB.shape[1]
    return np.einsum("kab,kcd->acbd", SA, SB).reshape(dA * dB, dA * dB)


def _block_descent(rho, SA, SB, side: int, floor: float, iters: int, tol: float):
    """Projected gradient on one factor family with the other fixed (unit trace)."""
    dA, dB = SA.shape[1], SB.shape[1]

    def objective(SA_, SB_):
        return _log_derivative(_assemble(SA_, SB_), rho, floor)

    G, f = objective(SA, SB)
    step = 1.0
    for _ in range(iters):
        G4 = G.reshape(dA, dB, dA, dB)
        if side == 0:
            grad = np.einsum("abcd,kdb->kac", G4, SB)
            cur = SA
        else:
            grad = np.einsum("abcd,kca->kbd", G4, SA)
            cur = SB
        improved = False
        while step > 1e-12:
            trial = _project_spectraplex(cur - step * grad)
            SA_t, SB_t = (trial, SB) if side == 0 else (SA, trial)
            G_t, f_t = objective(SA_t, SB_t)
            decrease = np.real(np.sum(grad.conj() * (cur - trial)))
            if f_t <= f - 1e-4 * decrease or f_t < f - 1e-15:
                improved = True
                break
            step *= 0.5
        if not improved:
            return SA, SB, f, True
        SA, SB = SA_t, SB_t
        done = f - f_t <= tol * max(1.0, abs(f_t))
        G, f = G_t, f_t
        step = min(step * 2.0, 1e3)
        if done:
            return SA, SB, f, True
    return SA, SB, f, False


def _normalize_traces(SA: np.ndarray, SB: np.ndarray, onto: int):
    """Move all weights onto factor family ``onto``; the other gets unit traces.

    A factor with vanishing trace is replaced by the maximally mixed state so
    that zero-weight terms can still pick up weight later.
    """
    src, dst = (SB, SA) if onto == 0 else (SA, SB)
    t = np.real(np.trace(src, axis1=1, axis2=2))
    dead = t <= 1e-14
    t = np.where(dead, 1.0, t)
    unit = src / t[:, None, None]
    unit[dead] = np.eye(src.shape[1]) / src.shape[1]
    moved = dst * t[:, None, None]
    moved[dead] = 0.0
    return (moved, unit) if onto == 0 else (unit, moved)


def _random_state(rng: np.random.Generator, d: int) -> np.ndarray:
    G = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    M = G @ G.conj().T
    return M / np.trace(M).real


def min_partial_transpose_eig(rho, dimA: int, dimB: int) -> float:
    """Smallest eigenvalue of the partial transpose on the second factor."""
    rho = np.asarray(_matrix(rho))
    _check_dims(rho, dimA, dimB)
    pt = rho.reshape(dimA, dimB, dimA, dimB).transpose(0, 3, 2, 1).reshape(dimA * dimB, dimA * dimB)
    return float(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))[0])


def entanglement_rel_entropy(
    rho_ab,
    dimA: int,
    dimB: int,
    restarts: int = 8,
    seed: int = 0,
    sweeps: int = 60,
    inner_iters: int = 50,
    tol: float = 1e-9,
    floor: float = 1e-12,
    details: bool = False,
):
    """Upper estimate of ``min_{sigma separable} S(rho || sigma)``.

    ``sigma = sum_i sigma_i^A (x) sigma_i^B`` with ``(dimA*dimB)**2`` terms.
    Alternates projected-gradient solves over the A and B families; the first
    restart is the product state ``rho_A (x) rho_B`` so the estimate never
    exceeds the mutual information. States with a positive partial transpose
    in dimensions 2x2 and 2x3 are separable and return 0 without a search.
    Returns a float, or an
    :class:`EntanglementEstimate` when ``details`` is set.
    """
    rho = np.asarray(_matrix(rho_ab), dtype=complex)
    _check_dims(rho, dimA, dimB)
    if restarts < 1:
        raise InvalidInputError("restarts must be >= 1")
    rho = 0.5 * (rho + rho.conj().T)
    if dimA * dimB <= 6 and min_partial_transpose_eig(rho, dimA, dimB) >= -PPT_TOL:
        # PPT implies separable in 2x2 and 2x3, so the minimum is exactly zero
        return EntanglementEstimate(0.0, True, 0, []) if details else 0.0
    ra, rb = _reduce(rho, dimA, dimB)
    terms = (dimA * dimB) ** 2
    rng = np.random.default_rng(seed)
    best = np.inf
    converged_all = True
    history = []
    for r in range(restarts):
        if r == 0:
            # rho_A (x) rho_B written in the product eigenbasis; spare terms
            # start with zero weight on random local states
            SA = np.array([_random_state(rng, dimA) for _ in range(terms)])
            SB = np.array([_random_state(rng, dimB) for _ in range(terms)])
            wa, ua = np.linalg.eigh(ra)
            wb, ub = np.linalg.eigh(rb)
            weights = np.zeros(terms)
            for k, (i, j) in enumerate(itertools.product(range(dimA), range(dimB))):
                SA[k] = np.outer(ua[:, i], ua[:, i].conj())
                SB[k] = np.outer(ub[:, j], ub[:, j].conj())
                weights[k] = max(wa[i], 0.0) * max(wb[j], 0.0)
            SA = SA * (weights / weights.sum())[:, None, None]
            start_value = relative_entropy(rho, np.kron(ra, rb))
        else:
            SA = np.array([_random_state(rng, dimA) for _ in range(terms)])
            SB = np.array([_random_state(rng, dimB) for _ in range(terms)])
            SA = SA * rng.dirichlet(np.ones(terms))[:, None, None]
            start_value = np.inf
        f_prev = np.inf
        conv = False
        for s in range(sweeps):
            side = s % 2
            SA, SB = _normalize_traces(SA, SB, side)
            SA, SB, f, _ = _block_descent(rho, SA, SB, side, floor, inner_iters, tol)
            if s % 2 == 1 and f_prev - f <= tol * max(1.0, abs(f)):
                conv = True
                break
            if s % 2 == 1:
                f_prev = f
        sigma = _assemble(SA, SB)
        value = min(relative_entropy(rho, sigma), start_value)
        history.append(value)
        converged_all = converged_all and conv
        best = min(best, value)
    best = max(best, 0.0) if best > -1e-12 else best
    if details:
        return EntanglementEstimate(float(best), converged_all, restarts, history)
    return float(best)


# ---------------------------------------------------------------------------
# tables and gaps


CORRELATION = "correlation"
ENTANGLEMENT = "entanglement"


@dataclass
class InfoTable:
    n: int
    values: np.ndarray
    kind: str
    normalized: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.n, self.n):
            raise InvalidInputError("table shape does not match n")
        if not np.allclose(v, v.T, atol=1e-12):
            raise InvalidInputError("table must be symmetric")
        if np.any(np.diag(v) != 0):
            raise InvalidInputError("table diagonal must be zero")
        if v.size and v.min() < -1e-9:
            raise InvalidInputError("table entries must be nonnegative")
        self.values = v

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n)]

    def entry(self, i: int, j: int) -> float:
        return float(self.values[i, j])

    def to_json(self) -> dict:
        return {"kind": self.kind, "normalized": self.normalized, "n": self.n, "values": self.values.tolist(), **self.meta}


def parity_violation(rho: np.ndarray) -> float:
    """Largest entry coupling even and odd occupation sectors."""
    d = rho.shape[0]
    parity = np.array([bin(k).count("1") % 2 for k in range(d)])
    mask = parity[:, None] != parity[None, :]
    return float(np.abs(rho[mask]).max(initial=0.0))


def _pair_value(rho: np.ndarray, dA: int, dB: int, which: str, es_opts: dict) -> float:
    """Table entry; values below ``TABLE_ZERO`` are numerical noise and read as 0."""
    if which == CORRELATION:
        val = mutual_information(rho, dA, dB)
    elif which == ENTANGLEMENT:
        val = entanglement_rel_entropy(rho, dA, dB, **es_opts)
    else:
        raise InvalidInputError(f"unknown table kind {which!r}")
    return val if val >= TABLE_ZERO else 0.0


def pair_tables(
    source,
    which: str = CORRELATION,
    groups: Sequence[Sequence[int]] | None = None,
    kind: str = SPIN,
    num_sites: int | None = None,
    parity_tol: float = PARITY_TOL,
    es_opts: dict | None = None,
) -> InfoTable:
    """Pairwise table over groups from relaxed marginals or an exact state.

    ``source`` is a :class:`RelaxedMarginals` (groups come from its layout) or
    a state vector / density matrix on all sites, in which case ``groups``
    (default: singletons) selects the subsystems.
    """
    es_opts = dict(es_opts or {})
    if isinstance(source, RelaxedMarginals):
        layout = source.layout
        n = layout.M
        values = np.zeros((n, n))
        for g1 in range(n):
            for g2 in range(g1 + 1, n):
                p = (g1, g2)
                if p not in source.matrices:
                    raise InvalidInputError(f"missing marginal for pair {p}")
                ga, gb = layout.group_sites(g1), layout.group_sites(g2)
                rho = source.reordered(p, ga)
                if source.kind == FERMION and parity_violation(rho) > parity_tol:
                    raise InvalidInputError(f"pair {p} marginal is not parity-even")
                values[g1, g2] = values[g2, g1] = _pair_value(rho, 1 << len(ga), 1 << len(gb), which, es_opts)
        return InfoTable(n, values, which, meta={"source": "relaxed"})
    state = np.asarray(source)
    total = num_sites if num_sites is not None else int(round(np.log2(state.shape[0])))
    groups = [list(g) for g in groups] if groups is not None else [[i] for i in range(total)]
    n = len(groups)
    values = np.zeros((n, n))
    for g1 in range(n):
        for g2 in range(g1 + 1, n):
            sub = list(groups[g1]) + list(groups[g2])
            rho = marginal(state, sub, kind=kind, num_sites=total).matrix
            if kind == FERMION and parity_violation(rho) > parity_tol:
                raise InvalidInputError(f"groups {g1},{g2} marginal is not parity-even")
            dA, dB = 1 << len(groups[g1]), 1 << len(groups[g2])
            values[g1, g2] = values[g2, g1] = _pair_value(rho, dA, dB, which, es_opts)
    return InfoTable(n, values, which, meta={"source": "exact"})


def normalize(table: InfoTable) -> InfoTable:
    top = table.values.max(initial=0.0)
    if top <= 0:
        raise DegenerateInputError("cannot normalize an all-zero table")
    return InfoTable(table.n, table.values / top, table.kind, True, dict(table.meta))


@dataclass
class GapReport:
    values: np.ndarray  # sorted decreasing
    gap_index: int  # number of entries above the threshold
    threshold: float
    adjacency: np.ndarray
    ratio: float

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    def to_json(self) -> dict:
        return {"gap_index": self.gap_index, "threshold": self.threshold, "ratio": self.ratio, "edges": self.edges()}


def detect_gap(table: InfoTable, floor: float = GAP_FLOOR) -> GapReport:
    """Threshold at the largest ratio ``c_l / c_{l+1}`` of sorted entries.

    Entries below ``floor`` count as ``floor`` in the ratios; the first
    maximum wins ties.
    """
    iu = np.triu_indices(table.n, 1)
    entries = table.values[iu]
    if len(np.unique(entries)) < 2:
        raise DegenerateInputError("need at least two distinct entries")
    c = np.sort(entries)[::-1]
    cf = np.maximum(c, floor)
    ratios = cf[:-1] / cf[1:]
    l = int(np.argmax(ratios))
    p0 = float(np.sqrt(cf[l] * cf[l + 1]))
    adj = table.values >= p0
    np.fill_diagonal(adj, False)
    return GapReport(c, l + 1, p0, adj, float(ratios[l]))


def adjacency_from_edges(n: int, edges: Sequence[tuple[int, int]]) -> np.ndarray:
    adj = np.zeros((n, n), dtype=bool)
    for i, j in edges:
        adj[i, j] = adj[j, i] = True
    return adj
