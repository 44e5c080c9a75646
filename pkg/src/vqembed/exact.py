"""Dense exact diagonalization: ground states, marginals, expectations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import FERMION, SPIN, OperatorPolynomial, local_basis, monomial_matrix, to_matrix, to_sparse
from .errors import InvalidInputError, ResourceLimitError
from .models import LocalHamiltonian

DEFAULT_ED_CAP = 14
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class SpectrumResult:
    ground_energy: float
    ground_state: np.ndarray
    degeneracy_flag: bool
    gap: float


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    subsystem: tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def hamiltonian_matrix(H: LocalHamiltonian | OperatorPolynomial, cap: int = DEFAULT_ED_CAP) -> np.ndarray:
    """Full dense matrix; global order ``0..n-1`` (Jordan–Wigner for fermions)."""
    p = H.total() if isinstance(H, LocalHamiltonian) else H
    n = p.num_sites
    if n > cap:
        raise ResourceLimitError(f"{n} sites exceeds the exact-diagonalization cap {cap}")
    return to_sparse(p, range(n)).toarray()


def _lowest(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if np.abs(mat.imag).max(initial=0.0) == 0.0:
        w, v = np.linalg.eigh(mat.real)
        return w, v.astype(complex)
    return np.linalg.eigh(mat)


def ground(H: LocalHamiltonian | OperatorPolynomial, cap: int = DEFAULT_ED_CAP) -> SpectrumResult:
    """Lowest eigenpair by dense Hermitian eigendecomposition."""
    mat = hamiltonian_matrix(H, cap)
    w, v = _lowest(mat)
    gap = float(w[1] - w[0]) if len(w) > 1 else np.inf
    return SpectrumResult(float(w[0]), v[:, 0], bool(gap < DEGENERACY_TOL), gap)


def ground_energy_of(p: OperatorPolynomial, cluster: Sequence[int]) -> float:
    """Lowest eigenvalue of ``p`` matricized on ``cluster``."""
    return float(np.linalg.eigvalsh(to_matrix(p, cluster))[0])


def _as_density(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return state


def partial_trace(rho: np.ndarray, keep: Sequence[int], n: int) -> np.ndarray:
    """Reduced matrix on qubit slots ``keep`` (in the given order)."""
    keep = list(keep)
    rest = [k for k in range(n) if k not in keep]
    t = rho.reshape([2] * (2 * n))
    perm = keep + rest + [n + k for k in keep] + [n + k for k in rest]
    t = t.transpose(perm)
    dk, dr = 1 << len(keep), 1 << len(rest)
    t = t.reshape(dk, dr, dk, dr)
    return np.einsum("ajbj->ab", t)


def marginal(state, subset: Sequence[int], kind: str = SPIN, num_sites: int | None = None) -> DensityMatrix:
    """Reduced density matrix on ``subset``.

    Spins use the partial trace. Fermions solve the moment-matching system
    ``tr(rho_C f) = <f>`` over the local basis of ``subset`` under the local
    Jordan–Wigner map, which is valid for non-contiguous subsets.
    """
    rho = _as_density(state)
    n = int(round(np.log2(rho.shape[0]))) if num_sites is None else num_sites
    subset = [int(s) for s in subset]
    if not subset or len(set(subset)) != len(subset) or any(not 0 <= s < n for s in subset):
        raise InvalidInputError("subset must be nonempty, distinct, and inside the system")
    if kind == SPIN:
        return DensityMatrix(partial_trace(rho, subset, n), tuple(subset))
    basis = local_basis(subset, FERMION, n)
    dim = 1 << len(subset)
    moments = np.array([np.trace(rho @ _global(f, n)) for f in basis])
    # tr(rho_C f_C) = sum_ab rho_ab (f_C)_ba = vec(f_C^T) . vec(rho_C)
    A = np.array([to_matrix(f, subset).T.reshape(-1) for f in basis])
    if np.linalg.matrix_rank(A) < dim * dim:
        raise RuntimeError("local basis Gram matrix is singular")
    vec = np.linalg.solve(A, moments)
    out = vec.reshape(dim, dim)
    return DensityMatrix(0.5 * (out + out.conj().T), tuple(subset))


def _global(f: OperatorPolynomial, n: int) -> np.ndarray:
    return to_sparse(f, range(n)).toarray()


def expectation(p: OperatorPolynomial, state) -> complex:
    """``<psi|p|psi>`` (or ``tr(rho p)``) with the global ordering."""
    rho_or_psi = np.asarray(state, dtype=complex)
    n = int(round(np.log2(rho_or_psi.shape[0])))
    if p.support() and max(p.support()) >= n:
        raise InvalidInputError("polynomial support exceeds the state")
    mat = to_sparse(p, range(n))
    if rho_or_psi.ndim == 1:
        return complex(np.vdot(rho_or_psi, mat @ rho_or_psi))
    return complex((mat.multiply(rho_or_psi.T)).sum())


def fermion_reorder_unitary(mode_order: Sequence[int], new_order: Sequence[int]) -> np.ndarray:
    """Unitary taking the JW representation on ``mode_order`` to ``new_order``.

    Basis states are occupation strings; the map permutes occupations and
    multiplies by ``(-1)`` to the number of transposed occupied pairs.
    """
    mode_order = list(mode_order)
    new_order = list(new_order)
    if sorted(mode_order) != sorted(new_order):
        raise InvalidInputError("orders must contain the same modes")
    n = len(mode_order)
    pos_new = {m: k for k, m in enumerate(new_order)}
    perm = [pos_new[m] for m in mode_order]  # old slot -> new slot
    dim = 1 << n
    U = np.zeros((dim, dim))
    for x in range(dim):
        occ = [(x >> (n - 1 - k)) & 1 for k in range(n)]
        y = 0
        for k in range(n):
            if occ[k]:
                y |= 1 << (n - 1 - perm[k])
        occupied = [k for k in range(n) if occ[k]]
        inv = sum(1 for a in range(len(occupied)) for b in range(a + 1, len(occupied)) if perm[occupied[a]] > perm[occupied[b]])
        U[y, x] = -1.0 if inv % 2 else 1.0
    return U


def fermion_subset_marginal(rho: np.ndarray, mode_order: Sequence[int], subset: Sequence[int]) -> np.ndarray:
    """Marginal of ``subset`` by reordering it to the front and tracing the rest."""
    mode_order = list(mode_order)
    rest = [m for m in mode_order if m not in subset]
    U = fermion_reorder_unitary(mode_order, list(subset) + rest)
    moved = U @ rho @ U.T
    return partial_trace(moved, list(range(len(subset))), len(mode_order))


__all__ = [
    "DEFAULT_ED_CAP",
    "DensityMatrix",
    "SpectrumResult",
    "expectation",
    "fermion_reorder_unitary",
    "fermion_subset_marginal",
    "ground",
    "ground_energy_of",
    "hamiltonian_matrix",
    "marginal",
    "monomial_matrix",
    "partial_trace",
]
