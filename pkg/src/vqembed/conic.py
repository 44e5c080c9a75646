"""Block semidefinite programs in dual form.

Problem::

    maximize    c . x
    subject to  S_k(x) = F0_k + sum_i x_i F_ik  >= 0     (k = 1..K)

The associated primal (the certificates) is::

    minimize    sum_k <F0_k, Z_k>
    subject to  sum_k <F_ik, Z_k> = -c_i,   Z_k >= 0

Residuals are measured in absolute terms divided by
``scale = 1 + max_k ||F0_k||_F``.

Two solvers are provided. The default for moderate variable counts is an
infeasible primal-dual interior point method with the HKM search direction and
Mehrotra's predictor-corrector. Larger problems fall back to the
alternating-direction augmented Lagrangian method of Wen, Goldfarb and Yin
applied to the standard form ``min <C, Z>`` with ``A_i = -F_i``, ``b = c``,
``C = F0``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InvalidInputError

OPTIMAL = "optimal"
MAX_ITER = "max-iterations"
INFEASIBLE = "infeasible-suspected"


# ---------------------------------------------------------------------------
# Hermitian embedding


def embed_hermitian(M: np.ndarray) -> np.ndarray:
    """Real symmetric image ``[[A, -B], [B, A]]`` of ``M = A + iB``."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError("expected a square matrix")
    if np.abs(M - M.conj().T).max(initial=0.0) > 1e-12:
        raise InvalidInputError("matrix is not Hermitian")
    A, B = M.real, M.imag
    return np.block([[A, -B], [B, A]])


def embed_any(M: np.ndarray) -> np.ndarray:
    """Same map without the Hermiticity check (linear in ``M``)."""
    M = np.asarray(M, dtype=complex)
    A, B = M.real, M.imag
    return np.block([[A, -B], [B, A]])


def deembed_hermitian(Z: np.ndarray) -> np.ndarray:
    """Inverse of :func:`embed_hermitian` (averaging the redundant copies)."""
    Z = np.asarray(Z, dtype=float)
    n = Z.shape[0] // 2
    z11, z12, z21, z22 = Z[:n, :n], Z[:n, n:], Z[n:, :n], Z[n:, n:]
    out = 0.5 * (z11 + z22) + 0.5j * (z21 - z12)
    return 0.5 * (out + out.conj().T)


# ---------------------------------------------------------------------------
# problem containers


@dataclass
class Block:
    """One PSD constraint ``F0 + sum_i x_i F_i >= 0``.

    ``A`` has shape ``(dim*dim, num_vars)``; column ``i`` is ``vec(F_i)``.
    """

    dim: int
    F0: np.ndarray
    A: sp.csc_matrix
    tag: Any = None

    def matrix(self, x: np.ndarray) -> np.ndarray:
        return self.F0 + (self.A @ x).reshape(self.dim, self.dim)

    def coefficient(self, i: int) -> np.ndarray:
        col = self.A[:, [i]].toarray().ravel()
        return col.reshape(self.dim, self.dim)


@dataclass
class ConicProblem:
    c: np.ndarray
    blocks: list[Block]
    meta: dict = field(default_factory=dict)

    @property
    def num_vars(self) -> int:
        return len(self.c)

    def validate(self) -> None:
        m = self.num_vars
        used = np.abs(self.c) > 0
        for b in self.blocks:
            if b.dim < 1:
                raise InvalidInputError("block dimension must be >= 1")
            if b.F0.shape != (b.dim, b.dim) or b.A.shape != (b.dim * b.dim, m):
                raise InvalidInputError("block shapes are inconsistent")
            if np.abs(b.F0 - b.F0.T).max(initial=0.0) > 1e-10:
                raise InvalidInputError("F0 must be symmetric")
            d = b.dim
            idx = np.arange(d * d).reshape(d, d)
            asym = b.A[idx.ravel(), :] - b.A[idx.T.ravel(), :]
            if asym.nnz and np.abs(asym.data).max() > 1e-10:
                raise InvalidInputError("coefficient matrices must be symmetric")
            used |= np.asarray((abs(b.A)).sum(axis=0)).ravel() > 0
        if not used.all():
            raise InvalidInputError(f"variables {np.flatnonzero(~used)[:10].tolist()} are unreferenced")

    def scale(self) -> float:
        return 1.0 + max((float(np.linalg.norm(b.F0)) for b in self.blocks), default=0.0)


class BlockBuilder:
    """Accumulate ``(var, matrix)`` contributions into a sparse :class:`Block`."""

    def __init__(self, dim: int, num_vars: int | None = None, tag: Any = None):
        self.dim = dim
        self.num_vars = num_vars
        self.tag = tag
        self.F0 = np.zeros((dim, dim))
        self._rows: list[np.ndarray] = []
        self._cols: list[np.ndarray] = []
        self._vals: list[np.ndarray] = []

    def add_constant(self, M: np.ndarray) -> None:
        self.F0 += M

    def add(self, var: int, M: np.ndarray, tol: float = 1e-15) -> None:
        flat = np.asarray(M, dtype=float).ravel()
        nz = np.flatnonzero(np.abs(flat) > tol)
        if nz.size:
            self._rows.append(nz)
            self._cols.append(np.full(nz.size, var))
            self._vals.append(flat[nz])

    def add_many(self, vars_: np.ndarray, mats: np.ndarray, tol: float = 1e-15) -> None:
        """Add a stack ``mats[k]`` for variable ``vars_[k]``."""
        flat = np.asarray(mats, dtype=float).reshape(len(vars_), -1)
        k, pos = np.nonzero(np.abs(flat) > tol)
        if k.size:
            self._rows.append(pos)
            self._cols.append(np.asarray(vars_)[k])
            self._vals.append(flat[k, pos])

    def add_entries(self, var: int, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray) -> None:
        self._rows.append(np.asarray(rows) * self.dim + np.asarray(cols))
        self._cols.append(np.full(len(rows), var))
        self._vals.append(np.asarray(vals, dtype=float))

    def build(self, num_vars: int | None = None) -> Block:
        m = num_vars if num_vars is not None else self.num_vars
        if m is None:
            raise InvalidInputError("number of variables unknown")
        if self._rows:
            A = sp.csc_matrix(
                (np.concatenate(self._vals), (np.concatenate(self._rows), np.concatenate(self._cols))),
                shape=(self.dim * self.dim, m),
            )
            A.sum_duplicates()
        else:
            A = sp.csc_matrix((self.dim * self.dim, m))
        F0 = 0.5 * (self.F0 + self.F0.T)
        return Block(self.dim, F0, A, self.tag)


@dataclass
class ConicSolution:
    status: str
    x: np.ndarray
    objective_value: float
    duals: list[np.ndarray]
    residuals: dict
    iterations: int = 0
    solve_time: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class SolverOptions:
    tol_gap: float = 1e-7
    tol_feas: float = 1e-7
    max_iter: int = 20000
    method: str = "auto"
    ipm_max_vars: int = 9000
    mu: float | None = None
    adapt_every: int = 20
    verbose: bool = False
    time_limit: float | None = None


# ---------------------------------------------------------------------------
# solver


class _Layout:
    """Stacked vectorization of all blocks with same-size batches."""

    def __init__(self, blocks: Sequence[Block]):
        self.dims = [b.dim for b in blocks]
        self.offsets = np.cumsum([0] + [d * d for d in self.dims])
        self.total = int(self.offsets[-1])
        groups: dict[int, list[int]] = {}
        for k, d in enumerate(self.dims):
            groups.setdefault(d, []).append(k)
        self.groups = []
        for d, ks in sorted(groups.items()):
            idx = np.concatenate([np.arange(self.offsets[k], self.offsets[k + 1]) for k in ks])
            self.groups.append((d, ks, idx))

    def split(self, v: np.ndarray) -> list[np.ndarray]:
        return [v[self.offsets[k] : self.offsets[k + 1]].reshape(d, d) for k, d in enumerate(self.dims)]

    def project(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Positive and negative parts ``(P+(V), P+(-V))`` blockwise."""
        pos = np.empty_like(v)
        neg = np.empty_like(v)
        for d, ks, idx in self.groups:
            mats = v[idx].reshape(len(ks), d, d)
            if d == 1:
                p = np.maximum(mats, 0.0)
                n = np.maximum(-mats, 0.0)
            else:
                mats = 0.5 * (mats + mats.transpose(0, 2, 1))
                w, U = np.linalg.eigh(mats)
                wp = np.maximum(w, 0.0)
                p = np.einsum("kij,kj,klj->kil", U, wp, U, optimize=True)
                n = p - mats
            pos[idx] = p.reshape(-1)
            neg[idx] = n.reshape(-1)
        return pos, neg


def _factor(G: sp.csc_matrix):
    m = G.shape[0]
    if m <= 1500:
        dense = G.toarray()
        try:
            cho = sla.cho_factor(dense, lower=True, check_finite=False)
            return lambda r: sla.cho_solve(cho, r, check_finite=False)
        except np.linalg.LinAlgError:
            raise InvalidInputError("constraint Gram matrix is singular (dependent variables)")
    lu = spla.splu(sp.csc_matrix(G), permc_spec="MMD_AT_PLUS_A")
    diag = np.abs(lu.U.diagonal())
    if diag.min() <= 1e-12 * max(diag.max(), 1.0):
        raise InvalidInputError("constraint Gram matrix is singular (dependent variables)")
    return lu.solve


def solve(problem: ConicProblem, opts: SolverOptions | None = None, **kwargs) -> ConicSolution:
    """Solve ``problem``.

    ``opts.method`` selects ``"ipm"`` (primal-dual interior point), ``"admm"``
    or ``"auto"``, which uses the interior-point method while the dense
    Schur complement stays small (``num_vars <= opts.ipm_max_vars``).
    """
    opts = replace(opts) if opts is not None else SolverOptions()
    for k, v in kwargs.items():
        setattr(opts, k, v)
    method = opts.method
    if method == "auto":
        method = "ipm" if problem.num_vars <= opts.ipm_max_vars else "admm"
    if method == "ipm":
        return _solve_ipm(problem, opts)
    if method == "admm":
        return _solve_admm(problem, opts)
    raise InvalidInputError(f"unknown method {opts.method!r}")


def _solve_admm(problem: ConicProblem, opts: SolverOptions) -> ConicSolution:
    t0 = time.perf_counter()
    blocks = problem.blocks
    layout = _Layout(blocks)
    A = sp.vstack([b.A for b in blocks]).tocsr()
    At = A.T.tocsr()
    C = np.concatenate([b.F0.ravel() for b in blocks])
    c = np.asarray(problem.c, dtype=float)
    G = (At @ A).tocsc()
    solve_G = _factor(G)

    scale = problem.scale()
    mu = opts.mu if opts.mu is not None else 1.0
    Z = np.zeros(layout.total)  # primal certificate
    S = np.zeros(layout.total)
    # identity-proportional start for the certificates
    for k, d in enumerate(layout.dims):
        Z[layout.offsets[k] : layout.offsets[k + 1]] = (np.eye(d) / max(sum(layout.dims), 1)).ravel()
    y = np.zeros(len(c))
    status = MAX_ITER
    hist_p: list[float] = []
    hist_d: list[float] = []
    it = 0
    res = {}
    for it in range(1, opts.max_iter + 1):
        y = solve_G(mu * (At @ Z + c) + At @ (S - C))
        V = C + A @ y - mu * Z
        S, negpart = layout.project(V)
        Z = negpart / mu
        # residuals
        rp = np.linalg.norm(At @ Z + c) / scale
        rd = np.linalg.norm(C + A @ y - S) / scale
        pobj = float(C @ Z)
        dobj = float(c @ y)
        gap = abs(pobj - dobj) / scale
        hist_p.append(rp)
        hist_d.append(rd)
        if max(rp, rd) <= opts.tol_feas and gap <= opts.tol_gap:
            status = OPTIMAL
            break
        if not np.isfinite(dobj) or abs(dobj) > 1e12 * scale:
            status = INFEASIBLE
            break
        if it % opts.adapt_every == 0:
            ratio = np.median(np.array(hist_p[-opts.adapt_every :]) / np.maximum(hist_d[-opts.adapt_every :], 1e-300))
            if ratio > 3.0:
                mu = min(mu * 1.6, 1e6)
            elif ratio < 1 / 3.0:
                mu = max(mu / 1.6, 1e-6)
        if opts.time_limit is not None and time.perf_counter() - t0 > opts.time_limit:
            break
        if opts.verbose and it % 500 == 0:
            print(f"it {it:6d} rp {rp:.2e} rd {rd:.2e} gap {gap:.2e} mu {mu:.2e} obj {dobj:.8f}")
    res = {"primal_infeasibility": float(rp), "dual_infeasibility": float(rd), "relative_gap": float(gap), "mu": mu}
    return ConicSolution(
        status=status,
        x=y,
        objective_value=float(c @ y),
        duals=[0.5 * (z + z.T) for z in layout.split(Z)],
        residuals=res,
        iterations=it,
        solve_time=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# interior point


class _SchurBlock:
    """Per-block data for assembling ``M_ij = <F_i, X F_j S^-1>``.

    Columns with few nonzeros (moment-matrix parameters) use rank-one
    products ``X[:, r] Sinv[c, :]``; the rest use dense triple products.
    """

    SPARSE_NNZ = 8
    CHUNK = 1 << 21
    DENSE_LIMIT = 1 << 22

    def __init__(self, block: Block):
        A = block.A.tocsc()
        d = block.dim
        self.d = d
        counts = np.diff(A.indptr)
        self.cols = np.flatnonzero(counts)
        F = A[:, self.cols].tocsc()
        self.Ft = F.T.tocsr()
        # small blocks contract against a dense copy (one BLAS call)
        self.Fdense = F.toarray() if F.shape[0] * F.shape[1] <= self.DENSE_LIMIT else None
        nnz = np.diff(F.indptr)
        self.sparse_pos = np.flatnonzero(nnz <= self.SPARSE_NNZ)
        self.dense_pos = np.flatnonzero(nnz > self.SPARSE_NNZ)
        q = int(nnz[self.sparse_pos].max(initial=0))
        ns = len(self.sparse_pos)
        self.r = np.zeros((ns, q), dtype=np.intp)
        self.c = np.zeros((ns, q), dtype=np.intp)
        self.v = np.zeros((ns, q))
        for k, j in enumerate(self.sparse_pos):
            lo, hi = F.indptr[j], F.indptr[j + 1]
            rows = F.indices[lo:hi]
            self.r[k, : hi - lo] = rows // d
            self.c[k, : hi - lo] = rows % d
            self.v[k, : hi - lo] = F.data[lo:hi]
        self.Fd = F[:, self.dense_pos].toarray().T.reshape(-1, d, d) if len(self.dense_pos) else None

    def schur(self, X: np.ndarray, Sinv: np.ndarray) -> np.ndarray:
        d = self.d
        n = len(self.cols)
        W = np.empty((n, d * d))
        ns = len(self.sparse_pos)
        step = max(1, self.CHUNK // (d * d))
        for lo in range(0, ns, step):
            hi = min(ns, lo + step)
            acc = np.zeros((hi - lo, d, d))
            for s in range(self.r.shape[1]):
                xr = X[:, self.r[lo:hi, s]].T
                sc = Sinv[self.c[lo:hi, s], :]
                acc += self.v[lo:hi, s, None, None] * xr[:, :, None] * sc[:, None, :]
            W[self.sparse_pos[lo:hi]] = acc.reshape(hi - lo, -1)
        if self.Fd is not None:
            W[self.dense_pos] = (X @ self.Fd @ Sinv).reshape(len(self.dense_pos), -1)
        if self.Fdense is not None:
            return W @ self.Fdense
        return np.asarray(self.Ft @ W.T)


def _blockwise(layout: _Layout, fn, *vecs: np.ndarray) -> np.ndarray:
    """Apply ``fn`` to batched ``(count, d, d)`` stacks of every block size."""
    out = np.empty(layout.total)
    for d, ks, idx in layout.groups:
        mats = [v[idx].reshape(len(ks), d, d) for v in vecs]
        out[idx] = fn(*mats).reshape(-1)
    return out


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.transpose(0, 2, 1))


def _max_step(layout: _Layout, P: np.ndarray, dP: np.ndarray) -> float:
    """Largest ``a`` with ``P + a dP`` PSD (``inf`` when unbounded)."""
    worst = 0.0
    for d, ks, idx in layout.groups:
        Pm = P[idx].reshape(len(ks), d, d)
        dPm = _sym(dP[idx].reshape(len(ks), d, d))
        w, U = np.linalg.eigh(_sym(Pm))
        if w.min() <= 0:
            return 0.0
        R = U / np.sqrt(w)[:, None, :]
        Q = R.transpose(0, 2, 1) @ dPm @ R
        lam = np.linalg.eigvalsh(_sym(Q))[:, 0].min()
        worst = min(worst, lam)
    return np.inf if worst >= 0 else -1.0 / worst


def _solve_ipm(problem: ConicProblem, opts: SolverOptions) -> ConicSolution:
    """Infeasible primal-dual path following (HKM direction, Mehrotra correction)."""
    t0 = time.perf_counter()
    blocks = problem.blocks
    layout = _Layout(blocks)
    A = sp.vstack([b.A for b in blocks]).tocsr()
    At = A.T.tocsr()
    C = np.concatenate([b.F0.ravel() for b in blocks])
    c = np.asarray(problem.c, dtype=float)
    m = len(c)
    schur_blocks = [_SchurBlock(b) for b in blocks]
    scale = problem.scale()
    n_tot = sum(layout.dims)

    col_norms = np.sqrt(np.asarray(A.multiply(A).sum(axis=0)).ravel())
    xi = max(10.0, np.sqrt(n_tot), float(np.max((1 + np.abs(c)) / (1 + col_norms), initial=0.0)))
    eta = max(10.0, np.sqrt(n_tot), float(np.linalg.norm(C)), float(col_norms.max(initial=0.0)))
    eye = np.concatenate([np.eye(d).ravel() for d in layout.dims])
    X = xi * eye
    S = eta * eye
    y = np.zeros(m)
    status = MAX_ITER
    rp_n = rd_n = gap = np.inf
    it = 0
    stalls = 0
    for it in range(1, opts.max_iter + 1):
        rp = -c - At @ X
        rd = C + A @ y - S
        pobj = float(C @ X)
        dobj = float(c @ y)
        rp_n = float(np.linalg.norm(rp)) / scale
        rd_n = float(np.linalg.norm(rd)) / scale
        gap = abs(pobj - dobj) / scale
        if opts.verbose:
            print(f"it {it:3d} rp {rp_n:.2e} rd {rd_n:.2e} gap {gap:.2e} obj {dobj:.10f}")
        if max(rp_n, rd_n) <= opts.tol_feas and gap <= opts.tol_gap:
            status = OPTIMAL
            break
        if not np.isfinite(dobj) or abs(dobj) > 1e12 * scale or abs(pobj) > 1e12 * scale:
            status = INFEASIBLE
            break
        if opts.time_limit is not None and time.perf_counter() - t0 > opts.time_limit:
            break
        mu = float(X @ S) / n_tot
        Sinv = _blockwise(layout, lambda s: _sym(np.linalg.inv(s)), S)
        M = np.zeros((m, m))
        for sb, blk_idx in zip(schur_blocks, range(len(blocks))):
            if len(sb.cols) == 0:
                continue
            lo, hi = layout.offsets[blk_idx], layout.offsets[blk_idx + 1]
            d = layout.dims[blk_idx]
            Mk = sb.schur(X[lo:hi].reshape(d, d), Sinv[lo:hi].reshape(d, d))
            M[np.ix_(sb.cols, sb.cols)] += Mk
        M = 0.5 * (M + M.T)
        try:
            fac = sla.cho_factor(M, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            M[np.diag_indices(m)] += 1e-12 * max(1.0, float(np.abs(np.diag(M)).max()))
            try:
                fac = sla.cho_factor(M, lower=True, check_finite=False)
            except np.linalg.LinAlgError:
                break
        XrdSi = _blockwise(layout, lambda x, r, si: x @ r @ si, X, rd, Sinv)

        def direction(sigma: float, corr: np.ndarray | None):
            R = sigma * mu * Sinv - X - XrdSi
            if corr is not None:
                R = R - corr
            dy = sla.cho_solve(fac, At @ R - rp, check_finite=False)
            dS = A @ dy + rd
            XdSSi = _blockwise(layout, lambda x, ds, si: x @ ds @ si, X, dS, Sinv)
            dX = R + XrdSi - XdSSi
            dX = _blockwise(layout, _sym, dX)
            return dX, dy, dS

        dXa, dya, dSa = direction(0.0, None)
        ap = min(1.0, _max_step(layout, X, dXa))
        ad = min(1.0, _max_step(layout, S, dSa))
        new_mu = float((X + ap * dXa) @ (S + ad * dSa)) / n_tot
        expon = max(1.0, 3.0 * min(ap, ad) ** 2)
        sigma = min(1.0, (max(new_mu, 0.0) / mu) ** expon)
        corr = _blockwise(layout, lambda a, b, si: a @ b @ si, dXa, dSa, Sinv)
        dX, dy, dS = direction(sigma, corr)
        gamma = 0.9 + 0.09 * min(ap, ad)
        ap = min(1.0, gamma * _max_step(layout, X, dX))
        ad = min(1.0, gamma * _max_step(layout, S, dS))
        X = X + ap * dX
        y = y + ad * dy
        S = S + ad * dS
        stalls = stalls + 1 if max(ap, ad) < 1e-6 else 0
        if stalls >= 5:
            break
    res = {"primal_infeasibility": float(rp_n), "dual_infeasibility": float(rd_n), "relative_gap": float(gap)}
    return ConicSolution(
        status=status,
        x=y,
        objective_value=float(c @ y),
        duals=[0.5 * (z + z.T) for z in layout.split(X)],
        residuals=res,
        iterations=it,
        solve_time=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# independent certificate checks


def kkt_residuals(problem: ConicProblem, x: np.ndarray, duals: Sequence[np.ndarray]) -> dict:
    """Residuals of the optimality conditions recomputed block by block.

    Returns the most negative slack eigenvalue, the most negative certificate
    eigenvalue, the stationarity error ``max_i |sum_k <F_ik, Z_k> + c_i|``,
    the absolute duality gap and the complementarity ``sum_k <S_k, Z_k>``.
    """
    x = np.asarray(x, dtype=float)
    stat = np.asarray(problem.c, dtype=float).copy()
    min_slack = np.inf
    min_dual = np.inf
    primal_obj = 0.0
    comp = 0.0
    for blk, Zk in zip(problem.blocks, duals):
        Sk = blk.matrix(x)
        Sk = 0.5 * (Sk + Sk.T)
        min_slack = min(min_slack, float(np.linalg.eigvalsh(Sk)[0]))
        min_dual = min(min_dual, float(np.linalg.eigvalsh(0.5 * (Zk + Zk.T))[0]))
        stat += blk.A.T @ Zk.ravel()
        primal_obj += float(np.sum(blk.F0 * Zk))
        comp += float(np.sum(Sk * Zk))
    dual_obj = float(problem.c @ x)
    return {
        "min_slack_eig": min_slack,
        "min_dual_eig": min_dual,
        "stationarity": float(np.abs(stat).max(initial=0.0)),
        "gap": abs(primal_obj - dual_obj),
        "complementarity": comp,
        "primal_objective": primal_obj,
        "dual_objective": dual_obj,
    }


def check_kkt(problem: ConicProblem, sol: ConicSolution, tol: float = 1e-6) -> tuple[bool, dict]:
    """Pass/fail of :func:`kkt_residuals` at ``tol * scale``."""
    r = kkt_residuals(problem, sol.x, sol.duals)
    lim = tol * problem.scale()
    ok = (
        r["min_slack_eig"] >= -lim
        and r["min_dual_eig"] >= -lim
        and r["stationarity"] <= lim
        and r["gap"] <= lim
    )
    return ok, r


# ---------------------------------------------------------------------------
# SDPA sparse text format


def dump_sdpa(problem: ConicProblem, path: str | Path) -> None:
    """Write ``problem`` in SDPA sparse format.

    SDPA solves ``min c'.x  s.t.  sum_i x_i F_i - F_0 >= 0``; we store
    ``c' = -c`` and ``F_0' = -F0`` so the optimal values differ by sign.
    Layout: comment lines start with ``*``; then the number of variables, the
    number of blocks, the block sizes, the vector ``c'``, and one line
    ``matno blkno i j value`` per upper-triangular nonzero (1-based).
    Block tags are written as ``* tag <k> <repr>`` comments.
    """
    lines = ["* vqembed conic problem (dual form, sign-flipped for SDPA)"]
    for k, b in enumerate(problem.blocks):
        lines.append(f"* tag {k + 1} {b.tag!r}")
    lines.append(str(problem.num_vars))
    lines.append(str(len(problem.blocks)))
    lines.append(" ".join(str(b.dim) for b in problem.blocks))
    lines.append(" ".join(repr(float(-v)) for v in problem.c))
    for k, b in enumerate(problem.blocks):
        iu, ju = np.triu_indices(b.dim)
        for i, j in zip(iu, ju):
            if b.F0[i, j] != 0:
                lines.append(f"0 {k + 1} {i + 1} {j + 1} {float(-b.F0[i, j])!r}")
        Acoo = b.A.tocoo()
        order = np.lexsort((Acoo.row, Acoo.col))
        for r, col, v in zip(Acoo.row[order], Acoo.col[order], Acoo.data[order]):
            i, j = divmod(int(r), b.dim)
            if i <= j:
                lines.append(f"{col + 1} {k + 1} {i + 1} {j + 1} {float(v)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_sdpa(path: str | Path) -> ConicProblem:
    """Read a file written by :func:`dump_sdpa` (or any sparse SDPA file)."""
    raw = Path(path).read_text().splitlines()
    tags: dict[int, str] = {}
    body = []
    for line in raw:
        s = line.strip()
        if not s:
            continue
        if s.startswith("*") or s.startswith('"'):
            parts = s.split(maxsplit=3)
            if len(parts) >= 4 and parts[1] == "tag":
                tags[int(parts[2])] = parts[3]
            continue
        body.append(s.replace(",", " ").replace("{", " ").replace("}", " ").replace("(", " ").replace(")", " "))
    m = int(body[0].split()[0])
    nb = int(body[1].split()[0])
    dims = [abs(int(float(t))) for t in body[2].split()[:nb]]
    cvals: list[float] = []
    pos = 3
    while len(cvals) < m:
        cvals.extend(float(t) for t in body[pos].split())
        pos += 1
    builders = [BlockBuilder(d, m, tags.get(k + 1)) for k, d in enumerate(dims)]
    for line in body[pos:]:
        t = line.split()
        matno, blk, i, j, v = int(t[0]), int(t[1]) - 1, int(t[2]) - 1, int(t[3]) - 1, float(t[4])
        b = builders[blk]
        if matno == 0:
            b.F0[i, j] -= v
            if i != j:
                b.F0[j, i] -= v
        else:
            if i == j:
                b.add_entries(matno - 1, [i], [j], [v])
            else:
                b.add_entries(matno - 1, [i, j], [j, i], [v, v])
    return ConicProblem(-np.asarray(cvals[:m]), [b.build() for b in builders])
