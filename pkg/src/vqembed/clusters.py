"""Mutual-information driven cluster selection.

Relaxed pair marginals of a solved layout give a correlation table between
groups. Pairs are ranked by that table and merged greedily, either once
(:func:`optimize_clusters`) or round by round (:func:`successive_optimize`).
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .conic import SolverOptions
from .errors import InvalidInputError, UndefinedResultError
from .exact import ground
from .models import LocalHamiltonian
from .qinfo import CORRELATION, InfoTable, pair_tables
from .relax import ClusterLayout, RelaxedMarginals, RelaxationResult, solve_relaxation

OVERLAPPING = "overlapping"
NON_OVERLAPPING = "non-overlapping"
RELAXED = "relaxed"
EXACT = "exact"
TIE_DECIMALS = 12


def order_pairs(table: InfoTable) -> list[tuple[int, int]]:
    """Pairs ``i < j`` by decreasing value; equal values fall back to dictionary order.

    Values are compared after rounding to ``TIE_DECIMALS`` places so that
    solver noise does not break ties between symmetric pairs.
    """
    n = table.n
    keys = [(-round(float(table.values[i, j]), TIE_DECIMALS), i, j) for i in range(n) for j in range(i + 1, n)]
    keys.sort()
    return [(i, j) for _, i, j in keys]


def marginals_digest(marginals: RelaxedMarginals | None) -> str | None:
    if marginals is None:
        return None
    h = hashlib.sha256()
    for p in sorted(marginals.matrices):
        h.update(repr(p).encode())
        h.update(np.round(marginals.matrices[p], 10).tobytes())
    return h.hexdigest()[:16]


def correlation_table(H: LocalHamiltonian, layout: ClusterLayout, result: RelaxationResult | None = None,
                      source: str = RELAXED) -> InfoTable:
    """Mutual information between the groups of ``layout``.

    ``source="exact"`` uses exact ground-state marginals instead of the
    relaxed ones (for validation only).
    """
    if source == EXACT:
        state = ground(H).ground_state
        return pair_tables(state, CORRELATION, groups=layout.site_groups(), kind=H.kind, num_sites=H.num_sites)
    if source != RELAXED:
        raise InvalidInputError(f"unknown marginal source {source!r}")
    if result is None or result.marginals is None:
        raise InvalidInputError("relaxed marginals are required")
    return pair_tables(result.marginals, CORRELATION)


@dataclass
class ClusterSelection:
    clusters: list[tuple[int, ...]]
    keyword: str
    k: int
    order: list[tuple[int, int]]
    table: InfoTable | None
    singleton_value: float | None
    fallbacks: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "clusters": [list(c) for c in self.clusters],
            "keyword": self.keyword,
            "k": self.k,
            "singleton_value": self.singleton_value,
            "fallbacks": self.fallbacks,
        }


def _affinity(site: int, members: Sequence[int], values: np.ndarray) -> float:
    return float(sum(values[site, m] for m in members))


def _best_site(candidates: Sequence[int], members: Sequence[int], values: np.ndarray) -> int:
    """Candidate with the largest summed correlation to ``members`` (largest single value if empty)."""
    def score(s: int) -> tuple:
        if members:
            val = _affinity(s, members, values)
        else:
            val = float(values[s].max(initial=0.0))
        return (-round(val, TIE_DECIMALS), s)

    return min(candidates, key=score)


def _non_overlapping(d: int, k: int, order: list[tuple[int, int]], values: np.ndarray):
    pairs = list(order)
    used: set[int] = set()
    out: list[tuple[int, ...]] = []
    fallbacks: list[dict] = []
    for _ in range(d // k):
        new: list[int] = []
        idx = 0
        while len(new) < k and idx < len(pairs):
            p = pairs[idx]
            merged = set(new) | set(p)
            if len(merged) <= k and not (set(p) & used):
                new = sorted(merged)
                pairs.pop(idx)
            else:
                idx += 1
        while len(new) < k:
            free = [s for s in range(d) if s not in used and s not in new]
            s = _best_site(free, new, values)
            fallbacks.append({"cluster": len(out), "site": s, "partial": list(new)})
            new = sorted(new + [s])
        used |= set(new)
        out.append(tuple(new))
    return out, fallbacks


def _overlapping(d: int, k: int, order: list[tuple[int, int]], values: np.ndarray):
    pairs = list(order)
    out: list[tuple[int, ...]] = []
    fallbacks: list[dict] = []
    covered: set[int] = set()
    while covered != set(range(d)):
        union: list[int] = []
        taken = 0
        if not pairs:
            # ranking exhausted: grow from the best attached uncovered site
            uncovered = [s for s in range(d) if s not in covered]
            union.append(_best_site(uncovered, sorted(covered), values))
        for p in pairs:
            taken += 1
            union += [s for s in p if s not in union]
            if len(union) >= k:
                break
        if len(union) > k:
            # the last pair brought two new sites; keep the better attached one
            a, b = union[-2], union[-1]
            rest = union[:-2]
            drop = a if _affinity(a, rest, values) < _affinity(b, rest, values) else b
            if _affinity(a, rest, values) == _affinity(b, rest, values):
                drop = max(a, b)
            union.remove(drop)
            fallbacks.append({"cluster": len(out), "trimmed": drop})
        elif len(union) < k:
            free = [s for s in range(d) if s not in union]
            while len(union) < k and free:
                s = _best_site(free, union, values)
                free.remove(s)
                union.append(s)
            fallbacks.append({"cluster": len(out), "padded": True})
        del pairs[:taken]
        cluster = tuple(sorted(union))
        covered |= set(cluster)
        if cluster not in out:
            out.append(cluster)
    return out, fallbacks


def optimize_clusters(
    H: LocalHamiltonian,
    k: int,
    keyword: str = NON_OVERLAPPING,
    opts: SolverOptions | None = None,
    source: str = RELAXED,
) -> ClusterSelection:
    """Greedy ``k``-site clusters ranked by singleton-layout mutual information."""
    d = H.num_clusters
    if keyword not in (OVERLAPPING, NON_OVERLAPPING):
        raise InvalidInputError(f"unknown keyword {keyword!r}")
    if not 1 <= k <= d:
        raise InvalidInputError("k must lie in [1, d]")
    if keyword == NON_OVERLAPPING and d % k:
        raise InvalidInputError("d must be divisible by k for non-overlapping clusters")
    if k == 1:
        return ClusterSelection([(i,) for i in range(d)], keyword, k, [], None, None)
    if k == d:
        return ClusterSelection([tuple(range(d))], keyword, k, [], None, None)
    layout = ClusterLayout.singletons(H)
    result = solve_relaxation(H, layout, "e12_pairwise", opts=opts, marginals=(source == RELAXED))
    table = correlation_table(H, layout, result, source)
    order = order_pairs(table)
    build = _non_overlapping if keyword == NON_OVERLAPPING else _overlapping
    clusters, fallbacks = build(d, k, order, table.values)
    return ClusterSelection(clusters, keyword, k, order, table, result.value, fallbacks)


@dataclass
class TraceStep:
    layout: ClusterLayout
    value: float
    marginals_digest: str | None
    wall_time: float
    merged: list[tuple[int, ...]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "groups": self.layout.site_groups(),
            "value": self.value,
            "marginals_digest": self.marginals_digest,
            "wall_time": self.wall_time,
            "merged": [list(m) for m in self.merged],
        }


@dataclass
class OptimizationTrace:
    iterations: list[TraceStep]
    parameters: dict
    truncated: bool = False

    @property
    def values(self) -> list[float]:
        return [s.value for s in self.iterations]

    def to_records(self) -> list[dict]:
        return [{"round": r, **s.to_json(), "parameters": self.parameters, "truncated": self.truncated}
                for r, s in enumerate(self.iterations)]


def _solve_step(H: LocalHamiltonian, layout: ClusterLayout, opts: SolverOptions | None, need_marginals: bool):
    t0 = time.perf_counter()
    result = solve_relaxation(H, layout, "e12_pairwise", opts=opts, marginals=need_marginals)
    return result, time.perf_counter() - t0


def successive_optimize(
    H: LocalHamiltonian,
    max_iter: int,
    k: int = 0,
    n: int = 1,
    opts: SolverOptions | None = None,
    initial: ClusterLayout | None = None,
) -> OptimizationTrace:
    """Repeatedly merge the ``n`` most correlated disjoint group pairs.

    Groups whose union exceeds ``k`` sites are skipped when ``k > 0``. The
    trace holds ``max_iter`` solves unless no admissible merge remains, in
    which case it stops early and is marked truncated.
    """
    if max_iter < 1 or n < 1 or k < 0:
        raise InvalidInputError("need max_iter >= 1, n >= 1, k >= 0")
    params = {"max": max_iter, "k": k, "n": n}
    layout = initial or ClusterLayout.singletons(H)
    steps: list[TraceStep] = []
    for _ in range(max_iter - 1):
        if layout.M < 2:
            break
        result, wall = _solve_step(H, layout, opts, True)
        table = pair_tables(result.marginals, CORRELATION)
        order = order_pairs(table)
        sizes = [len(layout.group_sites(g)) for g in range(layout.M)]
        if k > 0:
            order = [p for p in order if sizes[p[0]] + sizes[p[1]] <= k]
        chosen: list[tuple[int, int]] = []
        busy: set[int] = set()
        for p in order:
            if len(chosen) == n:
                break
            if not set(p) & busy:
                chosen.append(p)
                busy |= set(p)
        merged_groups = [layout.groups[a] + layout.groups[b] for a, b in chosen]
        step = TraceStep(layout, result.value, marginals_digest(result.marginals), wall,
                         [tuple(sorted(layout.group_sites(a) + layout.group_sites(b))) for a, b in chosen])
        steps.append(step)
        if not chosen:
            return OptimizationTrace(steps, params, truncated=True)
        kept = [layout.groups[g] for g in range(layout.M) if g not in busy]
        new_groups = sorted((tuple(sorted(g)) for g in merged_groups + kept), key=lambda g: g[0])
        layout = ClusterLayout(tuple(new_groups), layout.clusters)
    result, wall = _solve_step(H, layout, opts, False)
    steps.append(TraceStep(layout, result.value, None, wall))
    return OptimizationTrace(steps, params, truncated=len(steps) < max_iter)


def efficiency_factor(E0: float, E_uni: float, E_opt: float) -> float:
    """Fraction of the uniform-layout gap ``E0 - E_uni`` closed by the optimized layout."""
    if E0 < E_uni - 1e-9:
        raise InvalidInputError("uniform value exceeds the exact energy")
    den = E0 - E_uni
    if abs(den) < 1e-10:
        raise UndefinedResultError("uniform layout is already exact")
    return (E_opt - E_uni) / den
