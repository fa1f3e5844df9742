"""Convergence and team-knowledge metrics on appraisal states and assignments."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np

from .core import DomainError


@dataclass(frozen=True)
class ComparativeAppraisalGraph:
    """Edge ``(i, j)`` whenever member ``i`` rates ``j`` at least as highly as itself."""

    n: int
    edges: frozenset

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        for i, j in self.edges:
            adj[i, j] = True
        return adj


def appraisal_consensus_spread(A):
    """Largest column range ``max_j (max_k a_kj - min_k a_kj)``; zero iff all rows agree."""
    spread = np.ptp(np.asarray(A, dtype=float), axis=-2).max(axis=-1)
    return float(spread) if np.ndim(spread) == 0 else spread


def comparative_graph(A) -> ComparativeAppraisalGraph:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    adj = A >= np.diag(A)[:, None]
    np.fill_diagonal(adj, False)
    return ComparativeAppraisalGraph(n, frozenset((int(i), int(j)) for i, j in zip(*np.nonzero(adj))))


def nontransitive_triad_count(G: ComparativeAppraisalGraph | np.ndarray) -> int:
    """Unordered triples holding a 2-path ``u -> v -> z`` without the closing edge ``u -> z``.

    Accepts a :class:`ComparativeAppraisalGraph` or a boolean adjacency matrix.
    """
    adj = G.adjacency() if isinstance(G, ComparativeAppraisalGraph) else np.asarray(G, dtype=bool)
    n = adj.shape[0]
    if n < 3:
        raise DomainError("triads need at least three members")
    adj = adj.copy()
    np.fill_diagonal(adj, False)
    # open2[u, v, z]: u -> v -> z with u -> z missing
    open2 = adj[:, :, None] & adj[None, :, :] & ~adj[:, None, :]
    hit = np.zeros_like(open2)
    for perm in permutations(range(3)):
        hit |= open2.transpose(perm)
    i, j, k = np.array(list(combinations(range(n), 3))).T
    return int(hit[i, j, k].sum())


def _interior(w):
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise DomainError("Lyapunov functions are defined on the open simplex only")
    return w


def lyapunov_manager(w, x) -> float:
    """``V(w) = -sum x_i log(w_i / x_i)``; nonnegative, zero only at ``w = x``."""
    w = _interior(w)
    x = np.asarray(x, dtype=float)
    return -(x * np.log(w / x)).sum(axis=-1)


def lyapunov_ratio(w, x) -> float:
    """``log(max_k x_k/w_k / min_k x_k/w_k)``; zero only at ``w = x``."""
    r = np.asarray(x, dtype=float) / _interior(w)
    return np.log(r.max(axis=-1) / r.min(axis=-1))


def max_increase(values) -> float:
    """Largest step-to-step increase of a sequence (0 if it never increases)."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return 0.0
    return float(max(0.0, np.diff(v).max()))
