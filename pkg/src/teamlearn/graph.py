"""Perron left eigenvectors and digraph connectivity of nonnegative matrices."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import gcd
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

from .core import DomainError, appraisal_matrix


class EigenvectorError(ArithmeticError):
    """The dominant left eigenvector is undefined or was not reached."""

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class ConnectivityReport:
    irreducible: bool
    primitive: bool
    strongly_connected: bool
    has_globally_reachable_node: bool
    globally_reachable_nodes: frozenset
    positive_diagonal: bool


def _edges(B) -> np.ndarray:
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {B.shape}")
    if np.any(B < 0):
        raise DomainError("connectivity is defined for nonnegative matrices only")
    return B > 0


def _period(adj: np.ndarray) -> int:
    """Period of a strongly connected digraph (gcd of its cycle lengths)."""
    n = adj.shape[0]
    level = np.full(n, -1)
    level[0] = 0
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(adj[u]):
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(v)
    g = 0
    for u, v in zip(*np.nonzero(adj)):
        g = gcd(g, int(abs(level[u] + 1 - level[v])))
    return g


def classify_connectivity(B) -> ConnectivityReport:
    """Connectivity of the digraph with an edge ``i -> j`` wherever ``B[i, j] > 0``.

    Globally reachable nodes are the members of the unique sink component of
    the condensation; with several sink components there are none.
    """
    adj = _edges(B)
    n = adj.shape[0]
    n_comp, labels = connected_components(adj, directed=True, connection="strong")
    strongly = n_comp == 1

    leaves = np.zeros(n_comp, dtype=bool)
    src, _ = np.nonzero(adj & (labels[:, None] != labels[None, :]))
    leaves[labels[src]] = True
    sinks = np.flatnonzero(~leaves)
    if len(sinks) == 1:
        reachable = frozenset(int(i) for i in np.flatnonzero(labels == sinks[0]))
    else:
        reachable = frozenset()

    primitive = strongly and _period(adj) == 1
    return ConnectivityReport(
        irreducible=strongly,
        primitive=primitive,
        strongly_connected=strongly,
        has_globally_reachable_node=bool(reachable),
        globally_reachable_nodes=reachable,
        positive_diagonal=bool(np.all(np.diag(adj)) and n > 0),
    )


def perron_left(A, warm_start=None, tol: float = 1e-12, max_iter: int = 100_000,
                method: str = "squaring", strict: bool = True):
    """Power iteration for the left Perron vector of (stacks of) row-stochastic matrices.

    Iterates on ``(A + I) / 2``, which shares the eigenvector of eigenvalue
    one but is aperiodic. With ``method="squaring"`` the iteration matrix is
    squared after every step, so step ``k`` applies ``2**k`` powers at once;
    ``method="plain"`` applies one power per step; ``method="direct"`` seeds
    the iteration with the solution of ``w (A - I + 1 1^T) = 1^T``, which is
    usually already within tolerance. No connectivity check is
    made here. With ``strict=False`` non-convergence is reported through
    the residual instead of raising.

    Returns
    -------
    w : ndarray
        Normalised vectors, shape ``A.shape[:-1]``.
    residual : ndarray
        ``max_j |(w A)_j - w_j|`` per matrix.
    iterations : int
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[-1]
    B = 0.5 * (A + np.eye(n))
    if warm_start is None:
        v = np.full(A.shape[:-1], 1.0 / n)
    else:
        v = np.broadcast_to(np.asarray(warm_start, dtype=float), A.shape[:-1]).copy()
        v /= v.sum(axis=-1, keepdims=True)

    if method not in ("squaring", "plain", "direct"):
        raise ValueError(f"unknown power-iteration method {method!r}")
    if method == "direct":
        K = np.swapaxes(A - np.eye(n), -1, -2) + 1.0
        try:
            v = np.linalg.solve(K, np.ones(A.shape[:-1])[..., None])[..., 0]
        except np.linalg.LinAlgError:
            pass
    batched = v.ndim > 1
    with np.errstate(over="ignore", invalid="ignore"):
        return _iterate(A, B, v, tol, max_iter, method, strict, batched)


def _iterate(A, B, v, tol, max_iter, method, strict, batched):
    for it in range(max_iter + 1):
        residual = np.abs((v[..., None, :] @ A)[..., 0, :] - v).max(axis=-1)
        done = residual <= tol
        if done.all():
            return v, residual, it
        if it == max_iter:
            break
        nxt = (v[..., None, :] @ B)[..., 0, :]
        nxt /= nxt.sum(axis=-1, keepdims=True)
        # converged members are frozen so results do not depend on batch composition
        v = np.where(done[..., None], v, nxt) if batched else nxt
        if method != "plain":
            # products of row-stochastic matrices stay row-stochastic to rounding
            B = B @ B
    if not strict:
        return v, residual, max_iter
    worst = float(np.max(residual))
    raise EigenvectorError(
        f"power iteration did not converge in {max_iter} iterations (residual {worst:.3g})",
        residual=worst,
    )


def left_dominant_eigenvector(A, tol: float = 1e-12, max_iter: int = 100_000,
                              warm_start=None, method: str = "squaring") -> np.ndarray:
    """Normalised positive ``w`` with ``w @ A = w`` for an irreducible row-stochastic ``A``."""
    A = appraisal_matrix(A)
    if not classify_connectivity(A).irreducible:
        raise EigenvectorError("eigenvector undefined: matrix is not irreducible")
    w, _, _ = perron_left(A, warm_start, tol, max_iter, method)
    if np.any(w <= 0):
        raise EigenvectorError("eigenvector undefined: Perron vector is not positive")
    return w


def workload_diffusion(A, steps: int) -> np.ndarray:
    """Spread a unit workload by ``q <- A.T q`` for ``steps`` rounds, starting uniform.

    Accepts stacks of matrices.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[-1]
    q = np.full(A.shape[:-1], 1.0 / n)
    At = np.swapaxes(A, -1, -2)
    for _ in range(steps):
        q = (At @ q[..., None])[..., 0]
    return q


def in_degree_assignment(A) -> np.ndarray:
    """Normalised in-degree centrality ``A.T 1 / (1.T A 1)``; accepts stacks."""
    A = np.asarray(A, dtype=float)
    col = A.sum(axis=-2)
    return col / col.sum(axis=-1, keepdims=True)
