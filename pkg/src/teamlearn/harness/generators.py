"""Random team instances: skills, initial appraisals and observation networks."""

from __future__ import annotations

import numpy as np

from ..core import ConfigError


def dirichlet_skills(n: int, rng: np.random.Generator, min_skill: float = 0.0) -> np.ndarray:
    """Uniform draw from the simplex, redrawn until every skill is at least ``min_skill``."""
    if min_skill * n >= 1.0:
        raise ConfigError(f"min_skill={min_skill} is infeasible for n={n}")
    while True:
        x = rng.dirichlet(np.ones(n))
        if x.min() >= min_skill:
            return x


def dirichlet_rows(n: int, rng: np.random.Generator, min_entry: float = 1e-3,
                   self_weight: float = 0.0) -> np.ndarray:
    """Entrywise-positive row-stochastic matrix with uniform-simplex rows.

    Each row is redrawn until its smallest entry is at least ``min_entry``.
    ``self_weight`` mixes in ``self_weight * I``.
    """
    if min_entry <= 0 or min_entry * n >= 1.0:
        raise ConfigError(f"min_entry must lie in (0, 1/n), got {min_entry}")
    A = np.empty((n, n))
    for i in range(n):
        while True:
            row = rng.dirichlet(np.ones(n))
            if row.min() >= min_entry:
                A[i] = row
                break
    return self_weight * np.eye(n) + (1.0 - self_weight) * A


def pattern_rows(pattern, rng: np.random.Generator) -> np.ndarray:
    """Row-stochastic matrix supported on ``pattern`` with uniform-simplex weights per row."""
    P = np.asarray(pattern) != 0
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ConfigError("sparsity pattern must be a square matrix")
    if not P.any(axis=1).all():
        raise ConfigError("every row of the sparsity pattern needs a nonzero entry")
    A = np.zeros(P.shape)
    for i in range(P.shape[0]):
        cols = np.flatnonzero(P[i])
        A[i, cols] = rng.dirichlet(np.ones(cols.size))
    return A


def consensus(x) -> np.ndarray:
    """Every member appraising the team at the true skills."""
    x = np.asarray(x, dtype=float)
    return np.tile(x, (x.size, 1))


def _weights(adj: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return pattern_rows(adj, rng)


def _cycle_block(nodes, adj, rng, edge_prob):
    nodes = list(rng.permutation(nodes))
    k = len(nodes)
    for a in range(k):
        adj[nodes[a], nodes[(a + 1) % k]] = True
        for b in range(k):
            if a != b and rng.random() < edge_prob:
                adj[nodes[a], nodes[b]] = True


def strongly_connected_observation(n: int, rng: np.random.Generator,
                                   edge_prob: float = 0.3) -> np.ndarray:
    """Random Hamiltonian cycle plus extra edges; no self-observation."""
    adj = np.zeros((n, n), dtype=bool)
    _cycle_block(range(n), adj, rng, edge_prob)
    return _weights(adj, rng)


def single_sink_observation(n: int, rng: np.random.Generator, sink_size: int = 2,
                            edge_prob: float = 0.3) -> np.ndarray:
    """Observation network whose only closed class is a small sink group.

    The sink group is strongly connected and observes nobody outside itself;
    every other member reaches it, so exactly the sink members are globally
    reachable and the network is not strongly connected.
    """
    if not 2 <= sink_size < n:
        raise ConfigError(f"sink_size must lie in [2, n), got {sink_size}")
    order = rng.permutation(n)
    sink, rest = order[:sink_size], order[sink_size:]
    adj = np.zeros((n, n), dtype=bool)
    _cycle_block(sink, adj, rng, edge_prob)
    for k, u in enumerate(rest):
        earlier = np.concatenate([sink, rest[:k]])
        adj[u, rng.choice(earlier)] = True
        for v in range(n):
            if v != u and rng.random() < edge_prob:
                adj[u, v] = True
    return _weights(adj, rng)


def disconnected_observation(n: int, rng: np.random.Generator,
                             edge_prob: float = 0.3) -> np.ndarray:
    """Two strongly connected groups that never observe each other."""
    if n < 4:
        raise ConfigError("two observation groups need n >= 4")
    order = rng.permutation(n)
    adj = np.zeros((n, n), dtype=bool)
    _cycle_block(order[: n // 2], adj, rng, edge_prob)
    _cycle_block(order[n // 2:], adj, rng, edge_prob)
    return _weights(adj, rng)


def uniform_simplex(n: int, rng: np.random.Generator, size=None) -> np.ndarray:
    shape = (n,) if size is None else tuple(np.atleast_1d(size)) + (n,)
    return rng.dirichlet(np.ones(n), size=None if size is None else shape[:-1])
