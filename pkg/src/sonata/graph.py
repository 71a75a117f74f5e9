"""Network topologies and doubly stochastic gossip matrices.

Provides connected Erdős–Rényi sampling, the Metropolis–Hastings weight
rule, and the two mixing statistics the convergence analysis depends on:
the spectral norm of the deviation from perfect averaging (rho) and the
sum of row maxima (w_mx).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMixing, NotConnected
from . import textio

CONNECTIVITY_RETRIES = 1000

# Power iteration settings for the spectral norm of W - J.
_POWER_TOL = 1e-12
_POWER_MAX_ITERS = 10_000


@dataclass(frozen=True)
class Graph:
    """Undirected connected graph over agents 0..m-1."""

    m: int
    edges: frozenset  # frozenset of frozenset({i, j}) pairs, no self loops

    @property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.m, dtype=int)
        for e in self.edges:
            i, j = tuple(e)
            deg[i] += 1
            deg[j] += 1
        return deg

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.m, self.m))
        for e in self.edges:
            i, j = tuple(e)
            A[i, j] = A[j, i] = 1.0
        return A

    def has_edge(self, i: int, j: int) -> bool:
        return frozenset((i, j)) in self.edges


@dataclass(frozen=True)
class GossipMatrix:
    """Doubly stochastic mixing matrix with cached mixing statistics."""

    W: np.ndarray
    rho: float
    w_mx: float

    @property
    def m(self) -> int:
        return self.W.shape[0]


def _connected(m: int, edges) -> bool:
    if m <= 1:
        return True
    adj = [[] for _ in range(m)]
    for e in edges:
        i, j = tuple(e)
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == m


def erdos_renyi(m: int, p: float, seed: int) -> Graph:
    """Sample a connected Erdős–Rényi graph, resampling up to a retry budget."""
    if m < 1:
        raise ValueError("need at least one agent")
    if not 0.0 <= p <= 1.0:
        raise ValueError("edge probability must be in [0, 1]")
    rng = np.random.default_rng(seed)
    for _ in range(CONNECTIVITY_RETRIES):
        mask = rng.random((m, m)) < p
        edges = frozenset(
            frozenset((i, j)) for i in range(m) for j in range(i + 1, m) if mask[i, j]
        )
        if _connected(m, edges):
            return Graph(m=m, edges=edges)
    raise NotConnected(
        f"no connected graph on m={m} nodes with p={p} after "
        f"{CONNECTIVITY_RETRIES} attempts"
    )


def complete_graph(m: int) -> Graph:
    edges = frozenset(
        frozenset((i, j)) for i in range(m) for j in range(i + 1, m)
    )
    return Graph(m=m, edges=edges)


def path_graph(m: int) -> Graph:
    edges = frozenset(frozenset((i, i + 1)) for i in range(m - 1))
    return Graph(m=m, edges=edges)


def metropolis_hastings(g: Graph) -> GossipMatrix:
    """Build the Metropolis–Hastings gossip matrix of a connected graph.

    Off-diagonal weights are 1/(1 + max(d_i, d_j)) on edges, zero otherwise;
    the diagonal absorbs the remainder so rows sum to one. The result is
    symmetric and doubly stochastic with strictly positive diagonal.
    """
    m = g.m
    deg = g.degrees
    W = np.zeros((m, m))
    for e in g.edges:
        i, j = tuple(e)
        w = 1.0 / (1.0 + max(deg[i], deg[j]))
        W[i, j] = W[j, i] = w
    np.fill_diagonal(W, 1.0 - W.sum(axis=1))
    return from_weights(W)


def from_weights(W: np.ndarray) -> GossipMatrix:
    """Wrap an explicit weight matrix, caching its mixing statistics."""
    W = np.asarray(W, dtype=float)
    return GossipMatrix(W=W, rho=mixing_spectral_norm(W), w_mx=w_mx(W))


def mixing_spectral_norm(W) -> float:
    """Spectral norm of W - (1/m) 1 1^T, via power iteration on B^T B.

    Iterating on the symmetrized product handles non-symmetric W too; for
    the symmetric matrices produced here it converges to the dominant
    squared singular value directly.
    """
    W = _unwrap(W)
    m = W.shape[0]
    B = W - np.full((m, m), 1.0 / m)
    # deterministic start, de-aligned from the all-ones direction
    v = np.cos(np.arange(1, m + 1, dtype=float))
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return 0.0
    v /= nv
    lam = 0.0
    for _ in range(_POWER_MAX_ITERS):
        w = B.T @ (B @ v)
        nw = np.linalg.norm(w)
        if nw <= 1e-300:
            return 0.0
        v_next = w / nw
        lam_next = float(v_next @ (B.T @ (B @ v_next)))
        if abs(lam_next - lam) <= _POWER_TOL * max(1.0, abs(lam_next)):
            lam = lam_next
            break
        lam, v = lam_next, v_next
    return math.sqrt(max(lam, 0.0))


def w_mx(W) -> float:
    """Sum over rows of the largest weight in each row."""
    W = _unwrap(W)
    return float(W.max(axis=1).sum())


def boost_mixing(gossip: GossipMatrix, rho_target: float) -> tuple[GossipMatrix, int]:
    """Raise W to the smallest power K with rho(W^K) <= rho_target.

    The powered matrix is materialized densely so the iteration core never
    needs to know about multiple communication rounds.
    """
    if not 0.0 < rho_target < 1.0:
        raise ValueError("rho_target must be in (0, 1)")
    rho = gossip.rho
    if rho >= 1.0:
        raise DegenerateMixing("cannot boost a non-contracting gossip matrix")
    if rho <= rho_target or rho == 0.0:
        # already at the target (rho = 0 is ideal mixing, K = 1 by convention)
        return gossip, 1
    K = math.ceil(math.log(rho_target) / math.log(rho))
    K = max(K, 1)
    WK = np.linalg.matrix_power(gossip.W, K)
    return from_weights(WK), K


def save_graph(path, g: Graph) -> None:
    textio.save_matrix(path, g.adjacency())


def load_graph(path) -> Graph:
    A = textio.load_matrix(path)
    m = A.shape[0]
    edges = frozenset(
        frozenset((i, j)) for i in range(m) for j in range(i + 1, m) if A[i, j] != 0.0
    )
    return Graph(m=m, edges=edges)


def save_gossip(path, gossip: GossipMatrix) -> None:
    textio.save_matrix(path, gossip.W)


def load_gossip(path) -> GossipMatrix:
    return from_weights(textio.load_matrix(path))


def _unwrap(W) -> np.ndarray:
    if isinstance(W, GossipMatrix):
        return W.W
    return np.asarray(W, dtype=float)
