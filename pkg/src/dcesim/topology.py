"""Network graphs and Metropolis combination weights.

A node is always its own neighbour: adjacency matrices carry a true diagonal
and neighbourhood sizes count the node itself.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["Topology", "CombinationMatrix", "generate_topology",
           "metropolis_weights"]

ROW_SUM_TOL = 1e-12


def _connected(adjacency):
    """Breadth-first reachability of every node from node 0."""
    n = adjacency.shape[0]
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        k = stack.pop()
        for l in np.flatnonzero(adjacency[k]):
            if not seen[l]:
                seen[l] = True
                stack.append(int(l))
    return bool(seen.all())


@dataclass(frozen=True)
class Topology:
    """Undirected connectivity graph with self-loops on every node."""

    n_nodes: int
    adjacency: np.ndarray

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        object.__setattr__(self, "adjacency", adj)
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be >= 1")
        if adj.shape != (self.n_nodes, self.n_nodes):
            raise ValueError("adjacency shape does not match n_nodes")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if not adj.diagonal().all():
            raise ValueError("every node must be its own neighbour")
        if not _connected(adj):
            raise ValueError("graph must be connected")

    def neighbors(self, k):
        """Indices of the neighbourhood of node k, including k itself."""
        return np.flatnonzero(self.adjacency[k])

    def degree(self, k):
        """Neighbourhood size |N_k|, counting node k itself."""
        return int(self.adjacency[k].sum())

    def to_adjacency_lines(self):
        """Plain text adjacency list, one 'node: neighbours' line per node."""
        lines = []
        for k in range(self.n_nodes):
            others = [str(l) for l in self.neighbors(k) if l != k]
            lines.append(f"{k}: {' '.join(others)}".rstrip())
        return "\n".join(lines)

    @classmethod
    def from_adjacency_lines(cls, text):
        """Parse the adjacency-list block written by to_adjacency_lines."""
        entries = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            head, _, rest = line.partition(":")
            try:
                node = int(head)
                links = [int(tok) for tok in rest.split()]
            except ValueError as exc:
                raise ValueError(f"bad adjacency line: {line!r}") from exc
            entries[node] = links
        if not entries:
            raise ValueError("empty adjacency block")
        n = max(entries) + 1
        adj = np.eye(n, dtype=bool)
        for node, links in entries.items():
            for l in links:
                if not 0 <= l < n:
                    raise ValueError(f"neighbour index {l} out of range")
                adj[node, l] = True
                adj[l, node] = True
        return cls(n_nodes=n, adjacency=adj)


@dataclass(frozen=True)
class CombinationMatrix:
    """Row-stochastic nonnegative combination weights."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weights must be a square matrix")
        if (w < -ROW_SUM_TOL).any() or (w > 1.0 + ROW_SUM_TOL).any():
            raise ValueError("weights must lie in [0, 1]")
        row_sums = w.sum(axis=1)
        if np.abs(row_sums - 1.0).max() > ROW_SUM_TOL:
            raise ValueError("each row must sum to 1")

    def row(self, k):
        return self.weights[k]


def generate_topology(n_nodes, link_probability, rng):
    """Random partially connected graph, repaired to connectivity.

    Each unordered off-diagonal pair is linked independently with
    link_probability (pairs drawn in lexicographic order).  Disconnected
    results are repaired by bridging every remaining component, ordered by
    smallest member index, to the first component via the two components'
    smallest-index nodes -- the minimum number of added edges, deterministic
    given the rng stream.
    """
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    if not 0.0 < link_probability <= 1.0:
        raise ValueError("link_probability must be in (0, 1]")
    adj = np.eye(n_nodes, dtype=bool)
    n_pairs = n_nodes * (n_nodes - 1) // 2
    if n_pairs:
        draws = rng.random(n_pairs) < link_probability
        idx = 0
        for k in range(n_nodes):
            for l in range(k + 1, n_nodes):
                if draws[idx]:
                    adj[k, l] = True
                    adj[l, k] = True
                idx += 1
    comps = _components(adj)
    if len(comps) > 1:
        comps.sort(key=min)
        anchor = min(comps[0])
        for comp in comps[1:]:
            other = min(comp)
            adj[anchor, other] = True
            adj[other, anchor] = True
    return Topology(n_nodes=n_nodes, adjacency=adj)


def _components(adj):
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            k = stack.pop()
            comp.append(k)
            for l in np.flatnonzero(adj[k]):
                if not seen[l]:
                    seen[l] = True
                    stack.append(int(l))
        comps.append(comp)
    return comps


def metropolis_weights(topology):
    """Metropolis combination weights for a topology.

    Linked k != l get 1/max(|N_k|, |N_l|) with neighbourhood sizes counting
    the node itself; the self-weight absorbs the remainder so each row sums
    to one; non-linked pairs get zero.
    """
    n = topology.n_nodes
    adj = topology.adjacency
    deg = adj.sum(axis=1).astype(np.int64)
    w = np.zeros((n, n), dtype=float)
    for k in range(n):
        acc = 0.0
        for l in range(n):
            if l != k and adj[k, l]:
                w[k, l] = 1.0 / max(deg[k], deg[l])
                acc += w[k, l]
        w[k, k] = 1.0 - acc
    return CombinationMatrix(weights=w)
