"""Immutable sparse hypergraph structure and the operators derived from it.

A hypergraph is stored as the same incidence-pair set in two compressed
forms: node-major (rows are nodes, columns hyperedges) and edge-major (the
transpose). All stored index runs are ascending, so iteration order and
floating-point reductions are deterministic.

Hyperedge weights are uniform throughout; the only weighting hook is the
``weighting`` argument of :func:`clique_expansion`.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import HypergraphError
from .kernels import CsrMatrix


class Hypergraph:
    """Sparse incidence structure with degree statistics. Immutable."""

    __slots__ = ("num_nodes", "num_edges", "by_node", "by_edge",
                 "node_degrees", "edge_sizes", "_cache", "_cache_lock")

    def __init__(self, by_node: CsrMatrix, by_edge: CsrMatrix):
        self.num_nodes, self.num_edges = by_node.shape
        if by_edge.shape != (self.num_edges, self.num_nodes):
            raise HypergraphError(
                f"edge-major shape {by_edge.shape} does not transpose "
                f"node-major {by_node.shape}"
            )
        self.by_node = by_node
        self.by_edge = by_edge
        self.node_degrees = np.diff(by_node.indptr).astype(np.int64)
        self.edge_sizes = np.diff(by_edge.indptr).astype(np.int64)
        for arr in (self.node_degrees, self.edge_sizes):
            arr.setflags(write=False)
        # derived-operator cache; insert-once under lock, reads lock-free
        self._cache = {}
        self._cache_lock = threading.Lock()

    @property
    def num_pairs(self) -> int:
        return self.by_node.nnz

    def members(self, e: int) -> np.ndarray:
        """Node ids of hyperedge ``e``, ascending."""
        return self.by_edge.row_slice(e)[0]

    def incident_edges(self, v: int) -> np.ndarray:
        """Hyperedge ids containing node ``v``, ascending."""
        return self.by_node.row_slice(v)[0]

    def edge_list(self) -> list[list[int]]:
        return [self.members(e).tolist() for e in range(self.num_edges)]

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """All incident (node, edge) pairs in node-major order."""
        nodes = np.repeat(
            np.arange(self.num_nodes, dtype=np.int64), self.node_degrees
        )
        return nodes, self.by_node.indices

    def digest(self) -> str:
        return self.by_node.digest()

    def cached(self, key, build):
        """Insert-once cache for operators derived from this structure."""
        try:
            return self._cache[key]
        except KeyError:
            pass
        with self._cache_lock:
            if key not in self._cache:
                self._cache[key] = build()
            return self._cache[key]

    def validate(self) -> None:
        """Audit the structural invariants; raises on any violation."""
        nodes, edges = self.pairs()
        if len(nodes):
            if nodes.min() < 0 or nodes.max() >= self.num_nodes:
                raise HypergraphError("node id out of range")
            if edges.min() < 0 or edges.max() >= self.num_edges:
                raise HypergraphError("edge id out of range")
        seen = set(zip(nodes.tolist(), edges.tolist()))
        if len(seen) != len(nodes):
            raise HypergraphError("duplicate incidence pair")
        t_nodes = np.repeat(
            np.arange(self.num_edges, dtype=np.int64), self.edge_sizes
        )
        if set(zip(self.by_edge.indices.tolist(), t_nodes.tolist())) != seen:
            raise HypergraphError("node-major and edge-major forms disagree")
        if np.any(self.edge_sizes < 1):
            raise HypergraphError("empty hyperedge")

    def __repr__(self):
        return (
            f"Hypergraph(nodes={self.num_nodes}, edges={self.num_edges},"
            f" pairs={self.num_pairs})"
        )


def build_hypergraph(edge_list, num_nodes: int) -> Hypergraph:
    """Build from a list of hyperedges (lists of node ids).

    Node ids repeated inside one hyperedge are deduplicated; identical
    hyperedges are kept as a multiset. Every hyperedge must be nonempty and
    every id in ``[0, num_nodes)``.
    """
    num_nodes = int(num_nodes)
    rows, cols = [], []
    for e, members in enumerate(edge_list):
        members = sorted(set(int(v) for v in members))
        if not members:
            raise HypergraphError(f"hyperedge {e} is empty")
        for v in members:
            if not 0 <= v < num_nodes:
                raise HypergraphError(
                    f"node id {v} in hyperedge {e} outside [0, {num_nodes})"
                )
        cols.extend(members)
        rows.extend([e] * len(members))
    num_edges = len(list(edge_list))
    by_edge = CsrMatrix.from_coo(
        rows, cols, np.ones(len(rows)), (num_edges, num_nodes)
    )
    by_node = by_edge.transpose()
    return Hypergraph(by_node, by_edge)


def from_pairs(node_ids, edge_ids, num_nodes: int, num_edges: int) -> Hypergraph:
    """Build from incidence pairs (already deduplicated)."""
    by_node = CsrMatrix.from_coo(
        node_ids, edge_ids, np.ones(len(node_ids)), (num_nodes, num_edges)
    )
    return Hypergraph(by_node, by_node.transpose())


@dataclass(frozen=True)
class WeightedGraph:
    """Symmetric weighted graph; both (u,v) and (v,u) are stored."""

    num_nodes: int
    edges: list = field(default_factory=list)  # (u, v, weight), lex-sorted

    def validate(self):
        seen = {(u, v): w for u, v, w in self.edges}
        for (u, v), w in seen.items():
            if w <= 0:
                raise HypergraphError(f"non-positive weight on ({u}, {v})")
            if seen.get((v, u)) != w:
                raise HypergraphError(f"asymmetric edge ({u}, {v})")


def clique_expansion(hg: Hypergraph, weighting: str = "unit") -> WeightedGraph:
    """Pairwise graph over each hyperedge; repeated pairs accumulate weight.

    ``unit`` adds 1 per pair occurrence, ``inverse_size`` adds 1/|e|.
    Singleton hyperedges contribute nothing.
    """
    if weighting not in ("unit", "inverse_size"):
        raise HypergraphError(f"unknown weighting {weighting!r}")
    acc: dict[tuple[int, int], float] = {}
    for e in range(hg.num_edges):
        members = hg.members(e)
        k = len(members)
        if k < 2:
            continue
        w = 1.0 if weighting == "unit" else 1.0 / k
        for i in range(k):
            for j in range(i + 1, k):
                key = (int(members[i]), int(members[j]))
                acc[key] = acc.get(key, 0.0) + w
    edges = []
    for (u, v), w in acc.items():
        edges.append((u, v, w))
        edges.append((v, u, w))
    edges.sort()
    return WeightedGraph(hg.num_nodes, edges)


class PropagationOperator:
    """Square node-to-node operator: ``symmetric`` or ``row_stochastic``."""

    __slots__ = ("matrix", "normalization")

    def __init__(self, matrix: CsrMatrix, normalization: str):
        if matrix.shape[0] != matrix.shape[1]:
            raise HypergraphError(f"operator must be square, got {matrix.shape}")
        self.matrix = matrix
        self.normalization = normalization

    @property
    def shape(self):
        return self.matrix.shape


def _incidence_products(hg: Hypergraph):
    """COO triples of H D_e^{-1} H^T, one run of entries per hyperedge.

    For any unordered pair (i, j) the contributing hyperedges are visited in
    the same ascending order on both sides, so coalescing sums identical
    value sequences and exact output symmetry is guaranteed.
    """
    total = int(np.sum(hg.edge_sizes.astype(np.int64) ** 2))
    rows = np.empty(total, dtype=np.int64)
    cols = np.empty(total, dtype=np.int64)
    vals = np.empty(total, dtype=np.float64)
    pos = 0
    for e in range(hg.num_edges):
        members = hg.members(e)
        k = len(members)
        block = slice(pos, pos + k * k)
        rows[block] = np.repeat(members, k)
        cols[block] = np.tile(members, k)
        vals[block] = 1.0 / k
        pos += k * k
    return rows, cols, vals


def propagation_operator(
    hg: Hypergraph, normalization: str = "symmetric", self_loop_alpha: float = 0.0
) -> PropagationOperator:
    """Degree-normalized propagation matrix blended with the identity.

    symmetric:       (1-a) * D_v^{-1/2} H D_e^{-1} H^T D_v^{-1/2} + a * I
    row_stochastic:  (1-a) * rownorm(H D_e^{-1} H^T) + a * I

    Zero-degree nodes follow the pseudo-inverse convention: their rows (and
    columns, in symmetric mode) stay zero; in row-stochastic mode they get
    no self-loop either, so nonzero rows always sum to one.
    """
    if normalization not in ("symmetric", "row_stochastic"):
        raise HypergraphError(f"unknown normalization {normalization!r}")
    alpha = float(self_loop_alpha)
    if not 0.0 <= alpha <= 1.0:
        raise HypergraphError(f"self_loop_alpha must be in [0, 1], got {alpha}")
    rows, cols, vals = _incidence_products(hg)
    n = hg.num_nodes
    deg = hg.node_degrees.astype(np.float64)
    if normalization == "symmetric":
        inv_sqrt = np.zeros(n)
        nz = deg > 0
        inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
        # parenthesized so (i,j) and (j,i) see bitwise-identical factors,
        # which makes the coalesced matrix equal its transpose exactly
        vals = (vals * (1.0 - alpha)) * (inv_sqrt[rows] * inv_sqrt[cols])
        if alpha > 0.0:
            rows = np.concatenate([rows, np.arange(n, dtype=np.int64)])
            cols = np.concatenate([cols, np.arange(n, dtype=np.int64)])
            vals = np.concatenate([vals, np.full(n, alpha)])
    else:
        # row sums of H D_e^{-1} H^T: sum over incident edges of |e| / |e| = deg
        inv_deg = np.zeros(n)
        nz = deg > 0
        inv_deg[nz] = 1.0 / deg[nz]
        vals = vals * (1.0 - alpha) * inv_deg[rows]
        if alpha > 0.0:
            keep = np.flatnonzero(nz).astype(np.int64)
            rows = np.concatenate([rows, keep])
            cols = np.concatenate([cols, keep])
            vals = np.concatenate([vals, np.full(len(keep), alpha)])
    matrix = CsrMatrix.from_coo(rows, cols, vals, (n, n))
    return PropagationOperator(matrix, normalization)


def permute_nodes(hg: Hypergraph, perm) -> Hypergraph:
    """Relabel nodes: incident pair (v, e) maps to (perm[v], e)."""
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (hg.num_nodes,) or len(np.unique(perm)) != hg.num_nodes or (
        len(perm) and (perm.min() < 0 or perm.max() >= hg.num_nodes)
    ):
        raise HypergraphError("perm is not a bijection on node ids")
    nodes, edges = hg.pairs()
    return from_pairs(perm[nodes], edges, hg.num_nodes, hg.num_edges)


class StarExpansion:
    """Bipartite view of the incidence: nodes one side, hyperedges the other."""

    def __init__(self, hg: Hypergraph):
        self._hg = hg

    def edges_of_node(self, v: int) -> np.ndarray:
        return self._hg.incident_edges(v)

    def nodes_of_edge(self, e: int) -> np.ndarray:
        return self._hg.members(e)

    def iter_node_side(self):
        for v in range(self._hg.num_nodes):
            yield v, self._hg.incident_edges(v)

    def iter_edge_side(self):
        for e in range(self._hg.num_edges):
            yield e, self._hg.members(e)


def star_expansion(hg: Hypergraph) -> StarExpansion:
    return StarExpansion(hg)
