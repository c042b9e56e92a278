"""Undirected simple graphs in compressed adjacency form.

Nodes are dense 0-based indices.  When a graph is read from a file the
original ids are kept in ``Graph.node_ids`` so results can be joined back.
"""
from __future__ import annotations

import bisect
from collections.abc import Iterable, Sequence
from typing import TextIO

import numpy as np

__all__ = [
    "Graph",
    "EdgeWeights",
    "GraphError",
    "from_edges",
    "load_edge_list",
    "load_weighted_edge_list",
    "write_edge_list",
    "sample_sbm",
    "sbm_blocks",
    "path_graph",
    "grid_graph",
    "star_graph",
    "complete_graph",
    "node_distribution",
    "make_rng",
]


class GraphError(ValueError):
    """Raised on malformed graph input."""


def make_rng(seed: int | None) -> np.random.Generator:
    """Seeded generator on the counter-based Philox bit generator."""
    return np.random.Generator(np.random.Philox(seed))


class Graph:
    """Immutable undirected graph without self-loops.

    Neighbor lists are sorted ascending and stored CSR-style in
    ``indptr``/``indices``.
    """

    __slots__ = ("num_nodes", "num_edges", "indptr", "indices", "degrees",
                 "node_ids", "_nbrs", "_edges", "_edge_index")

    def __init__(self, num_nodes: int, indptr: np.ndarray, indices: np.ndarray,
                 node_ids: np.ndarray | None = None):
        self.num_nodes = int(num_nodes)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.indptr.flags.writeable = False
        self.indices.flags.writeable = False
        self.degrees = np.diff(self.indptr)
        self.degrees.flags.writeable = False
        self.num_edges = int(self.indices.size // 2)
        if node_ids is None:
            node_ids = np.arange(self.num_nodes, dtype=np.int64)
        self.node_ids = np.asarray(node_ids)
        self.node_ids.flags.writeable = False
        # plain tuples: indexing them is much faster than numpy scalars
        # inside the walk loops
        ind = self.indices.tolist()
        ptr = self.indptr.tolist()
        self._nbrs = tuple(tuple(ind[ptr[v]:ptr[v + 1]]) for v in range(self.num_nodes))
        self._edges = None
        self._edge_index = None

    def __repr__(self) -> str:
        return f"Graph(num_nodes={self.num_nodes}, num_edges={self.num_edges})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.num_nodes == other.num_nodes
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    __hash__ = None

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._nbrs[v]

    def degree(self, v: int) -> int:
        return len(self._nbrs[v])

    def has_edge(self, u: int, v: int) -> bool:
        nb = self._nbrs[u]
        i = bisect.bisect_left(nb, v)
        return i < len(nb) and nb[i] == v

    def edges(self) -> np.ndarray:
        """Edges as an (m, 2) array of ``u < v`` pairs in lexicographic order.

        This order is the canonical edge indexing shared by edge weights and
        the incidence operator.
        """
        if self._edges is None:
            rows = np.repeat(np.arange(self.num_nodes, dtype=np.int64), self.degrees)
            mask = rows < self.indices
            e = np.column_stack([rows[mask], self.indices[mask]])
            e.flags.writeable = False
            self._edges = e
        return self._edges

    def edge_index(self, u: int, v: int) -> int:
        if self._edge_index is None:
            self._edge_index = {(int(a), int(b)): k for k, (a, b) in enumerate(self.edges().tolist())}
        if u > v:
            u, v = v, u
        try:
            return self._edge_index[(u, v)]
        except KeyError:
            raise GraphError(f"({u}, {v}) is not an edge") from None

    def edge_ids(self, u, v) -> np.ndarray:
        """Vectorized ``edge_index`` over arrays of endpoints."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        e = self.edges()
        n = self.num_nodes
        keys = e[:, 0] * n + e[:, 1]
        q = np.minimum(u, v) * n + np.maximum(u, v)
        pos = np.searchsorted(keys, q)
        pos = np.minimum(pos, max(len(keys) - 1, 0))
        if len(keys) == 0 or np.any(keys[pos] != q):
            raise GraphError("query contains a non-edge")
        return pos

    def laplacian(self, weights: "EdgeWeights | None" = None):
        """Combinatorial Laplacian as a scipy CSR matrix."""
        import scipy.sparse as sp

        e = self.edges()
        w = np.ones(len(e)) if weights is None else weights.values
        n = self.num_nodes
        A = sp.coo_matrix((np.concatenate([w, w]),
                           (np.concatenate([e[:, 0], e[:, 1]]), np.concatenate([e[:, 1], e[:, 0]]))),
                          shape=(n, n)).tocsr()
        deg = np.asarray(A.sum(axis=1)).ravel()
        return (sp.diags(deg) - A).tocsr()

    def check(self) -> None:
        """Full scan of the structural invariants; raises GraphError."""
        if int(self.degrees.sum()) != 2 * self.num_edges:
            raise GraphError("degree sum differs from twice the edge count")
        for v, nb in enumerate(self._nbrs):
            if v in nb:
                raise GraphError(f"self-loop at node {v}")
            if any(a >= b for a, b in zip(nb, nb[1:])):
                raise GraphError(f"neighbor list of {v} not strictly increasing")
            for w in nb:
                if not self.has_edge(w, v):
                    raise GraphError(f"asymmetric adjacency between {v} and {w}")

    def induced_subgraph(self, nodes: Sequence[int]) -> tuple["Graph", np.ndarray]:
        """Subgraph induced by ``nodes``.

        Returns the subgraph (reindexed 0..k-1 in the order given) and the
        array mapping new index -> old index.
        """
        nodes = np.asarray(nodes, dtype=np.int64)
        local = -np.ones(self.num_nodes, dtype=np.int64)
        local[nodes] = np.arange(nodes.size)
        e = self.edges()
        keep = (local[e[:, 0]] >= 0) & (local[e[:, 1]] >= 0)
        sub = from_edges(nodes.size, local[e[keep]], node_ids=self.node_ids[nodes])
        return sub, nodes


class EdgeWeights:
    """Positive weight per undirected edge, aligned with ``Graph.edges()``."""

    __slots__ = ("graph", "values")

    def __init__(self, graph: Graph, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (graph.num_edges,):
            raise GraphError(f"expected {graph.num_edges} weights, got shape {values.shape}")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise GraphError("edge weights must be finite and strictly positive")
        values = values.copy()
        values.flags.writeable = False
        self.graph = graph
        self.values = values

    @classmethod
    def uniform(cls, graph: Graph, value: float = 1.0) -> "EdgeWeights":
        return cls(graph, np.full(graph.num_edges, float(value)))

    def __getitem__(self, edge: tuple[int, int]) -> float:
        return float(self.values[self.graph.edge_index(*edge)])

    def along(self, nodes: Sequence[int]) -> np.ndarray:
        """Weights of consecutive edges of a node sequence."""
        nodes = np.asarray(nodes, dtype=np.int64)
        return self.values[self.graph.edge_ids(nodes[:-1], nodes[1:])]


def from_edges(num_nodes: int, edges, node_ids=None) -> Graph:
    """Build a graph from an iterable of (u, v) index pairs.

    Duplicates and both orientations collapse to a single edge.
    """
    e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    e = e.reshape(-1, 2)
    if e.size and (e.min() < 0 or e.max() >= num_nodes):
        raise GraphError("edge endpoint out of range")
    if np.any(e[:, 0] == e[:, 1]):
        k = int(np.flatnonzero(e[:, 0] == e[:, 1])[0])
        raise GraphError(f"self-loop on node {e[k, 0]}")
    e = np.sort(e, axis=1)
    e = np.unique(e, axis=0)
    src = np.concatenate([e[:, 0], e[:, 1]])
    dst = np.concatenate([e[:, 1], e[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=num_nodes), out=indptr[1:])
    return Graph(num_nodes, indptr, dst, node_ids=node_ids)


def _read_pairs(stream: TextIO, with_weight: bool):
    ncols = 3 if with_weight else 2
    for lineno, line in enumerate(stream, 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        tok = s.split()
        if len(tok) < ncols:
            raise GraphError(f"line {lineno}: expected {ncols} fields, got {len(tok)}: {s!r}")
        try:
            u, v = int(tok[0]), int(tok[1])
        except ValueError:
            raise GraphError(f"line {lineno}: non-integer node id: {s!r}") from None
        if u == v:
            raise GraphError(f"line {lineno}: self-loop {u} {v}")
        if with_weight:
            try:
                w = float(tok[2])
            except ValueError:
                raise GraphError(f"line {lineno}: bad weight: {s!r}") from None
            yield u, v, w
        else:
            yield u, v


def _remap(pairs: list[tuple[int, int]]):
    ids = sorted({a for p in pairs for a in p})
    lookup = {nid: k for k, nid in enumerate(ids)}
    edges = [(lookup[u], lookup[v]) for u, v in pairs]
    return np.asarray(ids, dtype=np.int64), edges


def load_edge_list(stream: TextIO | Iterable[str]) -> Graph:
    """Read a SNAP-style edge list (``u v`` per line, ``#`` comments).

    Original ids are remapped to dense indices in increasing id order.
    """
    pairs = list(_read_pairs(stream, with_weight=False))
    if not pairs:
        raise GraphError("edge list contains no edges")
    ids, edges = _remap(pairs)
    return from_edges(len(ids), edges, node_ids=ids)


def load_weighted_edge_list(stream: TextIO | Iterable[str]) -> tuple[Graph, EdgeWeights]:
    """Read ``u v w`` lines.  Repeated edges must carry the same weight."""
    triples = list(_read_pairs(stream, with_weight=True))
    if not triples:
        raise GraphError("edge list contains no edges")
    ids, edges = _remap([(u, v) for u, v, _ in triples])
    g = from_edges(len(ids), edges, node_ids=ids)
    w = np.full(g.num_edges, np.nan)
    for (a, b), (_, _, wt) in zip(edges, triples):
        k = g.edge_index(a, b)
        if not np.isnan(w[k]) and w[k] != wt:
            raise GraphError(f"conflicting weights for edge ({ids[a]}, {ids[b]})")
        w[k] = wt
    return g, EdgeWeights(g, w)


def write_edge_list(graph: Graph, stream: TextIO) -> None:
    """Write edges with original node ids, one ``u v`` per line.

    Isolated nodes cannot be represented in this format and are dropped.
    """
    ids = graph.node_ids
    for u, v in graph.edges().tolist():
        stream.write(f"{ids[u]} {ids[v]}\n")


def sample_sbm(block_sizes: Sequence[int], p_in: float, p_out: float, seed: int) -> Graph:
    """Stochastic block model with one in-block and one cross-block probability.

    Every unordered node pair is an independent Bernoulli draw.  Nodes are
    numbered block by block.
    """
    if not block_sizes:
        raise GraphError("block_sizes must be non-empty")
    if any(int(b) < 0 for b in block_sizes):
        raise GraphError("block sizes must be nonnegative")
    for name, p in (("p_in", p_in), ("p_out", p_out)):
        if not 0.0 <= p <= 1.0:
            raise GraphError(f"{name}={p} outside [0, 1]")
    rng = make_rng(seed)
    sizes = [int(b) for b in block_sizes]
    starts = np.concatenate([[0], np.cumsum(sizes)])
    n = int(starts[-1])
    chunks = []
    for a in range(len(sizes)):
        for b in range(a, len(sizes)):
            p = p_in if a == b else p_out
            draw = rng.random((sizes[a], sizes[b])) < p
            if a == b:
                draw = np.triu(draw, k=1)
            i, j = np.nonzero(draw)
            chunks.append(np.column_stack([i + starts[a], j + starts[b]]))
    edges = np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)
    return from_edges(n, edges)


def sbm_blocks(block_sizes: Sequence[int]) -> np.ndarray:
    """Block label of every node, matching ``sample_sbm`` numbering."""
    return np.repeat(np.arange(len(block_sizes)), block_sizes)


def path_graph(n: int) -> Graph:
    return from_edges(n, [(i, i + 1) for i in range(n - 1)])


def grid_graph(rows: int, cols: int) -> Graph:
    idx = np.arange(rows * cols).reshape(rows, cols)
    h = np.column_stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()])
    v = np.column_stack([idx[:-1, :].ravel(), idx[1:, :].ravel()])
    return from_edges(rows * cols, np.concatenate([h, v]))


def star_graph(leaves: int) -> Graph:
    """Center is node 0."""
    return from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def complete_graph(n: int) -> Graph:
    return from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def node_distribution(graph: Graph) -> np.ndarray:
    """Degree-proportional node law ``deg(v) / (2|E|)``."""
    if graph.num_edges == 0:
        raise GraphError("node distribution undefined on an edgeless graph")
    return graph.degrees / (2.0 * graph.num_edges)
