"""Random walks with the degree-proportional start law, and their split
into maximal simple paths.

The transition kernel moves from ``v`` to a uniformly drawn neighbor, and the
start node is drawn with probability ``deg(v) / 2|E|``, which is stationary
for that kernel.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, GraphError

__all__ = [
    "SimplePath",
    "WalkDecomposition",
    "rnd_oriented_edge",
    "uniform_neighbor",
    "simple_path",
    "random_walk",
    "decompose_walk",
    "stream_segments",
    "transition_matrix",
]


@dataclass(frozen=True)
class SimplePath:
    """Loop-free node sequence; ``length`` counts edges."""

    nodes: tuple[int, ...]

    def __post_init__(self):
        if len(self.nodes) == 0:
            raise GraphError("a simple path has at least one node")

    @property
    def length(self) -> int:
        return len(self.nodes) - 1

    def __len__(self) -> int:
        return len(self.nodes)

    def check(self, graph: Graph) -> None:
        if len(set(self.nodes)) != len(self.nodes):
            raise GraphError(f"repeated node in {self.nodes}")
        for a, b in zip(self.nodes, self.nodes[1:]):
            if not graph.has_edge(a, b):
                raise GraphError(f"({a}, {b}) is not an edge")


@dataclass
class WalkDecomposition:
    """Maximal simple paths of a walk of length ``budget_L``.

    Only non-trivial segments (length >= 1) are stored; consecutive
    segments share an endpoint.
    """

    segments: list[SimplePath] = field(default_factory=list)
    budget_L: int = 0

    def walk(self) -> tuple[int, ...]:
        """Concatenate segments, dropping the repeated shared endpoints."""
        out = list(self.segments[0].nodes)
        for s in self.segments[1:]:
            out.extend(s.nodes[1:])
        return tuple(out)

    def check(self, graph: Graph) -> None:
        n = len(self.segments)
        if not 1 <= n <= self.budget_L:
            raise GraphError(f"{n} segments for budget {self.budget_L}")
        if sum(s.length for s in self.segments) != self.budget_L:
            raise GraphError("segment lengths do not sum to the budget")
        for s in self.segments:
            if s.length < 1:
                raise GraphError("trivial segment stored")
            s.check(graph)
        for a, b in zip(self.segments, self.segments[1:]):
            if a.nodes[-1] != b.nodes[0]:
                raise GraphError("consecutive segments do not share an endpoint")


def transition_matrix(graph: Graph) -> np.ndarray:
    """Dense kernel P; an isolated node maps to itself."""
    n = graph.num_nodes
    P = np.zeros((n, n))
    for v in range(n):
        nb = graph.neighbors(v)
        if nb:
            P[v, list(nb)] = 1.0 / len(nb)
        else:
            P[v, v] = 1.0
    return P


def rnd_oriented_edge(graph: Graph, rng: np.random.Generator) -> tuple[int, int]:
    """Draw ``(v, w)`` with ``v`` from the degree law and ``w`` a uniform
    neighbor of ``v``.

    Both stages are done at once by drawing a uniform adjacency slot, since
    ``deg(v)/2|E| * 1/deg(v) = 1/2|E|`` for every oriented edge.
    """
    if graph.num_edges == 0:
        raise GraphError("cannot draw an edge from an edgeless graph")
    k = int(rng.integers(2 * graph.num_edges))
    v = int(np.searchsorted(graph.indptr, k, side="right")) - 1
    return v, int(graph.indices[k])


def uniform_neighbor(graph: Graph, v: int, rng: np.random.Generator) -> int:
    nb = graph.neighbors(v)
    if not nb:
        # an isolated node has zero start mass, so a walk can never be here
        raise GraphError(f"node {v} has no neighbors")
    return nb[int(rng.integers(len(nb)))]


def simple_path(graph: Graph, start_edge: tuple[int, int], budget: int,
                rng: np.random.Generator) -> tuple[SimplePath, tuple[int, int] | None]:
    """Extend ``start_edge`` by random steps until a node repeats or the
    path holds ``budget`` edges.

    Returns the path and, when stopped by a repetition, the oriented edge
    ``(last node, repeated node)`` from which the walk continues.  When the
    budget runs out the second value is None, even if the next step would
    also have repeated a node.
    """
    u, v = start_edge
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if not graph.has_edge(u, v):
        raise GraphError(f"start edge ({u}, {v}) is not an edge")
    nodes, nbrs = [u, v], graph._nbrs
    seen = {u, v}
    integers = rng.integers
    while len(nodes) - 1 < budget:
        nb = nbrs[nodes[-1]]
        w = nb[int(integers(len(nb)))]
        if w in seen:
            return SimplePath(tuple(nodes)), (nodes[-1], w)
        nodes.append(w)
        seen.add(w)
    return SimplePath(tuple(nodes)), None


def stream_segments(graph: Graph, L: int, rng: np.random.Generator,
                    start_edge: tuple[int, int] | None = None) -> list[SimplePath]:
    """Segments of one length-``L`` walk, generated online by chaining
    ``simple_path`` calls on the remaining budget."""
    e = rnd_oriented_edge(graph, rng) if start_edge is None else start_edge
    remaining, out = L, []
    while remaining:
        c, e = simple_path(graph, e, remaining, rng)
        out.append(c)
        remaining -= c.length
    return out


def random_walk(graph: Graph, L: int, rng: np.random.Generator) -> list[int]:
    """Walk ``(v_0, ..., v_L)`` started from the degree law."""
    v, w = rnd_oriented_edge(graph, rng)
    walk = [v, w]
    for _ in range(L - 1):
        walk.append(uniform_neighbor(graph, walk[-1], rng))
    return walk


def decompose_walk(walk, graph: Graph) -> WalkDecomposition:
    """Cut a walk at its first-repetition stopping times.

    A segment grows from its first node until the next node already
    occurs in it; the next segment then starts from the segment's last
    node.  Offline counterpart of ``stream_segments``, kept for testing.
    """
    walk = [int(v) for v in walk]
    L = len(walk) - 1
    if L < 1:
        raise GraphError("walk must have at least one edge")
    for a, b in zip(walk, walk[1:]):
        if not graph.has_edge(a, b):
            raise GraphError(f"({a}, {b}) is not an edge")
    segments = []
    start = 0  # index of the segment's first node
    seen = {walk[0]}
    for k in range(1, L + 1):
        if walk[k] in seen:
            segments.append(SimplePath(tuple(walk[start:k])))
            start = k - 1
            seen = {walk[start]}
        seen.add(walk[k])
    segments.append(SimplePath(tuple(walk[start:])))
    return WalkDecomposition(segments, L)
