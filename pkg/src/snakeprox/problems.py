"""Problem drivers: graph trend filtering, graph inpainting and Laplacian
systems.

Each problem exposes the graph its walks run on (``walk_graph``), the
regularizer on that graph, the smooth part ``smooth``/``gradient``, an
initial iterate ``x0`` and ``report``, the quantity written to traces.
Reported values are always the unscaled objectives; the solver applies
the ``1/|E|`` scaling itself.
"""
from __future__ import annotations

import csv
import math
import warnings
from typing import TextIO

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .graph import EdgeWeights, Graph, make_rng
from .regularizers import Kind, Regularizer, evaluate

__all__ = [
    "TrendFiltering",
    "Inpainting",
    "LaplacianSystem",
    "calibrate_lambda",
    "gaussian_signal",
    "sbm_signal",
    "read_signal_csv",
    "read_mask_csv",
    "write_signal_csv",
]


def calibrate_lambda(graph: Graph) -> float:
    """Penalty level balancing the data and TV terms for independent
    standard Gaussian ``x`` and ``y``.

    ``E[1/2 ||x - y||^2] = |V|`` and ``E[|x_i - x_j|] = 2 / sqrt(pi)``, so
    ``lambda = |V| sqrt(pi) / (2 |E|)``.
    """
    if graph.num_edges < 1:
        raise ValueError("graph has no edges")
    return graph.num_nodes * math.sqrt(math.pi) / (2.0 * graph.num_edges)


def gaussian_signal(n: int, seed: int) -> np.ndarray:
    return make_rng(seed).standard_normal(n)


def sbm_signal(blocks: np.ndarray, levels, sigma: float, seed: int) -> np.ndarray:
    """Piecewise-constant signal ``levels[block(i)] + sigma * noise``."""
    levels = np.asarray(levels, dtype=float)
    blocks = np.asarray(blocks)
    return levels[blocks] + sigma * make_rng(seed).standard_normal(blocks.size)


def _check_signal(x, n: int, what: str = "signal") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"{what} has shape {x.shape}, expected ({n},)")
    return x


class TrendFiltering:
    """``min 1/2 ||x - y||^2 + lam * sum_E w_e |x_i - x_j|``."""

    def __init__(self, graph: Graph, y, lam: float, weights: EdgeWeights | None = None):
        if not lam > 0:
            raise ValueError("lambda must be positive")
        self.graph = graph
        self.y = _check_signal(y, graph.num_nodes).copy()
        self.lam = float(lam)
        kind = Kind.TV if weights is None else Kind.WEIGHTED_TV
        self.regularizer = Regularizer(kind, weights, scale=self.lam)

    @property
    def walk_graph(self) -> Graph:
        return self.graph

    @property
    def x0(self) -> np.ndarray:
        return self.y.copy()

    def gradient(self, x) -> np.ndarray:
        return x - self.y

    def smooth(self, x) -> float:
        d = x - self.y
        return 0.5 * float(d @ d)

    def objective(self, x) -> float:
        x = _check_signal(x, self.graph.num_nodes, "iterate")
        return self.smooth(x) + evaluate(self.regularizer, self.graph, x)

    report = objective

    def full_signal(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float)


# module-level aliases for the functional interface
def gtf_gradient(problem: TrendFiltering, x) -> np.ndarray:
    return problem.gradient(np.asarray(x, dtype=float))


def gtf_objective(problem: TrendFiltering, x) -> float:
    return problem.objective(x)


class Inpainting:
    """Harmonic extension of a signal observed on part of the nodes.

    The variables are the unobserved nodes.  Walks run on the subgraph
    they induce, with a unit Laplacian penalty there, and edges to
    observed nodes enter the smooth part
    ``sum (x_i - y_j)^2`` over unobserved ``i`` adjacent to observed ``j``.
    """

    def __init__(self, graph: Graph, y, observed):
        n = graph.num_nodes
        observed = np.asarray(observed, dtype=bool)
        if observed.shape != (n,):
            raise ValueError("observed mask does not match the graph")
        if not observed.any():
            raise ValueError("at least one node must be observed")
        self.graph = graph
        self.y = _check_signal(y, n).copy()
        self.observed = observed.copy()
        self.free = np.flatnonzero(~observed)
        self.sub, _ = graph.induced_subgraph(self.free)
        self.regularizer = Regularizer(Kind.LAPLACIAN)

        local = -np.ones(n, dtype=np.int64)
        local[self.free] = np.arange(self.free.size)
        e = graph.edges()
        cross_a = observed[e[:, 0]] != observed[e[:, 1]]
        ce = e[cross_a]
        # orient each cross edge as (free local index, observed node)
        free_end = np.where(observed[ce[:, 0]], ce[:, 1], ce[:, 0])
        obs_end = np.where(observed[ce[:, 0]], ce[:, 0], ce[:, 1])
        self._cross_free = local[free_end]
        self._cross_obs_val = self.y[obs_end]
        k = self.free.size
        self.obs_degree = np.bincount(self._cross_free, minlength=k).astype(float)
        self.obs_sum = np.bincount(self._cross_free, weights=self._cross_obs_val, minlength=k)
        both_obs = observed[e[:, 0]] & observed[e[:, 1]]
        d = self.y[e[both_obs, 0]] - self.y[e[both_obs, 1]]
        self._observed_energy = float(d @ d)
        self._warn_unanchored()

    def _warn_unanchored(self) -> None:
        if self.free.size == 0:
            return
        ncomp, labels = connected_components(self.sub.laplacian(), directed=False)
        anchored = np.bincount(labels, weights=self.obs_degree, minlength=ncomp) > 0
        if not anchored.all():
            warnings.warn(f"{int((~anchored).sum())} unobserved component(s) have no "
                          "observed neighbor; their values are not determined by the data",
                          stacklevel=3)

    @property
    def trivial(self) -> bool:
        return self.free.size == 0

    @property
    def walk_graph(self) -> Graph:
        return self.sub

    @property
    def x0(self) -> np.ndarray:
        return np.zeros(self.free.size)

    def gradient(self, x) -> np.ndarray:
        return 2.0 * (self.obs_degree * x - self.obs_sum)

    def smooth(self, x) -> float:
        d = x[self._cross_free] - self._cross_obs_val
        return float(d @ d)

    def full_signal(self, x) -> np.ndarray:
        """Unobserved values ``x`` merged with the observations."""
        out = self.y.copy()
        out[self.free] = x
        return out

    def objective(self, x) -> float:
        """Harmonic energy over all edges of the full graph."""
        x = _check_signal(x, self.free.size, "iterate")
        return self.smooth(x) + evaluate(self.regularizer, self.sub, x) + self._observed_energy

    report = objective

    def interior_system(self) -> tuple[sp.csr_matrix, np.ndarray]:
        """``(A, b)`` with ``A x = b`` the optimality condition on the free
        nodes: ``(Lap_free + diag(obs_degree)) x = obs_sum``."""
        A = self.sub.laplacian() + sp.diags(self.obs_degree)
        return A.tocsr(), self.obs_sum.copy()

    def harmonic_residual(self, x) -> np.ndarray:
        """``x_i - mean(neighbors)`` at every unobserved node with neighbors."""
        full = self.full_signal(x)
        deg = self.graph.degrees[self.free]
        A = sp.csr_matrix((np.ones(self.graph.indices.size), self.graph.indices, self.graph.indptr),
                          shape=(self.graph.num_nodes,) * 2)
        nsum = (A @ full)[self.free]
        has = deg > 0
        return full[self.free][has] - nsum[has] / deg[has]


def inpainting_gradient(problem: Inpainting, x) -> np.ndarray:
    return problem.gradient(np.asarray(x, dtype=float))


def inpainting_objective(problem: Inpainting, x) -> float:
    return problem.objective(x)


class LaplacianSystem:
    """``Lap x = b`` as ``min -b.x + 1/2 x.Lap.x``.

    The smooth part is linear; the quadratic form is the regularizer
    ``1/2 sum_E (x_i - x_j)^2``.  Traces report ``||Lap x - b||``.
    """

    def __init__(self, graph: Graph, b, center: bool = False, tol: float = 1e-9):
        b = _check_signal(b, graph.num_nodes, "right-hand side").copy()
        if abs(b.mean()) > tol:
            if not center:
                raise ValueError(f"right-hand side has mean {b.mean():.3g}; pass center=True")
            b -= b.mean()
        if np.any(graph.degrees == 0):
            raise ValueError("Laplacian system on a graph with isolated nodes")
        ncomp, labels = connected_components(graph.laplacian(), directed=False)
        if ncomp > 1:
            comp_sum = np.bincount(labels, weights=b)
            if np.abs(comp_sum).max() > tol * max(1.0, np.abs(b).sum()):
                warnings.warn("graph is disconnected and b is not centered per component; "
                              "the system has no solution", stacklevel=2)
        self.graph = graph
        self.b = b
        self.lap = graph.laplacian()
        self.regularizer = Regularizer(Kind.LAPLACIAN, scale=0.5)

    @property
    def walk_graph(self) -> Graph:
        return self.graph

    @property
    def x0(self) -> np.ndarray:
        return np.zeros(self.graph.num_nodes)

    def gradient(self, x) -> np.ndarray:
        return -self.b

    def smooth(self, x) -> float:
        return -float(self.b @ x)

    def objective(self, x) -> float:
        x = _check_signal(x, self.graph.num_nodes, "iterate")
        return self.smooth(x) + 0.5 * float(x @ (self.lap @ x))

    def residual(self, x) -> float:
        return float(np.linalg.norm(self.lap @ x - self.b))

    report = residual

    def full_signal(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float)


def laplacian_system_gradient(problem: LaplacianSystem, x) -> np.ndarray:
    return problem.gradient(x)


def read_signal_csv(stream: TextIO, graph: Graph) -> np.ndarray:
    """Read ``node,value`` rows keyed by original node ids."""
    lookup = {int(v): k for k, v in enumerate(graph.node_ids.tolist())}
    out = np.full(graph.num_nodes, np.nan)
    for row in csv.DictReader(stream):
        out[lookup[int(row["node"])]] = float(row["value"])
    if np.isnan(out).any():
        raise ValueError(f"signal missing for {int(np.isnan(out).sum())} node(s)")
    return out


def read_mask_csv(stream: TextIO, graph: Graph) -> np.ndarray:
    """Read ``node,observed`` rows (0/1); unlisted nodes are unobserved."""
    lookup = {int(v): k for k, v in enumerate(graph.node_ids.tolist())}
    out = np.zeros(graph.num_nodes, dtype=bool)
    for row in csv.DictReader(stream):
        flag = int(row["observed"])
        if flag not in (0, 1):
            raise ValueError(f"observed flag must be 0 or 1, got {flag}")
        out[lookup[int(row["node"])]] = bool(flag)
    return out


def write_signal_csv(stream: TextIO, graph: Graph, x) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["node", "value"])
    for nid, v in zip(graph.node_ids.tolist(), np.asarray(x).tolist()):
        w.writerow([nid, repr(float(v))])
