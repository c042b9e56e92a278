"""Edge-separable regularizers and their restriction to paths."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .graph import EdgeWeights, Graph
from .prox1d import _laplacian_kernel, _taut_string, laplacian_prox_path, tv_prox_path
from .walks import SimplePath

__all__ = ["Kind", "Regularizer", "evaluate", "evaluate_on_path", "prox_on_path", "prox_update"]


class Kind(str, enum.Enum):
    TV = "tv"
    WEIGHTED_TV = "weighted_tv"
    LAPLACIAN = "laplacian"
    WEIGHTED_LAPLACIAN = "weighted_laplacian"
    NORMALIZED_LAPLACIAN = "normalized_laplacian"


_WEIGHTED = {Kind.WEIGHTED_TV, Kind.WEIGHTED_LAPLACIAN}
_TV = {Kind.TV, Kind.WEIGHTED_TV}


@dataclass(frozen=True)
class Regularizer:
    """Sum over edges of ``scale * w_e * phi(x_i, x_j)``.

    ``phi`` is ``|a - b|`` for the TV kinds and ``(a - b)^2`` for the
    Laplacian kinds.  ``scale`` carries a global factor such as the GTF
    ``lambda`` without building a weight vector.
    """

    kind: Kind
    weights: EdgeWeights | None = None
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if (self.weights is not None) != (self.kind in _WEIGHTED):
            raise ValueError(f"{self.kind.value}: weights must be given exactly for weighted kinds")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def is_tv(self) -> bool:
        return self.kind in _TV


def _edge_weights(reg: Regularizer, n_edges: int) -> np.ndarray:
    if reg.weights is None:
        return np.ones(n_edges)
    return reg.weights.values


def _penalty(reg: Regularizer, d: np.ndarray, w: np.ndarray) -> float:
    terms = w * np.abs(d) if reg.is_tv else w * d * d
    return reg.scale * float(np.sum(terms))


def evaluate(reg: Regularizer, graph: Graph, x) -> float:
    """Regularizer value over every edge of the graph, each counted once."""
    x = np.asarray(x, dtype=float)
    if x.shape != (graph.num_nodes,):
        raise ValueError(f"signal has shape {x.shape}, graph has {graph.num_nodes} nodes")
    if reg.weights is not None and reg.weights.graph is not graph and reg.weights.graph != graph:
        raise ValueError("edge weights belong to a different graph")
    e = graph.edges()
    if reg.kind is Kind.NORMALIZED_LAPLACIAN:
        with np.errstate(divide="ignore", invalid="ignore"):
            x = x / np.sqrt(graph.degrees)
    d = x[e[:, 0]] - x[e[:, 1]]
    return _penalty(reg, d, _edge_weights(reg, len(e)))


def evaluate_on_path(reg: Regularizer, path: SimplePath | tuple, x, graph: Graph | None = None) -> float:
    """Regularizer restricted to the consecutive edges of a path or walk.

    Zero for a single vertex.  ``graph`` is needed only for the normalized
    kind (degrees) and otherwise ignored.
    """
    nodes = list(path.nodes if isinstance(path, SimplePath) else path)
    if len(nodes) < 2:
        return 0.0
    x = np.asarray(x, dtype=float)
    vals = x[nodes]
    if reg.kind is Kind.NORMALIZED_LAPLACIAN:
        if graph is None:
            raise ValueError("normalized Laplacian needs the graph for degrees")
        vals = vals / np.sqrt(graph.degrees[nodes])
    w = reg.weights.along(nodes) if reg.weights is not None else np.ones(len(nodes) - 1)
    return _penalty(reg, np.diff(vals), w)


def prox_on_path(reg: Regularizer, path: SimplePath, y_restricted, step: float) -> np.ndarray:
    """Prox of ``step * R(., phi_path)`` on values aligned with ``path.nodes``."""
    if reg.kind is Kind.NORMALIZED_LAPLACIAN:
        raise NotImplementedError("no proximity operator for the normalized Laplacian")
    y = np.asarray(y_restricted, dtype=float)
    if y.shape != (len(path.nodes),):
        raise ValueError("restricted signal does not match the path length")
    if len(path.nodes) == 1:
        return y.copy()
    w = reg.weights.along(path.nodes) if reg.weights is not None else None
    alpha = step * reg.scale
    if reg.is_tv:
        return tv_prox_path(y, alpha, w)
    return laplacian_prox_path(y, alpha, w)


def prox_update(reg: Regularizer, path: SimplePath, z: np.ndarray, step: float) -> None:
    """Apply ``prox_on_path`` to ``z`` in place on the path's coordinates.

    Inner-loop variant: skips the input validation of ``prox_on_path``.
    """
    idx = np.fromiter(path.nodes, dtype=np.int64, count=len(path.nodes))
    if idx.size == 1 or step == 0.0:
        return
    if reg.kind is Kind.NORMALIZED_LAPLACIAN:
        raise NotImplementedError("no proximity operator for the normalized Laplacian")
    alpha = step * reg.scale
    if reg.weights is None:
        w = np.full(idx.size - 1, alpha)
    else:
        w = alpha * reg.weights.values[reg.weights.graph.edge_ids(idx[:-1], idx[1:])]
    if reg.is_tv:
        z[idx] = _taut_string(z[idx], w)
    else:
        z[idx] = _laplacian_kernel(z[idx], 2.0 * w)
