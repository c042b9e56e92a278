"""Deterministic reference solvers: projected gradient on the TV dual and
conjugate gradient."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .graph import EdgeWeights, Graph
from .snake import SolverTrace, TraceRecord

__all__ = [
    "IncidenceOperator",
    "PGResult",
    "CGResult",
    "pg_dual_tv",
    "conjugate_gradient",
    "power_iteration",
]


class IncidenceOperator:
    """Edge-by-node difference operator, ``(D x)_e = x[u] - x[v]`` for the
    edge ``e = (u, v)``, ``u < v``, in canonical edge order."""

    def __init__(self, graph: Graph):
        e = graph.edges()
        m, n = len(e), graph.num_nodes
        rows = np.repeat(np.arange(m), 2)
        cols = e.ravel()
        vals = np.tile([1.0, -1.0], m)
        self.graph = graph
        self.matrix = sp.csr_matrix((vals, (rows, cols)), shape=(m, n))
        self.T = self.matrix.T.tocsr()

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x

    def adjoint(self, z: np.ndarray) -> np.ndarray:
        return self.T @ z


def power_iteration(apply: Callable[[np.ndarray], np.ndarray], n: int, iters: int = 100,
                    seed: int = 0) -> float:
    """Estimate of the largest eigenvalue of a symmetric PSD operator."""
    v = np.random.default_rng(seed).standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = apply(v)
        lam_new = float(np.linalg.norm(w))
        if lam_new == 0.0:
            return 0.0
        v = w / lam_new
        if abs(lam_new - lam) <= 1e-10 * lam_new:
            lam = lam_new
            break
        lam = lam_new
    return lam


@dataclass
class PGResult:
    x: np.ndarray
    z: np.ndarray
    trace: SolverTrace
    converged: bool
    iterations: int
    gap: float


def pg_dual_tv(graph: Graph, y, lam: float, max_iters: int = 10_000, tol: float = 1e-8,
               weights: EdgeWeights | None = None, accelerated: bool = False,
               record_every: int = 1) -> PGResult:
    """TV denoising on a graph through its box-constrained dual.

    Minimizes ``1/2 ||y - D^T z||^2`` over ``|z_e| <= lam * w_e`` by
    projected gradient with step ``1 / ||D^T D||`` and returns the primal
    point ``x = y - D^T z``.  Stops once the duality gap is at most ``tol``;
    otherwise returns the last iterate with ``converged=False``.
    ``accelerated`` adds Nesterov momentum (FISTA).
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    y = np.asarray(y, dtype=float)
    D = IncidenceOperator(graph)
    box = lam * (np.ones(graph.num_edges) if weights is None else weights.values)
    L = power_iteration(lambda v: D.adjoint(D.apply(v)), graph.num_nodes)
    step = 1.0 / L if L > 0 else 1.0
    z = np.zeros(graph.num_edges)
    v, t = z.copy(), 1.0
    half_yy = 0.5 * float(y @ y)

    def primal(x):
        d = x - y
        return 0.5 * float(d @ d) + float(box @ np.abs(D.apply(x)))

    trace = SolverTrace()
    t0 = time.monotonic()
    gap = math.inf
    it = 0
    x = y.copy()
    trace.records.append(TraceRecord(0, 0.0, primal(x), 0.0))
    for it in range(1, max_iters + 1):
        base = v if accelerated else z
        z_new = np.clip(base + step * D.apply(y - D.adjoint(base)), -box, box)
        if accelerated:
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            v = z_new + ((t - 1.0) / t_new) * (z_new - z)
            t = t_new
        z = z_new
        x = y - D.adjoint(z)
        p = primal(x)
        gap = p - (half_yy - 0.5 * float(x @ x))
        if it % record_every == 0:
            el = time.monotonic() - t0
            trace.records.append(TraceRecord(it, el, p, el))
        if gap <= tol:
            break
    if trace.records[-1].outer_iter != it:
        el = time.monotonic() - t0
        trace.records.append(TraceRecord(it, el, primal(x), el))
    trace.x = x
    trace.outer_iterations = it
    return PGResult(x, z, trace, gap <= tol, it, gap)


@dataclass
class CGResult:
    x: np.ndarray
    trace: SolverTrace
    converged: bool
    iterations: int
    breakdown: bool = False
    residuals: list[float] = field(default_factory=list)


def conjugate_gradient(apply_A, b, x0=None, tol: float = 1e-10, max_iters: int = 1000,
                       report: Callable[[np.ndarray], float] | None = None) -> CGResult:
    """Conjugate gradient for a symmetric positive semidefinite operator.

    ``apply_A`` is a callable or anything supporting ``@``.  Stops when the
    true residual satisfies ``||A x - b|| <= tol * ||b||``.  For a singular
    operator ``b`` must be orthogonal to its kernel.  The trace records
    ``report(x)`` (default: the residual norm) at every iteration.
    """
    A = apply_A if callable(apply_A) else (lambda v: apply_A @ v)
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - A(x)
    p = r.copy()
    rr = float(r @ r)
    bnorm = float(np.linalg.norm(b))
    target = tol * bnorm
    trace = SolverTrace()
    t0 = time.monotonic()
    res = [math.sqrt(rr)]

    def rec(it, val):
        el = time.monotonic() - t0
        trace.records.append(TraceRecord(it, el, val, el))

    rec(0, report(x) if report else res[0])
    converged = res[0] <= target
    breakdown = False
    it = 0
    while not converged and it < max_iters:
        it += 1
        Ap = A(p)
        curv = float(p @ Ap)
        if curv <= 0.0 or not math.isfinite(curv):
            breakdown = True
            break
        alpha = rr / curv
        x += alpha * p
        r -= alpha * Ap
        rr_new = float(r @ r)
        if it % 10 == 0 or math.sqrt(rr_new) <= target:
            # guard against drift of the recursive residual
            r = b - A(x)
            rr_new = float(r @ r)
        res.append(math.sqrt(rr_new))
        rec(it, report(x) if report else res[-1])
        converged = res[-1] <= target
        p = r + (rr_new / rr) * p
        rr = rr_new
    trace.x = x
    trace.outer_iterations = it
    return CGResult(x, trace, converged, it, breakdown, res)
