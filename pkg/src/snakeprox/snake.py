"""Stochastic proximal gradient over random simple paths.

One outer iteration consumes a random walk of ``L`` edges, cut online into
simple paths.  For each path ``c`` the iterate takes a gradient step of
size ``gamma * len(c) / (L |E|)`` on all coordinates, then the 1-D prox of
``gamma / L`` times the regularizer restricted to ``c``.  The step
``gamma`` is held fixed within an outer iteration.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .graph import Graph, make_rng
from .regularizers import Regularizer, evaluate_on_path, prox_update
from .walks import SimplePath, rnd_oriented_edge, simple_path, stream_segments

__all__ = [
    "StepSchedule",
    "SolverConfig",
    "SolverState",
    "SolverTrace",
    "TraceRecord",
    "init_state",
    "snake_segment_step",
    "run",
    "estimate_regularizer",
    "composite_estimate",
    "write_trace_csv",
    "read_trace_csv",
]


@dataclass(frozen=True)
class StepSchedule:
    """``scale / n`` or ``scale / sqrt(n)`` for outer iteration ``n >= 1``.

    With ``switch_at`` set, an ``inverse_sqrt_n`` schedule becomes
    ``scale * sqrt(switch_at) / n`` after ``switch_at``, which is continuous
    at the switch and summable in square.
    """

    kind: str = "inverse_n"
    scale: float = 1.0
    switch_at: int | None = None

    def __post_init__(self):
        if self.kind not in ("inverse_n", "inverse_sqrt_n"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError("schedule scale must be positive")
        if self.switch_at is not None and self.switch_at < 1:
            raise ValueError("switch_at must be >= 1")

    def __call__(self, n: int) -> float:
        if n < 1:
            raise ValueError("steps are indexed from 1")
        if self.kind == "inverse_n":
            return self.scale / n
        if self.switch_at is not None and n > self.switch_at:
            return self.scale * math.sqrt(self.switch_at) / n
        return self.scale / math.sqrt(n)


@dataclass(frozen=True)
class SolverConfig:
    budget_L: int
    schedule: StepSchedule
    seed: int = 0
    max_outer_iterations: int = 100
    max_wall_time: float = math.inf
    eval_every: int = 1

    def __post_init__(self):
        if self.budget_L < 1:
            raise ValueError("budget_L must be >= 1")
        if self.max_outer_iterations < 0:
            raise ValueError("max_outer_iterations must be >= 0")
        if self.eval_every < 1:
            raise ValueError("eval_every must be >= 1")
        if not self.max_wall_time > 0:
            raise ValueError("max_wall_time must be positive")


@dataclass
class SolverState:
    z: np.ndarray
    n: int
    remaining_budget: int
    current_edge: tuple[int, int]
    rng: np.random.Generator
    budget_L: int
    segments_this_iteration: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class TraceRecord:
    outer_iter: int
    wall_seconds: float
    objective: float
    # elapsed time with all objective evaluations subtracted
    solver_seconds: float


@dataclass
class SolverTrace:
    records: list[TraceRecord] = field(default_factory=list)
    x: np.ndarray | None = None
    outer_iterations: int = 0

    @property
    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.records])

    @property
    def iterations(self) -> np.ndarray:
        return np.array([r.outer_iter for r in self.records])

    @property
    def final_objective(self) -> float:
        return self.records[-1].objective

    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(self.objectives)


def init_state(problem, budget_L: int, rng: np.random.Generator) -> SolverState:
    g = problem.walk_graph
    return SolverState(z=np.array(problem.x0, dtype=float), n=0, remaining_budget=budget_L,
                       current_edge=rnd_oriented_edge(g, rng), rng=rng, budget_L=budget_L)


def snake_segment_step(state: SolverState, problem, reg: Regularizer, gamma: float) -> SimplePath:
    """Process one simple path; updates ``state`` in place and returns the path."""
    if state.remaining_budget < 1:
        raise ValueError("no budget left in this outer iteration")
    g = problem.walk_graph
    L = state.budget_L
    c, nxt = simple_path(g, state.current_edge, state.remaining_budget, state.rng)
    z = state.z
    z -= (gamma * c.length / (L * g.num_edges)) * problem.gradient(z)
    prox_update(reg, c, z, gamma / L)
    state.remaining_budget -= c.length
    state.segments_this_iteration.append(c.length)
    if state.remaining_budget == 0:
        state.current_edge = rnd_oriented_edge(g, state.rng)
        state.remaining_budget = L
        state.n += 1
        state.segments_this_iteration = []
    else:
        state.current_edge = nxt
    return c


def outer_iteration(state: SolverState, problem, reg: Regularizer, gamma: float) -> list[int]:
    """Run segments until the budget of the current outer iteration is spent.

    Returns the segment lengths, which sum to ``L``.
    """
    n0 = state.n
    lengths = []
    while state.n == n0:
        lengths.append(snake_segment_step(state, problem, reg, gamma).length)
    return lengths


def run(problem, config: SolverConfig, reg: Regularizer | None = None) -> SolverTrace:
    """Run until ``max_outer_iterations`` or ``max_wall_time``, whichever first.

    The reported value is recorded before the first iteration, every
    ``eval_every`` outer iterations, and at the end.
    """
    reg = problem.regularizer if reg is None else reg
    trace = SolverTrace()
    if getattr(problem, "trivial", False):
        trace.x = np.array(problem.x0, dtype=float)
        trace.records.append(TraceRecord(0, 0.0, problem.report(trace.x), 0.0))
        return trace
    if problem.walk_graph.num_edges == 0:
        raise ValueError("the walk graph has no edges")

    rng = make_rng(config.seed)
    state = init_state(problem, config.budget_L, rng)
    clock = time.monotonic
    t0 = clock()
    eval_time = 0.0

    def record():
        nonlocal eval_time
        t = clock()
        val = problem.report(state.z)
        trace.records.append(TraceRecord(state.n, t - t0, val, t - t0 - eval_time))
        eval_time += clock() - t

    record()
    while state.n < config.max_outer_iterations:
        if clock() - t0 >= config.max_wall_time:
            break
        outer_iteration(state, problem, reg, config.schedule(state.n + 1))
        if state.n % config.eval_every == 0:
            record()
    if trace.records[-1].outer_iter != state.n:
        record()
    trace.x = state.z
    trace.outer_iterations = state.n
    return trace


def _batch_walks(graph: Graph, L: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """``m`` degree-law-started walks of length ``L`` as an (m, L+1) array."""
    ptr, ind, deg = graph.indptr, graph.indices, graph.degrees
    slots = rng.integers(2 * graph.num_edges, size=m)
    W = np.empty((m, L + 1), dtype=np.int64)
    W[:, 0] = np.searchsorted(ptr, slots, side="right") - 1
    W[:, 1] = ind[slots]
    for k in range(2, L + 1):
        v = W[:, k - 1]
        W[:, k] = ind[ptr[v] + (rng.random(m) * deg[v]).astype(np.int64)]
    return W


def estimate_regularizer(graph: Graph, reg: Regularizer, x, L: int, num_samples: int,
                         seed: int, return_stderr: bool = False):
    """Monte-Carlo estimate of the full regularizer from ``num_samples``
    walks of length ``L``: the mean of ``|E| / L * R(x, walk)``."""
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    x = np.asarray(x, dtype=float)
    rng = make_rng(seed)
    W = _batch_walks(graph, L, num_samples, rng)
    a, b = W[:, :-1], W[:, 1:]
    w = 1.0 if reg.weights is None else reg.weights.values[graph.edge_ids(a, b)]
    d = x[a] - x[b]
    per_edge = w * (np.abs(d) if reg.is_tv else d * d)
    vals = reg.scale * per_edge.sum(axis=1) * graph.num_edges / L
    est = float(vals.mean())
    if return_stderr:
        return est, float(vals.std(ddof=1) / math.sqrt(num_samples)) if num_samples > 1 else math.inf
    return est


def composite_estimate(problem, x, L: int, num_samples: int, seed: int) -> float:
    """Sample mean of the per-walk sum of smooth and path terms,
    ``sum_i len(c_i)/(L|E|) F(x) + R(x, c_i)/L``, over online-split walks.

    Its expectation is ``(F(x) + R(x)) / |E|``.
    """
    g = problem.walk_graph
    reg = problem.regularizer
    rng = make_rng(seed)
    F = problem.smooth(x)
    total = 0.0
    for _ in range(num_samples):
        for c in stream_segments(g, L, rng):
            total += c.length / (L * g.num_edges) * F + evaluate_on_path(reg, c, x, g) / L
    return total / num_samples


TRACE_HEADER = ("outer_iter", "wall_seconds", "objective")


def write_trace_csv(trace: SolverTrace, stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for r in trace.records:
        w.writerow([r.outer_iter, format(r.wall_seconds, ".17g"), format(r.objective, ".17g")])


def read_trace_csv(stream: TextIO) -> list[tuple[int, float, float]]:
    rows = csv.reader(stream)
    header = tuple(next(rows))
    if header != TRACE_HEADER:
        raise ValueError(f"unexpected trace header {header}")
    return [(int(a), float(b), float(c)) for a, b, c in rows]
