import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import adjacency_lists, enumerate_walks, small_test_graphs
from snakeprox.baselines import pg_dual_tv
from snakeprox.graph import from_edges, make_rng, path_graph, sample_sbm, sbm_blocks
from snakeprox.problems import TrendFiltering, calibrate_lambda, sbm_signal
from snakeprox.prox1d import laplacian_prox_path, tv_prox_path
from snakeprox.regularizers import Kind, Regularizer, evaluate, evaluate_on_path
from snakeprox.snake import (
    SolverConfig, StepSchedule, composite_estimate, estimate_regularizer, init_state, outer_iteration,
    read_trace_csv, run, snake_segment_step, write_trace_csv,
)
from snakeprox.walks import rnd_oriented_edge, simple_path


class Quadratic:
    """``F = c/2 ||x - y||^2`` on a graph, no regularizer of its own."""

    def __init__(self, graph, y, c=1.0, reg=None):
        self.walk_graph = graph
        self.y = np.asarray(y, dtype=float)
        self.c = c
        self.regularizer = reg or Regularizer(Kind.TV)

    @property
    def x0(self):
        return self.y.copy()

    def gradient(self, x):
        return self.c * (x - self.y)

    def smooth(self, x):
        return 0.5 * self.c * float((x - self.y) @ (x - self.y))

    def report(self, x):
        return self.smooth(x) + evaluate(self.regularizer, self.walk_graph, x)


def test_schedule_values():
    s = StepSchedule("inverse_n", 10.0)
    assert [s(n) for n in (1, 2, 5)] == [10.0, 5.0, 2.0]
    r = StepSchedule("inverse_sqrt_n", 4.0, switch_at=16)
    assert r(4) == 2.0 and r(16) == 1.0
    assert r(17) == pytest.approx(4.0 * 4 / 17)
    assert r(32) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        s(0)
    with pytest.raises(ValueError):
        StepSchedule("constant", 1.0)
    with pytest.raises(ValueError):
        StepSchedule("inverse_n", 0.0)


def test_config_validation():
    sch = StepSchedule()
    for bad in (dict(budget_L=0), dict(budget_L=3, eval_every=0), dict(budget_L=3, max_wall_time=0.0)):
        with pytest.raises(ValueError):
            SolverConfig(schedule=sch, **bad)


def test_budget_one_is_single_edge_forward_backward():
    g = sample_sbm([8, 8], 0.4, 0.1, seed=0)
    y = make_rng(1).standard_normal(g.num_nodes)
    prob = Quadratic(g, y, reg=Regularizer(Kind.TV, scale=0.3))
    sched = StepSchedule("inverse_n", 2.0)
    trace = run(prob, SolverConfig(1, sched, seed=5, max_outer_iterations=40))

    rng = make_rng(5)
    z = y.copy()
    e = rnd_oriented_edge(g, rng)
    for n in range(1, 41):
        gam = sched(n)
        z = z - gam / g.num_edges * (z - y)
        z[list(e)] = tv_prox_path(z[list(e)], 0.3 * gam)
        e = rnd_oriented_edge(g, rng)
    np.testing.assert_array_equal(trace.x, z)


def test_zero_gradient_touches_only_the_path():
    g = sample_sbm([10, 10], 0.3, 0.1, seed=2)

    class Zero(Quadratic):
        def gradient(self, x):
            return np.zeros_like(x)

    prob = Zero(g, make_rng(3).standard_normal(g.num_nodes), reg=Regularizer(Kind.LAPLACIAN))
    state = init_state(prob, 7, make_rng(4))
    for _ in range(50):
        before = state.z.copy()
        c = snake_segment_step(state, prob, prob.regularizer, 1.3)
        off = np.setdiff1d(np.arange(g.num_nodes), c.nodes)
        np.testing.assert_array_equal(state.z[off], before[off])
        idx = list(c.nodes)
        np.testing.assert_array_equal(state.z[idx], laplacian_prox_path(before[idx], 1.3 / 7))


def test_hand_transcript_two_edge_path():
    # replay of the iteration on 0-1-2 with the same draws, written out longhand
    g = path_graph(3)
    y = np.array([1.0, -2.0, 4.0])
    prob = Quadratic(g, y, reg=Regularizer(Kind.TV, scale=0.5))
    sched = StepSchedule("inverse_n", 3.0)
    L, iters = 2, 6
    trace = run(prob, SolverConfig(L, sched, seed=9, max_outer_iterations=iters))

    rng = make_rng(9)
    nbrs = {0: [1], 1: [0, 2], 2: [1]}
    z = y.copy()
    k = int(rng.integers(4))  # adjacency slots: (0,1) (1,0) (1,2) (2,1)
    edge = [(0, 1), (1, 0), (1, 2), (2, 1)][k]
    transcript = []
    for n in range(1, iters + 1):
        gam, left = sched(n), L
        while left:
            seg = list(edge)
            nxt = None
            while len(seg) - 1 < left:
                nb = nbrs[seg[-1]]
                w = nb[int(rng.integers(len(nb)))]
                if w in seg:
                    nxt = (seg[-1], w)
                    break
                seg.append(w)
            ln = len(seg) - 1
            z = z - gam * ln / (L * 2) * (z - y)
            z[seg] = tv_prox_path(z[seg], 0.5 * gam / L)
            transcript.append(tuple(seg))
            left -= ln
            if left == 0:
                k = int(rng.integers(4))
                edge = [(0, 1), (1, 0), (1, 2), (2, 1)][k]
            else:
                edge = nxt
    np.testing.assert_array_equal(trace.x, z)
    assert all(len(s) >= 2 for s in transcript)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 40))
def test_budget_conservation(seed, L):
    g = sample_sbm([8, 8], 0.4, 0.1, seed=1)
    prob = Quadratic(g, make_rng(seed).standard_normal(g.num_nodes))
    state = init_state(prob, L, make_rng(seed))
    for n in range(1, 6):
        lengths = outer_iteration(state, prob, prob.regularizer, 1.0)
        assert sum(lengths) == L and 1 <= len(lengths) <= L
        assert state.n == n and state.remaining_budget == L


def test_segment_step_requires_budget():
    g = path_graph(3)
    prob = Quadratic(g, np.zeros(3))
    state = init_state(prob, 2, make_rng(0))
    state.remaining_budget = 0
    with pytest.raises(ValueError):
        snake_segment_step(state, prob, prob.regularizer, 1.0)


@pytest.mark.parametrize("kind", [Kind.TV, Kind.LAPLACIAN])
def test_exact_unbiasedness_by_enumeration(kind):
    reg = Regularizer(kind)
    rng = np.random.default_rng(0)
    for n, edges in small_test_graphs():
        g = from_edges(n, edges)
        adj = adjacency_lists(n, edges)
        x = rng.standard_normal(n)
        full = evaluate(reg, g, x)
        for L in range(1, 5):
            exp = sum(p * g.num_edges / L * evaluate_on_path(reg, w, x) for w, p in enumerate_walks(adj, L))
            assert abs(exp - full) <= 1e-10 * max(1.0, abs(full))


def test_estimate_constant_signal_is_zero():
    g = sample_sbm([10, 10], 0.3, 0.1, seed=0)
    est, se = estimate_regularizer(g, Regularizer(Kind.TV), np.full(20, 2.0), 5, 1000, seed=1,
                                   return_stderr=True)
    assert est == 0.0 and se == 0.0


def test_estimate_monte_carlo():
    g = sample_sbm([10, 10], 0.4, 0.1, seed=3)
    x = make_rng(4).standard_normal(20)
    for kind in (Kind.TV, Kind.LAPLACIAN):
        reg = Regularizer(kind)
        est, se = estimate_regularizer(g, reg, x, 8, 100_000, seed=5, return_stderr=True)
        exact = evaluate(reg, g, x)
        assert abs(est - exact) < 0.01 * exact
        assert abs(est - exact) < 5 * se


def test_composite_estimate_unbiased():
    g = sample_sbm([10, 10], 0.4, 0.1, seed=3)
    y = make_rng(6).standard_normal(20)
    prob = TrendFiltering(g, y, 0.7)
    x = make_rng(7).standard_normal(20)
    est = composite_estimate(prob, x, 8, 100_000, seed=8)
    target = prob.objective(x) / g.num_edges
    assert abs(est - target) < 0.01 * target


def test_determinism():
    g = sample_sbm([20, 20], 0.2, 0.02, seed=1)
    prob = TrendFiltering(g, make_rng(2).standard_normal(40), 0.5)
    cfg = SolverConfig(40, StepSchedule("inverse_n", 4.0), seed=3, max_outer_iterations=30)
    a, b = run(prob, cfg), run(prob, cfg)
    assert [(r.outer_iter, r.objective) for r in a.records] == [(r.outer_iter, r.objective) for r in b.records]
    np.testing.assert_array_equal(a.x, b.x)
    c = run(prob, SolverConfig(40, StepSchedule("inverse_n", 4.0), seed=4, max_outer_iterations=30))
    assert not np.array_equal(a.x, c.x)


def test_trace_cadence_and_clock():
    g = sample_sbm([20, 20], 0.2, 0.02, seed=1)
    prob = TrendFiltering(g, make_rng(2).standard_normal(40), 0.5)
    tr = run(prob, SolverConfig(10, StepSchedule("inverse_n", 4.0), max_outer_iterations=23, eval_every=5))
    assert tr.iterations.tolist() == [0, 5, 10, 15, 20, 23]
    wall = [r.wall_seconds for r in tr.records]
    assert wall == sorted(wall)
    assert all(r.solver_seconds <= r.wall_seconds for r in tr.records)
    assert tr.outer_iterations == 23
    best = tr.best_so_far()
    assert np.all(np.diff(best) <= 0)


def test_wall_time_limit():
    g = sample_sbm([20, 20], 0.2, 0.02, seed=1)
    prob = TrendFiltering(g, make_rng(2).standard_normal(40), 0.5)
    tr = run(prob, SolverConfig(10, StepSchedule(), max_outer_iterations=10**9, max_wall_time=0.3))
    assert 0 < tr.outer_iterations < 10**9


def test_edgeless_walk_graph_rejected():
    prob = Quadratic(from_edges(3, []), np.zeros(3))
    with pytest.raises(ValueError):
        run(prob, SolverConfig(2, StepSchedule()))


def test_trace_csv_round_trip():
    g = sample_sbm([20, 20], 0.2, 0.02, seed=1)
    prob = TrendFiltering(g, make_rng(2).standard_normal(40), 0.5)
    tr = run(prob, SolverConfig(10, StepSchedule("inverse_n", 4.0), max_outer_iterations=5))
    buf = io.StringIO()
    write_trace_csv(tr, buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == "outer_iter,wall_seconds,objective"
    rows = read_trace_csv(io.StringIO(text))
    assert [(i, o) for i, _, o in rows] == [(r.outer_iter, r.objective) for r in tr.records]
    with pytest.raises(ValueError):
        read_trace_csv(io.StringIO("a,b,c\n"))


def test_gtf_small_sbm_example():
    # 100-node SBM, L = |V|, gamma_n = |V| / (10 n), 200 outer iterations
    sizes = [25] * 4
    g = sample_sbm(sizes, 0.1, 0.005, seed=1)
    lam = calibrate_lambda(g)
    y = sbm_signal(sbm_blocks(sizes), [0, 1, 2, 3], 0.5, seed=3)
    ref = pg_dual_tv(g, y, lam, max_iters=200_000, tol=1e-10, accelerated=True)
    assert ref.converged
    prob = TrendFiltering(g, y, lam)
    V = g.num_nodes
    tr = run(prob, SolverConfig(V, StepSchedule("inverse_n", V / 10), seed=0, max_outer_iterations=200))
    f_star, final = ref.trace.final_objective, tr.final_objective
    assert final <= 1.02 * f_star, f"{final / f_star - 1:.1%} above the reference"
