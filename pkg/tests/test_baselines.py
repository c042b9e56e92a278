import numpy as np
import pytest

from snakeprox.baselines import IncidenceOperator, conjugate_gradient, pg_dual_tv, power_iteration
from snakeprox.graph import EdgeWeights, grid_graph, make_rng, path_graph, sample_sbm
from snakeprox.problems import gaussian_signal
from snakeprox.prox1d import tv_prox_path


def test_incidence_gram_is_laplacian():
    g = sample_sbm([15, 15], 0.3, 0.05, seed=0)
    D = IncidenceOperator(g)
    assert D.shape == (g.num_edges, g.num_nodes)
    x = make_rng(1).standard_normal(g.num_nodes)
    e = g.edges()
    assert abs(D.apply(x) @ D.apply(x) - ((x[e[:, 0]] - x[e[:, 1]]) ** 2).sum()) <= 1e-10
    np.testing.assert_allclose((D.matrix.T @ D.matrix).toarray(), g.laplacian().toarray(), atol=1e-12)
    z = make_rng(2).standard_normal(g.num_edges)
    assert D.apply(x) @ z == pytest.approx(x @ D.adjoint(z), rel=1e-12)


def test_power_iteration():
    A = np.diag([1.0, 4.0, 9.0])
    assert power_iteration(lambda v: A @ v, 3, iters=500) == pytest.approx(9.0, rel=1e-6)
    assert power_iteration(lambda v: 0 * v, 3) == 0.0


@pytest.mark.parametrize("accelerated", [False, True])
def test_pg_on_path_matches_taut_string(accelerated):
    n = 40
    y = gaussian_signal(n, 2) * 2
    for lam in (0.1, 1.0):
        res = pg_dual_tv(path_graph(n), y, lam, max_iters=200_000, tol=1e-12, accelerated=accelerated)
        assert res.converged
        np.testing.assert_allclose(res.x, tv_prox_path(y, lam), atol=1e-6)


def test_pg_weighted_path():
    n = 20
    g = path_graph(n)
    w = make_rng(3).uniform(0.3, 2.0, n - 1)
    y = gaussian_signal(n, 4)
    res = pg_dual_tv(g, y, 0.5, weights=EdgeWeights(g, w), max_iters=200_000, tol=1e-12, accelerated=True)
    np.testing.assert_allclose(res.x, tv_prox_path(y, 0.5, w), atol=1e-6)
    assert np.all(np.abs(res.z) <= 0.5 * w)


def test_pg_small_lambda_returns_y():
    g = grid_graph(4, 5)
    y = gaussian_signal(20, 5)
    res = pg_dual_tv(g, y, 1e-9, tol=1e-14)
    np.testing.assert_allclose(res.x, y, atol=1e-7)
    with pytest.raises(ValueError):
        pg_dual_tv(g, y, 0.0)


def test_pg_dual_feasible_every_iterate():
    g = sample_sbm([10, 10], 0.4, 0.1, seed=1)
    y = gaussian_signal(20, 6)
    lam = 0.3
    for k in (1, 2, 5, 17, 60):
        res = pg_dual_tv(g, y, lam, max_iters=k, tol=0.0)
        assert res.iterations == k and not res.converged
        assert np.abs(res.z).max() <= lam


def test_pg_trace_and_gap():
    g = sample_sbm([10, 10], 0.4, 0.1, seed=1)
    y = gaussian_signal(20, 6)
    res = pg_dual_tv(g, y, 0.3, max_iters=100_000, tol=1e-9, record_every=10)
    assert res.converged and 0 <= res.gap <= 1e-9
    assert res.trace.iterations[-1] == res.iterations
    assert res.trace.final_objective <= res.trace.records[0].objective


def test_cg_identity_one_step():
    b = np.array([1.0, -2.0, 3.0])
    res = conjugate_gradient(lambda v: v, b)
    assert res.converged and res.iterations == 1
    np.testing.assert_allclose(res.x, b)


def test_cg_a_norm_error_monotone():
    g = sample_sbm([50, 50], 0.1, 0.01, seed=2)
    import scipy.sparse as sp
    A = (g.laplacian() + 0.01 * sp.eye(g.num_nodes)).tocsr()
    b = gaussian_signal(100, 3)
    x_star = np.linalg.solve(A.toarray(), b)
    errs = []
    res = conjugate_gradient(A, b, tol=1e-12, max_iters=500,
                             report=lambda x: float((x - x_star) @ (A @ (x - x_star))))
    errs = res.trace.objectives
    assert res.converged
    assert np.all(np.diff(errs) <= 1e-9 * errs[0])
    np.testing.assert_allclose(res.x, x_star, atol=1e-8)
    assert np.linalg.norm(A @ res.x - b) <= 1e-12 * np.linalg.norm(b) * 1.0001


def test_cg_singular_laplacian_centered():
    g = sample_sbm([60, 60], 0.15, 0.02, seed=4)
    b = gaussian_signal(120, 5)
    b -= b.mean()
    res = conjugate_gradient(g.laplacian(), b, tol=1e-10)
    assert res.converged
    assert np.linalg.norm(g.laplacian() @ res.x - b) <= 1e-10 * np.linalg.norm(b) * 1.0001


def test_cg_breakdown_flag():
    A = np.diag([1.0, -1.0])
    res = conjugate_gradient(A, np.array([1.0, 1.0]))
    assert res.breakdown and not res.converged
