"""Exact proximity operators along a chain of nodes.

``tv_prox_path`` solves::

    min_x 1/2 ||x - y||^2 + alpha * sum_k w_k |x[k+1] - x[k]|

with a taut-string method, and the Laplacian proxes solve::

    min_x 1/2 ||x - y||^2 + lam * sum_k w_k (x[k+1] - x[k])^2

i.e. the tridiagonal system ``(I + 2 lam Lap) x = y``.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit
from scipy import fft

__all__ = [
    "tv_prox_path",
    "laplacian_prox_path",
    "laplacian_prox_dct",
    "laplacian_path_eigenvalues",
    "thomas_solve",
    "path_laplacian",
]


def _as_signal(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("expected a non-empty 1-D signal")
    if not np.all(np.isfinite(y)):
        raise ValueError("signal contains non-finite values")
    return y


def _as_weights(weights, n: int) -> np.ndarray | None:
    if weights is None:
        return None
    w = np.asarray(weights, dtype=float)
    if w.shape != (n - 1,):
        raise ValueError(f"expected {n - 1} edge weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("edge weights must be finite and nonnegative")
    return w


def _check_step(step: float, name: str) -> float:
    step = float(step)
    if not math.isfinite(step) or step < 0:
        raise ValueError(f"{name} must be a finite nonnegative number, got {step}")
    return step


@njit(cache=True)
def _taut_string(y, width):
    n = y.size
    S = np.empty(n + 1)
    S[0] = 0.0
    for i in range(n):
        S[i + 1] = S[i] + y[i]
    lo = np.empty(n + 1)
    hi = np.empty(n + 1)
    lo[0] = hi[0] = 0.0
    lo[n] = hi[n] = S[n]
    for k in range(1, n):
        lo[k] = S[k] - width[k - 1]
        hi[k] = S[k] + width[k - 1]

    x = np.empty(n)
    a = 0
    fa = 0.0
    while a < n:
        s_lo, k_lo = -np.inf, a
        s_hi, k_hi = np.inf, a
        k = a + 1
        bent = False
        while k <= n:
            d = k - a
            su = (hi[k] - fa) / d
            sl = (lo[k] - fa) / d
            if su < s_lo:
                # string bends upward around the lower bound at k_lo
                x[a:k_lo] = s_lo
                a, fa = k_lo, lo[k_lo]
                bent = True
                break
            if sl > s_hi:
                x[a:k_hi] = s_hi
                a, fa = k_hi, hi[k_hi]
                bent = True
                break
            if sl >= s_lo:
                s_lo, k_lo = sl, k
            if su <= s_hi:
                s_hi, k_hi = su, k
            k += 1
        if not bent:
            # the end point is inside the cone, so s_lo == s_hi there
            x[a:n] = (S[n] - fa) / (n - a)
            a = n
    return x


def tv_prox_path(y, alpha: float, weights=None) -> np.ndarray:
    """Prox of (weighted) 1-D total variation by the taut-string method.

    The cumulative sum of the solution is the shortest path through the
    tube ``cumsum(y)[k] +- alpha * w[k-1]`` pinned at both ends; its
    slopes are the output.  Each knot is found by scanning forward from
    the current anchor while the cone of admissible slopes stays
    non-empty, so the cost is linear in practice and quadratic at worst.
    """
    y = _as_signal(y)
    alpha = _check_step(alpha, "alpha")
    n = y.size
    w = _as_weights(weights, n)
    if alpha == 0.0 or n == 1:
        return y.copy()
    width = np.full(n - 1, alpha) if w is None else alpha * w
    return _taut_string(y, width)


def path_laplacian(n: int, weights=None) -> np.ndarray:
    """Dense Laplacian of an ``n``-node chain."""
    w = np.ones(n - 1) if weights is None else np.asarray(weights, dtype=float)
    Lap = np.zeros((n, n))
    k = np.arange(n - 1)
    Lap[k, k] += w
    Lap[k + 1, k + 1] += w
    Lap[k, k + 1] -= w
    Lap[k + 1, k] -= w
    return Lap


@njit(cache=True)
def _thomas(a, b, c, d):
    n = b.size
    cp = np.empty(max(n - 1, 0))
    dp = np.empty(n)
    denom = b[0]
    dp[0] = d[0] / denom
    for i in range(n - 1):
        cp[i] = c[i] / denom
        denom = b[i + 1] - a[i] * cp[i]
        dp[i + 1] = (d[i + 1] - a[i] * dp[i]) / denom
    x = np.empty(n)
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def thomas_solve(lower, diag, upper, rhs) -> np.ndarray:
    """Solve a tridiagonal system without pivoting.

    ``lower[i]`` multiplies ``x[i]`` in row ``i+1``; ``upper[i]`` multiplies
    ``x[i+1]`` in row ``i``.  Requires a diagonally dominant matrix.
    """
    b = np.ascontiguousarray(diag, dtype=float)
    n = b.size
    a = np.ascontiguousarray(lower, dtype=float)
    c = np.ascontiguousarray(upper, dtype=float)
    d = np.ascontiguousarray(rhs, dtype=float)
    if a.shape != (n - 1,) or c.shape != (n - 1,) or d.shape != (n,):
        raise ValueError("inconsistent tridiagonal system shapes")
    return _thomas(a, b, c, d)


@njit(cache=True)
def _laplacian_kernel(y, off):
    # (I + 2 lam Lap) x = y with off[k] = 2 lam w_k
    n = y.size
    diag = np.ones(n)
    for k in range(n - 1):
        diag[k] += off[k]
        diag[k + 1] += off[k]
    neg = -off
    return _thomas(neg, diag, neg, y)


def laplacian_prox_path(y, lam: float, weights=None) -> np.ndarray:
    """Prox of the (weighted) chain Laplacian penalty, Thomas route."""
    y = _as_signal(y)
    lam = _check_step(lam, "lambda")
    n = y.size
    w = _as_weights(weights, n)
    if lam == 0.0 or n == 1:
        return y.copy()
    off = np.full(n - 1, 2.0 * lam) if w is None else 2.0 * lam * w
    return _laplacian_kernel(y, off)


def laplacian_path_eigenvalues(n: int, lam: float) -> np.ndarray:
    """Eigenvalues of ``I + 2 lam Lap`` for the unweighted ``n``-node chain,
    in the order matching the orthonormal DCT-II basis."""
    k = np.arange(n)
    return 1.0 + 4.0 * lam * (1.0 - np.cos(np.pi * k / n))


def laplacian_prox_dct(y, lam: float, weights=None) -> np.ndarray:
    """Prox of the unweighted chain Laplacian penalty, cosine-transform route.

    The chain Laplacian is diagonalized by the DCT-II, so the solve is two
    transforms and a pointwise division.
    """
    if weights is not None:
        raise NotImplementedError("the DCT route handles unweighted chains only")
    y = _as_signal(y)
    lam = _check_step(lam, "lambda")
    if lam == 0.0 or y.size == 1:
        return y.copy()
    coef = fft.dct(y, type=2, norm="ortho")
    coef /= laplacian_path_eigenvalues(y.size, lam)
    return fft.idct(coef, type=2, norm="ortho")
