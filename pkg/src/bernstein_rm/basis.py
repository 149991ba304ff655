"""Bernstein basis polynomials and the empirical distribution function.

``b_k(m, x)`` is the binomial probability mass ``P(Bin(m, x) = k)``, so the
basis is evaluated with ``scipy.stats.binom.pmf``. That routine works in log
space with a saddle-point correction and needs no explicit binomial
coefficient, so orders of 10^4 and beyond evaluate without overflow; rows sum
to one within about 1e-14. The endpoints ``x = 0`` and ``x = 1`` are set
exactly, and points above 1/2 are reflected so that the mirror identity
``b_k(m, x) = b_{m-k}(m, 1 - x)`` holds bit for bit.
"""

import numpy as np
from scipy.stats import binom

__all__ = [
    "BernsteinBasis",
    "EmpiricalCdf",
    "bin_edges",
    "bin_index",
    "basis_matrix",
    "ecdf_eval",
    "eval_basis",
    "eval_basis_row",
]


def _check_order(m):
    if int(m) != m or m < 0:
        raise ValueError(f"order must be a nonnegative integer, got {m!r}")
    return int(m)


def _check_unit(x):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any((x < 0.0) | (x > 1.0)):
        raise ValueError("x must lie in [0, 1]")
    return x


def eval_basis(m, k, x):
    """Evaluate ``b_k(m, x) = C(m, k) x^k (1 - x)^(m - k)``.

    ``k`` and ``x`` may be arrays; they broadcast against each other.

    Raises
    ------
    ValueError
        If ``k`` is outside ``0..m`` or ``x`` outside ``[0, 1]``.
    """
    m = _check_order(m)
    k_arr = np.asarray(k)
    if np.any(k_arr != np.floor(k_arr)) or np.any((k_arr < 0) | (k_arr > m)):
        raise ValueError(f"k must be an integer in [0, {m}]")
    x = _check_unit(x)
    k_arr, x = np.broadcast_arrays(k_arr.astype(float), x)
    out = np.zeros(x.shape)
    inner = (x > 0.0) & (x < 1.0)
    # b_k(m, x) = b_{m-k}(m, 1-x): evaluate with the argument in [0, 1/2] so the
    # two sides of the mirror take identical code paths
    low = inner & (x <= 0.5)
    high = inner & (x > 0.5)
    out[low] = binom.pmf(k_arr[low], m, x[low])
    out[high] = binom.pmf(m - k_arr[high], m, 1.0 - x[high])
    out[(x == 0.0) & (k_arr == 0)] = 1.0
    out[(x == 1.0) & (k_arr == m)] = 1.0
    return out[()] if out.ndim == 0 else out


def basis_matrix(m, x):
    """All basis polynomials of order ``m`` at the points ``x``.

    Returns an array of shape ``(m + 1, len(x))`` whose row ``k`` holds
    ``b_k(m, x)``.
    """
    m = _check_order(m)
    x = np.atleast_1d(_check_unit(x))
    k = np.arange(m + 1, dtype=float)[:, None]
    return eval_basis(m, k, x[None, :])


def eval_basis_row(m, x):
    """Vector ``[b_0(m, x), ..., b_m(m, x)]`` at a single point."""
    if np.ndim(x) != 0:
        raise ValueError("eval_basis_row takes a scalar x; use basis_matrix for arrays")
    return basis_matrix(m, [x])[:, 0]


class BernsteinBasis:
    """Degree-``m`` Bernstein basis on [0, 1]."""

    def __init__(self, order):
        order = _check_order(order)
        if order < 1:
            raise ValueError("order must be at least 1")
        self.order = order

    def __call__(self, k, x):
        return eval_basis(self.order, k, x)

    def row(self, x):
        return eval_basis_row(self.order, x)

    def matrix(self, x):
        return basis_matrix(self.order, x)

    def __repr__(self):
        return f"BernsteinBasis(order={self.order})"


def bin_edges(m):
    """Bin edges ``0, 1/m, ..., 1`` shared by every order-``m`` estimator."""
    return np.arange(m + 1) / m


def bin_index(m, obs):
    """Index ``k`` of the half-open bin ``(k/m, (k+1)/m]`` holding ``obs``.

    ``obs = 0`` goes to bin 0 and ``obs = 1`` to bin ``m - 1``. The edges
    are the same floats used when the empirical CDF is read at ``k/m``, so
    bin counts and CDF increments always agree.
    """
    m = _check_order(m)
    if m < 1:
        raise ValueError("order must be at least 1")
    obs = np.asarray(obs, dtype=float)
    k = np.searchsorted(bin_edges(m), obs, side="left") - 1
    return np.clip(k, 0, m - 1)


class EmpiricalCdf:
    """Right-continuous empirical distribution function of a sample.

    Ties are allowed; ``F_n(t)`` is the fraction of observations ``<= t``.
    """

    def __init__(self, observations):
        obs = np.sort(np.asarray(observations, dtype=float).ravel())
        if obs.size == 0:
            raise ValueError("empirical CDF needs at least one observation")
        self.sorted = obs
        self.sorted.setflags(write=False)
        self.n = obs.size

    def __call__(self, t):
        counts = np.searchsorted(self.sorted, t, side="right")
        return counts / self.n

    def __repr__(self):
        return f"EmpiricalCdf(n={self.n})"


def ecdf_eval(cdf, t):
    return cdf(t)
