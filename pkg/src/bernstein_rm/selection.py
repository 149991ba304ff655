"""Least-squares cross-validation for the order of each estimator.

``LSCV(m) = int f^2 - (2/n) sum_i f_{-i}(X_i)`` where ``f_{-i}`` is the
estimate built without ``X_i``. Vitale, generalized and recursive (with
``gamma_n = 1/n``) estimators have closed leave-one-out forms; everything
else is refitted ``n`` times per candidate.

Default candidate grids: even ``m`` in ``[2, 2n]`` for the batch kinds
(multiples of ``b`` for the generalized family), and exponents
``a = 0.10, 0.11, ..., 0.99`` with unit constant for the recursive kind.
"""

from dataclasses import dataclass

import numpy as np

from .basis import basis_matrix, bin_index
from .estimators import (
    GeneralizedEstimator,
    RecursiveEstimator,
    VitaleEstimator,
    _as_values,
    z_kernel_matrix,
)
from .quadrature import gauss_legendre, nodes_for_degree
from .schedules import OrderSchedule, StepsizeSchedule

__all__ = [
    "LscvResult",
    "default_batch_candidates",
    "default_exponent_candidates",
    "lscv_generalized",
    "lscv_generalized_naive",
    "lscv_generic",
    "lscv_recursive",
    "lscv_recursive_naive",
    "lscv_vitale",
    "lscv_vitale_naive",
    "recursive_weights",
]


@dataclass(frozen=True)
class LscvResult:
    candidates: tuple
    scores: tuple
    argmin: object

    @classmethod
    def from_scores(cls, candidates, scores):
        scores = np.asarray(scores, dtype=float)
        if not np.all(np.isfinite(scores)):
            bad = [c for c, s in zip(candidates, scores) if not np.isfinite(s)]
            raise FloatingPointError(f"non-finite LSCV score for candidates {bad}")
        best = scores.min()
        # ties go to the smallest candidate, whatever order they were given in
        argmin = min(c for c, s in zip(candidates, scores) if s == best)
        return cls(tuple(candidates), tuple(float(s) for s in scores), argmin)

    def as_dict(self):
        return {"candidates": list(self.candidates), "scores": list(self.scores), "argmin": self.argmin}


def _values(sample):
    x = _as_values(sample)
    if x.size < 2:
        raise ValueError("LSCV needs at least 2 observations")
    return x


def default_batch_candidates(n, step=2):
    return list(range(step, 2 * n + 1, step))


def default_exponent_candidates():
    return [round(a, 2) for a in np.arange(0.10, 0.995, 0.01)]


def _check_candidates(candidates, step=1):
    out = []
    for m in candidates:
        if int(m) != m or m < 1:
            raise ValueError(f"candidate order {m!r} is not a positive integer")
        if m % step:
            raise ValueError(f"candidate order {m} is not divisible by b={step}")
        out.append(int(m))
    if not out:
        raise ValueError("no candidates given")
    return out


def _squared_integral(values_at, degree):
    xq, wq = gauss_legendre(nodes_for_degree(degree))
    return float(wq @ values_at(xq) ** 2)


def _kernel_at_obs(x, m):
    """``m b_{k_i}(m - 1, X_i)`` for every observation."""
    B = basis_matrix(m - 1, x)
    return m * B[bin_index(m, x), np.arange(x.size)]


def lscv_vitale(sample, candidates=None):
    x = _values(sample)
    n = x.size
    candidates = _check_candidates(default_batch_candidates(n) if candidates is None else candidates)
    scores = []
    for m in candidates:
        est = VitaleEstimator(x, m)
        at_obs = est(x)
        scores.append(est.squared_integral() - 2.0 / (n - 1) * (at_obs.sum() - _kernel_at_obs(x, m).sum() / n))
    return LscvResult.from_scores(candidates, scores)


def lscv_generalized(sample, b=2, candidates=None):
    x = _values(sample)
    n = x.size
    b = int(b)
    candidates = _check_candidates(default_batch_candidates(n, b) if candidates is None else candidates, b)
    scores = []
    for m in candidates:
        est = GeneralizedEstimator(x, m, b=b)
        own = (b * _kernel_at_obs(x, m) - _kernel_at_obs(x, m // b)) / (b - 1)
        scores.append(est.squared_integral() - 2.0 / (n - 1) * (est(x).sum() - own.sum() / n))
    return LscvResult.from_scores(candidates, scores)


def lscv_generic(sample, factory, candidates, nodes=None):
    """Plain leave-one-out: ``factory(values, m)`` is refitted ``n`` times per candidate.

    ``int f^2`` uses the estimate's own ``squared_integral`` when it has
    one, otherwise Gauss-Legendre with enough nodes for degree ``2 m``.
    """
    x = _values(sample)
    n = x.size
    candidates = list(candidates)
    if not candidates:
        raise ValueError("no candidates given")
    scores = []
    for m in candidates:
        full = factory(x, m)
        if hasattr(full, "squared_integral"):
            sq = full.squared_integral()
        else:
            sq = _squared_integral(full, 2 * int(m) if nodes is None else 2 * nodes - 1)
        loo = sum(float(factory(np.delete(x, i), m)(x[i])) for i in range(n))
        scores.append(sq - 2.0 / n * loo)
    return LscvResult.from_scores(candidates, scores)


def lscv_vitale_naive(sample, candidates):
    return lscv_generic(sample, VitaleEstimator, candidates)


def lscv_generalized_naive(sample, b, candidates):
    return lscv_generic(sample, lambda v, m: GeneralizedEstimator(v, m, b=b), candidates)


def recursive_weights(stepsize, n):
    """Weights ``w_j`` with ``f_n = sum_j w_j Z_j``: ``gamma_j prod_{k>j} (1 - gamma_k)``."""
    g = stepsize.values(n)
    tail = np.concatenate((np.cumprod((1.0 - g)[::-1])[::-1][1:], [1.0]))
    return g * tail


def _exponent_orders(a, n, c=1.0):
    return OrderSchedule(c, a).values(n)


def _recursive_pieces(x, stepsize, orders):
    n = x.size
    w = recursive_weights(stepsize, n)
    Z = z_kernel_matrix(x, x, orders)  # Z[j, i] = Z_j(X_i)
    xq, wq = gauss_legendre(nodes_for_degree(2 * int(orders.max())))
    fq = w @ z_kernel_matrix(xq, x, orders)
    return w, Z, float(wq @ fq**2)


def _is_harmonic(stepsize):
    return stepsize.gamma0 == 1.0 and stepsize.alpha == 1.0


def lscv_recursive(sample, stepsize=None, candidates=None, c=1.0, method="auto"):
    """LSCV over order schedules ``m_i = c i^a`` (rounded to even) for the recursive estimator.

    With ``gamma_n = 1/n`` the estimate is a plain average of ``Z`` kernels,
    so deleting ``X_i`` gives ``(n f_n - Z_i) / (n - 1)`` and the closed form
    is exact. Other stepsizes have no such identity and are refitted
    (``method="auto"``); ``method="closed"`` forces the closed formula
    regardless, ``method="naive"`` always refits.
    """
    stepsize = StepsizeSchedule() if stepsize is None else stepsize
    x = _values(sample)
    n = x.size
    candidates = default_exponent_candidates() if candidates is None else list(candidates)
    if not candidates:
        raise ValueError("no candidates given")
    if method not in ("auto", "closed", "naive"):
        raise ValueError("method must be 'auto', 'closed' or 'naive'")
    closed = method == "closed" or (method == "auto" and _is_harmonic(stepsize))
    scores = []
    for a in candidates:
        orders = _exponent_orders(a, n, c)
        w, Z, sq = _recursive_pieces(x, stepsize, orders)
        if closed:
            at_obs = w @ Z
            scores.append(sq - 2.0 / (n - 1) * (at_obs.sum() - np.trace(Z) / n))
        else:
            scores.append(sq - 2.0 / n * _deleted_sum(Z, recursive_weights(stepsize, n - 1)))
    return LscvResult.from_scores(candidates, scores)


def _deleted_sum(Z, w_short):
    """``sum_i f_{-i}(X_i)`` where ``f_{-i}`` reruns the recursion without ``X_i``.

    The remaining points keep their original order and their original
    ``m_j``; the stepsizes are re-indexed ``1..n-1``.
    """
    n = Z.shape[0]
    total = 0.0
    for i in range(n):
        w = np.insert(w_short, i, 0.0)
        total += w @ Z[:, i]
    return float(total)


def lscv_recursive_naive(sample, stepsize=None, candidates=None, c=1.0):
    """Reference implementation: literally rerun the recursion ``n`` times per candidate."""
    stepsize = StepsizeSchedule() if stepsize is None else stepsize
    x = _values(sample)
    n = x.size
    scores = []
    for a in candidates:
        orders = _exponent_orders(a, n, c)
        w = recursive_weights(stepsize, n)
        xq, wq = gauss_legendre(nodes_for_degree(2 * int(orders.max())))
        sq = float(wq @ (w @ z_kernel_matrix(xq, x, orders)) ** 2)
        loo = 0.0
        for i in range(n):
            keep = np.arange(n) != i
            est = RecursiveEstimator(stepsize, OrderSchedule(c, a), grid=x[i : i + 1])
            est.update_many(x[keep], orders[keep])
            loo += float(est.values[0])
        scores.append(sq - 2.0 / n * loo)
    return LscvResult.from_scores(list(candidates), scores)
