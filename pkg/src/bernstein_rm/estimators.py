"""Bernstein density estimators on [0, 1].

Six estimators share one evaluation interface (``estimate(x)``):

* :class:`RecursiveEstimator`: the stochastic-approximation estimator
  ``f_n = (1 - gamma_n) f_{n-1} + gamma_n Z_n`` with
  ``Z_n = 2 T_{n, m_n} - T_{n, m_n / 2}``, updated one observation at a time.
* :class:`VitaleEstimator`: the derivative of the Bernstein-smoothed
  empirical CDF.
* :class:`GeneralizedEstimator`: the additive bias correction
  ``b/(b-1) f_m - 1/(b-1) f_{m/b}``; ``b = 2`` is Leblanc's estimator.
* :class:`MultiplicativeEstimator` and :class:`NormalizedEstimator`:
  the multiplicative bias correction and its renormalised version.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .basis import EmpiricalCdf, basis_matrix, bin_edges, bin_index, eval_basis
from .quadrature import DEFAULT_NODES, gauss_legendre, integrate, nodes_for_degree
from .schedules import OrderSchedule, PiProduct, StepsizeSchedule

__all__ = [
    "BatchKind",
    "GaussianKDE",
    "GeneralizedEstimator",
    "MultiplicativeEstimator",
    "NormalizedEstimator",
    "RecursiveEstimator",
    "Sample",
    "TruncatedEstimate",
    "VitaleEstimator",
    "default_grid",
    "leblanc",
    "make_estimator",
    "t_kernel",
    "truncate_renormalize",
    "z_kernel",
    "z_kernel_matrix",
]

DEFAULT_EPS = 1e-5
DEFAULT_B = 2


@dataclass(frozen=True)
class Sample:
    """Observations on [0, 1] and the support transform that produced them."""

    values: np.ndarray
    transform: object = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if np.any(~np.isfinite(v)) or np.any((v < 0.0) | (v > 1.0)):
            raise ValueError(
                "observations must lie in [0, 1]; map the data with a support transform first"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


def _as_values(sample):
    if isinstance(sample, Sample):
        return sample.values
    return Sample(sample).values


def _check_obs(obs):
    obs = float(obs)
    if not 0.0 <= obs <= 1.0:
        raise ValueError(
            f"observation {obs!r} lies outside [0, 1]; apply a support transform first"
        )
    return obs


def t_kernel(x, obs, m):
    """``m * b_k(m - 1, x)`` where ``k`` is the order-``m`` bin of ``obs``."""
    if int(m) != m or m < 1:
        raise ValueError("order must be a positive integer")
    m = int(m)
    k = bin_index(m, _check_obs(obs))
    return m * eval_basis(m - 1, k, x)


def z_kernel(x, obs, m):
    """``2 T_m(x) - T_{m/2}(x)`` for an even order ``m``; may be negative."""
    if int(m) != m or m < 2 or m % 2:
        raise ValueError(f"z_kernel needs an even order >= 2, got {m!r}")
    m = int(m)
    return 2.0 * t_kernel(x, obs, m) - t_kernel(x, obs, m // 2)


def z_kernel_matrix(x, obs, orders):
    """Rows ``Z_i(x)`` for observations ``obs[i]`` at orders ``orders[i]``.

    Returns shape ``(len(obs), len(x))``. Observations sharing an order
    reuse one basis matrix.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    obs = np.asarray(obs, dtype=float)
    orders = np.broadcast_to(np.asarray(orders, dtype=int), obs.shape)
    out = np.empty((obs.size, x.size))
    for m in np.unique(orders):
        if m < 2 or m % 2:
            raise ValueError(f"orders must be even and >= 2, got {m}")
        sel = np.flatnonzero(orders == m)
        full = basis_matrix(m - 1, x)
        half = basis_matrix(m // 2 - 1, x)
        out[sel] = 2.0 * m * full[bin_index(m, obs[sel])] - 0.5 * m * half[
            bin_index(m // 2, obs[sel])
        ]
    return out


def default_grid(nodes=DEFAULT_NODES):
    """Gauss-Legendre nodes on [0, 1] plus both endpoints, and matching weights.

    Endpoint weights are zero, so ``weights @ values`` integrates any
    polynomial of degree below ``2 * nodes`` exactly.
    """
    x, w = gauss_legendre(nodes)
    grid = np.concatenate(([0.0], x, [1.0]))
    weights = np.concatenate(([0.0], w, [0.0]))
    return grid, weights


class RecursiveEstimator:
    """Recursive Bernstein estimator tracked on a fixed grid.

    Each :meth:`update` costs ``O(len(grid))`` and never revisits past
    observations. Between grid points the estimate is linearly
    interpolated; at grid points it is exact. Values may be negative.

    Parameters
    ----------
    stepsize : StepsizeSchedule
        Gains ``gamma_n``.
    orders : OrderSchedule or int
        Order sequence ``m_n``; an int fixes a constant even order.
    grid : array-like, optional
        Strictly increasing abscissas in [0, 1]. Defaults to 512
        Gauss-Legendre nodes plus the endpoints, which makes
        :meth:`integral` exact for orders up to 512.
    """

    def __init__(self, stepsize=None, orders=None, grid=None):
        self.stepsize = StepsizeSchedule() if stepsize is None else stepsize
        if orders is None:
            raise ValueError("an order schedule is required")
        if isinstance(orders, (int, np.integer)):
            if orders < 2 or orders % 2:
                raise ValueError("constant order must be even and >= 2")
            orders = OrderSchedule(float(orders), 0.0)
        self.orders = orders
        if grid is None:
            self.grid, self.weights = default_grid()
        else:
            g = np.array(grid, dtype=float).ravel()
            if g.size == 0 or np.any(np.diff(g) <= 0) or g[0] < 0 or g[-1] > 1:
                raise ValueError("grid must be strictly increasing inside [0, 1]")
            self.grid = g
            self.weights = None
        self.grid.setflags(write=False)
        self._cache = {}
        self.reset()

    def _basis(self, m):
        # order-(m-1) basis on the grid, built once per distinct order
        B = self._cache.get(m)
        if B is None:
            B = self._cache[m] = basis_matrix(m - 1, self.grid)
        return B

    def reset(self):
        self.values = np.zeros(self.grid.size)
        self.n = 0
        self.pi = PiProduct()
        return self

    def update(self, obs, order=None):
        """Consume one observation. ``order`` overrides ``m_n`` for this step."""
        obs = _check_obs(obs)
        n = self.n + 1
        gamma = self.stepsize(n)
        m = self.orders(n) if order is None else int(order)
        if m < 2 or m % 2:
            raise ValueError(f"orders must be even and >= 2, got {m}")
        full = self._basis(m)[bin_index(m, obs)]
        half = self._basis(m // 2)[bin_index(m // 2, obs)]
        self.values *= 1.0 - gamma
        self.values += gamma * (2.0 * m * full - 0.5 * m * half)
        self.pi.update(gamma)
        self.n = n
        return self

    def update_many(self, observations, orders=None):
        observations = np.asarray(observations, dtype=float).ravel()
        if orders is None:
            for obs in observations:
                self.update(obs)
        else:
            for obs, m in zip(observations, orders):
                self.update(obs, order=m)
        return self

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any((x < 0.0) | (x > 1.0)):
            raise ValueError("x must lie in [0, 1]")
        return np.interp(x, self.grid, self.values)

    def integral(self):
        """``int_0^1 f_n``; exact on the default grid, trapezoidal otherwise."""
        if self.weights is not None:
            return float(self.weights @ self.values)
        return float(np.trapezoid(self.values, self.grid))

    @property
    def mass_deficit(self):
        """``Pi_n``: the recursion's mass is exactly ``1 - Pi_n``."""
        return self.pi.value


class VitaleEstimator:
    """``m * sum_k [F_n((k+1)/m) - F_n(k/m)] b_k(m - 1, x)``; nonnegative."""

    def __init__(self, sample, m):
        if int(m) != m or m < 1:
            raise ValueError("order must be a positive integer")
        self.m = int(m)
        self.cdf = EmpiricalCdf(_as_values(sample))
        levels = self.cdf(bin_edges(self.m))
        # read the left edge as F(0-) = 0 so observations at exactly 0 keep their mass
        levels[0] = 0.0
        self.weights = np.diff(levels)

    @property
    def n(self):
        return self.cdf.n

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = self.m * (self.weights @ basis_matrix(self.m - 1, flat))
        return out.reshape(x.shape)

    def integral(self):
        return 1.0

    def squared_integral(self):
        """Exact ``int_0^1 f^2`` (the estimate is a polynomial)."""
        return _poly_squared_integral(self, self.m)


def _poly_squared_integral(estimate, order):
    xq, wq = gauss_legendre(nodes_for_degree(2 * order))
    return float(wq @ estimate(xq) ** 2)


def _check_divisible(m, b):
    if int(b) != b or b < 2:
        raise ValueError("b must be an integer >= 2")
    if int(m) != m or m < b or m % b:
        raise ValueError(f"order m={m} must be a positive multiple of b={b}")
    return int(m), int(b)


class GeneralizedEstimator:
    """``b/(b-1) f_m(x) - 1/(b-1) f_{m/b}(x)`` from two Vitale estimators."""

    def __init__(self, sample, m, b=DEFAULT_B):
        self.m, self.b = _check_divisible(m, b)
        values = _as_values(sample)
        self.full = VitaleEstimator(values, self.m)
        self.coarse = VitaleEstimator(values, self.m // self.b)

    @property
    def n(self):
        return self.full.n

    def __call__(self, x):
        b = self.b
        return (b * self.full(x) - self.coarse(x)) / (b - 1)

    def integral(self):
        return 1.0

    def squared_integral(self):
        return _poly_squared_integral(self, self.m)


def leblanc(sample, m):
    """``2 f_m - f_{m/2}``, the ``b = 2`` generalized estimator."""
    return GeneralizedEstimator(sample, m, b=2)


class MultiplicativeEstimator:
    """``f_m(x)^(b/(b-1)) * (f_{m/b}(x) + eps)^(-1/(b-1))``; nonnegative.

    Does not integrate to one in general.
    """

    def __init__(self, sample, m, b=DEFAULT_B, eps=DEFAULT_EPS):
        self.m, self.b = _check_divisible(m, b)
        if not eps > 0:
            raise ValueError("eps must be positive")
        self.eps = float(eps)
        values = _as_values(sample)
        self.full = VitaleEstimator(values, self.m)
        self.coarse = VitaleEstimator(values, self.m // self.b)

    @property
    def n(self):
        return self.full.n

    def __call__(self, x):
        b = self.b
        # clip guards against -0.0 from rounding, which would turn a zero power into nan
        fine = np.maximum(self.full(x), 0.0)
        return fine ** (b / (b - 1.0)) * (self.coarse(x) + self.eps) ** (-1.0 / (b - 1.0))

    def integral(self, nodes=DEFAULT_NODES):
        return integrate(self, nodes)


class NormalizedEstimator:
    """Multiplicative estimator divided by its integral over [0, 1]."""

    def __init__(self, sample, m, b=DEFAULT_B, eps=DEFAULT_EPS, nodes=DEFAULT_NODES):
        self.raw = MultiplicativeEstimator(sample, m, b=b, eps=eps)
        self.m, self.b, self.eps = self.raw.m, self.raw.b, self.raw.eps
        self.total = self.raw.integral(nodes)
        if not self.total > 0:
            raise ValueError("multiplicative estimate has zero mass; cannot normalise")

    @property
    def n(self):
        return self.raw.n

    def __call__(self, x):
        return self.raw(x) / self.total

    def integral(self):
        return 1.0


class BatchKind(enum.Enum):
    VITALE = "vitale"
    LEBLANC = "leblanc"
    GENERALIZED = "generalized"
    MULTIPLICATIVE = "multiplicative"
    NORMALIZED = "normalized"


def make_estimator(kind, sample, m, b=DEFAULT_B, eps=DEFAULT_EPS):
    """Build a batch estimator by kind name."""
    kind = BatchKind(kind)
    if kind is BatchKind.VITALE:
        return VitaleEstimator(sample, m)
    if kind is BatchKind.LEBLANC:
        return GeneralizedEstimator(sample, m, b=2)
    if kind is BatchKind.GENERALIZED:
        return GeneralizedEstimator(sample, m, b=b)
    if kind is BatchKind.MULTIPLICATIVE:
        return MultiplicativeEstimator(sample, m, b=b, eps=eps)
    return NormalizedEstimator(sample, m, b=b, eps=eps)


class TruncatedEstimate:
    """``max(f, 0)`` rescaled to unit mass over [0, 1]."""

    def __init__(self, estimate, nodes=DEFAULT_NODES):
        self.estimate = estimate
        self.total = integrate(lambda x: np.maximum(estimate(x), 0.0), nodes)
        if not self.total > 0:
            raise ValueError("estimate has no positive mass")

    def __call__(self, x):
        return np.maximum(self.estimate(x), 0.0) / self.total


def truncate_renormalize(estimate, nodes=DEFAULT_NODES):
    """Post-hoc fix for signed estimates such as the recursive one."""
    return TruncatedEstimate(estimate, nodes)


class GaussianKDE:
    """Fixed-bandwidth Gaussian kernel density estimate, for visual comparison."""

    def __init__(self, data, h):
        if not h > 0:
            raise ValueError("bandwidth must be positive")
        self.data = np.asarray(data, dtype=float).ravel()
        self.h = float(h)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        u = (x[..., None] - self.data) / self.h
        return np.exp(-0.5 * u**2).sum(axis=-1) / (self.data.size * self.h * np.sqrt(2 * np.pi))
