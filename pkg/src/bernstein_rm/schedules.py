"""Stepsize and order sequences for the recursive estimator."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "EDGE_EXPONENT",
    "INTERIOR_EXPONENT",
    "STEPSIZE_PRESETS",
    "OrderSchedule",
    "PiProduct",
    "StepsizeSchedule",
    "assumption_diagnostic",
    "gamma_at",
    "gs_exponent_diagnostic",
    "optimal_order_constant",
    "optimal_order_schedule",
    "order_at",
    "pi_closed_form",
    "round_to_multiple",
    "stepsize_preset",
]

INTERIOR_EXPONENT = 2.0 / 9.0
EDGE_EXPONENT = 1.0 / 5.0


def _check_index(n):
    if int(n) != n or n < 1:
        raise ValueError(f"sequence index must be a positive integer, got {n!r}")
    return int(n)


def round_to_multiple(value, step, minimum=None):
    """Nearest multiple of ``step`` to ``value``, halves rounded up."""
    minimum = step if minimum is None else minimum
    rounded = int(math.floor(value / step + 0.5)) * step
    return max(int(minimum), rounded)


@dataclass(frozen=True)
class StepsizeSchedule:
    """Stepsizes ``gamma_n = min(1, gamma0 * n**(-alpha))``.

    The clamp at 1 only matters for ``gamma0 > 1``; with ``gamma0 = 1`` the
    first step is exactly 1, which wipes the zero initial state so that
    ``f_1 = Z_1``.
    """

    gamma0: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        if not self.gamma0 > 0:
            raise ValueError("gamma0 must be positive")
        if not 0.5 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (1/2, 1]")

    @property
    def xi(self):
        """``lim (n gamma_n)^(-1)``: ``1/gamma0`` when ``alpha = 1``, else 0."""
        return 1.0 / self.gamma0 if self.alpha == 1.0 else 0.0

    def __call__(self, n):
        return gamma_at(self, n)

    def values(self, n):
        """``gamma_1..gamma_n`` as an array."""
        k = np.arange(1, n + 1, dtype=float)
        return np.minimum(1.0, self.gamma0 * k ** (-self.alpha))


def gamma_at(s, n):
    n = _check_index(n)
    return min(1.0, s.gamma0 * n ** (-s.alpha))


STEPSIZE_PRESETS = {
    "r1": StepsizeSchedule(1.0),
    "r2": StepsizeSchedule(8.0 / 9.0),
    "r3": StepsizeSchedule(4.0 / 5.0),
}


def stepsize_preset(name):
    try:
        return STEPSIZE_PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown stepsize preset {name!r}; choose from {sorted(STEPSIZE_PRESETS)}"
        ) from None


@dataclass(frozen=True)
class OrderSchedule:
    """Orders ``m_n``: ``c * n**a`` rounded to the nearest even integer, at least 2.

    The recursive estimator uses ``m_n`` and ``m_n / 2`` at step ``n``, so
    the order must be even. ``a = 0`` gives a constant order, which is handy
    for checks against a plain running average.
    """

    c: float
    a: float
    parity: str = "force-even"

    def __post_init__(self):
        if not self.c >= 0:
            raise ValueError("order constant c must be nonnegative")
        if not 0.0 <= self.a < 1.0:
            raise ValueError("order exponent a must lie in [0, 1)")
        if self.parity != "force-even":
            raise ValueError("only the 'force-even' parity rule is supported")

    def __call__(self, n):
        return order_at(self, n)

    def values(self, n):
        return np.array([order_at(self, k) for k in range(1, n + 1)], dtype=int)


def order_at(o, n):
    n = _check_index(n)
    return round_to_multiple(o.c * n**o.a, 2, minimum=2)


class PiProduct:
    """Running product ``Pi_n = prod_{j<=n} (1 - gamma_j)``, with ``Pi_0 = 1``."""

    def __init__(self):
        self.value = 1.0
        self.n = 0

    def update(self, gamma):
        self.value *= 1.0 - gamma
        self.n += 1
        return self.value

    def __repr__(self):
        return f"PiProduct(n={self.n}, value={self.value!r})"


def pi_closed_form(gamma0, n):
    """``prod_{j=1}^n (1 - gamma0 / j)`` through Gamma functions, ``0 < gamma0 < 1``."""
    if not 0.0 < gamma0 < 1.0:
        raise ValueError("closed form needs 0 < gamma0 < 1")
    return float(np.exp(gammaln(n + 1.0 - gamma0) - gammaln(n + 1.0) - gammaln(1.0 - gamma0)))


def optimal_order_constant(tc, s):
    """Leading constant of the MISE-optimal order schedule ``c * n**(2/9)``.

    ``tc`` is anything with ``C1``, ``C2`` and ``C3`` attributes (normally a
    :class:`~bernstein_rm.asymptotics.TheoryConstants`).
    """
    if s.alpha != 1.0:
        raise ValueError("optimal order constant is defined for alpha = 1 stepsizes")
    if not s.gamma0 > 4.0 / 9.0:
        raise ValueError("optimal order needs gamma0 > 4/9")
    ratio = 32.0 * tc.C2 / (tc.C1 * tc.C3)
    return 2.0 ** (2.0 / 9.0) * (s.gamma0 - 4.0 / 9.0) ** (-2.0 / 9.0) * ratio ** (2.0 / 9.0)


def optimal_order_schedule(tc, s):
    return OrderSchedule(optimal_order_constant(tc, s), INTERIOR_EXPONENT)


def gs_exponent_diagnostic(seq):
    """Numerical estimate ``N (1 - v_{N-1} / v_N)`` of a sequence's GS exponent.

    Only a diagnostic: slowly varying factors such as ``log n`` converge
    to the exponent at a logarithmic rate.
    """
    v = np.asarray(seq, dtype=float)
    if v.size < 10:
        raise ValueError("need at least 10 terms")
    if np.any(v <= 0):
        raise ValueError("sequence terms must be positive")
    N = v.size
    return float(N * (1.0 - v[-2] / v[-1]))


def assumption_diagnostic(s, o):
    """Check the limit of ``n gamma_n`` against two candidate lower bounds.

    The usual bound is ``min(2a, (2 alpha - a)/4)``; a competing form
    ``min(a, (2 alpha + a)/4)`` is also in circulation. Both are reported
    and either violation is flagged. The edge condition and the two positivity
    conditions that the leading terms need are included as well.
    """
    a, alpha, xi = o.a, s.alpha, s.xi
    limit = s.gamma0 if alpha == 1.0 else math.inf
    main = min(2 * a, (2 * alpha - a) / 4)
    alternative = min(a, (2 * alpha + a) / 4)
    edge = min(2 * a, (alpha - a) / 2)
    return {
        "limit_n_gamma": limit,
        "bound_main": main,
        "bound_alternative": alternative,
        "bound_edge": edge,
        "main_ok": limit > main,
        "alternative_ok": limit > alternative,
        "edge_ok": limit > edge,
        "bias_factor_positive": 1 - 2 * a * xi > 0,
        "variance_factor_positive": 4 - (2 * alpha - a) * xi > 0,
    }
