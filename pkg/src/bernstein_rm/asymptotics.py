"""Leading-order theory for the Bernstein estimators.

Everything here is a closed-form function of the true density through a
handful of integrals:

    Delta_1(x) = [(1 - 2x) f'(x) + x(1 - x) f''(x)] / 2
    Delta_2(x) = (1 - 6x(1-x)) f''(x) / 6 + 5 x(1-x)(1-2x) f'''(x) / 12
                 + x^2 (1-x)^2 f''''(x) / 8
    psi(x)     = (4 pi x (1 - x))^(-1/2)

    C1 = int f psi            C2 = int Delta_2^2       C4 = int Delta_1^2
    C5 = int (Delta_2 - Delta_1^2 / (2f))^2
    C6 = int (Delta_2 - Delta_1^2 / (2f) + f * int Delta_1^2 / (2f))^2
    C3 = 1/sqrt(2) + 4 (1 - sqrt(2/3))

MISE expressions are leading terms only; finite-sample averaged ISE is
typically well below them at the sample sizes used in simulations.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .quadrature import DEFAULT_NODES, gauss_legendre, integrate_arcsine
from .schedules import (
    INTERIOR_EXPONENT,
    OrderSchedule,
    StepsizeSchedule,
    optimal_order_constant,
    round_to_multiple,
)

__all__ = [
    "C3",
    "KINDS",
    "QuadratureError",
    "Regime",
    "TheoryConstants",
    "TrueDensity",
    "clt_prediction",
    "delta1",
    "delta2",
    "edge_regime",
    "interior_regime",
    "lambda1",
    "lambda2",
    "optimal_order",
    "pointwise_theory",
    "psi",
    "theoretical_mise",
    "theory_constants",
]

C3 = 1.0 / math.sqrt(2.0) + 4.0 * (1.0 - math.sqrt(2.0 / 3.0))

KINDS = ("recursive", "vitale", "leblanc", "generalized", "multiplicative", "normalized")


class QuadratureError(RuntimeError):
    pass


def _fd_weights(offsets, order):
    # Taylor-matching weights: sum_j w_j o_j^p / p! = [p == order]
    offsets = np.asarray(offsets, dtype=float)
    p = np.arange(offsets.size)
    vander = offsets[None, :] ** p[:, None] / np.array([math.factorial(i) for i in p])[:, None]
    rhs = (p == order).astype(float)
    return np.linalg.solve(vander, rhs)


# Step ladder for the 9-point stencils: FD_MAX_STEP / FD_RATIO**j, j < FD_LEVELS.
# No single step suits every density (roundoff ~ eps |f| / h^k against
# truncation ~ h^8 f^(k+8)), so each point keeps the estimate where two
# neighbouring rungs agree best.
FD_MAX_STEP = 0.06
FD_RATIO = 1.3
FD_LEVELS = 14
_FD_HALF_WIDTH = 4


def _stencil(func, x, order, h):
    span = _FD_HALF_WIDTH * h
    base = np.arange(-_FD_HALF_WIDTH, _FD_HALF_WIDTH + 1, dtype=float)
    out = np.empty_like(x)
    shifts = np.zeros_like(x)
    shifts = np.where(x - span < 0, np.ceil((span - x) / h), shifts)
    shifts = np.where(x + span > 1, -np.ceil((x + span - 1) / h), shifts)
    for s in np.unique(shifts):
        sel = shifts == s
        offsets = base + s
        w = _fd_weights(offsets, order)
        pts = x[sel][:, None] + offsets[None, :] * h
        out[sel] = (func(np.clip(pts, 0.0, 1.0)) @ w) / h**order
    return out


def finite_difference(func, x, order):
    """Derivative of ``func`` of the given order by 9-point stencils.

    Stencils are centred in the interior and shifted to stay inside
    [0, 1] near the endpoints. The step is picked per point from a
    geometric ladder: of each pair of neighbouring steps, the pair whose
    estimates differ least wins and its smaller-step estimate is returned.
    """
    if order == 0:
        return func(x)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    steps = FD_MAX_STEP / FD_RATIO ** np.arange(FD_LEVELS)
    ladder = np.array([_stencil(func, x, order, h) for h in steps])
    best = np.argmin(np.abs(np.diff(ladder, axis=0)), axis=0)
    return ladder[best + 1, np.arange(x.size)]


class TrueDensity:
    """A density on [0, 1] with its first four derivatives.

    Parameters
    ----------
    pdf : callable
        Vectorised density.
    derivatives : sequence of callables, optional
        ``f', f'', f''', f''''``. Missing derivatives fall back to
        finite differences of ``pdf``.
    name : str
    """

    def __init__(self, pdf, derivatives=None, name=""):
        self.pdf = pdf
        self.name = name
        derivatives = list(derivatives or [])
        if len(derivatives) > 4:
            raise ValueError("at most four derivatives")
        self._derivatives = derivatives

    def __call__(self, x):
        return self.pdf(x)

    @property
    def analytic_orders(self):
        return len(self._derivatives)

    def derivative(self, order, x):
        if order == 0:
            return self.pdf(x)
        if not 1 <= order <= 4:
            raise ValueError("derivative order must be 0..4")
        if order <= len(self._derivatives):
            return self._derivatives[order - 1](x)
        return finite_difference(self.pdf, x, order)

    def numerical(self):
        """Same pdf with every derivative taken by finite differences."""
        return TrueDensity(self.pdf, name=self.name)


def psi(x):
    x = np.asarray(x, dtype=float)
    return (4.0 * np.pi * x * (1.0 - x)) ** -0.5


def delta1(d, x):
    x = np.asarray(x, dtype=float)
    return 0.5 * ((1 - 2 * x) * d.derivative(1, x) + x * (1 - x) * d.derivative(2, x))


def delta2(d, x):
    x = np.asarray(x, dtype=float)
    s = x * (1 - x)
    return (
        (1 - 6 * s) * d.derivative(2, x) / 6.0
        + 5.0 * s * (1 - 2 * x) * d.derivative(3, x) / 12.0
        + s**2 * d.derivative(4, x) / 8.0
    )


def lambda1(b):
    return (b**2 + b**-0.5 - 2 * b * (2.0 / (b + 1)) ** 0.5) / (1 - b) ** 2


def lambda2(b):
    return (b**2 + 1.0 / b - 2) / (1 - b) ** 2


@dataclass(frozen=True)
class TheoryConstants:
    C1: float
    C2: float
    C4: float
    C5: float
    C6: float
    C3: float = C3
    lambda1_table: dict = field(default_factory=lambda: {b: lambda1(b) for b in range(2, 11)})
    lambda2_table: dict = field(default_factory=lambda: {b: lambda2(b) for b in range(2, 11)})

    @staticmethod
    def lambda1(b):
        return lambda1(b)

    @staticmethod
    def lambda2(b):
        return lambda2(b)

    def as_dict(self):
        return {
            "C1": self.C1,
            "C2": self.C2,
            "C3": self.C3,
            "C4": self.C4,
            "C5": self.C5,
            "C6": self.C6,
            "lambda1": {str(b): v for b, v in self.lambda1_table.items()},
            "lambda2": {str(b): v for b, v in self.lambda2_table.items()},
        }


def _bias_ratio(d, x):
    # Delta_1^2 / (2 f); finite wherever f vanishes to the order the zoo densities do
    f = d.pdf(x)
    d1 = delta1(d, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = d1**2 / (2.0 * f)
    if np.any(~np.isfinite(r)):
        raise QuadratureError("Delta_1^2 / (2 f) is not finite; f vanishes inside (0, 1)")
    return r


def _constants_at(d, nodes):
    x, w = gauss_legendre(nodes)
    f = d.pdf(x)
    d1 = delta1(d, x)
    d2 = delta2(d, x)
    r = _bias_ratio(d, x)
    k = w @ r
    return np.array(
        [
            integrate_arcsine(d.pdf, nodes),
            w @ d2**2,
            w @ d1**2,
            w @ (d2 - r) ** 2,
            w @ (d2 - r + f * k) ** 2,
        ]
    )


def theory_constants(d, nodes=DEFAULT_NODES, rtol=1e-8):
    """Integrals C1..C6 of a true density.

    Each integral is computed with ``nodes`` and ``2 * nodes`` points; a
    disagreement beyond ``rtol`` raises :class:`QuadratureError`.
    """
    coarse = _constants_at(d, nodes)
    fine = _constants_at(d, 2 * nodes)
    bad = ~np.isclose(coarse, fine, rtol=rtol, atol=1e-12)
    if np.any(bad):
        names = np.array(["C1", "C2", "C4", "C5", "C6"])[bad]
        raise QuadratureError(
            f"quadrature did not converge for {', '.join(names)}: "
            f"{coarse[bad]} vs {fine[bad]} with {nodes} and {2 * nodes} nodes"
        )
    C1, C2, C4, C5, C6 = (float(v) for v in fine)
    return TheoryConstants(C1=C1, C2=C2, C4=C4, C5=C5, C6=C6)


class Regime(enum.Enum):
    BIAS = "bias-dominated"
    BALANCED = "balanced"
    VARIANCE = "variance-dominated"


def _regime(a, threshold):
    if math.isclose(a, threshold, rel_tol=1e-9, abs_tol=1e-12):
        return Regime.BALANCED
    return Regime.BIAS if a < threshold else Regime.VARIANCE


def interior_regime(a, alpha):
    """Which leading terms survive for ``x`` in (0, 1): split at ``2 alpha / 9``."""
    return _regime(a, 2.0 * alpha / 9.0)


def edge_regime(a, alpha):
    """Same split for ``x`` in {0, 1}, at ``alpha / 5``."""
    return _regime(a, alpha / 5.0)


def _recursive_params(stepsize, orders, n, m):
    stepsize = StepsizeSchedule() if stepsize is None else stepsize
    gamma = stepsize(n)
    a = INTERIOR_EXPONENT if orders is None else orders.a
    if m is None:
        if orders is None:
            raise ValueError("recursive kind needs an order schedule or an explicit m")
        m = orders(n)
    return stepsize, gamma, a, float(m)


def _need_positive(value, condition):
    if not value > 0:
        raise ValueError(f"outside the formula's validity regime: {condition} (got {value:.6g})")
    return value


def _batch_params(kind, tc, b):
    """(variance factor, bias constant) for the MISE form V C1 m^(1/2)/n + B/m^4."""
    if kind == "leblanc":
        b = 2
    if b < 2 or int(b) != b:
        raise ValueError("b must be an integer >= 2")
    lam = lambda1(b)
    bias = {"leblanc": tc.C2, "generalized": tc.C2, "multiplicative": tc.C5, "normalized": tc.C6}[kind]
    return lam, b**2 * bias


def optimal_order(kind, tc, n, b=2, gamma0=1.0, rounded=True):
    """MISE-optimal order at sample size ``n``.

    Rounded to the nearest multiple of the step each estimator needs: 1 for
    Vitale, 2 for the recursive and Leblanc estimators, ``b`` for the other
    bias-corrected ones. The result is at least 2 (at least ``b`` where
    divisibility is required).
    """
    if kind == "recursive":
        c = optimal_order_constant(tc, StepsizeSchedule(gamma0))
        value = c * n**INTERIOR_EXPONENT
        step = 2
    elif kind == "vitale":
        value = (4 * tc.C4 / tc.C1) ** 0.4 * n**0.4
        step = 1
    elif kind in ("leblanc", "generalized", "multiplicative", "normalized"):
        lam, bias = _batch_params(kind, tc, b)
        value = (8 * bias / (lam * tc.C1)) ** (2.0 / 9.0) * n ** (2.0 / 9.0)
        step = 2 if kind == "leblanc" else int(b)
    else:
        raise ValueError(f"unknown estimator kind {kind!r}")
    if not rounded:
        return value
    return round_to_multiple(value, step, minimum=max(2, step))


def theoretical_mise(kind, tc, n, m=None, *, stepsize=None, orders=None, b=2):
    """Leading-order MISE.

    For batch kinds, ``m=None`` plugs in the unrounded optimal order. For
    the recursive kind, ``m`` defaults to ``orders(n)``; with neither given,
    the optimal schedule for ``stepsize`` is used. The recursive kind
    follows the three regimes of the order exponent around ``2 alpha / 9``.
    """
    if kind == "recursive":
        stepsize = StepsizeSchedule() if stepsize is None else stepsize
        if m is None and orders is None:
            orders = OrderSchedule(optimal_order_constant(tc, stepsize), INTERIOR_EXPONENT)
            m = orders.c * n**orders.a
        stepsize, gamma, a, m = _recursive_params(stepsize, orders, n, m)
        alpha, xi = stepsize.alpha, stepsize.xi
        regime = interior_regime(a, alpha)
        total = 0.0
        if regime is not Regime.VARIANCE:
            factor = _need_positive(1 - 2 * a * xi, "1 - 2 a xi > 0")
            total += tc.C2 * m**-4 * 4.0 / factor**2
        if regime is not Regime.BIAS:
            factor = _need_positive(4 - (2 * alpha - a) * xi, "4 - (2 alpha - a) xi > 0")
            total += tc.C1 * tc.C3 * gamma * m**0.5 * 2.0 / factor
        return total
    if m is None:
        m = optimal_order(kind, tc, n, b=b, rounded=False)
    if kind == "vitale":
        return m**0.5 * tc.C1 / n + tc.C4 / m**2
    lam, bias = _batch_params(kind, tc, b)
    return lam * tc.C1 * m**0.5 / n + bias / m**4


@dataclass(frozen=True)
class PointwiseTheory:
    bias: float
    variance: float
    mse: float


def pointwise_theory(kind, tc, d, x, n, m=None, *, stepsize=None, orders=None, b=2):
    """Leading bias, variance and MSE at one point.

    Terms that are only ``o(.)`` in the active regime are reported as 0.
    Endpoints ``x`` in {0, 1} use the edge expressions.
    """
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    edge = x in (0.0, 1.0)
    f = float(d.pdf(np.array([x]))[0])
    d1 = float(delta1(d, np.array([x]))[0])
    d2 = float(delta2(d, np.array([x]))[0])
    if kind == "recursive":
        stepsize, gamma, a, m = _recursive_params(stepsize, orders, n, m)
        alpha, xi = stepsize.alpha, stepsize.xi
        regime = edge_regime(a, alpha) if edge else interior_regime(a, alpha)
        bias = variance = 0.0
        if regime is not Regime.VARIANCE:
            bias = -(m**-2) * 2.0 * d2 / _need_positive(1 - 2 * a * xi, "1 - 2 a xi > 0")
        if regime is not Regime.BIAS:
            if edge:
                factor = _need_positive(2 - (alpha - a) * xi, "2 - (alpha - a) xi > 0")
                variance = 2.5 * gamma * m * f / factor
            else:
                factor = _need_positive(4 - (2 * alpha - a) * xi, "4 - (2 alpha - a) xi > 0")
                variance = tc.C3 * gamma * m**0.5 * 2.0 / factor * f * float(psi(x))
        return PointwiseTheory(bias, variance, bias**2 + variance)
    if m is None:
        m = optimal_order(kind, tc, n, b=b, rounded=False)
    if kind == "vitale":
        bias = d1 / m
        variance = m * f / n if edge else m**0.5 * f * float(psi(x)) / n
        return PointwiseTheory(bias, variance, bias**2 + variance)
    if kind == "leblanc":
        b = 2
    if kind in ("leblanc", "generalized"):
        core = d2
    elif kind in ("multiplicative", "normalized"):
        if not f > 0:
            raise ValueError("multiplicative bias expansion needs f(x) > 0")
        core = d2 - d1**2 / (2 * f)
        if kind == "normalized":
            xq, wq = gauss_legendre(DEFAULT_NODES)
            core += f * float(wq @ _bias_ratio(d, xq))
    else:
        raise ValueError(f"unknown estimator kind {kind!r}")
    bias = -b / m**2 * core
    if edge:
        variance = lambda2(b) * m * f / n
    else:
        variance = lambda1(b) * m**0.5 * f * float(psi(x)) / n
    return PointwiseTheory(bias, variance, bias**2 + variance)


@dataclass(frozen=True)
class CltPrediction:
    center: float
    std: float
    c: float

    @property
    def variance(self):
        return self.std**2


def clt_prediction(tc, d, x, stepsize=None, orders=None):
    """Limit law of ``gamma_n^(-1/2) m_n^(-1/4) (f_n(x) - f(x))`` at interior ``x``.

    Valid when ``gamma_n^(-1/2) m_n^(-9/4)`` tends to a finite ``c``; for
    power-law schedules that means ``a >= alpha * 2/9``.
    """
    x = float(x)
    if not 0.0 < x < 1.0:
        raise ValueError("the normal limit is stated for interior points only")
    stepsize = StepsizeSchedule() if stepsize is None else stepsize
    if orders is None:
        orders = OrderSchedule(optimal_order_constant(tc, stepsize), INTERIOR_EXPONENT)
    alpha, xi, a = stepsize.alpha, stepsize.xi, orders.a
    regime = interior_regime(a, alpha)
    if regime is Regime.BIAS:
        raise ValueError("order exponent below 2 alpha / 9: the bias dominates, no normal limit")
    c = 0.0
    if regime is Regime.BALANCED:
        if orders.c <= 0:
            raise ValueError("order constant must be positive")
        c = stepsize.gamma0**-0.5 * orders.c**-2.25
    f = float(d.pdf(np.array([x]))[0])
    d2 = float(delta2(d, np.array([x]))[0])
    center = 0.0
    if c:
        center = -2.0 * c * d2 / _need_positive(1 - 2 * a * xi, "1 - 2 a xi > 0")
    factor = _need_positive(4 - (2 * alpha - a) * xi, "4 - (2 alpha - a) xi > 0")
    variance = 2.0 / factor * tc.C3 * f * float(psi(x))
    return CltPrediction(center=center, std=math.sqrt(variance), c=c)
