"""Monte Carlo harness: averaged ISE tables, convergence rates, CLT and cost checks.

Trials are vectorised: the ``N`` samples of one cell are stacked into an
``(N, n)`` array and every estimator is evaluated on all of them at once on
a 512-node Gauss-Legendre grid, which is also the ISE quadrature. Each
trial draws from its own generator seeded with ``(seed, density, n, trial)``,
so results do not depend on evaluation order, and every estimator in a cell
sees the same samples.
"""

import math
import time
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats

from . import selection
from .asymptotics import clt_prediction, optimal_order, theoretical_mise, theory_constants
from .basis import basis_matrix, bin_index
from .estimators import RecursiveEstimator, VitaleEstimator
from .quadrature import DEFAULT_NODES, gauss_legendre
from .schedules import (
    INTERIOR_EXPONENT,
    OrderSchedule,
    StepsizeSchedule,
    optimal_order_constant,
)
from .zoo import ZOO_IDS, get_density

__all__ = [
    "EstimatorSpec",
    "TrialReport",
    "bench_update",
    "clt_check",
    "convergence_slope",
    "format_table",
    "ise",
    "mc_averaged_ise",
    "run_table",
    "simulate_cell",
    "theory_table",
    "trial_samples",
]


@dataclass(frozen=True)
class EstimatorSpec:
    """One estimator column: a kind plus its tuning constants."""

    kind: str
    b: int = 2
    eps: float = 1e-5
    gamma0: float = 1.0

    def __post_init__(self):
        if self.kind not in ("recursive", "vitale", "leblanc", "generalized", "multiplicative", "normalized"):
            raise ValueError(f"unknown estimator kind {self.kind!r}")

    @property
    def label(self):
        if self.kind == "recursive":
            return f"recursive(gamma0={self.gamma0:.4g})"
        if self.kind in ("vitale", "leblanc"):
            return self.kind
        return f"{self.kind}(b={self.b})"

    @classmethod
    def parse(cls, text):
        """Parse names such as ``vitale``, ``r2``, ``generalized-b3``, ``normalized-b2``."""
        presets = {"r1": 1.0, "r2": 8.0 / 9.0, "r3": 4.0 / 5.0}
        if text in presets:
            return cls("recursive", gamma0=presets[text])
        kind, _, rest = text.partition("-b")
        return cls(kind, b=int(rest)) if rest else cls(kind)


TABLE1_COLUMNS = tuple(EstimatorSpec.parse(s) for s in ("vitale", "r1", "r2", "r3"))
TABLE2_COLUMNS = tuple(
    EstimatorSpec.parse(s)
    for s in (
        "leblanc",
        "generalized-b3",
        "generalized-b4",
        "multiplicative-b2",
        "multiplicative-b3",
        "multiplicative-b4",
        "normalized-b2",
        "normalized-b3",
        "normalized-b4",
    )
)


@dataclass
class TrialReport:
    spec: EstimatorSpec
    density: str
    n: int
    N: int
    seed: int
    order: object
    ise: np.ndarray = field(repr=False)

    @property
    def averaged_ise(self):
        return float(np.mean(self.ise))

    @property
    def stderr(self):
        return float(np.std(self.ise, ddof=1) / math.sqrt(self.N)) if self.N > 1 else math.nan

    def as_row(self):
        return {
            "density": self.density,
            "estimator": self.spec.label,
            "n": self.n,
            "N": self.N,
            "order": self.order,
            "averaged_ise": self.averaged_ise,
            "stderr": self.stderr,
            "seed": self.seed,
        }


@lru_cache(maxsize=None)
def _constants(density_id):
    return theory_constants(get_density(density_id).true_density())


def ise(estimate, truth, nodes=DEFAULT_NODES):
    """``int_0^1 (estimate - truth)^2`` by Gauss-Legendre quadrature.

    ``estimate`` may be a callable or an array of values on the nodes (the
    last axis is integrated, so a stack of trials works too).
    """
    x, w = gauss_legendre(nodes)
    values = estimate(x) if callable(estimate) else np.asarray(estimate)
    return (values - truth(x)) ** 2 @ w


def trial_samples(density_id, n, N, seed):
    """``(N, n)`` array; row ``k`` is drawn from ``default_rng([seed, density, n, k])``."""
    density = get_density(density_id)
    code = ZOO_IDS.index(density_id)
    return np.stack(
        [density.sample(n, np.random.default_rng([seed, code, n, k])) for k in range(N)]
    )


@lru_cache(maxsize=256)
def _basis_on_nodes(m, nodes):
    x, _ = gauss_legendre(nodes)
    B = basis_matrix(m, x)
    B.setflags(write=False)
    return B


def _vitale_stack(X, m, nodes):
    N, n = X.shape
    k = bin_index(m, X)
    counts = np.zeros((N, m))
    np.add.at(counts, (np.repeat(np.arange(N), n), k.ravel()), 1.0)
    return (m / n) * counts @ _basis_on_nodes(m - 1, nodes)


def _recursive_stack(X, stepsize, orders, nodes):
    N, n = X.shape
    values = np.zeros((N, gauss_legendre(nodes)[0].size))
    for k in range(1, n + 1):
        gamma = stepsize(k)
        m = orders(k)
        obs = X[:, k - 1]
        full = _basis_on_nodes(m - 1, nodes)[bin_index(m, obs)]
        half = _basis_on_nodes(m // 2 - 1, nodes)[bin_index(m // 2, obs)]
        values *= 1.0 - gamma
        values += gamma * (2.0 * m * full - 0.5 * m * half)
    return values


def _stack_values(spec, X, order, nodes):
    """Estimator values on the quadrature nodes for every row of ``X``."""
    if spec.kind == "recursive":
        return _recursive_stack(X, StepsizeSchedule(spec.gamma0), order, nodes)
    if spec.kind == "vitale":
        return _vitale_stack(X, order, nodes)
    b = 2 if spec.kind == "leblanc" else spec.b
    full = _vitale_stack(X, order, nodes)
    coarse = _vitale_stack(X, order // b, nodes)
    if spec.kind in ("leblanc", "generalized"):
        return (b * full - coarse) / (b - 1)
    raw = np.maximum(full, 0.0) ** (b / (b - 1.0)) * (coarse + spec.eps) ** (-1.0 / (b - 1.0))
    if spec.kind == "multiplicative":
        return raw
    _, w = gauss_legendre(nodes)
    return raw / (raw @ w)[:, None]


def _order_for(spec, density_id, n):
    tc = _constants(density_id)
    if spec.kind == "recursive":
        return OrderSchedule(optimal_order_constant(tc, StepsizeSchedule(spec.gamma0)), INTERIOR_EXPONENT)
    return optimal_order(spec.kind, tc, n, b=spec.b)


def simulate_cell(spec, density_id, n, N, seed, X=None, nodes=DEFAULT_NODES):
    """Averaged-ISE report for one (estimator, density, n) cell.

    Orders come from the true density's theory constants: the optimal
    schedule ``c n^(2/9)`` for the recursive estimator, the optimal fixed
    order for the batch ones.
    """
    if X is None:
        X = trial_samples(density_id, n, N, seed)
    order = _order_for(spec, density_id, n)
    values = _stack_values(spec, X, order, nodes)
    errors = ise(values, get_density(density_id).pdf, nodes)
    if isinstance(order, OrderSchedule):
        order = {"c": order.c, "a": order.a, "m_n": order(n)}
    return TrialReport(spec, density_id, n, N, seed, order, errors)


def run_table(densities, estimators, ns, N=500, seed=42):
    """Reports for every (density, n, estimator) cell, in table order."""
    specs = [e if isinstance(e, EstimatorSpec) else EstimatorSpec.parse(e) for e in estimators]
    reports = []
    for d in densities:
        get_density(d)
        for n in ns:
            X = trial_samples(d, n, N, seed)
            reports.extend(simulate_cell(s, d, n, N, seed, X=X) for s in specs)
    return reports


def theory_table(densities, estimators, ns):
    """Leading-order MISE at the optimal orders, laid out like :func:`run_table`."""
    rows = []
    for d in densities:
        tc = _constants(d)
        for n in ns:
            for e in estimators:
                spec = e if isinstance(e, EstimatorSpec) else EstimatorSpec.parse(e)
                if spec.kind == "recursive":
                    value = theoretical_mise("recursive", tc, n, stepsize=StepsizeSchedule(spec.gamma0))
                else:
                    value = theoretical_mise(spec.kind, tc, n, b=spec.b)
                rows.append({"density": d, "n": n, "estimator": spec.label, "mise": value})
    return rows


def format_table(reports, fmt="markdown"):
    """Rows per (density, n), one column per estimator."""
    columns = []
    for r in reports:
        if r.spec.label not in columns:
            columns.append(r.spec.label)
    cells = {}
    for r in reports:
        cells.setdefault((r.density, r.n), {})[r.spec.label] = r.averaged_ise
    if fmt == "csv":
        lines = [",".join(["density", "n", *columns])]
        for (d, n), row in cells.items():
            lines.append(",".join([d, str(n), *(f"{row.get(c, math.nan):.9g}" for c in columns)]))
        return "\n".join(lines) + "\n"
    lines = ["| density | n | " + " | ".join(columns) + " |", "|" + "---|" * (len(columns) + 2)]
    for (d, n), row in cells.items():
        lines.append(f"| ({d}) | {n} | " + " | ".join(f"{row.get(c, math.nan):.6f}" for c in columns) + " |")
    return "\n".join(lines) + "\n"


def mc_averaged_ise(spec, density_id, ns, N, seed):
    return np.array([simulate_cell(spec, density_id, n, N, seed).averaged_ise for n in ns])


def convergence_slope(spec, density_id, ns, N=200, seed=42, estimator=None):
    """Least-squares slope of log averaged ISE against log n.

    ``estimator`` optionally replaces the built-in kinds with a factory
    ``estimator(sample) -> callable``. If any averaged ISE is zero the
    slope is undefined: a warning is issued and ``nan`` returned.
    """
    ns = np.asarray(ns, dtype=float)
    if ns.max() / ns.min() < 10:
        raise ValueError("n grid must span at least one decade")
    if estimator is None:
        spec = spec if isinstance(spec, EstimatorSpec) else EstimatorSpec.parse(spec)
        means = mc_averaged_ise(spec, density_id, [int(n) for n in ns], N, seed)
    else:
        truth = get_density(density_id).pdf
        means = np.array(
            [
                np.mean([ise(estimator(row), truth) for row in trial_samples(density_id, int(n), N, seed)])
                for n in ns
            ]
        )
    if np.any(means <= 0):
        warnings.warn("averaged ISE is zero for some n; convergence slope is undefined", RuntimeWarning)
        return math.nan
    slope, _ = np.polyfit(np.log(ns), np.log(means), 1)
    return float(slope)


@dataclass(frozen=True)
class CltReport:
    mean: float
    sd: float
    pvalue: float
    predicted_center: float
    predicted_sd: float
    finite_sample_sd: float
    standardized: np.ndarray = field(repr=False)


def clt_check(density_id, x, n, N, seed=42, stepsize=None, orders=None):
    """Replicate ``gamma_n^(-1/2) m_n^(-1/4) (f_n(x) - f(x))`` over ``N`` samples.

    Defaults to ``gamma_n = 1/n`` and the MISE-optimal order schedule.
    Normality is assessed with D'Agostino and Pearson's omnibus test.
    ``finite_sample_sd`` adds back the ``-f(x)^2`` part of each kernel's
    variance that the limit law discards.
    """
    x = float(x)
    if not 0.0 < x < 1.0:
        raise ValueError("the normal limit is stated for interior points only")
    if N < 30:
        raise ValueError("need N >= 30 replicates for a meaningful normality check")
    density = get_density(density_id)
    tc = _constants(density_id)
    stepsize = StepsizeSchedule() if stepsize is None else stepsize
    if orders is None:
        orders = OrderSchedule(optimal_order_constant(tc, stepsize), INTERIOR_EXPONENT)
    X = trial_samples(density_id, n, N, seed)
    values = np.zeros(N)
    grid = np.array([x])
    cache = {}
    for k in range(1, n + 1):
        gamma = stepsize(k)
        m = orders(k)
        if m not in cache:
            cache[m] = (basis_matrix(m - 1, grid)[:, 0], basis_matrix(m // 2 - 1, grid)[:, 0])
        full, half = cache[m]
        obs = X[:, k - 1]
        z = 2.0 * m * full[bin_index(m, obs)] - 0.5 * m * half[bin_index(m // 2, obs)]
        values = (1.0 - gamma) * values + gamma * z
    scale = stepsize(n) ** -0.5 * orders(n) ** -0.25
    standardized = scale * (values - float(density.pdf(grid)[0]))
    prediction = clt_prediction(tc, density.true_density(), x, stepsize, orders)
    # The limit drops Var's -(E Z_k)^2 part, which is only O(m_n^(-1/2)) smaller;
    # keeping it gives the sd to expect at this n.
    weights = selection.recursive_weights(stepsize, n)
    f_x = float(density.pdf(grid)[0])
    correction = scale**2 * f_x**2 * float(weights @ weights)
    finite = math.sqrt(max(prediction.variance - correction, 0.0))
    return CltReport(
        mean=float(standardized.mean()),
        sd=float(standardized.std(ddof=1)),
        pvalue=float(stats.normaltest(standardized).pvalue),
        predicted_center=prediction.center,
        predicted_sd=prediction.std,
        finite_sample_sd=finite,
        standardized=standardized,
    )


@dataclass(frozen=True)
class BenchReport:
    recursive_total: float
    batch_total: float
    recursive_per_arrival: np.ndarray = field(repr=False)
    batch_per_arrival: np.ndarray = field(repr=False)

    @property
    def recursive_mean(self):
        return float(self.recursive_per_arrival.mean())

    @property
    def batch_mean(self):
        return float(self.batch_per_arrival.mean())

    def as_dict(self):
        return {
            "recursive_total_s": self.recursive_total,
            "batch_total_s": self.batch_total,
            "recursive_mean_per_arrival_s": self.recursive_mean,
            "batch_mean_per_arrival_s": self.batch_mean,
            "arrivals": int(self.recursive_per_arrival.size),
        }


def bench_update(n_initial=500, n_additional=500, grid_size=DEFAULT_NODES, density_id="a", seed=42):
    """Time absorbing new observations: one recursive update versus a Vitale refit.

    Both estimators start from ``n_initial`` observations and then receive
    ``n_additional`` more one at a time. The recursive estimator updates in
    place; the Vitale estimator is rebuilt from the full sample and
    re-evaluated on the grid after every arrival. Orders follow the
    optimal choices for the sampled density.
    """
    tc = _constants(density_id)
    data = get_density(density_id).sample(n_initial + n_additional, np.random.default_rng(seed))
    grid = np.linspace(0.0, 1.0, grid_size) if grid_size > 1 else np.array([0.5])
    schedule = OrderSchedule(optimal_order_constant(tc, StepsizeSchedule()), INTERIOR_EXPONENT)
    rec = RecursiveEstimator(StepsizeSchedule(), schedule, grid=grid)
    rec.update_many(data[:n_initial])
    rec_times = np.empty(n_additional)
    batch_times = np.empty(n_additional)
    for j in range(n_additional):
        obs = data[n_initial + j]
        t0 = time.perf_counter()
        rec.update(obs)
        rec_times[j] = time.perf_counter() - t0
    for j in range(n_additional):
        size = n_initial + j + 1
        t0 = time.perf_counter()
        m = optimal_order("vitale", tc, size)
        VitaleEstimator(data[:size], m)(grid)
        batch_times[j] = time.perf_counter() - t0
    return BenchReport(float(rec_times.sum()), float(batch_times.sum()), rec_times, batch_times)
