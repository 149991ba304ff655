"""Recursive Bernstein density estimation on [0, 1].

A Robbins-Monro recursion over Bernstein kernels, five batch Bernstein
estimators to compare against, their asymptotic theory, LSCV order
selection and a Monte Carlo harness.
"""

from .asymptotics import (
    C3,
    Regime,
    TheoryConstants,
    TrueDensity,
    clt_prediction,
    lambda1,
    lambda2,
    optimal_order,
    pointwise_theory,
    theoretical_mise,
    theory_constants,
)
from .basis import BernsteinBasis, EmpiricalCdf, basis_matrix, bin_index, eval_basis
from .estimators import (
    GaussianKDE,
    GeneralizedEstimator,
    MultiplicativeEstimator,
    NormalizedEstimator,
    RecursiveEstimator,
    Sample,
    VitaleEstimator,
    leblanc,
    make_estimator,
    t_kernel,
    truncate_renormalize,
    z_kernel,
)
from .schedules import (
    STEPSIZE_PRESETS,
    OrderSchedule,
    StepsizeSchedule,
    optimal_order_constant,
    optimal_order_schedule,
)
from .selection import LscvResult, lscv_generalized, lscv_generic, lscv_recursive, lscv_vitale
from .simulate import (
    EstimatorSpec,
    TrialReport,
    bench_update,
    clt_check,
    convergence_slope,
    ise,
    run_table,
    simulate_cell,
)
from .transforms import SupportTransform, parse_support
from .zoo import ZOO_IDS, get_density, sample_zoo

__version__ = "0.1.0"
