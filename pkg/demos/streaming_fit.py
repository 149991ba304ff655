"""Streaming versus batch: feed a sample one point at a time into the
recursive estimator and watch its ISE track a Vitale refit on the same data.

    python demos/streaming_fit.py
"""

import numpy as np

from bernstein_rm import (
    OrderSchedule,
    RecursiveEstimator,
    StepsizeSchedule,
    VitaleEstimator,
    get_density,
    ise,
    optimal_order,
    optimal_order_constant,
    theory_constants,
)

density = get_density("a")
tc = theory_constants(density.true_density())
data = density.sample(2000, np.random.default_rng(1))

# Orders c n^(2/9) with the MISE-optimal constant for gamma_n = 1/n.
stepsize = StepsizeSchedule(1.0)
orders = OrderSchedule(optimal_order_constant(tc, stepsize), 2 / 9)
rec = RecursiveEstimator(stepsize, orders)

print(f"{'n':>6} {'m_n':>5} {'ISE recursive':>14} {'m':>5} {'ISE Vitale':>11}")
for n, obs in enumerate(data, start=1):
    rec.update(obs)
    if n in (50, 200, 500, 1000, 2000):
        m = optimal_order("vitale", tc, n)
        batch = VitaleEstimator(data[:n], m)
        print(f"{n:>6} {orders(n):>5} {ise(rec, density.pdf):>14.6f} {m:>5} {ise(batch, density.pdf):>11.6f}")

# The recursion never rescales old kernels, so its mass is 1 - prod(1 - gamma_j).
print(f"\nmass {rec.integral():.12f}, deficit {rec.mass_deficit:.3g}")
