import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from bernstein_rm.simulate import (
    TABLE1_COLUMNS,
    TABLE2_COLUMNS,
    EstimatorSpec,
    bench_update,
    clt_check,
    convergence_slope,
    format_table,
    ise,
    run_table,
    simulate_cell,
    theory_table,
    trial_samples,
)
from bernstein_rm.estimators import (
    GeneralizedEstimator,
    MultiplicativeEstimator,
    NormalizedEstimator,
    RecursiveEstimator,
    VitaleEstimator,
)
from bernstein_rm.schedules import OrderSchedule, StepsizeSchedule
from bernstein_rm.zoo import get_density


def test_ise_examples():
    a = get_density("a")
    assert ise(a.pdf, a.pdf) == pytest.approx(0.0, abs=1e-12)
    one = lambda x: np.ones_like(x)
    assert ise(lambda x: np.zeros_like(x), one) == pytest.approx(1.0, abs=1e-12)
    oracle, _ = integrate.quad(lambda t: (1 - float(a.pdf(t))) ** 2, 0, 1, epsabs=1e-13)
    assert ise(one, a.pdf) == pytest.approx(oracle, rel=1e-10)


def test_spec_parse_and_labels():
    assert EstimatorSpec.parse("r2") == EstimatorSpec("recursive", gamma0=8 / 9)
    assert EstimatorSpec.parse("generalized-b3").b == 3
    assert EstimatorSpec.parse("leblanc").label == "leblanc"
    assert len(TABLE1_COLUMNS) == 4 and len(TABLE2_COLUMNS) == 9
    with pytest.raises(ValueError):
        EstimatorSpec.parse("kernel")


@pytest.mark.parametrize("label", ["vitale", "r3", "leblanc", "generalized-b4", "multiplicative-b3", "normalized-b2"])
def test_vectorised_cell_matches_single_fits(label):
    # the stacked fast path against the plain estimator classes
    spec = EstimatorSpec.parse(label)
    report = simulate_cell(spec, "f", 60, 3, seed=9)
    X = trial_samples("f", 60, 3, 9)
    truth = get_density("f").pdf
    for row, value in zip(X, report.ise):
        order = report.order
        if spec.kind == "recursive":
            est = RecursiveEstimator(StepsizeSchedule(spec.gamma0), OrderSchedule(order["c"], order["a"]))
            est.update_many(row)
        elif spec.kind == "vitale":
            est = VitaleEstimator(row, order)
        elif spec.kind in ("leblanc", "generalized"):
            est = GeneralizedEstimator(row, order, b=spec.b)
        elif spec.kind == "multiplicative":
            est = MultiplicativeEstimator(row, order, b=spec.b)
        else:
            est = NormalizedEstimator(row, order, b=spec.b)
        assert ise(est, truth) == pytest.approx(value, rel=1e-9, abs=1e-14)


def test_report_invariants_and_reproducibility():
    r1 = simulate_cell(EstimatorSpec("vitale"), "b", 50, 2, seed=3)
    r2 = simulate_cell(EstimatorSpec("vitale"), "b", 50, 2, seed=3)
    assert r1.ise.size == 2 and np.all(r1.ise >= 0)
    assert r1.ise.tobytes() == r2.ise.tobytes()
    assert r1.averaged_ise == pytest.approx(r1.ise.mean())
    assert r1.as_row()["N"] == 2


def test_run_table_shares_samples_and_layout():
    reports = run_table(["a", "h"], ["vitale", "r1"], [50, 100], N=4, seed=1)
    assert [(r.density, r.n, r.spec.kind) for r in reports[:4]] == [
        ("a", 50, "vitale"),
        ("a", 50, "recursive"),
        ("a", 100, "vitale"),
        ("a", 100, "recursive"),
    ]
    csv = format_table(reports, "csv").splitlines()
    assert csv[0] == "density,n,vitale,recursive(gamma0=1)" and len(csv) == 5
    md = format_table(reports)
    assert md.startswith("| density | n |")
    with pytest.raises(ValueError):
        run_table(["z"], ["vitale"], [50], N=1)


def test_theory_table_rows():
    rows = theory_table(["a"], ["vitale", "r1"], [500])
    assert [r["estimator"] for r in rows] == ["vitale", "recursive(gamma0=1)"]
    assert all(r["mise"] > 0 for r in rows)


def test_slope_flags_degenerate_estimator():
    truth = get_density("a").pdf
    with pytest.warns(RuntimeWarning, match="undefined"):
        slope = convergence_slope(None, "a", [10, 100], N=2, estimator=lambda row: truth)
    assert math.isnan(slope)
    with pytest.raises(ValueError, match="decade"):
        convergence_slope("vitale", "a", [100, 200], N=2)


def test_clt_contract():
    with pytest.raises(ValueError, match="30"):
        clt_check("a", 0.5, 100, 1)
    with pytest.raises(ValueError, match="interior"):
        clt_check("a", 0.0, 100, 50)


def test_clt_centred_when_bias_vanishes():
    # a > 2/9 puts the limit in the variance regime, so c = 0
    rep = clt_check("a", 0.5, 400, 200, seed=2, orders=OrderSchedule(2.0, 0.5))
    assert rep.predicted_center == 0.0
    assert abs(rep.mean) < 3 * rep.sd / math.sqrt(200)
    assert rep.finite_sample_sd < rep.predicted_sd


def test_bench_small_and_grid_one():
    rep = bench_update(50, 50, 64)
    assert rep.recursive_per_arrival.size == 50 and rep.recursive_total > 0
    tiny = bench_update(50, 50, 1)
    assert tiny.as_dict()["arrivals"] == 50
