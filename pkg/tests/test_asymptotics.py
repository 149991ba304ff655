import math

import numpy as np
import pytest
import sympy as sp
from scipy import integrate, optimize

from bernstein_rm.asymptotics import (
    C3,
    QuadratureError,
    Regime,
    TrueDensity,
    clt_prediction,
    delta1,
    delta2,
    edge_regime,
    finite_difference,
    interior_regime,
    lambda1,
    lambda2,
    optimal_order,
    pointwise_theory,
    psi,
    theoretical_mise,
    theory_constants,
)
from bernstein_rm.schedules import OrderSchedule, StepsizeSchedule, optimal_order_constant
from bernstein_rm.zoo import ZOO_IDS, get_density

X = sp.symbols("x")
BETA35 = 105 * X**2 * (1 - X) ** 4  # 1 / B(3, 5) = 105


def _sympy_density(expr):
    fs = [sp.lambdify(X, sp.diff(expr, X, k), "numpy") for k in range(5)]
    vec = [lambda x, g=g: np.broadcast_to(np.asarray(g(x), dtype=float), np.shape(x)) for g in fs]
    return TrueDensity(vec[0], vec[1:]), fs


@pytest.fixture(scope="module")
def beta35():
    return _sympy_density(BETA35)


@pytest.fixture(scope="module")
def uniform():
    one = lambda x: np.ones_like(np.asarray(x, dtype=float))  # noqa: E731
    zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))  # noqa: E731
    return TrueDensity(one, [zero] * 4, name="uniform")


def _oracle_constants(fs):
    f, d1, d2, d3, d4 = fs

    def D1(x):
        return 0.5 * ((1 - 2 * x) * d1(x) + x * (1 - x) * d2(x))

    def D2(x):
        s = x * (1 - x)
        return (1 - 6 * s) * d2(x) / 6 + 5 * s * (1 - 2 * x) * d3(x) / 12 + s**2 * d4(x) / 8

    quad = lambda g: integrate.quad(g, 0, 1, epsabs=1e-13, epsrel=1e-12, limit=200)[0]  # noqa: E731
    # int f psi with the x^-1/2 (1-x)^-1/2 singularity handled by quad's algebraic weight
    C1 = integrate.quad(f, 0, 1, weight="alg", wvar=(-0.5, -0.5))[0] / math.sqrt(4 * math.pi)
    ratio = lambda x: D1(x) ** 2 / (2 * f(x)) if f(x) > 0 else 0.0  # noqa: E731
    K = quad(ratio)
    return {
        "C1": C1,
        "C2": quad(lambda x: D2(x) ** 2),
        "C4": quad(lambda x: D1(x) ** 2),
        "C5": quad(lambda x: (D2(x) - ratio(x)) ** 2),
        "C6": quad(lambda x: (D2(x) - ratio(x) + f(x) * K) ** 2),
    }


def test_c3_and_lambdas():
    assert C3 == pytest.approx(1.4411205, abs=1e-7)
    assert abs(lambda1(2) - C3) <= 1e-14
    assert lambda2(2) == 2.5
    assert lambda1(3) == pytest.approx((9 + 3**-0.5 - 6 * 0.5**0.5) / 4, rel=1e-15)
    assert lambda1(3) == pytest.approx(1.33368, abs=1e-5)


def test_b_lambda_factor_increasing():
    vals = [(b * lambda1(b) ** 4) ** (2 / 9) for b in range(2, 11)]
    assert np.all(np.diff(vals) > 0)


def test_delta_examples(uniform):
    x = np.linspace(0, 1, 11)
    assert np.all(delta1(uniform, x) == 0) and np.all(delta2(uniform, x) == 0)
    lin, _ = _sympy_density(2 * X)
    assert delta1(lin, 0.5) == pytest.approx(0.0)
    assert delta1(lin, 0.25) == pytest.approx(0.5)
    assert np.allclose(delta2(lin, x), 0.0)


def test_delta2_beta35_symbolic(beta35):
    s = X * (1 - X)
    d = [sp.diff(BETA35, X, k) for k in range(5)]
    expr = (1 - 6 * s) * d[2] / 6 + sp.Rational(5, 12) * s * (1 - 2 * X) * d[3] + s**2 * d[4] / 8
    exact = float(expr.subs(X, sp.Rational(1, 2)))
    assert delta2(beta35[0], 0.5) == pytest.approx(exact, rel=1e-13)


def test_theory_constants_beta35_against_quad(beta35):
    tc = theory_constants(beta35[0])
    oracle = _oracle_constants(beta35[1])
    for name, value in oracle.items():
        assert getattr(tc, name) == pytest.approx(value, rel=1e-8), name
    assert tc.C2 == pytest.approx(197.435897, rel=1e-8)


@pytest.mark.parametrize("density_id", ["b", "e", "h", "j"])
def test_theory_constants_zoo_against_quad(density_id):
    z = get_density(density_id)
    fs = [lambda x, k=k: float(z.derivative(k, x)) for k in range(5)]
    oracle = _oracle_constants(fs)
    tc = theory_constants(z.true_density())
    for name, value in oracle.items():
        assert getattr(tc, name) == pytest.approx(value, rel=1e-7), name


def test_uniform_constants(uniform):
    tc = theory_constants(uniform)
    assert tc.C2 == 0 and tc.C4 == 0
    # int_0^1 psi = (4 pi)^(-1/2) B(1/2, 1/2) = sqrt(pi) / 2
    assert tc.C1 == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-12)
    assert tc.lambda1_table[2] == pytest.approx(C3) and tc.lambda2_table[2] == 2.5
    assert set(tc.as_dict()) >= {"C1", "C2", "C3", "C4", "C5", "C6", "lambda1", "lambda2"}


def test_quadrature_failure_is_reported():
    kink = TrueDensity(lambda x: 0.5 + np.abs(np.asarray(x) - 1 / 3) * 1.5)
    with pytest.raises(QuadratureError):
        theory_constants(kink)


@pytest.mark.parametrize("density_id", ZOO_IDS)
def test_finite_differences_match_analytic(density_id):
    z = get_density(density_id)
    x = np.arange(1, 102) / 102.0
    for k in range(1, 5):
        analytic = z.derivative(k, x)
        fd = finite_difference(z.pdf, x, k)
        err = np.max(np.abs(fd - analytic) / np.maximum(1.0, np.abs(analytic)))
        assert err < 1e-6, (k, err)


def test_numerical_density_uses_fd(beta35):
    num = beta35[0].numerical()
    assert num.analytic_orders == 0
    tc_a = theory_constants(beta35[0])
    tc_n = theory_constants(num, rtol=1e-6)
    assert tc_n.C2 == pytest.approx(tc_a.C2, rel=1e-5)


def test_regimes():
    assert interior_regime(2 / 9, 1.0) is Regime.BALANCED
    assert interior_regime(0.1, 1.0) is Regime.BIAS
    assert interior_regime(0.5, 1.0) is Regime.VARIANCE
    assert edge_regime(0.2, 1.0) is Regime.BALANCED
    assert edge_regime(2 / 9, 1.0) is Regime.VARIANCE


def test_recursive_mise_closed_form(beta35):
    tc = theory_constants(beta35[0])
    for g0 in (1.0, 8 / 9, 4 / 5):
        for n in (50, 500, 10**5):
            expected = (
                9 / 8 * (8 * tc.C1**8 * C3**8 * tc.C2) ** (1 / 9)
                * g0**2 / (2 ** (6 / 9) * (g0 - 4 / 9) ** (10 / 9)) * n ** (-8 / 9)
            )
            got = theoretical_mise("recursive", tc, n, stepsize=StepsizeSchedule(g0))
            assert got == pytest.approx(expected, rel=1e-12)


def test_recursive_optimal_constant_minimises_mise(beta35):
    tc = theory_constants(beta35[0])
    s = StepsizeSchedule(1.0)
    n = 1000
    res = optimize.minimize_scalar(
        lambda c: theoretical_mise("recursive", tc, n, m=c * n ** (2 / 9), stepsize=s,
                                   orders=OrderSchedule(c, 2 / 9)),
        bounds=(0.5, 50), method="bounded", options={"xatol": 1e-10},
    )
    assert res.x == pytest.approx(optimal_order_constant(tc, s), rel=1e-6)


def test_vitale_mise_is_plug_in_at_optimum(beta35):
    tc = theory_constants(beta35[0])
    n = 500
    res = optimize.minimize_scalar(lambda m: m**0.5 * tc.C1 / n + tc.C4 / m**2, bounds=(1, 500),
                                   method="bounded", options={"xatol": 1e-10})
    assert optimal_order("vitale", tc, n, rounded=False) == pytest.approx(res.x, rel=1e-6)
    assert theoretical_mise("vitale", tc, n) == pytest.approx(res.fun, rel=1e-12)
    # the closed form (5/4)(C1^4 C4)^(1/5) n^(-4/5) is smaller by exactly 4^(1/5)
    short = 1.25 * (tc.C1**4 * tc.C4) ** 0.2 * n**-0.8
    assert theoretical_mise("vitale", tc, n) / short == pytest.approx(4**0.2, rel=1e-12)


def test_batch_optimal_orders_formulas(beta35):
    tc = theory_constants(beta35[0])
    n = 500
    assert optimal_order("vitale", tc, n, rounded=False) == pytest.approx((4 * tc.C4 / tc.C1) ** 0.4 * n**0.4)
    for b in (2, 3, 4):
        raw = (b**2 * 8 * tc.C2 / (lambda1(b) * tc.C1)) ** (2 / 9) * n ** (2 / 9)
        assert optimal_order("generalized", tc, n, b=b, rounded=False) == pytest.approx(raw, rel=1e-13)
        m = optimal_order("generalized", tc, n, b=b)
        assert m % b == 0 and abs(m - raw) <= b / 2
    raw5 = (4 * 8 * tc.C5 / (C3 * tc.C1)) ** (2 / 9) * n ** (2 / 9)
    assert optimal_order("multiplicative", tc, n, rounded=False) == pytest.approx(raw5, rel=1e-13)
    raw6 = (4 * 8 * tc.C6 / (C3 * tc.C1)) ** (2 / 9) * n ** (2 / 9)
    assert optimal_order("normalized", tc, n, rounded=False) == pytest.approx(raw6, rel=1e-13)
    with pytest.raises(ValueError):
        optimal_order("recursive", tc, n, gamma0=0.4)


def test_uniform_orders_clamp(uniform):
    tc = theory_constants(uniform)
    assert optimal_order("vitale", tc, 1000) == 2
    assert optimal_order("generalized", tc, 1000, b=3) == 3
    assert theoretical_mise("recursive", tc, 100, m=10, orders=OrderSchedule(1, 2 / 9)) > 0


@pytest.mark.parametrize(
    "density_id, n, kind, reference",
    [
        ("a", 500, "vitale", 0.013533),
        ("a", 500, "r1", 0.011398),
        ("a", 50, "r3", 0.092738),
        ("b", 500, "r1", 0.016710),
        ("a", 500, "leblanc", 0.01098),
        ("a", 500, "multiplicative", 0.01368),
        ("h", 200, "vitale", 0.015222),
    ],
)
def test_leading_order_mise_reproduces_reference_values(density_id, n, kind, reference):
    tc = theory_constants(get_density(density_id).true_density())
    g0 = {"r1": 1.0, "r2": 8 / 9, "r3": 0.8}.get(kind)
    if g0 is not None:
        value = theoretical_mise("recursive", tc, n, stepsize=StepsizeSchedule(g0))
    else:
        value = theoretical_mise(kind, tc, n)
    assert value == pytest.approx(reference, rel=2e-3)


def test_recursive_beats_vitale_at_large_n():
    for d in ZOO_IDS:
        tc = theory_constants(get_density(d).true_density())
        if tc.C2 > 0:
            assert theoretical_mise("recursive", tc, 10**6) < theoretical_mise("vitale", tc, 10**6), d


def test_recursive_mise_regimes(beta35):
    tc = theory_constants(beta35[0])
    s = StepsizeSchedule()
    bias_only = theoretical_mise("recursive", tc, 100, stepsize=s, orders=OrderSchedule(5, 0.1))
    m = OrderSchedule(5, 0.1)(100)
    assert bias_only == pytest.approx(4 * tc.C2 / (m**4 * (1 - 0.2) ** 2))
    var_only = theoretical_mise("recursive", tc, 100, stepsize=s, orders=OrderSchedule(5, 0.5))
    m = OrderSchedule(5, 0.5)(100)
    assert var_only == pytest.approx(2 * tc.C1 * C3 * 0.01 * m**0.5 / (4 - 1.5))
    with pytest.raises(ValueError, match="1 - 2 a xi"):
        theoretical_mise("recursive", tc, 100, stepsize=StepsizeSchedule(0.2), orders=OrderSchedule(5, 0.2))


def test_pointwise_theory(beta35, uniform):
    d = beta35[0]
    tc = theory_constants(d)
    s = StepsizeSchedule()
    o = OrderSchedule(optimal_order_constant(tc, s), 2 / 9)
    n = 400
    m = o(n)
    pt = pointwise_theory("recursive", tc, d, 0.3, n, stepsize=s, orders=o)
    assert pt.bias == pytest.approx(-2 * float(delta2(d, 0.3)) / (m**2 * (1 - 4 / 9)))
    assert pt.variance == pytest.approx(2 * C3 * (1 / n) * m**0.5 * float(d(0.3)) * float(psi(0.3)) / (4 - 16 / 9))
    assert pt.mse == pytest.approx(pt.bias**2 + pt.variance)
    edge = pointwise_theory("recursive", tc, d, 0.0, n, stepsize=s, orders=OrderSchedule(3, 0.2))
    m = OrderSchedule(3, 0.2)(n)
    assert edge.variance == pytest.approx(2.5 * (1 / n) * m * float(d(0.0)) / (2 - 0.8))
    flat = pointwise_theory("recursive", theory_constants(uniform), uniform, 0.4, n, stepsize=s, orders=o)
    assert flat.bias == 0.0
    v = pointwise_theory("vitale", tc, d, 0.3, n, m=20)
    assert v.bias == pytest.approx(float(delta1(d, 0.3)) / 20)
    g = pointwise_theory("generalized", tc, d, 1.0, n, m=21, b=3)
    assert g.variance == pytest.approx(lambda2(3) * 21 * float(d(1.0)) / n)
    with pytest.raises(ValueError):
        pointwise_theory("multiplicative", tc, d, 0.0, n, m=20)


def test_clt_prediction(beta35, uniform):
    tcu = theory_constants(uniform)
    p = clt_prediction(tcu, uniform, 0.5, StepsizeSchedule(), OrderSchedule(3, 0.5))
    assert p.center == 0.0 and p.c == 0.0
    assert p.variance == pytest.approx(2 * C3 * math.pi**-0.5 / (4 - (2 - 0.5)))
    d = beta35[0]
    tc = theory_constants(d)
    s = StepsizeSchedule(0.9)
    o = OrderSchedule(optimal_order_constant(tc, s), 2 / 9)
    p = clt_prediction(tc, d, 0.5, s, o)
    xi = 1 / 0.9
    assert p.variance == pytest.approx(2 * C3 * float(d(0.5)) * math.pi**-0.5 / (4 - (2 - 2 / 9) * xi))
    # gamma0^2 / (2 gamma0 - 8/9) form after rescaling gamma_n^-1/2 to n^1/2
    assert p.variance * 0.9 == pytest.approx(0.81 / (1.8 - 8 / 9) * C3 * float(d(0.5)) * math.pi**-0.5)
    c = 0.9**-0.5 * o.c**-2.25
    assert p.center == pytest.approx(-2 * c * float(delta2(d, 0.5)) / (1 - 4 / 9 * xi))
    with pytest.raises(ValueError):
        clt_prediction(tc, d, 0.0)
    with pytest.raises(ValueError):
        clt_prediction(tc, d, 0.5, s, OrderSchedule(3, 0.1))
