import numpy as np
import pytest
from scipy import integrate, stats

from bernstein_rm.zoo import ZOO_IDS, get_density, sample_zoo


@pytest.mark.parametrize("density_id", ZOO_IDS)
def test_pdf_integrates_to_one(density_id):
    z = get_density(density_id)
    total, _ = integrate.quad(lambda t: float(z.pdf(t)), 0, 1, limit=200, epsabs=1e-12)
    assert total == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("density_id", ZOO_IDS)
def test_cdf_is_integral_of_pdf(density_id):
    z = get_density(density_id)
    for x in (0.1, 0.37, 0.8):
        area, _ = integrate.quad(lambda t: float(z.pdf(t)), 0, x, epsabs=1e-13)
        assert float(z.cdf(x)) == pytest.approx(area, abs=1e-10)


@pytest.mark.parametrize("density_id", ZOO_IDS)
def test_sampler_ks_bound(density_id):
    N = 10**5
    draws = sample_zoo(density_id, N, seed=7)
    stat = stats.kstest(draws, get_density(density_id).cdf).statistic
    assert stat < 1.63 / np.sqrt(N)


def test_beta35_sample_mean():
    N = 10**5
    draws = sample_zoo("a", N, seed=11)
    sigma = np.sqrt(3 * 5 / (8**2 * 9))
    assert abs(draws.mean() - 3 / 8) < 3 * sigma / np.sqrt(N)


def test_mean_property_matches_quadrature():
    for d in ZOO_IDS:
        z = get_density(d)
        m, _ = integrate.quad(lambda t: t * float(z.pdf(t)), 0, 1, limit=200)
        assert z.mean == pytest.approx(m, abs=1e-10)


def test_truncated_exponential_draws_stay_in_unit_interval():
    draws = sample_zoo("h", 20000, seed=3)
    assert draws.min() >= 0.0 and draws.max() <= 1.0


def test_fixed_seed_is_byte_identical():
    a = sample_zoo("j", 500, seed=5)
    b = sample_zoo("j", 500, seed=5)
    assert a.tobytes() == b.tobytes()
    assert sample_zoo("j", 500, seed=6).tobytes() != a.tobytes()


def test_errors():
    with pytest.raises(ValueError, match="unknown density"):
        get_density("k")
    with pytest.raises(ValueError):
        sample_zoo("a", 0, seed=1)


def test_beta_derivative_against_closed_form():
    # Beta(3,5): 105 x^2 (1-x)^4, first derivative by hand
    z = get_density("a")
    x = np.linspace(0, 1, 11)
    expected = 105 * (2 * x * (1 - x) ** 4 - 4 * x**2 * (1 - x) ** 3)
    np.testing.assert_allclose(z.derivative(1, x), expected, atol=1e-12)
