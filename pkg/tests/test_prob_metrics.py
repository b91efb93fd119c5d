import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from conftest import scalar_gaussian
from stablebip.errors import ReferenceMismatchError
from stablebip.posterior_core import Potential, build_posterior
from stablebip.prob_metrics import hellinger, hellinger_root, qoi_bound_check, total_variation
from stablebip.series_prior import sample_prior


def gaussian_pair(draws=100_000, seed=0, shift=1.0):
    """Posteriors N(0, 1) and N(shift / 2, 1) on shared prior draws."""
    spec, pot, _, _ = scalar_gaussian(prior_var=2.0, g=1.0, noise_var=2.0)
    prior = sample_prior(spec, seed, draws, override=True)
    return (build_posterior(prior, pot, np.array([0.0])),
            build_posterior(prior, pot, np.array([shift])))


def split_pair():
    spec, _, _, _ = scalar_gaussian()
    prior = sample_prior(spec, 1, 1000, override=True)
    lo = Potential(lambda u, y: 1e6 if u[0] > 0 else 0.0, lambda r, s: 0.0, lambda r, s: 0.0)
    hi = Potential(lambda u, y: 0.0 if u[0] > 0 else 1e6, lambda r, s: 0.0, lambda r, s: 0.0)
    return build_posterior(prior, lo, np.zeros(0)), build_posterior(prior, hi, np.zeros(0))


def test_identical_measures():
    mu, _ = gaussian_pair(2000)
    assert hellinger(mu, mu).value < 1e-12
    assert total_variation(mu, mu).value == 0.0


def test_disjoint_support():
    mu, nu = split_pair()
    assert hellinger(mu, nu).value == 1.0
    assert total_variation(mu, nu).value == pytest.approx(1.0, abs=1e-12)


def test_gaussian_pair_against_closed_form():
    mu, nu = gaussian_pair()
    h, tv = hellinger(mu, nu), total_variation(mu, nu)
    assert abs(h.value - (1.0 - math.exp(-0.25 / 8.0))) < 3 * h.std_error
    assert abs(tv.value - (2.0 * stats.norm.cdf(0.25) - 1.0)) < 3 * tv.std_error
    assert h.clamped_by < 1e-6 and tv.clamped_by < 1e-6
    assert hellinger_root(h) == pytest.approx(math.sqrt(h.value))


def test_closed_form_tv_by_quadrature():
    diff = lambda x: abs(stats.norm.pdf(x) - stats.norm.pdf(x, 0.5))  # noqa: E731
    val = 0.5 * integrate.quad(diff, -12, 12, points=[0.25], limit=200)[0]
    assert val == pytest.approx(2.0 * stats.norm.cdf(0.25) - 1.0, abs=1e-10)


@settings(max_examples=15, deadline=None)
@given(shift=st.floats(-3, 3), seed=st.integers(0, 100))
def test_symmetry_and_sandwich(shift, seed):
    mu, nu = gaussian_pair(3000, seed, shift)
    h1, h2 = hellinger(mu, nu), hellinger(nu, mu)
    t1, t2 = total_variation(mu, nu), total_variation(nu, mu)
    assert h1.value == h2.value and t1.value == t2.value
    assert 0.0 <= h1.value <= 1.0 and 0.0 <= t1.value <= 1.0
    se = math.hypot(h1.std_error, t1.std_error) + 1e-12
    assert h1.value <= t1.value + 3 * se
    assert t1.value <= math.sqrt(h1.value * (2 - h1.value)) + 3 * se


def test_reference_mismatch():
    mu, _ = gaussian_pair(100, 0)
    nu, _ = gaussian_pair(100, 1)
    with pytest.raises(ReferenceMismatchError):
        hellinger(mu, nu)


def test_qoi_trivial_cases():
    mu, nu = gaussian_pair(5000)
    one = qoi_bound_check(lambda d: 1.0, mu, nu)
    assert one.lhs == pytest.approx(0.0, abs=1e-12) and one.holds
    same = qoi_bound_check(lambda d: d.coefficients[0] ** 2, mu, mu)
    assert same.lhs == 0.0 and same.rhs == 0.0 and same.holds


def test_qoi_bound_l2_convention_holds():
    mu, nu = gaussian_pair(50_000)
    res = qoi_bound_check(lambda d: d.coefficients[0], mu, nu, convention="l2")
    assert res.lhs == pytest.approx(0.5, abs=0.03)
    assert res.holds and res.lhs <= res.rhs


def test_qoi_bound_with_squared_type_distance_fails_for_small_shifts():
    # with D = d_H (quadratic in the shift) the right side shrinks faster than the left
    mu, nu = gaussian_pair(50_000)
    res = qoi_bound_check(lambda d: d.coefficients[0], mu, nu, convention="one_minus_bc")
    assert not res.holds
