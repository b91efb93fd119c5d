import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats
from scipy.special import erfc

from stablebip.errors import DivergingMomentError, ParameterDomainError, UnsupportedCaseError
from stablebip.stable_dist import (StableParams, fractional_moment_estimate, moment_finite,
                                   running_moment_profile,
                                   sample_stable, stability_property_test, stability_shift,
                                   stable_cdf_closed_form)

alphas = st.floats(0.3, 2.0)
betas = st.floats(-1.0, 1.0)


@pytest.mark.parametrize("bad", [
    dict(alpha=0.0), dict(alpha=2.1), dict(alpha=1.0, beta=1.5),
    dict(alpha=1.0, gamma=-1.0), dict(alpha=1.0, delta=math.nan),
])
def test_params_reject_out_of_domain(bad):
    with pytest.raises(ParameterDomainError):
        StableParams(**bad)


def test_degenerate_scale_gives_point_mass():
    x = sample_stable(StableParams(1.3, 0.4, 0.0, 3.5), seed=1, count=10)
    assert np.all(x == 3.5)


@pytest.mark.parametrize("params, cdf", [
    (StableParams(2.0), stats.norm(scale=math.sqrt(2.0)).cdf),
    (StableParams(1.0), lambda x: 0.5 + np.arctan(x) / math.pi),
    (StableParams(0.5, 1.0), stats.levy().cdf),
])
def test_ks_against_closed_form(params, cdf):
    x = sample_stable(params, seed=3, count=100_000)
    assert stats.kstest(x, cdf).statistic < 1.36 / math.sqrt(x.size) + 0.002


def test_closed_form_cdf_values():
    assert stable_cdf_closed_form(StableParams(1.0), 0.0) == 0.5
    assert stable_cdf_closed_form(StableParams(2.0, 0.0, 0.7, 1.3), 1.3) == 0.5
    lev = stable_cdf_closed_form(StableParams(0.5, 1.0), 1.0)
    assert lev == pytest.approx(erfc(math.sqrt(0.5)), abs=1e-15)
    assert lev == pytest.approx(0.317310, abs=1e-6)
    assert stable_cdf_closed_form(StableParams(1.5), 0.0) is None


def test_levy_cdf_matches_quadrature_of_density():
    from scipy.integrate import quad
    dens = lambda t: math.exp(-1.0 / (2.0 * t)) / math.sqrt(2.0 * math.pi * t**3)  # noqa: E731
    val, _ = quad(dens, 0.0, 1.0)
    assert stable_cdf_closed_form(StableParams(0.5, 1.0), 1.0) == pytest.approx(val, abs=1e-9)


def test_skewed_sampler_agrees_with_reference_implementation():
    # scipy's S1 parameterisation matches ours for alpha != 1
    x = sample_stable(StableParams(1.5, 0.6, 1.0, 0.0), seed=11, count=20_000)
    ref = stats.levy_stable(1.5, 0.6)
    ref.dist.parameterization = "S1"
    grid = np.linspace(-4, 6, 11)
    emp = np.searchsorted(np.sort(x), grid) / x.size
    assert np.max(np.abs(emp - ref.cdf(grid))) < 0.02


@pytest.mark.parametrize("alpha, p, expected", [
    (1.5, 1.49, True), (1.5, 1.5, False), (2.0, 7.0, True), (0.8, 0.79, True),
])
def test_moment_finite(alpha, p, expected):
    assert moment_finite(StableParams(alpha), p) is expected


def test_fractional_moments():
    assert fractional_moment_estimate(StableParams(1.0, 0.0, 0.0, 2.0), 1.0, 0, 10) == 2.0
    cauchy = fractional_moment_estimate(StableParams(1.0), 0.5, 5, 1_000_000)
    assert cauchy == pytest.approx(math.sqrt(2.0), rel=0.02)
    gauss = fractional_moment_estimate(StableParams(2.0), 2.0, 5, 1_000_000)
    assert gauss == pytest.approx(2.0, rel=0.02)


def test_stability_shift_symmetric():
    p = StableParams(1.5, 0.0, 1.0, 1.0)
    assert stability_shift(p, 2) == pytest.approx(2.0 - 2.0 ** (1.0 / 1.5))


@pytest.mark.parametrize("params, n", [(StableParams(1.0), 3), (StableParams(2.0), 2)])
def test_stability_property(params, n):
    rep = stability_property_test(params, n, 100_000, seed=4)
    assert 0.0 <= rep.ks_statistic <= 1.0 and 0.0 <= rep.ks_p_value <= 1.0
    assert rep.ks_p_value > 0.01


def test_stability_test_rejects_skewed():
    with pytest.raises(UnsupportedCaseError):
        stability_property_test(StableParams(1.0, 0.5), 2, 10_000, 0)


@settings(max_examples=40, deadline=None)
@given(alpha=alphas, beta=betas, gamma=st.floats(0.01, 10.0), delta=st.floats(-5, 5),
       seed=st.integers(0, 2**32 - 1))
def test_scale_equivariance(alpha, beta, gamma, delta, seed):
    if alpha == 1.0 and beta != 0.0:
        return
    base = sample_stable(StableParams(alpha, beta), seed, 50)
    x = sample_stable(StableParams(alpha, beta, gamma, delta), seed, 50)
    np.testing.assert_allclose(x, gamma * base + delta, rtol=1e-9, atol=1e-9 * (1 + abs(delta)))


@settings(max_examples=25, deadline=None)
@given(alpha=alphas, beta=betas, seed=st.integers(0, 2**32 - 1))
def test_determinism(alpha, beta, seed):
    p = StableParams(alpha, beta, 1.0, 0.0)
    a, b = sample_stable(p, seed, 64), sample_stable(p, seed, 64)
    assert a.tobytes() == b.tobytes()


def test_divergent_moment_is_refused():
    with pytest.raises(DivergingMomentError):
        fractional_moment_estimate(StableParams(1.0), 1.2, 0, 100)


def test_running_profile_matches_plain_mean():
    p = StableParams(1.5)
    prof = running_moment_profile(p, 0.5, 2, [10, 1000])
    assert prof[-1] == pytest.approx(fractional_moment_estimate(p, 0.5, 2, 1000), rel=1e-12)


def test_heavy_tail_running_estimate_grows():
    # p well beyond alpha so growth dominates the noise of a single stream
    prof = running_moment_profile(StableParams(1.0), 2.0, 9, [10**3, 10**4, 10**5, 10**6])
    assert prof[-1] > 10 * prof[0]
