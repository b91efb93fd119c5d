"""Hellinger and total-variation distances between reweighted posteriors.

Both posteriors must share one list of prior draws; the prior then serves as
the common reference measure r, and dmu/dr at draw i is M * w_mu_i.

Hellinger values follow the convention

    d_H(mu, nu) = 1/2 int (sqrt(dmu/dr) - sqrt(dnu/dr))^2 dr = 1 - BC(mu, nu),

which is the *squared* Hellinger distance under the other common convention;
``hellinger_root`` reports sqrt(d_H) for readers used to that one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ReferenceMismatchError
from .posterior_core import WeightedPosterior, weighted_mean

__all__ = [
    "MetricEstimate",
    "hellinger",
    "hellinger_root",
    "total_variation",
    "qoi_bound_check",
    "QoIBound",
]


@dataclass(frozen=True)
class MetricEstimate:
    value: float
    std_error: float
    sample_count: int
    clamped_by: float = 0.0  # |raw - clamped|, should be tiny in healthy runs


@dataclass(frozen=True)
class QoIBound:
    lhs: float
    rhs: float
    holds: bool
    std_error: float


def _check_pair(mu: WeightedPosterior, nu: WeightedPosterior):
    if not mu.same_reference(nu):
        raise ReferenceMismatchError("posteriors were built on different prior draws")


def _clamp(raw: float, se: float, m: int) -> MetricEstimate:
    val = min(max(raw, 0.0), 1.0)
    return MetricEstimate(val, se, m, abs(raw - val))


def hellinger(post_mu: WeightedPosterior, post_nu: WeightedPosterior) -> MetricEstimate:
    """1 - sum_i sqrt(w_mu_i w_nu_i), with a delta-method standard error."""
    _check_pair(post_mu, post_nu)
    m = post_mu.size
    a = m * post_mu.weights  # density ratios dmu/dr, mean one
    b = m * post_nu.weights
    root = np.sqrt(a * b)
    bc = float(np.mean(root))
    # influence of draw i on 1 - mean(sqrt(ab)) / sqrt(mean(a) mean(b))
    infl = root - 0.5 * bc * (a + b)
    se = float(np.std(infl, ddof=1)) / math.sqrt(m)
    return _clamp(1.0 - bc, se, m)


def hellinger_root(est: MetricEstimate) -> float:
    """sqrt(d_H): the Hellinger distance in the unsquared convention."""
    return math.sqrt(est.value)


def total_variation(post_mu: WeightedPosterior, post_nu: WeightedPosterior) -> MetricEstimate:
    """1/2 sum_i |w_mu_i - w_nu_i|, with a delta-method standard error."""
    _check_pair(post_mu, post_nu)
    m = post_mu.size
    a = m * post_mu.weights
    b = m * post_nu.weights
    diff = np.abs(a - b)
    tv = 0.5 * float(np.mean(diff))
    sign = np.sign(a - b)
    ga = float(np.mean(sign * a))
    gb = float(np.mean(sign * b))
    infl = 0.5 * (diff + (gb * b - ga * a))
    se = float(np.std(infl, ddof=1)) / math.sqrt(m)
    return _clamp(tv, se, m)


def qoi_bound_check(f, post_mu: WeightedPosterior, post_nu: WeightedPosterior,
                    *, convention: str = "one_minus_bc") -> QoIBound:
    """Compare |E_mu f - E_nu f| with sqrt(2) sqrt(E_mu f^2 + E_nu f^2) D.

    ``convention="one_minus_bc"`` takes D = d_H as returned by :func:`hellinger`.
    ``convention="l2"`` takes D = sqrt(2 d_H), the unhalved L2 distance between
    root densities, for which the inequality follows from Cauchy-Schwarz.
    ``holds`` allows three combined standard errors of slack.
    """
    if convention not in ("one_minus_bc", "l2"):
        raise InputError(f"unknown convention {convention!r}")
    _check_pair(post_mu, post_nu)
    vals = np.array([f(d) for d in post_mu.draws], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise InputError("f must be finite on every draw")
    mean_mu, _ = weighted_mean(post_mu, vals)
    mean_nu, _ = weighted_mean(post_nu, vals)
    lhs = abs(float(mean_mu) - float(mean_nu))
    # shared draws: the difference of the two estimates has influence
    # w_mu_i (f_i - E_mu f) - w_nu_i (f_i - E_nu f)
    infl = post_mu.weights * (vals - mean_mu) - post_nu.weights * (vals - mean_nu)
    se_lhs = float(np.sqrt(np.sum(infl * infl)))
    sq_mu, _ = weighted_mean(post_mu, vals**2)
    sq_nu, _ = weighted_mean(post_nu, vals**2)
    h = hellinger(post_mu, post_nu)
    if convention == "one_minus_bc":
        dist, se_dist = h.value, h.std_error
    else:
        dist = math.sqrt(2.0 * h.value)
        se_dist = h.std_error / dist if dist > 0.0 else 0.0
    factor = math.sqrt(2.0) * math.sqrt(float(sq_mu) + float(sq_nu))
    rhs = factor * dist
    se = math.hypot(se_lhs, factor * se_dist)
    return QoIBound(lhs, rhs, bool(lhs <= rhs + 3.0 * se), se)
