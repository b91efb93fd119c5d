"""Univariate alpha-stable laws S(alpha, beta, gamma, delta).

Parameterization is the "S1" convention: for alpha != 1 the characteristic
function is

    exp(i delta t - gamma^alpha |t|^alpha (1 - i beta sign(t) tan(pi alpha / 2)))

and for alpha = 1

    exp(i delta t - gamma |t| (1 + i beta (2/pi) sign(t) log|t|)).

At alpha = 2 this is N(delta, 2 gamma^2); at (1, 0) the Cauchy law with
scale gamma; at (1/2, 1) the Levy law with scale gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import erfc

from .errors import DivergingMomentError, ParameterDomainError, UnsupportedCaseError

__all__ = [
    "StableParams",
    "StabilityReport",
    "sample_stable",
    "stable_cdf_closed_form",
    "moment_finite",
    "fractional_moment_estimate",
    "running_moment_profile",
    "stability_property_test",
    "stability_shift",
]


@dataclass(frozen=True)
class StableParams:
    alpha: float
    beta: float = 0.0
    gamma: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.gamma, self.delta)
        if not all(math.isfinite(float(v)) for v in vals):
            raise ParameterDomainError(f"stable parameters must be finite, got {vals}")
        if not 0.0 < self.alpha <= 2.0:
            raise ParameterDomainError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not -1.0 <= self.beta <= 1.0:
            raise ParameterDomainError(f"beta must lie in [-1, 1], got {self.beta}")
        if self.gamma < 0.0:
            raise ParameterDomainError(f"gamma must be >= 0, got {self.gamma}")

    @property
    def degenerate(self) -> bool:
        return self.gamma == 0.0

    def standardised(self) -> "StableParams":
        return StableParams(self.alpha, self.beta, 1.0, 0.0)


@dataclass(frozen=True)
class StabilityReport:
    n_fold: int
    shift_d: float
    ks_statistic: float
    ks_p_value: float


def _cms_standard(alpha, beta, rng, size):
    """Chambers-Mallows-Stuck draws of S(alpha, beta, 1, 0).

    ``alpha`` and ``beta`` may be scalars or arrays broadcastable to ``size``.
    The uniform and exponential variates are always drawn in the same order,
    so draws for different parameters share common random numbers.
    """
    v = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, size=size)
    w = rng.standard_exponential(size=size)
    return _cms_transform(alpha, beta, v, w)


def _cms_transform(alpha, beta, v, w):
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), v.shape)
    beta = np.broadcast_to(np.asarray(beta, dtype=float), v.shape)
    out = np.empty(v.shape)

    one = alpha == 1.0
    if np.any(one):
        b, vv, ww = beta[one], v[one], w[one]
        half_pi_bv = 0.5 * np.pi + b * vv
        out[one] = (2.0 / np.pi) * (
            half_pi_bv * np.tan(vv)
            - b * np.log((0.5 * np.pi * ww * np.cos(vv)) / half_pi_bv)
        )
    rest = ~one
    if np.any(rest):
        a, b, vv, ww = alpha[rest], beta[rest], v[rest], w[rest]
        t = b * np.tan(0.5 * np.pi * a)
        shift = np.arctan(t) / a
        scale = (1.0 + t * t) ** (1.0 / (2.0 * a))
        out[rest] = (
            scale
            * np.sin(a * (vv + shift))
            / np.cos(vv) ** (1.0 / a)
            * (np.cos(vv - a * (vv + shift)) / ww) ** ((1.0 - a) / a)
        )
    return out


def _scale_location(params: StableParams, x):
    y = params.gamma * x + params.delta
    if params.alpha == 1.0 and params.beta != 0.0 and params.gamma > 0.0:
        y = y + (2.0 / np.pi) * params.beta * params.gamma * math.log(params.gamma)
    return y


def sample_from_rng(params: StableParams, rng: np.random.Generator, size) -> np.ndarray:
    """Draw from ``params`` using an existing generator (shape ``size``)."""
    x = _cms_standard(params.alpha, params.beta, rng, size)
    if params.degenerate:
        return np.full(x.shape, float(params.delta))
    return _scale_location(params, x)


def sample_stable(params: StableParams, seed: int, count: int) -> np.ndarray:
    """Draw ``count`` i.i.d. values from S(alpha, beta, gamma, delta).

    Deterministic in ``seed``. Uses the Chambers-Mallows-Stuck transform of a
    uniform angle and a unit exponential.
    """
    if not isinstance(params, StableParams):
        raise ParameterDomainError("params must be a StableParams instance")
    if int(count) < 1:
        raise ParameterDomainError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    return sample_from_rng(params, rng, int(count))


def stable_cdf_closed_form(params: StableParams, x: float):
    """Exact CDF for the Gaussian, Cauchy and Levy cases; ``None`` otherwise."""
    x = float(x)
    if not math.isfinite(x):
        raise ParameterDomainError(f"x must be finite, got {x}")
    a, b, g, d = params.alpha, params.beta, params.gamma, params.delta
    supported = a == 2.0 or (a == 1.0 and b == 0.0) or (a == 0.5 and b == 1.0)
    if not supported:
        return None
    if g == 0.0:
        return 1.0 if x >= d else 0.0
    z = x - d
    if a == 2.0:
        return float(0.5 * erfc(-z / (2.0 * g)))
    if a == 1.0:
        return float(0.5 + math.atan(z / g) / math.pi)
    if z <= 0.0:
        return 0.0
    return float(erfc(math.sqrt(g / (2.0 * z))))


def moment_finite(params: StableParams, p: float) -> bool:
    if not p > 0.0:
        raise ParameterDomainError(f"moment order must be > 0, got {p}")
    return p < params.alpha or params.alpha == 2.0 or params.gamma == 0.0


def fractional_moment_estimate(params: StableParams, p: float, seed: int, count: int) -> float:
    """Monte Carlo estimate of E|X|^p (plain sample mean)."""
    if not moment_finite(params, p):
        raise DivergingMomentError(
            f"E|X|^{p} is infinite for alpha={params.alpha}"
        )
    if params.degenerate:
        return abs(params.delta) ** p
    x = sample_stable(params, seed, count)
    return float(np.mean(np.abs(x) ** p))


def running_moment_profile(params: StableParams, p: float, seed: int, checkpoints) -> np.ndarray:
    """Running means of |X|^p after each checkpoint count, from one stream.

    Unlike :func:`fractional_moment_estimate` this accepts p >= alpha: it is
    the diagnostic that exposes divergence as growth with the sample count.
    """
    cps = np.asarray(checkpoints, dtype=int)
    if cps.size == 0 or np.any(cps < 1) or np.any(np.diff(cps) <= 0):
        raise ParameterDomainError("checkpoints must be positive and strictly increasing")
    if not p > 0.0:
        raise ParameterDomainError(f"moment order must be > 0, got {p}")
    x = np.abs(sample_stable(params, seed, int(cps[-1]))) ** p
    return np.cumsum(x)[cps - 1] / cps


def stability_shift(params: StableParams, n_fold: int) -> float:
    """Shift d with X_1 + ... + X_n = n^(1/alpha) X + d in law (symmetric case)."""
    if params.beta != 0.0:
        raise UnsupportedCaseError("closed-form shift implemented for beta = 0 only")
    return (n_fold - n_fold ** (1.0 / params.alpha)) * params.delta


def stability_property_test(
    params: StableParams, n_fold: int, count: int, seed: int
) -> StabilityReport:
    """Two-sample KS check of (X_1 + ... + X_n - d) / n^(1/alpha) against X."""
    if params.beta != 0.0:
        raise UnsupportedCaseError(
            "stability test is restricted to symmetric laws (beta = 0)"
        )
    if int(n_fold) < 2:
        raise ParameterDomainError(f"n_fold must be >= 2, got {n_fold}")
    if int(count) < 1000:
        raise ParameterDomainError(f"count must be >= 1000, got {count}")
    n_fold, count = int(n_fold), int(count)
    sum_ss, base_ss = np.random.SeedSequence(seed).spawn(2)
    parts = sample_from_rng(params, np.random.default_rng(sum_ss), (count, n_fold))
    d = stability_shift(params, n_fold)
    rescaled = (parts.sum(axis=1) - d) / n_fold ** (1.0 / params.alpha)
    fresh = sample_from_rng(params, np.random.default_rng(base_ss), count)
    res = stats.ks_2samp(rescaled, fresh)
    return StabilityReport(n_fold, float(d), float(res.statistic), float(res.pvalue))
