"""One-dimensional deconvolution on [0, 1]: blur, subsample, add noise.

Observation points and the blur kernel are fixed in physical coordinates, so
data generated once can be reused at every grid resolution.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .errors import GeometryError, ParameterDomainError
from .posterior_core import ForwardModel, NoiseModel
from .quasi_banach import BasisSpec
from .series_prior import ExpansionSpec, PowerLaw

__all__ = [
    "observation_points",
    "blur_matrix",
    "make_deconvolution_family",
    "deconvolution_operator",
    "difference_prior",
    "step_truth",
    "synthetic_data",
]


def observation_points(count: int) -> np.ndarray:
    return (np.arange(count) + 0.5) / count


def blur_matrix(grid: np.ndarray, points: np.ndarray, width: float) -> np.ndarray:
    """Rows are Gaussian kernel weights (std ``width``) normalised to sum to one.

    Width 0 reduces to evaluation at the nearest grid point.
    """
    d = points[:, None] - grid[None, :]
    if width == 0.0:
        out = np.zeros(d.shape)
        out[np.arange(len(points)), np.argmin(np.abs(d), axis=1)] = 1.0
        return out
    logk = -0.5 * (d / width) ** 2
    return np.exp(logk - logsumexp(logk, axis=1, keepdims=True))


def difference_prior(n: int, alpha: float = 1.0, *, level_scale: float = 1.0,
                     increment_scale=0.1, scaling: str = "physical") -> ExpansionSpec:
    """Stable prior on increments of a grid signal (difference basis).

    ``scaling="physical"`` gives increment scales ``increment_scale * h^(1/alpha)``
    with h = 1/n, so sums of increments over a fixed interval keep the same law
    at every n. ``scaling="index"`` uses ``increment_scale / k^2`` for the k-th
    coefficient (a tagged power law). The first coefficient sets the level at
    the left boundary and has scale ``level_scale`` under physical scaling.
    """
    basis = BasisSpec("difference", n)
    if scaling == "physical":
        gam = np.full(n, float(increment_scale) * (1.0 / n) ** (1.0 / alpha))
        gam[0] = level_scale
    elif scaling == "index":
        gam = PowerLaw(float(increment_scale), 2.0)
    else:
        raise ParameterDomainError(f"unknown prior scaling {scaling!r}")
    return ExpansionSpec(alpha=alpha, betas=0.0, gammas=gam, deltas=0.0,
                         basis=basis, truncation=n, q=1.0)


def deconvolution_operator(n: int, observations: int, kernel_width: float,
                           noise_scale: float):
    """(ForwardModel, NoiseModel): blur on the n-cell grid, then sample."""
    if observations > n:
        raise ParameterDomainError(f"{observations} observations exceed grid size {n}")
    if not 0.0 <= kernel_width <= 1.0:
        raise GeometryError(f"kernel width {kernel_width} does not fit the unit domain")
    if not noise_scale > 0.0:
        raise ParameterDomainError("noise scale must be > 0")
    grid = (np.arange(n) + 0.5) / n
    g = blur_matrix(grid, observation_points(observations), kernel_width)
    model = ForwardModel(g, f"gaussian blur w={kernel_width:g}, {observations} obs, n={n}")
    return model, NoiseModel.isotropic(observations, noise_scale)


def make_deconvolution_family(n: int, observations: int, kernel_width: float,
                              noise_scale: float, **prior_kw):
    """(ExpansionSpec, ForwardModel, NoiseModel) for an n-point grid."""
    model, noise = deconvolution_operator(n, observations, kernel_width, noise_scale)
    return difference_prior(n, **prior_kw), model, noise


def step_truth(x):
    """Piecewise-constant test signal with jumps at 1/3 and 2/3, which are not
    cell boundaries of any dyadic grid."""
    x = np.asarray(x, dtype=float)
    return np.where(x < 1.0 / 3.0, 0.0, np.where(x < 2.0 / 3.0, 1.0, 0.4))


def synthetic_data(observations: int, kernel_width: float, noise_scale: float,
                   seed: int, truth=step_truth, fine_n: int = 4096) -> np.ndarray:
    """Blurred truth at the observation points (fine-grid quadrature) plus noise."""
    fine = (np.arange(fine_n) + 0.5) / fine_n
    clean = blur_matrix(fine, observation_points(observations), kernel_width) @ truth(fine)
    noise = noise_scale * np.random.default_rng(seed).standard_normal(observations)
    return clean + noise
