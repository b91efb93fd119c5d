"""Forward models, misfit potentials and posteriors by prior reweighting.

The posterior is represented by self-normalised importance sampling with the
prior as proposal: draws u_i ~ mu_0 carry weights proportional to
exp(-Phi(u_i; y)), and Z(y) is estimated by the mean of exp(-Phi).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import linalg
from scipy.special import logsumexp

from .errors import (
    DegenerateWeightsError,
    FactorizationError,
    InputError,
    RadiusError,
    ShapeError,
)
from .series_prior import FunctionDraw

log = logging.getLogger(__name__)

__all__ = [
    "ForwardModel",
    "NoiseModel",
    "Potential",
    "WeightedPosterior",
    "gaussian_potential",
    "zero_potential",
    "constant_potential",
    "estimate_z",
    "build_posterior",
    "verify_bounds",
    "weighted_mean",
    "stack_draws",
]

# spread of log-weights beyond which most draws carry no weight at all
LOG_WEIGHT_SPREAD_WARN = 700.0


@dataclass(frozen=True)
class ForwardModel:
    """Linear observation operator G, a dense (n_obs, grid_size) matrix."""

    operator: np.ndarray
    description: str = ""

    def __post_init__(self):
        op = np.array(self.operator, dtype=float, ndmin=2)
        if not np.all(np.isfinite(op)):
            raise InputError("forward operator has non-finite entries")
        op.setflags(write=False)
        object.__setattr__(self, "operator", op)

    @property
    def n_obs(self) -> int:
        return self.operator.shape[0]

    @property
    def grid_size(self) -> int:
        return self.operator.shape[1]

    def __call__(self, u):
        return np.asarray(u, dtype=float) @ self.operator.T


@dataclass(frozen=True)
class NoiseModel:
    """Centred Gaussian noise with SPD covariance Gamma."""

    covariance: np.ndarray
    cholesky: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        cov = np.array(self.covariance, dtype=float, ndmin=2)
        if cov.shape[0] != cov.shape[1]:
            raise ShapeError(f"covariance must be square, got {cov.shape}")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12):
            raise FactorizationError("covariance is not symmetric")
        try:
            chol = linalg.cholesky(cov, lower=True)
        except linalg.LinAlgError as exc:
            raise FactorizationError(f"covariance is not positive definite: {exc}") from exc
        cov.setflags(write=False)
        chol.setflags(write=False)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "cholesky", chol)

    @classmethod
    def isotropic(cls, n_obs: int, sigma: float) -> "NoiseModel":
        return cls(sigma**2 * np.eye(n_obs))

    def whiten(self, x):
        """Gamma^(-1/2) x via the Cholesky factor (last axis is the data axis)."""
        x = np.asarray(x, dtype=float)
        return linalg.solve_triangular(self.cholesky, x.T, lower=True).T


@dataclass(frozen=True)
class Potential:
    """Misfit Phi(u; y) with declared bound functions.

    ``bound_m1(r, s)`` lower-bounds Phi(u; y) for ||u||_U = s and ||y|| < r;
    ``bound_m2(r, s)`` gives the log of the Lipschitz constant in y.
    ``evaluate_batch`` is an optional vectorised form over rows of U.
    ``whitened`` holds (Gamma^(-1/2) G, noise) for linear-Gaussian potentials so
    samplers can update residuals incrementally.
    """

    evaluate: Callable[[np.ndarray, np.ndarray], float]
    bound_m1: Callable[[float, float], float]
    bound_m2: Callable[[float, float], float]
    evaluate_batch: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    whitened: Optional[tuple] = None
    description: str = ""

    def __call__(self, u, y) -> float:
        return self.evaluate(u, y)

    def batch(self, grid_values: np.ndarray, y) -> np.ndarray:
        grid_values = np.atleast_2d(grid_values)
        if self.evaluate_batch is not None:
            return np.asarray(self.evaluate_batch(grid_values, y), dtype=float)
        return np.array([self.evaluate(u, y) for u in grid_values], dtype=float)

    def shifted(self, c: float) -> "Potential":
        """Phi + c, with bounds shifted accordingly."""
        batch = None
        if self.evaluate_batch is not None:
            batch = lambda U, y: self.evaluate_batch(U, y) + c  # noqa: E731
        return Potential(
            evaluate=lambda u, y: self.evaluate(u, y) + c,
            bound_m1=lambda r, s: self.bound_m1(r, s) + c,
            bound_m2=self.bound_m2,
            evaluate_batch=batch,
            description=f"{self.description} + {c}",
        )


def zero_potential() -> Potential:
    return constant_potential(0.0)


def constant_potential(c: float) -> Potential:
    c = float(c)
    return Potential(
        evaluate=lambda u, y: c,
        bound_m1=lambda r, s: c,
        bound_m2=lambda r, s: -math.inf,
        evaluate_batch=lambda U, y: np.full(np.shape(U)[0], c),
        description=f"constant {c}",
    )


def _sup_to_l2_norm(a: np.ndarray) -> float:
    """Upper bound on sup_{||u||_inf <= 1} ||a u||_2."""
    if a.size == 0:
        return 0.0
    by_columns = float(np.sum(np.linalg.norm(a, axis=0)))
    by_spectral = math.sqrt(a.shape[1]) * float(np.linalg.norm(a, 2))
    return min(by_columns, by_spectral)


def gaussian_potential(model: ForwardModel, noise: NoiseModel) -> Potential:
    """Phi(u; y) = 1/2 ||Gamma^(-1/2) (G u - y)||^2.

    bound_m1 = 0. bound_m2(r, s) = log(c1 s + c2 r) with
    c1 = ||Gamma^(-1/2)|| ||Gamma^(-1/2) G||_(sup->2), c2 = ||Gamma^(-1/2)||^2,
    which follows from expanding the difference of the two squares.
    """
    if model.n_obs != noise.covariance.shape[0]:
        raise ShapeError(
            f"forward model has {model.n_obs} outputs, noise has {noise.covariance.shape[0]}"
        )
    w_op = noise.whiten(model.operator.T).T  # Gamma^(-1/2) G
    w_op.setflags(write=False)
    inv_sqrt_norm = 1.0 / math.sqrt(float(np.linalg.eigvalsh(noise.covariance)[0]))
    c1 = inv_sqrt_norm * _sup_to_l2_norm(w_op)
    c2 = inv_sqrt_norm**2

    def evaluate(u, y):
        res = w_op @ np.asarray(u, dtype=float) - noise.whiten(y)
        return 0.5 * float(res @ res)

    def evaluate_batch(U, y):
        res = np.asarray(U, dtype=float) @ w_op.T - noise.whiten(y)
        return 0.5 * np.einsum("ij,ij->i", res, res)

    def bound_m2(r, s):
        val = c1 * s + c2 * r
        return math.log(val) if val > 0.0 else -math.inf

    return Potential(
        evaluate=evaluate,
        bound_m1=lambda r, s: 0.0,
        bound_m2=bound_m2,
        evaluate_batch=evaluate_batch,
        whitened=(w_op, noise),
        description=model.description or "gaussian misfit",
    )


def stack_draws(draws: Sequence[FunctionDraw]):
    """(coefficients, grid_values) as 2-D arrays, one row per draw."""
    if len(draws) == 0:
        raise InputError("empty draw list")
    return (np.stack([d.coefficients for d in draws]),
            np.stack([d.grid_values for d in draws]))


def _potential_values(draws, potential, y, grid_values=None):
    if grid_values is None:
        grid_values = stack_draws(draws)[1]
    phi = potential.batch(grid_values, np.asarray(y, dtype=float))
    if not np.all(np.isfinite(phi)):
        raise InputError("potential returned non-finite values")
    return phi


def _z_from_phi(phi: np.ndarray):
    m = phi.size
    shift = float(np.min(phi))
    scaled = np.exp(-(phi - shift))
    base = math.exp(-shift)
    z = base * float(np.mean(scaled))
    se = base * float(np.std(scaled, ddof=1)) / math.sqrt(m) if m > 1 else 0.0
    return z, se


def estimate_z(prior_draws, potential: Potential, y):
    """Sample mean and standard error of exp(-Phi(u_i; y)) over prior draws."""
    if len(prior_draws) < 2:
        raise InputError("need at least two prior draws to estimate Z")
    return _z_from_phi(_potential_values(prior_draws, potential, y))


@dataclass(frozen=True)
class WeightedPosterior:
    draws: list
    log_weights: np.ndarray
    weights: np.ndarray
    z_estimate: float
    z_std_error: float
    data: np.ndarray
    potential_values: np.ndarray
    ess: float
    log_z: float
    coefficients: np.ndarray = field(repr=False, default=None)
    grid_values: np.ndarray = field(repr=False, default=None)

    @property
    def size(self) -> int:
        return self.weights.size

    def same_reference(self, other: "WeightedPosterior") -> bool:
        if self.draws is other.draws:
            return True
        if self.size != other.size:
            return False
        keys = [(d.seed, d.index) for d in self.draws]
        if keys != [(d.seed, d.index) for d in other.draws]:
            return False
        return bool(np.array_equal(self.coefficients, other.coefficients))


def build_posterior(prior_draws, potential: Potential, y) -> WeightedPosterior:
    """Self-normalised weights exp(-Phi) over prior draws (log-sum-exp)."""
    if len(prior_draws) < 2:
        raise InputError("need at least two prior draws")
    coeffs, grid = stack_draws(prior_draws)
    y = np.asarray(y, dtype=float)
    phi = _potential_values(prior_draws, potential, y, grid)
    log_w = -phi
    top = float(np.max(log_w))
    if not math.isfinite(top):
        raise DegenerateWeightsError("no draw has a finite log-weight")
    spread = top - float(np.min(log_w))
    if spread > LOG_WEIGHT_SPREAD_WARN:
        log.warning("log-weight spread %.3g: many weights underflow to zero", spread)
    w = np.exp(log_w - top)
    total = float(np.sum(w))
    if not total > 0.0:
        raise DegenerateWeightsError("all weights underflow after shift")
    w = w / total
    m = phi.size
    log_z = float(logsumexp(log_w)) - math.log(m)
    z, se = _z_from_phi(phi)
    ess = float(1.0 / np.sum(w * w))
    for arr in (log_w, w, phi, coeffs, grid):
        arr.setflags(write=False)
    return WeightedPosterior(
        draws=list(prior_draws), log_weights=log_w, weights=w, z_estimate=z,
        z_std_error=se, data=y, potential_values=phi, ess=min(max(ess, 1.0), float(m)),
        log_z=log_z, coefficients=coeffs, grid_values=grid,
    )


def weighted_mean(post: WeightedPosterior, values):
    """Self-normalised estimate of E[f] and its delta-method standard error.

    ``values`` holds f(u_i) per draw (1-D) or per draw and component (2-D).
    """
    values = np.asarray(values, dtype=float)
    w = post.weights
    mean = np.tensordot(w, values, axes=(0, 0))
    centred = values - mean
    se = np.sqrt(np.tensordot(w * w, centred * centred, axes=(0, 0)))
    return mean, se


def verify_bounds(potential: Potential, prior_draws, y_set, r: float):
    """Check the lower bound on Phi and the Lipschitz bound in y on every draw.

    Returns a list of violation records; an empty list means both bounds held.
    """
    ys = [np.asarray(y, dtype=float) for y in y_set]
    for y in ys:
        if not np.linalg.norm(y) < r:
            raise RadiusError(f"data norm {np.linalg.norm(y)} is not below r = {r}")
    _, grid = stack_draws(prior_draws)
    norms = np.max(np.abs(grid), axis=1)
    phi = np.column_stack([potential.batch(grid, y) for y in ys])
    violations = []
    for i, s in enumerate(norms):
        m1 = potential.bound_m1(r, float(s))
        for j in range(len(ys)):
            if phi[i, j] < m1 - 1e-12 * max(1.0, abs(m1)):
                violations.append({"kind": "lower", "draw": i, "y": j,
                                   "phi": float(phi[i, j]), "bound": float(m1)})
        lip = math.exp(potential.bound_m2(r, float(s)))
        for j in range(len(ys)):
            for k in range(j + 1, len(ys)):
                lhs = abs(phi[i, j] - phi[i, k])
                rhs = lip * float(np.linalg.norm(ys[j] - ys[k]))
                if lhs > rhs * (1.0 + 1e-10) + 1e-12:
                    violations.append({"kind": "lipschitz", "draw": i, "y": (j, k),
                                       "lhs": float(lhs), "bound": float(rhs)})
    return violations
