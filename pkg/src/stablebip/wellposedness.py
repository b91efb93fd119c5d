"""Empirical checks of Lipschitz dependence of the posterior on the data, and
mesh-refinement studies of posterior summaries."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import linalg

from .errors import FactorizationError, FamilyError, ParameterDomainError, RadiusError, ShapeError
from .inference import ChainConfig, chain_seeds, chain_summary, mh_sample, pool_chains
from .posterior_core import NoiseModel, build_posterior, gaussian_potential
from .prob_metrics import hellinger
from .series_prior import sample_prior

__all__ = [
    "ConjugateSolution",
    "LipschitzScan",
    "conjugate_posterior_oracle",
    "conjugate_log_evidence",
    "gaussian_hellinger",
    "hellinger_lipschitz_scan",
    "discretisation_invariance_study",
    "relative_l2",
]


@dataclass(frozen=True)
class ConjugateSolution:
    posterior_mean: np.ndarray
    posterior_covariance: np.ndarray


def _chol(mat, what):
    try:
        return linalg.cho_factor(mat, lower=True)
    except linalg.LinAlgError as exc:
        raise FactorizationError(f"{what} is not positive definite") from exc


def conjugate_posterior_oracle(G, prior_mean, prior_cov, noise: NoiseModel, y) -> ConjugateSolution:
    """Exact linear-Gaussian posterior, in gain form so that G = 0 returns the
    prior unchanged."""
    G = np.atleast_2d(np.asarray(G, dtype=float))
    m0 = np.atleast_1d(np.asarray(prior_mean, dtype=float))
    c0 = np.atleast_2d(np.asarray(prior_cov, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if G.shape != (y.size, m0.size) or c0.shape != (m0.size, m0.size):
        raise ShapeError("inconsistent dimensions in conjugate problem")
    _chol(c0, "prior covariance")
    cross = c0 @ G.T
    innov = G @ cross + noise.covariance
    fac = _chol(innov, "innovation covariance")
    gain = linalg.cho_solve(fac, cross.T).T
    mean = m0 + gain @ (y - G @ m0)
    cov = c0 - gain @ cross.T
    cov = 0.5 * (cov + cov.T)
    return ConjugateSolution(mean, cov)


def conjugate_log_evidence(G, prior_mean, prior_cov, noise: NoiseModel, y) -> float:
    """log E_prior[exp(-1/2 ||Gamma^(-1/2)(G u - y)||^2)] in closed form."""
    G = np.atleast_2d(np.asarray(G, dtype=float))
    m0 = np.atleast_1d(np.asarray(prior_mean, dtype=float))
    c0 = np.atleast_2d(np.asarray(prior_cov, dtype=float))
    innov = G @ c0 @ G.T + noise.covariance
    fac = _chol(innov, "innovation covariance")
    r = np.atleast_1d(y) - G @ m0
    quad = float(r @ linalg.cho_solve(fac, r))
    logdet_innov = 2.0 * float(np.sum(np.log(np.diag(fac[0]))))
    logdet_noise = 2.0 * float(np.sum(np.log(np.diag(noise.cholesky))))
    return 0.5 * (logdet_noise - logdet_innov) - 0.5 * quad


def gaussian_hellinger(m1, c1, m2, c2) -> float:
    """1 - Bhattacharyya coefficient between N(m1, c1) and N(m2, c2)."""
    m1, m2 = np.atleast_1d(m1), np.atleast_1d(m2)
    c1, c2 = np.atleast_2d(c1), np.atleast_2d(c2)
    cbar = 0.5 * (c1 + c2)
    dm = m1 - m2
    ld = lambda c: np.linalg.slogdet(c)[1]  # noqa: E731
    log_bc = (0.25 * (ld(c1) + ld(c2)) - 0.5 * ld(cbar)
              - 0.125 * float(dm @ np.linalg.solve(cbar, dm)))
    return float(-np.expm1(log_bc))


@dataclass(frozen=True)
class LipschitzScan:
    base_data: np.ndarray
    perturbed_data: list
    steps: list
    distances: np.ndarray
    hellinger_values: np.ndarray
    std_errors: np.ndarray
    ratios: np.ndarray
    sup_ratio: float
    radius_r: float

    def rows(self):
        return [
            {"step": s, "distance": d, "d_H": h, "std_error": e, "ratio": r}
            for s, d, h, e, r in zip(self.steps, self.distances, self.hellinger_values,
                                     self.std_errors, self.ratios)
        ]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "distance", "d_H", "std_error", "ratio"])
            for row in self.rows():
                w.writerow([f"{row[k]:.17g}" for k in ("step", "distance", "d_H",
                                                     "std_error", "ratio")])


def hellinger_lipschitz_scan(problem, y0, directions, step_sizes, r: float) -> LipschitzScan:
    """Estimate d_H(mu^y0, mu^y') for y' = y0 + step * direction on shared draws.

    ``problem`` is (prior_draws, potential). Zero steps are skipped.
    """
    prior_draws, potential = problem
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    if not np.linalg.norm(y0) < r:
        raise RadiusError(f"base data norm {np.linalg.norm(y0):g} is not below r = {r:g}")
    perturbed, steps = [], []
    for direction in directions:
        direction = np.atleast_1d(np.asarray(direction, dtype=float))
        for h in step_sizes:
            if h == 0.0:
                continue
            yp = y0 + h * direction
            if not np.linalg.norm(yp) < r:
                raise RadiusError(f"perturbed data norm {np.linalg.norm(yp):g} leaves r = {r:g}")
            perturbed.append(yp)
            steps.append(float(h))
    base = build_posterior(prior_draws, potential, y0)
    dist, vals, errs = [], [], []
    for yp in perturbed:
        est = hellinger(base, build_posterior(prior_draws, potential, yp))
        dist.append(float(np.linalg.norm(yp - y0)))
        vals.append(est.value)
        errs.append(est.std_error)
    dist = np.array(dist)
    vals = np.array(vals)
    ratios = vals / dist if dist.size else np.array([])
    sup = float(np.max(ratios)) if ratios.size else 0.0
    return LipschitzScan(y0, perturbed, steps, dist, vals, np.array(errs), ratios, sup, float(r))


def relative_l2(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def _interp(grid_x, values, points):
    return np.interp(points, grid_x, values)


@dataclass
class InvarianceRow:
    n: int
    summary: np.ndarray
    extra: dict = field(default_factory=dict)


def discretisation_invariance_study(
    model_family: Callable,
    sizes: Sequence[int],
    y,
    summary: str,
    seed: int,
    *,
    eval_points=None,
    chain: ChainConfig | None = None,
    draws: int = 20_000,
    override: bool = False,
    start: str = "surrogate",
    chains: int = 1,
):
    """Posterior summaries at fixed physical points for each grid size.

    ``model_family(n)`` returns (ExpansionSpec, ForwardModel, NoiseModel) with
    the same observation functionals at every n. ``summary`` is one of

    * ``"median_mcmc"``: pointwise posterior median from :func:`mh_sample`;
    * ``"median_is"``: weighted pointwise median from prior reweighting;
    * ``"conjugate"``: exact posterior mean (= median) for alpha = 2 priors.

    With ``chains > 1`` the MCMC summary pools that many independent chains
    whose seeds are derived from ``seed``.
    Chains start from a prior draw (``start="prior"``) or from the posterior
    mean under a Gaussian prior with the same scales (``start="surrogate"``).
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if chains < 1:
        raise ParameterDomainError("chains must be >= 1")
    if eval_points is None:
        eval_points = (np.arange(32) + 0.5) / 32
    rows = []
    for n in sizes:
        spec, model, noise = model_family(int(n))
        if model.n_obs != y.size or noise.covariance.shape[0] != y.size:
            raise FamilyError(
                f"family at n={n} has {model.n_obs} observations, data has {y.size}"
            )
        grid_x = spec.basis.grid
        psi = spec.basis.matrix[:, : spec.truncation]
        if summary == "conjugate":
            if spec.alpha != 2.0:
                raise ParameterDomainError("conjugate summary needs a Gaussian (alpha = 2) prior")
            prior_cov = np.diag(2.0 * spec.gamma_vector**2)
            sol = conjugate_posterior_oracle(model.operator @ psi, spec.delta_vector,
                                             prior_cov, noise, y)
            grid_vals = psi @ sol.posterior_mean
            extra = {}
        elif summary == "median_mcmc":
            cfg = chain or ChainConfig(steps=200_000, burn_in=50_000,
                                       proposal="coefficient_rw", rw_scale=1.0, seed=seed)
            init = None
            if start == "surrogate":
                init = _surrogate_start(spec, model, noise, y)
            seeds = [seed] if chains == 1 else chain_seeds(seed, chains)
            pot = gaussian_potential(model, noise)
            res = pool_chains(
                mh_sample(spec, pot, y,
                          ChainConfig(cfg.steps, cfg.burn_in, cfg.proposal, cfg.rw_scale, s, cfg.thin),
                          override=override, init=init)
                for s in seeds
            )
            grid_vals = chain_summary(res, spec.basis, [0.5])[0]
            extra = {"acceptance_rate": res.acceptance_rate}
        elif summary == "median_is":
            prior = sample_prior(spec, seed, draws, override=override)
            post = build_posterior(prior, gaussian_potential(model, noise), y)
            grid_vals = _weighted_median(post.grid_values, post.weights)
            extra = {"ess": post.ess}
        else:
            raise ParameterDomainError(f"unknown summary {summary!r}")
        rows.append(InvarianceRow(int(n), _interp(grid_x, grid_vals, eval_points), extra))
    return rows


def _surrogate_start(spec, model, noise, y):
    psi = spec.basis.matrix[:, : spec.truncation]
    cov = np.diag(2.0 * np.maximum(spec.gamma_vector, 1e-300) ** 2)
    return conjugate_posterior_oracle(model.operator @ psi, spec.delta_vector, cov,
                                      noise, y).posterior_mean


def _weighted_median(values, weights):
    order = np.argsort(values, axis=0, kind="stable")
    out = np.empty(values.shape[1])
    for j in range(values.shape[1]):
        idx = order[:, j]
        cw = np.cumsum(weights[idx])
        out[j] = values[idx[np.searchsorted(cw, 0.5)], j]
    return out
