"""MAP estimation and Metropolis-Hastings sampling over series coefficients.

pCN is only prior-reversible for Gaussian priors, so two samplers that leave
a stable prior invariant are provided instead:

* ``independence_prior`` proposes fresh prior draws; the prior cancels and
  the acceptance probability is min(1, exp(Phi(current) - Phi(proposal))).
* ``coefficient_rw`` moves one coefficient by a symmetric stable increment and
  includes the prior density ratio. This needs a closed-form coefficient
  density, so it is restricted to alpha = 1 (with beta = 0) and alpha = 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import InputError, IterationLimitError, ParameterDomainError, UnsupportedCaseError
from .posterior_core import Potential
from .quasi_banach import BasisSpec, synthesis
from .series_prior import ExpansionSpec, _gate, sample_coefficients
from .stable_dist import _cms_standard

__all__ = [
    "Regulariser",
    "ChainConfig",
    "ChainResult",
    "map_estimate",
    "mh_sample",
    "chain_summary",
    "effective_sample_size",
    "pool_chains",
    "chain_seeds",
]

GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)
MAX_SWEEPS = 10_000


@dataclass(frozen=True)
class Regulariser:
    kind: str = "none"  # "quadratic" -> weight/2 ||v||^2, "one_norm" -> weight ||v||_1
    weight: float = 0.0

    def __post_init__(self):
        if self.kind not in ("quadratic", "one_norm", "none"):
            raise ParameterDomainError(f"unknown regulariser kind {self.kind!r}")
        if not self.weight >= 0.0:
            raise ParameterDomainError("regulariser weight must be >= 0")

    def term(self, t: float) -> float:
        """Contribution of a single coefficient value."""
        if self.kind == "quadratic":
            return 0.5 * self.weight * t * t
        if self.kind == "one_norm":
            return self.weight * abs(t)
        return 0.0

    def __call__(self, v) -> float:
        v = np.asarray(v, dtype=float)
        if self.kind == "quadratic":
            return 0.5 * self.weight * float(v @ v)
        if self.kind == "one_norm":
            return self.weight * float(np.sum(np.abs(v)))
        return 0.0


@dataclass(frozen=True)
class ChainConfig:
    steps: int
    burn_in: int = 0
    proposal: str = "independence_prior"
    rw_scale: float = 1.0
    seed: int = 0
    thin: int = 1

    def __post_init__(self):
        if int(self.steps) < 1:
            raise ParameterDomainError("steps must be positive")
        if not 0 <= self.burn_in < self.steps:
            raise ParameterDomainError("burn_in must satisfy 0 <= burn_in < steps")
        if self.proposal not in ("independence_prior", "coefficient_rw"):
            raise ParameterDomainError(f"unknown proposal {self.proposal!r}")
        if not self.rw_scale > 0.0:
            raise ParameterDomainError("rw_scale must be > 0")
        if int(self.thin) < 1:
            raise ParameterDomainError("thin must be >= 1")


@dataclass(frozen=True)
class ChainResult:
    states: np.ndarray  # (kept, truncation), post burn-in, thinned
    acceptance_rate: float
    ess_per_coordinate: np.ndarray
    accepted: int
    potential_trace: np.ndarray


def _bracket(f, x0, f0, step):
    """Return (a, b) around a local minimum of a unimodal f."""
    x1, f1 = x0 + step, f(x0 + step)
    if f1 >= f0:
        xm, fm = x0 - step, f(x0 - step)
        if fm >= f0:
            return x0 - step, x0 + step
        step, x1, f1 = -step, xm, fm
    a, b, fb = x0, x1, f1
    while True:
        step *= 2.0
        c = b + step
        fc = f(c)
        if fc >= fb:
            return (a, c) if a < c else (c, a)
        a, b, fb = b, c, fc


def _golden_section(f, a, b, xtol):
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def map_estimate(potential: Potential, reg: Regulariser, y, init, basis: BasisSpec,
                 tol: float = 1e-10, *, max_sweeps: int = MAX_SWEEPS, xtol: float = 1e-11):
    """Minimise v -> Phi(synthesis(v); y) + R(v) by cyclic coordinate descent.

    Each coordinate is updated by a golden-section line search, so the
    non-smooth one-norm regulariser needs no special handling. Stops when a
    full sweep lowers the objective by less than ``tol``.
    """
    if not tol > 0.0:
        raise ParameterDomainError("tol must be > 0")
    y = np.asarray(y, dtype=float)
    v = np.array(init, dtype=float)
    k = v.size
    psi = basis.matrix[:, :k]

    if potential.whitened is not None:
        w_op, noise = potential.whitened
        cols = w_op @ psi
        resid = cols @ v - noise.whiten(y)

        def misfit_line(j, t):
            r = resid + (t - v[j]) * cols[:, j]
            return 0.5 * float(r @ r)

        def commit(j, t):
            nonlocal resid
            resid = resid + (t - v[j]) * cols[:, j]
    else:
        grid = psi @ v

        def misfit_line(j, t):
            return potential.evaluate(grid + (t - v[j]) * psi[:, j], y)

        def commit(j, t):
            nonlocal grid
            grid = grid + (t - v[j]) * psi[:, j]

    def objective():
        return potential.evaluate(psi @ v, y) + reg(v)

    current = objective()
    for _ in range(int(max_sweeps)):
        start = current
        for j in range(k):
            rest = current - reg.term(v[j]) - misfit_line(j, v[j])

            def line(t, j=j):
                return misfit_line(j, t) + reg.term(t)

            f0 = line(v[j])
            step = 0.5 * max(1.0, abs(v[j]))
            a, b = _bracket(line, v[j], f0, step)
            t, ft = _golden_section(line, a, b, xtol)
            if ft < f0:
                commit(j, t)
                v[j] = t
                current = rest + ft
        current = objective()
        if start - current < tol:
            return v
    raise IterationLimitError(f"no convergence within {max_sweeps} sweeps",
                              best=v.copy(), objective=current)


def effective_sample_size(x) -> np.ndarray:
    """Per-column ESS from autocorrelations, truncated by Geyer's initial
    positive sequence. Columns with zero variance get ESS = n."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, d = x.shape
    out = np.empty(d)
    if n < 4:
        out.fill(float(n))
        return out
    centred = x - x.mean(axis=0)
    nfft = 1 << (2 * n - 1).bit_length()
    spec = np.fft.rfft(centred, n=nfft, axis=0)
    acov = np.fft.irfft(spec * np.conj(spec), n=nfft, axis=0)[:n] / n
    for j in range(d):
        if acov[0, j] <= 0.0:
            out[j] = float(n)
            continue
        rho = acov[:, j] / acov[0, j]
        tau = -1.0
        prev = math.inf
        for m in range(0, n - 1, 2):
            pair = rho[m] + rho[m + 1]
            if pair <= 0.0:
                break
            pair = min(pair, prev)
            tau += 2.0 * pair
            prev = pair
        out[j] = min(max(n / max(tau, 1e-12), 1.0), float(n))
    return out


def _log_prior_ratio_factory(spec: ExpansionSpec):
    alpha = spec.alpha
    g, d, b = spec.gamma_vector, spec.delta_vector, spec.beta_vector
    if alpha == 1.0:
        if np.any(b != 0.0):
            raise UnsupportedCaseError("coefficient_rw at alpha = 1 needs beta = 0")

        def log_density(j, x):
            z = (x - d[j]) / g[j]
            return -math.log1p(z * z)
    elif alpha == 2.0:
        def log_density(j, x):
            z = (x - d[j]) / g[j]
            return -0.25 * z * z
    else:
        raise UnsupportedCaseError(
            "coefficient_rw needs a closed-form prior density (alpha in {1, 2})"
        )
    return log_density


def mh_sample(prior_spec: ExpansionSpec, potential: Potential, y, config: ChainConfig,
              *, override: bool = False, init=None) -> ChainResult:
    """Metropolis-Hastings chain targeting exp(-Phi(u; y)) mu_0(du)."""
    _gate(prior_spec, override)
    rng = np.random.default_rng(config.seed)
    y = np.asarray(y, dtype=float)
    basis = prior_spec.basis
    n = prior_spec.truncation
    psi = basis.matrix[:, :n]

    v = (sample_coefficients(prior_spec, rng, 1)[0] if init is None
         else np.array(init, dtype=float))
    phi = potential.evaluate(psi @ v, y)

    steps, burn, thin = int(config.steps), int(config.burn_in), int(config.thin)
    kept = np.empty(((steps - burn + thin - 1) // thin, n))
    trace = np.empty(kept.shape[0])
    accepted = 0

    if config.proposal == "independence_prior":
        log_u = np.log(rng.uniform(size=steps))
        proposals = sample_coefficients(prior_spec, rng, steps)
        phis = potential.batch(proposals @ psi.T, y)
        for i in range(steps):
            if log_u[i] < phi - phis[i]:
                v, phi = proposals[i], phis[i]
                if i >= burn:
                    accepted += 1
            if i >= burn and (i - burn) % thin == 0:
                kept[(i - burn) // thin] = v
                trace[(i - burn) // thin] = phi
    else:
        accepted = _run_coefficient_rw(prior_spec, potential, y, config, rng, v, phi,
                                       psi, kept, trace)

    rate = accepted / (steps - burn)
    return ChainResult(kept, rate, effective_sample_size(kept), accepted, trace)


_CHUNK = 1 << 18


@numba.njit(cache=True)
def _rw_kernel(coords, steps_, log_u, v, resid, cols, gam, dlt, cauchy,
               phi, start, burn, thin, kept, trace):
    accepted = 0
    for k in range(coords.size):
        i = start + k
        j = coords[k]
        new = v[j] + steps_[k]
        phi_new = 0.0
        for m in range(resid.size):
            r = resid[m] + steps_[k] * cols[j, m]
            phi_new += r * r
        phi_new *= 0.5
        z_new = (new - dlt[j]) / gam[j]
        z_old = (v[j] - dlt[j]) / gam[j]
        if cauchy:
            log_prior = math.log1p(z_old * z_old) - math.log1p(z_new * z_new)
        else:
            log_prior = 0.25 * (z_old * z_old - z_new * z_new)
        if log_u[k] < phi - phi_new + log_prior:
            for m in range(resid.size):
                resid[m] += steps_[k] * cols[j, m]
            v[j] = new
            phi = phi_new
            if i >= burn:
                accepted += 1
        if i >= burn and (i - burn) % thin == 0:
            row = (i - burn) // thin
            for m in range(v.size):
                kept[row, m] = v[m]
            trace[row] = phi
    return accepted, phi


def _run_coefficient_rw(spec, potential, y, config, rng, v, phi, psi, kept, trace):
    log_density = _log_prior_ratio_factory(spec)
    g, d = spec.gamma_vector, spec.delta_vector
    free = np.flatnonzero(g > 0.0)
    if free.size == 0:
        raise InputError("all coefficients are degenerate; nothing to move")
    steps, burn, thin = int(config.steps), int(config.burn_in), int(config.thin)
    v = v.copy()
    accepted = 0
    whitened = potential.whitened
    if whitened is not None:
        w_op, noise = whitened
        cols = np.ascontiguousarray((w_op @ psi).T)  # row j: whitened image of psi_j
        resid = cols.T @ v - noise.whiten(y)
    # random numbers are drawn chunk by chunk in a fixed order
    for start in range(0, steps, _CHUNK):
        size = min(_CHUNK, steps - start)
        log_u = np.log(rng.uniform(size=size))
        coords = free[rng.integers(free.size, size=size)]
        incr = config.rw_scale * g[coords] * _cms_standard(spec.alpha, 0.0, rng, size)
        if whitened is not None:
            acc, phi = _rw_kernel(coords, incr, log_u, v, resid, cols, g, d,
                                  spec.alpha == 1.0, phi, start, burn, thin, kept, trace)
            accepted += acc
            continue
        for k in range(size):
            i = start + k
            j = coords[k]
            new = v[j] + incr[k]
            trial = v.copy()
            trial[j] = new
            phi_new = potential.evaluate(psi @ trial, y)
            log_a = phi - phi_new + log_density(j, new) - log_density(j, v[j])
            if log_u[k] < log_a:
                v[j] = new
                phi = phi_new
                if i >= burn:
                    accepted += 1
            if i >= burn and (i - burn) % thin == 0:
                kept[(i - burn) // thin] = v
                trace[(i - burn) // thin] = phi
    return accepted


def chain_summary(result: ChainResult, basis: BasisSpec, quantiles) -> np.ndarray:
    """(len(quantiles), grid_size) pointwise quantiles of synthesised states.

    Quantiles interpolate linearly between order statistics.
    """
    qs = np.asarray(quantiles, dtype=float)
    if np.any((qs <= 0.0) | (qs >= 1.0)):
        raise ParameterDomainError("quantiles must lie in (0, 1)")
    if result.states.shape[0] == 0:
        raise InputError("chain has no post burn-in states")
    grid = synthesis(result.states, basis)
    return np.quantile(grid, qs, axis=0, method="linear")


def pool_chains(results) -> ChainResult:
    """Merge finished chains: states and traces are stacked, counts summed."""
    results = list(results)
    if not results:
        raise InputError("no chains to pool")
    states = np.concatenate([r.states for r in results], axis=0)
    accepted = sum(r.accepted for r in results)
    rate = float(np.mean([r.acceptance_rate for r in results]))
    ess = np.sum([r.ess_per_coordinate for r in results], axis=0)
    trace = np.concatenate([r.potential_trace for r in results])
    return ChainResult(states, rate, ess, accepted, trace)


def chain_seeds(seed: int, chains: int) -> list:
    """Disjoint integer seeds for independent chains derived from one seed."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(chains, np.uint32)]
