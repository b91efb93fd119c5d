"""Series-expansion stable priors u = sum_n u_n psi_n.

Coefficient sequences (scales gamma_n and locations delta_n) are either raw
finite vectors or tagged closed forms ``c n^-s log(n+1)^-t`` / ``c exp(-k n)``.
Tagged forms let ``validate_theorem1`` decide membership of the infinite
sequence analytically; raw vectors are judged on the truncation only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import HypothesisError, MomentOrderError, ParameterDomainError, ShapeError
from .quasi_banach import BasisSpec, orlicz_log_functional, synthesis
from .stable_dist import _cms_standard

__all__ = [
    "PowerLaw",
    "ExponentialLaw",
    "ExpansionSpec",
    "ConvergenceVerdict",
    "FunctionDraw",
    "validate_theorem1",
    "draw_prior",
    "sample_prior",
    "sample_coefficients",
    "empirical_lp_norm",
    "tail_decay_profile",
    "sequence_values",
]

_EPS = 1e-12


@dataclass(frozen=True)
class PowerLaw:
    """c * n^(-exponent) * log(n + 1)^(-log_exponent), n = 1, 2, ..."""

    scale: float
    exponent: float
    log_exponent: float = 0.0

    def values(self, n: int) -> np.ndarray:
        idx = np.arange(1, n + 1, dtype=float)
        return self.scale * idx ** (-self.exponent) * np.log(idx + 1.0) ** (-self.log_exponent)

    def in_lp(self, p: float) -> bool:
        if self.scale == 0.0:
            return True
        s, t = self.exponent, self.log_exponent
        if math.isinf(p):
            return s > 0.0 or (s == 0.0 and t >= 0.0)
        sp = s * p
        if sp > 1.0 + _EPS:
            return True
        if abs(sp - 1.0) <= _EPS:
            return t * p > 1.0 + _EPS
        return False

    def orlicz_finite(self, alpha: float) -> bool:
        if self.scale == 0.0:
            return True
        s, t = self.exponent, self.log_exponent
        sa = s * alpha
        if sa > 1.0 + _EPS:
            return True
        if abs(sa - 1.0) <= _EPS:
            # |log gamma_n| ~ s log n adds one power of log
            return t * alpha > 2.0 + _EPS
        return False

    def to_dict(self):
        return {"law": "power", "scale": self.scale, "exponent": self.exponent,
                "log_exponent": self.log_exponent}


@dataclass(frozen=True)
class ExponentialLaw:
    """c * exp(-rate * n), n = 1, 2, ..."""

    scale: float
    rate: float

    def values(self, n: int) -> np.ndarray:
        return self.scale * np.exp(-self.rate * np.arange(1, n + 1, dtype=float))

    def in_lp(self, p: float) -> bool:
        if self.scale == 0.0 or self.rate > 0.0:
            return True
        return math.isinf(p) and self.rate == 0.0

    def orlicz_finite(self, alpha: float) -> bool:
        return self.scale == 0.0 or self.rate > 0.0

    def to_dict(self):
        return {"law": "exp", "scale": self.scale, "rate": self.rate}


Sequence_ = Union[PowerLaw, ExponentialLaw, np.ndarray]


def sequence_values(seq, n: int) -> np.ndarray:
    if isinstance(seq, (PowerLaw, ExponentialLaw)):
        return seq.values(n)
    arr = np.asarray(seq, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.size < n:
        raise ShapeError(f"sequence has {arr.size} entries, need at least {n}")
    return arr[:n].copy()


def _is_tagged(seq) -> bool:
    return isinstance(seq, (PowerLaw, ExponentialLaw))


def _seq_from_obj(obj):
    if isinstance(obj, (PowerLaw, ExponentialLaw)):
        return obj
    if isinstance(obj, dict):
        law = obj.get("law")
        if law == "power":
            return PowerLaw(float(obj["scale"]), float(obj["exponent"]),
                            float(obj.get("log_exponent", 0.0)))
        if law == "exp":
            return ExponentialLaw(float(obj["scale"]), float(obj["rate"]))
        raise ParameterDomainError(f"unknown sequence law {law!r}")
    if np.ndim(obj) == 0:
        # a scalar is the constant sequence, which has a closed form
        return PowerLaw(float(obj), 0.0)
    return np.asarray(obj, dtype=float)


def _seq_to_obj(seq):
    if _is_tagged(seq):
        return seq.to_dict()
    return [float(x) for x in np.asarray(seq).ravel()]


@dataclass(frozen=True)
class ExpansionSpec:
    """Independent stable coefficients u_n ~ S(alpha, beta_n, gamma_n, delta_n).

    ``alpha = 2`` is admitted so the Gaussian reference prior can share the
    sampling pipeline; ``validate_theorem1`` still rejects it.
    """

    alpha: float
    betas: Sequence_
    gammas: Sequence_
    deltas: Sequence_
    basis: BasisSpec
    truncation: int
    q: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "betas", _seq_from_obj(self.betas))
        object.__setattr__(self, "gammas", _seq_from_obj(self.gammas))
        object.__setattr__(self, "deltas", _seq_from_obj(self.deltas))
        if not 0.0 < self.alpha <= 2.0:
            raise ParameterDomainError(f"alpha must lie in (0, 2], got {self.alpha}")
        if int(self.truncation) < 1 or self.truncation > self.basis.count:
            raise ShapeError(
                f"truncation {self.truncation} must be in [1, {self.basis.count}]"
            )
        if not (self.q > 0.0):
            raise ParameterDomainError("q must be > 0")
        b, g, d = self.beta_vector, self.gamma_vector, self.delta_vector
        if np.any(np.abs(b) >= 1.0) and self.alpha < 2.0:
            raise ParameterDomainError("betas must lie in the open interval (-1, 1)")
        if np.any(g < 0.0) or not np.all(np.isfinite(g)):
            raise ParameterDomainError("gammas must be finite and nonnegative")
        if not np.all(np.isfinite(d)):
            raise ParameterDomainError("deltas must be finite")

    @property
    def beta_vector(self) -> np.ndarray:
        return sequence_values(self.betas, self.truncation)

    @property
    def gamma_vector(self) -> np.ndarray:
        return sequence_values(self.gammas, self.truncation)

    @property
    def delta_vector(self) -> np.ndarray:
        return sequence_values(self.deltas, self.truncation)

    def replace(self, **changes) -> "ExpansionSpec":
        kw = dict(alpha=self.alpha, betas=self.betas, gammas=self.gammas,
                  deltas=self.deltas, basis=self.basis, truncation=self.truncation, q=self.q)
        kw.update(changes)
        return ExpansionSpec(**kw)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": _seq_to_obj(self.betas),
            "gamma": _seq_to_obj(self.gammas),
            "delta": _seq_to_obj(self.deltas),
            "basis": self.basis.family,
            "grid_size": self.basis.grid_size,
            "truncation": self.truncation,
            "q": self.q,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExpansionSpec":
        basis = BasisSpec(d.get("basis", "difference"), int(d["grid_size"]))
        return cls(
            alpha=float(d["alpha"]),
            betas=d.get("beta", 0.0),
            gammas=d["gamma"],
            deltas=d.get("delta", 0.0),
            basis=basis,
            truncation=int(d.get("truncation", basis.count)),
            q=float(d.get("q", 1.0)),
        )


@dataclass(frozen=True)
class ConvergenceVerdict:
    gamma_in_l_alpha: bool
    delta_in_l_q: bool
    orlicz_required: bool
    orlicz_finite: "bool | None"
    overall: bool
    level: str = "analytic"  # or "truncation" when judged on raw vectors


@dataclass(frozen=True)
class FunctionDraw:
    coefficients: np.ndarray
    grid_values: np.ndarray
    seed: int
    index: int = 0


def _close(a, b):
    return abs(a - b) <= _EPS * max(1.0, abs(a), abs(b))


def validate_theorem1(spec: ExpansionSpec) -> ConvergenceVerdict:
    """Check gamma in l^alpha, delta in l^q and, if alpha = q or 2q, the
    l^alpha log l condition."""
    a, q = spec.alpha, spec.q
    if not 0.0 < a < 2.0:
        raise HypothesisError(f"convergence gate needs alpha in (0, 2), got {a}")
    orlicz_required = _close(a, q) or _close(a, 2.0 * q)
    analytic = _is_tagged(spec.gammas) and _is_tagged(spec.deltas)
    if analytic:
        g_ok = spec.gammas.in_lp(a)
        d_ok = spec.deltas.in_lp(q)
        o_ok = spec.gammas.orlicz_finite(a) if orlicz_required else None
    else:
        g, d = spec.gamma_vector, spec.delta_vector
        g_ok = bool(np.isfinite(np.sum(g**a)))
        d_ok = bool(np.all(np.isfinite(d)))
        o_ok = (bool(np.isfinite(orlicz_log_functional(g, a)))
                if orlicz_required else None)
    overall = bool(g_ok and d_ok and (not orlicz_required or o_ok))
    return ConvergenceVerdict(bool(g_ok), bool(d_ok), orlicz_required, o_ok, overall,
                              "analytic" if analytic else "truncation")


def _gate(spec: ExpansionSpec, override: bool):
    if override:
        return
    verdict = validate_theorem1(spec)
    if not verdict.overall:
        raise HypothesisError(f"prior fails the convergence hypotheses: {verdict}")


def sample_coefficients(spec: ExpansionSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    """(count, truncation) array of independent coefficient draws."""
    n = spec.truncation
    b, g, d = spec.beta_vector, spec.gamma_vector, spec.delta_vector
    x = _cms_standard(spec.alpha, b, rng, (count, n))
    out = g * x + d
    if spec.alpha == 1.0:
        pos = g > 0.0
        out[:, pos] += (2.0 / np.pi) * b[pos] * g[pos] * np.log(g[pos])
    return np.where(g == 0.0, d, out)


def sample_prior(spec: ExpansionSpec, seed: int, count: int, *, override: bool = False):
    """``count`` prior draws; draw i is reproducible from (spec, seed, i)."""
    _gate(spec, override)
    coeffs = sample_coefficients(spec, np.random.default_rng(seed), int(count))
    # one synthesis call per draw: a batched product may round differently,
    # and grid_values must equal synthesis(coefficients) bit for bit
    return [FunctionDraw(c, synthesis(c, spec.basis), seed, i) for i, c in enumerate(coeffs)]


def draw_prior(spec: ExpansionSpec, seed: int, *, override: bool = False) -> FunctionDraw:
    return sample_prior(spec, seed, 1, override=override)[0]


def empirical_lp_norm(spec: ExpansionSpec, p: float, draws: int, seed: int, *,
                      override: bool = False) -> float:
    """Monte Carlo estimate of E ||u||_sup^p."""
    if not p > 0.0 or p > spec.q:
        raise ParameterDomainError(f"need 0 < p <= q = {spec.q}, got p = {p}")
    if p >= spec.alpha:
        raise MomentOrderError(f"need p < alpha = {spec.alpha}, got p = {p}")
    _gate(spec, override)
    coeffs = sample_coefficients(spec, np.random.default_rng(seed), int(draws))
    sups = np.max(np.abs(synthesis(coeffs, spec.basis)), axis=1)
    return float(np.mean(sups**p))


def tail_decay_profile(spec: ExpansionSpec, checkpoints, draws: int, seed: int):
    """[(N, mean_k ||sum_{n>N} u_n psi_n||_sup^(alpha/2))] for each checkpoint."""
    checkpoints = [int(c) for c in checkpoints]
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        raise ParameterDomainError("checkpoints must be strictly increasing")
    if checkpoints and (checkpoints[0] < 0 or checkpoints[-1] > spec.truncation):
        raise ParameterDomainError("checkpoints must lie in [0, truncation]")
    p = spec.alpha / 2.0
    coeffs = sample_coefficients(spec, np.random.default_rng(seed), int(draws))
    out = []
    for n_cut in checkpoints:
        tail = coeffs.copy()
        tail[:, :n_cut] = 0.0
        sups = np.max(np.abs(synthesis(tail, spec.basis)), axis=1)
        out.append((n_cut, float(np.mean(sups**p))))
    return out
