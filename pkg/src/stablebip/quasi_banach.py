"""Finite truncations of quasi-Banach sequence spaces and grid bases.

Functions live on a uniform grid of ``grid_size`` points and the sup-norm on
that grid stands in for the norm of the function space U.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ParameterDomainError, ShapeError

__all__ = [
    "QuasinormSpace",
    "BasisSpec",
    "FrameSpec",
    "lp_quasinorm",
    "weak_triangle_constant",
    "orlicz_log_functional",
    "synthesis",
    "certify_embedding",
    "sup_norm",
]

BASIS_FAMILIES = ("fourier", "haar", "difference", "canonical")


def _check_exponent(p):
    p = float(p)
    if math.isnan(p) or p <= 0.0:
        raise ParameterDomainError(f"exponent must be > 0 or inf, got {p}")
    return p


def weak_triangle_constant(p: float) -> float:
    """Smallest K with ||x + y||_p <= K (||x||_p + ||y||_p)."""
    p = _check_exponent(p)
    if p >= 1.0:
        return 1.0
    return 2.0 ** (1.0 / p - 1.0)


@dataclass(frozen=True)
class QuasinormSpace:
    p: float

    def __post_init__(self):
        _check_exponent(self.p)

    @property
    def K(self) -> float:
        return weak_triangle_constant(self.p)

    def norm(self, v) -> float:
        return lp_quasinorm(v, self.p)


def lp_quasinorm(v, p: float) -> float:
    """(sum |v_n|^p)^(1/p), or max |v_n| for p = inf."""
    p = _check_exponent(p)
    v = np.abs(np.asarray(v, dtype=float)).ravel()
    if not np.all(np.isfinite(v)):
        raise ParameterDomainError("vector entries must be finite")
    if v.size == 0:
        return 0.0
    m = float(v.max())
    if m == 0.0:
        return 0.0
    if math.isinf(p):
        return m
    # factor out the max to avoid overflow for small p
    return m * float(np.sum((v / m) ** p)) ** (1.0 / p)


def orlicz_log_functional(gamma, alpha: float) -> float:
    """sum_n |gamma_n^alpha log gamma_n| with 0 log 0 = 0 (natural log)."""
    g = np.asarray(gamma, dtype=float).ravel()
    if np.any(g < 0.0) or not np.all(np.isfinite(g)):
        raise ParameterDomainError("gamma entries must be finite and nonnegative")
    pos = g[g > 0.0]
    return float(np.sum(np.abs(pos**alpha * np.log(pos))))


def sup_norm(u) -> float:
    u = np.asarray(u, dtype=float)
    return float(np.max(np.abs(u))) if u.size else 0.0


@lru_cache(maxsize=64)
def _basis_matrix(family: str, grid_size: int) -> np.ndarray:
    n = grid_size
    if family == "canonical":
        mat = np.eye(n)
    elif family == "difference":
        # psi_k = indicator of grid points >= k, so synthesis is a cumulative sum
        mat = np.tril(np.ones((n, n)))
    elif family == "fourier":
        x = np.arange(n) / n
        cols = [np.ones(n)]
        for k in range(1, n // 2 + 1):
            cols.append(np.cos(2 * np.pi * k * x))
            if len(cols) < n and 2 * k < n:
                cols.append(np.sin(2 * np.pi * k * x))
        mat = np.column_stack(cols[:n])
    elif family == "haar":
        if n & (n - 1):
            raise ParameterDomainError(f"haar basis needs a power-of-two grid, got {n}")
        cols = [np.ones(n)]
        width = n
        while width >= 2:
            half = width // 2
            for start in range(0, n, width):
                col = np.zeros(n)
                col[start : start + half] = 1.0
                col[start + half : start + width] = -1.0
                cols.append(col)
            width = half
        mat = np.column_stack(cols)
    else:
        raise ParameterDomainError(f"unknown basis family {family!r}")
    mat = mat / np.max(np.abs(mat), axis=0)
    mat.setflags(write=False)
    return mat


@dataclass(frozen=True)
class BasisSpec:
    """A sup-normalised basis on a uniform grid of ``grid_size`` points."""

    family: str
    grid_size: int

    def __post_init__(self):
        if self.family not in BASIS_FAMILIES:
            raise ParameterDomainError(
                f"basis family must be one of {BASIS_FAMILIES}, got {self.family!r}"
            )
        if int(self.grid_size) < 1:
            raise ParameterDomainError("grid_size must be positive")
        _basis_matrix(self.family, int(self.grid_size))

    @property
    def matrix(self) -> np.ndarray:
        """Read-only (grid_size, count) array whose columns are basis vectors."""
        return _basis_matrix(self.family, int(self.grid_size))

    @property
    def count(self) -> int:
        return self.matrix.shape[1]

    @property
    def grid(self) -> np.ndarray:
        """Cell-centre coordinates of the grid on [0, 1]."""
        return (np.arange(self.grid_size) + 0.5) / self.grid_size


@dataclass(frozen=True)
class FrameSpec:
    basis: BasisSpec
    q: float
    C: float

    def __post_init__(self):
        _check_exponent(self.q)
        if not self.C > 0.0:
            raise ParameterDomainError("embedding constant C must be > 0")


def synthesis(v, basis: BasisSpec) -> np.ndarray:
    """sum_n v_n psi_n on the grid. ``v`` may be 1-D or a (batch, k) array."""
    v = np.asarray(v, dtype=float)
    k = v.shape[-1]
    if k > basis.count:
        raise ShapeError(f"{k} coefficients but basis has only {basis.count} vectors")
    return v @ basis.matrix[:, :k].T


def certify_embedding(frame: FrameSpec, trials: int, seed: int) -> float:
    """Worst observed ||synthesis(v)||_sup / ||v||_q over random test vectors.

    Test vectors mix Gaussian, heavy-tailed (Cauchy) and sparse draws. The
    caller compares the returned ratio against ``frame.C``.
    """
    rng = np.random.default_rng(seed)
    k = frame.basis.count
    worst = 0.0
    for t in range(int(trials)):
        kind = t % 3
        if kind == 0:
            v = rng.standard_normal(k)
        elif kind == 1:
            v = rng.standard_cauchy(k)
        else:
            v = np.zeros(k)
            idx = rng.choice(k, size=min(k, 1 + rng.integers(2)), replace=False)
            v[idx] = rng.choice([-1.0, 1.0], size=idx.size) * rng.uniform(0.1, 10.0, idx.size)
        denom = lp_quasinorm(v, frame.q)
        if denom == 0.0:
            continue
        worst = max(worst, sup_norm(synthesis(v, frame.basis)) / denom)
    return worst
