"""Gaussian nuisance prior: random polynomial start plus k-fold integrated
Brownian motion, discretised to a covariance matrix on a uniform grid.

The process is

    eta(t) = sum_{i=0}^{k} Z_i t^i / i!  +  (I_{0+}^k W)(t),

with W standard Brownian motion on [0, 1] and Z_i i.i.d. standard normal,
independent of W.  Its covariance function is

    c_k(s, t) = sum_{i=0}^{k} (s t)^i / (i!)^2
                + int_0^{min(s,t)} (s-x)^k (t-x)^k / (k!)^2 dx,

which this module evaluates in closed form.  Sample paths have smoothness
k + 1/2; an optional Hoelder-ball restriction (sup norm plus Hoelder
seminorm below a bound) is applied by rejection sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import NuisanceFunction, uniform_grid

__all__ = [
    "GpPriorSpec",
    "PriorCovariance",
    "NumericsError",
    "kibm_kernel",
    "prior_covariance",
    "sample_prior_path",
    "holder_seminorm",
    "cholesky_with_jitter",
]


class NumericsError(RuntimeError):
    """Linear algebra failed after the configured jitter escalation."""


# Jitter escalation for near-singular kernels: start at 1e-12 * trace/m on
# the diagonal and multiply by 10 up to 1e-6 * trace/m.
_JITTER_START = 1e-12
_JITTER_STOP = 1e-6


def cholesky_with_jitter(matrix: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, escalating a diagonal jitter if needed.

    Integrated Brownian motion kernels are near-singular on fine grids;
    the escalation bounds the distortion at 1e-6 * trace/m.  Raises
    :class:`NumericsError` when even the largest jitter fails.
    """
    matrix = np.asarray(matrix, dtype=float)
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        pass
    base = np.trace(matrix) / matrix.shape[0]
    if base <= 0.0:
        raise NumericsError("matrix has nonpositive trace; cannot factorise")
    jitter = _JITTER_START
    while jitter <= _JITTER_STOP * (1.0 + 1e-9):
        try:
            return np.linalg.cholesky(matrix + jitter * base * np.eye(matrix.shape[0]))
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise NumericsError(
        f"Cholesky failed after jitter escalation up to {_JITTER_STOP:g} * trace/m"
    )


@dataclass(frozen=True)
class GpPriorSpec:
    """Prior configuration: integration order, grid, scale, optional ball.

    `scale` multiplies the standard deviation of the process.  When
    `holder_bound` is set the prior is restricted by rejection to paths
    with sup norm + discrete Hoelder seminorm below the bound.
    """

    k: int = 1
    grid_size: int = 50
    scale: float = 3.0
    holder_alpha: float | None = None
    holder_bound: float | None = None

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError("integration order k must be >= 0")
        if self.grid_size < 2:
            raise ValueError("grid_size must be >= 2")
        if not self.scale > 0.0:
            raise ValueError("scale must be positive")
        if self.holder_bound is not None:
            if self.holder_alpha is None:
                raise ValueError("holder_bound requires holder_alpha")
            if not self.holder_bound > 0.0:
                raise ValueError("holder_bound must be positive")
        if self.holder_alpha is not None and not (0.0 < self.holder_alpha <= 1.0):
            raise ValueError("holder_alpha must lie in (0, 1]")

    @property
    def conditioned(self) -> bool:
        return self.holder_bound is not None


@dataclass(frozen=True)
class PriorCovariance:
    """Symmetric positive-semidefinite covariance matrix on the grid."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("covariance must be a square matrix")
        if not np.allclose(matrix, matrix.T, atol=1e-12, rtol=0.0):
            raise ValueError("covariance must be symmetric to 1e-12")
        eigmin = float(np.linalg.eigvalsh(matrix).min())
        if eigmin < -1e-10 * np.trace(matrix):
            raise ValueError(f"covariance is not PSD (min eigenvalue {eigmin:g})")
        matrix = matrix.copy()
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def kibm_kernel(s: float, t: float, k: int) -> float:
    """Covariance c_k(s, t) of the randomly-started k-fold integrated BM.

    Exact evaluation: the polynomial part is a finite sum and the
    integral part expands binomially into

        sum_{a,b} C(k,a) C(k,b) (-1)^{a+b} s^{k-a} t^{k-b}
                  min(s,t)^{a+b+1} / (a+b+1) / (k!)^2.
    """
    if not (0.0 <= s <= 1.0 and 0.0 <= t <= 1.0):
        raise ValueError("kernel arguments must lie in [0, 1]")
    if k < 0:
        raise ValueError("integration order k must be >= 0")
    poly = sum((s * t) ** i / math.factorial(i) ** 2 for i in range(k + 1))
    mn = min(s, t)
    acc = 0.0
    for a in range(k + 1):
        for b in range(k + 1):
            acc += (
                math.comb(k, a)
                * math.comb(k, b)
                * (-1.0) ** (a + b)
                * s ** (k - a)
                * t ** (k - b)
                * mn ** (a + b + 1)
                / (a + b + 1)
            )
    return poly + acc / math.factorial(k) ** 2


def prior_covariance(spec: GpPriorSpec) -> PriorCovariance:
    """scale^2 * c_k(g_i, g_j) on the uniform grid, symmetrised exactly."""
    grid = uniform_grid(spec.grid_size)
    m = spec.grid_size
    matrix = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            matrix[i, j] = kibm_kernel(grid[i], grid[j], spec.k)
            matrix[j, i] = matrix[i, j]
    return PriorCovariance(matrix=spec.scale**2 * matrix)


def holder_seminorm(eta: NuisanceFunction, alpha: float) -> float:
    """Discrete Hoelder seminorm: max over grid pairs of |d eta| / |d t|^alpha.

    Converges to the continuum seminorm from below as the grid refines.
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError("alpha must lie in (0, 1]")
    grid = eta.grid
    values = eta.values
    dt = np.abs(grid[:, None] - grid[None, :])
    dv = np.abs(values[:, None] - values[None, :])
    off = ~np.eye(grid.size, dtype=bool)
    return float(np.max(dv[off] / dt[off] ** alpha))


def _ball_norm(values: np.ndarray, alpha: float) -> float:
    eta = NuisanceFunction(values)
    return eta.sup_norm() + holder_seminorm(eta, alpha)


def sample_prior_path(
    spec: GpPriorSpec, seed: int, max_attempts: int = 100_000
) -> NuisanceFunction:
    """Draw one path from the (optionally restricted) discretised prior.

    Deterministic in `seed`.  With a Hoelder ball configured, draws are
    rejected until sup norm + seminorm < holder_bound; exceeding
    `max_attempts` raises ValueError (bound too small for the chosen
    order and exponent).
    """
    cov = prior_covariance(spec)
    factor = cholesky_with_jitter(cov.matrix)
    rng = np.random.default_rng(seed)
    if not spec.conditioned:
        return NuisanceFunction(factor @ rng.standard_normal(spec.grid_size))
    for _ in range(max_attempts):
        values = factor @ rng.standard_normal(spec.grid_size)
        if _ball_norm(values, spec.holder_alpha) < spec.holder_bound:
            return NuisanceFunction(values)
    raise ValueError(
        f"rejection sampler exceeded {max_attempts} attempts; "
        f"holder_bound={spec.holder_bound} is too small for k={spec.k}, "
        f"alpha={spec.holder_alpha}, scale={spec.scale}"
    )
