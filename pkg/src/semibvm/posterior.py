"""Posterior computation for the discretised partial linear model.

With the nuisance represented by its values on a uniform grid (entering
the likelihood through linear-interpolation weights), the model is a
finite Bayesian linear regression with unit noise variance:

    y_i = theta * u_i + w(v_i)' eta_grid + e_i.

A Gaussian N(0, tau^2) prior on theta (tau^2 = inf supported as a flat
limit) and the Gaussian process prior on eta_grid keep the joint
posterior exactly Gaussian.  A blocked Gibbs sampler over theta and
eta_grid provides the Monte Carlo cross-check for the closed form.

A Hoelder-ball restriction on the prior destroys conjugacy and is NOT
propagated here; :func:`conditioned_theta_marginal` gives a
rejection-reweighted estimate of its effect for diagnostic use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.stats import norm

from .gp_prior import GpPriorSpec, NumericsError, cholesky_with_jitter, prior_covariance
from .model import CovariateLaw, Dataset, ModelPoint, interpolation_weights

__all__ = [
    "JointGaussianPosterior",
    "MarginalThetaPosterior",
    "GibbsChain",
    "conjugate_joint_posterior",
    "marginal_theta",
    "sample_joint_posterior",
    "gibbs_chain",
    "credible_interval",
    "posterior_mass_h_ball",
    "conditional_nuisance_mass",
    "conditioned_theta_marginal",
    "effective_sample_size",
]


@dataclass(frozen=True)
class JointGaussianPosterior:
    """Exact Gaussian posterior over (theta, eta-grid-values).

    Coordinate 0 is theta; the remaining coordinates are the grid values
    of the nuisance.
    """

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise ValueError("mean and covariance dimensions are inconsistent")
        scale = max(1.0, float(np.abs(cov).max()))
        if not np.allclose(cov, cov.T, atol=1e-10 * scale, rtol=0.0):
            raise ValueError("covariance must be symmetric to 1e-10")
        cov = 0.5 * (cov + cov.T)
        cholesky_with_jitter(cov)  # must be factorisable
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def grid_size(self) -> int:
        return self.mean.size - 1


@dataclass(frozen=True)
class MarginalThetaPosterior:
    """Normal marginal posterior of theta."""

    mean: float
    variance: float

    def __post_init__(self) -> None:
        if not self.variance > 0.0:
            raise ValueError("variance must be strictly positive")

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class GibbsChain:
    """Blocked Gibbs output: one (theta, eta-values) state per iteration."""

    thetas: np.ndarray
    etas: np.ndarray
    iterations: int
    burn_in: int
    seed: int

    def __post_init__(self) -> None:
        if not (self.iterations > self.burn_in >= 0):
            raise ValueError("need iterations > burn_in >= 0")
        if self.thetas.shape != (self.iterations,):
            raise ValueError("thetas length must equal iterations")
        if self.etas.shape[0] != self.iterations:
            raise ValueError("etas row count must equal iterations")

    @property
    def theta_draws(self) -> np.ndarray:
        """Post-burn-in theta samples."""
        return self.thetas[self.burn_in :]

    @property
    def eta_draws(self) -> np.ndarray:
        return self.etas[self.burn_in :]


def _nuisance_prior_inverse(spec: GpPriorSpec) -> np.ndarray:
    cov = prior_covariance(spec).matrix
    factor = cholesky_with_jitter(cov)
    return cho_solve((factor, True), np.eye(spec.grid_size))


def conjugate_joint_posterior(
    ds: Dataset, spec: GpPriorSpec, theta_prior_var: float = 10.0
) -> JointGaussianPosterior:
    """Exact joint posterior for (theta, eta-grid-values).

    Prior: theta ~ N(0, theta_prior_var) independent of eta_grid ~
    N(0, scale^2 K).  `theta_prior_var = math.inf` selects the flat
    limit (zero prior precision on theta).  With no data the posterior
    is the prior.
    """
    if not theta_prior_var > 0.0:
        raise ValueError("theta_prior_var must be positive (math.inf allowed)")
    m = spec.grid_size
    if ds.n == 0:
        if math.isinf(theta_prior_var):
            raise ValueError("flat theta prior with no data is improper")
        cov = np.zeros((m + 1, m + 1))
        cov[0, 0] = theta_prior_var
        cov[1:, 1:] = prior_covariance(spec).matrix
        return JointGaussianPosterior(mean=np.zeros(m + 1), covariance=cov)

    weights = interpolation_weights(ds.v, m)
    design = np.concatenate([ds.u[:, None], weights], axis=1)
    precision = design.T @ design
    if not math.isinf(theta_prior_var):
        precision[0, 0] += 1.0 / theta_prior_var
    precision[1:, 1:] += _nuisance_prior_inverse(spec)
    factor = cholesky_with_jitter(precision)
    cov = cho_solve((factor, True), np.eye(m + 1))
    cov = 0.5 * (cov + cov.T)
    mean = cov @ (design.T @ ds.y)
    return JointGaussianPosterior(mean=mean, covariance=cov)


def marginal_theta(jp: JointGaussianPosterior) -> MarginalThetaPosterior:
    """Coordinate-0 marginal of the joint Gaussian posterior."""
    return MarginalThetaPosterior(
        mean=float(jp.mean[0]), variance=float(jp.covariance[0, 0])
    )


def sample_joint_posterior(
    jp: JointGaussianPosterior, size: int, seed: int
) -> np.ndarray:
    """Exact draws from the joint posterior, shape (size, dim)."""
    factor = cholesky_with_jitter(jp.covariance)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((size, jp.mean.size))
    return jp.mean[None, :] + z @ factor.T


def gibbs_chain(
    ds: Dataset,
    spec: GpPriorSpec,
    theta_prior_var: float,
    iterations: int,
    burn_in: int,
    seed: int,
) -> GibbsChain:
    """Blocked Gibbs sampler alternating exact conditional draws.

    theta | eta, data is univariate normal; eta | theta, data is
    multivariate normal with a theta-independent precision, so its
    Cholesky factor is computed once.  Deterministic in `seed`.
    """
    if not (iterations > burn_in >= 0):
        raise ValueError("need iterations > burn_in >= 0")
    if not theta_prior_var > 0.0:
        raise ValueError("theta_prior_var must be positive (math.inf allowed)")
    m = spec.grid_size
    weights = interpolation_weights(ds.v, m)
    eta_precision = _nuisance_prior_inverse(spec) + weights.T @ weights
    eta_factor = cholesky_with_jitter(eta_precision)

    theta_precision = ds.u @ ds.u
    if not math.isinf(theta_prior_var):
        theta_precision += 1.0 / theta_prior_var
    if not theta_precision > 0.0:
        raise NumericsError("theta conditional has zero precision")
    theta_sd = 1.0 / math.sqrt(theta_precision)

    rng = np.random.default_rng(seed)
    thetas = np.empty(iterations)
    etas = np.empty((iterations, m))
    eta = np.zeros(m)
    for it in range(iterations):
        resid = ds.y - weights @ eta
        theta = (ds.u @ resid) / theta_precision + theta_sd * rng.standard_normal()
        rhs = weights.T @ (ds.y - theta * ds.u)
        mean = cho_solve((eta_factor, True), rhs)
        eta = mean + solve_triangular(
            eta_factor.T, rng.standard_normal(m), lower=False
        )
        thetas[it] = theta
        etas[it] = eta
    return GibbsChain(
        thetas=thetas, etas=etas, iterations=iterations, burn_in=burn_in, seed=seed
    )


def credible_interval(mp: MarginalThetaPosterior, level: float) -> tuple[float, float]:
    """Equal-tailed interval mean +- z_{(1+level)/2} * sd."""
    if not (0.0 < level < 1.0):
        raise ValueError("level must lie in (0, 1)")
    z = norm.ppf(0.5 * (1.0 + level))
    return (mp.mean - z * mp.sd, mp.mean + z * mp.sd)


def posterior_mass_h_ball(
    mp: MarginalThetaPosterior, theta0: float, M_n: float, n: int
) -> float:
    """Posterior mass of {|sqrt(n)(theta - theta0)| <= M_n}."""
    if M_n < 0.0:
        raise ValueError("M_n must be >= 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    half = M_n / math.sqrt(n)
    lo = (theta0 - half - mp.mean) / mp.sd
    hi = (theta0 + half - mp.mean) / mp.sd
    return float(norm.cdf(hi) - norm.cdf(lo))


def conditional_nuisance_mass(
    ds: Dataset,
    spec: GpPriorSpec,
    theta_fixed: float,
    truth: ModelPoint,
    law: CovariateLaw,
    rho: float,
    draws: int,
    seed: int,
    hellinger_draws: int = 4000,
) -> float:
    """Posterior mass outside the Hellinger ball around the KL-optimal curve.

    Samples the exact Gaussian conditional posterior of the nuisance
    given theta = theta_fixed, and returns the fraction of draws whose
    Hellinger distance to the KL-minimising nuisance at theta_fixed is
    >= rho.  Distances use one covariate Monte Carlo sample shared by
    all draws, so the result is deterministic in `seed`.
    """
    from .asymptotics import hellinger_from_shift, least_favorable_eta

    if not rho > 0.0:
        raise ValueError("rho must be positive")
    if draws < 1:
        raise ValueError("draws must be >= 1")
    rng = np.random.default_rng(seed)
    _, v_shared = law.sample_covariates(hellinger_draws, rng)

    m = spec.grid_size
    weights = interpolation_weights(ds.v, m)
    precision = _nuisance_prior_inverse(spec) + weights.T @ weights
    factor = cholesky_with_jitter(precision)
    mean = cho_solve((factor, True), weights.T @ (ds.y - theta_fixed * ds.u))

    z = rng.standard_normal((draws, m))
    eta_draws = mean[None, :] + solve_triangular(factor.T, z.T, lower=False).T

    eval_weights = interpolation_weights(v_shared, m)
    target = least_favorable_eta(theta_fixed, truth, law)
    shift = eta_draws @ eval_weights.T - target(v_shared)[None, :]
    distances = hellinger_from_shift(shift)
    return float(np.mean(distances >= rho))


def conditioned_theta_marginal(
    jp: JointGaussianPosterior, spec: GpPriorSpec, draws: int, seed: int
) -> tuple[float, float, float]:
    """Theta marginal under the Hoelder-ball-restricted prior, by rejection.

    The restricted-prior posterior equals the unrestricted posterior
    conditioned on the ball event, so joint draws are filtered on
    sup norm + seminorm < holder_bound.  Returns (mean, variance,
    acceptance fraction).  Diagnostic only; no equivalence with the
    unrestricted marginal is asserted.
    """
    from .gp_prior import _ball_norm

    if not spec.conditioned:
        raise ValueError("spec carries no Hoelder ball to condition on")
    if draws < 2:
        raise ValueError("need draws >= 2")
    samples = sample_joint_posterior(jp, draws, seed)
    keep = np.array(
        [_ball_norm(row[1:], spec.holder_alpha) < spec.holder_bound for row in samples]
    )
    if keep.sum() < 2:
        raise ValueError("fewer than 2 draws landed in the Hoelder ball")
    kept = samples[keep, 0]
    return float(kept.mean()), float(kept.var(ddof=1)), float(keep.mean())


def effective_sample_size(x: np.ndarray) -> float:
    """ESS from the autocorrelation sum truncated at the first negative lag."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        return float(n)
    centered = x - x.mean()
    var = centered @ centered / n
    if var == 0.0:
        return float(n)
    fft = np.fft.fft(centered, n=2 * n)
    acf = np.fft.ifft(fft * np.conj(fft)).real[:n] / (n * var)
    tau = 1.0
    for lag in range(1, n):
        if acf[lag] < 0.0:
            break
        tau += 2.0 * acf[lag]
    return n / tau
