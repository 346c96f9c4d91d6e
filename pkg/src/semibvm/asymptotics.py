"""Computable diagnostics for the efficiency theory of the model.

Everything here reduces to one of two evaluation strategies, stated in
each docstring: analytic reduction (the expectation over (U, V) collapses
to a closed form or a one-dimensional quadrature over V) or seeded Monte
Carlo over the covariate law with a reported/derivable standard error.

Central quantities:

* the score-based centering  delta = I^{-1} n^{-1/2} sum e_i (u_i - m(v_i)),
* the total-variation gap between the localized marginal posterior and
  its normal limit N(delta, 1/I),
* Kullback-Leibler and Hellinger geometry of nuisance perturbations,
* the KL-minimising nuisance curve eta*(theta) = eta0 - (theta-theta0) m
  and the KL-minimising theta for a fixed nuisance,
* the exact quadratic expansion of the nuisance-integrated likelihood in
  the local parameter h = sqrt(n)(theta - theta0),
* a likelihood-ratio domination statistic over a finite set of nuisance
  translations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.linalg import cho_solve
from scipy.stats import norm

from .gp_prior import GpPriorSpec, cholesky_with_jitter, prior_covariance
from .model import (
    CovariateLaw,
    Dataset,
    ModelPoint,
    NuisanceFunction,
    interpolation_weights,
    log_density_ratio,
)
from .posterior import MarginalThetaPosterior

__all__ = [
    "BvmDiagnostics",
    "LanCoefficients",
    "delta_n",
    "tv_normals",
    "bvm_gap",
    "kl_divergence",
    "least_favorable_eta",
    "misspecified_theta_star",
    "lan_remainder",
    "hellinger_distance",
    "hellinger_from_shift",
    "kl_neighborhood_stats",
    "integral_lan_coefficients",
    "estimate_un",
    "estimate_un_per_zeta",
]


@dataclass(frozen=True)
class BvmDiagnostics:
    """Per-(n, seed) record of the posterior against its normal limit."""

    n: int
    delta_n: float
    info_tilde: float
    localized_post_mean: float
    localized_post_var: float
    tv_gap: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.tv_gap <= 1.0):
            raise ValueError("tv_gap must lie in [0, 1]")
        if not self.localized_post_var > 0.0:
            raise ValueError("localized_post_var must be positive")


@dataclass(frozen=True)
class LanCoefficients:
    """Expansion log s_n(h)/s_n(0) = linear * h + quadratic * h^2.

    The integrated likelihood of the conjugate model is exactly
    log-quadratic in h, so the quadratic coefficient is nonpositive.
    """

    linear: float
    quadratic: float

    def __post_init__(self) -> None:
        if self.quadratic > 0.0:
            raise ValueError("quadratic coefficient must be <= 0")


def delta_n(ds: Dataset, law: CovariateLaw, truth: ModelPoint) -> float:
    """Score-based centering: I^{-1} n^{-1/2} sum e_i (u_i - m(v_i)).

    Uses the stored true residuals, so the dataset must carry simulation
    provenance.
    """
    if ds.n < 1:
        raise ValueError("need n >= 1")
    if ds.e is None:
        raise ValueError("dataset lacks stored residuals")
    info = law.efficient_info
    score_sum = float(np.sum(ds.e * (ds.u - law.cond_mean(ds.v))))
    return score_sum / (info * math.sqrt(ds.n))


def _crossings(m1: float, v1: float, m2: float, v2: float) -> tuple[float, float]:
    # roots of log phi1 - log phi2 = 0; two real roots whenever v1 != v2
    a = 0.5 * (1.0 / v2 - 1.0 / v1)
    b = m1 / v1 - m2 / v2
    c = 0.5 * (m2**2 / v2 - m1**2 / v1) - 0.5 * math.log(v1 / v2)
    disc = math.sqrt(max(b * b - 4.0 * a * c, 0.0))
    r1 = (-b - disc) / (2.0 * a)
    r2 = (-b + disc) / (2.0 * a)
    return (r1, r2) if r1 <= r2 else (r2, r1)


def tv_normals(m1: float, v1: float, m2: float, v2: float) -> float:
    """Total-variation distance between N(m1, v1) and N(m2, v2).

    Equal variances: the closed form 2 Phi(|m1 - m2| / (2 sigma)) - 1.
    Otherwise: adaptive quadrature of half the absolute density
    difference over the union of the two 40-sigma windows (the mass
    outside is below 1e-300), split at the density crossings and at
    each mean +- {1, 5, 40} sd so that no peak hides inside a piece
    that is orders of magnitude wider than it; absolute accuracy 1e-8
    or better.
    """
    if not (v1 > 0.0 and v2 > 0.0):
        raise ValueError("variances must be positive")
    if abs(v1 - v2) <= 1e-14 * max(v1, v2):
        sigma = math.sqrt(0.5 * (v1 + v2))
        return float(2.0 * norm.cdf(abs(m1 - m2) / (2.0 * sigma)) - 1.0)
    s1, s2 = math.sqrt(v1), math.sqrt(v2)

    def absdiff(x):
        return abs(norm.pdf(x, m1, s1) - norm.pdf(x, m2, s2))

    lo_bound = min(m1 - 40.0 * s1, m2 - 40.0 * s2)
    hi_bound = max(m1 + 40.0 * s1, m2 + 40.0 * s2)
    cuts = set(_crossings(m1, v1, m2, v2))
    for mean, sd in ((m1, s1), (m2, s2)):
        for spread in (1.0, 5.0, 40.0):
            cuts.add(mean - spread * sd)
            cuts.add(mean + spread * sd)
    grid = sorted({lo_bound, hi_bound, *(c for c in cuts if lo_bound < c < hi_bound)})
    total = 0.0
    for lo, hi in zip(grid, grid[1:]):
        piece, _ = integrate.quad(absdiff, lo, hi, epsabs=1e-13, limit=200)
        total += piece
    return min(0.5 * total, 1.0)


def bvm_gap(
    mp: MarginalThetaPosterior, delta: float, info: float, n: int, theta0: float
) -> BvmDiagnostics:
    """TV gap between the localized posterior and N(delta, 1/info).

    Localization h = sqrt(n)(theta - theta0) maps the marginal posterior
    to N(sqrt(n)(mean - theta0), n * variance); TV is invariant under
    that affine map, so the gap can be read in either coordinate system.
    """
    if not info > 0.0:
        raise ValueError("info must be positive")
    loc_mean = math.sqrt(n) * (mp.mean - theta0)
    loc_var = n * mp.variance
    gap = tv_normals(loc_mean, loc_var, delta, 1.0 / info)
    return BvmDiagnostics(
        n=n,
        delta_n=delta,
        info_tilde=info,
        localized_post_mean=loc_mean,
        localized_post_var=loc_var,
        tv_gap=gap,
    )


def kl_divergence(
    p: ModelPoint, truth: ModelPoint, law: CovariateLaw, mc_draws: int, seed: int
) -> float:
    """KL divergence of p from the truth, as a covariate expectation.

    Equals (1/2) E[((theta - theta0) U + (eta - eta0)(V))^2]; estimated
    by seeded Monte Carlo over (U, V).  Standard error is
    sd(half-square)/sqrt(mc_draws).
    """
    if mc_draws < 1:
        raise ValueError("mc_draws must be >= 1")
    rng = np.random.default_rng(seed)
    u, v = law.sample_covariates(mc_draws, rng)
    shift = (p.theta - truth.theta) * u + (p.eta(v) - truth.eta(v))
    return float(np.mean(0.5 * shift**2))


def least_favorable_eta(
    theta: float, truth: ModelPoint, law: CovariateLaw
) -> NuisanceFunction:
    """KL-minimising nuisance at theta: eta0 - (theta - theta0) m, on eta0's grid."""
    grid = truth.eta.grid
    values = truth.eta.values - (theta - truth.theta) * law.cond_mean(grid)
    return NuisanceFunction(values)


def misspecified_theta_star(
    eta: NuisanceFunction, truth: ModelPoint, law: CovariateLaw
) -> float:
    """KL-minimising theta for a fixed nuisance.

    theta0 - E[m(V) (eta - eta0)(V)], using E[U^2] = 1 and the tower
    rule; the V-expectation is a quadrature over [0, 1] with the grid
    nodes of both nuisances as breakpoints.
    """

    def integrand(v):
        return law.cond_mean(v) * (eta(v) - truth.eta(v))

    nodes = np.union1d(eta.grid, truth.eta.grid)[1:-1]
    value, _ = integrate.quad(
        integrand,
        0.0,
        1.0,
        points=nodes,
        limit=max(60, 2 * nodes.size),
        epsabs=1e-11,
        epsrel=1e-11,
    )
    return truth.theta - value


def lan_remainder(
    ds: Dataset,
    h: float,
    zeta: NuisanceFunction,
    truth: ModelPoint,
    law: CovariateLaw,
) -> float:
    """Gap between the idealized quadratic expansion and the exact log ratio.

    Along the submodel theta -> (theta, eta*(theta) + zeta), the exact
    log-likelihood ratio at h and its quadratic approximation
    h n^{-1/2} sum g_zeta(x_i) - h^2 I / 2 differ by exactly
    (h^2 / 2) ((1/n) sum (u_i - m(v_i))^2 - I); the signed value returned
    here is that quadratic deficit (expansion minus log ratio).
    """
    n = ds.n
    if n < 1:
        raise ValueError("need n >= 1")
    rootn = math.sqrt(n)
    theta_n = truth.theta + h / rootn
    mv = law.cond_mean(ds.v)
    eta0_v = truth.eta(ds.v)
    zeta_v = zeta(ds.v)

    r_ref = ds.y - truth.theta * ds.u - (eta0_v + zeta_v)
    r_pert = ds.y - theta_n * ds.u - (eta0_v - (h / rootn) * mv + zeta_v)
    log_ratio = float(np.sum(-0.5 * r_pert**2 + 0.5 * r_ref**2))

    score_sum = float(np.sum(r_ref * (ds.u - mv)))
    expansion = (h / rootn) * score_sum - 0.5 * h * h * law.efficient_info
    return expansion - log_ratio


def hellinger_from_shift(shift: np.ndarray) -> np.ndarray:
    """Hellinger distance from per-covariate mean shifts (last axis = MC)."""
    affinity = np.mean(np.exp(-np.asarray(shift) ** 2 / 8.0), axis=-1)
    return np.sqrt(np.maximum(1.0 - affinity, 0.0))


def hellinger_distance(
    p1: ModelPoint, p2: ModelPoint, law: CovariateLaw, mc_draws: int, seed: int
) -> float:
    """Hellinger distance between two model points.

    sqrt(1 - E exp(-D^2 / 8)) with D = (theta1 - theta2) U +
    (eta1 - eta2)(V); the covariate expectation is seeded Monte Carlo.
    """
    if mc_draws < 1:
        raise ValueError("mc_draws must be >= 1")
    rng = np.random.default_rng(seed)
    u, v = law.sample_covariates(mc_draws, rng)
    shift = (p1.theta - p2.theta) * u + (p1.eta(v) - p2.eta(v))
    return float(hellinger_from_shift(shift))


def kl_neighborhood_stats(
    eta: NuisanceFunction,
    truth: ModelPoint,
    law: CovariateLaw,
    mc_draws: int,
    seed: int,
) -> tuple[float, float]:
    """First two moments of the log-likelihood ratio at theta0.

    Returns Monte Carlo estimates of (-E0 log r, E0 (log r)^2) for
    r = p_{theta0, eta} / p_{theta0, eta0}, the two statistics whose
    smallness places eta in a KL-type neighborhood of eta0.
    """
    if mc_draws < 1:
        raise ValueError("mc_draws must be >= 1")
    rng = np.random.default_rng(seed)
    u, v = law.sample_covariates(mc_draws, rng)
    e = rng.standard_normal(mc_draws)
    y = truth.theta * u + truth.eta(v) + e
    log_ratio = log_density_ratio(
        (u, v, y), ModelPoint(truth.theta, eta), truth
    )
    return float(-np.mean(log_ratio)), float(np.mean(log_ratio**2))


def integral_lan_coefficients(
    ds: Dataset, spec: GpPriorSpec, theta0: float
) -> LanCoefficients:
    """Exact expansion of the nuisance-integrated likelihood in h.

    Integrating the Gaussian nuisance prior out of the likelihood leaves
    y | theta ~ N(theta u, S) with S = scale^2 W K W' + I_n, so

        log s_n(h)/s_n(0) = h n^{-1/2} u' S^{-1} (y - theta0 u)
                            - h^2 (2n)^{-1} u' S^{-1} u

    holds without remainder.  Returns the two coefficients.
    """
    n = ds.n
    if n < 1:
        raise ValueError("need n >= 1")
    weights = interpolation_weights(ds.v, spec.grid_size)
    marginal_cov = weights @ prior_covariance(spec).matrix @ weights.T + np.eye(n)
    factor = cholesky_with_jitter(marginal_cov)
    solved_u = cho_solve((factor, True), ds.u)
    resid = ds.y - theta0 * ds.u
    linear = float(ds.u @ cho_solve((factor, True), resid)) / math.sqrt(n)
    quadratic = -float(ds.u @ solved_u) / (2.0 * n)
    return LanCoefficients(linear=linear, quadratic=quadratic)


def _plugin_h(u: np.ndarray, e: np.ndarray, clamp: float = 2.0) -> float:
    # least-squares direction sqrt(n) * (u.e) / (u.u), clamped
    denom = float(u @ u)
    if denom == 0.0:
        return 0.0
    h = math.sqrt(u.size) * float(u @ e) / denom
    return max(-clamp, min(clamp, h))


def estimate_un_per_zeta(
    law: CovariateLaw,
    truth: ModelPoint,
    zeta_set: list[NuisanceFunction],
    rho: float,
    h: float | None,
    n: int,
    mc_reps: int,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-translation domination estimates with standard errors.

    For each nuisance translation zeta the expectation, under data from
    the zeta-translated truth, of the n-fold likelihood ratio between
    the h-perturbed and unperturbed submodel points is estimated over
    `mc_reps` independent replications (each zeta gets its own seeded
    substream).  `h = None` uses the per-replication plug-in
    least-squares direction clamped to |h| <= 2.  The expectation equals
    1 exactly for deterministic h.  Callers are responsible for probe
    translations staying within Hellinger radius `rho` of the truth.
    """
    if mc_reps < 1:
        raise ValueError("mc_reps must be >= 1")
    if n < 1:
        raise ValueError("need n >= 1")
    if not zeta_set:
        raise ValueError("zeta_set must be nonempty")
    rootn = math.sqrt(n)
    estimates = np.empty(len(zeta_set))
    errors = np.empty(len(zeta_set))
    for j, zeta in enumerate(zeta_set):
        rng = np.random.default_rng([seed, j])
        u, v = law.sample_covariates(mc_reps * n, rng)
        e = rng.standard_normal(mc_reps * n)
        u = u.reshape(mc_reps, n)
        v = v.reshape(mc_reps, n)
        e = e.reshape(mc_reps, n)
        y = truth.theta * u + truth.eta(v) + zeta(v) + e
        w = u - law.cond_mean(v)
        r_ref = y - truth.theta * u - truth.eta(v) - zeta(v)
        if h is None:
            h_rep = np.array([_plugin_h(u[i], r_ref[i]) for i in range(mc_reps)])
        else:
            h_rep = np.full(mc_reps, float(h))
        shift = h_rep[:, None] / rootn
        log_ratio = np.sum(
            -0.5 * (r_ref - shift * w) ** 2 + 0.5 * r_ref**2, axis=1
        )
        ratios = np.exp(log_ratio)
        estimates[j] = ratios.mean()
        errors[j] = ratios.std(ddof=1) / math.sqrt(mc_reps) if mc_reps > 1 else np.inf
    return estimates, errors


def estimate_un(
    law: CovariateLaw,
    truth: ModelPoint,
    zeta_set: list[NuisanceFunction],
    rho: float,
    h: float | None,
    n: int,
    mc_reps: int,
    seed: int,
) -> float:
    """Maximum of the per-translation domination estimates."""
    estimates, _ = estimate_un_per_zeta(
        law, truth, zeta_set, rho, h, n, mc_reps, seed
    )
    return float(estimates.max())
