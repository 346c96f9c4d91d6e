"""Experiment harness: convergence scans, coverage studies, baselines, I/O.

Reports are figure-ready data, not figures.  Every replication cell
(n, rep) derives its own 64-bit seed from the master seed through a
documented splitmix64 fold (see :func:`cell_seed`), so any single cell
can be recomputed in isolation and reports are bit-reproducible.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .asymptotics import (
    BvmDiagnostics,
    bvm_gap,
    delta_n,
    estimate_un_per_zeta,
    hellinger_distance,
    kl_neighborhood_stats,
    lan_remainder,
    tv_normals,
)
from .gp_prior import GpPriorSpec, NumericsError, PriorCovariance
from .model import (
    CovariateLaw,
    Dataset,
    ModelPoint,
    NuisanceFunction,
    empirical_information,
    make_covariate_law,
    sample_dataset,
)
from .posterior import (
    GibbsChain,
    conjugate_joint_posterior,
    credible_interval,
    marginal_theta,
)

__all__ = [
    "ExperimentConfig",
    "RunReport",
    "splitmix64",
    "cell_seed",
    "make_components",
    "run_bvm_scan",
    "run_coverage",
    "run_parametric_baseline",
    "run_posterior_snapshot",
    "run_diagnostics_suite",
    "covariance_to_csv",
    "dataset_to_csv",
    "chain_to_csv",
]

_ETA0_FAMILIES = ("sine", "cosine", "constant", "zero")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a scan needs; mirrors the key = value config file."""

    sigma_w: float = 0.8
    theta0: float = 1.0
    eta0_family: str = "sine"
    eta0_amplitude: float = 0.5
    k: int = 1
    grid_size: int = 50
    scale: float = 3.0
    theta_prior_var: float = 10.0
    n_ladder: tuple[int, ...] = (50, 200, 800)
    seeds: int = 100
    level: float = 0.95
    master_seed: int = 0
    output_path: str | None = None
    format: str = "json"

    def __post_init__(self) -> None:
        if self.eta0_family not in _ETA0_FAMILIES:
            raise ValueError(
                f"eta0_family must be one of {_ETA0_FAMILIES}, got {self.eta0_family!r}"
            )
        ladder = tuple(int(n) for n in self.n_ladder)
        if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ValueError("n_ladder must be nonempty and strictly increasing")
        if any(n < 1 for n in ladder):
            raise ValueError("n_ladder entries must be >= 1")
        object.__setattr__(self, "n_ladder", ladder)
        if self.seeds < 1:
            raise ValueError("seeds must be >= 1")
        if not (0.0 < self.level < 1.0):
            raise ValueError("level must lie in (0, 1)")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be 'csv' or 'json'")


def _eta0_values(cfg: ExperimentConfig, grid: np.ndarray) -> np.ndarray:
    amp = cfg.eta0_amplitude
    if cfg.eta0_family == "sine":
        return amp * np.sin(2.0 * np.pi * grid)
    if cfg.eta0_family == "cosine":
        return amp * np.cos(2.0 * np.pi * grid)
    if cfg.eta0_family == "constant":
        return np.full(grid.size, amp)
    return np.zeros(grid.size)


def make_components(
    cfg: ExperimentConfig,
) -> tuple[CovariateLaw, ModelPoint, GpPriorSpec]:
    """Law, true model point and prior spec implied by a config."""
    law = make_covariate_law(cfg.sigma_w)
    spec = GpPriorSpec(k=cfg.k, grid_size=cfg.grid_size, scale=cfg.scale)
    grid = np.linspace(0.0, 1.0, cfg.grid_size)
    truth = ModelPoint(theta=cfg.theta0, eta=NuisanceFunction(_eta0_values(cfg, grid)))
    return law, truth, spec


_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 step (Steele et al. mixing constants)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def cell_seed(master_seed: int, n: int, rep: int) -> int:
    """Seed for replication cell (n, rep): fold the three 64-bit words
    through splitmix64, state = splitmix64(state XOR word)."""
    state = 0
    for word in (master_seed, n, rep):
        state = splitmix64((state ^ (word & _MASK64)) & _MASK64)
    return state


@dataclass
class RunReport:
    """Serializable experiment output: config echo, per-cell rows, aggregates."""

    kind: str
    config: dict
    rows: list[dict] = field(default_factory=list)
    aggregates: list[dict] = field(default_factory=list)

    def to_json_text(self) -> str:
        payload = {
            "kind": self.kind,
            "config": self.config,
            "rows": self.rows,
            "aggregates": self.aggregates,
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json_text(cls, text: str) -> "RunReport":
        payload = json.loads(text)
        return cls(
            kind=payload["kind"],
            config=payload["config"],
            rows=payload["rows"],
            aggregates=payload["aggregates"],
        )

    def write(self, path: str, fmt: str = "json") -> None:
        if fmt == "json":
            with open(path, "w") as fh:
                fh.write(self.to_json_text())
        elif fmt == "csv":
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                header = list(self.rows[0].keys()) if self.rows else []
                writer.writerow(header)
                for row in self.rows:
                    writer.writerow([row[key] for key in header])
        else:
            raise ValueError("format must be 'csv' or 'json'")


def _config_dict(cfg: ExperimentConfig) -> dict:
    out = asdict(cfg)
    out["n_ladder"] = list(cfg.n_ladder)
    return out


def _bvm_cell(args: tuple[ExperimentConfig, int, int]) -> dict:
    cfg, n, rep = args
    seed = cell_seed(cfg.master_seed, n, rep)
    law, truth, spec = make_components(cfg)
    try:
        ds = sample_dataset(law, truth, n, seed)
        mp = marginal_theta(conjugate_joint_posterior(ds, spec, cfg.theta_prior_var))
        diag = bvm_gap(mp, delta_n(ds, law, truth), law.efficient_info, n, cfg.theta0)
    except NumericsError as exc:
        raise NumericsError(f"cell n={n} rep={rep} seed={seed}: {exc}") from exc
    return {"rep": rep, "seed": seed, **asdict(diag)}


def _run_cells(worker, cells, jobs: int) -> list[dict]:
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(worker, cells))
    return [worker(cell) for cell in cells]


def _iqr(values: np.ndarray) -> float:
    q1, q3 = np.percentile(values, [25.0, 75.0])
    return float(q3 - q1)


def run_bvm_scan(cfg: ExperimentConfig, jobs: int = 1) -> RunReport:
    """Convergence scan: per-cell gap diagnostics plus per-n medians."""
    cells = [(cfg, n, rep) for n in cfg.n_ladder for rep in range(cfg.seeds)]
    rows = _run_cells(_bvm_cell, cells, jobs)
    aggregates = []
    for n in cfg.n_ladder:
        gaps = np.array([r["tv_gap"] for r in rows if r["n"] == n])
        variances = np.array([r["localized_post_var"] for r in rows if r["n"] == n])
        aggregates.append(
            {
                "n": n,
                "median_tv_gap": float(np.median(gaps)),
                "iqr_tv_gap": _iqr(gaps),
                "median_localized_post_var": float(np.median(variances)),
                "iqr_localized_post_var": _iqr(variances),
            }
        )
    report = RunReport(kind="bvm_scan", config=_config_dict(cfg), rows=rows, aggregates=aggregates)
    if cfg.output_path:
        report.write(cfg.output_path, cfg.format)
    return report


def _coverage_cell(args: tuple[ExperimentConfig, int, int]) -> dict:
    cfg, n, rep = args
    seed = cell_seed(cfg.master_seed, n, rep)
    law, truth, spec = make_components(cfg)
    try:
        ds = sample_dataset(law, truth, n, seed)
        mp = marginal_theta(conjugate_joint_posterior(ds, spec, cfg.theta_prior_var))
        lo, hi = credible_interval(mp, cfg.level)
    except NumericsError as exc:
        raise NumericsError(f"cell n={n} rep={rep} seed={seed}: {exc}") from exc
    return {
        "n": n,
        "rep": rep,
        "seed": seed,
        "lo": lo,
        "hi": hi,
        "covered": bool(lo <= cfg.theta0 <= hi),
    }


def run_coverage(cfg: ExperimentConfig, replications: int, jobs: int = 1) -> RunReport:
    """Frequentist coverage of the level-credible interval, per ladder n."""
    if replications < 1:
        raise ValueError("replications must be >= 1")
    cells = [(cfg, n, rep) for n in cfg.n_ladder for rep in range(replications)]
    rows = _run_cells(_coverage_cell, cells, jobs)
    aggregates = []
    for n in cfg.n_ladder:
        hits = np.array([r["covered"] for r in rows if r["n"] == n], dtype=float)
        coverage = float(hits.mean())
        aggregates.append(
            {
                "n": n,
                "replications": int(hits.size),
                "coverage": coverage,
                "binomial_se": math.sqrt(coverage * (1.0 - coverage) / hits.size),
            }
        )
    report = RunReport(
        kind="coverage", config=_config_dict(cfg), rows=rows, aggregates=aggregates
    )
    if cfg.output_path:
        report.write(cfg.output_path, cfg.format)
    return report


def run_parametric_baseline(
    n: int, theta0: float, prior_var: float, seed: int
) -> BvmDiagnostics:
    """Normal location model N(theta, 1) with conjugate N(0, prior_var) prior.

    The exact posterior N(n xbar tau^2/(n tau^2 + 1), tau^2/(n tau^2 + 1))
    is compared in total variation against N(xbar, 1/n), the sampling
    limit centered on the best-regular estimator xbar.  `prior_var =
    math.inf` selects the flat limit, where the gap is exactly zero.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if not prior_var > 0.0:
        raise ValueError("prior_var must be positive (math.inf allowed)")
    rng = np.random.default_rng(seed)
    xbar = float(np.mean(theta0 + rng.standard_normal(n)))
    if math.isinf(prior_var):
        post_mean, post_var = xbar, 1.0 / n
    else:
        post_mean = n * xbar * prior_var / (n * prior_var + 1.0)
        post_var = prior_var / (n * prior_var + 1.0)
    loc_mean = math.sqrt(n) * (post_mean - theta0)
    loc_var = n * post_var
    delta = math.sqrt(n) * (xbar - theta0)
    gap = tv_normals(loc_mean, loc_var, delta, 1.0)
    return BvmDiagnostics(
        n=n,
        delta_n=delta,
        info_tilde=1.0,
        localized_post_mean=loc_mean,
        localized_post_var=loc_var,
        tv_gap=gap,
    )


def run_posterior_snapshot(cfg: ExperimentConfig, n: int, seed: int) -> dict:
    """One simulated dataset, its exact posterior and gap diagnostics."""
    law, truth, spec = make_components(cfg)
    ds = sample_dataset(law, truth, n, seed)
    mp = marginal_theta(conjugate_joint_posterior(ds, spec, cfg.theta_prior_var))
    lo, hi = credible_interval(mp, cfg.level)
    diag = bvm_gap(mp, delta_n(ds, law, truth), law.efficient_info, n, cfg.theta0)
    return {
        "n": n,
        "seed": seed,
        "theta_mean": mp.mean,
        "theta_variance": mp.variance,
        "level": cfg.level,
        "interval_lo": lo,
        "interval_hi": hi,
        "empirical_information": empirical_information(ds, law),
        **asdict(diag),
    }


def run_diagnostics_suite(
    cfg: ExperimentConfig, n: int, seed: int, mc_draws: int = 20_000, un_reps: int = 2000
) -> dict:
    """KL-neighborhood, domination and expansion-remainder diagnostics.

    Probe nuisance perturbations are fixed small multiples of smooth
    waves; the report carries every estimate together with the bound or
    reference value it is judged against.
    """
    law, truth, spec = make_components(cfg)
    grid = truth.eta.grid
    probes = {
        "0.1*cos(2pi v)": 0.1 * np.cos(2.0 * np.pi * grid),
        "0.2*sin(4pi v)": 0.2 * np.sin(4.0 * np.pi * grid),
    }

    kl_rows = []
    for label, delta_vals in probes.items():
        eta = NuisanceFunction(truth.eta.values + delta_vals)
        first, second = kl_neighborhood_stats(eta, truth, law, mc_draws, seed)
        sup = float(np.max(np.abs(delta_vals)))
        bound_scale = max(eta.sup_norm(), truth.eta.sup_norm())
        kl_rows.append(
            {
                "probe": label,
                "neg_mean_log_ratio": first,
                "mean_sq_log_ratio": second,
                "bound": (0.5 + bound_scale**2) * sup**2,
            }
        )

    zeta_set = [
        NuisanceFunction(np.zeros(grid.size)),
        NuisanceFunction(0.1 * np.cos(2.0 * np.pi * grid)),
    ]
    un_rows = []
    for h_label, h in (("h=1", 1.0), ("plugin", None)):
        estimates, errors = estimate_un_per_zeta(
            law, truth, zeta_set, rho=0.5, h=h, n=n, mc_reps=un_reps, seed=seed
        )
        un_rows.append(
            {
                "h": h_label,
                "estimates": estimates.tolist(),
                "standard_errors": errors.tolist(),
                "max": float(estimates.max()),
            }
        )

    ds = sample_dataset(law, truth, n, seed)
    zeta = NuisanceFunction(0.1 * np.cos(2.0 * np.pi * grid))
    remainder = lan_remainder(ds, 1.0, zeta, truth, law)
    identity_value = 0.5 * (empirical_information(ds, law) - law.efficient_info)

    m_shift = 2.0
    shifted = ModelPoint(truth.theta + m_shift / math.sqrt(n), truth.eta)
    hell = hellinger_distance(shifted, truth, law, mc_draws, seed)
    bound = m_shift**2 / (2.0 * n) + m_shift**3 / (6.0 * n**2) * law.fourth_moment_u

    return {
        "n": n,
        "seed": seed,
        "kl_neighborhood": kl_rows,
        "domination": un_rows,
        "lan_remainder": {
            "h": 1.0,
            "remainder": remainder,
            "identity_value": identity_value,
            "identity_residual": abs(remainder - identity_value),
        },
        "hellinger_bound": {
            "theta_shift": m_shift,
            "hellinger_sq": hell**2,
            "bound": bound,
        },
    }


def covariance_to_csv(cov: PriorCovariance | np.ndarray, path: str) -> None:
    """Full covariance matrix, row-major, one row per CSV line."""
    matrix = cov.matrix if isinstance(cov, PriorCovariance) else np.asarray(cov)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in matrix:
            writer.writerow([repr(float(x)) for x in row])


def dataset_to_csv(ds: Dataset, path: str) -> None:
    """Columns u, v, y, e (e blank when the dataset has no provenance)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["u", "v", "y", "e"])
        e = ds.e if ds.e is not None else [""] * ds.n
        for row in zip(ds.u, ds.v, ds.y, e):
            writer.writerow([repr(float(x)) if x != "" else "" for x in row])


def chain_to_csv(chain: GibbsChain, path: str) -> None:
    """Columns iter, theta, eta_0 ... eta_{m-1}, one row per iteration."""
    m = chain.etas.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "theta"] + [f"eta_{j}" for j in range(m)])
        for it in range(chain.iterations):
            writer.writerow(
                [it, repr(float(chain.thetas[it]))]
                + [repr(float(x)) for x in chain.etas[it]]
            )
