"""Command-line interface.

Subcommands: kernel, sample, posterior, bvm-scan, coverage, baseline,
diagnostics.  Common flags: --config (key = value text file mirroring the
experiment config), --seed, --out, --format, --jobs.

Exit codes: 0 success, 2 config error, 3 numeric failure (the offending
cell is printed to standard error).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys

from .experiments import (
    ExperimentConfig,
    cell_seed,
    covariance_to_csv,
    dataset_to_csv,
    make_components,
    run_bvm_scan,
    run_coverage,
    run_diagnostics_suite,
    run_parametric_baseline,
    run_posterior_snapshot,
)
from .gp_prior import NumericsError, prior_covariance
from .model import sample_dataset

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


_INT_KEYS = {"k", "grid_size", "seeds", "master_seed"}
_FLOAT_KEYS = {"sigma_w", "theta0", "eta0_amplitude", "scale", "theta_prior_var", "level"}
_STR_KEYS = {"eta0_family", "output_path", "format"}


def parse_config_file(path: str) -> dict:
    """Parse a key = value config file; '#' starts a comment."""
    values: dict = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = math.inf if value in ("inf", "Infinity") else float(value)
            elif key in _STR_KEYS:
                values[key] = value
            elif key == "n_ladder":
                values[key] = tuple(int(tok) for tok in value.split(",") if tok.strip())
            else:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return values


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = parse_config_file(args.config) if args.config else {}
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "out", None) is not None:
        overrides["output_path"] = args.out
    if getattr(args, "format", None) is not None:
        overrides["format"] = args.format
    try:
        return ExperimentConfig(**overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--seed", type=int, help="master seed (overrides config)")
    parser.add_argument("--out", help="output path")
    parser.add_argument("--format", choices=("csv", "json"), help="report format")
    parser.add_argument("--jobs", type=int, default=1, help="parallel worker count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semibvm",
        description="Posterior-normality experiments for partial linear regression",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel", help="dump the prior covariance matrix as CSV")
    _add_common(p)

    p = sub.add_parser("sample", help="simulate a dataset and write CSV (u,v,y,e)")
    _add_common(p)
    p.add_argument("--n", type=int, help="sample size (default: first ladder entry)")

    p = sub.add_parser("posterior", help="one-shot posterior diagnostics as JSON")
    _add_common(p)
    p.add_argument("--n", type=int, help="sample size (default: first ladder entry)")

    p = sub.add_parser("bvm-scan", help="gap scan over the n ladder")
    _add_common(p)

    p = sub.add_parser("coverage", help="credible-interval coverage study")
    _add_common(p)
    p.add_argument("--replications", type=int, default=1000)

    p = sub.add_parser("baseline", help="normal location-model reference gap")
    _add_common(p)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--prior-var", type=float, default=100.0)

    p = sub.add_parser("diagnostics", help="KL/domination/expansion suite as JSON")
    _add_common(p)
    p.add_argument("--n", type=int, help="sample size (default: first ladder entry)")

    return parser


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        print(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    n_default = cfg.n_ladder[0]
    master = cfg.master_seed
    try:
        if args.command == "kernel":
            _, _, spec = make_components(cfg)
            cov = prior_covariance(spec)
            if cfg.output_path:
                covariance_to_csv(cov, cfg.output_path)
            else:
                for row in cov.matrix:
                    print(",".join(repr(float(x)) for x in row))
        elif args.command == "sample":
            law, truth, _ = make_components(cfg)
            n = args.n if args.n is not None else n_default
            ds = sample_dataset(law, truth, n, cell_seed(master, n, 0))
            if cfg.output_path:
                dataset_to_csv(ds, cfg.output_path)
            else:
                print("u,v,y,e")
                for row in zip(ds.u, ds.v, ds.y, ds.e):
                    print(",".join(repr(float(x)) for x in row))
        elif args.command == "posterior":
            n = args.n if args.n is not None else n_default
            _emit(run_posterior_snapshot(cfg, n, cell_seed(master, n, 0)), cfg.output_path)
        elif args.command == "bvm-scan":
            report = run_bvm_scan(cfg, jobs=args.jobs)
            if not cfg.output_path:
                print(report.to_json_text())
        elif args.command == "coverage":
            report = run_coverage(cfg, args.replications, jobs=args.jobs)
            if not cfg.output_path:
                print(report.to_json_text())
        elif args.command == "baseline":
            diag = run_parametric_baseline(
                args.n, cfg.theta0, args.prior_var, cell_seed(master, args.n, 0)
            )
            _emit(dataclasses.asdict(diag), cfg.output_path)
        elif args.command == "diagnostics":
            n = args.n if args.n is not None else n_default
            _emit(run_diagnostics_suite(cfg, n, cell_seed(master, n, 0)), cfg.output_path)
    except NumericsError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
