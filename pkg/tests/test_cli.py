"""CLI tests: subcommands, config file parsing, exit codes."""

import json
import math

import numpy as np
import pytest

from semibvm import cli
from semibvm.experiments import ExperimentConfig, make_components
from semibvm.gp_prior import NumericsError, prior_covariance


SMALL_CONFIG = """
# compact scan for tests
grid_size = 15
n_ladder = 30, 60
seeds = 3
master_seed = 7
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "scan.cfg"
    path.write_text(SMALL_CONFIG)
    return str(path)


class TestConfigParsing:
    def test_values_and_comments(self, config_path):
        values = cli.parse_config_file(config_path)
        assert values == {
            "grid_size": 15,
            "n_ladder": (30, 60),
            "seeds": 3,
            "master_seed": 7,
        }

    def test_inf_sentinel(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("theta_prior_var = inf\n")
        assert cli.parse_config_file(str(path))["theta_prior_var"] == math.inf

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("bandwidth = 3\n")
        with pytest.raises(cli.ConfigError):
            cli.parse_config_file(str(path))

    def test_bad_value(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("grid_size = fifty\n")
        with pytest.raises(cli.ConfigError):
            cli.parse_config_file(str(path))

    def test_missing_file(self):
        with pytest.raises(cli.ConfigError):
            cli.parse_config_file("/does/not/exist.cfg")


class TestExitCodes:
    def test_unknown_config_key_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("bandwidth = 3\n")
        assert cli.main(["bvm-scan", "--config", str(path)]) == cli.EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_invalid_config_value_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("level = 2.0\n")
        assert cli.main(["posterior", "--config", str(path)]) == cli.EXIT_CONFIG

    def test_numeric_failure_exits_3(self, monkeypatch, capsys):
        def boom(cfg, jobs):
            raise NumericsError("cell n=50 rep=0 seed=123: Cholesky failed")

        monkeypatch.setattr(cli, "run_bvm_scan", boom)
        assert cli.main(["bvm-scan"]) == cli.EXIT_NUMERIC
        err = capsys.readouterr().err
        assert "numeric failure" in err and "n=50" in err

    def test_success_exit_0(self, config_path, tmp_path):
        out = tmp_path / "r.json"
        code = cli.main(["bvm-scan", "--config", config_path, "--out", str(out)])
        assert code == cli.EXIT_OK
        assert out.exists()


class TestSubcommands:
    def test_kernel_csv_matches_library(self, config_path, tmp_path):
        out = tmp_path / "cov.csv"
        assert cli.main(["kernel", "--config", config_path, "--out", str(out)]) == 0
        loaded = np.loadtxt(out, delimiter=",")
        _, _, spec = make_components(ExperimentConfig(grid_size=15))
        np.testing.assert_array_equal(loaded, prior_covariance(spec).matrix)

    def test_sample_deterministic_csv(self, config_path, tmp_path):
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        cli.main(["sample", "--config", config_path, "--n", "20", "--out", str(out_a)])
        cli.main(["sample", "--config", config_path, "--n", "20", "--out", str(out_b)])
        assert out_a.read_text() == out_b.read_text()
        header = out_a.read_text().splitlines()[0]
        assert header == "u,v,y,e"
        assert len(out_a.read_text().strip().splitlines()) == 21

    def test_posterior_json_fields(self, config_path, tmp_path):
        out = tmp_path / "post.json"
        code = cli.main(
            ["posterior", "--config", config_path, "--n", "40", "--out", str(out)]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        for key in ("theta_mean", "theta_variance", "tv_gap", "delta_n", "n"):
            assert key in payload
        assert payload["n"] == 40

    def test_scan_report_schema(self, config_path, tmp_path):
        out = tmp_path / "scan.json"
        cli.main(["bvm-scan", "--config", config_path, "--out", str(out)])
        payload = json.loads(out.read_text())
        assert set(payload) == {"kind", "config", "rows", "aggregates"}
        assert len(payload["rows"]) == 6
        row = payload["rows"][0]
        for key in (
            "n",
            "delta_n",
            "info_tilde",
            "localized_post_mean",
            "localized_post_var",
            "tv_gap",
            "seed",
            "rep",
        ):
            assert key in row

    def test_scan_csv_format(self, config_path, tmp_path):
        out = tmp_path / "scan.csv"
        cli.main(
            [
                "bvm-scan",
                "--config",
                config_path,
                "--out",
                str(out),
                "--format",
                "csv",
            ]
        )
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 7

    def test_coverage_small(self, config_path, tmp_path):
        out = tmp_path / "cov.json"
        code = cli.main(
            [
                "coverage",
                "--config",
                config_path,
                "--replications",
                "10",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["aggregates"][0]["replications"] == 10
        assert 0.0 <= payload["aggregates"][0]["coverage"] <= 1.0

    def test_baseline_stdout(self, capsys):
        code = cli.main(["baseline", "--n", "100", "--prior-var", "50"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["n"] == 100
        assert 0.0 <= payload["tv_gap"] <= 1.0

    def test_diagnostics_json(self, config_path, tmp_path):
        out = tmp_path / "diag.json"
        code = cli.main(
            ["diagnostics", "--config", config_path, "--n", "30", "--out", str(out)]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        for key in ("kl_neighborhood", "domination", "lan_remainder", "hellinger_bound"):
            assert key in payload

    def test_jobs_flag_parallel_scan(self, config_path, tmp_path):
        out = tmp_path / "p.json"
        code = cli.main(
            ["bvm-scan", "--config", config_path, "--jobs", "2", "--out", str(out)]
        )
        assert code == 0
        serial = tmp_path / "s.json"
        cli.main(["bvm-scan", "--config", config_path, "--out", str(serial)])
        a = json.loads(out.read_text())
        b = json.loads(serial.read_text())
        # config echo differs in output_path; the science must not
        assert a["rows"] == b["rows"]
        assert a["aggregates"] == b["aggregates"]
