"""Prior tests: kernel against quadrature, covariance, path sampling, seminorm."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from semibvm.gp_prior import (
    GpPriorSpec,
    NumericsError,
    cholesky_with_jitter,
    holder_seminorm,
    kibm_kernel,
    prior_covariance,
    sample_prior_path,
)
from semibvm.model import NuisanceFunction, uniform_grid


def kernel_quadrature(s: float, t: float, k: int) -> float:
    """Independent kernel evaluation: polynomial sum + adaptive quadrature."""
    poly = sum((s * t) ** i / math.factorial(i) ** 2 for i in range(k + 1))
    integral, _ = quad(
        lambda x: (s - x) ** k * (t - x) ** k, 0.0, min(s, t), epsabs=1e-13, epsrel=1e-13
    )
    return poly + integral / math.factorial(k) ** 2


class TestKernel:
    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    @pytest.mark.parametrize("t", [0.0, 0.3, 1.0])
    def test_left_edge_is_one(self, t, k):
        assert kibm_kernel(0.0, t, k) == pytest.approx(1.0, abs=1e-14)

    def test_order_zero_value(self):
        assert kibm_kernel(0.3, 0.7, 0) == pytest.approx(kernel_quadrature(0.3, 0.7, 0), abs=1e-12)
        assert kibm_kernel(0.3, 0.7, 0) == pytest.approx(1.3, abs=1e-12)

    def test_order_one_corner_value(self):
        assert kibm_kernel(1.0, 1.0, 1) == pytest.approx(7.0 / 3.0, abs=1e-10)
        assert kibm_kernel(1.0, 1.0, 1) == pytest.approx(kernel_quadrature(1.0, 1.0, 1), abs=1e-12)

    def test_random_triples_against_quadrature(self):
        rng = np.random.default_rng(61)
        for _ in range(100):
            s, t = rng.uniform(0, 1, size=2)
            k = int(rng.integers(0, 4))
            exact = kibm_kernel(s, t, k)
            reference = kernel_quadrature(s, t, k)
            assert abs(exact - reference) < 1e-8 * max(abs(reference), 1.0)

    def test_symmetry(self):
        rng = np.random.default_rng(67)
        for _ in range(50):
            s, t = rng.uniform(0, 1, size=2)
            k = int(rng.integers(0, 4))
            assert kibm_kernel(s, t, k) == pytest.approx(kibm_kernel(t, s, k), abs=1e-14)

    def test_corner_closed_form_per_order(self):
        # c_k(1,1) = 1 + sum_{i=1}^k 1/(i!)^2 + 1/((2k+1) (k!)^2).  The
        # sequence peaks at k = 1 (2, 7/3, 2.3, ...), so no monotonicity
        # in k is asserted, only the identity against quadrature.
        values = [kibm_kernel(1.0, 1.0, k) for k in range(5)]
        for k, val in enumerate(values):
            closed = (
                1.0
                + sum(1.0 / math.factorial(i) ** 2 for i in range(1, k + 1))
                + 1.0 / ((2 * k + 1) * math.factorial(k) ** 2)
            )
            assert val == pytest.approx(closed, abs=1e-12)
            assert val == pytest.approx(kernel_quadrature(1.0, 1.0, k), abs=1e-10)
        assert values[1] == max(values)

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            kibm_kernel(-0.1, 0.5, 1)
        with pytest.raises(ValueError):
            kibm_kernel(0.5, 1.1, 1)
        with pytest.raises(ValueError):
            kibm_kernel(0.5, 0.5, -1)


class TestPriorCovariance:
    def test_two_point_order_zero(self):
        spec = GpPriorSpec(k=0, grid_size=2, scale=1.0)
        cov = prior_covariance(spec)
        np.testing.assert_allclose(cov.matrix, [[1.0, 1.0], [1.0, 2.0]], atol=1e-14)

    def test_grid_size_one_disallowed(self):
        with pytest.raises(ValueError):
            GpPriorSpec(k=0, grid_size=1, scale=1.0)

    def test_exact_symmetry(self):
        cov = prior_covariance(GpPriorSpec(k=2, grid_size=17, scale=2.0))
        np.testing.assert_array_equal(cov.matrix, cov.matrix.T)

    def test_positive_semidefinite(self):
        cov = prior_covariance(GpPriorSpec(k=1, grid_size=50, scale=1.0))
        eigenvalues = np.linalg.eigvalsh(cov.matrix)
        assert eigenvalues.min() >= -1e-10 * np.trace(cov.matrix)

    def test_scale_is_variance_multiplier(self):
        base = prior_covariance(GpPriorSpec(k=1, grid_size=9, scale=1.0))
        scaled = prior_covariance(GpPriorSpec(k=1, grid_size=9, scale=2.0))
        np.testing.assert_allclose(scaled.matrix, 4.0 * base.matrix, atol=1e-12)

    def test_diagonal_matches_kernel(self):
        spec = GpPriorSpec(k=2, grid_size=11, scale=1.5)
        cov = prior_covariance(spec)
        grid = uniform_grid(11)
        expected = [spec.scale**2 * kibm_kernel(t, t, 2) for t in grid]
        np.testing.assert_allclose(np.diag(cov.matrix), expected, atol=1e-12)

    def test_asymmetric_matrix_rejected(self):
        from semibvm.gp_prior import PriorCovariance

        bad = np.array([[1.0, 0.5], [0.2, 1.0]])
        with pytest.raises(ValueError):
            PriorCovariance(matrix=bad)


class TestCholeskyJitter:
    def test_clean_matrix_untouched(self):
        mat = np.array([[2.0, 0.5], [0.5, 1.0]])
        factor = cholesky_with_jitter(mat)
        np.testing.assert_allclose(factor @ factor.T, mat, atol=1e-14)

    def test_singular_psd_matrix_recovers(self):
        mat = np.ones((4, 4))  # rank one
        factor = cholesky_with_jitter(mat)
        np.testing.assert_allclose(factor @ factor.T, mat, atol=1e-5)

    def test_indefinite_matrix_fails(self):
        with pytest.raises(NumericsError):
            cholesky_with_jitter(np.array([[1.0, 0.0], [0.0, -1.0]]))


class TestSamplePriorPath:
    def test_seed_determinism(self):
        spec = GpPriorSpec(k=1, grid_size=25, scale=1.0)
        a = sample_prior_path(spec, 5)
        b = sample_prior_path(spec, 5)
        np.testing.assert_array_equal(a.values, b.values)
        c = sample_prior_path(spec, 6)
        assert not np.array_equal(a.values, c.values)

    def test_pointwise_variance_matches_kernel(self):
        spec = GpPriorSpec(k=1, grid_size=12, scale=1.5)
        draws = 10_000
        grid = uniform_grid(12)
        samples = np.array([sample_prior_path(spec, seed).values for seed in range(draws)])
        idx = 8
        target = spec.scale**2 * kibm_kernel(grid[idx], grid[idx], spec.k)
        observed = samples[:, idx].var(ddof=1)
        se = target * math.sqrt(2.0 / (draws - 1))
        assert abs(observed - target) < 4 * se

    def test_empirical_covariance_entrywise(self):
        spec = GpPriorSpec(k=1, grid_size=8, scale=1.0)
        draws = 10_000
        samples = np.array([sample_prior_path(spec, 10_000 + seed).values for seed in range(draws)])
        empirical = np.cov(samples, rowvar=False)
        target = prior_covariance(spec).matrix
        se = np.sqrt(
            (np.outer(np.diag(target), np.diag(target)) + target**2) / draws
        )
        assert np.all(np.abs(empirical - target) < 5 * se)

    def test_conditioned_paths_inside_ball(self):
        spec = GpPriorSpec(k=1, grid_size=30, scale=1.0, holder_alpha=0.6, holder_bound=10.0)
        for seed in range(25):
            path = sample_prior_path(spec, seed)
            assert holder_seminorm(path, 0.6) < 10.0
            assert path.sup_norm() + holder_seminorm(path, 0.6) < 10.0

    def test_conditioned_determinism(self):
        spec = GpPriorSpec(k=1, grid_size=20, scale=1.0, holder_alpha=0.6, holder_bound=8.0)
        a = sample_prior_path(spec, 3)
        b = sample_prior_path(spec, 3)
        np.testing.assert_array_equal(a.values, b.values)

    def test_attempt_cap_raises(self):
        spec = GpPriorSpec(k=1, grid_size=20, scale=1.0, holder_alpha=0.6, holder_bound=0.01)
        with pytest.raises(ValueError, match="attempts"):
            sample_prior_path(spec, 1, max_attempts=20)

    def test_ball_requires_alpha(self):
        with pytest.raises(ValueError):
            GpPriorSpec(k=1, grid_size=10, scale=1.0, holder_bound=5.0)


class TestHolderSeminorm:
    def test_constant_is_zero(self):
        eta = NuisanceFunction(np.full(17, 3.2))
        assert holder_seminorm(eta, 0.7) == 0.0

    def test_identity_lipschitz(self):
        eta = NuisanceFunction(uniform_grid(33))
        assert holder_seminorm(eta, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_sqrt_on_fine_grid(self):
        # exhaustive pairwise maximum, computed independently
        grid = uniform_grid(101)
        eta = NuisanceFunction(np.sqrt(grid))
        best = 0.0
        for i in range(101):
            for j in range(i + 1, 101):
                ratio = abs(eta.values[i] - eta.values[j]) / abs(grid[i] - grid[j]) ** 0.5
                best = max(best, ratio)
        assert best == pytest.approx(1.0, abs=1e-12)
        assert holder_seminorm(eta, 0.5) == pytest.approx(best, abs=1e-12)

    def test_absolute_homogeneity(self):
        rng = np.random.default_rng(71)
        values = rng.normal(size=20)
        eta = NuisanceFunction(values)
        scaled = NuisanceFunction(-2.5 * values)
        assert holder_seminorm(scaled, 0.6) == pytest.approx(
            2.5 * holder_seminorm(eta, 0.6), abs=1e-12
        )

    def test_triangle_inequality(self):
        rng = np.random.default_rng(73)
        for _ in range(10):
            a = rng.normal(size=15)
            b = rng.normal(size=15)
            lhs = holder_seminorm(NuisanceFunction(a + b), 0.8)
            rhs = holder_seminorm(NuisanceFunction(a), 0.8) + holder_seminorm(
                NuisanceFunction(b), 0.8
            )
            assert lhs <= rhs + 1e-12

    def test_alpha_validation(self):
        eta = NuisanceFunction(np.zeros(5))
        with pytest.raises(ValueError):
            holder_seminorm(eta, 0.0)
        with pytest.raises(ValueError):
            holder_seminorm(eta, 1.5)
