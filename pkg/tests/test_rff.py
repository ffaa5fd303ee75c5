import numpy as np
import pytest

from sthawkes import (
    ConfigError,
    CovarianceParams,
    covariance_matrix,
    embed,
    gaussian_kernel_exact,
    kernel_approx,
    sample_basis,
)

TWO_PI = 2.0 * np.pi


class TestBasis:
    def test_deterministic(self):
        a = sample_basis(32, 7)
        b = sample_basis(32, 7)
        assert np.array_equal(a.directions, b.directions)
        assert np.array_equal(a.phases, b.phases)

    def test_phase_range(self):
        basis = sample_basis(500, 3)
        assert basis.phases.min() >= 0.0
        assert basis.phases.max() < TWO_PI

    def test_direction_law(self):
        # Monte-Carlo check of the standard-normal sampling law.
        basis = sample_basis(5000, 11)
        emp = basis.directions @ basis.directions.T / basis.dim
        assert np.abs(emp - np.eye(2)).max() < 0.05

    def test_dim_bounds(self):
        with pytest.raises(ConfigError):
            sample_basis(0, 0)
        with pytest.raises(ConfigError):
            sample_basis(5001, 0)


class TestCovariance:
    def test_table_configs(self):
        ten = CovarianceParams(eigvecs=np.eye(2), eigvals=[10.0, 10.0])
        assert np.allclose(covariance_matrix(ten), 10.0 * np.eye(2))
        tight = CovarianceParams(eigvecs=np.eye(2), eigvals=[0.04, 0.04])
        assert np.allclose(covariance_matrix(tight), 0.04 * np.eye(2))

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            a = rng.uniform(0, TWO_PI)
            v = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
            cov = CovarianceParams(eigvecs=v, eigvals=rng.uniform(0.1, 3.0, 2))
            sigma = covariance_matrix(cov)
            assert np.array_equal(sigma, sigma.T) or np.allclose(sigma, sigma.T)

    def test_decomposition_idempotent(self):
        sigma = np.array([[9.0, 2.4], [2.4, 1.0]])
        cov = CovarianceParams.from_matrix(sigma)
        assert np.allclose(covariance_matrix(cov), sigma, atol=1e-12)

    def test_det_inv_sqrt(self):
        cov = CovarianceParams(eigvecs=np.eye(2), eigvals=[4.0, 9.0])
        assert cov.det_inv_sqrt == pytest.approx(1.0 / 6.0)

    def test_rejects_non_orthonormal(self):
        with pytest.raises(ConfigError):
            CovarianceParams(eigvecs=np.array([[1.0, 0.1], [0.0, 1.0]]),
                             eigvals=[1.0, 1.0])

    def test_rejects_nonpositive_eigvals(self):
        with pytest.raises(ConfigError):
            CovarianceParams(eigvecs=np.eye(2), eigvals=[1.0, 0.0])


class TestExactKernel:
    def test_zero_distance_identity(self):
        cov = CovarianceParams.isotropic(1.0)
        assert gaussian_kernel_exact([0, 0], [0, 0], cov) == pytest.approx(1 / TWO_PI)

    def test_zero_distance_small_variance(self):
        cov = CovarianceParams.isotropic(0.01)
        assert gaussian_kernel_exact([1, 1], [1, 1], cov) == pytest.approx(100 / TWO_PI)

    def test_symmetric_in_arguments(self):
        rng = np.random.default_rng(1)
        cov = CovarianceParams.from_matrix(np.array([[2.0, 0.5], [0.5, 1.0]]))
        for _ in range(20):
            a, b = rng.normal(size=2), rng.normal(size=2)
            assert gaussian_kernel_exact(a, b, cov) == pytest.approx(
                gaussian_kernel_exact(b, a, cov), rel=1e-12)


class TestEmbedding:
    def test_entry_bounds(self):
        basis = sample_basis(64, 5)
        cov = CovarianceParams.isotropic(0.5)
        z = embed(np.random.default_rng(2).normal(size=(100, 2)), cov, basis)
        bound = np.sqrt(2.0 / 64)
        assert np.abs(z).max() <= bound + 1e-15
        assert ((z ** 2).sum(axis=1) <= 2.0 + 1e-12).all()

    def test_origin_row_ignores_covariance(self):
        basis = sample_basis(32, 9)
        z1 = embed([[0.0, 0.0]], CovarianceParams.isotropic(0.1), basis)
        z2 = embed([[0.0, 0.0]], CovarianceParams.isotropic(7.0), basis)
        expected = np.sqrt(2.0 / 32) * np.cos(basis.phases)
        assert np.allclose(z1[0], expected)
        assert np.allclose(z2[0], expected)


def grid_mae(dim: int, cov: CovarianceParams, seeds, half_width=3.0, n=41) -> float:
    """Mean absolute error of the randomized kernel against the exact one
    over a grid of offsets from the origin, averaged over bases."""
    xs = np.linspace(-half_width, half_width, n)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    origin = np.zeros_like(pts)
    exact = gaussian_kernel_exact(pts, origin, cov)
    errs = []
    for seed in seeds:
        basis = sample_basis(dim, seed)
        approx = kernel_approx(pts, origin, cov, basis)
        errs.append(np.abs(approx - exact).mean())
    return float(np.mean(errs))


class TestKernelApprox:
    def test_error_shrinks_with_dim(self):
        cov = CovarianceParams.isotropic(1.0)
        seeds = range(20)
        e10 = grid_mae(10, cov, seeds)
        e50 = grid_mae(50, cov, seeds)
        e500 = grid_mae(500, cov, seeds)
        assert e500 < e50 < e10

    def test_error_level_at_500(self):
        cov = CovarianceParams.isotropic(1.0)
        assert grid_mae(500, cov, range(20)) <= 0.05 / TWO_PI

    def test_anisotropic_reference_surface(self):
        # sigma_x = 3, sigma_y = 1, correlation 0.8
        sigma = np.array([[9.0, 2.4], [2.4, 1.0]])
        cov = CovarianceParams.from_matrix(sigma)
        seeds = range(10)
        errs = [grid_mae(d, cov, seeds, half_width=6.0) for d in (20, 50, 100)]
        assert errs[2] < errs[1] < errs[0]

    def test_unbiased_over_bases(self):
        # Bochner construction: feature products average to the exact
        # (normalized) kernel over independent bases.
        cov = CovarianceParams.from_matrix(np.array([[1.5, 0.3], [0.3, 0.7]]))
        a, b = np.array([0.4, -0.2]), np.array([-0.5, 0.3])
        exact = gaussian_kernel_exact(a, b, cov)
        vals = np.array([
            kernel_approx(a, b, cov, sample_basis(8, seed))
            for seed in range(1000)
        ])
        half = 4.0 * vals.std() / np.sqrt(len(vals))
        assert abs(vals.mean() - exact) < half
