"""Covariance validation, factorization, prior densities, and rotations."""

import math

import numpy as np
import pytest

from ellslice import (
    DimensionMismatch,
    GaussianPrior,
    NotPositiveDefinite,
    check_covariance,
    factorize,
    rotate,
    squared_exponential,
    KernelConfig,
)


def random_spd(rng, n):
    a = rng.standard_normal((n, n))
    return a @ a.T + n * np.eye(n)


class TestCheckCovariance:
    def test_accepts_valid(self):
        check_covariance(np.array([[2.0, 0.5], [0.5, 1.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            check_covariance(np.zeros((2, 3)))

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            check_covariance(np.array([[1.0, 0.2], [0.4, 1.0]]))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            check_covariance(np.array([[1.0, np.nan], [np.nan, 1.0]]))


class TestFactorize:
    def test_identity_needs_no_jitter(self):
        prior = factorize(np.eye(2), jitter_scale=0.0)
        np.testing.assert_array_equal(prior.chol, np.eye(2))
        assert prior.jitter == 0.0

    def test_diagonal_roots(self):
        prior = factorize(np.diag([4.0, 9.0]))
        np.testing.assert_allclose(np.diag(prior.chol), [2.0, 3.0])

    def test_reconstruction_bound(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            cov = random_spd(rng, 6)
            prior = factorize(cov)
            err = np.max(np.abs(prior.chol @ prior.chol.T - (cov + prior.jitter * np.eye(6))))
            assert err <= 1e-8 * np.max(np.diag(cov))

    def test_near_duplicate_inputs_repaired_with_jitter(self):
        # two almost-identical rows make the SE covariance numerically singular
        inputs = np.array([[0.0], [1e-9]])
        cov = squared_exponential(inputs, KernelConfig())
        prior = factorize(cov)
        assert prior.jitter > 0.0
        err = np.max(np.abs(prior.chol @ prior.chol.T - (cov + prior.jitter * np.eye(2))))
        assert err <= 1e-8 * np.max(np.diag(cov))

    def test_indefinite_matrix_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            factorize(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_lower_triangular_positive_diagonal(self):
        rng = np.random.default_rng(1)
        prior = factorize(random_spd(rng, 5))
        assert np.allclose(prior.chol, np.tril(prior.chol))
        assert np.all(np.diag(prior.chol) > 0)


class TestSample:
    def test_identity_covariance_passes_through_normals(self):
        prior = factorize(np.eye(3), jitter_scale=0.0)
        draw = prior.sample(np.random.default_rng(7))
        raw = np.random.default_rng(7).standard_normal(3)
        np.testing.assert_array_equal(draw, raw)

    def test_scalar_variance_within_chi_square_bounds(self):
        prior = factorize(np.array([[4.0]]))
        rng = np.random.default_rng(3)
        draws = np.array([prior.sample(rng)[0] for _ in range(10_000)])
        assert 3.6 <= draws.var() <= 4.4

    def test_identically_seeded_streams_agree(self):
        prior = factorize(np.array([[2.0, 0.3], [0.3, 1.0]]))
        a = prior.sample(np.random.default_rng(11))
        b = prior.sample(np.random.default_rng(11))
        np.testing.assert_array_equal(a, b)

    def test_sample_covariance_close_in_frobenius(self):
        """10^5 draws land within 5% relative Frobenius error of the target."""
        cov = np.array([[1.0, 0.6], [0.6, 2.0]])
        prior = factorize(cov)
        rng = np.random.default_rng(5)
        z = rng.standard_normal((100_000, 2))
        draws = z @ prior.chol.T
        emp = draws.T @ draws / len(draws)
        assert np.linalg.norm(emp - cov) / np.linalg.norm(cov) < 0.05


class TestLogDensity:
    def test_standard_normal_at_origin(self):
        prior = factorize(np.array([[1.0]]), jitter_scale=0.0)
        assert math.isclose(prior.log_density(np.array([0.0])), -0.5 * math.log(2 * math.pi))

    def test_standard_normal_at_one(self):
        prior = factorize(np.array([[1.0]]), jitter_scale=0.0)
        expected = -0.5 * math.log(2 * math.pi) - 0.5
        assert math.isclose(prior.log_density(np.array([1.0])), expected)

    def test_matches_brute_force_inverse(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            cov = random_spd(rng, 4)
            prior = factorize(cov, jitter_scale=0.0)
            f = rng.standard_normal(4)
            direct = -0.5 * (
                4 * math.log(2 * math.pi)
                + math.log(np.linalg.det(cov))
                + f @ np.linalg.inv(cov) @ f
            )
            assert abs(prior.log_density(f) - direct) < 1e-10

    def test_wrong_length_rejected(self):
        prior = factorize(np.eye(3))
        with pytest.raises(DimensionMismatch):
            prior.log_density(np.zeros(2))


class TestRotate:
    def test_zero_angle_is_identity(self):
        f, nu = np.array([1.0, 2.0]), np.array([-0.5, 3.0])
        f2, nu2 = rotate(f, nu, 0.0)
        np.testing.assert_array_equal(f2, f)
        np.testing.assert_array_equal(nu2, nu)

    def test_quarter_turn_swaps(self):
        f, nu = np.array([1.0, 2.0]), np.array([-0.5, 3.0])
        f2, nu2 = rotate(f, nu, math.pi / 2)
        np.testing.assert_allclose(f2, nu, atol=1e-15)
        np.testing.assert_allclose(nu2, -f, atol=1e-15)

    def test_half_turn_negates(self):
        f, nu = np.array([1.0, 2.0]), np.array([-0.5, 3.0])
        f2, nu2 = rotate(f, nu, math.pi)
        np.testing.assert_allclose(f2, -f, atol=1e-15)
        np.testing.assert_allclose(nu2, -nu, atol=1e-15)

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(DimensionMismatch):
            rotate(np.zeros(2), np.zeros(3), 0.1)

    def test_composition_adds_angles(self):
        rng = np.random.default_rng(13)
        f, nu = rng.standard_normal(5), rng.standard_normal(5)
        t1, t2 = 0.7, -1.9
        step1 = rotate(*rotate(f, nu, t1), t2)
        direct = rotate(f, nu, t1 + t2)
        np.testing.assert_allclose(step1[0], direct[0], atol=1e-10)
        np.testing.assert_allclose(step1[1], direct[1], atol=1e-10)

    def test_unit_jacobian_at_sampled_angles(self):
        rng = np.random.default_rng(17)
        for theta in rng.uniform(-2 * math.pi, 2 * math.pi, size=100):
            assert abs(math.cos(theta) ** 2 + math.sin(theta) ** 2 - 1.0) < 1e-12

    def test_joint_prior_density_invariant(self):
        """Rotating (f, nu) by any angle preserves the joint prior density."""
        rng = np.random.default_rng(21)
        cov = random_spd(rng, 10)
        prior = factorize(cov, jitter_scale=0.0)
        for _ in range(200):
            f = prior.sample(rng)
            nu = prior.sample(rng)
            theta = rng.uniform(0, 2 * math.pi)
            f2, nu2 = rotate(f, nu, theta)
            before = prior.log_density(f) + prior.log_density(nu)
            after = prior.log_density(f2) + prior.log_density(nu2)
            assert abs(after - before) < 1e-8
