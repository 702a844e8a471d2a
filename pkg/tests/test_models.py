"""Likelihood models, dataset generators, the conjugate oracle, and binning."""

import math

import numpy as np
import pytest

from ellslice import (
    CLASSIFICATION_KERNEL,
    ClassificationData,
    ConstantLikelihood,
    CoxData,
    DimensionMismatch,
    EventOutOfRange,
    KernelConfig,
    RegressionData,
    bin_events,
    chain_rng,
    factorize,
    generate_classification_dataset,
    generate_regression_dataset,
    gp_regression_posterior_oracle,
    mining_event_times,
    read_event_times,
    squared_exponential,
)

LOG_2PI = math.log(2 * math.pi)


class TestRegressionLikelihood:
    def test_zero_residual_unit_noise(self):
        f = np.array([0.4, -1.2, 2.0])
        data = RegressionData(y=f.copy(), noise_variance=1.0)
        assert math.isclose(data.log_lik(f), -1.5 * LOG_2PI)

    def test_single_point_unit_residual(self):
        data = RegressionData(y=np.array([1.0]), noise_variance=1.0)
        assert math.isclose(data.log_lik(np.array([0.0])), -0.5 * LOG_2PI - 0.5)

    def test_matches_per_term_summation(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            y = rng.standard_normal(3)
            f = rng.standard_normal(3)
            var = float(rng.uniform(0.01, 2.0))
            data = RegressionData(y=y, noise_variance=var)
            per_term = sum(
                -0.5 * LOG_2PI - 0.5 * math.log(var) - (yi - fi) ** 2 / (2 * var)
                for yi, fi in zip(y, f)
            )
            assert abs(data.log_lik(f) - per_term) < 1e-12

    def test_monotone_in_residual_magnitude(self):
        data = RegressionData(y=np.array([0.0]), noise_variance=0.5)
        values = [data.log_lik(np.array([r])) for r in (0.0, 0.5, 1.0, 2.0, 4.0)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_length_mismatch_rejected(self):
        data = RegressionData(y=np.zeros(3), noise_variance=1.0)
        with pytest.raises(DimensionMismatch):
            data.log_lik(np.zeros(4))

    def test_zero_variance_container_rejects_evaluation(self):
        data = RegressionData(y=np.zeros(2), noise_variance=0.0)
        with pytest.raises(ValueError):
            data.log_lik(np.zeros(2))


class TestClassificationLikelihood:
    def test_logistic_at_zero(self):
        data = ClassificationData(labels=np.array([1, -1, 1, 1]), link="logistic")
        assert math.isclose(data.log_lik(np.zeros(4)), 4 * math.log(0.5))

    def test_probit_at_zero(self):
        data = ClassificationData(labels=np.array([1, -1]), link="probit")
        assert math.isclose(data.log_lik(np.zeros(2)), 2 * math.log(0.5))

    def test_logistic_stable_against_extended_precision(self):
        """log sigma(a) for a = -40: stable evaluation matches mpmath."""
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 50
        data = ClassificationData(labels=np.array([1]), link="logistic")
        ours = data.log_lik(np.array([-40.0]))
        exact = float(-mpmath.log(1 + mpmath.exp(mpmath.mpf(40))))
        assert math.isclose(ours, exact, rel_tol=1e-12)
        assert -40.1 < ours < -39.9

    def test_logistic_finite_at_extreme_latents(self):
        data = ClassificationData(labels=np.array([1, -1]), link="logistic")
        assert math.isfinite(data.log_lik(np.array([1e6, 1e6])))
        assert math.isfinite(data.log_lik(np.array([-1e6, -1e6])))

    def test_probit_matches_gaussian_cdf(self):
        from scipy.stats import norm

        rng = np.random.default_rng(1)
        labels = np.where(rng.uniform(size=5) < 0.5, -1, 1)
        f = rng.standard_normal(5)
        data = ClassificationData(labels=labels, link="probit")
        direct = float(np.sum(np.log(norm.cdf(labels * f))))
        assert math.isclose(data.log_lik(f), direct, rel_tol=1e-9)

    def test_bad_labels_rejected(self):
        with pytest.raises(ValueError):
            ClassificationData(labels=np.array([1, 0, -1]), link="logistic")

    def test_bad_link_rejected(self):
        with pytest.raises(ValueError):
            ClassificationData(labels=np.array([1]), link="cauchit")


class TestCoxLikelihood:
    def test_empty_counts_zero_latents(self):
        data = CoxData(counts=np.zeros(5, dtype=int), offset=-0.3)
        assert math.isclose(data.log_lik(np.zeros(5)), -5 * math.exp(-0.3))

    def test_single_bin_known_value(self):
        data = CoxData(counts=np.array([2]), offset=0.0)
        assert math.isclose(data.log_lik(np.zeros(1)), -1.0 - math.log(2.0))

    def test_matches_per_bin_summation(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            counts = rng.poisson(2.0, size=6)
            f = rng.standard_normal(6)
            m = float(rng.uniform(-2, 1))
            data = CoxData(counts=counts, offset=m)
            per_bin = sum(
                y * (fi + m) - math.exp(fi + m) - math.lgamma(y + 1)
                for y, fi in zip(counts, f)
            )
            assert abs(data.log_lik(f) - per_bin) < 1e-9

    def test_mining_counts_at_zero_latents(self):
        data = bin_events(mining_event_times(), 50.0)
        value = data.log_lik(np.zeros(data.n))
        per_bin = sum(
            y * data.offset - math.exp(data.offset) - math.lgamma(y + 1)
            for y in data.counts
        )
        assert math.isfinite(value)
        assert abs(value - per_bin) < 1e-9

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            CoxData(counts=np.array([1, -1]), offset=0.0)

    def test_fractional_counts_rejected(self):
        with pytest.raises(ValueError):
            CoxData(counts=np.array([1.5]), offset=0.0)

    def test_huge_latent_does_not_overflow(self):
        data = CoxData(counts=np.array([3]), offset=0.0)
        assert data.log_lik(np.array([800.0])) == -math.inf


class TestConstantLikelihood:
    def test_value_and_length_check(self):
        model = ConstantLikelihood(3, value=-1.5)
        assert model.log_lik(np.zeros(3)) == -1.5
        with pytest.raises(DimensionMismatch):
            model.log_lik(np.zeros(2))


class TestGenerateRegression:
    def test_zero_noise_copies_latents(self):
        _, data, latents = generate_regression_dataset(
            20, 2, KernelConfig(), 0.0, chain_rng(0)
        )
        np.testing.assert_array_equal(data.y, latents)

    def test_residual_variance_at_defaults(self):
        """N=200, D=1, noise std 0.3: the (y - f) sample variance sits inside
        the central chi-square band around 0.09."""
        _, data, latents = generate_regression_dataset(
            200, 1, KernelConfig(), 0.3, chain_rng(1)
        )
        resid_var = np.var(data.y - latents)
        assert 0.06 <= resid_var <= 0.12

    def test_inputs_inside_unit_cube(self):
        inputs, _, _ = generate_regression_dataset(50, 3, KernelConfig(), 0.1, chain_rng(2))
        assert inputs.shape == (50, 3)
        assert np.all((inputs >= 0.0) & (inputs <= 1.0))

    def test_fixed_seed_reproducible(self):
        a = generate_regression_dataset(10, 1, KernelConfig(), 0.3, chain_rng(3))
        b = generate_regression_dataset(10, 1, KernelConfig(), 0.3, chain_rng(3))
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1].y, b[1].y)
        np.testing.assert_array_equal(a[2], b[2])

    def test_bad_sizes_rejected(self):
        with pytest.raises(ValueError):
            generate_regression_dataset(0, 1, KernelConfig(), 0.3, chain_rng(4))
        with pytest.raises(ValueError):
            generate_regression_dataset(5, 1, KernelConfig(), -0.1, chain_rng(4))


class TestGenerateClassification:
    def test_labels_are_signs(self):
        _, data, _ = generate_classification_dataset(
            100, 2, CLASSIFICATION_KERNEL, chain_rng(5)
        )
        assert set(np.unique(data.labels)) <= {-1, 1}

    def test_default_kernel_matches_surrogate_settings(self):
        assert math.isclose(CLASSIFICATION_KERNEL.lengthscale, math.exp(2.5))
        assert math.isclose(CLASSIFICATION_KERNEL.signal_variance, math.exp(7.0))

    def test_fixed_seed_reproducible(self):
        a = generate_classification_dataset(30, 1, CLASSIFICATION_KERNEL, chain_rng(6))
        b = generate_classification_dataset(30, 1, CLASSIFICATION_KERNEL, chain_rng(6))
        np.testing.assert_array_equal(a[1].labels, b[1].labels)

    def test_probit_link_accepted(self):
        _, data, _ = generate_classification_dataset(
            20, 1, CLASSIFICATION_KERNEL, chain_rng(7), link="probit"
        )
        assert data.link == "probit"


class TestPosteriorOracle:
    def test_no_information_limit(self):
        prior = factorize(np.eye(3))
        data = RegressionData(y=np.array([5.0, -2.0, 1.0]), noise_variance=1e12)
        mean, cov = gp_regression_posterior_oracle(prior, data)
        assert np.max(np.abs(mean)) < 1e-6
        np.testing.assert_allclose(cov, np.eye(3), atol=1e-6)

    def test_scalar_formula(self):
        prior = factorize(np.array([[1.0]]), jitter_scale=0.0)
        data = RegressionData(y=np.array([1.0]), noise_variance=0.09)
        mean, cov = gp_regression_posterior_oracle(prior, data)
        assert math.isclose(mean[0], 1.0 / 1.09)
        assert math.isclose(cov[0, 0], 0.09 / 1.09)

    def test_posterior_variance_never_exceeds_prior(self):
        rng = chain_rng(8)
        inputs = rng.uniform(size=(25, 2))
        cov_prior = squared_exponential(inputs, KernelConfig())
        prior = factorize(cov_prior)
        data = RegressionData(y=rng.standard_normal(25), noise_variance=0.09)
        _, cov_post = gp_regression_posterior_oracle(prior, data)
        assert np.all(np.diag(cov_post) <= np.diag(cov_prior) + 1e-12)

    def test_oracle_consistent_with_exact_sampling(self):
        """10^5 draws of mean + chol(cov) @ z reproduce the oracle moments,
        validating the oracle before it judges any chain."""
        rng = chain_rng(9)
        inputs = rng.uniform(size=(5, 1))
        prior = factorize(squared_exponential(inputs, KernelConfig()))
        data = RegressionData(y=rng.standard_normal(5), noise_variance=0.09)
        mean, cov = gp_regression_posterior_oracle(prior, data)
        chol = factorize(cov).chol
        z = rng.standard_normal((100_000, 5))
        draws = mean + z @ chol.T
        emp_mean = draws.mean(axis=0)
        emp_cov = np.cov(draws.T)
        assert np.max(np.abs(emp_mean - mean)) < 5 * np.sqrt(np.diag(cov).max() / 1e5) * 3
        assert np.linalg.norm(emp_cov - cov) / np.linalg.norm(cov) < 0.05

    def test_size_mismatch_rejected(self):
        prior = factorize(np.eye(2))
        data = RegressionData(y=np.zeros(3), noise_variance=1.0)
        with pytest.raises(DimensionMismatch):
            gp_regression_posterior_oracle(prior, data)


class TestBinEvents:
    def test_boundary_convention(self):
        data = bin_events(np.array([0.0, 49.9, 50.0]), 50.0)
        np.testing.assert_array_equal(data.counts, [2, 1])
        assert math.isclose(data.offset, math.log(3 / 2))

    def test_no_events_is_degenerate(self):
        with pytest.raises(ValueError):
            bin_events(np.array([]), 50.0)

    def test_event_before_origin_rejected(self):
        with pytest.raises(EventOutOfRange):
            bin_events(np.array([-1.0, 10.0]), 50.0, origin=0.0)

    def test_bad_width_rejected(self):
        with pytest.raises(ValueError):
            bin_events(np.array([1.0]), 0.0)

    def test_origin_defaults_to_first_event(self):
        data = bin_events(np.array([100.0, 149.0]), 50.0)
        np.testing.assert_array_equal(data.counts, [2])

    def test_explicit_bin_count(self):
        data = bin_events(np.array([0.0, 10.0]), 50.0, n_bins=4)
        np.testing.assert_array_equal(data.counts, [2, 0, 0, 0])
        assert math.isclose(data.offset, math.log(2 / 4))

    def test_event_beyond_requested_bins_rejected(self):
        with pytest.raises(EventOutOfRange):
            bin_events(np.array([0.0, 120.0]), 50.0, n_bins=2)


class TestMiningRecord:
    def test_totals(self):
        times = mining_event_times()
        assert len(times) == 191
        assert times[0] == 0.0
        assert times[-1] == 40549.0
        assert np.all(np.diff(times) > 0)

    def test_bins_to_expected_shape(self):
        data = bin_events(mining_event_times(), 50.0)
        assert data.n == 811
        assert int(data.counts.sum()) == 191
        assert math.isclose(data.offset, math.log(191 / 811))


class TestReadEventTimes:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "events.txt"
        path.write_text("0.0\n\n12.5\n40549.0\n")
        np.testing.assert_array_equal(read_event_times(path), [0.0, 12.5, 40549.0])

    def test_garbage_line_rejected(self, tmp_path):
        path = tmp_path / "events.txt"
        path.write_text("1.0\nnot-a-number\n")
        with pytest.raises(ValueError):
            read_event_times(path)
