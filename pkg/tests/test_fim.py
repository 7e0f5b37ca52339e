import numpy as np
import pytest

from crbkit import (
    BlindChannelModel,
    FimEstimate,
    GaussianMeanModel,
    InvalidInput,
    NumericalFailure,
    fim_gaussian_mean,
    fim_monte_carlo,
    gaussian_location,
    is_psd,
    ranked_svd,
)


def test_identity_location_fim():
    est = fim_gaussian_mean(gaussian_location(2), [0.0, 0.0])
    assert est.method == "analytic"
    assert est.std_err_bound == 0.0
    assert np.array_equal(est.matrix.entries, np.eye(2))


def test_unit_blind_channel_fim():
    est = fim_gaussian_mean(BlindChannelModel(1, 1, 1.0), [1.0, 1.0])
    assert np.array_equal(est.matrix.entries, np.ones((2, 2)))
    assert ranked_svd(est.matrix).rank == 1


def test_noise_scaling_divides_fim_exactly():
    theta = [1.2, 0.7, 0.9]
    base = fim_gaussian_mean(BlindChannelModel(2, 1, 1.0), theta).matrix.entries
    quarter = fim_gaussian_mean(BlindChannelModel(2, 1, 4.0), theta).matrix.entries
    assert np.array_equal(quarter, base / 4.0)


def test_correlated_noise_matches_direct_formula():
    rng = np.random.default_rng(16)
    a = rng.standard_normal((3, 3))
    cov = a @ a.T + 3.0 * np.eye(3)
    jac = rng.standard_normal((3, 2))
    model = GaussianMeanModel(
        mean_fn=lambda t: jac @ t,
        mean_jac=lambda t: jac,
        noise_cov=cov,
        param_dim=2,
        obs_dim=3,
    )
    est = fim_gaussian_mean(model, [0.4, -0.2])
    expected = jac.T @ np.linalg.inv(cov) @ jac
    assert np.allclose(est.matrix.entries, expected, rtol=1e-10, atol=1e-12)


def test_monte_carlo_location_within_five_standard_errors():
    est = fim_monte_carlo(gaussian_location(2), [0.3, -0.7], 100_000, 5)
    assert est.method == "monte_carlo"
    assert est.n_samples == 100_000
    diff = np.abs(est.matrix.entries - np.eye(2)).max()
    assert diff <= 5.0 * est.std_err_bound


def test_monte_carlo_blind_channel_within_five_standard_errors():
    model = BlindChannelModel(2, 2)
    theta = np.random.default_rng(11).uniform(0.5, 1.5, 4)
    analytic = fim_gaussian_mean(model, theta).matrix.entries
    est = fim_monte_carlo(model, theta, 100_000, 2024)
    diff = np.abs(est.matrix.entries - analytic).max()
    assert diff <= 5.0 * est.std_err_bound


def test_monte_carlo_error_shrinks_at_root_n_rate():
    # RMS error over three seeds should fall by ~sqrt(10) per tenfold
    # increase in samples; allow a factor-of-two band around that rate.
    model = BlindChannelModel(2, 2)
    theta = np.random.default_rng(11).uniform(0.5, 1.5, 4)
    analytic = fim_gaussian_mean(model, theta).matrix.entries
    rms = []
    for n in (1_000, 10_000, 100_000):
        errs = [
            np.linalg.norm(fim_monte_carlo(model, theta, n, seed).matrix.entries - analytic)
            for seed in range(3)
        ]
        rms.append(float(np.sqrt(np.mean(np.square(errs)))))
    lo, hi = np.sqrt(10.0) / 2.0, 2.0 * np.sqrt(10.0)
    assert lo <= rms[0] / rms[1] <= hi
    assert lo <= rms[1] / rms[2] <= hi


def test_monte_carlo_is_deterministic_per_seed():
    model = BlindChannelModel(2, 2)
    theta = np.array([1.0, 0.8, 1.2, 0.6])
    a = fim_monte_carlo(model, theta, 9_000, 3)
    b = fim_monte_carlo(model, theta, 9_000, 3)
    assert np.array_equal(a.matrix.entries, b.matrix.entries)
    assert a.std_err_bound == b.std_err_bound
    c = fim_monte_carlo(model, theta, 9_000, 4)
    assert not np.array_equal(a.matrix.entries, c.matrix.entries)


def test_monte_carlo_estimate_is_symmetric_psd():
    est = fim_monte_carlo(BlindChannelModel(2, 2), [1.0, 0.8, 1.2, 0.6], 2_000, 21)
    m = est.matrix.entries
    assert np.array_equal(m, m.T)
    assert is_psd(est.matrix)
    assert est.clip_magnitude >= 0.0
    assert est.std_err_bound > 0.0


def test_monte_carlo_rejects_tiny_sample_budget():
    with pytest.raises(InvalidInput):
        fim_monte_carlo(gaussian_location(1), [0.0], 99, 0)
    with pytest.raises(InvalidInput):
        fim_monte_carlo(gaussian_location(2), [0.0], 1_000, 0)


class _NanScoreModel:
    """Stub whose score turns non-finite at one chosen sample index."""

    param_dim = 1
    obs_dim = 1

    def __init__(self, bad_index):
        self.bad_index = bad_index
        self.calls = 0

    def log_density(self, y, theta):
        return 0.0

    def sample(self, theta, rng):
        rng.standard_normal(1)
        return np.zeros(1)

    def score(self, y, theta):
        value = np.full(1, np.nan) if self.calls == self.bad_index else np.zeros(1)
        self.calls += 1
        return value


def test_non_finite_score_reports_global_sample_index():
    with pytest.raises(NumericalFailure) as err:
        fim_monte_carlo(_NanScoreModel(bad_index=123), [0.0], 200, 0)
    assert err.value.sample_index == 123
    assert "123" in str(err.value)
    # index 5000 sits in the second partition; the global index must survive
    with pytest.raises(NumericalFailure) as err2:
        fim_monte_carlo(_NanScoreModel(bad_index=5_000), [0.0], 6_000, 0)
    assert err2.value.sample_index == 5_000


class _NoScoreModel:
    """Wrapper hiding the analytic score to force the fallback path."""

    def __init__(self, inner):
        self._inner = inner
        self.param_dim = inner.param_dim
        self.obs_dim = inner.obs_dim

    def log_density(self, y, theta):
        return self._inner.log_density(y, theta)

    def sample(self, theta, rng):
        return self._inner.sample(theta, rng)


def test_finite_difference_fallback_tracks_analytic_score_route():
    inner = gaussian_location(2, 1.0)
    theta = [0.5, -0.25]
    with_score = fim_monte_carlo(inner, theta, 500, 77)
    without = fim_monte_carlo(_NoScoreModel(inner), theta, 500, 77)
    assert np.allclose(with_score.matrix.entries, without.matrix.entries, atol=1e-6)


def test_estimate_fields_default_for_analytic():
    est = fim_gaussian_mean(gaussian_location(3), np.zeros(3))
    assert isinstance(est, FimEstimate)
    assert est.n_samples == 0
    assert est.clip_magnitude == 0.0
