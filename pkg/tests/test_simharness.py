import math

import numpy as np
import pytest
from scipy import stats as sps

from kmvcount.simharness import (
    CoverageReport,
    ModelSpec,
    coverage_bound,
    coverage_probability,
    exact_entries,
    ks_statistic,
    limit_law_ks,
    naive_min_expectation,
    reciprocal_min_running_means,
    run_exact,
    run_independent,
    run_model,
    sample_gamma,
    trial_rng,
)
from kmvcount.special import gamma_cdf


class TestSampleGamma:
    def test_exponential_case_is_inverse_cdf(self):
        a = sample_gamma(1, 2.0, trial_rng(0, 0), 1000)
        u = 1.0 - trial_rng(0, 0).random((1000, 1))
        np.testing.assert_allclose(a, -np.log(u[:, 0]) / 2.0, rtol=1e-15)

    def test_moments(self):
        x = sample_gamma(3, 2.0, np.random.default_rng(8), 10**6)
        assert abs(x.mean() - 1.5) <= 0.005
        assert abs(x.var() - 0.75) <= 0.01

    def test_scalar_and_validation(self):
        assert isinstance(sample_gamma(2, 1.0, np.random.default_rng(0)), float)
        with pytest.raises(ValueError):
            sample_gamma(0, 1.0, np.random.default_rng(0))
        with pytest.raises(ValueError):
            sample_gamma(2, 0.0, np.random.default_rng(0))

    def test_self_ks(self):
        x = sample_gamma(3, 1.0, np.random.default_rng(9), 1600)
        assert ks_statistic(x, lambda t: gamma_cdf(t, 3)) < 1.63 / 40


class TestKs:
    def test_against_scipy(self):
        x = np.random.default_rng(1).gamma(2.0, size=500)
        ours = ks_statistic(x, lambda t: gamma_cdf(t, 2))
        assert ours == pytest.approx(sps.kstest(x, sps.gamma(2).cdf).statistic, abs=1e-12)


class TestModelSpec:
    @pytest.mark.parametrize(
        "kwargs",
        [dict(theta=0), dict(trials=0), dict(model="bogus"), dict(k=1, m=1)],
    )
    def test_rejects(self, kwargs):
        base = dict(model="exact", theta=10, k=3, m=4, trials=5)
        base.update(kwargs)
        with pytest.raises(ValueError):
            ModelSpec(**base)


class TestRuns:
    def test_single_trial_is_degenerate(self):
        st = run_independent(ModelSpec("independent", 1000, 3, 8, 1, rng_seed=5))
        assert st.sample_variance == 0 and st.standard_error_of_mean == 0

    def test_reproducible(self):
        spec = ModelSpec("exact", 2000, 3, 8, 20, rng_seed=42)
        assert run_exact(spec) == run_exact(spec)
        ispec = ModelSpec("independent", 2000, 3, 8, 50, rng_seed=42)
        assert run_independent(ispec) == run_independent(ispec)
        assert run_independent(ispec) != run_independent(ModelSpec("independent", 2000, 3, 8, 50, rng_seed=43))

    def test_trials_independent_of_batching(self):
        a = exact_entries(ModelSpec("exact", 500, 3, 8, 10, rng_seed=1))
        b = exact_entries(ModelSpec("exact", 500, 3, 8, 4, rng_seed=1))
        np.testing.assert_array_equal(a[:4], b)

    def test_se_definition(self):
        st = run_independent(ModelSpec("independent", 10**4, 2, 8, 200, rng_seed=2))
        assert st.standard_error_of_mean == pytest.approx(math.sqrt(st.sample_variance / 200), rel=1e-15)
        assert st.sample_variance >= 0

    def test_theta_one_small_theta_regime(self):
        st = run_exact(ModelSpec("exact", 1, 3, 64, 10, rng_seed=0))
        # one value can never fill a k=3 bucket: all entries are the sentinel
        assert st.sample_mean == 3 * 64 - 1
        assert st.sample_variance == 0

    def test_estimator_agnostic(self):
        out = run_model(ModelSpec("independent", 10**5, 3, 16, 100), ["xi-hat", "xi3", "moment:0.25"])
        assert set(out) == {"xi-hat", "xi3", "moment:0.25"}
        assert out["moment:0.25"].estimator_id == "moment(0.25)"

    def test_agreement_trend(self):
        """|relative bias| of the exact model does not grow with theta (within noise)."""
        rel = []
        for theta in (10**3, 10**4, 10**5):
            st = run_exact(ModelSpec("exact", theta, 3, 16, 400, rng_seed=7))
            rel.append((abs(st.rel_bias), st.standard_error_of_mean / theta))
        for (b0, _), (b1, se1) in zip(rel, rel[1:]):
            assert b1 <= b0 + 3 * se1

    def test_small_bucket_sanity(self):
        st = run_exact(ModelSpec("exact", 10**4, 3, 16, 300, rng_seed=3))
        assert abs(st.rel_bias) <= 3 * st.standard_error_of_mean / st.theta + 0.01


class TestCoverage:
    def test_bound_values(self):
        assert coverage_bound(10**4, 10) == pytest.approx(1 - 20 * math.exp(-50), abs=0)
        assert coverage_bound(1, 10) < 0

    def test_vacuous_small_theta(self):
        rep = coverage_probability(ModelSpec("exact", 1, 3, 10, 50))
        assert rep.empirical_p == 0.0 and rep.bound < 0 and rep.satisfied()

    def test_single_bucket_always_covered(self):
        # k*m >= 3 is required, so k=3, m=1 stands in for the single-bucket case
        rep = coverage_probability(ModelSpec("exact", 3, 3, 1, 50))
        assert rep.empirical_p == 1.0

    def test_satisfied_band(self):
        assert CoverageReport(0.97, 1.0, 10**4).satisfied() is False
        assert CoverageReport(0.99, 1.0, 10**4).satisfied() is True


class TestNaive:
    def test_theta_one(self):
        r = naive_min_expectation(1, 10**5, rng_seed=2)
        assert abs(r.mean - 0.5) <= 3 * r.standard_error
        assert r.target == 0.5

    def test_brute_force_matches_beta_law(self):
        r = naive_min_expectation(50, 20_000, rng_seed=4)
        assert abs(r.mean - 1 / 51) <= 3 * r.standard_error

    def test_reciprocal_running_mean_keeps_growing(self):
        means = reciprocal_min_running_means(1, [10, 10**3, 10**5], rng_seed=0)
        assert len(means) == 3 and all(m > 1 for m in means)
        # E[1/U] is infinite; the running mean tracks roughly log(n)
        assert means[-1] > 5


def test_limit_law_small():
    d = limit_law_ks(10**5, 2, 4, 100, rng_seed=1)
    assert d < 1.63 / math.sqrt(400)
