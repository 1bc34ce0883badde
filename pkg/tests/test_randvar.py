import math

import numpy as np
import pytest
from scipy import stats

from fracevo.errors import ConfigError, DomainError
from fracevo.randvar import (
    GenericCMLaw,
    MittagLefflerLaw,
    PointMass,
    PowerLaw,
    PrabhakarLaw,
    empirical_laplace,
    make_stream,
    mittag_leffler_power,
    positive_stable,
    sample_ml,
    sample_power_law,
    sample_prabhakar,
    spawn_streams,
)
from fracevo.specfun import MLParams, mittag_leffler, ml_one_param

LAMBDAS = np.array([0.1, 0.5, 1.0, 2.0, 5.0, 10.0])


def z_scores(samples, lambdas, exact):
    means, se = empirical_laplace(samples, lambdas)
    return np.abs(means - exact) / se


def test_streams_are_reproducible_and_distinct():
    a = make_stream(11).uniform(size=5)
    b = make_stream(11).uniform(size=5)
    c, d = spawn_streams(11, 2)
    assert np.array_equal(a, b)
    assert not np.array_equal(c.uniform(size=5), d.uniform(size=5))


def test_positive_stable_transform():
    s = positive_stable(0.6, make_stream(1), 200_000)
    assert np.all(z_scores(s, LAMBDAS, np.exp(-LAMBDAS**0.6)) < 4.5)


class TestMittagLeffler:
    def test_beta_one_is_point_mass(self):
        assert np.all(sample_ml(1.0, make_stream(0), 100) == 1.0)

    def test_transform(self):
        a = sample_ml(0.5, make_stream(2), 1_000_000)
        assert np.all(a > 0)
        lam = np.array([0.5, 1.0, 2.0, 5.0])
        assert np.all(z_scores(a, lam, ml_one_param(0.5, -lam)) < 4)

    def test_mean(self):
        # E[A_beta] = 1 / Gamma(1 + beta)
        a = sample_ml(0.7, make_stream(3), 400_000)
        assert abs(a.mean() - 1 / math.gamma(1.7)) < 4 * a.std() / math.sqrt(a.size)

    def test_invalid(self):
        with pytest.raises(ConfigError):
            MittagLefflerLaw(1.2)
        with pytest.raises(DomainError):
            sample_ml(0.0, make_stream(0))


class TestPrabhakar:
    def test_reduces_to_mittag_leffler(self):
        a = sample_prabhakar(MLParams(0.6, 1.0, 1.0), make_stream(4), 100_000)
        b = sample_ml(0.6, make_stream(5), 100_000)
        assert stats.ks_2samp(a, b).pvalue > 1e-3

    def test_exponential_point_mass(self):
        assert np.all(sample_prabhakar(MLParams(1.0, 1.0, 1.0), make_stream(0), 50) == 1.0)

    def test_beta_case(self):
        a = sample_prabhakar(MLParams(1.0, 2.5, 1.0), make_stream(6), 100_000)
        assert stats.kstest(a, stats.beta(1.0, 1.5).cdf).pvalue > 1e-3

    @pytest.mark.parametrize("params", [(0.6, 1.2, 0.8), (0.5, 1.0, 2.0), (0.8, 0.9, 0.5)])
    def test_transform(self, params):
        p = MLParams(*params)
        a = sample_prabhakar(p, make_stream(7), 200_000)
        exact = math.gamma(p.lambda2) * mittag_leffler(p, -LAMBDAS)
        assert np.all(z_scores(a, LAMBDAS, exact) < 4.5)

    def test_mellin_matches_samples(self):
        law = PrabhakarLaw(MLParams(0.6, 1.2, 0.8))
        a = law.sample(make_stream(8), 200_000)
        u = np.array([0.3, 1.0, 2.0])
        emp = np.exp(1j * np.outer(u, np.log(a))).mean(axis=1)
        assert np.allclose(emp, law.mellin(u), atol=4 / math.sqrt(a.size) * 1.5)

    def test_table_is_a_distribution(self):
        tab = PrabhakarLaw(MLParams(0.6, 1.2, 0.8)).table
        assert np.all(np.diff(tab.cdf) >= 0)
        assert tab.cdf[0] == pytest.approx(0.0, abs=1e-4) and tab.cdf[-1] == pytest.approx(1.0, abs=1e-4)

    def test_not_completely_monotone(self):
        with pytest.raises(ConfigError):
            PrabhakarLaw(MLParams(0.5, 1.0, 3.0))
        with pytest.raises(ConfigError):
            PrabhakarLaw(MLParams(1.2, 1.0, 1.0))


class TestPowerLaw:
    def test_identity_exponent(self):
        base = MittagLefflerLaw(0.5)
        a = sample_power_law(base, 1.0, make_stream(9), 1000)
        b = base.sample(make_stream(9), 1000)
        assert np.array_equal(a, b)

    def test_point_mass_gives_stable(self):
        a = sample_power_law(PointMass(1.0), 0.5, make_stream(10), 200_000)
        assert np.all(z_scores(a, LAMBDAS, np.exp(-np.sqrt(LAMBDAS))) < 4.5)

    @pytest.mark.parametrize("beta,gamma", [(0.5, 0.7), (0.8, 0.3)])
    def test_mittag_leffler_power(self, beta, gamma):
        law = mittag_leffler_power(beta, gamma)
        a = law.sample(make_stream(11), 200_000)
        assert np.all(z_scores(a, LAMBDAS, ml_one_param(beta, -LAMBDAS**gamma)) < 4.5)
        assert np.allclose(law.laplace(LAMBDAS), ml_one_param(beta, -LAMBDAS**gamma))

    def test_invalid(self):
        with pytest.raises(ConfigError):
            PowerLaw(PointMass(), 1.5)


def test_generic_law_recovers_exponential():
    law = GenericCMLaw(lambda s: 1.0 / (1.0 + s), x_min=1e-6, x_max=60.0, n_points=400)
    a = law.sample(make_stream(12), 50_000)
    assert stats.kstest(a, stats.expon().cdf).pvalue > 1e-3


class TestEmpiricalLaplace:
    def test_constant_samples(self):
        means, se = empirical_laplace([1.0, 1.0, 1.0], [0.7])
        assert means[0] == pytest.approx(math.exp(-0.7), rel=1e-15)
        assert se[0] == 0.0

    def test_empty_grid(self):
        means, se = empirical_laplace([1.0, 2.0], [])
        assert means.size == 0 and se.size == 0

    def test_mittag_leffler_samples(self):
        means, _ = empirical_laplace(sample_ml(0.5, make_stream(13), 100_000), [1.0])
        assert means[0] == pytest.approx(ml_one_param(0.5, -1.0), abs=0.005)
