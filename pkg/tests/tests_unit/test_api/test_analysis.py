import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cognite.kinetics import KineticsClient
from cognite.kinetics._api.analysis import calculus_bound, closed_form_argmax, decay_integral
from cognite.kinetics.data_classes import BasicDecayReport, DecayFit
from cognite.kinetics.exceptions import InvalidArgument

ANALYSIS_API = KineticsClient(max_workers=2).analysis


class TestFitDecayExponent:
    def test_exact_power_law(self):
        t = np.linspace(0, 100, 101)
        fit = ANALYSIS_API.fit_decay_exponent(t, 3.0 * (1 + t) ** -2)
        assert isinstance(fit, DecayFit)
        assert 2.0 == pytest.approx(fit.exponent, rel=1e-10)
        assert fit.residual == pytest.approx(0.0, abs=1e-10)
        assert 91 == fit.n_points
        assert (10.0, math.inf) == fit.window

    def test_noise_widens_the_interval(self):
        rng = np.random.default_rng(0)
        t = np.linspace(0, 200, 201)
        fit = ANALYSIS_API.fit_decay_exponent(t, (1 + t) ** -0.75 * np.exp(0.05 * rng.standard_normal(201)))
        assert fit.half_width > 0
        assert abs(fit.exponent - 0.75) <= 3 * fit.half_width

    def test_too_few_points(self):
        t = np.linspace(0, 10, 11)
        with pytest.raises(InvalidArgument) as e:
            ANALYSIS_API.fit_decay_exponent(t, (1 + t) ** -1.0, window=(5.0, 10.0))
        assert "window" == e.value.argument

    def test_non_positive_value(self):
        t = np.linspace(0, 100, 101)
        values = (1 + t) ** -1.0
        values[50] = 0.0
        with pytest.raises(InvalidArgument):
            ANALYSIS_API.fit_decay_exponent(t, values)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgument):
            ANALYSIS_API.fit_decay_exponent(np.arange(20.0), np.ones(19))


class TestDecayIntegral:
    def test_no_decay(self):
        assert 7.5 == decay_integral(0.0, 0.0, 7.5)

    def test_zero_time(self):
        assert 0.0 == decay_integral(2.0, 1.0, 0.0)

    def test_closed_form(self):
        t = 15.0
        assert 2.0 * (math.sqrt(1.0 + t) - 1.0) == pytest.approx(decay_integral(0.0, 0.5, t), rel=1e-10)

    @settings(max_examples=30)
    @given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.1, 50.0))
    def test_symmetric_in_the_exponents(self, lam, mu, t):
        assert decay_integral(lam, mu, t) == pytest.approx(decay_integral(mu, lam, t), rel=1e-8)


class TestBasicDecayCheck:
    @pytest.mark.parametrize("lam, mu, rho", [(2.0, 1.0, 1.0), (1.0, 1.0, 1.0), (3.0, 0.5, 0.5), (0.0, 0.0, -1.0)])
    def test_bounded(self, lam, mu, rho):
        report = ANALYSIS_API.basic_decay_check(lam, mu, T=1000.0, n_samples=60)
        assert isinstance(report, BasicDecayReport)
        assert rho == report.rho
        assert report.bounded
        assert report.log_factor == (lam == 1)

    def test_log_factor_is_needed(self):
        report = ANALYSIS_API.basic_decay_check(1.0, 1.0, T=1000.0, n_samples=60)
        assert report.unweighted_growth > 0.01

    @pytest.mark.parametrize("lam, mu, T", [(1.0, -0.5, 100.0), (0.5, 1.0, 100.0), (2.0, 1.0, 1.0)])
    def test_invalid(self, lam, mu, T):
        with pytest.raises(InvalidArgument):
            ANALYSIS_API.basic_decay_check(lam, mu, T=T)


class TestCalculusInequality:
    def test_bound(self):
        assert 4.0 / math.e == pytest.approx(float(calculus_bound(1.0, 2.0)))
        assert 1.0 == float(calculus_bound(2.0, 1.0))
        assert 1.0 == float(calculus_bound(0.0, 0.0))
        assert math.isinf(float(calculus_bound(0.0, 1.0)))

    @pytest.mark.parametrize("a, k, y_star", [(1.0, 2.0, 1.0), (2.0, 1.0, 0.0), (0.5, 0.0, 0.0), (0.0, 1.0, math.inf)])
    def test_argmax(self, a, k, y_star):
        assert y_star == pytest.approx(closed_form_argmax(a, k))

    def test_check(self):
        report = ANALYSIS_API.calc_inequality_check(1.0, 2.0)
        assert report.numeric_max == pytest.approx(report.bound, rel=1e-12)
        assert 1.0 == pytest.approx(report.argmax)
        assert report.violation <= 1e-12

    def test_grid(self):
        assert ANALYSIS_API.calc_inequality_grid([0.1, 0.5, 1.0, 2.0, 5.0], [0.0, 0.5, 1.0, 2.0, 4.0]) <= 1e-12

    def test_negative(self):
        with pytest.raises(InvalidArgument):
            ANALYSIS_API.calc_inequality_check(-1.0, 1.0)
