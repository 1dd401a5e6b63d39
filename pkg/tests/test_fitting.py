"""
Tests for finite-size fits (services/fitting.py)
"""

import numpy as np
import pytest

from app.errors import FitError
from app.models.schemas import ScalingPoint
from app.services.fitting import (
    REFERENCE_COEFFICIENTS,
    composite_exponent,
    evaluate_model,
    fit_model,
    fit_scaling,
    numeric_exponent,
)

SIZES = [7, 8, 9, 10, 11]


def _reference(target):
    return REFERENCE_COEFFICIENTS[target]


class TestRecovery:
    """Noiseless data generated from known coefficients is fitted back exactly."""

    @pytest.mark.parametrize("target", ["g_mu_max", "g_sigma_max", "mu_max", "sigma_at_mu_max"])
    def test_reference_coefficients_recovered(self, target):
        model, coefficients = _reference(target)
        values = evaluate_model(model, coefficients, SIZES)
        result = fit_model(SIZES, values, model, target=target)
        for name, expected in coefficients.items():
            assert result.coefficients[name] == pytest.approx(expected, abs=1e-6)
        assert result.rss < 1e-18

    def test_rational_denominator_positive(self):
        model, coefficients = _reference("g_mu_max")
        result = fit_model(SIZES, evaluate_model(model, coefficients, SIZES), model)
        b, c = result.coefficients["b"], result.coefficients["c"]
        assert all(n**2 + b * n + c > 0 for n in SIZES)


class TestFailures:
    """Degenerate inputs raise FitError."""

    def test_too_few_points(self):
        with pytest.raises(FitError):
            fit_model([7, 8], [0.55, 0.54], "rational_shift")

    def test_sizes_must_exceed_shift(self):
        with pytest.raises(FitError):
            fit_model([5, 6, 7], [2.0, 2.1, 2.2], "quadratic_shifted")

    def test_unknown_model(self):
        with pytest.raises(FitError):
            fit_model(SIZES, np.ones(5), "cubic")

    def test_non_finite(self):
        with pytest.raises(FitError):
            fit_model([7, 8, 9], [2.0, np.nan, 2.1], "quadratic_shifted")

    def test_failure_reported_in_place(self):
        """Two sizes cannot fix three rational parameters; the other fits still run."""
        points = [
            ScalingPoint(
                n=n,
                epsilon=0.0,
                g_mu_max=0.56,
                g_mu_max_uncertainty=0.001,
                g_sigma_max=0.5,
                g_sigma_max_uncertainty=0.001,
                mu_max=2.0 + 0.02 * (n - 6),
                sigma_max=0.1,
                sigma_at_mu_max=0.1 + 0.01 * n,
            )
            for n in (7, 8)
        ]
        outcomes = {outcome.target: outcome for outcome in fit_scaling(points)}
        assert outcomes["g_mu_max"].error is not None
        assert outcomes["g_mu_max"].result is None
        assert outcomes["mu_max"].result is not None
        assert outcomes["sigma_at_mu_max"].result is not None


class TestExponent:
    """Large-n power of sigma_rel built from the fitted forms."""

    def test_leading_terms(self):
        _, mu = _reference("mu_max")
        _, sigma = _reference("sigma_at_mu_max")
        assert composite_exponent(mu, sigma) == -1.5

    def test_numeric_slope(self):
        _, mu = _reference("mu_max")
        _, sigma = _reference("sigma_at_mu_max")
        assert numeric_exponent(mu, sigma) == pytest.approx(-1.5, abs=1e-3)

    def test_linear_mu_gives_half_power(self):
        assert composite_exponent({"a": 0.1, "b": 0.0}, {"c": 0.0, "d": 0.1}) == -0.5

    def test_vanishing_width_has_no_exponent(self):
        assert composite_exponent({"a": 0.1, "b": 0.01}, {"c": 0.0, "d": 0.0}) is None
        assert numeric_exponent({"a": 0.1, "b": 0.01}, {"c": 0.0, "d": 0.0}) is None
