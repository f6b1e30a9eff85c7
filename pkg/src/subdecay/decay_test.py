#!/usr/bin/env python3
"""
Tests for decay sweeps and decay claims
"""

import math
import os
import shutil
import tempfile
import unittest

import numpy as np

from subdecay.decay import (
    DecaySeries, critical_dimension, decay_sweep, decay_target, fit_decay_exponent, gradient_critical_dimension,
    large_time_profile, log_band_check, lower_bound_ratio,
)
from subdecay.errors import DomainError, HypothesisError
from subdecay.field import DifferenceOfGaussians, GaussianDatum
from subdecay.kernels import FractionalPair, UltraslowPair
from subdecay.utils.grids import log_spaced


class TestFitDecay(unittest.TestCase):
    """Test power-law fits"""

    def test_exact_power_law(self):
        """Test 5 t^-0.5"""
        t = log_spaced(1.0, 1e6, 13)
        fit = fit_decay_exponent(t, 5.0 * t ** -0.5)
        self.assertAlmostEqual(fit.slope, -0.5, places=9)
        self.assertAlmostEqual(math.exp(fit.intercept), 5.0, places=6)
        self.assertEqual(fit.points, 13)

    def test_perturbed_power_law(self):
        """Test t^-0.3 (1 + 0.01 sin log t)"""
        t = log_spaced(1.0, 1e6, 61)
        fit = fit_decay_exponent(t, t ** -0.3 * (1.0 + 0.01 * np.sin(np.log(t))))
        self.assertAlmostEqual(fit.slope, -0.3, delta=0.01)
        self.assertLess(fit.max_residual, 0.02)

    def test_logarithmic_decay(self):
        """Test that 1/log t has a shallow slope on [1e3, 1e6]"""
        t = log_spaced(1e3, 1e6, 16)
        fit = fit_decay_exponent(t, 1.0 / np.log(t), window=(1e3, 1e6))
        self.assertGreaterEqual(fit.slope, -0.2)
        self.assertLess(fit.slope, 0.0)

    def test_invalid_series(self):
        """Test short windows and non-positive values"""
        t = log_spaced(1.0, 1e3, 10)
        with self.assertRaises(DomainError):
            fit_decay_exponent(t[:4], t[:4] ** -1.0)
        values = t ** -1.0
        values[3] = 0.0
        with self.assertRaises(DomainError):
            fit_decay_exponent(t, values)


class TestTargets(unittest.TestCase):
    """Test critical dimensions and target exponents"""

    def test_critical_dimension(self):
        """Test 2r/(r-1)"""
        self.assertEqual(critical_dimension(2.0), 4.0)
        self.assertEqual(critical_dimension(3.0), 3.0)
        self.assertAlmostEqual(critical_dimension(11.0), 2.2)
        self.assertEqual(critical_dimension(math.inf), 2.0)
        with self.assertRaises(DomainError):
            critical_dimension(1.0)

    def test_gradient_critical_dimension(self):
        """Test r/(r-1)"""
        self.assertEqual(gradient_critical_dimension(2.0), 2.0)
        with self.assertRaises(DomainError):
            gradient_critical_dimension(0.5)

    def test_targets(self):
        """Test subcritical and saturated targets"""
        self.assertAlmostEqual(decay_target(3, 2.0, 0.5), -0.375)
        self.assertAlmostEqual(decay_target(5, 2.0, 0.5), -0.5)
        self.assertAlmostEqual(decay_target(4, 2.0, 0.5), -0.5)
        self.assertAlmostEqual(decay_target(1, 2.0, 0.5, gradient=True), -0.375)
        self.assertAlmostEqual(decay_target(3, 2.0, 0.5, gradient=True), -0.5)


class TestDecaySweep(unittest.TestCase):
    """Test sweeps of the fractional pair"""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.pair = FractionalPair(0.5)
        self.times = log_spaced(1.0, 1e6, 25)

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_subcritical(self):
        """Test slope -alpha d/4 for r = 2 in d = 3"""
        result = decay_sweep(self.pair, 3, 2.0, self.times)
        self.assertTrue(result.passed, result.to_dict())
        self.assertAlmostEqual(result.fits['L2'].slope, -0.375, delta=0.05)

    def test_supercritical(self):
        """Test saturation at -alpha for r = 2 in d = 5"""
        result = decay_sweep(self.pair, 5, 2.0, self.times)
        self.assertTrue(result.passed, result.to_dict())
        self.assertAlmostEqual(result.fits['L2'].slope, -0.5, delta=0.05)

    def test_critical_weak_norm(self):
        """Test that d = 4 judges the weak L2 norm with target -alpha"""
        times = log_spaced(1e2, 1e6, 21)
        result = decay_sweep(self.pair, 4, 2.0, times)
        self.assertIn('weak_L2', result.fits)
        self.assertEqual([r.claim for r in result.reports], ["decay-weak"])
        self.assertTrue(result.passed, result.to_dict())

    def test_gradient(self):
        """Test the gradient slope -alpha (1/2 + d/4) in d = 1"""
        result = decay_sweep(self.pair, 1, 2.0, self.times, gradient=True)
        self.assertTrue(result.passed, result.to_dict())
        self.assertEqual(result.reports[0].claim, "grad-decay-lr")

    def test_psi_rate(self):
        """Test that a rate function replaces the slope of (1*l)"""
        result = decay_sweep(self.pair, 3, 2.0, self.times, psi=lambda t: np.sqrt(t))
        self.assertAlmostEqual(result.reports[0].measured['rate'], 0.5, places=9)

    def test_dimension_mismatch(self):
        """Test that the datum must live in the sweep dimension"""
        with self.assertRaises(DomainError):
            decay_sweep(self.pair, 3, 2.0, self.times, datum=GaussianDatum(2))

    def test_series_csv(self):
        """Test the `t,norm` export"""
        series = DecaySeries("L2", [1.0, 2.0], [0.5, 0.25])
        path = series.write_csv(os.path.join(self.temp_dir, "series.csv"))
        with open(path) as f:
            self.assertEqual(f.readline().strip(), "t,norm")


class TestLowerBounds(unittest.TestCase):
    """Test lower bounds and logarithmic bands"""

    def test_fractional_lower_bound(self):
        """Test |u|_2 / k^(d/4) bounded below in d = 2"""
        report = lower_bound_ratio(FractionalPair(0.5), 2, GaussianDatum(2), log_spaced(1.0, 1e4, 17))
        self.assertTrue(report.passed, report.measured)
        self.assertGreater(report.measured['infimum'], 0.0)

    def test_zero_mean_datum(self):
        """Test that a zero-mean datum violates the hypothesis"""
        datum = DifferenceOfGaussians(2)
        times = log_spaced(1.0, 1e3, 7)
        with self.assertRaises(HypothesisError) as cm:
            lower_bound_ratio(FractionalPair(0.5), 2, datum, times)
        self.assertEqual(cm.exception.hypothesis, "nonzero-mean")
        report = lower_bound_ratio(FractionalPair(0.5), 2, datum, times, on_violation="report")
        self.assertTrue(report.passed)
        self.assertFalse(report.measured['hypothesis_met'])

    def test_ultraslow_band(self):
        """Test |u|_2 (log t)^(1/4) inside a band in d = 1"""
        report = log_band_check(UltraslowPair(), 1, GaussianDatum(1), log_spaced(1e2, 1e8, 13))
        self.assertTrue(report.passed, report.measured)
        self.assertLessEqual(report.measured['ratio'], 4.0)

    def test_band_needs_large_times(self):
        """Test that t <= 1 is rejected"""
        with self.assertRaises(DomainError):
            log_band_check(UltraslowPair(), 1, GaussianDatum(1), [0.5, 10.0])


class TestLargeTimeProfile(unittest.TestCase):
    """Test u(t) - M Z(t)"""

    def test_centered_gaussian(self):
        """Test the radial path with a centered Gaussian in d = 1"""
        report = large_time_profile(0.5, 1, 1.0, GaussianDatum(1), log_spaced(10.0, 1e4, 10))
        self.assertTrue(report.passed, report.measured)
        self.assertTrue(report.measured['decreasing'])

    def test_shifted_gaussian(self):
        """Test the grid path with a shifted Gaussian in d = 1"""
        datum = GaussianDatum(1, center=[1.0])
        report = large_time_profile(0.5, 1, 1.5, datum, log_spaced(10.0, 1e4, 8))
        self.assertTrue(report.passed, report.measured)

    def test_zero_mass(self):
        """Test that M = 0 data decay at the improved rate"""
        report = large_time_profile(0.5, 1, 1.0, DifferenceOfGaussians(1), log_spaced(10.0, 1e4, 8))
        self.assertEqual(report.measured['mass'], 0.0)
        self.assertTrue(report.passed, report.measured)

    def test_exponent_range(self):
        """Test that p >= d/(d-1) is rejected"""
        with self.assertRaises(DomainError):
            large_time_profile(0.5, 2, 2.0, GaussianDatum(2), [10.0, 100.0])


if __name__ == '__main__':
    unittest.main()
