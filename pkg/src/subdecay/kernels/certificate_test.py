#!/usr/bin/env python3
"""
Tests for the PC certificate
"""

import unittest

import numpy as np

from subdecay.kernels import FractionalPair, SwitchedUltraslowPair, UltraslowPair, heat_limit_pair, verify_pair
from subdecay.kernels.certificate import convolve_k_l
from subdecay.utils.grids import graded_grid
from subdecay.errors import DomainError


class TestVerifyPair(unittest.TestCase):
    """Test verify_pair"""

    def test_fractional_closed_form(self):
        """Test g_{1-alpha} * g_alpha = 1 on a 512-point graded grid"""
        certificate = verify_pair(FractionalPair(0.5), graded_grid(10.0, 512))
        self.assertTrue(certificate.passed)
        self.assertLessEqual(certificate.max_deviation, 1e-6)
        self.assertEqual(certificate.tolerance, 1e-6)
        self.assertEqual(certificate.samples, 511)

    def test_switched_ultraslow(self):
        """Test the switched pair on [0.01, 100]"""
        certificate = verify_pair(SwitchedUltraslowPair(), np.geomspace(0.01, 100.0, 25), tolerance=1e-3)
        self.assertTrue(certificate.passed, certificate.to_dict())

    def test_switched_ultraslow_dense_grid(self):
        """Test the switched pair at 200 times, where l ~ 1/(t log^2 t) is singular at 0"""
        certificate = verify_pair(SwitchedUltraslowPair(), np.geomspace(0.01, 100.0, 200),
                                  tolerance=1e-3, threads=4)
        self.assertTrue(certificate.passed, certificate.to_dict())
        self.assertEqual(certificate.samples, 200)
        self.assertLess(certificate.max_deviation, 1e-4)

    def test_ultraslow_finite_near_diagonal(self):
        """Test that k is never evaluated where t - s rounds to 0"""
        pair = UltraslowPair()
        for t in np.geomspace(1e-3, 1e3, 7):
            value, _ = convolve_k_l(pair, t)
            self.assertTrue(np.isfinite(value), f"t={t}")
            self.assertAlmostEqual(value, 1.0, delta=1e-4, msg=f"t={t}")

    def test_ultraslow_parallel(self):
        """Test that threads give the same certificate"""
        grid = np.geomspace(0.1, 10.0, 8)
        serial = verify_pair(UltraslowPair(), grid)
        threaded = verify_pair(UltraslowPair(), grid, threads=4)
        self.assertEqual(serial.max_deviation, threaded.max_deviation)
        self.assertTrue(serial.passed, serial.to_dict())

    def test_convolution_value(self):
        """Test a single convolution"""
        value, _ = convolve_k_l(FractionalPair(0.3), 2.0)
        self.assertAlmostEqual(value, 1.0, places=8)

    def test_convolution_heat_limit(self):
        """Test that the point mass of k alone gives k*l = 1"""
        value, _ = convolve_k_l(heat_limit_pair(), 3.0)
        self.assertAlmostEqual(value, 1.0, places=12)

    def test_report_keys(self):
        """Test the report layout"""
        report = verify_pair(FractionalPair(0.5), np.linspace(0.0, 1.0, 5)).to_dict()
        for key in ('claim', 'pair', 'passed', 'max_deviation', 'tolerance',
                    'monotonicity_violations', 'sign_violations'):
            self.assertIn(key, report)

    def test_invalid_grid(self):
        """Test that a non-increasing grid is rejected"""
        with self.assertRaises(DomainError):
            verify_pair(FractionalPair(0.5), [0.0, 1.0, 0.5])


if __name__ == '__main__':
    unittest.main()
