#!/usr/bin/env python3
"""
Tests for the fractional pair and the generic evaluators
"""

import unittest

import numpy as np
from scipy.special import gamma

from subdecay.kernels import FractionalPair, eval_k, eval_l, eval_cumulative_l, kernel_rate
from subdecay.kernels.fractional import riesz_kernel
from subdecay.errors import DomainError


class TestFractionalPair(unittest.TestCase):
    """Test FractionalPair"""

    def setUp(self):
        self.pair = FractionalPair(0.5)

    def test_eval_k(self):
        """Test k(1) = 1/Gamma(1/2)"""
        self.assertAlmostEqual(eval_k(self.pair, 1.0), 0.5641895, places=6)

    def test_eval_l(self):
        """Test l(4) = g_{1/2}(4)"""
        self.assertAlmostEqual(eval_l(self.pair, 4.0), 0.2820948, places=6)

    def test_eval_cumulative_l(self):
        """Test (1*l)(1) = 1/Gamma(3/2) and (1*l)(0) = 0"""
        self.assertAlmostEqual(eval_cumulative_l(self.pair, 1.0), 1.1283792, places=6)
        self.assertEqual(eval_cumulative_l(self.pair, 0.0), 0.0)

    def test_cumulative_closed_form(self):
        """Test (1*l) against t^alpha/Gamma(1+alpha)"""
        for alpha in (0.1, 0.5, 0.9):
            pair = FractionalPair(alpha)
            t = np.geomspace(1e-6, 1e6, 37)
            expected = t ** alpha / gamma(1.0 + alpha)
            np.testing.assert_allclose(eval_cumulative_l(pair, t), expected, rtol=1e-10)

    def test_cumulative_k(self):
        """Test (1*k)(1) = 1/Gamma(3/2) and (1*k)(0) = 0"""
        np.testing.assert_allclose(self.pair.cumulative_k(np.array([0.0, 1.0, 4.0])),
                                   [0.0, 1.1283792, 2.2567583], rtol=1e-7)

    def test_double_cumulative_derivative(self):
        """Test that (1*1*l)' = (1*l)"""
        t = np.array([0.3, 1.0, 7.0])
        h = 1e-5 * t
        derivative = (self.pair.double_cumulative_l(t + h) - self.pair.double_cumulative_l(t - h)) / (2 * h)
        np.testing.assert_allclose(derivative, self.pair.cumulative_l(t), rtol=1e-8)

    def test_k_monotone(self):
        """Test that k is positive and nonincreasing"""
        values = eval_k(self.pair, np.geomspace(1e-8, 1e8, 200))
        self.assertTrue(np.all(values > 0))
        self.assertTrue(np.all(np.diff(values) <= 0))

    def test_kernel_rate(self):
        """Test that the fitted rate of (1*l) is alpha"""
        self.assertAlmostEqual(kernel_rate(FractionalPair(0.3), 1.0, 1e4), 0.3, places=10)

    def test_domain_errors(self):
        """Test order and time validation"""
        with self.assertRaises(DomainError):
            FractionalPair(1.0)
        with self.assertRaises(DomainError):
            eval_k(self.pair, 0.0)
        with self.assertRaises(DomainError):
            eval_l(self.pair, np.array([1.0, -1.0]))
        with self.assertRaises(DomainError):
            eval_cumulative_l(self.pair, -0.5)

    def test_to_from_dict(self):
        """Test serialization to a pair spec"""
        spec = self.pair.to_dict()
        self.assertEqual(spec, {'family': 'fractional', 'alpha': 0.5})
        self.assertEqual(FractionalPair.from_dict(spec).alpha, 0.5)


class TestRieszKernel(unittest.TestCase):
    """Test g_beta"""

    def test_values(self):
        """Test g_beta at t = 0 and t = 1"""
        values = riesz_kernel(2.5, np.array([0.0, 1.0]))
        self.assertEqual(values[0], 0.0)
        self.assertAlmostEqual(values[1], 1.0 / gamma(2.5), places=14)
        self.assertEqual(riesz_kernel(1.0, np.array([0.0]))[0], 1.0)


if __name__ == '__main__':
    unittest.main()
