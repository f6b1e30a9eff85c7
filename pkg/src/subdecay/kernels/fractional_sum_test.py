#!/usr/bin/env python3
"""
Tests for the sum-of-fractional-derivatives pair
"""

import unittest
from unittest import mock

import numpy as np

from subdecay.kernels import FractionalPair, FractionalSumPair, eval_l, eval_cumulative_l, kernel_rate, verify_pair
from subdecay.errors import DomainError, ExtrapolationError, SingularKernelError


class TestFractionalSumPair(unittest.TestCase):
    """Test FractionalSumPair"""

    @classmethod
    def setUpClass(cls):
        cls.pair = FractionalSumPair([0.3, 0.7], [1.0, 1.0], horizon=100.0, points=2000)

    def test_discrete_round_trip(self):
        """Test that the discrete convolution k*l is 1 on [0.01, 10]"""
        self.assertLess(self.pair.discrete_residual(0.01, 10.0), 1e-4)

    def test_continuous_certificate(self):
        """Test the quadrature certificate on [0.01, 10]"""
        certificate = verify_pair(self.pair, np.geomspace(0.01, 10.0, 30), tolerance=1e-3)
        self.assertTrue(certificate.passed, certificate.to_dict())

    def test_resolvent_shape(self):
        """Test that l is positive and decreasing"""
        values = eval_l(self.pair, np.geomspace(1e-6, 100.0, 300))
        self.assertTrue(np.all(values > 0))
        self.assertTrue(np.all(np.diff(values) < 0))

    def test_single_order_matches_fractional(self):
        """Test that one order reproduces the fractional resolvent"""
        single = FractionalSumPair([0.5], [1.0], horizon=100.0, points=2000)
        exact = FractionalPair(0.5)
        t = np.geomspace(0.01, 10.0, 25)
        np.testing.assert_allclose(eval_l(single, t), exact.l(t), rtol=2e-2)
        np.testing.assert_allclose(eval_cumulative_l(single, t), exact.cumulative_l(t), rtol=2e-2)

    def test_default_log_mesh(self):
        """Test that the default geometric mesh solves the discrete equation down to small times"""
        self.assertEqual(self.pair.to_dict()['mesh'], 'log')
        self.assertLess(self.pair.discrete_residual(1e-6, 1e-2), 1e-10)

    def test_graded_mesh(self):
        """Test the (i/N)^2 graded deconvolution mesh"""
        graded = FractionalSumPair([0.3, 0.7], [1.0, 1.0], horizon=10.0, points=1500, mesh="graded")
        self.assertLess(graded.discrete_residual(0.01, 10.0), 1e-4)
        self.assertEqual(graded.to_dict()['mesh'], 'graded')

    def test_cumulative_consistency(self):
        """Test that (1*1*l)' = (1*l) for the piecewise representation"""
        t = np.array([0.05, 0.7, 9.0])
        h = 1e-6 * t
        derivative = (self.pair.double_cumulative_l(t + h) - self.pair.double_cumulative_l(t - h)) / (2 * h)
        np.testing.assert_allclose(derivative, self.pair.cumulative_l(t), rtol=1e-6)
        self.assertEqual(eval_cumulative_l(self.pair, 0.0), 0.0)

    def test_lower_order_dominates(self):
        """Test that (1*l) grows like t^alpha_1 for large t"""
        pair = FractionalSumPair([0.3, 0.7], [1.0, 1.0], horizon=1e6, points=3000)
        self.assertAlmostEqual(kernel_rate(pair, 1e3, 1e5), 0.3, delta=0.03)

    def test_horizon(self):
        """Test that queries past the horizon raise"""
        with self.assertRaises(ExtrapolationError):
            eval_l(self.pair, 200.0)

    def test_singular_pivot(self):
        """Test that a vanishing pivot raises SingularKernelError"""
        with mock.patch.object(FractionalSumPair, 'cumulative_k', side_effect=lambda t: np.zeros_like(t)):
            with self.assertRaises(SingularKernelError):
                FractionalSumPair([0.3, 0.7], [1.0, 1.0], horizon=10.0, points=50)

    def test_invalid_parameters(self):
        """Test validation of orders, weights and mesh"""
        with self.assertRaises(DomainError):
            FractionalSumPair([0.7, 0.3], [1.0, 1.0])
        with self.assertRaises(DomainError):
            FractionalSumPair([0.3, 0.7], [1.0, -1.0])
        with self.assertRaises(DomainError):
            FractionalSumPair([0.3], [1.0, 1.0])
        with self.assertRaises(DomainError):
            FractionalSumPair([0.3], [1.0], mesh="uniform")

    def test_to_from_dict(self):
        """Test serialization"""
        spec = self.pair.to_dict()
        self.assertEqual(spec['family'], 'fractional-sum')
        self.assertEqual(spec['alphas'], [0.3, 0.7])
        self.assertEqual(spec['points'], 2000)


if __name__ == '__main__':
    unittest.main()
