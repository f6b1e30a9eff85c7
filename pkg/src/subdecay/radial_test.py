#!/usr/bin/env python3
"""
Tests for radial inversion and radial norms
"""

import math
import os
import shutil
import tempfile
import unittest

import numpy as np
from scipy.special import jn_zeros

from subdecay.errors import DomainError, ProfileError, TruncationError
from subdecay.radial import (
    HankelQuadrature, RadialProfile, bessel_potential, bessel_zeros, first_zero, radial_integral, radial_lp_norm,
    radial_weak_lp_quasinorm, resolved_count,
)
from subdecay.utils.grids import unit_ball_volume


def heat_kernel(d, t, r):
    return (4.0 * math.pi * t) ** (-0.5 * d) * np.exp(-r ** 2 / (4.0 * t))


class TestHankelQuadrature(unittest.TestCase):
    """Test the radial inverse Fourier transform"""

    def _check_heat_kernel(self, d):
        quadrature = HankelQuadrature(d, rho_min=1e-8)
        radii = np.geomspace(0.05, 6.0, 15)
        profile = quadrature.profile(lambda rho: np.exp(-rho ** 2), radii, t=1.0, label="G")
        np.testing.assert_allclose(profile.values, heat_kernel(d, 1.0, radii), rtol=1e-8)
        self.assertEqual(profile.label, "G")
        self.assertEqual(profile.t, 1.0)

    def test_heat_kernel_line(self):
        """Test that exp(-rho^2) inverts to the heat kernel at t = 1 in d = 1"""
        self._check_heat_kernel(1)

    def test_heat_kernel_space(self):
        """Test the same inversion in d = 3"""
        self._check_heat_kernel(3)

    def test_heat_kernel_high_dimension(self):
        """Test the same inversion in d = 6"""
        self._check_heat_kernel(6)

    def test_diagnostics(self):
        """Test that transform reports its panel count"""
        quadrature = HankelQuadrature(2, rho_min=1e-8)
        value, info = quadrature.transform(lambda rho: np.exp(-rho ** 2), 1.0)
        self.assertAlmostEqual(value, heat_kernel(2, 1.0, 1.0), places=9)
        self.assertIn('panels', info)
        self.assertIn('tail_estimate', info)
        self.assertGreater(info['noise_floor'], 0.0)
        self.assertLess(info['noise_floor'], 1e-12 * value)

    def test_far_field_relative_accuracy(self):
        """Test that small values far out keep their relative accuracy"""
        quadrature = HankelQuadrature(3, rho_min=1e-8)
        for r in (6.0, 8.0):
            value, _ = quadrature.transform(lambda rho: np.exp(-rho ** 2), r)
            self.assertAlmostEqual(value / heat_kernel(3, 1.0, r), 1.0, places=7, msg=f"r={r}")

    def test_trimmed_profile(self):
        """Test that radii where the heat kernel underflows the rounding floor are dropped"""
        quadrature = HankelQuadrature(3, rho_min=1e-8)
        radii = np.geomspace(0.1, 60.0, 30)
        profile = quadrature.profile(lambda rho: np.exp(-rho ** 2), radii, t=1.0, trim=True)
        self.assertLess(profile.radii[-1], 30.0)
        self.assertTrue(np.all(profile.values > 0))
        kept = profile.radii <= 8.0
        np.testing.assert_allclose(profile.values[kept], heat_kernel(3, 1.0, profile.radii[kept]), rtol=1e-7)
        self.assertEqual(quadrature.profile(lambda rho: np.exp(-rho ** 2), radii[:5]).radii.size, 5)

    def test_resolved_count(self):
        """Test that only trailing values below the floor are dropped"""
        floors = np.full(5, 1e-15)
        self.assertEqual(resolved_count(np.array([1.0, 0.5, 0.2, 1e-20, -1e-20]), floors), 3)
        self.assertEqual(resolved_count(np.array([1.0, 1e-20, 0.5, 1e-20, 0.0]), floors), 3)
        self.assertEqual(resolved_count(np.array([1.0, 0.5, 0.2, 0.1, 1e-2]), floors), 5)
        self.assertEqual(resolved_count(np.array([1.0, 1e-20, 0.0, 0.0, 0.0]), floors), 3)

    def test_unsettled_tail(self):
        """Test that a growing spectrum exhausts the panel budget"""
        quadrature = HankelQuadrature(3, rho_min=1e-8, max_panels=64)
        with self.assertRaises(TruncationError) as cm:
            quadrature.transform(lambda rho: np.exp(rho), 1.0)
        self.assertGreaterEqual(cm.exception.diagnostics['panels'], 64)

    def test_invalid_arguments(self):
        """Test rejected radii and construction parameters"""
        with self.assertRaises(DomainError):
            HankelQuadrature(0, rho_min=1e-8)
        with self.assertRaises(DomainError):
            HankelQuadrature(2, rho_min=0.0)
        with self.assertRaises(DomainError):
            HankelQuadrature(2, rho_min=1e-8).transform(lambda rho: np.exp(-rho ** 2), 0.0)


class TestBesselPotential(unittest.TestCase):
    """Test the inverse transform of 1/(a^2 + |xi|^2)"""

    def test_three_dimensions(self):
        """Test the Yukawa potential exp(-a r)/(4 pi r)"""
        r = np.geomspace(0.01, 10.0, 20)
        np.testing.assert_allclose(bessel_potential(3, 2.0, r), np.exp(-2.0 * r) / (4.0 * math.pi * r), rtol=1e-12)

    def test_one_dimension(self):
        """Test exp(-a r)/(2a) on the line"""
        r = np.linspace(0.1, 5.0, 10)
        np.testing.assert_allclose(bessel_potential(1, 0.5, r), np.exp(-0.5 * r) / 1.0, rtol=1e-12)

    def test_nonpositive_rate(self):
        """Test that a <= 0 is rejected"""
        with self.assertRaises(DomainError):
            bessel_potential(3, 0.0, np.ones(2))

    def test_first_zero(self):
        """Test the first zero against J_0 and J_(1/2)"""
        self.assertAlmostEqual(first_zero(0.0), 2.404825557695773, places=10)
        self.assertAlmostEqual(first_zero(0.5), math.pi, places=10)


class TestBesselZeros(unittest.TestCase):
    """Test the panel edges of the Hankel tail"""

    def test_integer_order(self):
        """Test against jn_zeros across several scan windows"""
        np.testing.assert_allclose(bessel_zeros(0.0, 0.0, 200), jn_zeros(0, 200), rtol=1e-12)
        np.testing.assert_allclose(bessel_zeros(2.0, 0.0, 70), jn_zeros(2, 70), rtol=1e-12)

    def test_after(self):
        """Test that zeros start strictly above the given point"""
        zeros = jn_zeros(1, 10)
        np.testing.assert_allclose(bessel_zeros(1.0, 10.0, 3), zeros[zeros > 10.0][:3], rtol=1e-12)
        np.testing.assert_allclose(bessel_zeros(1.0, zeros[4], 2), zeros[5:7], rtol=1e-12)

    def test_half_order(self):
        """Test J_(-1/2), whose zeros are (m - 1/2) pi"""
        np.testing.assert_allclose(bessel_zeros(-0.5, 0.0, 5), (np.arange(1, 6) - 0.5) * math.pi, rtol=1e-12)

    def test_order_range(self):
        """Test that orders below -1/2 are rejected"""
        with self.assertRaises(DomainError):
            bessel_zeros(-1.0, 0.0, 3)


class TestRadialNorms(unittest.TestCase):
    """Test integrals and norms of radial profiles"""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_gaussian_mass(self):
        """Test that a unit-mass Gaussian integrates to 1 in d = 2 and d = 5"""
        radii = np.geomspace(1e-4, 14.0, 600)
        for d in (2, 5):
            profile = RadialProfile(d, radii, heat_kernel(d, 0.5, radii))
            self.assertAlmostEqual(radial_integral(profile), 1.0, places=6)

    def test_lp_norms(self):
        """Test |G|_2^2 = (8 pi t)^(-d/2) and the sup norm"""
        radii = np.geomspace(1e-4, 14.0, 600)
        profile = RadialProfile(3, radii, heat_kernel(3, 0.5, radii))
        self.assertAlmostEqual(radial_lp_norm(profile, 2) ** 2, (4.0 * math.pi) ** -1.5, places=7)
        self.assertEqual(radial_lp_norm(profile, np.inf), profile.values[0])
        with self.assertRaises(DomainError):
            radial_lp_norm(profile, 0.5)

    def test_weak_norm_of_indicator(self):
        """Test that the indicator of the unit ball has quasinorm V_d^(1/r)"""
        radii = np.arange(1, 201) * 0.01
        values = (radii <= 1.0).astype(float)
        profile = RadialProfile(3, radii, values)
        self.assertAlmostEqual(radial_weak_lp_quasinorm(profile, 1.5), unit_ball_volume(3) ** (1.0 / 1.5), places=10)

    def test_weak_norm_of_power(self):
        """Test that |x|^(-d/r) has quasinorm V_d^(1/r) on every ball"""
        d, r = 4, 2.0
        radii = np.geomspace(1e-3, 1e3, 200)
        profile = RadialProfile(d, radii, radii ** (-d / r))
        self.assertAlmostEqual(radial_weak_lp_quasinorm(profile, r), unit_ball_volume(d) ** 0.5, places=10)

    def test_rising_profile(self):
        """Test that the monotone path refuses a rising profile and the shell path does not"""
        radii = np.linspace(0.1, 3.0, 30)
        profile = RadialProfile(2, radii, np.exp(-(radii - 1.5) ** 2))
        with self.assertRaises(ProfileError):
            radial_weak_lp_quasinorm(profile, 2.0)
        self.assertGreater(radial_weak_lp_quasinorm(profile, 2.0, monotone=False), 0.0)

    def test_profile_validation(self):
        """Test rejected radii and values"""
        with self.assertRaises(DomainError):
            RadialProfile(2, [0.0, 1.0, 2.0], [1.0, 1.0, 1.0])
        with self.assertRaises(DomainError):
            RadialProfile(2, [1.0, 0.5, 2.0], [1.0, 1.0, 1.0])
        with self.assertRaises(DomainError):
            RadialProfile(2, [0.5, 1.0, 2.0], [1.0, np.nan, 1.0])

    def test_worst_increase(self):
        """Test the relative rise between consecutive samples"""
        profile = RadialProfile(1, [1.0, 2.0, 3.0], [2.0, 1.0, 1.5])
        self.assertAlmostEqual(profile.worst_increase(), 0.25)
        self.assertEqual(profile.scaled(3.0).values[0], 6.0)

    def test_write_csv(self):
        """Test the `r,<label>` export"""
        profile = RadialProfile(1, [1.0, 2.0, 3.0], [3.0, 2.0, 1.0], label="u")
        path = profile.write_csv(os.path.join(self.temp_dir, "u.csv"))
        with open(path) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "r,u")
        self.assertEqual(len(lines), 4)
        self.assertEqual(profile.to_dict()['points'], 3)


if __name__ == '__main__':
    unittest.main()
