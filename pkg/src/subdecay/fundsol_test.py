#!/usr/bin/env python3
"""
Tests for the fundamental solution
"""

import math
import unittest

import numpy as np

from subdecay.errors import DomainError, DomainTooSmallError, ProfileError, ResolutionError
from subdecay.fundsol import (
    NormEstimate, classify_refinement, critical_exponent, kochubei_bound_check, mass_check, msd_check,
    z_divergence_check, z_grid_fft, z_gradient_radial, z_lp_norm, z_radial_hankel, z_radii, z_weak_lp,
)
from subdecay.kernels import FractionalPair, HeatLimitPair
from subdecay.radial import RadialProfile


def heat_kernel(d, t, r):
    return (4.0 * math.pi * t) ** (-0.5 * d) * np.exp(-r ** 2 / (4.0 * t))


class TestRadialReconstruction(unittest.TestCase):
    """Test Hankel profiles of Z"""

    def test_heat_limit(self):
        """Test Z = (4 pi t)^(-3/2) exp(-r^2/4t) for the heat pair at t = 1"""
        radii = np.geomspace(0.1, 6.0, 12)
        profile = z_radial_hankel(HeatLimitPair(), 1.0, 3, radii)
        np.testing.assert_allclose(profile.values, heat_kernel(3, 1.0, radii), rtol=1e-5, atol=1e-6)
        self.assertEqual(profile.diagnostics['envelope_rate'], 0.0)

    def test_fractional_matches_fft(self):
        """Test that the Hankel and FFT paths agree in d = 1"""
        pair = FractionalPair(0.5)
        grid = z_grid_fft(pair, 1.0, 1, points=16384)
        x = grid.axis()
        mask = (x >= 0.2) & (x <= 3.0)
        radii = x[mask][::16]
        expected = grid.values[mask][::16]
        profile = z_radial_hankel(pair, 1.0, 1, radii)
        np.testing.assert_allclose(profile.values, expected, rtol=1e-4)

    def test_envelope_is_used(self):
        """Test that the fractional pair splits off k(t)/(k(t) + rho^2)"""
        profile = z_radial_hankel(FractionalPair(0.5), 2.0, 3, [0.5, 1.0, 2.0])
        k = 2.0 ** -0.5 / math.gamma(0.5)
        self.assertAlmostEqual(profile.diagnostics['envelope_rate'], k)

    def test_singular_at_origin(self):
        """Test that Z grows without bound as r -> 0 in d = 2"""
        radii = np.array([1e-6, 1e-4, 1e-2])
        profile = z_radial_hankel(FractionalPair(0.5), 1.0, 2, radii)
        self.assertTrue(profile.values[0] > profile.values[1] > profile.values[2])

    def test_gradient_heat(self):
        """Test dZ/dr = -r Z / (2t) for the heat pair in d = 1"""
        radii = np.geomspace(0.1, 5.0, 10)
        profile = z_gradient_radial(HeatLimitPair(), 1.0, 1, radii)
        expected = -radii / 2.0 * heat_kernel(1, 1.0, radii)
        np.testing.assert_allclose(profile.values, expected, rtol=1e-5, atol=1e-7)
        self.assertEqual(profile.label, "dZ_dr")

    def test_positive_time(self):
        """Test that t <= 0 is rejected"""
        with self.assertRaises(DomainError):
            z_radial_hankel(FractionalPair(0.5), 0.0, 2)

    def test_default_radii(self):
        """Test that default radii scale with sqrt((1*l)(t))"""
        radii = z_radii(HeatLimitPair(), 4.0, points=11)
        self.assertAlmostEqual(radii[0], 2e-4)
        self.assertAlmostEqual(radii[-1], 80.0)


class TestGridReconstruction(unittest.TestCase):
    """Test FFT grids of Z"""

    def test_mass_and_symmetry(self):
        """Test unit mass and Z(x) = Z(-x) on a d = 2 grid"""
        z = z_grid_fft(FractionalPair(0.5), 1.0, 2, points=512)
        self.assertAlmostEqual(np.sum(z.values) * z.cell_volume, 1.0, places=10)
        center = z.points // 2
        mirrored = z.values[::-1, ::-1]
        np.testing.assert_allclose(z.values[1:, 1:], mirrored[:-1, :-1], rtol=1e-10,
                                   atol=1e-12 * np.max(z.values))
        self.assertEqual(np.argmax(z.values[:, center]), center)

    def test_coarse_grid_aliases(self):
        """Test that a symbol not decayed at Nyquist is refused"""
        with self.assertRaises(ResolutionError):
            z_grid_fft(FractionalPair(0.5), 1.0, 2, points=64)

    def test_box_too_small(self):
        """Test the domain-size guard"""
        with self.assertRaises(DomainTooSmallError) as cm:
            z_grid_fft(FractionalPair(0.5), 1.0, 2, points=512, extent=4.0)
        self.assertGreater(cm.exception.suggested_extent, 4.0)

    def test_dimension(self):
        """Test that grids stop at d = 3"""
        with self.assertRaises(DomainError):
            z_grid_fft(FractionalPair(0.5), 1.0, 4, points=8)


class TestNorms(unittest.TestCase):
    """Test L_p and weak norms of Z"""

    def test_critical_exponent(self):
        """Test kappa(d) and kappa_1(d)"""
        self.assertIsNone(critical_exponent(1))
        self.assertEqual(critical_exponent(2), math.inf)
        self.assertEqual(critical_exponent(3), 3.0)
        self.assertEqual(critical_exponent(4), 2.0)
        self.assertIsNone(critical_exponent(1, gradient=True))
        self.assertEqual(critical_exponent(3, gradient=True), 1.5)

    def test_classifier(self):
        """Test the refinement verdicts"""
        self.assertEqual(classify_refinement([1.0, 1.0, 1.0, 1.0], 10.0), "divergent")
        self.assertEqual(classify_refinement([1.0, 0.3, 0.09], 1000.0), "finite")
        self.assertIsNone(classify_refinement([1.0, 0.95], 10.0))
        self.assertIsNone(classify_refinement([1.0, 1.0, 1.0], 10.0))

    def test_critical_norm_diverges(self):
        """Test that |Z|_2 in d = 4 is flagged divergent"""
        estimate = z_lp_norm(FractionalPair(0.5), 1.0, 4, 2.0)
        self.assertEqual(estimate.status, "divergent")
        self.assertIsNone(estimate.value)
        increments = [row['increment'] for row in estimate.trend]
        self.assertAlmostEqual(increments[-1] / increments[-2], 1.0, delta=0.03)

    def test_subcritical_norm_is_finite(self):
        """Test that |Z|_1.2 in d = 3 converges"""
        estimate = z_lp_norm(FractionalPair(0.5), 1.0, 3, 1.2)
        self.assertTrue(estimate.finite)
        self.assertGreater(estimate.value, 0.0)

    def test_unit_l1_norm(self):
        """Test |Z|_1 = 1 in d = 2"""
        estimate = z_lp_norm(FractionalPair(0.5), 1.0, 2, 1.0)
        self.assertTrue(estimate.finite)
        self.assertAlmostEqual(estimate.value, 1.0, delta=1e-3)

    def test_sup_norm_line(self):
        """Test that |Z|_inf in d = 1 is the value near the origin"""
        pair = FractionalPair(0.5)
        estimate = z_lp_norm(pair, 1.0, 1, np.inf)
        profile = z_radial_hankel(pair, 1.0, 1, z_radii(pair, 1.0))
        self.assertTrue(estimate.finite)
        self.assertAlmostEqual(estimate.value, float(np.max(profile.values)), places=10)

    def test_divergence_check(self):
        """Test agreement with kappa(4) = 2 and with p = inf in d = 2"""
        self.assertTrue(z_divergence_check(FractionalPair(0.5), 1.0, 4, 2.0).passed)
        self.assertTrue(z_divergence_check(FractionalPair(0.5), 1.0, 2, np.inf).passed)

    def test_weak_norm_scaling(self):
        """Test that doubling Z doubles its weak quasinorm"""
        pair = FractionalPair(0.5)
        profile = z_radial_hankel(pair, 10.0, 3)
        single = z_weak_lp(pair, 10.0, 3, profile)
        self.assertGreater(single, 0.0)
        self.assertAlmostEqual(z_weak_lp(pair, 10.0, 3, profile.scaled(2.0)), 2.0 * single, places=10)

    def test_weak_norm_needs_monotone_profile(self):
        """Test that a rising profile is refused"""
        radii = np.geomspace(0.1, 10.0, 20)
        profile = RadialProfile(3, radii, np.exp(-(radii - 3.0) ** 2))
        with self.assertRaises(ProfileError):
            z_weak_lp(FractionalPair(0.5), 1.0, 3, profile)
        with self.assertRaises(DomainError):
            z_weak_lp(FractionalPair(0.5), 1.0, 2)

    def test_estimate_to_dict(self):
        """Test the serialized estimate"""
        data = NormEstimate(2.0, 1.0, "finite", 0.5).to_dict()
        self.assertEqual(data['status'], "finite")
        self.assertEqual(data['trend'], [])


class TestClaims(unittest.TestCase):
    """Test mass, MSD and Kochubei reports"""

    def test_mass_fractional(self):
        """Test unit mass in d = 4 for the fractional pair"""
        for t in (1.0, 100.0):
            report = mass_check(z_radial_hankel(FractionalPair(0.5), t, 4))
            self.assertTrue(report.passed, report.measured)

    def test_mass_heat(self):
        """Test unit mass of the heat kernel"""
        report = mass_check(z_radial_hankel(HeatLimitPair(), 2.0, 3))
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.measured['mass'], 1.0, places=6)

    def test_mass_heat_exact(self):
        """Test that the heat kernel keeps mass 1 to 1e-8 and stays positive on the default radii"""
        for d in (1, 3):
            profile = z_radial_hankel(HeatLimitPair(), 1.0, d)
            report = mass_check(profile, tolerance=1e-8)
            self.assertTrue(report.passed, report.measured)
            self.assertLessEqual(abs(report.measured['mass'] - 1.0), 1e-8)
            self.assertGreater(report.measured['min_value'], 0.0)
            self.assertGreater(profile.diagnostics['dropped_radii'], 0)
            self.assertLess(profile.radii[-1], 40.0)

    def test_mass_failure(self):
        """Test that a halved profile fails"""
        profile = z_radial_hankel(HeatLimitPair(), 2.0, 3).scaled(0.5)
        self.assertFalse(mass_check(profile).passed)

    def test_msd(self):
        """Test the second moment 2d (1*l)(t)"""
        report = msd_check(FractionalPair(0.5), 1.0, 2)
        self.assertTrue(report.passed, report.measured)

    def test_kochubei(self):
        """Test finite, stable bound constants in d = 3"""
        report = kochubei_bound_check([1.0, 10.0, 100.0], np.geomspace(0.05, 30.0, 12), 0.5, 3)
        constants = report.measured['constants']
        self.assertGreater(constants['z_far_sigma'], 0.0)
        self.assertTrue(np.isfinite(constants['z_near_C']))
        self.assertTrue(np.isfinite(constants['grad_near_C']))
        self.assertTrue(report.passed, report.measured['relative_changes'])

    def test_kochubei_line(self):
        """Test the d = 1 branch without gradients"""
        report = kochubei_bound_check([1.0, 10.0], np.geomspace(0.05, 20.0, 10), 0.5, 1, gradient=False)
        self.assertNotIn('grad_near_C', report.measured['constants'])
        self.assertTrue(np.isfinite(report.measured['constants']['z_near_C']))

    def test_kochubei_alpha_range(self):
        """Test that alpha outside (0, 1) is rejected"""
        with self.assertRaises(DomainError):
            kochubei_bound_check([1.0, 2.0], [1.0, 2.0], 1.0, 3)


if __name__ == '__main__':
    unittest.main()
