"""
Tests for ring-radius scaling studies

The sqrt(l) law is stated for an ideal vortex, an LG_0^l beam. Its far field
is again LG_0^l, so an LG source checks the law exactly. A helical SPP on a
Gaussian makes a hypergeometric-Gaussian beam instead; its rings only have
to grow with l.
"""

import numpy as np
from django.test import SimpleTestCase

from .scaling import refined_peak_radius, ring_radius_scaling, with_charge
from .services import AnalysisError

UV = 266e-9


def lg_far_field_config():
    return {
        'grid': {'nx': 1024, 'dx': 5e-6, 'wavelength': UV},
        'source': {'kind': 'laguerre_gaussian', 'w0': 300e-6, 'ell': 1},
        'elements': [
            {'kind': 'lens', 'focal_length': 1.0},
            {'kind': 'propagate', 'z': 1.0},
        ],
        'output': {'intensity': False, 'csv': False},
    }


def spp_far_field_config():
    return {
        'grid': {'nx': 512, 'dx': 10e-6, 'wavelength': UV},
        'source': {'w0': 1e-3},
        'elements': [
            {'kind': 'spp', 'ell': 1, 'sectors': 64, 'n_plate': 1.49,
             'aperture_d': 4.5e-3, 'profile': 'helical'},
            {'kind': 'lens', 'focal_length': 0.5},
            {'kind': 'propagate', 'z': 0.5},
        ],
    }


class RefinedPeakTest(SimpleTestCase):
    """Test cases for the sub-bin argmax."""

    def test_parabola_vertex_is_exact(self):
        """Test that samples of a parabola return its vertex."""
        r = np.arange(20) * 0.1
        values = 5 - (r - 0.87) ** 2
        self.assertAlmostEqual(refined_peak_radius(r, values), 0.87, places=12)

    def test_edge_peak_is_not_refined(self):
        """Test that a peak in the first bin is returned as is."""
        r = np.arange(10) * 1.0
        self.assertEqual(refined_peak_radius(r, -r), 0.0)


class WithChargeTest(SimpleTestCase):
    """Test cases for charge substitution."""

    def test_sets_spp_and_source_charge(self):
        """Test that every spp element and an LG source receive the charge."""
        config = {
            'source': {'kind': 'laguerre_gaussian', 'ell': 1},
            'elements': [{'kind': 'spp', 'ell': 1}, {'kind': 'lens'}, {'kind': 'spp', 'ell': 3}],
        }
        updated = with_charge(config, 7)
        self.assertEqual(updated['source']['ell'], 7)
        self.assertEqual([e.get('ell') for e in updated['elements']], [7, None, 7])
        self.assertEqual(config['elements'][0]['ell'], 1)

    def test_requires_a_charge_carrier(self):
        """Test that a plain Gaussian pipeline without an SPP is rejected."""
        config = {'source': {'kind': 'gaussian'}, 'elements': [{'kind': 'lens'}]}
        with self.assertRaises(AnalysisError):
            with_charge(config, 2)


class RingRadiusScalingTest(SimpleTestCase):
    """Test cases for ring_radius_scaling."""

    def test_needs_two_charges(self):
        """Test that a single charge is rejected."""
        with self.assertRaises(AnalysisError):
            ring_radius_scaling([4], lg_far_field_config())

    def test_invalid_config(self):
        """Test that config errors surface as AnalysisError."""
        config = lg_far_field_config()
        config['elements'] = []
        with self.assertRaisesMessage(AnalysisError, 'elements'):
            ring_radius_scaling([1, 2], config)

    def test_repeated_charge_gives_equal_radii(self):
        """Test that l = 1, 1 gives a ratio of exactly 1."""
        (_, r1), (_, r2) = ring_radius_scaling([1, 1], lg_far_field_config())
        self.assertEqual(r1, r2)

    def test_sqrt_scaling(self):
        """Test r(16) / r(4) and r(64) / r(16) equal 2 within 8% for an ideal LG vortex."""
        pairs = ring_radius_scaling([4, 16, 64], lg_far_field_config())
        self.assertEqual([ell for ell, _ in pairs], [4, 16, 64])
        radii = [r for _, r in pairs]
        self.assertAlmostEqual(radii[1] / radii[0], 2.0, delta=0.16)
        self.assertAlmostEqual(radii[2] / radii[1], 2.0, delta=0.16)

    def test_absolute_radius(self):
        """Test the far-field ring of l = 4 sits at sqrt(2) lambda f / (pi w0)."""
        pairs = ring_radius_scaling([4, 16], lg_far_field_config())
        expected = np.sqrt(2) * UV * 1.0 / (np.pi * 300e-6)
        self.assertLess(abs(pairs[0][1] - expected) / expected, 0.03)

    def test_spp_rings_grow_with_charge(self):
        """Test that helical SPP vortices focus to larger rings for larger charges."""
        pairs = ring_radius_scaling([2, 4, 8], spp_far_field_config())
        radii = [r for _, r in pairs]
        self.assertLess(radii[0], radii[1])
        self.assertLess(radii[1], radii[2])
