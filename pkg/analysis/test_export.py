import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from wavefield.grid import GridSpec
from wavefield.services import gaussian_source, intensity

from .export import lobes_frame, orders_frame, profile_frame, scaling_frame, spectrum_frame, write_csv
from .services import LobeReport, oam_spectrum, radial_profile


class ExportFramesTest(SimpleTestCase):
    """Test cases for tabular exports."""

    def setUp(self):
        self.grid = GridSpec.square(64, 10e-6, 266e-9)
        self.field = gaussian_source(self.grid, w0=100e-6)

    def test_profile_frame_has_one_row_per_bin(self):
        """Test profile columns and row count."""
        profile = radial_profile(intensity(self.field), n_bins=16)
        frame = profile_frame(profile)
        self.assertEqual(list(frame.columns), ['radius_m', 'intensity', 'pixel_count'])
        self.assertEqual(len(frame), 16)
        self.assertTrue((frame['radius_m'].diff().dropna() > 0).all())

    def test_spectrum_frame_covers_range(self):
        """Test one row per charge with powers summing to 1."""
        frame = spectrum_frame(oam_spectrum(self.field, -3, 3))
        self.assertEqual(frame['ell'].tolist(), list(range(-3, 4)))
        self.assertAlmostEqual(frame['power'].sum(), 1.0, places=9)

    def test_orders_frame_adds_expected_charge(self):
        """Test that a grating charge adds n * m per order."""
        frame = orders_frame({1: 0.4, -1: 0.4, 0: 0.1}, m=2)
        self.assertEqual(frame['order'].tolist(), [-1, 0, 1])
        self.assertEqual(frame['expected_ell'].tolist(), [-2, 0, 2])
        self.assertNotIn('expected_ell', orders_frame({0: 1.0}).columns)

    def test_lobes_frame(self):
        """Test one row per lobe."""
        report = LobeReport(n_lobes=3, ring_radius=1e-3, lobe_angles=[0.1, 2.2, 4.3])
        frame = lobes_frame(report)
        self.assertEqual(frame['lobe'].tolist(), [1, 2, 3])

    def test_scaling_frame_ratios(self):
        """Test radius ratios against the sqrt(l) reference."""
        frame = scaling_frame([(4, 1.0), (16, 2.0), (64, 4.1)])
        np.testing.assert_allclose(frame['radius_ratio'], [1.0, 2.0, 4.1])
        np.testing.assert_allclose(frame['sqrt_ell_ratio'], [1.0, 2.0, 4.0])

    def test_write_csv_round_trip(self):
        """Test that a written table reads back with its header."""
        frame = spectrum_frame(oam_spectrum(self.field, 0, 2))
        with tempfile.TemporaryDirectory() as tmp:
            path = write_csv(frame, Path(tmp) / 'nested' / 'spectrum.csv')
            loaded = pd.read_csv(path)
        self.assertEqual(list(loaded.columns), ['ell', 'power'])
        np.testing.assert_allclose(loaded['power'], frame['power'], rtol=1e-12)
