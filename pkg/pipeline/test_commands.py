"""
Tests for the mask, run, analyze and scaling management commands
"""

import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import skipUnless

import numpy as np
from django.conf import settings
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase, override_settings

from . import formats

UV = 266e-9


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self.settings_override = override_settings(OUTPUT_DIR=self.tmp)
        self.settings_override.enable()

    def tearDown(self):
        self.settings_override.disable()
        self._tmp.cleanup()

    def call(self, *args):
        out, err = StringIO(), StringIO()
        call_command(*args, stdout=out, stderr=err)
        return out.getvalue()

    def write_config(self, config, name='config.json'):
        path = self.tmp / name
        path.write_text(json.dumps(config))
        return path


class MaskCommandTest(CommandTestCase):
    """Test cases for `mask`."""

    def test_fork_mask_half_filled(self):
        """Test that a default fork mask has a 50% fill."""
        self.call('mask', 'fork', '--m', '2', '--period', '100e-6', '--nx', '256')
        mask = formats.read_pbm(self.tmp / 'fork.pbm')
        self.assertEqual(mask.shape, (256, 256))
        self.assertAlmostEqual(mask.mean(), 0.5, delta=0.02)
        sidecar = json.loads((self.tmp / 'fork.json').read_text())
        self.assertEqual(sidecar['params']['m'], 2)

    def test_spp_sidecar_height(self):
        """Test the l = 64 plate height in the sidecar and on stdout."""
        out = self.call('mask', 'spp', '--ell', '64', '--sectors', '64', '--n', '1.49', '--nx', '256')
        sidecar = json.loads((self.tmp / 'spp.json').read_text())
        self.assertAlmostEqual(sidecar['total_height'], 34.7e-6, delta=0.1e-6)
        self.assertEqual(sidecar['params']['aperture_d'], 256 * settings.DEFAULT_PIXEL_PITCH)
        self.assertIn('total_height: 3.4743e-05', out)

    def test_axicon_two_levels(self):
        """Test exactly two phase levels in the PGM payload."""
        out_base = self.tmp / 'masks' / 'ax3'
        self.call('mask', 'axicon', '--m', '3', '--period', '100e-6', '--aperture', '6e-3', '--out', str(out_base))
        levels, vmin, vmax = formats.read_pgm16(out_base.with_suffix('.pgm'))
        self.assertEqual(set(np.unique(levels)), {0, 65535})
        self.assertEqual((vmin, vmax), (0.0, np.pi))

    def test_invalid_flags_list_errors(self):
        """Test that bad flags fail with every problem named."""
        with self.assertRaises(CommandError) as ctx:
            self.call('mask', 'fork', '--m', '2', '--ell', '3')
        message = str(ctx.exception)
        self.assertIn('fork.period: This field is required.', message)
        self.assertIn('fork.ell: Not a fork parameter.', message)

    def test_undersampled_period(self):
        """Test that a period below four pixels is refused."""
        with self.assertRaisesMessage(CommandError, 'fewer than 4 pixels'):
            self.call('mask', 'fork', '--m', '1', '--period', '20e-6', '--nx', '64')


class RunCommandTest(CommandTestCase):
    """Test cases for `run`."""

    def config(self):
        return {
            'grid': {'nx': 128, 'dx': 10e-6, 'wavelength': UV},
            'source': {'kind': 'laguerre_gaussian', 'w0': 200e-6, 'ell': -2},
            'elements': [{'kind': 'propagate', 'z': 0.1}],
            'analysis': [{'kind': 'spectrum', 'ell_min': -5, 'ell_max': 5}],
            'output': {'name': 'lg'},
        }

    def test_run_writes_report(self):
        """Test the report, summary lines and output files."""
        out = self.call('run', str(self.write_config(self.config())))
        report = json.loads((self.tmp / 'lg_report.json').read_text())
        self.assertEqual(report['analysis'][0]['dominant_ell'], -2)
        self.assertIn('[0] spectrum: dominant_ell=-2', out)
        self.assertTrue((self.tmp / 'lg_intensity.pgm').exists())
        self.assertTrue((self.tmp / 'lg_0_spectrum.csv').exists())

    def test_reruns_are_byte_identical(self):
        """Test determinism through the command."""
        path = self.write_config(self.config())
        self.call('run', str(path), '--output-dir', str(self.tmp / 'a'))
        self.call('run', str(path), '--output-dir', str(self.tmp / 'b'))
        for name in ('lg_report.json', 'lg_intensity.pgm', 'lg_0_spectrum.csv'):
            self.assertEqual((self.tmp / 'a' / name).read_bytes(), (self.tmp / 'b' / name).read_bytes())

    def test_empty_elements(self):
        """Test that an empty element list fails validation."""
        config = self.config()
        config['elements'] = []
        with self.assertRaisesMessage(CommandError, 'elements: At least one element is required.'):
            self.call('run', str(self.write_config(config)))
        self.assertFalse((self.tmp / 'lg_report.json').exists())

    def test_runtime_error_names_element(self):
        """Test that an aliasing lens is reported with its index."""
        config = self.config()
        config['elements'].append({'kind': 'lens', 'focal_length': 1e-3})
        with self.assertRaisesMessage(CommandError, 'element 1 (lens)'):
            self.call('run', str(self.write_config(config)))

    def test_missing_config(self):
        """Test that an unreadable config path fails cleanly."""
        with self.assertRaisesMessage(CommandError, 'cannot read config'):
            self.call('run', str(self.tmp / 'nope.json'))


class AnalyzeCommandTest(CommandTestCase):
    """Test cases for `analyze`."""

    def run_config(self, config):
        self.call('run', str(self.write_config(config)))

    def test_converted_vortex_shows_three_fringes(self):
        """Test a stored l = 2 mode-converted field."""
        self.run_config({
            'grid': {'nx': 1024, 'dx': 4e-6, 'wavelength': UV},
            'source': {'kind': 'laguerre_gaussian', 'w0': 300e-6, 'ell': 2},
            'elements': [{'kind': 'mode_convert', 'f_cyl': 0.1}],
            'output': {'name': 'converted', 'raw_field': True, 'intensity': False},
        })
        self.call('analyze', str(self.tmp / 'converted_field.uvf'), '--fringes', '--name', 'hg')
        report = json.loads((self.tmp / 'hg_report.json').read_text())
        self.assertEqual(report['analysis'][0]['n_fringes'], 3)

    def test_stored_gaussian_has_no_charge(self):
        """Test the OAM spectrum of a stored Gaussian."""
        self.run_config({
            'grid': {'nx': 128, 'dx': 10e-6, 'wavelength': UV},
            'source': {'w0': 200e-6},
            'elements': [{'kind': 'propagate', 'z': 0.05}],
            'output': {'name': 'plain', 'raw_field': True},
        })
        out = self.call('analyze', str(self.tmp / 'plain_field.uvf'), '--spectrum', '-3', '3', '--width')
        report = json.loads((self.tmp / 'plain_field_report.json').read_text())
        self.assertEqual(report['analysis'][0]['dominant_ell'], 0)
        self.assertEqual(report['analysis'][1]['kind'], 'width')
        self.assertIn('plain_field_0_spectrum.csv', out)

    def test_intensity_image(self):
        """Test analysis of a PGM intensity with an explicit pitch."""
        self.run_config({
            'grid': {'nx': 128, 'dx': 10e-6, 'wavelength': UV},
            'source': {'kind': 'laguerre_gaussian', 'w0': 150e-6, 'ell': 3},
            'elements': [{'kind': 'propagate', 'z': 0.01}],
            'output': {'name': 'ring'},
        })
        image = str(self.tmp / 'ring_intensity.pgm')
        self.call('analyze', image, '--profile', '--dx', '10e-6')
        report = json.loads((self.tmp / 'ring_intensity_report.json').read_text())
        expected = np.sqrt(1.5) * 150e-6
        self.assertLess(abs(report['analysis'][0]['peak_radius'] - expected), 2 * 10e-6)

        with self.assertRaisesMessage(CommandError, 'pass --dx'):
            self.call('analyze', image, '--profile')
        with self.assertRaisesMessage(CommandError, 'need a complex field'):
            self.call('analyze', image, '--spectrum', '0', '4', '--dx', '10e-6')

    def test_truncated_file_writes_nothing(self):
        """Test a clean error and no partial report for a cut file."""
        path = formats.write_raw_field(self.tmp / 'cut.uvf', np.ones((16, 16), dtype=complex))
        path.write_bytes(path.read_bytes()[:100])
        with self.assertRaises(CommandError):
            self.call('analyze', str(path), '--dx', '1e-6', '--wavelength', str(UV))
        self.assertFalse((self.tmp / 'cut_report.json').exists())

    def test_unknown_format(self):
        """Test that the error names the expected magic bytes."""
        path = self.tmp / 'frame.tif'
        path.write_bytes(b'II*\x00' + bytes(64))
        with self.assertRaisesMessage(CommandError, "b'P5'"):
            self.call('analyze', str(path))


class ScalingCommandTest(CommandTestCase):
    """Test cases for `scaling`."""

    def config(self, source):
        return {
            'grid': {'nx': 256, 'dx': 20e-6, 'wavelength': UV},
            'source': source,
            'elements': [
                {'kind': 'lens', 'focal_length': 1.0},
                {'kind': 'propagate', 'z': 1.0},
            ],
            'output': {'name': 'rings'},
        }

    def test_writes_table_and_report(self):
        """Test one radius per charge on stdout and in the CSV."""
        path = self.write_config(self.config({'kind': 'laguerre_gaussian', 'w0': 600e-6, 'ell': 1}))
        out = self.call('scaling', str(path), '--charges', '2', '8')
        self.assertIn('l=2: ring_radius=', out)
        self.assertIn('l=8: ring_radius=', out)
        rows = (self.tmp / 'rings_scaling.csv').read_text().splitlines()
        self.assertEqual(len(rows), 3)
        report = json.loads((self.tmp / 'rings_scaling.json').read_text())
        self.assertEqual([ring['ell'] for ring in report['rings']], [2, 8])

    def test_gaussian_without_spp_fails(self):
        """Test that a config with nothing to carry the charge is refused."""
        path = self.write_config(self.config({'w0': 600e-6}))
        with self.assertRaisesMessage(CommandError, 'Scaling study failed at scaling'):
            self.call('scaling', str(path), '--charges', '2', '8')
        self.assertFalse((self.tmp / 'rings_scaling.json').exists())


@skipUnless(settings.RUN_SLOW_TESTS, 'Set RUN_SLOW_TESTS=True for demo and full-scale runs')
class DemoConfigTest(CommandTestCase):
    """Runs of the shipped demo configs."""

    def run_demo(self, name):
        self.call('run', str(Path(settings.DEMO_CONFIG_DIR) / f'{name}.json'))
        return json.loads((self.tmp / f'{name}_report.json').read_text())

    def test_spp_l64(self):
        """Test dominant charge 64 with at least 90% purity."""
        for preset in ('1024', '4096'):
            spectrum = self.run_demo(f'spp_l64_{preset}')['analysis'][0]
            self.assertEqual(spectrum['dominant_ell'], 64)
            self.assertGreaterEqual(spectrum['power']['64'], 0.9)

    def test_axicon_lobes(self):
        """Test m = 3 and m = 10 lobe counts."""
        for m in (3, 10):
            report = self.run_demo(f'axicon_m{m}_1024')
            self.assertEqual(report['analysis'][0]['n_lobes'], m)

    def test_axicon_lobes_hold_across_zone(self):
        """Test that the m = 10 lobe count holds at 0.8 and 1.2 times the mid-zone distance."""
        config = json.loads((Path(settings.DEMO_CONFIG_DIR) / 'axicon_m10_1024.json').read_text())
        mid = config['elements'][-1]['z']
        for scale in (0.8, 1.2):
            config['elements'][-1]['z'] = scale * mid
            config['output']['name'] = f'axicon_m10_z{round(scale * 10)}'
            self.call('run', str(self.write_config(config)))
            report = json.loads((self.tmp / f'axicon_m10_z{round(scale * 10)}_report.json').read_text())
            self.assertEqual(report['analysis'][0]['n_lobes'], 10)

    def test_fork_orders(self):
        """Test the charges of the extracted fork orders."""
        report = self.run_demo('fork_m2_1024')
        self.assertEqual(report['analysis'][1]['dominant_ell'], 2)
        self.assertEqual(report['analysis'][2]['dominant_ell'], -8)
        self.assertLess(report['analysis'][3]['efficiency'], 0.5)

    def test_mode_conversion(self):
        """Test three fringes for the converted l = 2 beam."""
        for preset in ('1024', '4096'):
            report = self.run_demo(f'mode_convert_l2_{preset}')
            self.assertEqual(report['analysis'][0]['n_fringes'], 3)
