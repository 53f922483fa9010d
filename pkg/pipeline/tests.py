import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from wavefield.grid import GridSpec
from wavefield.services import gaussian_source

from . import formats
from .formats import FormatError
from .services import PipelineError, analyze_field, execute, export_mask, run_pipeline, run_scaling
from .validators import ConfigError, ConfigValidator

UV = 266e-9


def small_config(**output):
    return {
        'grid': {'nx': 128, 'dx': 10e-6, 'wavelength': UV},
        'source': {'w0': 200e-6},
        'elements': [
            {'kind': 'spp', 'ell': 3, 'sectors': 16, 'n_plate': 1.49, 'aperture_d': 1.2e-3,
             'profile': 'helical'},
            {'kind': 'propagate', 'z': 0.05},
        ],
        'analysis': [
            {'kind': 'spectrum', 'ell_min': -6, 'ell_max': 6},
            {'kind': 'profile'},
            {'kind': 'width'},
        ],
        'output': {'name': 'small', **output},
    }


class TempDirMixin:
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()


class PBMTest(TempDirMixin, SimpleTestCase):
    """Test cases for binary mask files."""

    def test_round_trip_with_row_padding(self):
        """Test a width that is not a multiple of 8."""
        rng = np.random.default_rng(1)
        mask = rng.integers(0, 2, size=(20, 37)).astype(np.uint8)
        path = formats.write_pbm(self.tmp / 'mask.pbm', mask)
        self.assertTrue(path.read_bytes().startswith(b'P4\n37 20\n'))
        np.testing.assert_array_equal(formats.read_pbm(path), mask)

    def test_rejects_non_binary(self):
        """Test that values other than 0/1 are refused."""
        with self.assertRaises(FormatError):
            formats.write_pbm(self.tmp / 'bad.pbm', np.full((4, 4), 2))

    def test_truncated_payload(self):
        """Test that a short payload raises FormatError."""
        path = formats.write_pbm(self.tmp / 'mask.pbm', np.ones((16, 16), dtype=np.uint8))
        path.write_bytes(path.read_bytes()[:-3])
        with self.assertRaisesMessage(FormatError, 'truncated'):
            formats.read_pbm(path)


class PGMTest(TempDirMixin, SimpleTestCase):
    """Test cases for 16-bit images."""

    def test_scale_comment_and_big_endian_levels(self):
        """Test header layout and byte order."""
        values = np.array([[0.0, 1.0], [2.0, 3.0]])
        path = formats.write_pgm16(self.tmp / 'img.pgm', values, 0.0, 65535.0)
        data = path.read_bytes()
        self.assertTrue(data.startswith(b'P5\n# scale 0.0 65535.0\n2 2\n65535\n'))
        self.assertEqual(data[-8:], b'\x00\x00\x00\x01\x00\x02\x00\x03')

    def test_physical_values_recoverable(self):
        """Test dequantized values within half a level of the input."""
        values = np.linspace(-1e-6, 3e-6, 64 * 32).reshape(32, 64)
        path = formats.write_pgm16(self.tmp / 'h.pgm', values)
        levels, vmin, vmax = formats.read_pgm16(path)
        self.assertEqual((vmin, vmax), (-1e-6, 3e-6))
        step = (vmax - vmin) / formats.PGM_MAX_LEVEL
        self.assertLessEqual(np.abs(formats.dequantize(levels, vmin, vmax) - values).max(), step / 2 + 1e-18)

    def test_two_level_phase(self):
        """Test that a {0, pi} phase uses exactly the two extreme levels."""
        values = np.where(np.arange(100).reshape(10, 10) % 3 == 0, np.pi, 0.0)
        levels, _, _ = formats.read_pgm16(formats.write_pgm16(self.tmp / 'p.pgm', values, 0.0, np.pi))
        self.assertEqual(set(np.unique(levels)), {0, 65535})

    def test_constant_image(self):
        """Test that a flat image maps to level 0."""
        levels, vmin, vmax = formats.read_pgm16(formats.write_pgm16(self.tmp / 'c.pgm', np.full((4, 4), 7.0)))
        self.assertEqual(levels.max(), 0)
        self.assertEqual(vmin, vmax)

    def test_rejects_8_bit(self):
        """Test that maxval 255 is not accepted."""
        path = self.tmp / 'eight.pgm'
        path.write_bytes(b'P5\n2 2\n255\n\x00\x01\x02\x03')
        with self.assertRaises(FormatError):
            formats.read_pgm16(path)


class RawFieldTest(TempDirMixin, SimpleTestCase):
    """Test cases for raw complex fields."""

    def test_bit_exact_round_trip(self):
        """Test 100 random fields for bit-exact recovery."""
        rng = np.random.default_rng(2024)
        for k in range(100):
            ny, nx = rng.integers(1, 40, size=2)
            scale = 10.0 ** rng.integers(-300, 300)
            field = (rng.normal(size=(ny, nx)) + 1j * rng.normal(size=(ny, nx))) * scale
            path = formats.write_raw_field(self.tmp / f'f{k}.uvf', field)
            loaded = formats.read_raw_field(path)
            self.assertEqual(loaded.shape, field.shape)
            np.testing.assert_array_equal(loaded.view(np.uint64), field.view(np.uint64))

    def test_header_layout(self):
        """Test magic, little-endian sizes and payload length."""
        path = formats.write_raw_field(self.tmp / 'f.uvf', np.zeros((3, 5), dtype=complex))
        data = path.read_bytes()
        self.assertEqual(data[:8], formats.RAW_MAGIC)
        self.assertEqual(data[8:16], b'\x05\x00\x00\x00\x03\x00\x00\x00')
        self.assertEqual(len(data), 16 + 15 * 16)

    def test_truncated_field(self):
        """Test that a cut payload is rejected."""
        path = formats.write_raw_field(self.tmp / 'f.uvf', np.ones((4, 4), dtype=complex))
        path.write_bytes(path.read_bytes()[:-1])
        with self.assertRaises(FormatError):
            formats.read_raw_field(path)

    def test_sidecar_supplies_grid(self):
        """Test that load_field reads dx, dy and wavelength from the sidecar."""
        grid = GridSpec(nx=32, ny=16, dx=5e-6, dy=6e-6, wavelength=UV)
        source = gaussian_source(grid, w0=40e-6)
        path = formats.write_raw_field(self.tmp / 'g.uvf', source.amplitude, grid)
        loaded = formats.load_field(path)
        self.assertEqual(loaded.grid, grid)
        np.testing.assert_array_equal(loaded.amplitude, source.amplitude)

    def test_missing_sidecar_needs_sampling(self):
        """Test that a bare raw file needs an explicit pitch and wavelength."""
        path = formats.write_raw_field(self.tmp / 'g.uvf', np.ones((16, 16), dtype=complex))
        with self.assertRaises(FormatError):
            formats.load_field(path)
        self.assertEqual(formats.load_field(path, dx=1e-6, wavelength=UV).grid.dy, 1e-6)


class SniffAndJSONTest(TempDirMixin, SimpleTestCase):
    """Test cases for format detection and JSON output."""

    def test_sniff(self):
        """Test each supported magic."""
        formats.write_pbm(self.tmp / 'a', np.zeros((2, 2), dtype=np.uint8))
        formats.write_pgm16(self.tmp / 'b', np.zeros((2, 2)))
        formats.write_raw_field(self.tmp / 'c', np.zeros((2, 2), dtype=complex))
        self.assertEqual([formats.sniff_format(self.tmp / n) for n in 'abc'], ['pbm', 'pgm', 'raw'])

    def test_unknown_magic_names_expected_bytes(self):
        """Test the error message for an unsupported file."""
        path = self.tmp / 'x.png'
        path.write_bytes(b'\x89PNG\r\n\x1a\n')
        with self.assertRaisesMessage(FormatError, "b'UVFIELD1'"):
            formats.sniff_format(path)

    def test_numpy_values_serialize_sorted(self):
        """Test numpy scalars and arrays in reports."""
        text = formats.dumps({'b': np.float64(0.5), 'a': np.arange(3), 'c': np.bool_(True), 'd': np.int64(4)})
        self.assertEqual(json.loads(text), {'a': [0, 1, 2], 'b': 0.5, 'c': True, 'd': 4})
        self.assertLess(text.index('"a"'), text.index('"b"'))


class ConfigValidatorTest(SimpleTestCase):
    """Test cases for ConfigValidator."""

    def setUp(self):
        self.validator = ConfigValidator()

    def test_defaults_are_filled(self):
        """Test the normalized config of a minimal document."""
        result = self.validator.validate(small_config())
        self.assertTrue(result['valid'], result['errors'])
        data = result['data']
        self.assertEqual(data['grid'], {'nx': 128, 'ny': 128, 'dx': 10e-6, 'dy': 10e-6, 'wavelength': UV})
        self.assertEqual(data['source']['kind'], 'gaussian')
        self.assertEqual(data['elements'][0]['n_medium'], 1.0)
        self.assertIsNone(data['elements'][1]['band_limit'])
        self.assertEqual(data['elements'][1]['method'], 'paraxial')
        self.assertTrue(data['output']['intensity'])
        self.assertFalse(data['output']['raw_field'])

    def test_normalized_config_round_trips(self):
        """Test that validating the serialized normalized config changes nothing."""
        data = self.validator.validate(small_config())['data']
        again = ConfigValidator().validate(json.loads(formats.dumps(data)))
        self.assertTrue(again['valid'], again['errors'])
        self.assertEqual(again['data'], data)

    def test_empty_element_list(self):
        """Test that run needs at least one element."""
        config = small_config()
        config['elements'] = []
        result = self.validator.validate(config)
        self.assertFalse(result['valid'])
        self.assertIn('elements: At least one element is required.', result['errors'])

    def test_all_errors_reported_together(self):
        """Test that every schema problem is listed with its path."""
        config = small_config()
        config['colour'] = 'blue'
        config['elements'] = [
            {'kind': 'propagate'},
            {'kind': 'lens', 'focal_length': 0.2, 'radius': 1e-3},
            {'kind': 'prism'},
        ]
        config['analysis'] = [{'kind': 'spectrum', 'ell_min': 4, 'ell_max': 1}]
        errors = self.validator.validate(config)['errors']
        joined = '\n'.join(errors)
        self.assertIn('colour: Unknown key.', errors)
        self.assertIn('elements[0].z: This field is required.', errors)
        self.assertIn('elements[1].radius: Unknown key.', errors)
        self.assertIn("elements[2].kind: Unknown kind 'prism'", joined)
        self.assertIn('analysis[0].ell_max', joined)
        self.assertGreaterEqual(len(errors), 5)

    def test_element_invariants_checked_before_run(self):
        """Test that parameter records are built during validation."""
        config = small_config()
        config['elements'][0] = {'kind': 'fork', 'm': 1, 'period': 100e-6, 'alpha': 0.5, 'threshold': 0.9}
        errors = self.validator.validate(config)['errors']
        self.assertEqual(len(errors), 1)
        self.assertTrue(errors[0].startswith('elements[0]: threshold must lie'))

    def test_order_efficiency_needs_extract(self):
        """Test that an order region requires an extract block."""
        config = small_config()
        config['analysis'] = [{'kind': 'efficiency', 'region': 'order'}]
        self.assertIn('analysis[0].extract: Required for an order region.', self.validator.validate(config)['errors'])

    def test_invalid_json_file(self):
        """Test that a malformed file is reported, not raised."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'bad.json'
            path.write_text('{"grid": ')
            result = self.validator.validate_file(path)
        self.assertFalse(result['valid'])
        self.assertIn('invalid JSON', result['errors'][0])

    def test_config_error_carries_list(self):
        """Test ConfigError keeps each message."""
        error = ConfigError(['a: x', 'b: y'])
        self.assertEqual(error.errors, ['a: x', 'b: y'])
        self.assertEqual(str(error), 'a: x\nb: y')


class PipelineServicesTest(TempDirMixin, SimpleTestCase):
    """Test cases for pipeline execution."""

    def _data(self, config):
        result = ConfigValidator().validate(config)
        self.assertTrue(result['valid'], result['errors'])
        return result['data']

    def test_spp_pipeline_reports_charge(self):
        """Test that a helical SPP run reports its charge."""
        report = run_pipeline(self._data(small_config()), output_dir=self.tmp)
        spectrum = report['analysis'][0]
        self.assertEqual(spectrum['dominant_ell'], 3)
        self.assertEqual(report['analysis'][2]['kind'], 'width')
        for name in report['files']:
            self.assertTrue((self.tmp / name).exists(), name)
        self.assertIn('small_0_spectrum.csv', report['files'])
        self.assertIn('small_intensity.pgm', report['files'])

    def test_identical_configs_give_identical_bytes(self):
        """Test determinism of every written file."""
        data = self._data(small_config(raw_field=True))
        first, second = self.tmp / 'one', self.tmp / 'two'
        report = run_pipeline(data, output_dir=first)
        run_pipeline(data, output_dir=second)
        for name in report['files']:
            self.assertEqual((first / name).read_bytes(), (second / name).read_bytes(), name)

    def test_failing_element_is_named(self):
        """Test that runtime errors carry the element index."""
        config = small_config()
        config['elements'].insert(1, {'kind': 'lens', 'focal_length': 1e-3})
        with self.assertRaisesMessage(PipelineError, 'element 1 (lens)'):
            execute(self._data(config))

    def test_lossless_pipeline_efficiency(self):
        """Test total efficiency 1 for phase-only elements without band limiting."""
        config = small_config()
        config['elements'] = [
            {'kind': 'fork', 'm': 1, 'period': 100e-6, 'encoding': 'continuous'},
            {'kind': 'lens', 'focal_length': 0.5},
            {'kind': 'propagate', 'z': 0.5, 'band_limit': False},
        ]
        config['analysis'] = [{'kind': 'efficiency'}]
        report = run_pipeline(self._data(config), output_dir=self.tmp)
        self.assertAlmostEqual(report['analysis'][0]['efficiency'], 1.0, delta=1e-6)

    def test_zero_field_writes_no_image(self):
        """Test that a fully opaque mask fails the run before any file is written."""
        config = small_config()
        config['elements'] = [
            {'kind': 'fork', 'm': 1, 'period': 100e-6, 'threshold': 1.0, 'encoding': 'amplitude'},
        ]
        config['analysis'] = []
        with self.assertRaisesMessage(PipelineError, 'identically zero'):
            run_pipeline(self._data(config), output_dir=self.tmp)
        self.assertEqual(list(self.tmp.iterdir()), [])

    def test_scaling_study_tables_ring_radii(self):
        """Test that far-field LG rings for l = 2 and 8 differ by a factor of two."""
        config = {
            'grid': {'nx': 256, 'dx': 20e-6, 'wavelength': UV},
            'source': {'kind': 'laguerre_gaussian', 'w0': 600e-6, 'ell': 1},
            'elements': [
                {'kind': 'lens', 'focal_length': 1.0},
                {'kind': 'propagate', 'z': 1.0},
            ],
            'output': {'name': 'lg'},
        }
        report = run_scaling(self._data(config), [2, 8], output_dir=self.tmp)
        self.assertEqual([ring['ell'] for ring in report['rings']], [2, 8])
        self.assertEqual(report['files'], ['lg_scaling.csv', 'lg_scaling.json'])
        rows = (self.tmp / 'lg_scaling.csv').read_text().splitlines()
        self.assertEqual(rows[0], 'ell,ring_radius_m,radius_ratio,sqrt_ell_ratio')
        ratio = report['rings'][1]['ring_radius'] / report['rings'][0]['ring_radius']
        self.assertAlmostEqual(ratio, 2.0, delta=0.2)

    def test_scaling_needs_a_charge_carrier(self):
        """Test that a plain Gaussian config cannot be swept over charge."""
        config = small_config()
        config['elements'] = [{'kind': 'propagate', 'z': 0.05}]
        with self.assertRaisesMessage(PipelineError, 'scaling'):
            run_scaling(self._data(config), [1, 2], output_dir=self.tmp)
        self.assertEqual(list(self.tmp.iterdir()), [])

    def test_intensity_input_rejects_spectrum(self):
        """Test that complex-only analyses need a field."""
        with self.assertRaises(PipelineError):
            analyze_field(None, None, [{'kind': 'spectrum', 'ell_min': 0, 'ell_max': 1}])


class ExportMaskTest(TempDirMixin, SimpleTestCase):
    """Test cases for standalone mask export."""

    def setUp(self):
        super().setUp()
        self.grid = GridSpec.square(256, 10e-6, UV)

    def test_fork_fill_factor(self):
        """Test a half-filled fork mask and its charge table."""
        params = {'m': 2, 'period': 100e-6, 'alpha': 1.0, 'threshold': 0.5, 'encoding': 'phase'}
        sidecar = export_mask('fork', params, self.grid, self.tmp / 'fork')
        mask = formats.read_pbm(self.tmp / 'fork.pbm')
        self.assertAlmostEqual(mask.mean(), 0.5, delta=0.02)
        self.assertAlmostEqual(sidecar['fill_factor'], mask.mean(), places=12)
        self.assertEqual(sidecar['order_charges']['-4'], -8)

    def test_spp_heights(self):
        """Test the total relief height of a 64-sector l = 64 plate."""
        params = {'ell': 64, 'sectors': 64, 'n_plate': 1.49, 'n_medium': 1.0, 'h0': 0.0,
                  'profile': 'stepped', 'aperture_d': 2.56e-3, 'wavelength': None}
        sidecar = export_mask('spp', params, self.grid, self.tmp / 'spp')
        self.assertAlmostEqual(sidecar['total_height'], 34.7e-6, delta=0.1e-6)
        self.assertTrue((self.tmp / 'spp_phase.pgm').exists())
        _, vmin, vmax = formats.read_pgm16(self.tmp / 'spp.pgm')
        self.assertEqual(vmin, 0.0)
        self.assertAlmostEqual(vmax, 63 * sidecar['step_height'], places=15)

    def test_axicon_levels_and_zone(self):
        """Test two phase levels and the Bessel zone length."""
        params = {'m': 3, 'period': 100e-6, 'aperture_d': 2e-3, 'encoding': 'phase', 'n_plate': 1.66}
        sidecar = export_mask('axicon', params, self.grid, self.tmp / 'axicon')
        levels, _, _ = formats.read_pgm16(self.tmp / 'axicon.pgm')
        self.assertEqual(set(np.unique(levels)), {0, 65535})
        self.assertAlmostEqual(sidecar['etch_depth'], 201.5e-9, delta=0.5e-9)
        self.assertAlmostEqual(sidecar['bessel_zone_length'], 1e-3 / np.tan(np.arcsin(UV / 100e-6)))
