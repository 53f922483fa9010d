import numpy as np
from django.test import SimpleTestCase

from .grid import Field, FieldError, GridSpec, IntensityMap, SamplingError
from .services import (
    apply_mask,
    coordinates,
    energy,
    gaussian_source,
    intensity,
    laguerre_gaussian_source,
    polar,
)


class GridSpecTest(SimpleTestCase):
    """Test cases for GridSpec invariants."""

    def test_window_is_derived(self):
        """Test the physical window is nx*dx by ny*dy."""
        grid = GridSpec(nx=64, ny=32, dx=2e-6, dy=3e-6, wavelength=266e-9)
        self.assertAlmostEqual(grid.window[0], 128e-6)
        self.assertAlmostEqual(grid.window[1], 96e-6)
        self.assertEqual(grid.shape, (32, 64))
        self.assertEqual(grid.center_index, (16, 32))

    def test_rejects_odd_or_small_sizes(self):
        """Test that odd and sub-16 sample counts are rejected."""
        with self.assertRaises(FieldError):
            GridSpec(nx=63, ny=64, dx=1e-6, dy=1e-6, wavelength=266e-9)
        with self.assertRaises(FieldError):
            GridSpec(nx=8, ny=8, dx=1e-6, dy=1e-6, wavelength=266e-9)

    def test_rejects_non_positive_pitch_and_wavelength(self):
        """Test that pitch and wavelength must be positive."""
        with self.assertRaises(FieldError):
            GridSpec(nx=16, ny=16, dx=0.0, dy=1e-6, wavelength=266e-9)
        with self.assertRaises(FieldError):
            GridSpec(nx=16, ny=16, dx=1e-6, dy=1e-6, wavelength=-1.0)

    def test_axis_sample_is_origin(self):
        """Test that the center index maps to (0, 0)."""
        grid = GridSpec.square(32, 1e-6, 266e-9)
        X, Y = coordinates(grid)
        row, col = grid.center_index
        self.assertEqual(X[row, col], 0.0)
        self.assertEqual(Y[row, col], 0.0)
        R, theta = polar(grid)
        self.assertEqual(theta[row, col], 0.0)


class FieldTypeTest(SimpleTestCase):
    """Test cases for Field and IntensityMap validation."""

    def setUp(self):
        self.grid = GridSpec.square(16, 1e-6, 266e-9)

    def test_field_rejects_nan(self):
        """Test that non-finite amplitudes are rejected."""
        values = np.zeros(self.grid.shape, dtype=complex)
        values[3, 3] = np.nan
        with self.assertRaises(FieldError):
            Field(self.grid, values)

    def test_field_rejects_wrong_shape(self):
        """Test that the array must match the grid."""
        with self.assertRaises(FieldError):
            Field(self.grid, np.zeros((16, 18)))

    def test_field_is_read_only(self):
        """Test that the stored amplitude cannot be modified in place."""
        field = Field(self.grid, np.ones(self.grid.shape))
        with self.assertRaises(ValueError):
            field.amplitude[0, 0] = 2.0

    def test_intensity_map_rejects_negative(self):
        """Test that negative intensities are rejected."""
        values = np.zeros(self.grid.shape)
        values[0, 0] = -1.0
        with self.assertRaises(FieldError):
            IntensityMap(self.grid, values)


class GaussianSourceTest(SimpleTestCase):
    """Test cases for gaussian_source."""

    def test_center_and_waist_values(self):
        """Test the axis value is e0 and the value at w0 is e0/e."""
        grid = GridSpec.square(256, 10e-6, 266e-9)
        field = gaussian_source(grid, w0=400e-6, e0=1.0)
        row, col = grid.center_index
        self.assertAlmostEqual(field.amplitude[row, col].real, 1.0, places=12)
        self.assertAlmostEqual(field.amplitude[row, col + 40].real, np.exp(-1.0), places=12)
        self.assertEqual(np.abs(field.amplitude.imag).max(), 0.0)
        self.assertGreater(field.amplitude.real.min(), 0.0)

    def test_wide_waist_is_flat(self):
        """Test that a waist ten windows wide is flat to 1% over the central half."""
        grid = GridSpec.square(128, 10e-6, 266e-9)
        field = gaussian_source(grid, w0=10 * grid.window[0])
        central = np.abs(field.amplitude[32:96, 32:96])
        self.assertLess(1.0 - central.min(), 0.01)

    def test_energy_matches_closed_form(self):
        """Test energy equals e0^2 pi w0^2 / 2 within 0.1%."""
        grid = GridSpec.square(1024, 10e-6, 266e-9)
        w0 = 400e-6
        field = gaussian_source(grid, w0=w0, e0=1.0)
        expected = np.pi * w0 ** 2 / 2
        self.assertLess(abs(energy(field) - expected) / expected, 1e-3)

    def test_under_resolved_waist_rejected(self):
        """Test that a waist below four pixels raises SamplingError."""
        grid = GridSpec.square(64, 10e-6, 266e-9)
        with self.assertRaises(SamplingError):
            gaussian_source(grid, w0=30e-6)

    def test_rotational_symmetry(self):
        """Test I(x,y) = I(y,x) = I(-x,-y) on the symmetric part of a square grid."""
        grid = GridSpec.square(64, 10e-6, 266e-9)
        values = intensity(gaussian_source(grid, w0=150e-6)).values[1:, 1:]
        np.testing.assert_array_equal(values, values.T)
        np.testing.assert_array_equal(values, values[::-1, ::-1])

    def test_one_over_e_squared_radius(self):
        """Test the intensity falls to e^-2 of peak at w0 within one pixel."""
        grid = GridSpec.square(256, 10e-6, 266e-9)
        values = intensity(gaussian_source(grid, w0=400e-6), normalize=True).values
        row, col = grid.center_index
        cut = values[row, col:]
        first_below = int(np.argmax(cut < np.exp(-2.0)))
        self.assertLessEqual(abs(first_below - 40), 1)


class LaguerreGaussianSourceTest(SimpleTestCase):
    """Test cases for laguerre_gaussian_source."""

    def test_peak_on_ring(self):
        """Test the LG ring peaks at w0 * sqrt(l/2) with a dark core."""
        grid = GridSpec.square(256, 5e-6, 266e-9)
        field = laguerre_gaussian_source(grid, w0=200e-6, ell=8, e0=2.0)
        modulus = np.abs(field.amplitude)
        row, col = grid.center_index
        self.assertAlmostEqual(modulus.max(), 2.0, places=9)
        self.assertEqual(modulus[row, col], 0.0)
        peak_column = int(np.argmax(modulus[row, col:]))
        self.assertLessEqual(abs(peak_column - 80), 1)

    def test_phase_winds_with_charge(self):
        """Test that the phase advances by l * pi / 2 over a quarter turn."""
        grid = GridSpec.square(64, 5e-6, 266e-9)
        field = laguerre_gaussian_source(grid, w0=60e-6, ell=-3)
        row, col = grid.center_index
        on_x = field.amplitude[row, col + 10]
        on_y = field.amplitude[row + 10, col]
        self.assertAlmostEqual(np.angle(on_y / on_x), np.angle(np.exp(-1.5j * np.pi)), places=9)


class ApplyMaskTest(SimpleTestCase):
    """Test cases for apply_mask."""

    def setUp(self):
        self.grid = GridSpec.square(128, 10e-6, 266e-9)
        self.field = gaussian_source(self.grid, w0=300e-6)

    def test_zero_phase_is_identity(self):
        """Test that a zero phase and no window leave the field unchanged."""
        out = apply_mask(self.field, np.zeros(self.grid.shape))
        np.testing.assert_array_equal(out.amplitude, self.field.amplitude)

    def test_pi_phase_flips_sign(self):
        """Test that a uniform pi phase negates the field."""
        out = apply_mask(self.field, np.full(self.grid.shape, np.pi))
        np.testing.assert_allclose(out.amplitude, -self.field.amplitude, rtol=0, atol=1e-15)

    def test_pure_phase_preserves_energy(self):
        """Test energy conservation through an arbitrary phase profile."""
        X, Y = coordinates(self.grid)
        phase = 2 * np.pi * X / 100e-6 + 2 * np.arctan2(Y, X) + 5e6 * Y ** 2
        out = apply_mask(self.field, phase)
        self.assertLess(abs(energy(out) - energy(self.field)), 1e-12 * energy(self.field))

    def test_window_scales_modulus(self):
        """Test that the window multiplies the modulus pointwise."""
        window = np.full(self.grid.shape, 0.5)
        out = apply_mask(self.field, np.zeros(self.grid.shape), window)
        np.testing.assert_allclose(np.abs(out.amplitude), 0.5 * np.abs(self.field.amplitude))

    def test_dimension_mismatch(self):
        """Test that a phase of the wrong shape raises FieldError."""
        with self.assertRaises(FieldError):
            apply_mask(self.field, np.zeros((64, 64)))

    def test_window_out_of_range(self):
        """Test that window values above one are rejected."""
        with self.assertRaises(FieldError):
            apply_mask(self.field, np.zeros(self.grid.shape), np.full(self.grid.shape, 1.5))


class EnergyIntensityTest(SimpleTestCase):
    """Test cases for energy and intensity."""

    def setUp(self):
        self.grid = GridSpec.square(16, 1e-6, 266e-9)

    def test_zero_field_energy(self):
        """Test that a zero field has zero energy."""
        self.assertEqual(energy(Field(self.grid, np.zeros(self.grid.shape))), 0.0)

    def test_single_pixel_energy(self):
        """Test that one unit pixel at 1 um pitch has energy 1e-12."""
        values = np.zeros(self.grid.shape, dtype=complex)
        values[4, 5] = 1.0
        self.assertAlmostEqual(energy(Field(self.grid, values)), 1e-12, places=24)

    def test_transpose_invariance(self):
        """Test that transposing a square field preserves energy."""
        rng = np.random.default_rng(7)
        values = rng.normal(size=self.grid.shape) + 1j * rng.normal(size=self.grid.shape)
        field = Field(self.grid, values)
        self.assertAlmostEqual(energy(field), energy(Field(self.grid, values.T)), places=20)

    def test_intensity_of_complex_value(self):
        """Test |3 + 4i|^2 = 25."""
        values = np.zeros(self.grid.shape, dtype=complex)
        values[2, 2] = 3 + 4j
        self.assertEqual(intensity(Field(self.grid, values)).values[2, 2], 25.0)

    def test_normalized_peak_is_one(self):
        """Test that the normalized map has max exactly 1 and min >= 0."""
        rng = np.random.default_rng(3)
        values = rng.normal(size=self.grid.shape) + 1j * rng.normal(size=self.grid.shape)
        imap = intensity(Field(self.grid, values), normalize=True)
        self.assertEqual(imap.values.max(), 1.0)
        self.assertGreaterEqual(imap.values.min(), 0.0)

    def test_normalizing_zero_field_fails(self):
        """Test that normalizing a zero field raises FieldError."""
        with self.assertRaises(FieldError):
            intensity(Field(self.grid, np.zeros(self.grid.shape)), normalize=True)
