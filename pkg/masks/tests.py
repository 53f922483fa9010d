import numpy as np
from django.test import SimpleTestCase

from wavefield.grid import GridSpec
from wavefield.services import coordinates

from .services import (
    aperture_window,
    apodization_window,
    axicon_phase,
    bessel_zone_length,
    binarize,
    binary_layer_thickness,
    binary_to_phase,
    fill_factor,
    fork_phase,
    predicted_charge,
    spp_phase,
    spp_step_height,
)
from .specs import (
    ApodizationSpec,
    AxiconSpec,
    ForkGratingSpec,
    MaskError,
    MaskSamplingError,
    SPPSpec,
)

UV = 266e-9


class ForkPhaseTest(SimpleTestCase):
    """Test cases for fork_phase."""

    def setUp(self):
        self.grid = GridSpec.square(128, 10e-6, UV)
        self.row, self.col = self.grid.center_index

    def test_no_charge_is_linear_grating(self):
        """Test that m = 0 gives a phase constant along y."""
        phase = fork_phase(self.grid, ForkGratingSpec(m=0, x0=100e-6))
        np.testing.assert_array_equal(phase, np.broadcast_to(phase[0], phase.shape))

    def test_vortex_term_on_positive_y_axis(self):
        """Test that m = 2 contributes pi at (0, y > 0)."""
        phase = fork_phase(self.grid, ForkGratingSpec(m=2, x0=100e-6))
        self.assertAlmostEqual(phase[self.row + 7, self.col], np.pi, places=12)

    def test_half_period_step(self):
        """Test a pi phase change over half a period along +x."""
        phase = fork_phase(self.grid, ForkGratingSpec(m=2, x0=100e-6))
        delta = phase[self.row, self.col + 5] - phase[self.row, self.col]
        self.assertAlmostEqual(delta, np.pi, places=12)

    def test_axis_pixel_has_zero_azimuth(self):
        """Test that the singular pixel gets azimuth 0."""
        phase = fork_phase(self.grid, ForkGratingSpec(m=5, x0=100e-6))
        self.assertEqual(phase[self.row, self.col], 0.0)

    def test_opposite_charges_mirror(self):
        """Test that the vortex terms of m and -m are opposite."""
        X, _ = coordinates(self.grid)
        linear = 2 * np.pi * X / 100e-6
        plus = fork_phase(self.grid, ForkGratingSpec(m=3, x0=100e-6)) - linear
        minus = fork_phase(self.grid, ForkGratingSpec(m=-3, x0=100e-6)) - linear
        np.testing.assert_allclose(plus, -minus, rtol=0, atol=1e-9)

    def test_under_sampled_period(self):
        """Test that a period of 3 pixels raises MaskSamplingError."""
        with self.assertRaises(MaskSamplingError):
            fork_phase(self.grid, ForkGratingSpec(m=1, x0=30e-6))

    def test_spec_rejects_bad_threshold(self):
        """Test that the threshold must not exceed alpha."""
        with self.assertRaises(MaskError):
            ForkGratingSpec(m=1, x0=100e-6, alpha=0.5, threshold=0.6)
        with self.assertRaises(MaskError):
            ForkGratingSpec(m=1, x0=-1.0)


class BinarizeTest(SimpleTestCase):
    """Test cases for binarize and binary_to_phase."""

    def test_zero_phase_all_ones(self):
        """Test that a flat zero phase gives an all-ones mask."""
        mask = binarize(np.zeros((16, 16)), alpha=1.0, threshold=0.5)
        self.assertEqual(mask.dtype, np.uint8)
        self.assertTrue(np.all(mask == 1))

    def test_pi_phase_all_zeros(self):
        """Test that a flat pi phase gives an all-zeros mask."""
        mask = binarize(np.full((16, 16), np.pi), alpha=1.0, threshold=0.5)
        self.assertTrue(np.all(mask == 0))

    def test_fork_fill_factor_half(self):
        """Test a 50% fill factor for a 10-pixel fork at T = alpha / 2."""
        grid = GridSpec.square(128, 1e-6, UV)
        mask = binarize(fork_phase(grid, ForkGratingSpec(m=2, x0=10e-6)), 1.0, 0.5)
        self.assertLess(abs(fill_factor(mask) - 0.5), 0.02)
        self.assertEqual(set(np.unique(mask)), {0, 1})

    def test_depends_on_cosine_only(self):
        """Test that phase and its negative give identical masks."""
        rng = np.random.default_rng(11)
        phase = rng.uniform(-10, 10, size=(32, 32))
        np.testing.assert_array_equal(binarize(phase, 0.8, 0.3), binarize(-phase, 0.8, 0.3))

    def test_rejects_threshold_above_alpha(self):
        """Test that threshold > alpha is an error."""
        with self.assertRaises(MaskError):
            binarize(np.zeros((4, 4)), alpha=0.4, threshold=0.5)

    def test_binary_to_phase_levels(self):
        """Test that ones map to the depth and zeros to 0."""
        mask = np.array([[0, 1], [1, 0]], dtype=np.uint8)
        np.testing.assert_array_equal(binary_to_phase(mask), [[0, np.pi], [np.pi, 0]])
        with self.assertRaises(MaskError):
            binary_to_phase(np.array([[0, 2]]))


class SPPTest(SimpleTestCase):
    """Test cases for spp_phase and spp_step_height."""

    def setUp(self):
        self.grid = GridSpec.square(128, 10e-6, UV)
        self.row, self.col = self.grid.center_index

    def _spec(self, ell, sectors, **kwargs):
        kwargs.setdefault('aperture_d', 1.2e-3)
        return SPPSpec(ell=ell, sectors=sectors, wavelength=UV, n_plate=1.49, **kwargs)

    def _sector_samples(self, values, sectors, radius=40):
        samples = []
        for s in range(sectors):
            angle = (s + 0.5) * 2 * np.pi / sectors
            row = self.row + int(round(radius * np.sin(angle)))
            col = self.col + int(round(radius * np.cos(angle)))
            samples.append(values[row, col])
        return np.array(samples)

    def test_total_height_fused_silica_design(self):
        """Test h_s ~ 34.7 um and a ~543 nm step for l = 64 over 64 sectors."""
        h_s, delta_h = spp_step_height(self._spec(64, 64, aperture_d=25.6e-3))
        self.assertAlmostEqual(h_s, 64 * UV / 0.49, places=15)
        self.assertAlmostEqual(h_s * 1e6, 34.74, places=2)
        self.assertAlmostEqual(delta_h * 1e9, 542.9, places=1)

    def test_zero_charge_is_flat(self):
        """Test that l = 0 gives a constant phase and a flat h0 plate."""
        phase, height = spp_phase(self.grid, self._spec(0, 16, h0=2e-6))
        self.assertTrue(np.all(height == 2e-6))
        inside = aperture_window(self.grid, 1.2e-3) > 0
        self.assertEqual(len(np.unique(phase[inside])), 1)

    def test_quarter_turn_steps(self):
        """Test four phase levels 0, pi/2, pi, 3pi/2 for l = 1 over 4 sectors."""
        phase, _ = spp_phase(self.grid, self._spec(1, 4))
        np.testing.assert_allclose(
            self._sector_samples(phase, 4), [0, np.pi / 2, np.pi, 3 * np.pi / 2], atol=1e-12
        )

    def test_distinct_levels_follow_gcd(self):
        """Test 8 phase levels for coprime (3, 8) and 4 for (2, 8)."""
        inside = aperture_window(self.grid, 1.2e-3) > 0
        for ell, expected in ((3, 8), (2, 4)):
            phase, _ = spp_phase(self.grid, self._spec(ell, 8))
            wrapped = np.round(np.mod(phase[inside] + 1e-9, 2 * np.pi), 6)
            self.assertEqual(len(np.unique(wrapped)), expected)

    def test_increments_sum_to_full_winding(self):
        """Test that the per-sector phase increments add up to 2 pi l."""
        ell, sectors = 5, 8
        phase, _ = spp_phase(self.grid, self._spec(ell, sectors))
        levels = self._sector_samples(phase, sectors)
        increments = np.append(np.diff(levels), levels[0] + 2 * np.pi * ell - levels[-1])
        np.testing.assert_allclose(increments, 2 * np.pi * ell / sectors, atol=1e-12)
        self.assertAlmostEqual(increments.sum(), 2 * np.pi * ell, places=12)

    def test_height_staircase_monotone_and_wraps(self):
        """Test the height rises with azimuth and wraps by h_s."""
        spec = self._spec(5, 8, h0=1e-6)
        _, height = spp_phase(self.grid, spec)
        steps = self._sector_samples(height, 8)
        self.assertTrue(np.all(np.diff(steps) >= 0))
        self.assertAlmostEqual(steps[-1] + spec.step_height - steps[0], spec.total_height, places=15)
        self.assertGreaterEqual(height.min(), 0.0)

    def test_negative_charge_mirrors_staircase(self):
        """Test that negative l keeps heights >= h0 with a descending staircase."""
        _, height = spp_phase(self.grid, self._spec(-3, 8))
        steps = self._sector_samples(height, 8)
        self.assertTrue(np.all(np.diff(steps) <= 0))
        self.assertGreaterEqual(height.min(), 0.0)

    def test_helical_profile_is_continuous_ramp(self):
        """Test that the helical phase equals l times the wrapped azimuth."""
        phase, _ = spp_phase(self.grid, self._spec(4, 64, profile='helical'))
        samples = self._sector_samples(phase, 16)
        self.assertTrue(np.all(np.diff(samples) > 0))
        self.assertLess(samples[-1], 2 * np.pi * 4)

    def test_outside_aperture(self):
        """Test zero phase and h0 height outside the aperture."""
        phase, height = spp_phase(self.grid, self._spec(3, 8, h0=5e-7, aperture_d=0.6e-3))
        self.assertEqual(phase[0, 0], 0.0)
        self.assertEqual(height[0, 0], 5e-7)

    def test_aperture_larger_than_window(self):
        """Test that an aperture beyond the window is rejected."""
        with self.assertRaises(MaskError):
            spp_phase(self.grid, self._spec(1, 8, aperture_d=2e-3))

    def test_spec_requires_index_contrast(self):
        """Test that n_plate must exceed n_medium."""
        with self.assertRaises(MaskError):
            SPPSpec(ell=1, sectors=8, wavelength=UV, n_plate=1.0, aperture_d=1e-3)


class AxiconTest(SimpleTestCase):
    """Test cases for axicon_phase."""

    def setUp(self):
        self.grid = GridSpec.square(128, 10e-6, UV)
        self.row, self.col = self.grid.center_index

    def test_level_flips_every_half_period(self):
        """Test alternating levels at 20, 70, 120 and 170 um along +x."""
        phase = axicon_phase(self.grid, AxiconSpec(m=3, period=100e-6, aperture_d=1.2e-3))
        levels = [phase[self.row, self.col + k] for k in (2, 7, 12, 17)]
        self.assertEqual(levels, [0.0, np.pi, 0.0, np.pi])

    def test_two_levels_pi_apart(self):
        """Test exactly two phase values over the aperture."""
        phase = axicon_phase(self.grid, AxiconSpec(m=10, period=100e-6, aperture_d=1.2e-3))
        inside = aperture_window(self.grid, 1.2e-3) > 0
        self.assertEqual(sorted(np.unique(phase[inside])), [0.0, np.pi])
        self.assertEqual(phase[0, 0], 0.0)

    def test_zero_charge_gives_rings(self):
        """Test that m = 0 depends on radius only."""
        phase = axicon_phase(self.grid, AxiconSpec(m=0, period=100e-6, aperture_d=1.2e-3))
        for k in range(1, 60):
            self.assertEqual(phase[self.row, self.col + k], phase[self.row + k, self.col])

    def test_fourfold_rotation_symmetry(self):
        """Test that an m = 4 axicon matches its 90 degree rotation on >= 99% of pixels."""
        phase = axicon_phase(self.grid, AxiconSpec(m=4, period=100e-6, aperture_d=1.2e-3))[1:, 1:]
        mismatch = np.mean(phase != np.rot90(phase))
        self.assertLessEqual(mismatch, 0.01)

    def test_from_wavenumber(self):
        """Test that k_r and period are interchangeable."""
        spec = AxiconSpec.from_wavenumber(m=3, k_r=2 * np.pi / 100e-6, aperture_d=6e-3)
        self.assertAlmostEqual(spec.period, 100e-6, places=15)

    def test_under_sampled_period(self):
        """Test that a period below 4 pixels raises MaskSamplingError."""
        with self.assertRaises(MaskSamplingError):
            axicon_phase(self.grid, AxiconSpec(m=3, period=30e-6, aperture_d=1e-3))


class FabricationTest(SimpleTestCase):
    """Test cases for thickness, zone length and charge bookkeeping."""

    def test_binary_layer_thickness(self):
        """Test pi-step etch depths."""
        self.assertAlmostEqual(binary_layer_thickness(266e-9, 1.66) * 1e9, 201.5, places=1)
        self.assertAlmostEqual(binary_layer_thickness(266e-9, 1.5) * 1e9, 266.0, places=6)
        self.assertAlmostEqual(binary_layer_thickness(532e-9, 1.66) * 1e9, 403.0, places=1)

    def test_binary_layer_thickness_rejects_low_index(self):
        """Test that n <= 1 is an error."""
        with self.assertRaises(MaskError):
            binary_layer_thickness(266e-9, 1.0)

    def test_predicted_charge(self):
        """Test l = n * m."""
        self.assertEqual(predicted_charge(1, 2), 2)
        self.assertEqual(predicted_charge(-4, 2), -8)
        self.assertEqual(predicted_charge(0, 7), 0)

    def test_bessel_zone_length(self):
        """Test the geometric zone of a 6 mm, 100 um axicon at 266 nm."""
        zone = bessel_zone_length(6e-3, 100e-6, UV)
        self.assertAlmostEqual(zone, 3e-3 / np.tan(np.arcsin(2.66e-3)), places=12)
        self.assertAlmostEqual(zone, 1.128, places=3)
        with self.assertRaises(MaskError):
            bessel_zone_length(6e-3, 200e-9, UV)


class WindowTest(SimpleTestCase):
    """Test cases for apodization_window and aperture_window."""

    def setUp(self):
        self.grid = GridSpec.square(256, 10e-6, UV)
        self.row, self.col = self.grid.center_index

    def test_apodization_shape(self):
        """Test A(0) = 0, A(r0) ~ 1/e and values in [0, 1]."""
        window = apodization_window(self.grid, ApodizationSpec(r0=1e-3, rc=0.1e-3, p_out=2, q_in=8))
        self.assertEqual(window[self.row, self.col], 0.0)
        self.assertAlmostEqual(window[self.row, self.col + 100], np.exp(-1.0), places=9)
        self.assertGreaterEqual(window.min(), 0.0)
        self.assertLessEqual(window.max(), 1.0)

    def test_apodization_rises_then_falls(self):
        """Test a single maximum along a radius."""
        window = apodization_window(self.grid, ApodizationSpec(r0=0.8e-3, rc=0.2e-3))
        cut = window[self.row, self.col:]
        peak = int(np.argmax(cut))
        self.assertTrue(np.all(np.diff(cut[:peak + 1]) >= 0))
        self.assertTrue(np.all(np.diff(cut[peak:]) <= 0))

    def test_apodization_spec_constraints(self):
        """Test r0 > rc > 0 and exponents >= 1."""
        with self.assertRaises(MaskError):
            ApodizationSpec(r0=1e-3, rc=2e-3)
        with self.assertRaises(MaskError):
            ApodizationSpec(r0=1e-3, rc=1e-4, p_out=0.5)

    def test_aperture_window(self):
        """Test a hard-edge disk of the requested diameter."""
        window = aperture_window(self.grid, 1e-3)
        self.assertEqual(window[self.row, self.col + 49], 1.0)
        self.assertEqual(window[self.row, self.col + 51], 0.0)
        self.assertEqual(set(np.unique(window)), {0.0, 1.0})
