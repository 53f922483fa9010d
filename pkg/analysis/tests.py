from unittest import skipUnless

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase, override_settings
from numpy.polynomial.hermite import hermval
from scipy.signal import find_peaks

from masks.services import binarize, binary_to_phase, fork_phase, spp_phase
from masks.specs import ForkGratingSpec, SPPSpec
from propagation.services import LensSpec, PropagationPlan, apply_lens, propagate
from wavefield.grid import Field, GridSpec, IntensityMap
from wavefield.services import (
    apply_mask,
    coordinates,
    energy,
    gaussian_source,
    intensity,
    laguerre_gaussian_source,
    polar,
)

from .services import (
    AnalysisError,
    AnnulusRegion,
    FringeCountError,
    NotARingError,
    OrderOverlapError,
    OrderRegion,
    beam_centroid,
    beam_widths,
    conversion_efficiency,
    count_hg_fringes,
    count_ring_lobes,
    dominant_charge,
    extract_order,
    oam_spectrum,
    order_powers,
    radial_profile,
    ring_width,
    stripe_orientation,
)

UV = 266e-9
PERIOD = 128e-6
FOCAL_LENGTH = 0.3


def ring_map(grid, r0, width, m=0, offset=0.0):
    R, theta = polar(grid)
    values = np.exp(-((R - r0) / width) ** 2)
    if m:
        values = values * (1 + np.cos(m * theta + offset))
    return IntensityMap(grid, values)


def hg_map(grid, ell, a, b, sign=1):
    """|H_l(x/a - sign * y/b)|^2 exp(-2 (x^2/a^2 + y^2/b^2)), the focal pattern of a converted vortex."""
    R, theta = polar(grid)
    t = R * np.cos(theta) / a
    v = R * np.sin(theta) / b
    coefficients = [0] * ell + [1]
    values = hermval(t - sign * v, coefficients) ** 2 * np.exp(-2 * (t ** 2 + v ** 2))
    return IntensityMap(grid, values)


def rotated_hg(grid, n, w, angle):
    """HG_{n,0} intensity with its stripes stacked along the direction at `angle` from x."""
    X, Y = coordinates(grid)
    s = X * np.cos(angle) + Y * np.sin(angle)
    t = -X * np.sin(angle) + Y * np.cos(angle)
    coefficients = [0] * n + [1]
    values = hermval(np.sqrt(2) * s / w, coefficients) ** 2 * np.exp(-2 * (s ** 2 + t ** 2) / w ** 2)
    return IntensityMap(grid, values)


def fork_focus(threshold, encoding='phase'):
    """Focal-plane field behind a binary m=2 fork; every sampled order lands inside the grid."""
    grid = GridSpec.square(1024, 8e-6, UV)
    source = gaussian_source(grid, w0=0.5e-3)
    mask = binarize(fork_phase(grid, ForkGratingSpec(m=2, x0=PERIOD)), 1.0, threshold)
    if encoding == 'phase':
        masked = apply_mask(source, binary_to_phase(mask))
    else:
        masked = apply_mask(source, np.zeros(grid.shape), mask.astype(np.float64))
    lensed = apply_lens(masked, LensSpec(focal_length=FOCAL_LENGTH))
    return source, propagate(lensed, PropagationPlan(z=FOCAL_LENGTH, band_limit=False))


class BeamMomentsTest(SimpleTestCase):
    """Test cases for beam_centroid and beam_widths."""

    def test_gaussian_width_is_waist(self):
        """Test that the second-moment radius of a Gaussian equals w0 within 1%."""
        grid = GridSpec.square(256, 10e-6, UV)
        imap = intensity(gaussian_source(grid, w0=300e-6))
        wx, wy = beam_widths(imap)
        self.assertLess(abs(wx - 300e-6) / 300e-6, 0.01)
        self.assertLess(abs(wy - 300e-6) / 300e-6, 0.01)

    def test_centroid_of_offset_spot(self):
        """Test the centroid of a single bright pixel."""
        grid = GridSpec.square(32, 1e-6, UV)
        values = np.zeros(grid.shape)
        values[20, 10] = 3.0
        x, y = beam_centroid(IntensityMap(grid, values))
        self.assertAlmostEqual(x, -6e-6, places=15)
        self.assertAlmostEqual(y, 4e-6, places=15)

    def test_zero_map(self):
        """Test that a zero map raises AnalysisError."""
        grid = GridSpec.square(16, 1e-6, UV)
        with self.assertRaises(AnalysisError):
            beam_centroid(IntensityMap(grid, np.zeros(grid.shape)))


class RadialProfileTest(SimpleTestCase):
    """Test cases for radial_profile and ring_width."""

    def setUp(self):
        self.grid = GridSpec.square(256, 10e-6, UV)

    def test_gaussian_profile_at_waist(self):
        """Test that the profile at r = w0 is e^-2 of the peak within 2%."""
        profile = radial_profile(intensity(gaussian_source(self.grid, w0=400e-6)))
        ratio = profile.value_at(400e-6) / profile.values.max()
        self.assertLess(abs(ratio / np.exp(-2.0) - 1), 0.02)

    def test_uniform_map_is_flat(self):
        """Test that a uniform map gives equal bins."""
        profile = radial_profile(IntensityMap(self.grid, np.ones(self.grid.shape)), n_bins=64)
        self.assertLess(profile.values.max() - profile.values.min(), 1e-12)
        self.assertTrue(np.all(profile.counts > 0))

    def test_bins_increase_and_cover_range(self):
        """Test strictly increasing bin centers covering [0, r_max]."""
        profile = radial_profile(
            intensity(gaussian_source(self.grid, w0=400e-6)), center=(0.0, 0.0), n_bins=50, r_max=1e-3
        )
        self.assertTrue(np.all(np.diff(profile.bin_centers) > 0))
        self.assertAlmostEqual(profile.bin_centers[0], 10e-6, places=12)
        self.assertAlmostEqual(profile.bin_centers[-1] + profile.bin_width / 2, 1e-3, places=12)
        self.assertGreaterEqual(profile.values.min(), 0.0)

    def test_empty_bins_are_zero(self):
        """Test that bins narrower than a pixel can be empty and read zero."""
        profile = radial_profile(
            IntensityMap(self.grid, np.ones(self.grid.shape)), center=(0.0, 0.0), n_bins=400, r_max=200e-6
        )
        empty = profile.counts == 0
        self.assertTrue(np.any(empty))
        self.assertTrue(np.all(profile.values[empty] == 0.0))

    def test_vortex_profile_has_dark_core(self):
        """Test a single interior maximum and a dark center for l = 4."""
        imap = intensity(laguerre_gaussian_source(self.grid, w0=300e-6, ell=4))
        profile = radial_profile(imap, center=(0.0, 0.0))
        self.assertLess(profile.values[0], 0.01 * profile.values.max())
        peaks, _ = find_peaks(
            profile.values, height=1e-3 * profile.values.max(), prominence=0.01 * profile.values.max()
        )
        self.assertEqual(len(peaks), 1)

    def test_center_outside_grid(self):
        """Test that a center off the grid raises AnalysisError."""
        imap = IntensityMap(self.grid, np.ones(self.grid.shape))
        with self.assertRaises(AnalysisError):
            radial_profile(imap, center=(5e-3, 0.0))

    def test_too_few_bins(self):
        """Test that fewer than 8 bins is rejected."""
        imap = IntensityMap(self.grid, np.ones(self.grid.shape))
        with self.assertRaises(AnalysisError):
            radial_profile(imap, n_bins=4)

    def test_ring_width(self):
        """Test the FWHM of a Gaussian ring, 2 sqrt(ln 2) sigma, within one bin."""
        profile = radial_profile(ring_map(self.grid, 600e-6, 80e-6), center=(0.0, 0.0))
        expected = 2 * np.sqrt(np.log(2)) * 80e-6
        self.assertLess(abs(ring_width(profile) - expected), 10e-6)

    def test_ring_width_needs_ring(self):
        """Test that a centered spot has no ring width."""
        profile = radial_profile(intensity(gaussian_source(self.grid, w0=300e-6)), center=(0.0, 0.0))
        with self.assertRaises(NotARingError):
            ring_width(profile)


class OAMSpectrumTest(SimpleTestCase):
    """Test cases for oam_spectrum."""

    def setUp(self):
        self.grid = GridSpec.square(256, 5e-6, UV)

    def test_single_vortex(self):
        """Test P_3 >= 0.99 for an l = 3 ring."""
        spectrum = oam_spectrum(laguerre_gaussian_source(self.grid, w0=200e-6, ell=3), -10, 10)
        self.assertEqual(spectrum.dominant_ell, 3)
        self.assertGreaterEqual(spectrum.power_of(3), 0.99)
        self.assertAlmostEqual(spectrum.power.sum(), 1.0, places=9)
        self.assertFalse(spectrum.range_warning)

    def test_plain_gaussian(self):
        """Test P_0 >= 0.99 for a Gaussian."""
        spectrum = oam_spectrum(gaussian_source(self.grid, w0=200e-6), -5, 5)
        self.assertEqual(spectrum.dominant_ell, 0)
        self.assertGreaterEqual(spectrum.power_of(0), 0.99)
        self.assertLess(spectrum.bandwidth, 0.2)

    def test_dominant_charge_for_all_small_charges(self):
        """Test dominant_ell = l exactly for l in -8..8."""
        for ell in range(-8, 9):
            spectrum = oam_spectrum(laguerre_gaussian_source(self.grid, w0=200e-6, ell=ell), -12, 12)
            self.assertEqual(spectrum.dominant_ell, ell)

    def test_global_phase_invariance(self):
        """Test that a global phase changes no P_l by more than 1e-12."""
        field = laguerre_gaussian_source(self.grid, w0=200e-6, ell=2)
        mixed = field.with_amplitude(field.amplitude + 0.5 * gaussian_source(self.grid, 150e-6).amplitude)
        rotated = mixed.with_amplitude(mixed.amplitude * np.exp(0.83j))
        a = oam_spectrum(mixed, -6, 6)
        b = oam_spectrum(rotated, -6, 6)
        self.assertLess(np.abs(a.power - b.power).max(), 1e-12)

    def test_image_rotation_invariance(self):
        """Test that a 90 degree image rotation keeps P_l within 1e-3."""
        first = laguerre_gaussian_source(self.grid, w0=200e-6, ell=2).amplitude
        second = laguerre_gaussian_source(self.grid, w0=150e-6, ell=-1).amplitude
        values = first + 0.7 * second
        rotated = np.zeros_like(values)
        rotated[1:, 1:] = np.rot90(values[1:, 1:])
        a = oam_spectrum(Field(self.grid, values), -6, 6)
        b = oam_spectrum(Field(self.grid, rotated), -6, 6)
        self.assertLess(np.abs(a.power - b.power).max(), 1e-3)

    def test_mean_and_bandwidth_of_mixture(self):
        """Test the mean charge and spread of a two-mode superposition."""
        values = (
            laguerre_gaussian_source(self.grid, w0=200e-6, ell=1).amplitude
            + laguerre_gaussian_source(self.grid, w0=200e-6, ell=3).amplitude
        )
        spectrum = oam_spectrum(Field(self.grid, values), -8, 8)
        p1, p3 = spectrum.power_of(1), spectrum.power_of(3)
        self.assertGreater(p1 + p3, 0.99)
        expected_mean = (p1 + 3 * p3) / (p1 + p3)
        self.assertAlmostEqual(spectrum.mean_ell, expected_mean, places=2)
        self.assertGreater(spectrum.bandwidth, 0.5)

    def test_range_warning(self):
        """Test the warning flag when the strongest charge is outside the range."""
        spectrum = oam_spectrum(laguerre_gaussian_source(self.grid, w0=200e-6, ell=5), -2, 2)
        self.assertTrue(spectrum.range_warning)

    def test_zero_field(self):
        """Test that a zero field raises AnalysisError."""
        with self.assertRaises(AnalysisError):
            oam_spectrum(Field(self.grid, np.zeros(self.grid.shape)), -2, 2)

    @override_settings(OAM_AZIMUTH_SAMPLES=32)
    def test_range_beyond_angular_sampling(self):
        """Test that a range wider than the azimuthal sampling is rejected."""
        with self.assertRaises(AnalysisError):
            oam_spectrum(gaussian_source(self.grid, 200e-6), -20, 20)

    def test_tie_breaking(self):
        """Test smallest |l| first, then the positive sign."""
        ells = np.array([-2, -1, 0, 1, 2])
        self.assertEqual(dominant_charge(ells, np.array([0.3, 0.0, 0.1, 0.3, 0.3])), 1)
        self.assertEqual(dominant_charge(ells, np.array([0.4, 0.0, 0.1, 0.1, 0.4])), 2)
        self.assertEqual(dominant_charge(ells, np.array([0.5, 0.0, 0.0, 0.0, 0.5])), 2)


class RingLobeTest(SimpleTestCase):
    """Test cases for count_ring_lobes."""

    def setUp(self):
        self.grid = GridSpec.square(256, 10e-6, UV)

    def test_three_lobes(self):
        """Test three lobes at the expected azimuths."""
        report = count_ring_lobes(ring_map(self.grid, 600e-6, 80e-6, m=3, offset=0.3))
        self.assertEqual(report.n_lobes, 3)
        expected = sorted(np.mod((2 * np.pi * np.arange(3) - 0.3) / 3, 2 * np.pi))
        np.testing.assert_allclose(report.lobe_angles, expected, atol=0.02)
        self.assertLess(abs(report.ring_radius - 600e-6), 30e-6)

    def test_ten_lobes(self):
        """Test ten lobes on a fragmented ring."""
        report = count_ring_lobes(ring_map(self.grid, 600e-6, 80e-6, m=10))
        self.assertEqual(report.n_lobes, 10)
        self.assertEqual(len(report.lobe_angles), 10)
        self.assertTrue(all(0 <= a < 2 * np.pi for a in report.lobe_angles))
        self.assertEqual(report.lobe_angles, sorted(report.lobe_angles))

    def test_smooth_ring_has_no_lobes(self):
        """Test that an ideal vortex ring shows no lobes above threshold."""
        imap = intensity(laguerre_gaussian_source(self.grid, w0=400e-6, ell=3))
        self.assertEqual(count_ring_lobes(imap).n_lobes, 0)

    def test_spot_is_not_a_ring(self):
        """Test that a Gaussian spot raises NotARingError."""
        with self.assertRaises(NotARingError):
            count_ring_lobes(intensity(gaussian_source(self.grid, w0=300e-6)))


class HGFringeTest(SimpleTestCase):
    """Test cases for count_hg_fringes and stripe_orientation."""

    def setUp(self):
        self.grid = GridSpec.square(256, 1e-6, UV)

    def test_counts_follow_charge(self):
        """Test N = l + 1 stripes for l = 0, 1, 2 and 4."""
        for ell in (0, 1, 2, 4):
            imap = hg_map(self.grid, ell, a=8e-6, b=25e-6)
            self.assertEqual(count_hg_fringes(imap), ell + 1)

    def test_counts_at_any_rotation(self):
        """Test N = n + 1 for HG_{n,0} stripes stacked along 0, 20, 45, 70 and 90 degrees."""
        for n in (1, 2, 4):
            for degrees in (0, 20, 45, 70, 90):
                with self.subTest(n=n, degrees=degrees):
                    imap = rotated_hg(self.grid, n, 20e-6, np.radians(degrees))
                    self.assertEqual(count_hg_fringes(imap), n + 1)

    def test_orientation_follows_rotation(self):
        """Test that the reported angle is the stacking direction of the stripes."""
        for degrees in (0, 20, -35, 70):
            angle = stripe_orientation(rotated_hg(self.grid, 2, 20e-6, np.radians(degrees)))
            self.assertAlmostEqual(angle, np.radians(degrees), delta=np.radians(0.5))

    def test_orientation_flips_with_sign(self):
        """Test that mirrored stripe patterns tilt in opposite directions."""
        plus = stripe_orientation(hg_map(self.grid, 2, a=8e-6, b=25e-6, sign=1))
        minus = stripe_orientation(hg_map(self.grid, 2, a=8e-6, b=25e-6, sign=-1))
        self.assertLess(plus * minus, 0)
        self.assertAlmostEqual(plus, -minus, places=3)

    def test_round_spot_rejected(self):
        """Test that a round spot without fringes is not a converted vortex."""
        with self.assertRaisesMessage(FringeCountError, 'degenerate'):
            count_hg_fringes(intensity(gaussian_source(self.grid, w0=30e-6)))


class OrderExtractionTest(SimpleTestCase):
    """Test cases for extract_order, order_powers and conversion_efficiency."""

    def test_zeroth_order_of_plain_gaussian(self):
        """Test that order 0 of an ungrated focus keeps all the energy."""
        grid = GridSpec.square(1024, 8e-6, UV)
        lensed = apply_lens(gaussian_source(grid, w0=0.5e-3), LensSpec(focal_length=FOCAL_LENGTH))
        focus = propagate(lensed, PropagationPlan(z=FOCAL_LENGTH, band_limit=False))
        order = extract_order(focus, 0, PERIOD, FOCAL_LENGTH)
        self.assertGreater(energy(order) / energy(focus), 0.999)

    def test_first_order_carries_grating_charge(self):
        """Test order +1 of an m = 2 fork carries l = 2 and order -1 carries l = -2."""
        _, focus = fork_focus(0.5)
        self.assertEqual(oam_spectrum(extract_order(focus, 1, PERIOD, FOCAL_LENGTH), -10, 10).dominant_ell, 2)
        self.assertEqual(oam_spectrum(extract_order(focus, -1, PERIOD, FOCAL_LENGTH), -10, 10).dominant_ell, -2)

    def test_fourth_order_carries_eight(self):
        """Test order -4 of an m = 2 fork carries l = -8 at 42% duty cycle."""
        _, focus = fork_focus(0.625)
        order = extract_order(focus, -4, PERIOD, FOCAL_LENGTH)
        self.assertEqual(oam_spectrum(order, -12, 12).dominant_ell, -8)

    def test_order_powers_of_binary_phase_fork(self):
        """Test the +-1 orders near 4/pi^2 and a suppressed zeroth order."""
        _, focus = fork_focus(0.5)
        powers = order_powers(focus, [-2, -1, 0, 1, 2], PERIOD, FOCAL_LENGTH)
        for n in (-1, 1):
            self.assertGreater(powers[n], 0.30)
            self.assertLess(powers[n], 4 / np.pi ** 2 + 0.005)
        self.assertLess(powers[0], 0.01)
        self.assertLess(powers[2], 0.01)

    def test_efficiency_of_lossless_fork(self):
        """Test all orders together carry the input energy and one order less than half."""
        source, focus = fork_focus(0.5)
        self.assertAlmostEqual(conversion_efficiency(source, focus), 1.0, places=6)
        self.assertAlmostEqual(conversion_efficiency(source, focus, 'all'), 1.0, places=6)
        first = conversion_efficiency(source, focus, OrderRegion(1, PERIOD, FOCAL_LENGTH))
        self.assertLess(first, 0.5)

    def test_amplitude_fork_first_order_below_half(self):
        """Test that an amplitude fork sends well under half the power into order 1."""
        source, focus = fork_focus(0.5, encoding='amplitude')
        first = conversion_efficiency(source, focus, OrderRegion(1, PERIOD, FOCAL_LENGTH))
        self.assertLess(first, 0.15)

    def test_overlapping_window(self):
        """Test that a window wider than half the spacing raises OrderOverlapError."""
        _, focus = fork_focus(0.5)
        with self.assertRaises(OrderOverlapError):
            extract_order(focus, 1, PERIOD, FOCAL_LENGTH, half_width=400e-6)

    def test_window_outside_grid(self):
        """Test that an order beyond the grid edge is rejected."""
        _, focus = fork_focus(0.5)
        with self.assertRaises(AnalysisError):
            extract_order(focus, 7, PERIOD, FOCAL_LENGTH)

    def test_spp_ring_efficiency(self):
        """Test that a helical l = 4 plate puts >= 80% of the power in its focal ring."""
        grid = GridSpec.square(512, 10e-6, UV)
        source = gaussian_source(grid, w0=1e-3)
        phase, _ = spp_phase(grid, SPPSpec(
            ell=4, sectors=64, wavelength=UV, n_plate=1.49, aperture_d=5e-3, profile='helical'
        ))
        lensed = apply_lens(apply_mask(source, phase), LensSpec(focal_length=0.5))
        focus = propagate(lensed, PropagationPlan(z=0.5))
        r_peak = radial_profile(intensity(focus), center=(0.0, 0.0)).peak_radius
        efficiency = conversion_efficiency(source, focus, AnnulusRegion(0.25 * r_peak, 6 * r_peak))
        self.assertGreaterEqual(efficiency, 0.8)
        self.assertLessEqual(efficiency, 1.0 + 1e-3)

    def test_zero_input_energy(self):
        """Test that a dark input raises AnalysisError."""
        grid = GridSpec.square(16, 1e-6, UV)
        dark = Field(grid, np.zeros(grid.shape))
        with self.assertRaises(AnalysisError):
            conversion_efficiency(dark, dark)


@skipUnless(settings.RUN_SLOW_TESTS, 'Set RUN_SLOW_TESTS=True for full-scale runs')
class FullScaleForkOrdersTest(SimpleTestCase):
    """Orders of an m = 2 binary fork on a 2048 grid behind an f = 0.2 m lens."""

    def setUp(self):
        grid = GridSpec.square(2048, 4e-6, UV)
        self.period = 104e-6
        self.focal_length = 0.2
        source = gaussian_source(grid, w0=1.5e-3)
        mask = binarize(fork_phase(grid, ForkGratingSpec(m=2, x0=self.period)), 1.0, 0.625)
        lensed = apply_lens(apply_mask(source, binary_to_phase(mask)), LensSpec(self.focal_length))
        self.focus = propagate(lensed, PropagationPlan(z=self.focal_length, band_limit=False))

    def test_orders_carry_twice_their_index(self):
        """Test dominant l = 2n with at least 80% of the window power."""
        for n in (1, 2, -1, -2, -3, -4):
            order = extract_order(self.focus, n, self.period, self.focal_length)
            spectrum = oam_spectrum(order, -16, 16)
            self.assertEqual(spectrum.dominant_ell, 2 * n)
            self.assertGreaterEqual(spectrum.power_of(2 * n), 0.8)
