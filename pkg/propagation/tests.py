from unittest import skipUnless

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from analysis.services import beam_widths, count_hg_fringes, oam_spectrum, stripe_orientation
from wavefield.grid import Field, GridSpec
from wavefield.services import (
    apply_mask,
    coordinates,
    energy,
    gaussian_source,
    intensity,
    laguerre_gaussian_source,
)

from .services import (
    LensAliasingError,
    LensSpec,
    PropagationError,
    PropagationPlan,
    apply_lens,
    band_limit_distance,
    band_limit_frequency,
    mode_convert,
    propagate,
)

UV = 266e-9


def relative_l2(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


class PropagationPlanTest(SimpleTestCase):
    """Test cases for PropagationPlan and LensSpec validation."""

    def test_rejects_unknown_method(self):
        """Test that only paraxial and exact are accepted."""
        with self.assertRaises(PropagationError):
            PropagationPlan(z=1.0, method='fresnel-direct')

    def test_rejects_infinite_distance(self):
        """Test that z must be finite."""
        with self.assertRaises(PropagationError):
            PropagationPlan(z=np.inf)

    def test_lens_requires_nonzero_focal_length(self):
        """Test that f = 0 is rejected."""
        with self.assertRaises(PropagationError):
            LensSpec(focal_length=0.0)
        with self.assertRaises(PropagationError):
            LensSpec(focal_length=0.1, kind='cylindrical', axis='z')


class BandLimitTest(SimpleTestCase):
    """Test cases for the spectral cutoff."""

    def setUp(self):
        self.grid = GridSpec.square(512, 10e-6, UV)

    def test_short_distance_keeps_nyquist(self):
        """Test that below W^2 / (n lambda) the cutoff is the Nyquist frequency."""
        z = 0.5 * band_limit_distance(self.grid)
        self.assertAlmostEqual(band_limit_frequency(self.grid, z), 1 / (2 * 10e-6))

    def test_long_distance_lowers_cutoff(self):
        """Test that the cutoff falls as W / (2 lambda z) beyond the threshold."""
        z = 4 * band_limit_distance(self.grid)
        expected = 512 * 10e-6 / (2 * UV * z)
        self.assertAlmostEqual(band_limit_frequency(self.grid, z), expected)
        self.assertLess(expected, 1 / (2 * 10e-6))

    def test_threshold_matches_crossover(self):
        """Test that both cutoffs agree at the automatic threshold."""
        z = band_limit_distance(self.grid)
        self.assertAlmostEqual(512 * 10e-6 / (2 * UV * z), 1 / (2 * 10e-6))


class PropagateTest(SimpleTestCase):
    """Test cases for propagate."""

    def setUp(self):
        self.grid = GridSpec.square(128, 10e-6, UV)
        X, Y = coordinates(self.grid)
        phase = 2 * np.pi * X / 200e-6 + 2 * np.arctan2(Y, X)
        self.field = apply_mask(gaussian_source(self.grid, w0=250e-6), phase)

    def test_zero_distance_is_identity(self):
        """Test that z = 0 returns the input for both methods."""
        for method in ('paraxial', 'exact'):
            out = propagate(self.field, PropagationPlan(z=0.0, method=method))
            self.assertLess(relative_l2(out.amplitude, self.field.amplitude), 1e-12)

    def test_distances_compose(self):
        """Test propagate(z1) then propagate(z2) equals propagate(z1 + z2)."""
        two_step = propagate(
            propagate(self.field, PropagationPlan(z=0.05, band_limit=False)),
            PropagationPlan(z=0.07, band_limit=False),
        )
        one_step = propagate(self.field, PropagationPlan(z=0.12, band_limit=False))
        self.assertLess(relative_l2(two_step.amplitude, one_step.amplitude), 1e-10)

    def test_paraxial_is_unitary(self):
        """Test energy conservation without band limiting."""
        for z in (0.01, 0.3, -2.0):
            out = propagate(self.field, PropagationPlan(z=z, band_limit=False))
            self.assertLess(abs(energy(out) - energy(self.field)), 1e-9 * energy(self.field))

    def test_forward_then_back(self):
        """Test that propagating by z and -z recovers the input."""
        there = propagate(self.field, PropagationPlan(z=0.4, band_limit=False))
        back = propagate(there, PropagationPlan(z=-0.4, band_limit=False))
        self.assertLess(relative_l2(back.amplitude, self.field.amplitude), 1e-9)

    def test_exact_never_gains_energy(self):
        """Test that exact propagation with evanescent waves does not increase energy."""
        grid = GridSpec.square(64, 0.1e-6, UV)
        rng = np.random.default_rng(5)
        field = Field(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))
        out = propagate(field, PropagationPlan(z=1e-6, method='exact', band_limit=False))
        self.assertLess(energy(out), energy(field))

    def test_exact_matches_paraxial_for_wide_beam(self):
        """Test that both transfer functions agree on intensity for a paraxial beam."""
        grid = GridSpec.square(256, 10e-6, UV)
        field = gaussian_source(grid, w0=300e-6)
        plan = dict(z=0.2, band_limit=False)
        paraxial = intensity(propagate(field, PropagationPlan(method='paraxial', **plan))).values
        exact = intensity(propagate(field, PropagationPlan(method='exact', **plan))).values
        self.assertLess(np.abs(paraxial - exact).max(), 1e-4 * paraxial.max())

    def test_gaussian_beam_spreading(self):
        """Test w(z) = w0 sqrt(1 + (z / z_R)^2) within 1% at 0.5, 1 and 2 Rayleigh ranges."""
        grid = GridSpec.square(512, 10e-6, UV)
        w0 = 200e-6
        z_r = np.pi * w0 ** 2 / UV
        field = gaussian_source(grid, w0=w0)
        for factor in (0.5, 1.0, 2.0):
            out = propagate(field, PropagationPlan(z=factor * z_r))
            wx, wy = beam_widths(intensity(out))
            expected = w0 * np.sqrt(1 + factor ** 2)
            self.assertLess(abs(wx - expected) / expected, 0.01)
            self.assertLess(abs(wy - expected) / expected, 0.01)


class LensTest(SimpleTestCase):
    """Test cases for apply_lens."""

    def setUp(self):
        self.grid = GridSpec.square(64, 10e-6, UV)
        self.field = gaussian_source(self.grid, w0=100e-6)

    def test_weak_lens_is_nearly_identity(self):
        """Test that very long focal lengths leave the field unchanged."""
        far = apply_lens(self.field, LensSpec(focal_length=1e9))
        self.assertLess(relative_l2(far.amplitude, self.field.amplitude), 1e-9)
        near = apply_lens(self.field, LensSpec(focal_length=1e6))
        self.assertLess(relative_l2(near.amplitude, self.field.amplitude), 1e-6)

    def test_lens_preserves_energy(self):
        """Test that a thin lens is a pure phase."""
        out = apply_lens(self.field, LensSpec(focal_length=0.5))
        self.assertAlmostEqual(energy(out) / energy(self.field), 1.0, places=12)

    def test_cylindrical_lens_ignores_y_profile(self):
        """Test that an x-lens leaves a y-only field's intensity unchanged."""
        _, Y = coordinates(self.grid)
        field = Field(self.grid, np.exp(-(Y / 80e-6) ** 2))
        out = apply_lens(field, LensSpec(focal_length=0.5, kind='cylindrical', axis='x'))
        np.testing.assert_allclose(np.abs(out.amplitude) ** 2, np.abs(field.amplitude) ** 2, rtol=1e-12)

    def test_cylindrical_lens_phase_is_one_dimensional(self):
        """Test that a y-lens phase does not vary along x."""
        out = apply_lens(Field(self.grid, np.ones(self.grid.shape)), LensSpec(0.5, 'cylindrical', 'y'))
        phase = np.angle(out.amplitude)
        np.testing.assert_array_equal(phase, np.broadcast_to(phase[:, :1], phase.shape))

    def test_aliased_lens(self):
        """Test that a strong lens on a coarse grid reports the safe radius."""
        grid = GridSpec.square(512, 10e-6, UV)
        with self.assertRaisesMessage(LensAliasingError, 'within |x| <'):
            apply_lens(gaussian_source(grid, w0=500e-6), LensSpec(focal_length=0.1))

    def test_focus_at_focal_length(self):
        """Test that the second moment is smallest at z = f over a +-10% scan."""
        grid = GridSpec.square(512, 10e-6, UV)
        f = 0.5
        lensed = apply_lens(gaussian_source(grid, w0=1e-3), LensSpec(focal_length=f))
        distances = np.linspace(0.9 * f, 1.1 * f, 11)
        moments = []
        for z in distances:
            wx, wy = beam_widths(intensity(propagate(lensed, PropagationPlan(z=z))))
            moments.append(wx ** 2 + wy ** 2)
        self.assertEqual(int(np.argmin(moments)), 5)


class ModeConversionTest(SimpleTestCase):
    """Test cases for mode_convert with fringe counting."""

    def setUp(self):
        self.grid = GridSpec.square(1024, 4e-6, UV)

    def _converted(self, ell):
        source = laguerre_gaussian_source(self.grid, w0=300e-6, ell=ell)
        return intensity(mode_convert(source, f_cyl=0.1))

    def test_fringe_count_is_charge_plus_one(self):
        """Test N = |l| + 1 for l in 0, +-1, +-2, +-4."""
        for ell in (0, 1, -1, 2, -2, 4, -4):
            self.assertEqual(count_hg_fringes(self._converted(ell)), abs(ell) + 1)

    @skipUnless(settings.RUN_SLOW_TESTS, 'Set RUN_SLOW_TESTS=True for full-scale runs')
    def test_fringe_count_for_charge_eight(self):
        """Test N = 9 for l = +-8."""
        for ell in (8, -8):
            self.assertEqual(count_hg_fringes(self._converted(ell)), 9)

    def test_stripe_tilt_flips_with_sign(self):
        """Test that l = 2 and l = -2 stripes tilt in opposite directions."""
        plus = stripe_orientation(self._converted(2))
        minus = stripe_orientation(self._converted(-2))
        self.assertLess(plus * minus, 0)

    def test_defocus_moves_observation_plane(self):
        """Test that defocus equals an extra propagation step."""
        source = laguerre_gaussian_source(self.grid, w0=300e-6, ell=1)
        shifted = mode_convert(source, f_cyl=0.1, defocus=0.01, band_limit=False)
        lensed = apply_lens(source, LensSpec(0.1, 'cylindrical', 'x'))
        direct = propagate(lensed, PropagationPlan(z=0.11, band_limit=False))
        self.assertLess(relative_l2(shifted.amplitude, direct.amplitude), 1e-12)

    def test_rejects_non_positive_focal_length(self):
        """Test that f_cyl <= 0 raises PropagationError."""
        source = gaussian_source(self.grid, w0=300e-6)
        with self.assertRaises(PropagationError):
            mode_convert(source, f_cyl=-0.1)


class OAMConservationTest(SimpleTestCase):
    """Test that free space and spherical lenses keep the dominant charge."""

    def test_dominant_charge_survives_propagation_and_lens(self):
        """Test l in 1, 2, 4, 8 through propagation and a spherical lens."""
        grid = GridSpec.square(512, 5e-6, UV)
        for ell in (1, 2, 4, 8):
            source = laguerre_gaussian_source(grid, w0=200e-6, ell=ell)
            travelled = propagate(source, PropagationPlan(z=0.3))
            focused = propagate(apply_lens(source, LensSpec(focal_length=0.5)), PropagationPlan(z=0.3))
            self.assertEqual(oam_spectrum(travelled, -12, 12).dominant_ell, ell)
            self.assertEqual(oam_spectrum(focused, -12, 12).dominant_ell, ell)
