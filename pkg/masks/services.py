"""
DOE synthesis

Phase profiles, binary masks and height maps for the forked grating,
the spiral phase plate and the binary spiral axicon, plus the windows
(aperture, apodization) that shape the beam around them.

Azimuth is the two-argument arctangent measured counterclockwise from +x.
"""

import logging
from typing import Tuple

import numpy as np

from wavefield.grid import GridSpec
from wavefield.services import coordinates, polar

from .specs import (
    ApodizationSpec,
    AxiconSpec,
    ForkGratingSpec,
    MaskError,
    MaskSamplingError,
    SPPSpec,
)

logger = logging.getLogger(__name__)

# Minimum samples per period of a periodic DOE feature
MIN_PERIOD_PIXELS = 4


def _check_period(grid: GridSpec, period: float, label: str):
    pitch = max(grid.dx, grid.dy)
    if period < MIN_PERIOD_PIXELS * pitch:
        raise MaskSamplingError(
            f"{label} {period:.3e} m is sampled by fewer than {MIN_PERIOD_PIXELS} pixels "
            f"(pitch {pitch:.3e} m)"
        )


def aperture_window(grid: GridSpec, diameter: float) -> np.ndarray:
    """Hard-edge circular aperture: 1.0 where r <= diameter/2, 0.0 elsewhere."""
    if not np.isfinite(diameter) or diameter <= 0:
        raise MaskError(f"Aperture diameter must be positive (got {diameter})")
    R, _ = polar(grid)
    return (R <= diameter / 2).astype(np.float64)


def fork_phase(grid: GridSpec, spec: ForkGratingSpec) -> np.ndarray:
    """
    Continuous fork-grating phase 2 pi x / x0 + m * azimuth.

    Args:
        grid: Sampling of the DOE plane
        spec: Grating parameters

    Returns:
        np.ndarray: Phase in radians, shape (ny, nx)

    Raises:
        MaskSamplingError: If the period spans fewer than 4 pixels
    """
    _check_period(grid, spec.x0, 'Grating period')
    X, Y = coordinates(grid)
    return 2 * np.pi * X / spec.x0 + spec.m * np.arctan2(Y, X)


def binarize(phase: np.ndarray, alpha: float = 1.0, threshold: float = 0.5) -> np.ndarray:
    """
    Threshold the cosine transmission 0.5 * alpha * (1 + cos(phase)).

    Returns:
        np.ndarray: uint8 mask, 1 where the transmission exceeds the threshold
    """
    if not 0 < alpha <= 1:
        raise MaskError(f"alpha must lie in (0, 1] (got {alpha})")
    if not 0 <= threshold <= alpha:
        raise MaskError(f"threshold must lie in [0, alpha={alpha}] (got {threshold})")
    transmission = 0.5 * alpha * (1 + np.cos(np.asarray(phase, dtype=np.float64)))
    return (transmission > threshold).astype(np.uint8)


def binary_to_phase(mask: np.ndarray, depth: float = np.pi) -> np.ndarray:
    """Two-level phase: 0 where the mask is 0, depth where it is 1."""
    mask = np.asarray(mask)
    if not np.all((mask == 0) | (mask == 1)):
        raise MaskError("Binary mask values must be 0 or 1")
    return mask.astype(np.float64) * depth


def fill_factor(mask: np.ndarray) -> float:
    return float(np.count_nonzero(mask)) / mask.size


def spp_step_height(spec: SPPSpec) -> Tuple[float, float]:
    """
    Relief heights of a spiral phase plate.

    Returns:
        tuple: (h_s, delta_h) total ramp height and per-sector step in meters
    """
    return spec.total_height, spec.step_height


def spp_phase(grid: GridSpec, spec: SPPSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Phase and height map of a spiral phase plate.

    The azimuth is wrapped to [0, 2 pi) and quantized to sector
    s = floor(theta * sectors / 2 pi). The stepped profile gives phase
    ell * (2 pi / sectors) * s and height delta_h * s + h0; negative
    charges use the mirrored staircase so heights stay >= h0. The helical
    profile replaces the staircase by the continuous ramp ell * theta.
    Both carry the constant 2 pi n_plate h0 / lambda inside the aperture.
    Outside the aperture the phase is 0 and the height h0.

    Args:
        grid: Sampling of the plate plane
        spec: Plate parameters

    Returns:
        tuple: (phase in radians, height in meters)

    Raises:
        MaskError: If the aperture does not fit inside the grid window
    """
    if spec.aperture_d > min(grid.window):
        raise MaskError(
            f"SPP aperture {spec.aperture_d:.4e} m exceeds the grid window "
            f"{min(grid.window):.4e} m"
        )

    R, theta = polar(grid)
    theta = np.mod(theta, 2 * np.pi)
    inside = R <= spec.aperture_d / 2
    offset = 2 * np.pi * spec.n_plate * spec.h0 / spec.wavelength
    h_s, delta_h = spp_step_height(spec)

    if spec.profile == 'helical':
        ramp = theta / (2 * np.pi)
        phase = spec.ell * theta + offset
        if spec.ell >= 0:
            height = h_s * ramp + spec.h0
        else:
            height = abs(h_s) * (1 - ramp) + spec.h0
    else:
        sector = np.minimum(np.floor(theta * spec.sectors / (2 * np.pi)), spec.sectors - 1)
        phase = spec.ell * (2 * np.pi / spec.sectors) * sector + offset
        if spec.ell >= 0:
            height = delta_h * sector + spec.h0
        else:
            height = abs(delta_h) * (spec.sectors - 1 - sector) + spec.h0

    phase = np.where(inside, phase, 0.0)
    height = np.where(inside, height, spec.h0)

    logger.debug(
        f"SPP ell={spec.ell} sectors={spec.sectors} profile={spec.profile}: "
        f"h_s={h_s * 1e6:.3f} um, step={delta_h * 1e9:.1f} nm"
    )
    return phase, height


def axicon_phase(grid: GridSpec, spec: AxiconSpec) -> np.ndarray:
    """
    Binary spiral axicon with levels {0, pi}.

    The level is pi where sin(m * azimuth - k_r * r) >= 0 and 0 elsewhere;
    pixels outside the aperture get 0.

    Raises:
        MaskSamplingError: If the radial period spans fewer than 4 pixels
    """
    _check_period(grid, spec.period, 'Axicon period')
    R, theta = polar(grid)
    level = np.where(np.sin(spec.m * theta - spec.k_r * R) >= 0, np.pi, 0.0)
    return np.where(R <= spec.aperture_d / 2, level, 0.0)


def binary_layer_thickness(wavelength: float, n: float) -> float:
    """
    Etch depth that produces a pi phase step, lambda / (2 (n - 1)).

    Raises:
        MaskError: If n <= 1
    """
    if n <= 1:
        raise MaskError(f"Refractive index must exceed 1 for a pi step (got {n})")
    return wavelength / (2 * (n - 1))


def apodization_window(grid: GridSpec, spec: ApodizationSpec) -> np.ndarray:
    """
    Ring-shaped window exp(-(R/r0)^p) * (1 - exp(-(R/rc)^q)).

    Zero on axis, peaking between rc and r0 and decaying outside r0.
    """
    R, _ = polar(grid)
    outer = np.exp(-(R / spec.r0) ** spec.p_out)
    inner = 1 - np.exp(-(R / spec.rc) ** spec.q_in)
    return outer * inner


def predicted_charge(order: int, m: int) -> int:
    """Topological charge carried by diffraction order n of a charge-m fork: n * m."""
    return int(order) * int(m)


def bessel_zone_length(aperture_d: float, period: float, wavelength: float) -> float:
    """
    Geometric non-diffracting range of an axicon, (D/2) / tan(asin(lambda/p)).

    Raises:
        MaskError: If the period does not diffract (lambda >= p)
    """
    if not aperture_d > 0 or not period > 0:
        raise MaskError("Aperture and period must be positive")
    if wavelength >= period:
        raise MaskError(
            f"Period {period:.3e} m is not longer than the wavelength {wavelength:.3e} m"
        )
    return (aperture_d / 2) / np.tan(np.arcsin(wavelength / period))
