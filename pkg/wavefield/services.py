"""
Field primitives

Gaussian and Laguerre-Gaussian sources, mask application and the
energy/intensity reductions every other module builds on.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from .grid import Field, FieldError, GridSpec, IntensityMap, SamplingError

logger = logging.getLogger(__name__)

# Minimum number of pixels across a source waist
MIN_WAIST_PIXELS = 4


def coordinates(grid: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Transverse coordinates of every sample.

    Args:
        grid: Sampling of the plane

    Returns:
        tuple: (X, Y) arrays of shape (ny, nx) in meters, zero on the optical axis
    """
    x = (np.arange(grid.nx) - grid.nx // 2) * grid.dx
    y = (np.arange(grid.ny) - grid.ny // 2) * grid.dy
    return np.meshgrid(x, y)


def polar(grid: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Radius and full-range azimuth in (-pi, pi]; the axis sample gets azimuth 0."""
    X, Y = coordinates(grid)
    return np.hypot(X, Y), np.arctan2(Y, X)


def _check_waist(grid: GridSpec, w0: float):
    if not np.isfinite(w0) or w0 <= 0:
        raise FieldError(f"Beam waist must be positive (got {w0})")
    pitch = max(grid.dx, grid.dy)
    if w0 < MIN_WAIST_PIXELS * pitch:
        raise SamplingError(
            f"Waist {w0:.3e} m is resolved by fewer than {MIN_WAIST_PIXELS} pixels "
            f"of pitch {pitch:.3e} m"
        )


def gaussian_source(grid: GridSpec, w0: float, e0: float = 1.0) -> Field:
    """
    Real, positive Gaussian beam e0 * exp(-(x^2 + y^2) / w0^2).

    Args:
        grid: Sampling of the plane
        w0: 1/e^2 intensity radius in meters
        e0: Peak field amplitude

    Returns:
        Field: Gaussian centered on the optical axis

    Raises:
        SamplingError: If the waist spans fewer than 4 pixels
    """
    _check_waist(grid, w0)
    X, Y = coordinates(grid)
    amplitude = e0 * np.exp(-(X ** 2 + Y ** 2) / w0 ** 2)
    return Field(grid, amplitude.astype(np.complex128))


def laguerre_gaussian_source(grid: GridSpec, w0: float, ell: int, e0: float = 1.0) -> Field:
    """
    Ideal LG_0^ell mode at its waist, scaled so the peak modulus is e0.

    The amplitude (sqrt(2) r / w0)^|ell| exp(-r^2 / w0^2) is evaluated in
    log space so that high charges do not overflow.
    """
    _check_waist(grid, w0)
    R, theta = polar(grid)
    order = abs(int(ell))
    rho2 = 2.0 * R ** 2 / w0 ** 2
    if order == 0:
        log_amplitude = -rho2 / 2.0
    else:
        with np.errstate(divide='ignore'):
            log_amplitude = 0.5 * order * np.log(rho2) - rho2 / 2.0
    log_amplitude -= log_amplitude.max()
    amplitude = e0 * np.exp(log_amplitude) * np.exp(1j * int(ell) * theta)
    return Field(grid, amplitude)


def apply_mask(field: Field, phase: np.ndarray, amplitude_window: Optional[np.ndarray] = None) -> Field:
    """
    Multiply a field by exp(i * phase) and an optional real window.

    Args:
        field: Incident field
        phase: Phase profile in radians, grid-shaped
        amplitude_window: Optional transmission in [0, 1], grid-shaped

    Returns:
        Field: Transmitted field

    Raises:
        FieldError: On shape mismatch or a window outside [0, 1]
    """
    phase = np.asarray(phase, dtype=np.float64)
    if phase.shape != field.grid.shape:
        raise FieldError(f"Phase shape {phase.shape} does not match field shape {field.grid.shape}")
    out = field.amplitude * np.exp(1j * phase)
    if amplitude_window is not None:
        window = np.asarray(amplitude_window, dtype=np.float64)
        if window.shape != field.grid.shape:
            raise FieldError(
                f"Window shape {window.shape} does not match field shape {field.grid.shape}"
            )
        if np.any(window < 0) or np.any(window > 1):
            raise FieldError("Amplitude window values must lie in [0, 1]")
        out = out * window
    return field.with_amplitude(out)


def energy(field: Field) -> float:
    """Return dx * dy * sum |E|^2 (field units squared times m^2)."""
    return float(field.grid.dx * field.grid.dy * np.sum(np.abs(field.amplitude) ** 2))


def intensity(field: Field, normalize: bool = False) -> IntensityMap:
    """
    Pointwise |E|^2, optionally scaled to unit peak.

    Raises:
        FieldError: If normalize is requested on an identically zero field
    """
    values = np.abs(field.amplitude) ** 2
    if normalize:
        peak = values.max()
        if peak <= 0:
            raise FieldError("Cannot normalize the intensity of an identically zero field")
        values = values / peak
    return IntensityMap(field.grid, values)
