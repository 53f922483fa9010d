"""
Free-space propagation and thin lenses

Angular-spectrum propagation (paraxial Fresnel transfer function by
default, the exact Rayleigh-Sommerfeld kernel on request), thin
spherical and cylindrical lenses applied as real-space quadratic phases,
and the single-cylindrical-lens LG to HG mode converter.

Spectra use the unshifted fftfreq layout: the field is ifftshift-ed so
its axis sample sits at index (0, 0) before the FFT and shifted back
afterwards.
"""

import logging
import time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import fft

from wavefield.grid import Field, GridSpec

logger = logging.getLogger(__name__)


class PropagationError(Exception):
    """Custom exception for invalid propagation plans and lenses"""
    pass


class LensAliasingError(PropagationError):
    """Raised when a lens phase changes by more than pi per pixel inside the grid"""
    pass


METHODS = ('paraxial', 'exact')
LENS_KINDS = ('spherical', 'cylindrical')
AXES = ('x', 'y')


@dataclass(frozen=True)
class PropagationPlan:
    """
    One free-space hop.

    Attributes:
        z: Distance in meters, negative for back-propagation
        method: 'paraxial' Fresnel transfer function or 'exact' angular spectrum
        band_limit: True/False to force the spectral cutoff, None to decide from z
    """
    z: float
    method: str = 'paraxial'
    band_limit: Optional[bool] = None

    def __post_init__(self):
        if not np.isfinite(self.z):
            raise PropagationError(f"Propagation distance must be finite (got {self.z})")
        if self.method not in METHODS:
            raise PropagationError(f"method must be one of {', '.join(METHODS)} (got {self.method!r})")


@dataclass(frozen=True)
class LensSpec:
    focal_length: float
    kind: str = 'spherical'
    axis: str = 'x'

    def __post_init__(self):
        if not np.isfinite(self.focal_length) or self.focal_length == 0:
            raise PropagationError(f"Focal length must be finite and nonzero (got {self.focal_length})")
        if self.kind not in LENS_KINDS:
            raise PropagationError(f"kind must be one of {', '.join(LENS_KINDS)} (got {self.kind!r})")
        if self.axis not in AXES:
            raise PropagationError(f"axis must be 'x' or 'y' (got {self.axis!r})")


def spatial_frequencies(grid: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
    """(FX, FY) in cycles/m, fftfreq order, shape (ny, nx)."""
    fx = fft.fftfreq(grid.nx, d=grid.dx)
    fy = fft.fftfreq(grid.ny, d=grid.dy)
    return np.meshgrid(fx, fy)


def band_limit_frequency(grid: GridSpec, z: float) -> float:
    """
    Radial spatial-frequency cutoff for a hop of length z.

    f_max = min(1 / (2 dx), W / (2 lambda |z|)): beyond W / (2 lambda |z|)
    the transfer-function chirp is under-sampled by the spectral pitch
    1 / W, beyond 1 / (2 dx) the grid cannot hold the frequency at all.
    """
    nyquist = 1 / (2 * max(grid.dx, grid.dy))
    if z == 0:
        return nyquist
    return min(nyquist, min(grid.window) / (2 * grid.wavelength * abs(z)))


def band_limit_distance(grid: GridSpec) -> float:
    """Distance W^2 / (n lambda) beyond which the automatic cutoff engages."""
    return min(grid.nx * grid.dx ** 2, grid.ny * grid.dy ** 2) / grid.wavelength


def _band_limited(grid: GridSpec, plan: PropagationPlan) -> bool:
    if plan.band_limit is None:
        return abs(plan.z) > band_limit_distance(grid)
    return bool(plan.band_limit)


def transfer_function(grid: GridSpec, plan: PropagationPlan) -> np.ndarray:
    """
    Spectral multiplier for a plan, in fftfreq order.

    paraxial: exp(-i pi lambda z (fx^2 + fy^2))
    exact:    exp(i z sqrt(k^2 - (2 pi fx)^2 - (2 pi fy)^2)), evanescent part set to 0
    """
    FX, FY = spatial_frequencies(grid)
    rho2 = FX ** 2 + FY ** 2
    wavelength = grid.wavelength

    if plan.method == 'exact':
        kz2 = (2 * np.pi / wavelength) ** 2 - (2 * np.pi) ** 2 * rho2
        propagating = kz2 >= 0
        kz = np.sqrt(np.where(propagating, kz2, 0.0))
        H = np.where(propagating, np.exp(1j * plan.z * kz), 0.0)
    else:
        H = np.exp(-1j * np.pi * wavelength * plan.z * rho2)

    if _band_limited(grid, plan):
        f_max = band_limit_frequency(grid, plan.z)
        H = np.where(rho2 <= f_max ** 2, H, 0.0)
        logger.debug(f"Band limit at {f_max:.4e} cycles/m for z={plan.z:.4e} m")
    return H


def propagate(field: Field, plan: PropagationPlan) -> Field:
    """
    Propagate a field by plan.z with the angular-spectrum method.

    Args:
        field: Field in the source plane
        plan: Distance, transfer function and band-limit choice

    Returns:
        Field: Field in the observation plane, same grid
    """
    if plan.z == 0 and plan.band_limit is not True:
        return field.with_amplitude(field.amplitude.copy())

    start_time = time.time()
    spectrum = fft.fft2(fft.ifftshift(field.amplitude))
    spectrum *= transfer_function(field.grid, plan)
    out = fft.fftshift(fft.ifft2(spectrum))

    elapsed_time = time.time() - start_time
    logger.info(
        f"Propagated {field.grid.nx}x{field.grid.ny} field by z={plan.z:.4e} m "
        f"({plan.method}), Time: {elapsed_time:.2f}s"
    )
    return field.with_amplitude(out)


def lens_phase(grid: GridSpec, lens: LensSpec) -> np.ndarray:
    """
    Thin-lens phase -pi (x^2 + y^2) / (lambda f), or one axis only for cylindrical lenses.

    Raises:
        LensAliasingError: If the phase gradient at the grid edge exceeds pi per pixel
    """
    f = lens.focal_length
    wavelength = grid.wavelength
    axes = ('x', 'y') if lens.kind == 'spherical' else (lens.axis,)

    for axis in axes:
        n, pitch = (grid.nx, grid.dx) if axis == 'x' else (grid.ny, grid.dy)
        edge = (n // 2) * pitch
        if 2 * np.pi * edge * pitch / (wavelength * abs(f)) >= np.pi:
            safe_radius = wavelength * abs(f) / (2 * pitch)
            raise LensAliasingError(
                f"Lens f={f:.4e} m aliases along {axis}: the phase is sampled correctly only "
                f"within |{axis}| < {safe_radius:.4e} m but the grid extends to {edge:.4e} m"
            )

    x = (np.arange(grid.nx) - grid.nx // 2) * grid.dx
    y = (np.arange(grid.ny) - grid.ny // 2) * grid.dy
    qx = x ** 2 if 'x' in axes else np.zeros_like(x)
    qy = y ** 2 if 'y' in axes else np.zeros_like(y)
    return -np.pi / (wavelength * f) * (qy[:, np.newaxis] + qx[np.newaxis, :])


def apply_lens(field: Field, lens: LensSpec) -> Field:
    """Multiply a field by the thin-lens phase; converging lenses have f > 0."""
    phase = lens_phase(field.grid, lens)
    return field.with_amplitude(field.amplitude * np.exp(1j * phase))


def mode_convert(
    field: Field,
    f_cyl: float,
    axis: str = 'x',
    defocus: float = 0.0,
    method: str = 'paraxial',
    band_limit: Optional[bool] = None,
) -> Field:
    """
    Single cylindrical-lens LG to HG converter.

    Applies a cylindrical lens of focal length f_cyl acting along `axis`
    and propagates to f_cyl + defocus, where a charge-l vortex shows
    |l| + 1 tilted stripes.

    Raises:
        PropagationError: If f_cyl is not positive
        LensAliasingError: If the cylindrical phase aliases on the grid
    """
    if not np.isfinite(f_cyl) or f_cyl <= 0:
        raise PropagationError(f"Cylindrical focal length must be positive (got {f_cyl})")
    lensed = apply_lens(field, LensSpec(focal_length=f_cyl, kind='cylindrical', axis=axis))
    plan = PropagationPlan(z=f_cyl + defocus, method=method, band_limit=band_limit)
    logger.info(f"Mode conversion with f_cyl={f_cyl:.4e} m along {axis}, defocus={defocus:.4e} m")
    return propagate(lensed, plan)
