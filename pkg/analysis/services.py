"""
Beam diagnostics

Radial profiles, azimuthal OAM spectra, ring-lobe and HG-fringe counting,
diffraction-order extraction and efficiency bookkeeping.

Centers are given in meters in the grid frame (optical axis at (0, 0)).
Polar resampling is bilinear (map_coordinates, order=1) and radial
integration uses the trapezoid rule.
"""

import logging
import time
from dataclasses import dataclass, field as dataclass_field
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from django.conf import settings
from scipy import fft
from scipy.integrate import trapezoid
from scipy.ndimage import fourier_shift, gaussian_filter1d, map_coordinates
from scipy.signal import find_peaks

from wavefield.grid import Field, GridSpec, IntensityMap
from wavefield.services import coordinates, energy

logger = logging.getLogger(__name__)


class AnalysisError(Exception):
    """Custom exception for diagnostics that cannot be computed"""
    pass


class FringeCountError(AnalysisError):
    """Raised when an intensity map does not show countable HG fringes"""
    pass


class NotARingError(AnalysisError):
    """Raised when an intensity map has no ring (no interior minimum)"""
    pass


class OrderOverlapError(AnalysisError):
    """Raised when an order window would reach into a neighbouring order"""
    pass


MIN_RADIAL_BINS = 8
HG_BIN_WIDTH = 0.05
HG_RADIUS = 6.0
HG_MIN_AXIS_SPLIT = 0.02
HG_MIN_CONTRAST = 0.05
ORDER_WINDOW_FRACTION = 0.45

Point = Tuple[float, float]


@dataclass(frozen=True, eq=False)
class RadialProfile:
    bin_centers: np.ndarray
    values: np.ndarray
    counts: np.ndarray
    center: Point
    bin_width: float

    @property
    def peak_radius(self) -> float:
        return float(self.bin_centers[int(np.argmax(self.values))])

    def value_at(self, radius: float) -> float:
        return float(np.interp(radius, self.bin_centers, self.values))


@dataclass(frozen=True, eq=False)
class OAMSpectrum:
    """
    Normalized OAM power over a contiguous range of charges.

    Attributes:
        ell_min, ell_max: Inclusive range
        power: Fraction per charge, sums to 1 over the range
        dominant_ell: Charge with the most power (smallest |l|, then positive, on ties)
        bandwidth: Standard deviation of l under the power distribution
        mean_ell: Power-weighted mean charge
        range_warning: True if the strongest charge overall lies outside the range
    """
    ell_min: int
    ell_max: int
    power: np.ndarray
    dominant_ell: int
    bandwidth: float
    mean_ell: float
    range_warning: bool = False

    @property
    def ells(self) -> np.ndarray:
        return np.arange(self.ell_min, self.ell_max + 1)

    def power_of(self, ell: int) -> float:
        if not self.ell_min <= ell <= self.ell_max:
            return 0.0
        return float(self.power[ell - self.ell_min])

    def to_dict(self) -> dict:
        return {
            'ell_min': self.ell_min,
            'ell_max': self.ell_max,
            'dominant_ell': self.dominant_ell,
            'bandwidth': self.bandwidth,
            'mean_ell': self.mean_ell,
            'range_warning': self.range_warning,
            'power': {int(ell): float(p) for ell, p in zip(self.ells, self.power)},
        }


@dataclass(frozen=True)
class LobeReport:
    n_lobes: int
    ring_radius: float
    lobe_angles: List[float] = dataclass_field(default_factory=list)
    prominence_threshold: float = 0.3

    def to_dict(self) -> dict:
        return {
            'n_lobes': self.n_lobes,
            'ring_radius': self.ring_radius,
            'lobe_angles': list(self.lobe_angles),
            'prominence_threshold': self.prominence_threshold,
        }


@dataclass(frozen=True)
class AnnulusRegion:
    r_in: float
    r_out: float
    center: Point = (0.0, 0.0)

    def __post_init__(self):
        if not 0 <= self.r_in < self.r_out:
            raise AnalysisError(f"Annulus needs 0 <= r_in < r_out (got {self.r_in}, {self.r_out})")


@dataclass(frozen=True)
class OrderRegion:
    order: int
    grating_period: float
    focal_length: float
    half_width: Optional[float] = None


Region = Union[None, str, AnnulusRegion, OrderRegion]


# ---------------------------------------------------------------------------
# Geometry helpers
# ---------------------------------------------------------------------------

def _to_pixels(grid: GridSpec, point: Point) -> Tuple[float, float]:
    """(row, col) fractional pixel position of a point given in meters."""
    x, y = point
    return y / grid.dy + grid.ny // 2, x / grid.dx + grid.nx // 2


def _check_inside(grid: GridSpec, point: Point):
    row, col = _to_pixels(grid, point)
    if not (0 <= row <= grid.ny - 1 and 0 <= col <= grid.nx - 1):
        raise AnalysisError(f"Center {point} lies outside the grid")


def _edge_distance(grid: GridSpec, point: Point) -> float:
    row, col = _to_pixels(grid, point)
    return min(col * grid.dx, (grid.nx - 1 - col) * grid.dx, row * grid.dy, (grid.ny - 1 - row) * grid.dy)


def _total(imap: IntensityMap) -> float:
    total = float(imap.values.sum())
    if total <= 0:
        raise AnalysisError("Intensity map is identically zero")
    return total


def beam_centroid(imap: IntensityMap) -> Point:
    """Intensity-weighted centroid (x, y) in meters."""
    total = _total(imap)
    X, Y = coordinates(imap.grid)
    return (float((X * imap.values).sum() / total), float((Y * imap.values).sum() / total))


def beam_widths(imap: IntensityMap) -> Tuple[float, float]:
    """Second-moment radii (2 sigma_x, 2 sigma_y) about the centroid, in meters."""
    total = _total(imap)
    cx, cy = beam_centroid(imap)
    X, Y = coordinates(imap.grid)
    var_x = float(((X - cx) ** 2 * imap.values).sum() / total)
    var_y = float(((Y - cy) ** 2 * imap.values).sum() / total)
    return 2 * np.sqrt(var_x), 2 * np.sqrt(var_y)


def _sample_ring(values: np.ndarray, grid: GridSpec, center: Point, radii: np.ndarray, n_theta: int) -> np.ndarray:
    """Bilinear samples on rings, shape (len(radii), n_theta), angle index k <-> 2 pi k / n_theta."""
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    row0, col0 = _to_pixels(grid, center)
    rows = row0 + np.outer(radii, np.sin(theta)) / grid.dy
    cols = col0 + np.outer(radii, np.cos(theta)) / grid.dx
    return map_coordinates(values, [rows, cols], order=1, mode='constant', cval=0.0)


# ---------------------------------------------------------------------------
# Radial profile
# ---------------------------------------------------------------------------

def radial_profile(
    imap: IntensityMap,
    center: Optional[Point] = None,
    n_bins: Optional[int] = None,
    r_max: Optional[float] = None,
) -> RadialProfile:
    """
    Azimuthally averaged intensity.

    Bin k averages the pixels with radius in [k dr, (k+1) dr), dr = r_max / n_bins.
    Empty bins hold 0 and show a zero count.

    Args:
        imap: Intensity map
        center: (x, y) in meters, defaults to the intensity centroid
        n_bins: Number of bins (>= 8), defaults to one bin per pixel
        r_max: Outer radius, defaults to the distance from center to the nearest grid edge

    Raises:
        AnalysisError: If the center is outside the grid or n_bins < 8
    """
    grid = imap.grid
    if center is None:
        center = beam_centroid(imap)
    _check_inside(grid, center)

    if r_max is None:
        r_max = _edge_distance(grid, center)
    if r_max <= 0:
        raise AnalysisError(f"Radial range must be positive (got {r_max})")
    if n_bins is None:
        n_bins = max(MIN_RADIAL_BINS, int(r_max / min(grid.dx, grid.dy)))
    if n_bins < MIN_RADIAL_BINS:
        raise AnalysisError(f"n_bins must be >= {MIN_RADIAL_BINS} (got {n_bins})")

    X, Y = coordinates(grid)
    R = np.hypot(X - center[0], Y - center[1])
    bin_width = r_max / n_bins
    index = np.floor(R / bin_width).astype(np.int64).ravel()
    keep = index < n_bins
    weights = imap.values.ravel()[keep]

    sums = np.bincount(index[keep], weights=weights, minlength=n_bins)
    counts = np.bincount(index[keep], minlength=n_bins)
    values = np.divide(sums, counts, out=np.zeros(n_bins), where=counts > 0)

    return RadialProfile(
        bin_centers=(np.arange(n_bins) + 0.5) * bin_width,
        values=values,
        counts=counts,
        center=(float(center[0]), float(center[1])),
        bin_width=bin_width,
    )


def ring_width(profile: RadialProfile) -> float:
    """
    Full width at half maximum of the brightest ring in a radial profile.

    Raises:
        NotARingError: If the profile peaks in its first bin
        AnalysisError: If the ring does not fall below half maximum on both sides
    """
    values = profile.values
    k = int(np.argmax(values))
    if k == 0:
        raise NotARingError("Profile peaks on axis; no ring to measure")
    half = values[k] / 2
    r = profile.bin_centers

    inner = np.nonzero(values[:k] < half)[0]
    outer = np.nonzero(values[k:] < half)[0]
    if inner.size == 0 or outer.size == 0:
        raise AnalysisError("Ring does not drop below half maximum on both sides")

    i = inner[-1]
    j = k + outer[0]
    r_left = np.interp(half, [values[i], values[i + 1]], [r[i], r[i + 1]])
    r_right = np.interp(half, [values[j], values[j - 1]], [r[j], r[j - 1]])
    return float(r_right - r_left)


# ---------------------------------------------------------------------------
# OAM spectrum
# ---------------------------------------------------------------------------

def _signed_index(k: int, n: int) -> int:
    return k if k < n // 2 else k - n


def dominant_charge(ells: np.ndarray, power: np.ndarray) -> int:
    """Charge with the largest power; ties go to the smallest |l|, then to the positive sign."""
    order = sorted(range(len(ells)), key=lambda i: (-power[i], abs(int(ells[i])), -int(ells[i])))
    return int(ells[order[0]])


def oam_spectrum(
    field: Field,
    ell_min: int,
    ell_max: int,
    center: Optional[Point] = None,
    r_max: Optional[float] = None,
    n_theta: Optional[int] = None,
) -> OAMSpectrum:
    """
    Decompose a field into azimuthal harmonics exp(i l theta).

    Each ring of radius r is resampled at n_theta angles; the FFT along the
    angle divided by n_theta gives c_l(r). P_l is the trapezoid integral of
    |c_l(r)|^2 r over r, normalized over [ell_min, ell_max].

    Args:
        field: Complex field
        ell_min, ell_max: Inclusive charge range
        center: Decomposition axis (x, y) in meters, defaults to the optical axis
        r_max: Outer radius, defaults to the largest ring inside the grid
        n_theta: Angular samples, defaults to settings.OAM_AZIMUTH_SAMPLES

    Returns:
        OAMSpectrum

    Raises:
        AnalysisError: On a zero field or a range wider than n_theta
    """
    start_time = time.time()
    grid = field.grid
    n_theta = int(n_theta or getattr(settings, 'OAM_AZIMUTH_SAMPLES', 720))
    ell_min, ell_max = int(ell_min), int(ell_max)
    if ell_max < ell_min:
        raise AnalysisError(f"Empty charge range [{ell_min}, {ell_max}]")
    if ell_max - ell_min + 1 > n_theta or max(abs(ell_min), abs(ell_max)) >= n_theta // 2:
        raise AnalysisError(
            f"Charge range [{ell_min}, {ell_max}] is not resolved by {n_theta} azimuthal samples"
        )
    if not np.any(field.amplitude):
        raise AnalysisError("Cannot decompose an identically zero field")

    if center is None:
        center = (0.0, 0.0)
    _check_inside(grid, center)
    if r_max is None:
        r_max = _edge_distance(grid, center)
    step = min(grid.dx, grid.dy)
    radii = np.arange(0.0, r_max, step)
    if radii.size < 2:
        raise AnalysisError("Decomposition radius spans fewer than two rings")

    rings = (
        _sample_ring(field.amplitude.real, grid, center, radii, n_theta)
        + 1j * _sample_ring(field.amplitude.imag, grid, center, radii, n_theta)
    )
    coefficients = fft.fft(rings, axis=1) / n_theta
    ring_power = trapezoid(np.abs(coefficients) ** 2 * radii[:, np.newaxis], radii, axis=0)

    ells = np.arange(ell_min, ell_max + 1)
    in_range = ring_power[np.mod(ells, n_theta)]
    total = in_range.sum()
    if total <= 0:
        raise AnalysisError(f"No power in charge range [{ell_min}, {ell_max}]")
    power = in_range / total

    dominant_ell = dominant_charge(ells, power)
    global_dominant = _signed_index(int(np.argmax(ring_power)), n_theta)
    mean_ell = float(np.sum(ells * power))
    bandwidth = float(np.sqrt(np.sum((ells - mean_ell) ** 2 * power)))
    range_warning = not ell_min <= global_dominant <= ell_max
    if range_warning:
        logger.warning(
            f"Strongest charge {global_dominant} lies outside the requested range [{ell_min}, {ell_max}]"
        )

    elapsed_time = time.time() - start_time
    logger.info(
        f"OAM spectrum over [{ell_min}, {ell_max}]: dominant {dominant_ell} "
        f"({power[dominant_ell - ell_min]:.3f}), Time: {elapsed_time:.2f}s"
    )
    return OAMSpectrum(
        ell_min=ell_min,
        ell_max=ell_max,
        power=power,
        dominant_ell=dominant_ell,
        bandwidth=bandwidth,
        mean_ell=mean_ell,
        range_warning=range_warning,
    )


# ---------------------------------------------------------------------------
# Lobes and fringes
# ---------------------------------------------------------------------------

def count_ring_lobes(
    imap: IntensityMap,
    center: Optional[Point] = None,
    prominence: Optional[float] = None,
    n_samples: int = 720,
    n_bins: Optional[int] = None,
) -> LobeReport:
    """
    Count intensity maxima around the brightest ring.

    The ring radius is the argmax of the radial profile. The ring is sampled
    at n_samples angles and maxima whose prominence exceeds `prominence`
    times the ring maximum are counted, wrapping around 2 pi.

    Raises:
        NotARingError: If the radial profile peaks on axis
    """
    if prominence is None:
        prominence = getattr(settings, 'LOBE_PROMINENCE', 0.3)
    profile = radial_profile(imap, center=center, n_bins=n_bins)
    k = int(np.argmax(profile.values))
    if k == 0:
        raise NotARingError("Radial profile peaks on axis; the beam has no ring")
    ring_radius = float(profile.bin_centers[k])

    samples = _sample_ring(imap.values, imap.grid, profile.center, np.array([ring_radius]), n_samples)[0]
    ring_max = float(samples.max())
    if ring_max <= 0:
        raise NotARingError("Ring samples are all zero")

    tiled = np.tile(samples, 3)
    peaks, _ = find_peaks(tiled, prominence=prominence * ring_max)
    middle = peaks[(peaks >= n_samples) & (peaks < 2 * n_samples)] - n_samples
    angles = sorted(float(2 * np.pi * p / n_samples) for p in middle)

    logger.info(f"Found {len(angles)} lobes on ring r={ring_radius:.4e} m")
    return LobeReport(
        n_lobes=len(angles),
        ring_radius=ring_radius,
        lobe_angles=angles,
        prominence_threshold=prominence,
    )


def _moments(imap: IntensityMap):
    """Centered coordinates, normalized weights and covariance eigen-decomposition in meters."""
    total = _total(imap)
    X, Y = coordinates(imap.grid)
    weights = imap.values / total
    cx, cy = float((X * weights).sum()), float((Y * weights).sum())
    dX, dY = X - cx, Y - cy
    cxx = float((dX ** 2 * weights).sum())
    cyy = float((dY ** 2 * weights).sum())
    cxy = float((dX * dY * weights).sum())
    if cxx == 0 or cyy == 0:
        raise FringeCountError("Intensity map has zero extent along one axis")
    eigenvalues, eigenvectors = np.linalg.eigh(np.array([[cxx, cxy], [cxy, cyy]]))
    return dX, dY, weights, eigenvalues, eigenvectors


def _fringe_views(imap: IntensityMap):
    """
    Whitened (along, across) coordinate pairs to project the stripes onto.

    Two come from the principal axes of the covariance. Two more come from the
    principal axes of the correlation matrix after each Cartesian axis is
    scaled to unit variance; those recover stripes sheared across a strongly
    elliptical envelope, whose raw projections smear adjacent stripes together.
    """
    dX, dY, weights, eigenvalues, eigenvectors = _moments(imap)
    views = []
    if eigenvalues[0] > 0:
        for column in range(2):
            e = eigenvectors[:, column]
            along = (dX * e[0] + dY * e[1]) / np.sqrt(eigenvalues[column])
            across = (dY * e[0] - dX * e[1]) / np.sqrt(eigenvalues[1 - column])
            views.append((along, across))

    u = dX / np.sqrt(float((dX ** 2 * weights).sum()))
    v = dY / np.sqrt(float((dY ** 2 * weights).sum()))
    rho = float((u * v * weights).sum())
    _, diagonals = np.linalg.eigh(np.array([[1.0, rho], [rho, 1.0]]))
    for column in range(2):
        e = diagonals[:, column]
        views.append((u * e[0] + v * e[1], v * e[0] - u * e[1]))
    return weights, eigenvalues, views


def _fringe_projection(along, across, weights, threshold):
    inside = (along ** 2 + across ** 2) <= HG_RADIUS ** 2
    edges = np.arange(-HG_RADIUS, HG_RADIUS + HG_BIN_WIDTH / 2, HG_BIN_WIDTH)
    n_bins = len(edges) - 1
    index = np.clip(np.floor((along[inside] + HG_RADIUS) / HG_BIN_WIDTH).astype(np.int64), 0, n_bins - 1)
    sums = np.bincount(index, weights=weights[inside], minlength=n_bins)
    counts = np.bincount(index, minlength=n_bins)
    mean = np.divide(sums, counts, out=np.zeros(n_bins), where=counts > 0)
    smooth = gaussian_filter1d(mean, sigma=1.0)
    peak_max = smooth.max()
    peaks, _ = find_peaks(
        smooth,
        height=threshold * peak_max,
        distance=2,
        prominence=HG_MIN_CONTRAST * peak_max,
    )
    return smooth, peaks


def _min_contrast(profile, peaks) -> float:
    """Smallest dip between adjacent maxima; 0 when there is a single maximum."""
    contrasts = []
    for a, b in zip(peaks[:-1], peaks[1:]):
        valley = profile[a:b + 1].min()
        contrasts.append(1 - valley / min(profile[a], profile[b]))
    return min(contrasts) if contrasts else 0.0


def count_hg_fringes(imap: IntensityMap, threshold: Optional[float] = None) -> int:
    """
    Count HG stripes in a mode-converted intensity map.

    The intensity is rotated to the principal axes of its second moments and
    binned (mean per bin) along each axis, smoothed and searched for maxima
    above `threshold` times the profile maximum. The same is done along the
    principal axes of the per-axis standardized map, which keeps stripes
    sheared across an elliptical focus apart. The largest count is returned.

    Raises:
        FringeCountError: When the principal axes are degenerate and the
            fringe contrast is below 5% (a round spot, not a converted vortex)
    """
    if threshold is None:
        threshold = getattr(settings, 'FRINGE_THRESHOLD', 0.1)
    weights, eigenvalues, views = _fringe_views(imap)
    split = (eigenvalues[1] - eigenvalues[0]) / eigenvalues.sum()

    best_count, best_contrast = 0, 0.0
    for along, across in views:
        smooth, peaks = _fringe_projection(along, across, weights, threshold)
        if len(peaks) > best_count:
            best_count = len(peaks)
            best_contrast = _min_contrast(smooth, peaks)

    if split < HG_MIN_AXIS_SPLIT and best_contrast < HG_MIN_CONTRAST:
        raise FringeCountError(
            f"Principal axes are degenerate (split {split:.3f}) and fringe contrast "
            f"{best_contrast:.3f} is below {HG_MIN_CONTRAST}; the map is not a converted vortex"
        )

    logger.info(f"Counted {best_count} HG fringes (axis split {split:.3f})")
    return best_count


def stripe_orientation(imap: IntensityMap) -> float:
    """
    Angle in (-pi/2, pi/2] of the major principal axis of the intensity.

    For HG_{n,0} stripes this is the axis the stripes are stacked along.
    Stripes produced from +l and -l inputs give angles of opposite sign.
    """
    _, _, _, _, eigenvectors = _moments(imap)
    major = eigenvectors[:, 1]
    angle = float(np.arctan2(major[1], major[0]))
    if angle <= -np.pi / 2:
        angle += np.pi
    elif angle > np.pi / 2:
        angle -= np.pi
    return angle


# ---------------------------------------------------------------------------
# Orders and efficiency
# ---------------------------------------------------------------------------

def extract_order(
    field_at_focus: Field,
    order: int,
    grating_period: float,
    focal_length: float,
    half_width: Optional[float] = None,
) -> Field:
    """
    Isolate one diffraction order of a grating from a focal-plane field.

    Order n sits at x = n lambda f / x0. Its carrier tilt exp(2 pi i n x / x0)
    is removed, the order is moved to the grid center with a sub-pixel
    Fourier shift and a circular window of radius half_width keeps it.

    Args:
        field_at_focus: Field in the back focal plane of a spherical lens
        order: Diffraction order n
        grating_period: Grating period x0 in meters (signed)
        focal_length: Lens focal length f in meters
        half_width: Window radius, defaults to 0.45 lambda f / |x0|

    Returns:
        Field: The order, centered, on the same grid

    Raises:
        OrderOverlapError: If the window is wider than half the order spacing
        AnalysisError: If the window leaves the grid
    """
    grid = field_at_focus.grid
    if grating_period == 0 or focal_length == 0:
        raise AnalysisError("Grating period and focal length must be nonzero")
    spacing = grid.wavelength * abs(focal_length) / abs(grating_period)
    if half_width is None:
        half_width = ORDER_WINDOW_FRACTION * spacing
    if half_width <= 0:
        raise AnalysisError(f"Window half width must be positive (got {half_width})")
    if half_width > spacing / 2:
        raise OrderOverlapError(
            f"Window half width {half_width:.4e} m exceeds half the order spacing {spacing / 2:.4e} m"
        )

    x_c = order * grid.wavelength * focal_length / grating_period
    x_edge = (grid.nx // 2 - 1) * grid.dx
    y_edge = (grid.ny // 2 - 1) * grid.dy
    if abs(x_c) + half_width > x_edge or half_width > y_edge:
        raise AnalysisError(f"Order {order} window at x={x_c:.4e} m leaves the grid")

    X, Y = coordinates(grid)
    demodulated = field_at_focus.amplitude * np.exp(-2j * np.pi * order * X / grating_period)
    shifted = fft.ifft2(fourier_shift(fft.fft2(demodulated), shift=(0.0, -x_c / grid.dx)))
    window = np.hypot(X, Y) <= half_width
    return field_at_focus.with_amplitude(np.where(window, shifted, 0.0))


def order_powers(
    field_at_focus: Field,
    orders: Iterable[int],
    grating_period: float,
    focal_length: float,
    total: Optional[float] = None,
    half_width: Optional[float] = None,
) -> Dict[int, float]:
    """Fraction of `total` (default: the focal-plane energy) carried by each order window."""
    if total is None:
        total = energy(field_at_focus)
    if total <= 0:
        raise AnalysisError("Reference energy must be positive")
    return {
        int(n): energy(extract_order(field_at_focus, n, grating_period, focal_length, half_width)) / total
        for n in orders
    }


def conversion_efficiency(input_field: Field, output_field: Field, region: Region = None) -> float:
    """
    Energy of the output inside a region divided by the input energy.

    Args:
        input_field: Field before the element
        output_field: Field at the analysis plane
        region: None or 'all' for the whole grid, an AnnulusRegion, or an OrderRegion

    Raises:
        AnalysisError: If the input carries no energy
    """
    reference = energy(input_field)
    if reference <= 0:
        raise AnalysisError("Input field carries no energy")

    if region is None or region == 'all':
        captured = energy(output_field)
    elif isinstance(region, AnnulusRegion):
        X, Y = coordinates(output_field.grid)
        R = np.hypot(X - region.center[0], Y - region.center[1])
        inside = (R >= region.r_in) & (R <= region.r_out)
        captured = energy(output_field.with_amplitude(np.where(inside, output_field.amplitude, 0.0)))
    elif isinstance(region, OrderRegion):
        captured = energy(extract_order(
            output_field, region.order, region.grating_period, region.focal_length, region.half_width
        ))
    else:
        raise AnalysisError(f"Unknown efficiency region {region!r}")
    return captured / reference
