"""
DOE parameter records

Plain frozen records for the three diffractive elements and the
apodization window. Each one checks the constraints it can check on its
own; checks that need a grid (sampling of the period, fit inside the
window) happen in the synthesis functions.
"""

from dataclasses import dataclass

import numpy as np


class MaskError(Exception):
    """Custom exception for invalid DOE parameters"""
    pass


class MaskSamplingError(MaskError):
    """Raised when a DOE feature is resolved by fewer than 4 pixels"""
    pass


SPP_PROFILES = ('stepped', 'helical')


def _positive(name, value):
    if not np.isfinite(value) or value <= 0:
        raise MaskError(f"{name} must be positive (got {value})")


@dataclass(frozen=True)
class ForkGratingSpec:
    """
    Forked (holographic) grating.

    Attributes:
        m: Topological charge carried by the first order
        x0: Grating period in meters
        alpha: Modulation depth in (0, 1]
        threshold: Binarization threshold in [0, alpha]
    """
    m: int
    x0: float
    alpha: float = 1.0
    threshold: float = 0.5

    def __post_init__(self):
        _positive('x0', self.x0)
        if not 0 < self.alpha <= 1:
            raise MaskError(f"alpha must lie in (0, 1] (got {self.alpha})")
        if not 0 <= self.threshold <= self.alpha:
            raise MaskError(f"threshold must lie in [0, alpha={self.alpha}] (got {self.threshold})")
        object.__setattr__(self, 'm', int(self.m))


@dataclass(frozen=True)
class SPPSpec:
    """
    Spiral phase plate with a sectored (or continuous) helical relief.

    Attributes:
        ell: Target topological charge
        sectors: Number of azimuthal steps
        wavelength: Design wavelength in meters
        n_plate: Refractive index of the plate
        n_medium: Refractive index of the surrounding medium
        h0: Base thickness in meters
        aperture_d: Clear aperture diameter in meters
        profile: 'stepped' staircase or 'helical' continuous ramp
    """
    ell: int
    sectors: int
    wavelength: float
    n_plate: float
    aperture_d: float
    n_medium: float = 1.0
    h0: float = 0.0
    profile: str = 'stepped'

    def __post_init__(self):
        if int(self.sectors) != self.sectors or self.sectors < 1:
            raise MaskError(f"sectors must be a positive integer (got {self.sectors})")
        _positive('wavelength', self.wavelength)
        _positive('aperture_d', self.aperture_d)
        if not self.n_plate > self.n_medium:
            raise MaskError(
                f"n_plate ({self.n_plate}) must exceed n_medium ({self.n_medium})"
            )
        if not np.isfinite(self.h0) or self.h0 < 0:
            raise MaskError(f"h0 must be non-negative (got {self.h0})")
        if self.profile not in SPP_PROFILES:
            raise MaskError(f"profile must be one of {', '.join(SPP_PROFILES)} (got {self.profile!r})")
        object.__setattr__(self, 'ell', int(self.ell))
        object.__setattr__(self, 'sectors', int(self.sectors))

    @property
    def total_height(self) -> float:
        """h_s = ell * lambda / (n_plate - n_medium); negative for negative ell."""
        return self.ell * self.wavelength / (self.n_plate - self.n_medium)

    @property
    def step_height(self) -> float:
        return self.total_height / self.sectors


@dataclass(frozen=True)
class AxiconSpec:
    """
    Binary spiral axicon.

    Attributes:
        m: Topological charge
        period: Radial period p = 2 pi / k_r in meters
        aperture_d: Clear aperture diameter in meters
    """
    m: int
    period: float
    aperture_d: float

    def __post_init__(self):
        _positive('period', self.period)
        _positive('aperture_d', self.aperture_d)
        object.__setattr__(self, 'm', int(self.m))

    @classmethod
    def from_wavenumber(cls, m: int, k_r: float, aperture_d: float) -> 'AxiconSpec':
        _positive('k_r', k_r)
        return cls(m=m, period=2 * np.pi / k_r, aperture_d=aperture_d)

    @property
    def k_r(self) -> float:
        return 2 * np.pi / self.period


@dataclass(frozen=True)
class ApodizationSpec:
    r0: float
    rc: float
    p_out: float = 2.0
    q_in: float = 2.0

    def __post_init__(self):
        _positive('rc', self.rc)
        if not self.r0 > self.rc:
            raise MaskError(f"r0 ({self.r0}) must exceed rc ({self.rc})")
        for name in ('p_out', 'q_in'):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 1:
                raise MaskError(f"{name} must be >= 1 (got {value})")
