"""
Sampled field types

GridSpec fixes the sampling of the transverse plane, Field holds a
complex scalar field on it and IntensityMap holds |E|^2 (or a loaded
camera frame). Pixel (i, j) sits at x = (i - nx/2) dx, y = (j - ny/2) dy,
so the optical axis is the sample at index (ny/2, nx/2). Arrays are
stored row-major with shape (ny, nx).
"""

from dataclasses import dataclass, field as dataclass_field
from typing import Tuple

import numpy as np


class FieldError(Exception):
    """Custom exception for invalid grids and fields"""
    pass


class SamplingError(FieldError):
    """Raised when a feature is too small for the grid pitch"""
    pass


MIN_SAMPLES = 16


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    dx: float
    dy: float
    wavelength: float

    def __post_init__(self):
        for name in ('nx', 'ny'):
            value = getattr(self, name)
            if int(value) != value or value < MIN_SAMPLES or value % 2:
                raise FieldError(f"{name} must be an even integer >= {MIN_SAMPLES} (got {value})")
        for name in ('dx', 'dy', 'wavelength'):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise FieldError(f"{name} must be positive and finite (got {value})")
        object.__setattr__(self, 'nx', int(self.nx))
        object.__setattr__(self, 'ny', int(self.ny))

    @classmethod
    def square(cls, n: int, pitch: float, wavelength: float) -> 'GridSpec':
        return cls(nx=n, ny=n, dx=pitch, dy=pitch, wavelength=wavelength)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def window(self) -> Tuple[float, float]:
        """Physical extent (W_x, W_y) in meters."""
        return (self.nx * self.dx, self.ny * self.dy)

    @property
    def center_index(self) -> Tuple[int, int]:
        """(row, column) of the optical axis."""
        return (self.ny // 2, self.nx // 2)

    def to_dict(self) -> dict:
        return {
            'nx': self.nx,
            'ny': self.ny,
            'dx': self.dx,
            'dy': self.dy,
            'wavelength': self.wavelength,
        }


@dataclass(frozen=True, eq=False)
class Field:
    grid: GridSpec
    amplitude: np.ndarray = dataclass_field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.amplitude, dtype=np.complex128).view()
        if values.shape != self.grid.shape:
            raise FieldError(
                f"Field array shape {values.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise FieldError("Field contains NaN or Inf values")
        values.setflags(write=False)
        object.__setattr__(self, 'amplitude', values)

    def with_amplitude(self, amplitude: np.ndarray) -> 'Field':
        return Field(self.grid, amplitude)


@dataclass(frozen=True, eq=False)
class IntensityMap:
    grid: GridSpec
    values: np.ndarray = dataclass_field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).view()
        if values.shape != self.grid.shape:
            raise FieldError(
                f"Intensity array shape {values.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise FieldError("Intensity contains NaN or Inf values")
        if np.any(values < 0):
            raise FieldError("Intensity values must be non-negative")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @property
    def peak(self) -> float:
        return float(self.values.max())
