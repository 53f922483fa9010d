"""
Tabular export of analysis results.

Each function turns one result type into a pandas DataFrame with one row
per bin, charge or order. Writing goes through DataFrame.to_csv with a
header row and no index.
"""

from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
import pandas as pd

from .services import LobeReport, OAMSpectrum, RadialProfile


def profile_frame(profile: RadialProfile) -> pd.DataFrame:
    return pd.DataFrame({
        'radius_m': profile.bin_centers,
        'intensity': profile.values,
        'pixel_count': profile.counts.astype(np.int64),
    })


def spectrum_frame(spectrum: OAMSpectrum) -> pd.DataFrame:
    return pd.DataFrame({
        'ell': spectrum.ells,
        'power': spectrum.power,
    })


def orders_frame(powers: Dict[int, float], m: Optional[int] = None) -> pd.DataFrame:
    """
    One row per diffraction order, sorted by order.

    Args:
        powers: {order: power fraction}
        m: Grating charge; adds the expected charge n * m per order when given
    """
    orders = sorted(powers)
    frame = pd.DataFrame({
        'order': orders,
        'power': [powers[n] for n in orders],
    })
    if m is not None:
        frame['expected_ell'] = [n * m for n in orders]
    return frame


def lobes_frame(report: LobeReport) -> pd.DataFrame:
    return pd.DataFrame({
        'lobe': np.arange(1, report.n_lobes + 1),
        'angle_rad': report.lobe_angles,
    })


def scaling_frame(pairs: Iterable[Tuple[int, float]]) -> pd.DataFrame:
    """
    Ring radius against charge, with the ratio to the first row and the
    sqrt(l / l_first) reference it should follow.
    """
    pairs = list(pairs)
    frame = pd.DataFrame(pairs, columns=['ell', 'ring_radius_m'])
    if not frame.empty:
        first_ell, first_radius = pairs[0]
        frame['radius_ratio'] = frame['ring_radius_m'] / first_radius
        frame['sqrt_ell_ratio'] = np.sqrt(frame['ell'].abs() / abs(first_ell)) if first_ell else np.nan
    return frame


def write_csv(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path
