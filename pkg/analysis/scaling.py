"""
Ring-radius scaling studies

Runs one pipeline per topological charge and records where the brightest
ring sits in the final plane. The charge is written into every spp
element and into a laguerre_gaussian source; the rest of the config is
shared by all runs.
"""

import copy
import logging
import time
from typing import Iterable, List, Tuple

import numpy as np

from wavefield.services import intensity

from .services import AnalysisError, radial_profile

logger = logging.getLogger(__name__)


def refined_peak_radius(bin_centers: np.ndarray, values: np.ndarray) -> float:
    """Argmax radius refined by a parabola through the peak bin and its neighbours."""
    k = int(np.argmax(values))
    if k == 0 or k == len(values) - 1:
        return float(bin_centers[k])
    left, middle, right = values[k - 1], values[k], values[k + 1]
    curvature = left - 2 * middle + right
    if curvature >= 0:
        return float(bin_centers[k])
    offset = 0.5 * (left - right) / curvature
    step = bin_centers[k + 1] - bin_centers[k]
    return float(bin_centers[k] + offset * step)


def with_charge(config: dict, ell: int) -> dict:
    """
    Copy of a validated config carrying charge ell.

    Raises:
        AnalysisError: If the config has no spp element and no laguerre_gaussian source
    """
    config = copy.deepcopy(config)
    touched = False
    for element in config['elements']:
        if element['kind'] == 'spp':
            element['ell'] = int(ell)
            touched = True
    if config['source']['kind'] == 'laguerre_gaussian':
        config['source']['ell'] = int(ell)
        touched = True
    if not touched:
        raise AnalysisError("Config has no spp element or laguerre_gaussian source to set the charge on")
    return config


def ring_radius_scaling(charges: Iterable[int], config: dict) -> List[Tuple[int, float]]:
    """
    Far-field ring radius per charge.

    Args:
        charges: At least two topological charges
        config: Pipeline config (raw or already validated); only the charge varies

    Returns:
        list: (ell, ring radius in meters) in input order, radius measured
            about the optical axis

    Raises:
        AnalysisError: If fewer than two charges are given or the config is invalid
    """
    from pipeline.services import execute
    from pipeline.validators import ConfigValidator

    charges = [int(ell) for ell in charges]
    if len(charges) < 2:
        raise AnalysisError(f"Need at least two charges for a scaling study (got {len(charges)})")

    result = ConfigValidator().validate(config)
    if not result['valid']:
        raise AnalysisError("Invalid scaling config: " + '; '.join(result['errors']))
    base = result['data']

    start_time = time.time()
    pairs = []
    for ell in charges:
        field = execute(with_charge(base, ell)).field
        profile = radial_profile(intensity(field), center=(0.0, 0.0))
        radius = refined_peak_radius(profile.bin_centers, profile.values)
        logger.info(f"Charge {ell}: ring radius {radius:.4e} m")
        pairs.append((ell, radius))

    elapsed_time = time.time() - start_time
    logger.info(f"Ring-radius scaling over {len(charges)} charges, Time: {elapsed_time:.2f}s")
    return pairs
