"""
Pipeline services

Builds the source and element chain from a validated config, runs it,
evaluates the requested analyses and writes images, fields, tables and
the JSON report. Also renders standalone DOE masks for the `mask`
command.
"""

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from django.conf import settings

from analysis.export import lobes_frame, orders_frame, profile_frame, scaling_frame, spectrum_frame, write_csv
from analysis.scaling import ring_radius_scaling
from analysis.services import (
    AnalysisError,
    AnnulusRegion,
    OrderRegion,
    beam_centroid,
    beam_widths,
    conversion_efficiency,
    count_hg_fringes,
    count_ring_lobes,
    extract_order,
    oam_spectrum,
    order_powers,
    radial_profile,
    ring_width,
    stripe_orientation,
)
from masks.services import (
    aperture_window,
    apodization_window,
    axicon_phase,
    bessel_zone_length,
    binarize,
    binary_layer_thickness,
    binary_to_phase,
    fill_factor,
    fork_phase,
    predicted_charge,
    spp_phase,
    spp_step_height,
)
from masks.specs import ApodizationSpec, AxiconSpec, ForkGratingSpec, MaskError, SPPSpec
from propagation.services import (
    LensSpec,
    PropagationError,
    PropagationPlan,
    apply_lens,
    mode_convert,
    propagate,
)
from wavefield.grid import Field, FieldError, GridSpec
from wavefield.services import (
    apply_mask,
    energy,
    gaussian_source,
    intensity,
    laguerre_gaussian_source,
)

from . import formats

logger = logging.getLogger(__name__)


class PipelineError(Exception):
    """Custom exception for failures while running a pipeline; names the failing step"""
    pass


# Errors a step may raise for physically invalid input
STEP_ERRORS = (MaskError, PropagationError, FieldError, AnalysisError)


@dataclass(frozen=True, eq=False)
class PipelineResult:
    grid: GridSpec
    source: Field
    field: Field


# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------

def build_grid(config: dict) -> GridSpec:
    return GridSpec(**config['grid'])


def build_source(grid: GridSpec, source: dict) -> Field:
    if source['kind'] == 'laguerre_gaussian':
        return laguerre_gaussian_source(grid, w0=source['w0'], ell=source['ell'], e0=source['e0'])
    return gaussian_source(grid, w0=source['w0'], e0=source['e0'])


def element_spec(element: dict, grid: GridSpec):
    """
    Parameter record for one validated element.

    Raises:
        MaskError, PropagationError: If the parameters violate the record's invariants
    """
    kind = element['kind']
    if kind == 'fork':
        return ForkGratingSpec(
            m=element['m'], x0=element['period'], alpha=element['alpha'], threshold=element['threshold']
        )
    if kind == 'spp':
        return SPPSpec(
            ell=element['ell'],
            sectors=element['sectors'],
            wavelength=element.get('wavelength') or grid.wavelength,
            n_plate=element['n_plate'],
            aperture_d=element['aperture_d'],
            n_medium=element['n_medium'],
            h0=element['h0'],
            profile=element['profile'],
        )
    if kind == 'axicon':
        return AxiconSpec(m=element['m'], period=element['period'], aperture_d=element['aperture_d'])
    if kind == 'lens':
        return LensSpec(focal_length=element['focal_length'])
    if kind == 'cylindrical_lens':
        return LensSpec(focal_length=element['focal_length'], kind='cylindrical', axis=element['axis'])
    if kind == 'propagate':
        return PropagationPlan(z=element['z'], method=element['method'], band_limit=element['band_limit'])
    if kind == 'apodization':
        return ApodizationSpec(
            r0=element['r0'], rc=element['rc'], p_out=element['p_out'], q_in=element['q_in']
        )
    if kind == 'aperture':
        if not element['diameter'] > 0:
            raise MaskError(f"Aperture diameter must be positive (got {element['diameter']})")
        return element['diameter']
    if kind == 'mode_convert':
        if not element['f_cyl'] > 0:
            raise PropagationError(f"Cylindrical focal length must be positive (got {element['f_cyl']})")
        return element
    raise PipelineError(f"Unknown element kind {kind!r}")


def _encode_binary(field: Field, mask: np.ndarray, encoding: str) -> Field:
    if encoding == 'amplitude':
        return apply_mask(field, np.zeros(field.grid.shape), mask.astype(np.float64))
    return apply_mask(field, binary_to_phase(mask))


def apply_element(field: Field, element: dict) -> Field:
    """Transmit or propagate a field through one validated element."""
    grid = field.grid
    spec = element_spec(element, grid)
    kind = element['kind']

    if kind == 'fork':
        phase = fork_phase(grid, spec)
        if element['encoding'] == 'continuous':
            return apply_mask(field, phase)
        return _encode_binary(field, binarize(phase, spec.alpha, spec.threshold), element['encoding'])

    if kind == 'spp':
        phase, _ = spp_phase(grid, spec)
        return apply_mask(field, phase, aperture_window(grid, spec.aperture_d))

    if kind == 'axicon':
        levels = axicon_phase(grid, spec)
        window = aperture_window(grid, spec.aperture_d)
        if element['encoding'] == 'amplitude':
            return apply_mask(field, np.zeros(grid.shape), (levels > 0).astype(np.float64))
        return apply_mask(field, levels, window)

    if kind in ('lens', 'cylindrical_lens'):
        return apply_lens(field, spec)

    if kind == 'propagate':
        return propagate(field, spec)

    if kind == 'apodization':
        return apply_mask(field, np.zeros(grid.shape), apodization_window(grid, spec))

    if kind == 'aperture':
        return apply_mask(field, np.zeros(grid.shape), aperture_window(grid, spec))

    return mode_convert(
        field,
        f_cyl=element['f_cyl'],
        axis=element['axis'],
        defocus=element['defocus'],
        method=element['method'],
        band_limit=element['band_limit'],
    )


def execute(config: dict) -> PipelineResult:
    """
    Run the source and element chain of a validated config.

    Raises:
        PipelineError: With the index and kind of the element that failed
    """
    start_time = time.time()
    try:
        grid = build_grid(config)
        source = build_source(grid, config['source'])
    except STEP_ERRORS as e:
        raise PipelineError(f"source: {e}")

    field = source
    for i, element in enumerate(config['elements']):
        try:
            field = apply_element(field, element)
        except STEP_ERRORS as e:
            raise PipelineError(f"element {i} ({element['kind']}): {e}")
        logger.debug(f"Element {i} ({element['kind']}) done")

    elapsed_time = time.time() - start_time
    logger.info(
        f"Pipeline ran {len(config['elements'])} elements on a {grid.nx}x{grid.ny} grid, "
        f"Time: {elapsed_time:.2f}s"
    )
    return PipelineResult(grid=grid, source=source, field=field)


# ---------------------------------------------------------------------------
# Analyses
# ---------------------------------------------------------------------------

def _analysis_field(result: PipelineResult, analysis: dict) -> Field:
    extract = analysis.get('extract')
    if not extract:
        return result.field
    return extract_order(
        result.field, extract['order'], extract['period'], extract['focal_length'], extract['half_width']
    )


def evaluate(result: PipelineResult, analysis: dict):
    """
    Run one validated analysis.

    Returns:
        tuple: (report entry dict, DataFrame or None)
    """
    kind = analysis['kind']
    entry = {'kind': kind}
    frame = None

    if kind == 'spectrum':
        spectrum = oam_spectrum(
            _analysis_field(result, analysis), analysis['ell_min'], analysis['ell_max'],
            n_theta=analysis['n_theta'],
        )
        entry.update(spectrum.to_dict())
        frame = spectrum_frame(spectrum)

    elif kind == 'profile':
        profile = radial_profile(intensity(_analysis_field(result, analysis)), n_bins=analysis['n_bins'])
        try:
            width = ring_width(profile)
        except AnalysisError:
            width = None
        entry.update({
            'center': list(profile.center),
            'bin_width': profile.bin_width,
            'n_bins': len(profile.values),
            'peak_radius': profile.peak_radius,
            'ring_width': width,
        })
        frame = profile_frame(profile)

    elif kind == 'lobes':
        report = count_ring_lobes(
            intensity(_analysis_field(result, analysis)),
            prominence=analysis['prominence'],
            n_samples=analysis['n_samples'],
        )
        entry.update(report.to_dict())
        frame = lobes_frame(report)

    elif kind == 'fringes':
        imap = intensity(result.field)
        entry['n_fringes'] = count_hg_fringes(imap, threshold=analysis['threshold'])
        entry['orientation'] = stripe_orientation(imap)

    elif kind == 'orders':
        orders = range(analysis['order_min'], analysis['order_max'] + 1)
        powers = order_powers(
            result.field, orders, analysis['period'], analysis['focal_length'],
            total=energy(result.source), half_width=analysis['half_width'],
        )
        entry['powers'] = {str(n): p for n, p in powers.items()}
        entry['total'] = float(sum(powers.values()))
        if analysis['m'] is not None:
            entry['expected_ell'] = {str(n): predicted_charge(n, analysis['m']) for n in orders}
        frame = orders_frame(powers, analysis['m'])

    elif kind == 'efficiency':
        region = analysis['region']
        extract = analysis.get('extract')
        if region == 'order':
            efficiency = conversion_efficiency(result.source, result.field, OrderRegion(
                extract['order'], extract['period'], extract['focal_length'], extract['half_width']
            ))
        else:
            target = _analysis_field(result, analysis)
            bounds = AnnulusRegion(analysis['r_in'], analysis['r_out']) if region == 'annulus' else None
            efficiency = conversion_efficiency(result.source, target, bounds)
        entry.update({'region': region, 'efficiency': efficiency})

    elif kind == 'width':
        imap = intensity(result.field)
        entry['centroid'] = list(beam_centroid(imap))
        entry['widths'] = list(beam_widths(imap))

    else:
        raise PipelineError(f"Unknown analysis kind {kind!r}")

    return entry, frame


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------

def output_directory(output_dir=None) -> Path:
    return Path(output_dir) if output_dir is not None else Path(settings.OUTPUT_DIR)


def run_pipeline(config: dict, output_dir=None) -> dict:
    """
    Execute a validated config and write its outputs.

    Files are named after output.name: <name>_intensity.pgm,
    <name>_field.uvf (+ .json sidecar), <name>_<i>_<kind>.csv and
    <name>_report.json. The report holds no timestamps, so identical
    configs give identical bytes.

    Args:
        config: Normalized config from ConfigValidator
        output_dir: Target directory, defaults to settings.OUTPUT_DIR

    Returns:
        dict: The report written to <name>_report.json

    Raises:
        PipelineError: If an element or analysis fails, or an intensity image
            is requested for an identically zero field
    """
    start_time = time.time()
    directory = output_directory(output_dir)
    output = config['output']
    name = output['name']

    result = execute(config)

    entries = []
    frames = []
    for i, analysis in enumerate(config['analysis']):
        try:
            entry, frame = evaluate(result, analysis)
        except STEP_ERRORS as e:
            raise PipelineError(f"analysis {i} ({analysis['kind']}): {e}")
        entry['index'] = i
        entries.append(entry)
        if frame is not None:
            frames.append((f"{name}_{i}_{analysis['kind']}.csv", frame))

    if output['intensity']:
        image = intensity(result.field).values
        if image.max() <= 0:
            raise PipelineError("output: the final field is identically zero; there is no intensity image to write")

    files = []
    if output['intensity']:
        path = formats.write_pgm16(directory / f"{name}_intensity.pgm", image, 0.0, float(image.max()))
        files.append(path.name)
    if output['raw_field']:
        path = formats.write_raw_field(directory / f"{name}_field.uvf", result.field.amplitude, result.grid)
        files.extend([path.name, formats.sidecar_path(path).name])
    if output['csv']:
        for filename, frame in frames:
            files.append(write_csv(frame, directory / filename).name)

    report = {
        'config': config,
        'energy': {'source': energy(result.source), 'output': energy(result.field)},
        'analysis': entries,
        'files': sorted(files + [f"{name}_report.json"]),
    }
    formats.write_json(directory / f"{name}_report.json", report)

    elapsed_time = time.time() - start_time
    logger.info(f"Run '{name}' wrote {len(report['files'])} files to {directory}, Time: {elapsed_time:.2f}s")
    return report


def run_scaling(config: dict, charges: List[int], output_dir=None) -> dict:
    """
    Ring-radius scaling study: one run per charge, radii tabulated against sqrt(l).

    Writes <name>_scaling.csv and <name>_scaling.json, named after output.name.

    Args:
        config: Normalized config from ConfigValidator; the charge of every
            spp element and of a laguerre_gaussian source is replaced per run
        charges: At least two topological charges
        output_dir: Target directory, defaults to settings.OUTPUT_DIR

    Raises:
        PipelineError: If the study cannot run or an element fails
    """
    start_time = time.time()
    directory = output_directory(output_dir)
    name = config['output']['name']

    try:
        pairs = ring_radius_scaling(charges, config)
    except AnalysisError as e:
        raise PipelineError(f"scaling: {e}")

    csv_path = write_csv(scaling_frame(pairs), directory / f"{name}_scaling.csv")
    report = {
        'config': config,
        'rings': [{'ell': ell, 'ring_radius': radius} for ell, radius in pairs],
        'files': sorted([csv_path.name, f"{name}_scaling.json"]),
    }
    formats.write_json(directory / f"{name}_scaling.json", report)

    elapsed_time = time.time() - start_time
    logger.info(f"Scaling study '{name}' over {len(pairs)} charges, Time: {elapsed_time:.2f}s")
    return report


def analyze_field(field: Optional[Field], imap, analyses: List[dict]) -> Tuple[List[dict], List]:
    """
    Run analyses on a loaded field or intensity map.

    Field-only analyses (spectrum, efficiency, orders) need a complex field.

    Returns:
        tuple: (report entries, [('<index>_<kind>', DataFrame)])
    """
    if field is None:
        needs_field = [a['kind'] for a in analyses if a['kind'] in ('spectrum', 'orders', 'efficiency')]
        if needs_field:
            raise PipelineError(
                f"{', '.join(needs_field)} need a complex field; the input is an intensity image"
            )

    entries, frames = [], []
    for i, analysis in enumerate(analyses):
        try:
            if field is not None:
                entry, frame = evaluate(PipelineResult(field.grid, field, field), analysis)
            else:
                entry, frame = _evaluate_intensity(imap, analysis)
        except STEP_ERRORS as e:
            raise PipelineError(f"analysis {i} ({analysis['kind']}): {e}")
        entry['index'] = i
        entries.append(entry)
        if frame is not None:
            frames.append((f"{i}_{analysis['kind']}", frame))
    return entries, frames


def _evaluate_intensity(imap, analysis: dict):
    kind = analysis['kind']
    entry = {'kind': kind}
    frame = None
    if kind == 'profile':
        profile = radial_profile(imap, n_bins=analysis.get('n_bins'))
        entry.update({'peak_radius': profile.peak_radius, 'center': list(profile.center)})
        frame = profile_frame(profile)
    elif kind == 'lobes':
        report = count_ring_lobes(
            imap, prominence=analysis.get('prominence'), n_samples=analysis.get('n_samples') or 720
        )
        entry.update(report.to_dict())
        frame = lobes_frame(report)
    elif kind == 'fringes':
        entry['n_fringes'] = count_hg_fringes(imap, threshold=analysis.get('threshold'))
        entry['orientation'] = stripe_orientation(imap)
    elif kind == 'width':
        entry['centroid'] = list(beam_centroid(imap))
        entry['widths'] = list(beam_widths(imap))
    return entry, frame


# ---------------------------------------------------------------------------
# Standalone masks
# ---------------------------------------------------------------------------

def export_mask(kind: str, params: dict, grid: GridSpec, out) -> Dict[str, object]:
    """
    Render a DOE and write its bitmaps and JSON sidecar.

    fork:   <out>.pbm binary mask, <out>.pgm continuous phase in [0, 2 pi)
    spp:    <out>.pgm height map, <out>_phase.pgm phase in [0, 2 pi)
    axicon: <out>.pbm pi-level mask, <out>.pgm two-level phase in [0, pi]

    Returns:
        dict: The sidecar written to <out>.json
    """
    out = Path(out)
    files = []
    sidecar = {'kind': kind, 'grid': grid.to_dict(), 'params': dict(params)}

    if kind == 'fork':
        spec = element_spec({'kind': 'fork', **params}, grid)
        phase = fork_phase(grid, spec)
        mask = binarize(phase, spec.alpha, spec.threshold)
        files.append(formats.write_pbm(out.with_suffix('.pbm'), mask))
        files.append(formats.write_pgm16(out.with_suffix('.pgm'), np.mod(phase, 2 * np.pi), 0.0, 2 * np.pi))
        sidecar['fill_factor'] = fill_factor(mask)
        sidecar['order_charges'] = {str(n): predicted_charge(n, spec.m) for n in range(-4, 5)}

    elif kind == 'spp':
        spec = element_spec({'kind': 'spp', **params}, grid)
        phase, height = spp_phase(grid, spec)
        h_s, delta_h = spp_step_height(spec)
        files.append(formats.write_pgm16(out.with_suffix('.pgm'), height))
        files.append(formats.write_pgm16(
            out.with_name(out.name + '_phase.pgm'), np.mod(phase, 2 * np.pi), 0.0, 2 * np.pi
        ))
        sidecar['total_height'] = h_s
        sidecar['step_height'] = delta_h

    elif kind == 'axicon':
        spec = element_spec({'kind': 'axicon', **params}, grid)
        levels = axicon_phase(grid, spec)
        mask = (levels > 0).astype(np.uint8)
        files.append(formats.write_pbm(out.with_suffix('.pbm'), mask))
        files.append(formats.write_pgm16(out.with_suffix('.pgm'), levels, 0.0, np.pi))
        sidecar['fill_factor'] = fill_factor(mask)
        sidecar['bessel_zone_length'] = bessel_zone_length(spec.aperture_d, spec.period, grid.wavelength)
        n_plate = params.get('n_plate')
        sidecar['etch_depth'] = binary_layer_thickness(grid.wavelength, n_plate) if n_plate else None

    else:
        raise PipelineError(f"Unknown mask kind {kind!r}")

    sidecar['files'] = sorted(path.name for path in files) + [out.with_suffix('.json').name]
    formats.write_json(out.with_suffix('.json'), sidecar)
    logger.info(f"Wrote {kind} mask to {out}")
    return sidecar
