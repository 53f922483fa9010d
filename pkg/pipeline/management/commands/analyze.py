"""
python manage.py analyze INPUT [analysis flags] [--dx DX --wavelength LAMBDA]

INPUT is a raw field (.uvf with optional JSON sidecar), a 16-bit PGM
intensity image or a PBM mask; the format is sniffed from its magic
bytes. Everything is read and analysed before anything is written.
"""

from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from analysis.export import write_csv
from pipeline import formats
from pipeline.forms import ANALYSIS_FORMS
from pipeline.services import PipelineError, analyze_field
from pipeline.validators import form_errors
from wavefield.grid import FieldError, GridSpec, IntensityMap
from wavefield.services import intensity


class Command(BaseCommand):
    help = 'Run beam diagnostics on a stored field, intensity image or mask'

    def add_arguments(self, parser):
        parser.add_argument('input', help='Raw field, 16-bit PGM or PBM file')

        group = parser.add_argument_group('analyses')
        group.add_argument('--spectrum', nargs=2, type=int, metavar=('ELL_MIN', 'ELL_MAX'),
                           help='OAM spectrum over [ELL_MIN, ELL_MAX] (complex fields only)')
        group.add_argument('--profile', action='store_true', help='Radial profile')
        group.add_argument('--bins', type=int, help='Radial profile bins')
        group.add_argument('--lobes', action='store_true', help='Count ring lobes')
        group.add_argument('--prominence', type=float, help='Lobe prominence as a fraction of the ring maximum')
        group.add_argument('--fringes', action='store_true', help='Count HG fringes')
        group.add_argument('--threshold', type=float, help='Fringe threshold as a fraction of the maximum')
        group.add_argument('--width', action='store_true', help='Centroid and second-moment widths')

        grid = parser.add_argument_group('sampling (overrides the sidecar)')
        grid.add_argument('--dx', type=float)
        grid.add_argument('--dy', type=float)
        grid.add_argument('--wavelength', type=float)

        parser.add_argument('--output-dir', help='Output directory, defaults to settings.OUTPUT_DIR')
        parser.add_argument('--name', help='Report name, defaults to the input file stem')

    def _analyses(self, options):
        requested = []
        if options['spectrum']:
            ell_min, ell_max = options['spectrum']
            requested.append(('spectrum', {'ell_min': ell_min, 'ell_max': ell_max}))
        if options['profile']:
            requested.append(('profile', {'n_bins': options['bins']}))
        if options['lobes']:
            requested.append(('lobes', {'prominence': options['prominence']}))
        if options['fringes']:
            requested.append(('fringes', {'threshold': options['threshold']}))
        if options['width'] or not requested:
            requested.append(('width', {}))

        analyses, errors = [], []
        for kind, data in requested:
            form = ANALYSIS_FORMS[kind](data={k: v for k, v in data.items() if v is not None})
            if form.is_valid():
                analyses.append({'kind': kind, **form.cleaned_data, 'extract': None})
            else:
                errors.extend(form_errors(form, kind))
        if errors:
            raise CommandError('Invalid analysis flags:\n' + '\n'.join(errors))
        return analyses

    def _load(self, path, options):
        """Returns (field or None, intensity map)."""
        kind = formats.sniff_format(path)
        if kind == 'raw':
            field = formats.load_field(path, options['dx'], options['dy'], options['wavelength'])
            return field, intensity(field)

        if options['dx'] is None:
            raise CommandError(f"{path}: images carry no pixel pitch; pass --dx")
        if kind == 'pgm':
            levels, vmin, vmax = formats.read_pgm16(path)
            values = formats.dequantize(levels, vmin, vmax)
        else:
            values = formats.read_pbm(path).astype(float)
        ny, nx = values.shape
        grid = GridSpec(
            nx=nx, ny=ny, dx=options['dx'], dy=options['dy'] or options['dx'],
            wavelength=options['wavelength'] or settings.DEFAULT_WAVELENGTH,
        )
        return None, IntensityMap(grid, values)

    def handle(self, *args, **options):
        path = Path(options['input'])
        analyses = self._analyses(options)

        try:
            field, imap = self._load(path, options)
            entries, frames = analyze_field(field, imap, analyses)
        except formats.FormatError as e:
            raise CommandError(str(e))
        except FieldError as e:
            raise CommandError(f"{path}: {e}")
        except PipelineError as e:
            raise CommandError(f"{path}: {e}")

        name = options['name'] or path.stem
        directory = Path(options['output_dir']) if options['output_dir'] else Path(settings.OUTPUT_DIR)
        report = {
            'input': path.name,
            'grid': imap.grid.to_dict(),
            'analysis': entries,
        }
        try:
            for label, frame in frames:
                self.stdout.write(str(write_csv(frame, directory / f"{name}_{label}.csv")))
            self.stdout.write(str(formats.write_json(directory / f"{name}_report.json", report)))
        except (OSError, formats.FormatError) as e:
            raise CommandError(f"Cannot write report: {e}")

        for entry in entries:
            summary = ', '.join(
                f"{key}={value}" for key, value in sorted(entry.items())
                if key not in ('kind', 'index', 'power', 'lobe_angles')
            )
            self.stdout.write(f"[{entry['index']}] {entry['kind']}: {summary}")
