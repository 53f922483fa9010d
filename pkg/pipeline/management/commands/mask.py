"""
python manage.py mask {fork|spp|axicon} [spec flags] [grid flags] [--out BASE]

Writes BASE.pbm / BASE.pgm bitmaps and a BASE.json sidecar with the full
spec and its fabrication numbers.
"""

from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from masks.specs import MaskError
from pipeline.formats import FormatError
from pipeline.forms import MASK_FORMS, GridForm
from pipeline.services import PipelineError, export_mask
from pipeline.validators import form_errors
from wavefield.grid import FieldError, GridSpec

# Element flags, named after the form fields they fill
SPEC_FLAGS = (
    'm', 'period', 'alpha', 'threshold',
    'ell', 'sectors', 'n_plate', 'n_medium', 'h0', 'profile', 'aperture_d',
)


class Command(BaseCommand):
    help = 'Render a fork grating, spiral phase plate or binary axicon to PBM/PGM files'

    def add_arguments(self, parser):
        parser.add_argument('kind', choices=sorted(MASK_FORMS))

        spec = parser.add_argument_group('element')
        spec.add_argument('--m', type=int, help='Topological charge (fork, axicon)')
        spec.add_argument('--period', type=float, help='Grating or radial period in meters')
        spec.add_argument('--alpha', type=float, help='Fork modulation depth')
        spec.add_argument('--threshold', type=float, help='Fork binarization threshold')
        spec.add_argument('--ell', type=int, help='SPP charge')
        spec.add_argument('--sectors', type=int, help='SPP sector count')
        spec.add_argument('--n', dest='n_plate', type=float, help='Refractive index of the plate')
        spec.add_argument('--n-medium', dest='n_medium', type=float, help='Index of the surrounding medium')
        spec.add_argument('--h0', type=float, help='SPP base thickness in meters')
        spec.add_argument('--profile', help='SPP relief: stepped or helical')
        spec.add_argument('--aperture', dest='aperture_d', type=float, help='Clear aperture diameter in meters')

        grid = parser.add_argument_group('grid')
        grid.add_argument('--nx', type=int, default=None)
        grid.add_argument('--ny', type=int, default=None)
        grid.add_argument('--dx', type=float, default=None)
        grid.add_argument('--dy', type=float, default=None)
        grid.add_argument('--wavelength', type=float, default=None)

        parser.add_argument('--out', help='Output base path without extension')

    def handle(self, *args, **options):
        kind = options['kind']
        errors = []

        grid_form = GridForm(data={
            'nx': options['nx'] or settings.DEFAULT_GRID_SIZE,
            'ny': options['ny'],
            'dx': options['dx'] or settings.DEFAULT_PIXEL_PITCH,
            'dy': options['dy'],
            'wavelength': options['wavelength'] or settings.DEFAULT_WAVELENGTH,
        })
        if not grid_form.is_valid():
            errors.extend(form_errors(grid_form, 'grid'))

        form_class = MASK_FORMS[kind]
        params = {name: options[name] for name in SPEC_FLAGS
                  if name in form_class.base_fields and options[name] is not None}
        ignored = [name for name in SPEC_FLAGS
                   if name not in form_class.base_fields and options[name] is not None]
        for name in ignored:
            errors.append(f"{kind}.{name}: Not a {kind} parameter.")
        spec_form = form_class(data=params)
        if not spec_form.is_valid():
            errors.extend(form_errors(spec_form, kind))

        if errors:
            raise CommandError('Invalid mask parameters:\n' + '\n'.join(errors))

        try:
            grid = GridSpec(**grid_form.cleaned_data)
        except FieldError as e:
            raise CommandError(f"Invalid grid: {e}")

        cleaned = dict(spec_form.cleaned_data)
        if kind == 'spp' and cleaned.get('aperture_d') is None:
            cleaned['aperture_d'] = min(grid.window)

        out = Path(options['out']) if options['out'] else Path(settings.OUTPUT_DIR) / kind
        try:
            sidecar = export_mask(kind, cleaned, grid, out)
        except (MaskError, PipelineError) as e:
            raise CommandError(f"Invalid {kind} mask: {e}")
        except FormatError as e:
            raise CommandError(str(e))

        for name in sidecar['files']:
            self.stdout.write(str(out.parent / name))
        for key in ('fill_factor', 'total_height', 'step_height', 'bessel_zone_length', 'etch_depth'):
            value = sidecar.get(key)
            if value is not None:
                self.stdout.write(f"{key}: {np.format_float_scientific(value, precision=4)}")
