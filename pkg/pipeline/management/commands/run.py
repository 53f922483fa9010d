"""
python manage.py run CONFIG.json [--output-dir DIR]
"""

from django.core.management.base import BaseCommand, CommandError

from pipeline.formats import FormatError
from pipeline.services import PipelineError, output_directory, run_pipeline
from pipeline.validators import ConfigValidator

# Report fields echoed to stdout per analysis kind
SUMMARY_FIELDS = {
    'spectrum': ('dominant_ell', 'bandwidth', 'mean_ell', 'range_warning'),
    'profile': ('peak_radius', 'ring_width'),
    'lobes': ('n_lobes', 'ring_radius'),
    'fringes': ('n_fringes', 'orientation'),
    'orders': ('total',),
    'efficiency': ('region', 'efficiency'),
    'width': ('widths',),
}


class Command(BaseCommand):
    help = 'Run a simulation pipeline from a JSON config and write its images, tables and report'

    def add_arguments(self, parser):
        parser.add_argument('config', help='Path to a pipeline config (JSON)')
        parser.add_argument('--output-dir', help='Output directory, defaults to settings.OUTPUT_DIR')

    def handle(self, *args, **options):
        validator = ConfigValidator()
        result = validator.validate_file(options['config'])
        if not result['valid']:
            raise CommandError(
                f"Invalid config {options['config']}:\n" + '\n'.join(result['errors'])
            )

        try:
            report = run_pipeline(result['data'], output_dir=options['output_dir'])
        except PipelineError as e:
            raise CommandError(f"Run failed at {e}")
        except FormatError as e:
            raise CommandError(str(e))

        for entry in report['analysis']:
            fields = ', '.join(
                f"{name}={entry[name]}" for name in SUMMARY_FIELDS[entry['kind']] if name in entry
            )
            self.stdout.write(f"[{entry['index']}] {entry['kind']}: {fields}")

        directory = output_directory(options['output_dir'])
        for name in report['files']:
            self.stdout.write(str(directory / name))
