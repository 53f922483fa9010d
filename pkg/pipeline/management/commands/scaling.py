"""
python manage.py scaling CONFIG.json --charges L1 L2 [...] [--output-dir DIR]
"""

from django.core.management.base import BaseCommand, CommandError

from pipeline.formats import FormatError
from pipeline.services import PipelineError, output_directory, run_scaling
from pipeline.validators import ConfigValidator


class Command(BaseCommand):
    help = 'Run one pipeline per charge and tabulate the ring radius against sqrt(l)'

    def add_arguments(self, parser):
        parser.add_argument('config', help='Path to a pipeline config (JSON) with an spp element or LG source')
        parser.add_argument('--charges', type=int, nargs='+', required=True, help='Topological charges to run')
        parser.add_argument('--output-dir', help='Output directory, defaults to settings.OUTPUT_DIR')

    def handle(self, *args, **options):
        result = ConfigValidator().validate_file(options['config'])
        if not result['valid']:
            raise CommandError(
                f"Invalid config {options['config']}:\n" + '\n'.join(result['errors'])
            )

        try:
            report = run_scaling(result['data'], options['charges'], output_dir=options['output_dir'])
        except PipelineError as e:
            raise CommandError(f"Scaling study failed at {e}")
        except FormatError as e:
            raise CommandError(str(e))

        for ring in report['rings']:
            self.stdout.write(f"l={ring['ell']}: ring_radius={ring['ring_radius']:.4e}")

        directory = output_directory(options['output_dir'])
        for name in report['files']:
            self.stdout.write(str(directory / name))
