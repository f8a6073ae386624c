"""
Management command to export fixed-size representations of every recording
"""
import os

from ...cvd import RepresentationKind
from ...tasks import represent_recording, run_batch
from ..base import GaitCommand


class Command(GaitCommand):
    help = 'Export one representation per recording as CSV plus a JSON sidecar'

    def add_arguments(self, parser):
        parser.add_argument('manifest', help='Dataset manifest CSV')
        parser.add_argument('--kind', required=True, choices=[kind.value for kind in RepresentationKind])
        parser.add_argument('--outdir', required=True, help='Output directory')
        parser.add_argument('--workers', type=int, help='Worker threads (defaults to MDOP_THREADS)')
        self.add_config_argument(parser)

    def handle(self, *args, **options):
        run_config, document = self.load_run_config(options)
        manifest = self.load_manifest(options['manifest'])
        kind = RepresentationKind.parse(options['kind'])
        outdir = os.path.abspath(options['outdir'])
        rows, columns = kind.shape

        arguments = []
        for path in manifest.paths:
            stem = os.path.splitext(os.path.basename(path))[0]
            arguments.append((path, kind.value, document, os.path.join(outdir, f'{stem}_{kind.value.lower()}.csv')))

        self.stdout.write(f'Computing {kind.value} ({rows}x{columns}) for {len(arguments)} recordings...')
        with self.runtime_errors():
            os.makedirs(outdir, exist_ok=True)
            written = run_batch(represent_recording, arguments, options['workers'])
        self.stdout.write(self.style.SUCCESS(f'Wrote {len(written)} {kind.value} matrices to {outdir}'))
