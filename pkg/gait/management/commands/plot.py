"""
Management command to render exported matrices, models and sweeps as PNG
"""
import os

import pandas as pd

from ... import plots, subspace
from ...storage import read_matrix
from ..base import GaitCommand


class Command(GaitCommand):
    help = 'Render a spectrogram, CVD, mCS, eigenimage set or sweep table as PNG'

    def add_arguments(self, parser):
        parser.add_argument('input', help='Exported matrix CSV, subspace model file or sweep CSV')
        parser.add_argument('--kind', required=True, choices=plots.PLOT_KINDS)
        parser.add_argument('--output', help='PNG path (defaults to <input>_<kind>.png)')

    def handle(self, *args, **options):
        source_path = options['input']
        kind = options['kind']
        output = options['output'] or f'{os.path.splitext(source_path)[0]}_{kind}.png'

        with self.runtime_errors():
            sidecar = None
            if kind in ('spectrogram', 'cvd', 'mcs'):
                source, sidecar = read_matrix(source_path)
            elif kind == 'eigenimages':
                source = subspace.load(source_path)
            elif kind == 'kappa-lambda':
                source = pd.read_csv(source_path, index_col=0)
            else:
                source = pd.read_csv(source_path)
            if kind == 'mcs':
                output, cadence = plots.plot_mcs(source, sidecar, output)
                self.stdout.write(f'Dominant cadence {cadence:.2f} Hz')
            else:
                plots.render(kind, source, sidecar, output)
        self.stdout.write(self.style.SUCCESS(f'Wrote {output}'))
