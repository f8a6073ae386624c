"""
Management command to fit and persist a PCA subspace model
"""
import os

from ... import subspace
from ...cvd import RepresentationKind
from ...models import SubspaceModelFile
from ...storage import sidecar_path_for, write_json
from ...tasks import representation_images
from ..base import GaitCommand


def fit_model(manifest, document, n_components, center, kind, workers=None):
    """Fit a subspace on every recording of a manifest."""
    images = representation_images(manifest.paths, kind.value, document, workers)
    n_components = min(n_components, len(images), kind.shape[0] * kind.shape[1])
    return subspace.fit(images, n_components, center, kind)


class Command(GaitCommand):
    help = 'Fit a PCA subspace on the representations of a dataset and save it'

    def add_arguments(self, parser):
        parser.add_argument('manifest', help='Training manifest CSV')
        parser.add_argument('--output', required=True, help='Model file path')
        parser.add_argument('--components', type=int, help='Number of principal components (λ)')
        parser.add_argument('--representation', choices=[kind.value for kind in RepresentationKind])
        parser.add_argument('--no-center', action='store_true', help='Skip mean-centering')
        parser.add_argument('--workers', type=int, help='Worker threads (defaults to MDOP_THREADS)')
        self.add_config_argument(parser)

    def handle(self, *args, **options):
        run_config, document = self.load_run_config(options)
        experiment = run_config.experiment
        manifest = self.load_manifest(options['manifest'])
        kind = RepresentationKind.parse(options['representation'] or experiment.representation)
        center = experiment.center and not options['no_center']
        n_components = options['components'] or experiment.n_components
        output = os.path.abspath(options['output'])

        self.stdout.write(f'Fitting {n_components} components on {len(manifest)} {kind.value} images...')
        with self.runtime_errors():
            model = fit_model(manifest, document, n_components, center, kind, options['workers'])
            subspace.save(model, output)
            variance = subspace.explained_variance(model)
            write_json(sidecar_path_for(output), {
                'representation': kind.value,
                'p': model.p,
                'd': model.d,
                'n_components': model.n_components,
                'centered': model.centered,
                'explained_variance': variance.tolist(),
                'config_hash': run_config.hash,
                'manifest': os.path.abspath(options['manifest']),
            })

        SubspaceModelFile.objects.update_or_create(
            path=output,
            defaults={
                'representation': kind.value,
                'p': model.p,
                'd': model.d,
                'n_components': model.n_components,
                'centered': model.centered,
                'explained_variance': float(min(1.0, variance.sum())),
                'config_hash': run_config.hash,
            },
        )
        self.stdout.write(self.style.SUCCESS(
            f'Saved {output} ({100 * variance.sum():.1f} % of training variance kept)'
        ))
