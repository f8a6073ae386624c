"""
Management command to extract a named feature set for every recording
"""
import os

from django.core.management.base import CommandError

from ... import subspace
from ...pipeline import FEATURE_SETS, feature_names
from ...storage import feature_table, sidecar_path_for, write_json, write_table
from ...tasks import feature_matrix, load_model
from ..base import VALIDATION_ERROR, GaitCommand
from .fit_pca import fit_model


class Command(GaitCommand):
    help = 'Write a feature table (one row per recording) for phy, b1, b2, r1, r2 or pca features'

    def add_arguments(self, parser):
        parser.add_argument('manifest', help='Dataset manifest CSV')
        parser.add_argument('--set', dest='feature_set', required=True, choices=FEATURE_SETS)
        parser.add_argument('--model', help='Subspace model file, required for pca unless --fit is given')
        parser.add_argument('--fit', action='store_true', help='Fit the pca model on this manifest first')
        parser.add_argument('--output', help='Feature CSV (defaults to features_<set>.csv next to the manifest)')
        parser.add_argument('--workers', type=int, help='Worker threads (defaults to MDOP_THREADS)')
        self.add_config_argument(parser)

    def handle(self, *args, **options):
        run_config, document = self.load_run_config(options)
        manifest = self.load_manifest(options['manifest'])
        feature_set = options['feature_set']
        output = os.path.abspath(options['output'] or os.path.join(manifest.root, f'features_{feature_set}.csv'))
        model_path = options['model']

        with self.runtime_errors():
            model = None
            if feature_set == 'pca':
                if options['fit']:
                    experiment = run_config.experiment
                    model = fit_model(manifest, document, experiment.n_components, experiment.center,
                                      experiment.representation, options['workers'])
                    model_path = subspace.save(model, os.path.splitext(output)[0] + '_model.mdpc')
                    self.stdout.write(f'Fitted {model.n_components} components, saved {model_path}')
                elif not model_path:
                    raise CommandError('pca features need --model or --fit', returncode=VALIDATION_ERROR)
                else:
                    model = load_model(model_path)
            names = feature_names(feature_set, run_config.pipeline, model)

            self.stdout.write(f'Extracting {feature_set} features ({len(names)} values) '
                              f'from {len(manifest)} recordings...')
            values, missing = feature_matrix(manifest.paths, feature_set, document, model_path, options['workers'])

            rows = []
            for entry, vector, imputed in zip(manifest.entries, values, missing):
                row = {'file': entry.file, 'subject_id': entry.subject_id,
                       'class': entry.gait_class.value, 'direction': entry.direction.value,
                       'missing': ';'.join(imputed)}
                row.update(zip(names, vector))
                rows.append(row)
            write_table(feature_table(rows, names), output)
            write_json(sidecar_path_for(output), {
                'feature_set': feature_set, 'features': names, 'config_hash': run_config.hash,
                'model': os.path.abspath(model_path) if model_path else None,
            })

        incomplete = sum(1 for imputed in missing if imputed)
        if incomplete:
            self.stdout.write(self.style.WARNING(f'{incomplete} recordings have imputed features'))
        self.stdout.write(self.style.SUCCESS(f'Wrote {len(rows)} rows to {output}'))
