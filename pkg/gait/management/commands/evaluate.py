"""
Management command to run a cross-validated classification experiment
"""
import logging
import os

import pandas as pd
from django.core.management.base import CommandError
from django.utils import timezone

from ... import ml, plots, reports
from ...exceptions import EvaluationError, LeakageError
from ...models import EvaluationRun
from ...pipeline import FEATURE_SETS
from ...storage import write_table
from ...tasks import feature_matrix, representation_images, ricci_data
from ..base import VALIDATION_ERROR, GaitCommand

logger = logging.getLogger(__name__)

DIRECTIONS = ('pooled', 'toward', 'away')
SWEEPS = ('lambda', 'kappa-lambda', 'ricci')


def _numbers(text, cast):
    try:
        return [cast(value) for value in text.split(',') if value.strip()]
    except ValueError:
        raise CommandError(f'Cannot parse list {text!r}', returncode=VALIDATION_ERROR)


class Command(GaitCommand):
    help = 'Cross-validate a kNN classifier on one feature set and write the evaluation report'

    def add_arguments(self, parser):
        parser.add_argument('manifest', help='Dataset manifest CSV')
        parser.add_argument('--features', default='pca', choices=FEATURE_SETS, help='Feature set (default pca)')
        parser.add_argument('--outdir', help='Report directory (defaults to MEDIA_ROOT/reports)')
        parser.add_argument('--sweep', action='append', default=[], choices=SWEEPS,
                            help='Additional parameter sweep; may be repeated')
        parser.add_argument('--lambdas', default=','.join(str(n) for n in range(1, 41)),
                            help='Comma-separated component counts for the lambda sweeps')
        parser.add_argument('--kappas', default='1,3,5,7,9,11,15,20,24',
                            help='Comma-separated neighbour counts for the kappa-lambda grid')
        parser.add_argument('--deltas', default='1,3,5,7,9', help='Column spans for the ricci sweep')
        parser.add_argument('--gammas', default='0.01,0.02,0.05,0.1,0.2', help='Thresholds for the ricci sweep')
        parser.add_argument('--no-pdf', action='store_true', help='Skip the PDF report')
        parser.add_argument('--workers', type=int, help='Worker threads (defaults to MDOP_THREADS)')
        self.add_config_argument(parser)

    def handle(self, *args, **options):
        run_config, document = self.load_run_config(options)
        manifest = self.load_manifest(options['manifest'])
        experiment = run_config.experiment
        feature_set = options['features']
        sweeps = {
            'lambdas': _numbers(options['lambdas'], int),
            'kappas': _numbers(options['kappas'], int),
            'deltas': _numbers(options['deltas'], int),
            'gammas': _numbers(options['gammas'], float),
        }

        run = EvaluationRun.objects.create(
            manifest_path=os.path.abspath(options['manifest']),
            feature_set=feature_set,
            scheme=experiment.scheme,
            direction=experiment.direction,
            kappa=experiment.kappa,
            n_components=experiment.n_components if feature_set == 'pca' else None,
            config_hash=run_config.hash,
            status='running',
        )
        try:
            with self.runtime_errors():
                primary, paths = self._evaluate(manifest, run_config, document, feature_set, options, sweeps)
        except CommandError as exc:
            run.status = 'failed'
            run.error_message = str(exc)
            run.finished_at = timezone.now()
            run.save()
            raise

        passed = self._acceptance(primary, experiment)
        run.status = 'completed'
        run.accuracy = primary.accuracy
        run.fpr = primary.fpr
        run.fnr = primary.fnr
        run.tpr = primary.tpr
        run.ci95_halfwidth = primary.ci95_halfwidth
        run.report_path = paths['json']
        run.passed = passed
        run.finished_at = timezone.now()
        run.save()

        for kind, path in paths.items():
            self.stdout.write(f'  {kind}: {path}')
        summary = (f'{feature_set} {experiment.scheme}/{experiment.direction}: '
                   f'ACC {100 * primary.accuracy:.1f} ± {100 * primary.ci95_halfwidth:.1f} %, '
                   f'FPR {100 * primary.fpr:.1f} %, FNR {100 * primary.fnr:.1f} %')
        if passed is False:
            raise CommandError(f'Acceptance thresholds not met: {summary}', returncode=VALIDATION_ERROR)
        self.stdout.write(self.style.SUCCESS(summary))

    @staticmethod
    def _acceptance(report, experiment):
        if experiment.min_accuracy is None and experiment.max_fnr is None:
            return None
        passed = True
        if experiment.min_accuracy is not None:
            passed &= report.accuracy >= experiment.min_accuracy
        if experiment.max_fnr is not None:
            passed &= report.fnr <= experiment.max_fnr
        return bool(passed)

    def _evaluate(self, manifest, run_config, document, feature_set, options, sweeps):
        experiment = run_config.experiment
        workers = options['workers']
        data = ml.ExperimentData(
            labels=[entry.gait_class for entry in manifest.entries],
            subjects=[entry.subject_id for entry in manifest.entries],
            directions=[entry.direction for entry in manifest.entries],
        )
        images = matrix = None
        self.stdout.write(f'Computing {feature_set} inputs for {len(manifest)} recordings...')
        if feature_set == 'pca':
            images = representation_images(manifest.paths, experiment.representation.value, document, workers)

            def featurizer():
                return ml.SubspaceFeaturizer(images, experiment.n_components, experiment.center,
                                             experiment.representation)
        else:
            matrix, _ = feature_matrix(manifest.paths, feature_set, document, None, workers)

            def featurizer():
                return ml.FixedFeaturizer(matrix, name=feature_set)

        results = {}
        for direction in DIRECTIONS:
            try:
                results[direction] = ml.run_experiment(
                    data, featurizer(), experiment.kappa, experiment.scheme, experiment.folds,
                    experiment.seed, direction, experiment.standardize,
                )
            except LeakageError:
                raise
            except EvaluationError as exc:
                if direction == experiment.direction:
                    raise
                logger.warning('%s evaluation skipped: %s', direction, exc)
                self.stdout.write(self.style.WARNING(f'Skipped {direction}: {exc}'))
        primary = results[experiment.direction]

        meta = {
            'manifest': os.path.abspath(options['manifest']),
            'feature_set': feature_set,
            'scheme': experiment.scheme,
            'folds': experiment.folds if experiment.scheme == 'kfold' else None,
            'seed': experiment.seed,
            'kappa': experiment.kappa,
            'n_components': experiment.n_components if feature_set == 'pca' else None,
            'representation': experiment.representation.value if feature_set == 'pca' else None,
            'standardize': experiment.standardize,
            'config_hash': run_config.hash,
            'thresholds': {'min_accuracy': experiment.min_accuracy, 'max_fnr': experiment.max_fnr},
            'passed': self._acceptance(primary, experiment),
        }
        directory = reports.report_dir(options['outdir'])
        stem = reports.report_stem(feature_set, experiment.scheme)
        paths = reports.write_evaluation(
            reports.evaluation_document(results, experiment.direction, meta), primary, directory, stem,
        )

        beta_groups = None
        if feature_set == 'phy':
            betas = matrix[:, 3]
            frames = []
            for direction in DIRECTIONS:
                selected = data.select(direction)
                frame = ml.beta_grouping_confusion(betas[selected], data.labels[selected])
                frame.insert(0, 'direction', direction)
                frames.append(frame)
                if direction == experiment.direction:
                    beta_groups = frame.drop(columns='direction')
            paths['beta_groups'] = write_table(
                pd.concat(frames).rename_axis('expected'),
                os.path.join(directory, f'{stem}_beta_groups.csv'), index=True,
            )

        if {'lambda', 'kappa-lambda'} & set(options['sweep']):
            if images is None:
                images = representation_images(manifest.paths, experiment.representation.value, document, workers)
            if 'lambda' in options['sweep']:
                frame = ml.lambda_sweep(data, images, sweeps['lambdas'], experiment.kappa, experiment.center,
                                        experiment.scheme, experiment.folds, experiment.seed, experiment.direction)
                paths['lambda_sweep'] = write_table(frame, os.path.join(directory, f'{stem}_lambda_sweep.csv'))
                paths['lambda_plot'] = plots.plot_lambda_sweep(frame, os.path.join(directory, f'{stem}_lambda_sweep.png'))
            if 'kappa-lambda' in options['sweep']:
                grid = ml.kappa_lambda_grid(data, images, sweeps['kappas'], sweeps['lambdas'], experiment.center,
                                            experiment.scheme, experiment.folds, experiment.seed, experiment.direction)
                paths['kappa_lambda'] = write_table(grid, os.path.join(directory, f'{stem}_kappa_lambda.csv'), index=True)
        if 'ricci' in options['sweep']:
            cvds, f_mDs = ricci_data(manifest.paths, document, workers)
            frame = ml.sweep_ricci(data, cvds, f_mDs, sweeps['deltas'], sweeps['gammas'], experiment.kappa,
                                   experiment.scheme, experiment.folds, experiment.seed, experiment.direction)
            paths['ricci_sweep'] = write_table(frame, os.path.join(directory, f'{stem}_ricci_sweep.csv'))

        if not options['no_pdf']:
            paths['pdf'] = reports.generate_pdf_report(
                results, experiment.direction, {k: v for k, v in meta.items() if k != 'thresholds'},
                os.path.join(directory, f'{stem}.pdf'), beta_groups,
            )
        return primary, paths
