import json
import os
from io import StringIO
from tempfile import TemporaryDirectory

import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase

from gait.config import build_run_config
from gait.management.commands.evaluate import Command as EvaluateCommand
from gait.ml import report_from_confusion
from gait.models import EvaluationRun, SimulatedDataset, SubspaceModelFile
from gait.storage import load_manifest, read_json, read_matrix
from gait.subspace import load

from .helpers import PCA_CONFUSION


def run(*args):
    out = StringIO()
    call_command(*args, stdout=out, stderr=StringIO())
    return out.getvalue()


class CommandTestCase(TestCase):
    """A small noiseless corpus: 2 subjects, 4 runs per class, half toward and half away."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = TemporaryDirectory()
        cls.root = os.path.join(cls.tmp.name, 'corpus')
        cls.simulate_output = run('simulate', '--output', cls.root, '--subjects', '2', '--runs', '2',
                                  '--noiseless', '--seed', '3', '--workers', '2')
        cls.manifest = os.path.join(cls.root, 'manifest.csv')

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()
        super().tearDownClass()

    def setUp(self):
        self.outdir = TemporaryDirectory()
        self.addCleanup(self.outdir.cleanup)

    def out(self, *parts):
        return os.path.join(self.outdir.name, *parts)

    def write_config(self, document):
        path = self.out('run.json')
        with open(path, 'w') as stream:
            json.dump(document, stream)
        return path

    def assertExitCode(self, code, *args):
        with self.assertRaises(CommandError) as ctx:
            run(*args)
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception


class SimulateCommandTests(CommandTestCase):

    def test_manifest_and_files(self):
        manifest = load_manifest(self.manifest)
        self.assertEqual(len(manifest), 20)
        self.assertEqual(manifest.class_counts(), {'NW': 4, 'L1': 4, 'L2': 4, 'CW': 4, 'CW/oos': 4})
        self.assertTrue(all(os.path.isfile(path) for path in manifest.paths))
        self.assertIn('S01_CWOOS_01.iq', [entry.file for entry in manifest.entries])
        self.assertIn('Wrote 20 recordings', self.simulate_output)

    def test_dataset_record(self):
        dataset = SimulatedDataset.objects.get(root=self.root)
        self.assertEqual((dataset.subjects, dataset.runs_per_class, dataset.recording_count), (2, 2, 20))
        self.assertIsNone(dataset.noise_snr)
        self.assertEqual(dataset.config_hash, build_run_config().hash)
        info = read_json(os.path.join(self.root, 'dataset.json'))
        self.assertEqual(info['seed'], 3)

    def test_invalid_run_config(self):
        config = self.write_config({'simulation': {'speed': 2}})
        self.assertExitCode(1, 'simulate', '--output', self.out('x'), '--config', config)


class RepresentCommandTests(CommandTestCase):

    def test_exports_matrix_and_sidecar(self):
        run('represent', self.manifest, '--kind', 'CVD', '--outdir', self.out('cvd'), '--workers', '1')
        files = sorted(os.listdir(self.out('cvd')))
        self.assertEqual(len([name for name in files if name.endswith('.csv')]), 20)
        matrix, sidecar = read_matrix(self.out('cvd', 'S01_NW_00_cvd.csv'))
        self.assertEqual(matrix.shape, (101, 129))
        self.assertEqual(sidecar['kind'], 'CVD')
        self.assertEqual(sidecar['recording'], 'S01_NW_00.iq')
        self.assertEqual(sidecar['shape'], [101, 129])

    def test_missing_manifest(self):
        self.assertExitCode(1, 'represent', self.out('none.csv'), '--kind', 'CVD', '--outdir', self.out('x'))


class FeaturizeCommandTests(CommandTestCase):

    def test_physical_features(self):
        output = self.out('phy.csv')
        run('featurize', self.manifest, '--set', 'phy', '--output', output)
        frame = pd.read_csv(output, keep_default_na=False)
        self.assertEqual(len(frame), 20)
        self.assertEqual(list(frame.columns[4:-1]), ['f_mD', 'fDmax', 'cv', 'beta', 'alpha1', 'alpha2',
                                                     'alpha3', 'alpha4', 'alpha5'])
        self.assertEqual(read_json(self.out('phy.json'))['feature_set'], 'phy')

    def test_pca_with_fitted_model(self):
        output = self.out('pca.csv')
        config = self.write_config({'pca': {'n_components': 4}})
        run('featurize', self.manifest, '--set', 'pca', '--fit', '--output', output, '--config', config)
        frame = pd.read_csv(output, keep_default_na=False)
        self.assertEqual([c for c in frame.columns if c.startswith('pca_')], ['pca_01', 'pca_02', 'pca_03', 'pca_04'])
        self.assertEqual(load(self.out('pca_model.mdpc')).n_components, 4)

    def test_pca_without_model(self):
        self.assertExitCode(1, 'featurize', self.manifest, '--set', 'pca', '--output', self.out('pca.csv'))

    def test_unreadable_config(self):
        self.assertExitCode(1, 'featurize', self.manifest, '--set', 'phy', '--config', self.out('absent.json'))


class FitPcaCommandTests(CommandTestCase):

    def test_fit_and_record(self):
        output = self.out('model.mdpc')
        run('fit_pca', self.manifest, '--output', output, '--components', '5', '--representation', 'MCS_PRE')
        model = load(output)
        self.assertEqual((model.p, model.d, model.n_components), (129, 20, 5))
        sidecar = read_json(self.out('model.json'))
        self.assertEqual(len(sidecar['explained_variance']), 5)
        record = SubspaceModelFile.objects.get(path=output)
        self.assertEqual(record.representation, 'MCS_PRE')
        self.assertLessEqual(record.explained_variance, 1.0)

    def test_components_capped_by_training_set(self):
        output = self.out('model.mdpc')
        run('fit_pca', self.manifest, '--output', output, '--representation', 'MCS')
        self.assertEqual(load(output).n_components, 20)


class EvaluateCommandTests(CommandTestCase):

    def test_pca_evaluation(self):
        config = self.write_config({'cv': {'folds': 2}, 'pca': {'n_components': 5}})
        output = run('evaluate', self.manifest, '--features', 'pca', '--outdir', self.out('reports'),
                     '--config', config, '--sweep', 'lambda', '--lambdas', '1,3,5')
        report_run = EvaluationRun.objects.get()
        self.assertEqual(report_run.status, 'completed')
        self.assertIsNone(report_run.passed)
        document = read_json(report_run.report_path)
        self.assertEqual(document['feature_set'], 'pca')
        self.assertEqual(document['n_folds'], 2)
        self.assertEqual(set(document['directions']), {'pooled', 'toward', 'away'})
        files = os.listdir(self.out('reports'))
        self.assertTrue(any(name.endswith('.pdf') for name in files))
        self.assertTrue(any(name.endswith('_lambda_sweep.csv') for name in files))
        self.assertTrue(any(name.endswith('_confusion.csv') for name in files))
        self.assertIn('ACC', output)

    def test_physical_evaluation_writes_beta_groups(self):
        config = self.write_config({'cv': {'scheme': 'loso'}, 'knn': {'kappa': 1}})
        run('evaluate', self.manifest, '--features', 'phy', '--outdir', self.out('reports'),
            '--config', config, '--no-pdf')
        files = os.listdir(self.out('reports'))
        self.assertTrue(any(name.endswith('_beta_groups.csv') for name in files))
        self.assertFalse(any(name.endswith('.pdf') for name in files))
        document = read_json(EvaluationRun.objects.get().report_path)
        self.assertEqual(document['n_folds'], 2)

    def test_bad_list_argument(self):
        self.assertExitCode(1, 'evaluate', self.manifest, '--lambdas', '1,two', '--outdir', self.out('r'))

    def test_failed_run_is_recorded(self):
        # 2 recordings per class and direction cannot fill 10 folds
        config = self.write_config({'cv': {'direction': 'toward'}})
        self.assertExitCode(2, 'evaluate', self.manifest, '--features', 'b2', '--outdir', self.out('r'),
                            '--config', config, '--no-pdf')
        report_run = EvaluationRun.objects.get()
        self.assertEqual(report_run.status, 'failed')
        self.assertIn('at least 10 members', report_run.error_message)

    def test_acceptance_thresholds(self):
        report = report_from_confusion(PCA_CONFUSION)
        experiment = build_run_config({'acceptance': {'min_accuracy': 0.9, 'max_fnr': 0.05}}).experiment
        self.assertTrue(EvaluateCommand._acceptance(report, experiment))
        experiment = build_run_config({'acceptance': {'min_accuracy': 0.95}}).experiment
        self.assertFalse(EvaluateCommand._acceptance(report, experiment))
        self.assertIsNone(EvaluateCommand._acceptance(report, build_run_config().experiment))


class PlotCommandTests(CommandTestCase):

    def test_plots_exported_matrices(self):
        run('represent', self.manifest, '--kind', 'MCS', '--outdir', self.out('mcs'))
        source = self.out('mcs', 'S02_L1_00_mcs.csv')
        output = run('plot', source, '--kind', 'mcs')
        self.assertIn('Dominant cadence', output)
        self.assertTrue(os.path.isfile(self.out('mcs', 'S02_L1_00_mcs_mcs.png')))

    def test_plots_model(self):
        model_path = self.out('model.mdpc')
        run('fit_pca', self.manifest, '--output', model_path, '--components', '3', '--representation', 'CVD')
        run('plot', model_path, '--kind', 'eigenimages', '--output', self.out('eigen.png'))
        self.assertTrue(os.path.isfile(self.out('eigen.png')))

    def test_unreadable_input(self):
        self.assertExitCode(2, 'plot', self.out('absent.csv'), '--kind', 'cvd')
