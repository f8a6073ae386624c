import numpy as np
from django.test import SimpleTestCase

from gait.cvd import CadenceGrid, CVDImage
from gait.exceptions import EvaluationError, LeakageError
from gait.ml import (
    ExperimentData, FixedFeaturizer, LabeledSample, SubspaceFeaturizer, beta_grouping_confusion, evaluate,
    kappa_lambda_grid, knn_classify, knn_predict, lambda_sweep, leave_one_subject_out, report_from_confusion,
    ricci_matrix, run_experiment, stratified_kfold, sweep_ricci,
)
from gait.sim import Direction, GaitClass

from .helpers import PCA_CONFUSION


def clustered_dataset(per_class=20, subjects=4, dims=6, spread=0.1, seed=0):
    """Five well separated clusters, balanced over subjects and directions."""
    rng = np.random.default_rng(seed)
    labels, subject_ids, directions, rows = [], [], [], []
    for gait_class in GaitClass:
        centre = np.zeros(dims)
        centre[gait_class.index] = 10.0
        for n in range(per_class):
            labels.append(gait_class)
            subject_ids.append(f'S{n % subjects + 1:02d}')
            directions.append('toward' if n % 2 == 0 else 'away')
            rows.append(centre + spread * rng.standard_normal(dims))
    return ExperimentData(labels, subject_ids, directions), np.vstack(rows)


def brute_force_knn(train, labels, query, kappa):
    distances = [np.linalg.norm(row - query) for row in train]
    order = sorted(range(len(train)), key=lambda i: (distances[i], i))[:kappa]
    votes = {}
    for i in order:
        votes[labels[i]] = votes.get(labels[i], 0) + 1
    best = max(votes.values())
    tied = {label for label, count in votes.items() if count == best}
    return next(labels[i] for i in order if labels[i] in tied)


class LeakyFeaturizer(FixedFeaturizer):

    def fit(self, indices):
        self.fitted_indices = np.arange(self.matrix.shape[0])


class KnnTests(SimpleTestCase):

    def test_single_training_sample(self):
        predictions = knn_predict([[0.0, 0.0]], [3], [[5.0, 5.0], [-1.0, 2.0]])
        np.testing.assert_array_equal(predictions, [3, 3])

    def test_exact_match_wins(self):
        train = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
        self.assertEqual(knn_predict(train, [0, 1, 2], [[1.0, 1.0]])[0], 1)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(1)
        train = rng.standard_normal((50, 3))
        labels = rng.integers(0, 5, 50)
        queries = rng.standard_normal((200, 3))
        for kappa in (1, 3, 5):
            with self.subTest(kappa=kappa):
                expected = [brute_force_knn(train, labels, q, kappa) for q in queries]
                np.testing.assert_array_equal(knn_predict(train, labels, queries, kappa), expected)

    def test_randomized_trials_with_ties(self):
        # integer grids produce exact distance and vote ties
        rng = np.random.default_rng(7)
        for _ in range(10000):
            n = int(rng.integers(1, 16))
            train = rng.integers(-3, 4, size=(n, int(rng.integers(1, 4)))).astype(float)
            labels = rng.integers(0, 5, n)
            query = rng.integers(-3, 4, size=train.shape[1]).astype(float)
            kappa = int(rng.integers(1, n + 1))
            self.assertEqual(knn_predict(train, labels, query, kappa)[0],
                             brute_force_knn(train, labels, query, kappa))

    def test_equal_distances_keep_lower_index(self):
        train = np.array([[1.0], [-1.0]])
        self.assertEqual(knn_predict(train, [4, 2], [[0.0]])[0], 4)

    def test_vote_tie_goes_to_nearest(self):
        train = np.array([[0.5], [1.0], [-2.0], [3.0]])
        # two votes each for classes 1 and 0; class 0 holds the nearest neighbour
        labels = [0, 1, 0, 1]
        self.assertEqual(knn_predict(train, labels, [[0.0]], 4)[0], 0)

    def test_majority_beats_nearest(self):
        train = np.array([[0.1], [1.0], [1.1], [5.0]])
        self.assertEqual(knn_predict(train, [0, 2, 2, 0], [[0.0]], 3)[0], 2)

    def test_feature_order_does_not_matter(self):
        # integer features keep every distance exact, ties included
        rng = np.random.default_rng(11)
        for _ in range(200):
            dims = int(rng.integers(2, 6))
            train = rng.integers(-4, 5, size=(20, dims)).astype(float)
            labels = rng.integers(0, 5, 20)
            queries = rng.integers(-4, 5, size=(10, dims)).astype(float)
            order = rng.permutation(dims)
            kappa = int(rng.integers(1, 8))
            np.testing.assert_array_equal(
                knn_predict(train[:, order], labels, queries[:, order], kappa),
                knn_predict(train, labels, queries, kappa),
            )

    def test_invalid_arguments(self):
        with self.assertRaises(EvaluationError):
            knn_predict(np.empty((0, 2)), [], [[0.0, 0.0]])
        with self.assertRaises(EvaluationError):
            knn_predict([[0.0, 0.0]], [0], [[0.0, 0.0]], kappa=2)
        with self.assertRaises(EvaluationError):
            knn_predict([[0.0, 0.0]], [0], [[0.0, 0.0, 0.0]])

    def test_classify_labeled_samples(self):
        train = [
            LabeledSample([0.0, 0.0], 'NW'),
            LabeledSample([5.0, 5.0], GaitClass.CWOOS),
        ]
        self.assertIs(knn_classify(train, np.array([4.0, 4.5])), GaitClass.CWOOS)
        self.assertIs(knn_classify(([[0.0], [9.0]], ['L1', 'L2']), np.array([1.0])), GaitClass.L1)

    def test_classify_empty_training_set(self):
        with self.assertRaises(EvaluationError):
            knn_classify([], np.zeros(2))

    def test_sample_rejects_nan(self):
        with self.assertRaises(EvaluationError):
            LabeledSample([0.0, np.nan], 'NW')


class SplitTests(SimpleTestCase):
    labels = [c for c in GaitClass for _ in range(200)]

    def test_stratified_folds(self):
        splits = stratified_kfold(self.labels, 10, seed=3)
        self.assertEqual(len(splits), 10)
        y = np.array([c.index for c in self.labels])
        seen = []
        for train, test in splits:
            self.assertEqual(np.intersect1d(train, test).size, 0)
            self.assertEqual(train.size + test.size, 1000)
            np.testing.assert_array_equal(np.bincount(y[test], minlength=5), [20] * 5)
            seen.extend(test)
        self.assertEqual(sorted(seen), list(range(1000)))

    def test_seed_determines_folds(self):
        first = stratified_kfold(self.labels, 10, seed=3)
        second = stratified_kfold(self.labels, 10, seed=3)
        other = stratified_kfold(self.labels, 10, seed=4)
        for (_, a), (_, b) in zip(first, second):
            np.testing.assert_array_equal(a, b)
        self.assertFalse(all(np.array_equal(a, b) for (_, a), (_, b) in zip(first, other)))

    def test_class_smaller_than_k(self):
        with self.assertRaises(EvaluationError):
            stratified_kfold(['NW'] * 20 + ['L1'] * 5, 10)

    def test_leave_one_subject_out(self):
        subjects = [f'S{n % 10 + 1:02d}' for n in range(1000)]
        splits = leave_one_subject_out(subjects)
        self.assertEqual(len(splits), 10)
        groups = np.array(subjects)
        covered = []
        for subject, train, test in splits:
            self.assertTrue(np.all(groups[test] == subject))
            self.assertNotIn(subject, set(groups[train]))
            covered.extend(test)
        self.assertEqual(sorted(covered), list(range(1000)))

    def test_single_subject(self):
        with self.assertRaises(EvaluationError):
            leave_one_subject_out(['S01'] * 5)


class MetricTests(SimpleTestCase):

    def test_pca_confusion(self):
        report = report_from_confusion(PCA_CONFUSION)
        self.assertAlmostEqual(report.accuracy, 0.938)
        self.assertAlmostEqual(report.fpr, 0.065)
        self.assertAlmostEqual(report.fnr, 0.02125)
        self.assertAlmostEqual(report.tpr, 0.97875)

    def test_perfect_predictions(self):
        truths = [c for c in GaitClass for _ in range(3)]
        report = evaluate(truths, truths)
        self.assertEqual((report.accuracy, report.fpr, report.fnr, report.tpr), (1.0, 0.0, 0.0, 1.0))
        np.testing.assert_array_equal(report.confusion, 3 * np.eye(5))

    def test_all_predicted_normal(self):
        truths = [c for c in GaitClass for _ in range(2)]
        report = evaluate(['NW'] * len(truths), truths)
        self.assertEqual(report.fpr, 0.0)
        self.assertEqual(report.fnr, 1.0)
        self.assertAlmostEqual(report.accuracy, 0.2)

    def test_labels_in_any_form(self):
        report = evaluate([0, 'L1', GaitClass.L2], ['nw', 1, 'L2'])
        self.assertEqual(report.accuracy, 1.0)

    def test_fold_halfwidths(self):
        truths = ['NW', 'L1'] * 4
        predictions = ['NW', 'L1', 'NW', 'L1', 'NW', 'NW', 'L1', 'NW']
        folds = [np.array([0, 1]), np.array([2, 3]), np.array([4, 5]), np.array([6, 7])]
        report = evaluate(predictions, truths, folds=folds)
        scores = [1.0, 1.0, 0.5, 0.0]
        self.assertEqual(report.n_folds, 4)
        self.assertAlmostEqual(report.ci95_halfwidth, 1.96 * np.std(scores, ddof=1) / 2)

    def test_percent_rows_sum_to_hundred(self):
        percent = report_from_confusion(PCA_CONFUSION).percent_confusion
        np.testing.assert_allclose(percent.sum(axis=1), 100.0)
        self.assertAlmostEqual(percent[0, 0], 93.5)

    def test_empty_row_stays_zero(self):
        counts = np.eye(5, dtype=int)
        counts[4, 4] = 0
        percent = report_from_confusion(counts).percent_confusion
        self.assertFalse(percent[4].any())

    def test_to_dict(self):
        document = report_from_confusion(PCA_CONFUSION).to_dict()
        self.assertEqual(document['classes'], ['NW', 'L1', 'L2', 'CW', 'CW/oos'])
        self.assertEqual(document['confusion'][3], [13, 8, 1, 177, 1])
        self.assertAlmostEqual(document['accuracy'], 0.938)

    def test_invalid_inputs(self):
        with self.assertRaises(EvaluationError):
            report_from_confusion(np.ones((4, 4)))
        with self.assertRaises(EvaluationError):
            report_from_confusion(np.zeros((5, 5)))
        with self.assertRaises(EvaluationError):
            evaluate(['NW'], ['NW', 'L1'])
        with self.assertRaises(EvaluationError):
            evaluate([], [])


class ExperimentTests(SimpleTestCase):

    def setUp(self):
        self.data, self.matrix = clustered_dataset()

    def test_separable_clusters(self):
        report = run_experiment(self.data, FixedFeaturizer(self.matrix), folds=10, seed=1)
        self.assertEqual(report.accuracy, 1.0)
        self.assertEqual(report.n_folds, 10)
        self.assertEqual(report.meta['n_samples'], 100)
        self.assertEqual(report.ci95_halfwidth, 0.0)

    def test_fit_hook_sees_disjoint_indices(self):
        calls = []

        def on_fit(fold, train, test):
            calls.append(fold)
            self.assertEqual(np.intersect1d(train, test).size, 0)

        run_experiment(self.data, FixedFeaturizer(self.matrix), folds=5, on_fit=on_fit)
        self.assertEqual(calls, [0, 1, 2, 3, 4])

    def test_leakage_is_detected(self):
        with self.assertRaises(LeakageError):
            run_experiment(self.data, LeakyFeaturizer(self.matrix), folds=5)

    def test_direction_split(self):
        report = run_experiment(self.data, FixedFeaturizer(self.matrix), folds=5, direction='away')
        self.assertEqual(report.meta['n_samples'], 50)
        self.assertEqual(report.meta['direction'], 'away')

    def test_leave_one_subject_out(self):
        report = run_experiment(self.data, FixedFeaturizer(self.matrix), scheme='loso')
        self.assertEqual(report.n_folds, 4)
        self.assertEqual(report.accuracy, 1.0)

    def test_subspace_featurizer(self):
        images = [row.reshape(2, 3) for row in self.matrix]
        featurizer = SubspaceFeaturizer(images, 4)
        report = run_experiment(self.data, featurizer, folds=5, standardize=True)
        self.assertEqual(report.accuracy, 1.0)
        self.assertEqual(featurizer.model.n_components, 4)

    def test_deterministic(self):
        data, matrix = clustered_dataset(spread=6.0, seed=2)
        first = run_experiment(data, FixedFeaturizer(matrix), kappa=3, folds=5, seed=7)
        second = run_experiment(data, FixedFeaturizer(matrix), kappa=3, folds=5, seed=7)
        np.testing.assert_array_equal(first.confusion, second.confusion)

    def test_unknown_scheme(self):
        with self.assertRaises(EvaluationError):
            run_experiment(self.data, FixedFeaturizer(self.matrix), scheme='bootstrap')

    def test_direction_without_recordings(self):
        data = ExperimentData(['NW'] * 12, ['S01'] * 12, ['toward'] * 12)
        with self.assertRaises(EvaluationError):
            run_experiment(data, FixedFeaturizer(np.zeros((12, 2))), direction=Direction.AWAY.value)

    def test_mismatched_data(self):
        with self.assertRaises(EvaluationError):
            ExperimentData(['NW', 'L1'], ['S01'], ['toward', 'away'])


class SweepTests(SimpleTestCase):

    def setUp(self):
        self.data, matrix = clustered_dataset()
        self.images = list(matrix)

    def test_lambda_sweep(self):
        frame = lambda_sweep(self.data, self.images, [3, 1, 2], folds=5)
        self.assertEqual(list(frame.columns), ['n_components', 'accuracy', 'ci95_halfwidth', 'fpr', 'fnr'])
        self.assertEqual(frame['n_components'].tolist(), [1, 2, 3])
        self.assertTrue(frame['accuracy'].between(0.0, 1.0).all())

    def test_lambda_sweep_matches_run_experiment(self):
        frame = lambda_sweep(self.data, self.images, [4], folds=5, seed=2)
        report = run_experiment(self.data, SubspaceFeaturizer(self.images, 4), folds=5, seed=2)
        self.assertAlmostEqual(frame['accuracy'].iloc[0], report.accuracy)

    def test_kappa_lambda_grid(self):
        grid = kappa_lambda_grid(self.data, self.images, [1, 3], [2, 4], scheme='kfold', folds=5)
        self.assertEqual(grid.shape, (2, 2))
        self.assertEqual(list(grid.index), [1, 3])
        self.assertFalse(grid.isna().any().any())

    def test_ricci_matrix_marks_unusable_recordings(self):
        axis = CadenceGrid().axis
        values = np.zeros((101, 129))
        values[10:71] = 1.0
        image = CVDImage(values, axis, np.arange(101) * 5.0)
        rows = ricci_matrix([image, image, image], [1.0, 0.0, 6.0], 5, 0.05)
        np.testing.assert_array_equal(rows, [[1.0, 50.0, 350.0], [0.0, 0.0, 0.0], [6.0, 0.0, 0.0]])

    def test_sweep_ricci(self):
        axis = CadenceGrid().axis
        rng = np.random.default_rng(0)
        cvds, f_mDs = [], []
        for label in self.data.labels:
            values = rng.random((101, 129)) * 0.01
            values[10 * label + 5:10 * label + 30] = 1.0
            cvds.append(CVDImage(values, axis, np.arange(101) * 5.0))
            f_mDs.append(1.0)
        frame = sweep_ricci(self.data, cvds, f_mDs, [3, 5], [0.05, 0.5], folds=5)
        self.assertEqual(len(frame), 4)
        self.assertEqual(list(frame.columns), ['delta', 'gamma', 'accuracy', 'fpr', 'fnr'])
        self.assertEqual(frame['accuracy'].min(), 1.0)


class BetaGroupingTests(SimpleTestCase):

    def test_correct_ratios(self):
        betas = [1.0, 1.0, 0.5, 0.5, 1.0 / 3.0]
        labels = ['NW', 'L2', 'L1', 'CW', 'CW/oos']
        frame = beta_grouping_confusion(betas, labels)
        np.testing.assert_array_equal(np.diag(frame.to_numpy()[:, :3]), [100.0, 100.0, 100.0])
        self.assertEqual(list(frame.index), ['NW/L2', 'L1/CW', 'CW/oos'])

    def test_missing_ratio_column(self):
        frame = beta_grouping_confusion([0.0, 1.0], [GaitClass.NW, GaitClass.NW.index])
        self.assertEqual(frame.loc['NW/L2', 'missing'], 50.0)
        self.assertEqual(frame.loc['NW/L2', 'NW/L2'], 50.0)
        self.assertFalse(frame.loc['L1/CW'].any())
