"""
Nearest-neighbour classification, cross-validation and evaluation metrics.

Positive class convention: abnormal or assisted gait. A false positive is a
normal walk classified as anything else; a false negative is an abnormal or
assisted walk classified as normal.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.metrics import confusion_matrix
from sklearn.model_selection import LeaveOneGroupOut, StratifiedKFold

from . import subspace
from .cvd import CVDImage, RepresentationKind
from .exceptions import EvaluationError, FeatureError, LeakageError
from .features import baseline_ricci
from .sim import Direction, GaitClass

logger = logging.getLogger(__name__)

CLASS_ORDER = tuple(GaitClass)
N_CLASSES = len(CLASS_ORDER)
NORMAL = GaitClass.NW.index
Z95 = 1.96
# classes sharing an expected gait harmonic ratio: 1, 1/2, 1/3
BETA_GROUPS = (
    (GaitClass.NW, GaitClass.L2),
    (GaitClass.L1, GaitClass.CW),
    (GaitClass.CWOOS,),
)
BETA_GROUP_VALUES = (1.0, 1.0 / 2.0, 1.0 / 3.0)
BETA_GROUP_NAMES = ('NW/L2', 'L1/CW', 'CW/oos')


@dataclass(frozen=True, eq=False)
class LabeledSample:
    features: np.ndarray
    label: GaitClass
    subject_id: str = ''
    direction: Direction = Direction.TOWARD

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        if not np.all(np.isfinite(features)):
            raise EvaluationError('sample features must be finite')
        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'label', GaitClass.parse(self.label))


@dataclass
class EvalReport:
    confusion: np.ndarray
    accuracy: float
    fpr: float
    fnr: float
    tpr: float
    ci95_halfwidth: float = 0.0
    fpr_ci95: float = 0.0
    fnr_ci95: float = 0.0
    n_folds: int = 0
    meta: Dict[str, object] = field(default_factory=dict)

    @property
    def percent_confusion(self) -> np.ndarray:
        """Row-normalized confusion in percent."""
        totals = self.confusion.sum(axis=1, keepdims=True).astype(float)
        with np.errstate(invalid='ignore', divide='ignore'):
            rows = np.where(totals > 0, 100.0 * self.confusion / totals, 0.0)
        return rows

    def to_dict(self) -> Dict[str, object]:
        return {
            'classes': [c.value for c in CLASS_ORDER],
            'confusion': self.confusion.tolist(),
            'confusion_percent': np.round(self.percent_confusion, 4).tolist(),
            'accuracy': self.accuracy,
            'fpr': self.fpr,
            'fnr': self.fnr,
            'tpr': self.tpr,
            'ci95_halfwidth': self.ci95_halfwidth,
            'fpr_ci95': self.fpr_ci95,
            'fnr_ci95': self.fnr_ci95,
            'n_folds': self.n_folds,
            **self.meta,
        }


def _as_index(label) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label)
    return GaitClass.parse(label).index


def _training_arrays(train) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(train, tuple):
        features, labels = train
        features = np.atleast_2d(np.asarray(features, dtype=float))
        labels = np.asarray([_as_index(label) for label in labels])
    else:
        if len(train) == 0:
            raise EvaluationError('training set is empty')
        features = np.vstack([sample.features for sample in train])
        labels = np.asarray([sample.label.index for sample in train])
    if features.shape[0] == 0:
        raise EvaluationError('training set is empty')
    if features.shape[0] != labels.size:
        raise EvaluationError('features and labels differ in length')
    return features, labels


def _vote(neighbour_labels: np.ndarray) -> int:
    counts = np.bincount(neighbour_labels, minlength=N_CLASSES)
    tied = np.flatnonzero(counts == counts.max())
    if tied.size == 1:
        return int(tied[0])
    # nearest neighbour among the tied classes decides
    for label in neighbour_labels:
        if label in tied:
            return int(label)
    return int(tied[0])


def knn_predict(train_features: np.ndarray, train_labels: np.ndarray, queries: np.ndarray,
                kappa: int = 1) -> np.ndarray:
    """
    κ-NN labels (class indices) for each query row.

    Distances are Euclidean; equal distances keep the lower training index,
    and a vote tie goes to the tied class holding the nearest neighbour.
    """
    train_features = np.atleast_2d(np.asarray(train_features, dtype=float))
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    train_labels = np.asarray(train_labels, dtype=int)
    n_train = train_features.shape[0]
    if n_train == 0:
        raise EvaluationError('training set is empty')
    if not 1 <= kappa <= n_train:
        raise EvaluationError(f'kappa {kappa} outside [1, {n_train}]')
    if queries.shape[1] != train_features.shape[1]:
        raise EvaluationError(
            f'query dimension {queries.shape[1]} differs from training dimension {train_features.shape[1]}'
        )
    predictions = np.empty(queries.shape[0], dtype=int)
    for row, query in enumerate(queries):
        distances = np.sqrt(np.sum((train_features - query) ** 2, axis=1))
        nearest = np.argsort(distances, kind='stable')[:kappa]
        predictions[row] = _vote(train_labels[nearest])
    return predictions


def knn_classify(train, query: np.ndarray, kappa: int = 1) -> GaitClass:
    """
    Classify one feature vector.

    Args:
        train: LabeledSample sequence, or a ``(features, labels)`` tuple
        query: Feature vector
        kappa: Number of neighbours
    """
    features, labels = _training_arrays(train)
    return GaitClass.from_index(int(knn_predict(features, labels, np.atleast_2d(query), kappa)[0]))


def stratified_kfold(labels: Sequence, k: int = 10, seed: int = 0) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Shuffled stratified ``(train, test)`` index splits."""
    y = np.asarray([_as_index(label) for label in labels])
    counts = np.bincount(y, minlength=N_CLASSES)
    present = counts[counts > 0]
    if present.size == 0 or present.min() < k:
        raise EvaluationError(f'every class needs at least {k} members, smallest has {present.min() if present.size else 0}')
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    return [(train, test) for train, test in splitter.split(np.zeros(y.size), y)]


def leave_one_subject_out(subject_ids: Sequence[str]) -> List[Tuple[str, np.ndarray, np.ndarray]]:
    """One ``(subject, train, test)`` split per subject."""
    groups = np.asarray(subject_ids)
    subjects = np.unique(groups)
    if subjects.size < 2:
        raise EvaluationError('leave-one-subject-out needs at least two subjects')
    splits = []
    for train, test in LeaveOneGroupOut().split(np.zeros(groups.size), groups=groups):
        splits.append((str(groups[test[0]]), train, test))
    return splits


def _rates(counts: np.ndarray) -> Tuple[float, float, float]:
    total = counts.sum()
    accuracy = float(np.trace(counts) / total) if total else 0.0
    normal = counts[NORMAL].sum()
    fpr = float((normal - counts[NORMAL, NORMAL]) / normal) if normal else 0.0
    abnormal = counts.sum() - normal
    missed = counts[:, NORMAL].sum() - counts[NORMAL, NORMAL]
    fnr = float(missed / abnormal) if abnormal else 0.0
    return accuracy, fpr, fnr


def report_from_confusion(counts) -> EvalReport:
    """Metrics of a confusion matrix (true rows, predicted columns, class order NW..CW/oos)."""
    counts = np.asarray(counts)
    if counts.shape != (N_CLASSES, N_CLASSES):
        raise EvaluationError(f'confusion matrix must be {N_CLASSES}x{N_CLASSES}')
    if np.any(counts < 0) or counts.sum() == 0:
        raise EvaluationError('confusion counts must be non-negative and not all zero')
    accuracy, fpr, fnr = _rates(counts)
    return EvalReport(counts, accuracy, fpr, fnr, 1.0 - fnr)


def _halfwidth(scores: List[float]) -> float:
    if len(scores) < 2:
        return 0.0
    return float(Z95 * np.std(scores, ddof=1) / np.sqrt(len(scores)))


def evaluate(predictions: Sequence, truths: Sequence,
             folds: Optional[Sequence[np.ndarray]] = None) -> EvalReport:
    """
    Confusion matrix and rates of aligned predictions.

    Args:
        predictions: Predicted classes (GaitClass, names or indices)
        truths: True classes
        folds: Optional test-index arrays; when given, 95 % half-widths are
            computed from the per-fold scores
    """
    if len(predictions) != len(truths):
        raise EvaluationError('predictions and truths differ in length')
    if len(truths) == 0:
        raise EvaluationError('nothing to evaluate')
    predicted = np.asarray([_as_index(p) for p in predictions])
    actual = np.asarray([_as_index(t) for t in truths])
    counts = confusion_matrix(actual, predicted, labels=list(range(N_CLASSES)))
    report = report_from_confusion(counts)
    if folds:
        scores = [
            _rates(confusion_matrix(actual[test], predicted[test], labels=list(range(N_CLASSES))))
            for test in folds if len(test)
        ]
        report.ci95_halfwidth = _halfwidth([s[0] for s in scores])
        report.fpr_ci95 = _halfwidth([s[1] for s in scores])
        report.fnr_ci95 = _halfwidth([s[2] for s in scores])
        report.n_folds = len(scores)
    return report


@dataclass(frozen=True, eq=False)
class ExperimentData:
    """Labels and grouping of a dataset; features come from a featurizer."""
    labels: np.ndarray
    subjects: np.ndarray
    directions: np.ndarray
    names: Optional[np.ndarray] = None

    def __post_init__(self):
        labels = np.asarray([_as_index(label) for label in self.labels])
        subjects = np.asarray(self.subjects).astype(str)
        directions = np.asarray([Direction.parse(d).value for d in self.directions])
        if not labels.size == subjects.size == directions.size:
            raise EvaluationError('labels, subjects and directions differ in length')
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'subjects', subjects)
        object.__setattr__(self, 'directions', directions)

    def __len__(self) -> int:
        return self.labels.size

    def select(self, direction: str = 'pooled') -> np.ndarray:
        if direction == 'pooled':
            return np.arange(len(self))
        return np.flatnonzero(self.directions == Direction.parse(direction).value)


class FixedFeaturizer:
    """Features computed per recording beforehand; fitting is a no-op."""

    def __init__(self, matrix: np.ndarray, name: str = 'fixed'):
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.name = name
        self.fitted_indices = np.empty(0, dtype=int)

    def fit(self, indices: np.ndarray) -> None:
        self.fitted_indices = np.asarray(indices)

    def transform(self, indices: np.ndarray) -> np.ndarray:
        return self.matrix[np.asarray(indices)]


class SubspaceFeaturizer:
    """PCA projections; the subspace is fitted on training indices only."""

    def __init__(self, images: Sequence[np.ndarray], n_components: int, center: bool = True,
                 representation: RepresentationKind = RepresentationKind.CVD_PRE, name: str = 'pca'):
        self.images = images
        self.n_components = n_components
        self.center = center
        self.representation = representation
        self.name = name
        self.model: Optional[subspace.SubspaceModel] = None
        self.fitted_indices = np.empty(0, dtype=int)

    def fit(self, indices: np.ndarray) -> None:
        self.fitted_indices = np.asarray(indices)
        training = [self.images[i] for i in self.fitted_indices]
        n_components = min(self.n_components, len(training), int(np.size(training[0])))
        self.model = subspace.fit(training, n_components, self.center, self.representation)

    def transform(self, indices: np.ndarray) -> np.ndarray:
        if self.model is None:
            raise EvaluationError('featurizer used before fit')
        return subspace.project_many(self.model, [self.images[i] for i in np.asarray(indices)])


def _standardize(train: np.ndarray, test: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    mean = train.mean(axis=0)
    scale = train.std(axis=0)
    scale[scale == 0] = 1.0
    return (train - mean) / scale, (test - mean) / scale


def _splits(data: ExperimentData, positions: np.ndarray, scheme: str, folds: int, seed: int):
    if scheme == 'kfold':
        return stratified_kfold(data.labels[positions], folds, seed)
    if scheme == 'loso':
        return [(train, test) for _, train, test in leave_one_subject_out(data.subjects[positions])]
    raise EvaluationError(f'unknown cross-validation scheme {scheme!r}')


FitHook = Callable[[int, np.ndarray, np.ndarray], None]


def _fold_features(featurizer, train: np.ndarray, test: np.ndarray, fold: int,
                   on_fit: Optional[FitHook]):
    if np.intersect1d(train, test).size:
        raise LeakageError(f'fold {fold}: training and test indices overlap')
    if on_fit is not None:
        on_fit(fold, train, test)
    featurizer.fit(train)
    if np.intersect1d(featurizer.fitted_indices, test).size:
        raise LeakageError(f'fold {fold}: {featurizer.name} was fitted on test samples')
    return featurizer.transform(train), featurizer.transform(test)


def run_experiment(data: ExperimentData, featurizer, kappa: int = 1, scheme: str = 'kfold',
                   folds: int = 10, seed: int = 0, direction: str = 'pooled',
                   standardize: bool = False, on_fit: Optional[FitHook] = None) -> EvalReport:
    """
    Cross-validated κ-NN evaluation of one featurizer.

    Every fold fits the featurizer (and the optional standardization) on its
    training indices only; a featurizer that saw a test index raises
    LeakageError.

    Args:
        data: Labels, subjects and directions of the dataset
        featurizer: FixedFeaturizer or SubspaceFeaturizer over the same dataset
        scheme: ``kfold`` (stratified) or ``loso``
        direction: ``pooled``, ``toward`` or ``away``
        on_fit: Hook called as ``on_fit(fold, train, test)`` before each fit
    """
    positions = data.select(direction)
    if positions.size == 0:
        raise EvaluationError(f'no recordings for direction {direction!r}')
    labels = data.labels[positions]
    predictions = np.empty(positions.size, dtype=int)
    tests = []
    for fold, (train_pos, test_pos) in enumerate(_splits(data, positions, scheme, folds, seed)):
        train_x, test_x = _fold_features(featurizer, positions[train_pos], positions[test_pos], fold, on_fit)
        if standardize:
            train_x, test_x = _standardize(train_x, test_x)
        predictions[test_pos] = knn_predict(train_x, labels[train_pos], test_x, kappa)
        tests.append(test_pos)
    report = evaluate(predictions, labels, folds=tests)
    report.meta.update({
        'featurizer': featurizer.name, 'kappa': kappa, 'scheme': scheme,
        'direction': direction, 'n_samples': int(positions.size),
    })
    logger.info('%s %s/%s: accuracy %.3f, FPR %.3f, FNR %.3f',
                featurizer.name, scheme, direction, report.accuracy, report.fpr, report.fnr)
    return report


def _fold_projections(data: ExperimentData, images: Sequence[np.ndarray], max_components: int,
                      center: bool, scheme: str, folds: int, seed: int, direction: str):
    positions = data.select(direction)
    featurizer = SubspaceFeaturizer(images, max_components, center)
    for fold, (train_pos, test_pos) in enumerate(_splits(data, positions, scheme, folds, seed)):
        train_x, test_x = _fold_features(featurizer, positions[train_pos], positions[test_pos], fold, None)
        yield positions, train_pos, test_pos, train_x, test_x


def _sweep(data, images, lambdas, kappas, center, scheme, folds, seed, direction):
    lambdas = sorted(set(int(value) for value in lambdas))
    kappas = sorted(set(int(value) for value in kappas))
    labels = None
    predictions = {(k, l): None for k in kappas for l in lambdas}
    tests = []
    for positions, train_pos, test_pos, train_x, test_x in _fold_projections(
            data, images, max(lambdas), center, scheme, folds, seed, direction):
        labels = data.labels[positions]
        tests.append(test_pos)
        # leading coordinates of a projection are the projection onto the leading components
        for l in lambdas:
            usable = min(l, train_x.shape[1])
            for k in kappas:
                if predictions[(k, l)] is None:
                    predictions[(k, l)] = np.empty(positions.size, dtype=int)
                predictions[(k, l)][test_pos] = knn_predict(
                    train_x[:, :usable], labels[train_pos], test_x[:, :usable], k,
                )
    return {key: evaluate(value, labels, folds=tests) for key, value in predictions.items()}


def lambda_sweep(data: ExperimentData, images: Sequence[np.ndarray], lambdas: Sequence[int],
                 kappa: int = 1, center: bool = True, scheme: str = 'kfold', folds: int = 10,
                 seed: int = 0, direction: str = 'pooled') -> pd.DataFrame:
    """Cross-validated metrics as a function of the number of principal components."""
    reports = _sweep(data, images, lambdas, [kappa], center, scheme, folds, seed, direction)
    rows = [
        {'n_components': l, 'accuracy': r.accuracy, 'ci95_halfwidth': r.ci95_halfwidth,
         'fpr': r.fpr, 'fnr': r.fnr}
        for (_, l), r in sorted(reports.items(), key=lambda item: item[0][1])
    ]
    return pd.DataFrame(rows, columns=['n_components', 'accuracy', 'ci95_halfwidth', 'fpr', 'fnr'])


def kappa_lambda_grid(data: ExperimentData, images: Sequence[np.ndarray], kappas: Sequence[int],
                      lambdas: Sequence[int], center: bool = True, scheme: str = 'loso',
                      folds: int = 10, seed: int = 0, direction: str = 'pooled') -> pd.DataFrame:
    """Accuracy matrix with one row per κ and one column per λ."""
    reports = _sweep(data, images, lambdas, kappas, center, scheme, folds, seed, direction)
    grid = pd.DataFrame(
        index=pd.Index(sorted(set(kappas)), name='kappa'),
        columns=pd.Index(sorted(set(lambdas)), name='n_components'),
        dtype=float,
    )
    for (k, l), report in reports.items():
        grid.loc[k, l] = report.accuracy
    return grid


def ricci_matrix(cvds: Sequence[CVDImage], f_mDs: Sequence[float], delta: int, gamma: float) -> np.ndarray:
    """R1 feature rows for a set of CVDs; unusable recordings get zeros."""
    rows = []
    for image, f_mD in zip(cvds, f_mDs):
        if not f_mD > 0:
            rows.append(np.zeros(3))
            continue
        try:
            rows.append(baseline_ricci(image, f_mD, 'R1', delta, gamma).as_vector())
        except FeatureError:
            rows.append(np.array([f_mD, 0.0, 0.0]))
    return np.vstack(rows)


def sweep_ricci(data: ExperimentData, cvds: Sequence[CVDImage], f_mDs: Sequence[float],
                deltas: Sequence[int], gammas: Sequence[float], kappa: int = 1,
                scheme: str = 'kfold', folds: int = 10, seed: int = 0,
                direction: str = 'pooled') -> pd.DataFrame:
    """Accuracy of R1 features over a grid of column spans and thresholds."""
    rows = []
    for delta in deltas:
        for gamma in gammas:
            featurizer = FixedFeaturizer(ricci_matrix(cvds, f_mDs, delta, gamma), name='r1')
            report = run_experiment(data, featurizer, kappa, scheme, folds, seed, direction)
            rows.append({'delta': delta, 'gamma': gamma, 'accuracy': report.accuracy,
                         'fpr': report.fpr, 'fnr': report.fnr})
    return pd.DataFrame(rows, columns=['delta', 'gamma', 'accuracy', 'fpr', 'fnr'])


def beta_grouping_confusion(betas: Sequence[float], labels: Sequence) -> pd.DataFrame:
    """
    Confusion of expected against estimated harmonic-ratio groups, in percent.

    Recordings whose ratio is missing (0) fall in a separate ``missing`` column.
    """
    columns = list(BETA_GROUP_NAMES) + ['missing']
    counts = np.zeros((len(BETA_GROUPS), len(columns)))
    for beta, label in zip(betas, labels):
        label = GaitClass.parse(label) if not isinstance(label, (int, np.integer)) else GaitClass.from_index(label)
        row = next(i for i, group in enumerate(BETA_GROUPS) if label in group)
        if beta in BETA_GROUP_VALUES:
            column = BETA_GROUP_VALUES.index(beta)
        else:
            column = len(columns) - 1
        counts[row, column] += 1
    totals = counts.sum(axis=1, keepdims=True)
    percent = np.divide(100.0 * counts, totals, out=np.zeros_like(counts), where=totals > 0)
    return pd.DataFrame(percent, index=list(BETA_GROUP_NAMES), columns=columns)
