"""
PNG figures of exported representations, subspace models and sweeps.
"""
import logging
from typing import Any, Mapping, Optional, Tuple

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from .exceptions import ConfigurationError  # noqa: E402
from .subspace import SubspaceModel, eigenimages  # noqa: E402
from .storage import atomic_output  # noqa: E402

logger = logging.getLogger(__name__)

DB_FLOOR = -60.0
PLOT_KINDS = ('spectrogram', 'cvd', 'mcs', 'eigenimages', 'lambda-sweep', 'kappa-lambda')


def to_db(matrix: np.ndarray, floor_db: float = DB_FLOOR) -> np.ndarray:
    """Power relative to its maximum in dB, clipped at ``floor_db``."""
    matrix = np.asarray(matrix, dtype=float)
    peak = matrix.max() if matrix.size else 0.0
    if peak <= 0:
        return np.full(matrix.shape, floor_db)
    with np.errstate(divide='ignore'):
        levels = 10.0 * np.log10(matrix / peak)
    return np.clip(levels, floor_db, 0.0)


def _axis(sidecar: Mapping[str, Any], key: str, size: int) -> Tuple[np.ndarray, str]:
    axis = sidecar.get(key) or {}
    values = np.asarray(axis.get('values') or np.arange(size), dtype=float)
    if values.size != size:
        values = np.arange(size, dtype=float)
    name = axis.get('name', key)
    unit = axis.get('unit')
    return values, f'{name} ({unit})' if unit else name


def _save(fig, path: str) -> str:
    with atomic_output(path) as temp:
        fig.savefig(temp, format='png', dpi=120, bbox_inches='tight')
    plt.close(fig)
    logger.debug('Wrote %s', path)
    return path


def _heatmap(matrix, sidecar, path, title, colorbar_label, vmin=None, vmax=None):
    rows, row_label = _axis(sidecar, 'rows', matrix.shape[0])
    columns, column_label = _axis(sidecar, 'columns', matrix.shape[1])
    fig, ax = plt.subplots(figsize=(10, 6))
    image = ax.imshow(
        matrix, aspect='auto', origin='lower', cmap='jet', vmin=vmin, vmax=vmax,
        extent=[columns[0], columns[-1], rows[0], rows[-1]], interpolation='nearest',
    )
    ax.set_xlabel(column_label)
    ax.set_ylabel(row_label)
    ax.set_title(title)
    fig.colorbar(image, ax=ax, label=colorbar_label)
    return _save(fig, path)


def plot_spectrogram(matrix: np.ndarray, sidecar: Mapping[str, Any], path: str) -> str:
    """Spectrogram heatmap in dB relative to its maximum, floored at -60 dB."""
    return _heatmap(to_db(matrix), sidecar, path, 'Spectrogram', 'Energy (dB)', DB_FLOOR, 0.0)


def plot_cvd(matrix: np.ndarray, sidecar: Mapping[str, Any], path: str) -> str:
    title = 'Warped cadence-velocity diagram' if sidecar.get('kind') == 'CVD_PRE' else 'Cadence-velocity diagram'
    return _heatmap(np.asarray(matrix, dtype=float), sidecar, path, title, 'Normalized magnitude', 0.0, 1.0)


def plot_mcs(values: np.ndarray, sidecar: Mapping[str, Any], path: str) -> Tuple[str, float]:
    """
    Line plot of a mean cadence spectrum with its dominant cadence marked.

    Returns:
        The PNG path and the marked cadence (the zero bin is never chosen)
    """
    values = np.asarray(values, dtype=float).ravel()
    cadence, label = _axis(sidecar, 'columns', values.size)
    peak = 1 + int(np.argmax(values[1:]))
    fig, ax = plt.subplots(figsize=(10, 4))
    ax.plot(cadence, values, color='tab:blue')
    ax.plot(cadence[peak], values[peak], 'o', color='tab:red')
    ax.annotate(f'{cadence[peak]:.2f} Hz', (cadence[peak], values[peak]),
                textcoords='offset points', xytext=(6, 6))
    ax.set_xlabel(label)
    ax.set_ylabel('Normalized magnitude')
    ax.set_title('Mean cadence spectrum')
    ax.grid(True, alpha=0.3)
    return _save(fig, path), float(cadence[peak])


def plot_eigenimages(model: SubspaceModel, path: str, count: int = 6) -> str:
    images = eigenimages(model)[:count]
    fig, axes = plt.subplots(1, len(images), figsize=(3 * len(images), 3), squeeze=False)
    for number, (ax, image) in enumerate(zip(axes[0], images), start=1):
        limit = np.abs(image).max() or 1.0
        ax.imshow(image, aspect='auto', origin='lower', cmap='RdBu_r', vmin=-limit, vmax=limit)
        ax.set_title(f'Component {number}')
        ax.set_xticks([])
        ax.set_yticks([])
    fig.suptitle(f'{model.representation.value} eigenimages')
    return _save(fig, path)


def plot_lambda_sweep(frame: pd.DataFrame, path: str) -> str:
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.errorbar(frame['n_components'], 100 * frame['accuracy'], yerr=100 * frame['ci95_halfwidth'],
                marker='o', capsize=3)
    ax.set_xlabel('Number of principal components')
    ax.set_ylabel('Accuracy (%)')
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def plot_kappa_lambda(grid: pd.DataFrame, path: str) -> str:
    fig, ax = plt.subplots(figsize=(8, 6))
    image = ax.imshow(100 * grid.to_numpy(dtype=float), aspect='auto', origin='lower', cmap='viridis')
    ax.set_xticks(range(grid.shape[1]), [str(c) for c in grid.columns])
    ax.set_yticks(range(grid.shape[0]), [str(i) for i in grid.index])
    ax.set_xlabel('Number of principal components')
    ax.set_ylabel('Number of neighbours')
    fig.colorbar(image, ax=ax, label='Accuracy (%)')
    return _save(fig, path)


def render(kind: str, source: Any, sidecar: Optional[Mapping[str, Any]], path: str) -> str:
    """Dispatch on a plot kind; ``source`` is a matrix, a model or a sweep table."""
    sidecar = sidecar or {}
    if kind == 'spectrogram':
        return plot_spectrogram(source, sidecar, path)
    if kind == 'cvd':
        return plot_cvd(source, sidecar, path)
    if kind == 'mcs':
        return plot_mcs(source, sidecar, path)[0]
    if kind == 'eigenimages':
        return plot_eigenimages(source, path)
    if kind == 'lambda-sweep':
        return plot_lambda_sweep(source, path)
    if kind == 'kappa-lambda':
        return plot_kappa_lambda(source, path)
    raise ConfigurationError(f'unknown plot kind {kind!r}, expected one of {PLOT_KINDS}')
