"""
Celery tasks for per-recording work and the batch dispatcher.

Task arguments and results are JSON-serializable so the same functions run
on the local thread pool or on Celery workers (``MDOP_USE_CELERY=1``).
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
from celery import group, shared_task
from django.conf import settings

from . import subspace
from .config import build_run_config
from .pipeline import featurize_file, represent_file, ricci_inputs
from .cvd import CVDImage
from .sim import Direction, GaitProfile, RadarConfig, synthesize_gait
from .storage import write_iq, write_matrix

logger = logging.getLogger(__name__)


@lru_cache(maxsize=4)
def _model(path: str, mtime: float) -> subspace.SubspaceModel:
    return subspace.load(path)


def load_model(path: str) -> subspace.SubspaceModel:
    return _model(os.path.abspath(path), os.path.getmtime(path))


@shared_task
def synthesize_recording(profile: Dict[str, Any], radar: Dict[str, Any], subject_id: str, path: str) -> str:
    """
    Synthesize one walk and write it as an IQ file.

    Returns:
        Path of the written file
    """
    rec = synthesize_gait(GaitProfile(**profile), RadarConfig(**radar), subject_id)
    return write_iq(rec, path)


@shared_task
def represent_recording(path: str, kind: str, document: Dict[str, Any], output: str) -> str:
    """Export one representation as CSV plus sidecar; returns the CSV path."""
    run_config = build_run_config(document)
    result = represent_file(path, kind, run_config)
    write_matrix(result.matrix, output, result.sidecar(
        recording=os.path.basename(path), config_hash=run_config.hash,
    ))
    return output


@shared_task
def representation_matrix(path: str, kind: str, document: Dict[str, Any]) -> List[List[float]]:
    return represent_file(path, kind, build_run_config(document)).matrix.tolist()


@shared_task
def featurize_recording(path: str, set_name: str, document: Dict[str, Any],
                        model_path: Optional[str] = None) -> Dict[str, Any]:
    model = load_model(model_path) if model_path else None
    vector, missing = featurize_file(path, set_name, build_run_config(document), model)
    return {'values': vector.tolist(), 'missing': list(missing)}


@shared_task
def ricci_recording(path: str, document: Dict[str, Any]) -> Dict[str, Any]:
    image, f_mD = ricci_inputs(path, build_run_config(document))
    return {
        'values': image.values.tolist(),
        'cadence_axis': image.cadence_axis.tolist(),
        'doppler_axis': image.doppler_axis.tolist(),
        'direction': image.direction.value,
        'f_mD': f_mD,
    }


def run_batch(task, arguments: Iterable[Sequence[Any]], workers: Optional[int] = None) -> List[Any]:
    """
    Run ``task`` once per argument tuple; results keep the argument order.

    Dispatches a Celery group when ``MDOP['USE_CELERY']`` is set, otherwise a
    local thread pool of ``workers`` (default ``MDOP['THREADS']``) threads.
    The first failure propagates.
    """
    arguments = [tuple(args) for args in arguments]
    if not arguments:
        return []
    if settings.MDOP.get('USE_CELERY'):
        logger.info('Dispatching %d %s tasks to Celery', len(arguments), task.name)
        return group(task.s(*args) for args in arguments).apply_async().get()
    workers = max(1, min(workers or settings.MDOP.get('THREADS', 1), len(arguments)))
    logger.debug('Running %d %s tasks on %d threads', len(arguments), task.name, workers)
    if workers == 1:
        return [task(*args) for args in arguments]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda args: task(*args), arguments))


def representation_images(paths: Sequence[str], kind: str, document: Dict[str, Any],
                          workers: Optional[int] = None) -> List[np.ndarray]:
    results = run_batch(representation_matrix, [(path, kind, document) for path in paths], workers)
    return [np.asarray(matrix, dtype=float) for matrix in results]


def feature_matrix(paths: Sequence[str], set_name: str, document: Dict[str, Any],
                   model_path: Optional[str] = None, workers: Optional[int] = None):
    """Feature rows of several recordings and the imputed names of each."""
    results = run_batch(
        featurize_recording, [(path, set_name, document, model_path) for path in paths], workers,
    )
    return np.array([row['values'] for row in results], dtype=float), [tuple(row['missing']) for row in results]


def ricci_data(paths: Sequence[str], document: Dict[str, Any], workers: Optional[int] = None):
    """CVDs and repetition frequencies of several recordings."""
    results = run_batch(ricci_recording, [(path, document) for path in paths], workers)
    images = [
        CVDImage(row['values'], row['cadence_axis'], row['doppler_axis'], Direction.parse(row['direction']))
        for row in results
    ]
    return images, [row['f_mD'] for row in results]


def profile_arguments(profile: GaitProfile) -> Dict[str, Any]:
    """JSON-ready keyword arguments of a profile."""
    document = asdict(profile)
    document['gait_class'] = profile.gait_class.value
    document['direction'] = profile.direction.value
    return document
