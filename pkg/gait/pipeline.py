"""
Per-recording orchestration: representations, named feature sets and the
file-level helpers the batch tasks call.
"""
import logging
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from . import subspace
from .config import PipelineConfig, RunConfig
from .cvd import (
    CVDImage, RepresentationKind, check_shape, ft_filtered_time, mean_cadence_spectrum,
    preprocess_cvd, spectrogram_image,
)
from .exceptions import ConfigurationError, FeatureError, GaitRadarError
from .features import (
    PHYSICAL_FEATURE_NAMES, PROFILE_SAMPLES, Signatures, baseline_bjorklund, baseline_ricci,
    estimate_fDmax, estimate_fmD, extract_signatures, physical_features,
)
from .sim import IQRecording, RadarConfig
from .storage import read_iq

logger = logging.getLogger(__name__)

FEATURE_SETS = ('phy', 'b1', 'b2', 'r1', 'r2', 'pca')


@contextmanager
def for_recording(path: str):
    """Prefix any pipeline error raised inside the block with the recording path."""
    try:
        yield
    except GaitRadarError as exc:
        if str(exc).startswith(f'{path}:'):
            raise
        raise exc.__class__(f'{path}: {exc}') from exc


@dataclass(frozen=True, eq=False)
class Representation:
    kind: RepresentationKind
    matrix: np.ndarray
    rows: Tuple[str, str, np.ndarray]
    columns: Tuple[str, str, np.ndarray]

    def sidecar(self, **extra) -> Dict[str, Any]:
        def axis(name, unit, values):
            return {'name': name, 'unit': unit, 'values': [float(v) for v in values]}
        return {
            'kind': self.kind.value,
            'rows': axis(*self.rows),
            'columns': axis(*self.columns),
            **extra,
        }


def _cadence(values) -> Tuple[str, str, np.ndarray]:
    return 'cadence', 'Hz', np.asarray(values)


def _single_row() -> Tuple[str, str, np.ndarray]:
    return 'row', '', np.zeros(1)


def warp_factors(sig: Signatures, cfg: PipelineConfig) -> Tuple[float, float]:
    """Repetition frequency and maximal Doppler shift used to warp the CVD."""
    return estimate_fmD(sig.envelope, cfg.cadence), estimate_fDmax(sig.envelope, cfg.fdmax_mode)


def representation(rec: IQRecording, kind, cfg: PipelineConfig = PipelineConfig(),
                   signatures: Optional[Signatures] = None) -> Representation:
    """
    One of the six fixed-size representations of a recording.

    Raises:
        CVDError: the result breaks the kind's dimensions, or warping failed
        FeatureError: a quantity the representation needs is unavailable
    """
    kind = RepresentationKind.parse(kind)
    sig = signatures or extract_signatures(rec, cfg)
    doppler = ('doppler', 'Hz', sig.cvd.doppler_axis)

    if kind is RepresentationKind.SPECTROGRAM:
        matrix = spectrogram_image(
            sig.spectrogram, rec.direction, cfg.doppler_rows, cfg.doppler_binning,
            cfg.time_subsample, cfg.time_binning, cfg.time_columns,
        )
        frames = sig.spectrogram.time_axis[::cfg.time_subsample]
        step = cfg.time_subsample * cfg.time_binning / sig.spectrogram.frame_rate
        times = frames[:cfg.time_binning].mean() + step * np.arange(cfg.time_columns)
        result = Representation(kind, matrix, doppler, ('time', 's', times))
    elif kind is RepresentationKind.CVD:
        result = Representation(kind, sig.cvd.values, doppler, _cadence(sig.cvd.cadence_axis))
    elif kind is RepresentationKind.MCS:
        result = Representation(kind, sig.mcs.values, _single_row(), _cadence(sig.mcs.cadence_axis))
    elif kind in (RepresentationKind.CVD_PRE, RepresentationKind.MCS_PRE):
        warped = preprocess_cvd(sig.cvd, *warp_factors(sig, cfg))
        if kind is RepresentationKind.CVD_PRE:
            result = Representation(kind, warped.values, doppler, _cadence(warped.cadence_axis))
        else:
            mcs = mean_cadence_spectrum(warped)
            result = Representation(kind, mcs.values, _single_row(), _cadence(mcs.cadence_axis))
    else:
        if sig.v0 is None:
            raise FeatureError('; '.join(sig.problems) or 'base velocity unavailable')
        spectrum = ft_filtered_time(rec, abs(sig.v0), cfg.cadence)
        result = Representation(kind, spectrum.values, _single_row(), _cadence(spectrum.cadence_axis))

    return Representation(result.kind, check_shape(kind, result.matrix), result.rows, result.columns)


def feature_names(set_name: str, cfg: PipelineConfig = PipelineConfig(),
                  model: Optional[subspace.SubspaceModel] = None) -> List[str]:
    if set_name == 'phy':
        return list(PHYSICAL_FEATURE_NAMES)
    if set_name == 'b1':
        profiles = [f'b1_p{k}_{i:03d}' for k in range(1, 4) for i in range(PROFILE_SAMPLES)]
        return ['b1_f1', 'b1_f2', 'b1_f3'] + profiles + ['b1_v0']
    if set_name == 'b2':
        return ['b2_f1', 'b2_f2', 'b2_f3', 'b2_v0']
    if set_name == 'r1':
        return ['r1_f_mD', 'r1_fD_min', 'r1_fD_max']
    if set_name == 'r2':
        return [f'r2_g{i:03d}' for i in range(cfg.doppler_rows)]
    if set_name == 'pca':
        if model is None:
            raise ConfigurationError('pca features need a fitted subspace model')
        return [f'pca_{i:02d}' for i in range(1, model.n_components + 1)]
    raise ConfigurationError(f'unknown feature set {set_name!r}, expected one of {FEATURE_SETS}')


def feature_vector(rec: IQRecording, set_name: str, cfg: PipelineConfig = PipelineConfig(),
                   model: Optional[subspace.SubspaceModel] = None,
                   signatures: Optional[Signatures] = None) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """
    Feature vector of one recording for a named feature set.

    Returns:
        The vector and the names of features imputed as zero
    """
    names = feature_names(set_name, cfg, model)
    sig = signatures or extract_signatures(rec, cfg)
    if set_name == 'phy':
        features = physical_features(rec, cfg, sig)
        return features.as_vector(), features.missing
    if set_name in ('b1', 'b2'):
        features = baseline_bjorklund(sig.cvd, sig.mds, set_name.upper(), rec.config, cfg.v0_smoothing_hz)
        return features.as_vector(), features.missing
    if set_name in ('r1', 'r2'):
        try:
            f_mD = estimate_fmD(sig.envelope, cfg.cadence)
        except FeatureError as exc:
            logger.warning('%s features imputed as 0 (%s)', set_name, exc)
            return np.zeros(len(names)), tuple(names)
        features = baseline_ricci(sig.cvd, f_mD, set_name.upper(), cfg.ricci_delta, cfg.ricci_gamma)
        return features.as_vector(), features.missing
    image = representation(rec, model.representation, cfg, sig).matrix
    return subspace.project(model, image), ()


def load_recording(path: str, radar: RadarConfig, subject_id: Optional[str] = None) -> IQRecording:
    """Read an IQ file; read errors carry the path."""
    with for_recording(path):
        return read_iq(path, radar, subject_id)


def represent_file(path: str, kind, run_config: RunConfig) -> Representation:
    rec = load_recording(path, run_config.radar)
    with for_recording(path):
        return representation(rec, kind, run_config.pipeline)


def featurize_file(path: str, set_name: str, run_config: RunConfig,
                   model: Optional[subspace.SubspaceModel] = None) -> Tuple[np.ndarray, Tuple[str, ...]]:
    rec = load_recording(path, run_config.radar)
    with for_recording(path):
        vector, missing = feature_vector(rec, set_name, run_config.pipeline, model)
    if missing:
        logger.warning('%s: %s imputed as 0', path, ', '.join(missing))
    return vector, missing


def ricci_inputs(path: str, run_config: RunConfig) -> Tuple[CVDImage, float]:
    """CVD and repetition frequency of a recording; f_mD is 0 when it cannot be estimated."""
    rec = load_recording(path, run_config.radar)
    with for_recording(path):
        sig = extract_signatures(rec, run_config.pipeline)
        try:
            f_mD = estimate_fmD(sig.envelope, run_config.pipeline.cadence)
        except FeatureError as exc:
            logger.warning('%s: f_mD imputed as 0 (%s)', path, exc)
            f_mD = 0.0
        return sig.cvd, f_mD
