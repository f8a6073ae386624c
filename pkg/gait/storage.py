"""
On-disk formats: IQ recordings, dataset manifests, exported matrices with
JSON sidecars and feature tables. Every writer replaces its target
atomically.
"""
import json
import logging
import os
import struct
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, replace
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .exceptions import ConfigurationError, RecordingError
from .sim import Direction, GaitClass, IQRecording, RadarConfig

logger = logging.getLogger(__name__)

IQ_MAGIC = b'MDOP'
IQ_VERSION = 1
# magic, version, f_s, f_c, N, direction, label
IQ_HEADER = struct.Struct('<4sHddQBB')
NO_LABEL = 255
DIRECTION_CODES = (Direction.TOWARD, Direction.AWAY)
MANIFEST_COLUMNS = ['file', 'subject_id', 'class', 'direction']


@contextmanager
def atomic_output(path: str) -> Iterator[str]:
    """
    Yield a temporary path next to ``path``; it replaces ``path`` on success.

    The temporary name keeps the target's extension so libraries that pick a
    format from the suffix behave the same.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, temp = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.splitext(path)[1])
    os.close(handle)
    try:
        yield temp
        os.replace(temp, path)
    except BaseException:
        if os.path.exists(temp):
            os.unlink(temp)
        raise


def write_bytes(path: str, payload: bytes) -> str:
    with atomic_output(path) as temp:
        with open(temp, 'wb') as stream:
            stream.write(payload)
    return path


def write_json(path: str, document: Mapping[str, Any]) -> str:
    with atomic_output(path) as temp:
        with open(temp, 'w', encoding='utf-8') as stream:
            json.dump(document, stream, indent=2, sort_keys=True, default=_json_default)
            stream.write('\n')
    return path


def read_json(path: str) -> Dict[str, Any]:
    with open(path, encoding='utf-8') as stream:
        return json.load(stream)


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


def write_iq(rec: IQRecording, path: str) -> str:
    """Write one recording in the little-endian IQ format."""
    label = NO_LABEL if rec.label is None else rec.label.index
    header = IQ_HEADER.pack(
        IQ_MAGIC, IQ_VERSION, rec.config.sampling_frequency, rec.config.carrier_frequency,
        rec.samples.size, DIRECTION_CODES.index(rec.direction), label,
    )
    pairs = np.empty((rec.samples.size, 2), dtype='<f8')
    pairs[:, 0] = rec.samples.real
    pairs[:, 1] = rec.samples.imag
    return write_bytes(path, header + pairs.tobytes())


def read_iq(path: str, radar: Optional[RadarConfig] = None, subject_id: Optional[str] = None) -> IQRecording:
    """
    Read an IQ file.

    Sampling and carrier frequency come from the header; the remaining radar
    parameters from ``radar`` (project defaults when omitted).

    Raises:
        RecordingError: bad magic or version, truncated data or bad codes
    """
    try:
        with open(path, 'rb') as stream:
            data = stream.read()
    except OSError as exc:
        raise RecordingError(f'{path}: {exc.strerror or exc}') from exc
    if len(data) < IQ_HEADER.size:
        raise RecordingError(f'{path}: file too short for an IQ header')
    magic, version, fs, fc, n, direction, label = IQ_HEADER.unpack_from(data)
    if magic != IQ_MAGIC:
        raise RecordingError(f'{path}: bad magic {magic!r}')
    if version != IQ_VERSION:
        raise RecordingError(f'{path}: unsupported IQ version {version}')
    if len(data) != IQ_HEADER.size + 16 * n:
        raise RecordingError(f'{path}: header announces {n} samples, file holds {(len(data) - IQ_HEADER.size) / 16:g}')
    if direction >= len(DIRECTION_CODES) or (label != NO_LABEL and label >= len(GaitClass)):
        raise RecordingError(f'{path}: bad direction code {direction} or label code {label}')
    pairs = np.frombuffer(data, dtype='<f8', offset=IQ_HEADER.size).reshape(n, 2)
    try:
        config = replace(radar or RadarConfig(), sampling_frequency=fs, carrier_frequency=fc, duration=n / fs)
    except (ConfigurationError, ZeroDivisionError) as exc:
        raise RecordingError(f'{path}: {exc}') from exc
    return IQRecording(
        pairs[:, 0] + 1j * pairs[:, 1],
        config,
        DIRECTION_CODES[direction],
        None if label == NO_LABEL else GaitClass.from_index(label),
        subject_id,
    )


@dataclass(frozen=True)
class ManifestEntry:
    file: str
    subject_id: str
    gait_class: GaitClass
    direction: Direction


@dataclass(frozen=True)
class Manifest:
    entries: Tuple[ManifestEntry, ...]
    root: str

    def __len__(self) -> int:
        return len(self.entries)

    def path(self, entry: ManifestEntry) -> str:
        return entry.file if os.path.isabs(entry.file) else os.path.join(self.root, entry.file)

    @property
    def paths(self) -> List[str]:
        return [self.path(entry) for entry in self.entries]

    def class_counts(self) -> Dict[str, int]:
        counts = {gait_class.value: 0 for gait_class in GaitClass}
        for entry in self.entries:
            counts[entry.gait_class.value] += 1
        return counts


def write_manifest(entries: Sequence[ManifestEntry], path: str) -> str:
    frame = pd.DataFrame(
        [[e.file, e.subject_id, e.gait_class.value, e.direction.value] for e in entries],
        columns=MANIFEST_COLUMNS,
    )
    with atomic_output(path) as temp:
        frame.to_csv(temp, index=False)
    return path


def load_manifest(path: str) -> Manifest:
    """
    Read a manifest CSV; file paths are relative to its directory.

    Raises:
        ConfigurationError: missing columns, unknown class or direction, missing file
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise ConfigurationError(f'cannot read manifest {path}: {exc}') from exc
    missing = [column for column in MANIFEST_COLUMNS if column not in frame.columns]
    if missing:
        raise ConfigurationError(f'manifest {path} lacks columns: {", ".join(missing)}')
    root = os.path.dirname(os.path.abspath(path))
    entries = []
    for row in frame.to_dict("records"):
        entry = ManifestEntry(
            row['file'], row['subject_id'], GaitClass.parse(row['class']), Direction.parse(row['direction']),
        )
        full = entry.file if os.path.isabs(entry.file) else os.path.join(root, entry.file)
        if not os.path.isfile(full):
            raise ConfigurationError(f'manifest {path}: recording {full} does not exist')
        entries.append(entry)
    return Manifest(tuple(entries), root)


def write_matrix(matrix: np.ndarray, path: str, sidecar: Mapping[str, Any]) -> Tuple[str, str]:
    """
    Export a matrix as headerless CSV plus a JSON sidecar (``<stem>.json``).

    Returns:
        The CSV and sidecar paths
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    with atomic_output(path) as temp:
        pd.DataFrame(matrix).to_csv(temp, header=False, index=False, float_format='%.17g')
    sidecar_path = sidecar_path_for(path)
    write_json(sidecar_path, {**sidecar, 'shape': list(matrix.shape)})
    return path, sidecar_path


def sidecar_path_for(path: str) -> str:
    return os.path.splitext(path)[0] + '.json'


def read_matrix(path: str) -> Tuple[np.ndarray, Dict[str, Any]]:
    """Read a matrix written by :func:`write_matrix` and its sidecar (empty if absent)."""
    matrix = pd.read_csv(path, header=None, float_precision='round_trip').to_numpy(dtype=float)
    sidecar_path = sidecar_path_for(path)
    sidecar = read_json(sidecar_path) if os.path.exists(sidecar_path) else {}
    return matrix, sidecar


def write_table(frame: pd.DataFrame, path: str, index: bool = False) -> str:
    with atomic_output(path) as temp:
        frame.to_csv(temp, index=index, float_format='%.10g')
    return path


def feature_table(rows: Sequence[Mapping[str, Any]], names: Sequence[str]) -> pd.DataFrame:
    """One row per recording: file, subject, class and direction, then every named feature."""
    columns = ['file', 'subject_id', 'class', 'direction'] + list(names) + ['missing']
    return pd.DataFrame(list(rows), columns=columns)


def read_feature_table(path: str) -> pd.DataFrame:
    return pd.read_csv(path, keep_default_na=False)
