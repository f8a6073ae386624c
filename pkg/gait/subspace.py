"""
PCA subspace features over vectorized radar representations, with a binary
model file.
"""
import logging
import struct
import zlib
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .cvd import RepresentationKind
from .exceptions import ModelFormatError, SubspaceError
from .storage import write_bytes

logger = logging.getLogger(__name__)

MAGIC = b'MDPC'
VERSION = 1
# magic, version, representation, p, d, lambda, centering flag
HEADER = struct.Struct('<4sHBQQQB')
CHECKSUM = struct.Struct('<I')


@dataclass(frozen=True, eq=False)
class SubspaceModel:
    mean_image: Optional[np.ndarray]
    basis: np.ndarray
    eigenvalues: np.ndarray
    representation: RepresentationKind
    p: int
    d: int
    total_variance: float
    image_shape: Optional[Tuple[int, int]] = None

    @property
    def n_components(self) -> int:
        return self.basis.shape[1]

    @property
    def centered(self) -> bool:
        return self.mean_image is not None

    def truncated(self, n_components: int) -> 'SubspaceModel':
        """The same model keeping only its leading ``n_components`` directions."""
        if not 1 <= n_components <= self.n_components:
            raise SubspaceError(f'cannot keep {n_components} of {self.n_components} components')
        return SubspaceModel(
            self.mean_image, self.basis[:, :n_components], self.eigenvalues[:n_components],
            self.representation, self.p, self.d, self.total_variance, self.image_shape,
        )


def vectorize(image: np.ndarray) -> np.ndarray:
    """Row-wise vectorization of a representation matrix."""
    return np.asarray(image, dtype=float).reshape(-1)


def data_matrix(images: Sequence[np.ndarray]) -> np.ndarray:
    """Stack vectorized images as the columns of a p x d matrix."""
    if len(images) == 0:
        raise SubspaceError('no images given')
    shape = np.shape(images[0])
    for index, image in enumerate(images):
        if np.shape(image) != shape:
            raise SubspaceError(f'image {index} has shape {np.shape(image)}, expected {shape}')
    return np.column_stack([vectorize(image) for image in images])


def fit(images: Sequence[np.ndarray], n_components: int, center: bool = True,
        representation: RepresentationKind = RepresentationKind.CVD_PRE) -> SubspaceModel:
    """
    Principal subspace of a training set.

    Args:
        images: Training representations, all with the same shape
        n_components: Number of basis vectors to keep
        center: Subtract the training mean before the decomposition

    Returns:
        SubspaceModel whose eigenvalues are squared singular values over ``d - 1``
    """
    y = data_matrix(images)
    p, d = y.shape
    if d < 2:
        raise SubspaceError('at least two training images are required')
    if not 1 <= n_components <= min(p, d):
        raise SubspaceError(f'n_components {n_components} outside [1, {min(p, d)}]')
    mean = y.mean(axis=1) if center else None
    if mean is not None:
        y = y - mean[:, None]
    u, s, _ = np.linalg.svd(y, full_matrices=False)
    eigenvalues = s ** 2 / (d - 1)
    basis = u[:, :n_components].copy()
    # fix SVD sign ambiguity: largest-magnitude entry of each column is positive
    pivots = np.argmax(np.abs(basis), axis=0)
    signs = np.sign(basis[pivots, np.arange(n_components)])
    signs[signs == 0] = 1.0
    basis *= signs
    shape = tuple(np.shape(images[0])) if np.ndim(images[0]) == 2 else None
    logger.debug('Fitted %d-component subspace on %d images of dimension %d', n_components, d, p)
    return SubspaceModel(
        mean, basis, eigenvalues[:n_components].copy(), RepresentationKind.parse(representation),
        p, d, float(eigenvalues.sum()), shape,
    )


def project(model: SubspaceModel, image: np.ndarray) -> np.ndarray:
    """Coordinates of an image in the model's subspace."""
    c = vectorize(image)
    if c.size != model.p:
        raise SubspaceError(f'image has {c.size} values, model expects {model.p}')
    if model.mean_image is not None:
        c = c - model.mean_image
    return model.basis.T @ c


def project_many(model: SubspaceModel, images: Sequence[np.ndarray]) -> np.ndarray:
    """Projections of several images, one row per image."""
    y = data_matrix(images)
    if y.shape[0] != model.p:
        raise SubspaceError(f'images have {y.shape[0]} values, model expects {model.p}')
    if model.mean_image is not None:
        y = y - model.mean_image[:, None]
    return (model.basis.T @ y).T


def explained_variance(model: SubspaceModel) -> np.ndarray:
    """Share of the total training variance carried by each kept component."""
    if model.total_variance == 0:
        return np.zeros(model.n_components)
    return model.eigenvalues / model.total_variance


def eigenimages(model: SubspaceModel, shape: Optional[Tuple[int, int]] = None) -> np.ndarray:
    """Basis vectors reshaped to the representation's image dimensions."""
    shape = shape or model.image_shape or model.representation.shape
    return model.basis.T.reshape((model.n_components,) + tuple(shape))


def _payload(model: SubspaceModel) -> bytes:
    header = HEADER.pack(
        MAGIC, VERSION, model.representation.index, model.p, model.d, model.n_components,
        1 if model.centered else 0,
    )
    parts = [header]
    if model.mean_image is not None:
        parts.append(np.asarray(model.mean_image, dtype='<f8').tobytes())
    parts.append(np.asarray(model.basis, dtype='<f8').tobytes(order='F'))
    parts.append(np.asarray(model.eigenvalues, dtype='<f8').tobytes())
    parts.append(np.array([model.total_variance], dtype='<f8').tobytes())
    return b''.join(parts)


def save(model: SubspaceModel, path: str) -> str:
    """Write the model atomically; returns ``path``."""
    payload = _payload(model)
    payload += CHECKSUM.pack(zlib.crc32(payload) & 0xFFFFFFFF)
    return write_bytes(path, payload)


def load(path: str) -> SubspaceModel:
    """
    Read a model written by :func:`save`.

    Raises:
        ModelFormatError: wrong magic or version, truncated file or checksum mismatch
    """
    with open(path, 'rb') as stream:
        data = stream.read()
    if len(data) < HEADER.size + CHECKSUM.size:
        raise ModelFormatError(f'{path}: file too short')
    magic, version, kind, p, d, n_components, centered = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ModelFormatError(f'{path}: bad magic {magic!r}')
    if version != VERSION:
        raise ModelFormatError(f'{path}: unsupported version {version}')
    body, (stored,) = data[:-CHECKSUM.size], CHECKSUM.unpack(data[-CHECKSUM.size:])
    if zlib.crc32(body) & 0xFFFFFFFF != stored:
        raise ModelFormatError(f'{path}: checksum mismatch')
    expected = HEADER.size + 8 * ((p if centered else 0) + p * n_components + n_components + 1)
    if len(body) != expected:
        raise ModelFormatError(f'{path}: expected {expected} bytes, found {len(body)}')
    try:
        representation = list(RepresentationKind)[kind]
    except IndexError:
        raise ModelFormatError(f'{path}: unknown representation code {kind}') from None

    offset = HEADER.size
    values = np.frombuffer(body, dtype='<f8', offset=offset)
    cursor = 0
    mean = None
    if centered:
        mean = values[:p].copy()
        cursor = p
    basis = values[cursor:cursor + p * n_components].reshape((p, n_components), order='F').copy()
    cursor += p * n_components
    eigenvalues = values[cursor:cursor + n_components].copy()
    total = float(values[cursor + n_components])
    shape = representation.shape if representation.shape[0] * representation.shape[1] == p else None
    return SubspaceModel(mean, basis, eigenvalues, representation, p, d, total, shape)
