"""
Periodicity-domain representations: cadence-velocity diagrams, mean
cadence/Doppler spectra, warped CVDs and the fixed-size image catalog used
for classification.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from scipy import signal
from scipy.interpolate import RegularGridInterpolator

from .dsp import Spectrogram, half_plane_indices
from .exceptions import CVDError, ConfigurationError
from .sim import Direction, IQRecording, doppler_shift

logger = logging.getLogger(__name__)

# magnitudes below this fraction of the input scale count as numerical zero
ZERO_TOLERANCE = 1e-9
STANDARD_FMD = 1.0
STANDARD_FDMAX = 500.0


@dataclass(frozen=True)
class CadenceGrid:
    resolution: float = 0.04
    n_bins: int = 129

    def __post_init__(self):
        if self.resolution <= 0 or self.n_bins < 2:
            raise ConfigurationError('cadence grid needs a positive resolution and at least two bins')

    @property
    def axis(self) -> np.ndarray:
        return np.arange(self.n_bins) * self.resolution

    @property
    def max_cadence(self) -> float:
        return (self.n_bins - 1) * self.resolution


class RepresentationKind(str, Enum):
    SPECTROGRAM = 'SPECTROGRAM'
    CVD = 'CVD'
    MCS = 'MCS'
    CVD_PRE = 'CVD_PRE'
    MCS_PRE = 'MCS_PRE'
    FT_FILTERED_TIME = 'FT_FILTERED_TIME'

    @property
    def shape(self) -> Tuple[int, int]:
        return REPRESENTATION_SHAPES[self]

    @property
    def index(self) -> int:
        return list(RepresentationKind).index(self)

    @classmethod
    def parse(cls, value) -> 'RepresentationKind':
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper().replace('-', '_'))
        except ValueError:
            raise ConfigurationError(f'Unknown representation kind: {value!r}') from None


REPRESENTATION_SHAPES = {
    RepresentationKind.SPECTROGRAM: (101, 192),
    RepresentationKind.CVD: (101, 129),
    RepresentationKind.MCS: (1, 129),
    RepresentationKind.CVD_PRE: (101, 129),
    RepresentationKind.MCS_PRE: (1, 129),
    RepresentationKind.FT_FILTERED_TIME: (1, 129),
}


@dataclass(frozen=True, eq=False)
class CVDImage:
    values: np.ndarray
    cadence_axis: np.ndarray
    doppler_axis: np.ndarray
    direction: Direction = Direction.TOWARD
    preprocessed: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.doppler_axis), len(self.cadence_axis)):
            raise CVDError(f'CVD values {values.shape} do not match its axes')
        if np.any(values < 0):
            raise CVDError('CVD entries must be non-negative')
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'cadence_axis', np.asarray(self.cadence_axis, dtype=float))
        object.__setattr__(self, 'doppler_axis', np.asarray(self.doppler_axis, dtype=float))


@dataclass(frozen=True, eq=False)
class CadenceSpectrum:
    values: np.ndarray
    cadence_axis: np.ndarray

    def __post_init__(self):
        if len(self.values) != len(self.cadence_axis):
            raise CVDError('cadence spectrum length does not match its axis')

    def dominant_cadence(self) -> float:
        """Cadence of the largest bin, ignoring the DC bin."""
        return float(self.cadence_axis[1 + int(np.argmax(self.values[1:]))])


@dataclass(frozen=True, eq=False)
class DopplerSpectrum:
    values: np.ndarray
    doppler_axis: np.ndarray


def cadence_transform(x: np.ndarray, rate: float, grid: CadenceGrid = CadenceGrid()) -> np.ndarray:
    """
    Magnitude of the DFT of ``x`` along its last axis, evaluated on the cadence grid.

    Equivalent to zero-padding to the grid resolution whenever ``rate /
    grid.resolution`` is an integer.

    Args:
        x: Real or complex samples, time on the last axis
        rate: Sampling rate of ``x`` in Hz

    Returns:
        Array with the last axis replaced by ``grid.n_bins`` magnitudes
    """
    if rate < 2.0 * grid.max_cadence:
        raise CVDError(
            f'rate {rate:.3f} Hz cannot resolve cadences up to {grid.max_cadence:.2f} Hz'
        )
    n = np.arange(x.shape[-1])
    kernel = np.exp(-2j * np.pi * np.outer(n, grid.axis) / rate)
    return np.abs(x @ kernel)


def _normalized(values: np.ndarray, scale: float) -> np.ndarray:
    peak = float(values.max()) if values.size else 0.0
    if peak <= ZERO_TOLERANCE * scale or peak == 0.0:
        return np.zeros_like(values)
    return values / peak


def _binned_half_plane(spec: Spectrogram, direction: Direction, rows: int, binning: int):
    indices = half_plane_indices(spec.doppler_axis, direction)
    needed = rows * binning
    if indices.size < needed:
        raise CVDError(
            f'{direction.value} half-plane has {indices.size} bins, {needed} needed for {rows} rows'
        )
    indices = indices[:needed]
    axis = spec.doppler_axis[indices].reshape(rows, binning).mean(axis=1)
    return indices, axis


def cvd(spec: Spectrogram, direction: Direction, grid: CadenceGrid = CadenceGrid(),
        doppler_rows: int = 101, doppler_binning: int = 4) -> CVDImage:
    """
    Cadence-velocity diagram of one half-plane.

    Each Doppler bin has its temporal mean removed before its spectrum is
    taken on the cadence grid; rows are then averaged ``doppler_binning`` at
    a time, outward from zero Doppler, and the image scaled to a unit
    maximum.
    """
    direction = Direction.parse(direction)
    if not spec.noise_reduced:
        raise CVDError('CVD requires a noise-reduced spectrogram')
    indices, axis = _binned_half_plane(spec, direction, doppler_rows, doppler_binning)
    series = spec.values[:, indices].T
    centered = series - series.mean(axis=1, keepdims=True)
    magnitude = cadence_transform(centered, spec.frame_rate, grid)
    binned = magnitude.reshape(doppler_rows, doppler_binning, grid.n_bins).mean(axis=1)
    scale = float(np.abs(series).max()) * series.shape[1]
    return CVDImage(_normalized(binned, scale), grid.axis, axis, direction)


def mean_cadence_spectrum(c: CVDImage) -> CadenceSpectrum:
    return CadenceSpectrum(c.values.mean(axis=0), c.cadence_axis.copy())


def mean_doppler_spectrum(c: CVDImage) -> DopplerSpectrum:
    return DopplerSpectrum(c.values.mean(axis=1), c.doppler_axis.copy())


def preprocess_cvd(c: CVDImage, f_mD: float, f_Dmax: float) -> CVDImage:
    """
    Warp a CVD so that its repetition frequency sits at 1 Hz and its maximal
    Doppler shift at 500 Hz, bilinearly resampled onto the input grid.

    ``f_Dmax`` may carry the sign of the half-plane; only its magnitude is used.
    """
    f_Dmax = abs(f_Dmax)
    if not (np.isfinite(f_mD) and np.isfinite(f_Dmax)) or f_mD <= 0 or f_Dmax == 0:
        raise CVDError(f'invalid warp factors f_mD={f_mD}, f_Dmax={f_Dmax}')
    doppler = np.abs(c.doppler_axis)
    interpolator = RegularGridInterpolator(
        (doppler, c.cadence_axis), c.values, method='linear', bounds_error=False, fill_value=0.0,
    )
    source_doppler = doppler * (f_Dmax / STANDARD_FDMAX)
    source_cadence = c.cadence_axis * (f_mD / STANDARD_FMD)
    mesh = np.meshgrid(source_doppler, source_cadence, indexing='ij')
    warped = interpolator(np.stack(mesh, axis=-1))
    warped = np.clip(warped, 0.0, None)
    return CVDImage(_normalized(warped, 1.0), c.cadence_axis.copy(), c.doppler_axis.copy(),
                    c.direction, preprocessed=True)


def highpass_baseband(samples: np.ndarray, cutoff: float, sampling_frequency: float,
                      order: int = 6) -> np.ndarray:
    """Zero-phase Butterworth high-pass of complex baseband samples."""
    nyquist = sampling_frequency / 2.0
    if not 0 < cutoff < nyquist:
        raise CVDError(f'high-pass cutoff {cutoff:.1f} Hz must lie below Nyquist ({nyquist:.1f} Hz)')
    sos = signal.butter(order, cutoff, btype='highpass', fs=sampling_frequency, output='sos')
    return signal.sosfiltfilt(sos, samples.real) + 1j * signal.sosfiltfilt(sos, samples.imag)


def ft_filtered_time(rec: IQRecording, v0: float, grid: CadenceGrid = CadenceGrid(),
                     order: int = 6) -> CadenceSpectrum:
    """
    Cadence spectrum of the limb-only signal power.

    The baseband signal is high-passed at the Doppler shift of ``2 * v0``,
    which removes the torso line; the spectrum of the remaining
    instantaneous power is taken on the cadence grid.
    """
    if not v0 > 0:
        raise CVDError('v0 must be positive')
    radar = rec.config
    cutoff = float(abs(doppler_shift(2.0 * v0, 0.0, radar)))
    filtered = highpass_baseband(rec.samples, cutoff, radar.sampling_frequency, order)
    power = np.abs(filtered) ** 2
    magnitude = cadence_transform(power - power.mean(), radar.sampling_frequency, grid)
    scale = float(np.mean(np.abs(rec.samples) ** 2)) * power.size
    return CadenceSpectrum(_normalized(magnitude, scale), grid.axis)


def spectrogram_image(spec: Spectrogram, direction: Direction, doppler_rows: int = 101,
                      doppler_binning: int = 4, time_subsample: int = 1, time_binning: int = 4,
                      time_columns: int = 192) -> np.ndarray:
    """
    Fixed-size spectrogram image of one half-plane, Doppler rows by time columns.

    Frames are sub-sampled, averaged in ``time_binning`` blocks, then cropped
    or zero-padded to ``time_columns``; the image is scaled to a unit maximum.
    """
    direction = Direction.parse(direction)
    indices, _ = _binned_half_plane(spec, direction, doppler_rows, doppler_binning)
    frames = spec.values[::time_subsample, indices].T
    usable = (frames.shape[1] // time_binning) * time_binning
    if usable == 0:
        raise CVDError('too few frames for time binning')
    binned = frames[:, :usable].reshape(
        doppler_rows, doppler_binning, usable // time_binning, time_binning
    ).mean(axis=(1, 3))
    image = np.zeros((doppler_rows, time_columns))
    width = min(time_columns, binned.shape[1])
    image[:, :width] = binned[:, :width]
    return _normalized(image, 0.0)


def check_shape(kind: RepresentationKind, matrix: np.ndarray) -> np.ndarray:
    """Return ``matrix`` as a 2-D array, raising when it breaks the kind's dimensions."""
    kind = RepresentationKind.parse(kind)
    array = np.atleast_2d(np.asarray(matrix, dtype=float))
    if array.shape != kind.shape:
        raise CVDError(f'{kind.value} must be {kind.shape[0]}x{kind.shape[1]}, got {array.shape[0]}x{array.shape[1]}')
    return array
