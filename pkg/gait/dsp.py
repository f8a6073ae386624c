"""
Baseband preprocessing and time-frequency analysis
"""
import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal

from .exceptions import ConfigurationError, RecordingError, SpectrogramError
from .sim import Direction, IQRecording, RadarConfig, doppler_shift

logger = logging.getLogger(__name__)

# frames transformed per FFT call
FRAME_CHUNK = 512


@dataclass(frozen=True)
class StftConfig:
    window: str = 'hamming'
    window_length: Optional[int] = None
    hop: int = 1
    fft_size: int = 2048

    def __post_init__(self):
        if self.hop < 1:
            raise ConfigurationError('hop must be at least 1 sample')
        if self.fft_size < 1:
            raise ConfigurationError('fft_size must be positive')
        if self.window_length is not None and not 0 < self.window_length <= self.fft_size:
            raise ConfigurationError('window_length must lie in (0, fft_size]')

    def resolve_window_length(self, sampling_frequency: float) -> int:
        """Window length in samples; defaults to about 0.1 s."""
        length = self.window_length or int(round(0.1 * sampling_frequency))
        if not 0 < length <= self.fft_size:
            raise ConfigurationError(f'window length {length} exceeds fft_size {self.fft_size}')
        return length

    def taper(self, length: int) -> np.ndarray:
        return signal.get_window(self.window, length, fftbins=False)


@dataclass(frozen=True, eq=False)
class Spectrogram:
    values: np.ndarray
    time_axis: np.ndarray
    doppler_axis: np.ndarray
    frame_rate: float
    noise_reduced: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        time_axis = np.asarray(self.time_axis, dtype=float)
        doppler_axis = np.asarray(self.doppler_axis, dtype=float)
        if values.shape != (time_axis.size, doppler_axis.size):
            raise SpectrogramError(
                f'values {values.shape} do not match axes ({time_axis.size}, {doppler_axis.size})'
            )
        if np.any(values < 0):
            raise SpectrogramError('spectrogram energies must be non-negative')
        for name, axis in (('time', time_axis), ('doppler', doppler_axis)):
            if axis.size > 1 and not np.all(np.diff(axis) > 0):
                raise SpectrogramError(f'{name} axis must be strictly increasing')
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'time_axis', time_axis)
        object.__setattr__(self, 'doppler_axis', doppler_axis)

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def bin_spacing(self) -> float:
        return float(self.doppler_axis[1] - self.doppler_axis[0])


@dataclass(frozen=True, eq=False)
class EnvelopeSignal:
    values: np.ndarray
    time_axis: np.ndarray
    frame_rate: float
    direction: Direction = Direction.TOWARD


@dataclass(frozen=True, eq=False)
class EnergySignal:
    values: np.ndarray
    time_axis: np.ndarray
    frame_rate: float


def remove_mean(rec: IQRecording) -> IQRecording:
    """Subtract the complex sample mean from a recording."""
    if rec.samples.size == 0:
        raise RecordingError('cannot remove the mean of an empty recording')
    return rec.with_samples(rec.samples - rec.samples.mean())


def spectrogram(rec: IQRecording, cfg: StftConfig) -> Spectrogram:
    """
    Squared-magnitude STFT with zero Doppler centered.

    Frame ``n`` starts at sample ``n * hop``; trailing samples that do not
    fill a whole window are dropped.

    Args:
        rec: Recording, usually already mean-removed
        cfg: Window, hop and FFT size

    Returns:
        Spectrogram of shape (n_frames, fft_size)
    """
    fs = rec.config.sampling_frequency
    length = cfg.resolve_window_length(fs)
    samples = rec.samples
    if samples.size < length:
        raise SpectrogramError(f'recording has {samples.size} samples, shorter than one {length}-sample window')
    window = cfg.taper(length)
    frames = sliding_window_view(samples, length)[::cfg.hop]
    values = np.empty((frames.shape[0], cfg.fft_size))
    for start in range(0, frames.shape[0], FRAME_CHUNK):
        block = frames[start:start + FRAME_CHUNK] * window
        spectrum = np.fft.fftshift(np.fft.fft(block, n=cfg.fft_size, axis=1), axes=1)
        values[start:start + FRAME_CHUNK] = np.abs(spectrum) ** 2
    time_axis = (np.arange(frames.shape[0]) * cfg.hop + (length - 1) / 2.0) / fs
    doppler_axis = np.fft.fftshift(np.fft.fftfreq(cfg.fft_size, d=1.0 / fs))
    return Spectrogram(values, time_axis, doppler_axis, frame_rate=fs / cfg.hop)


def noise_thresholds(spec: Spectrogram, quantile: float = 0.6, margin_db: float = 6.0) -> np.ndarray:
    """
    Per-Doppler-bin suppression thresholds.

    A bin's noise floor is the lower of its own energy quantile and the
    quantile over the whole spectrogram, so that a stationary line is not
    mistaken for that bin's floor.
    """
    if not 0 < quantile < 1:
        raise ConfigurationError('quantile must lie in (0, 1)')
    per_bin = np.quantile(spec.values, quantile, axis=0)
    overall = np.quantile(spec.values, quantile)
    return np.minimum(per_bin, overall) * 10.0 ** (margin_db / 10.0)


def apply_thresholds(spec: Spectrogram, thresholds: np.ndarray) -> Spectrogram:
    values = np.where(spec.values >= thresholds, spec.values, 0.0)
    return replace(spec, values=values, noise_reduced=True)


def denoise(spec: Spectrogram, quantile: float = 0.6, margin_db: float = 6.0,
            thresholds: Optional[np.ndarray] = None) -> Spectrogram:
    """Zero the entries under the adaptive noise threshold of their Doppler bin."""
    if spec.noise_reduced:
        raise SpectrogramError('spectrogram is already noise reduced')
    if not spec.values.any():
        return replace(spec, noise_reduced=True)
    if thresholds is None:
        thresholds = noise_thresholds(spec, quantile, margin_db)
    return apply_thresholds(spec, thresholds)


def half_plane_indices(doppler_axis: np.ndarray, direction: Direction) -> np.ndarray:
    """Indices of the direction's half-plane ordered outward from zero Doppler (zero included)."""
    direction = Direction.parse(direction)
    if direction is Direction.TOWARD:
        return np.flatnonzero(doppler_axis >= 0)
    return np.flatnonzero(doppler_axis <= 0)[::-1]


def _check_support(spec: Spectrogram, direction: Direction) -> np.ndarray:
    indices = half_plane_indices(spec.doppler_axis, direction)
    if indices.size < 2:
        raise SpectrogramError(f'spectrogram has no Doppler support on the {direction.value} side')
    own = spec.values[:, indices].sum()
    other = spec.values[:, half_plane_indices(spec.doppler_axis, direction_opposite(direction))].sum()
    if other > own:
        logger.warning(
            'Declared direction %s holds less energy (%.3g) than the opposite half-plane (%.3g)',
            direction.value, own, other,
        )
    return indices


def direction_opposite(direction: Direction) -> Direction:
    return Direction.AWAY if Direction.parse(direction) is Direction.TOWARD else Direction.TOWARD


def envelope(spec: Spectrogram, direction: Direction, energy_fraction: float = 0.95) -> EnvelopeSignal:
    """
    Per-frame extremal micro-Doppler frequency.

    Walking outward from zero Doppler, the envelope is the first bin at which
    the cumulative half-plane energy of the frame reaches ``energy_fraction``.
    Frames without energy give 0 Hz.
    """
    direction = Direction.parse(direction)
    if not spec.noise_reduced:
        raise SpectrogramError('envelope requires a noise-reduced spectrogram')
    if not 0 < energy_fraction <= 1:
        raise ConfigurationError('energy_fraction must lie in (0, 1]')
    indices = _check_support(spec, direction)
    cumulative = np.cumsum(spec.values[:, indices], axis=1)
    total = cumulative[:, -1]
    reached = cumulative >= (energy_fraction * total)[:, None]
    values = spec.doppler_axis[indices][np.argmax(reached, axis=1)]
    values = np.where(total > 0, values, 0.0)
    return EnvelopeSignal(values, spec.time_axis.copy(), spec.frame_rate, direction)


def default_torso_exclusion(v0: float, cfg: RadarConfig, margin_hz: float = 25.0) -> float:
    """Doppler magnitude above which bins count as limb motion."""
    return float(abs(doppler_shift(v0, 0.0, cfg))) + margin_hz


def energy_signal(spec: Spectrogram, torso_exclusion: float, direction: Direction = Direction.TOWARD) -> EnergySignal:
    """Mean energy per frame over the half-plane bins beyond ``torso_exclusion``."""
    direction = Direction.parse(direction)
    if not spec.noise_reduced:
        raise SpectrogramError('energy signal requires a noise-reduced spectrogram')
    mask = direction.doppler_sign * spec.doppler_axis > torso_exclusion
    count = int(mask.sum())
    if count == 0:
        raise SpectrogramError(f'no Doppler bins beyond the {torso_exclusion:.1f} Hz torso exclusion')
    values = spec.values[:, mask].sum(axis=1) / count
    return EnergySignal(values, spec.time_axis.copy(), spec.frame_rate)
