"""
Synthetic continuous-wave radar returns for five gait classes.

A walker is a handful of point scatterers (torso, two feet, two shins and
optionally a cane). Every track carries a radial velocity sampled at the
radar's sampling frequency; its baseband contribution accumulates phase from
the instantaneous Doppler shift.
"""
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, List, Optional, Tuple

import numpy as np

from .exceptions import ConfigurationError, RecordingError

logger = logging.getLogger(__name__)

# Sign of the synthesized phase: exp(+j*phi) puts a scatterer with Doppler
# shift f_D at +f_D on the spectrogram axis, so approaching walkers (negative
# radial velocity, positive Doppler) occupy the positive half-plane.
PHASE_SIGN = 1


class GaitClass(str, Enum):
    NW = 'NW'
    L1 = 'L1'
    L2 = 'L2'
    CW = 'CW'
    CWOOS = 'CW/oos'

    @property
    def index(self) -> int:
        return list(GaitClass).index(self)

    @classmethod
    def from_index(cls, index: int) -> 'GaitClass':
        return list(cls)[index]

    @classmethod
    def parse(cls, value) -> 'GaitClass':
        if isinstance(value, cls):
            return value
        text = str(value).strip()
        for member in cls:
            if text == member.value or text.upper() == member.name:
                return member
        raise ConfigurationError(f"Unknown gait class: {value!r}")


class Direction(str, Enum):
    TOWARD = 'toward'
    AWAY = 'away'

    @property
    def radial_sign(self) -> float:
        """Sign of the radial velocity; positive radial velocity recedes."""
        return -1.0 if self is Direction.TOWARD else 1.0

    @property
    def doppler_sign(self) -> int:
        """Half-plane of the spectrogram the walker occupies."""
        return 1 if self is Direction.TOWARD else -1

    @classmethod
    def parse(cls, value) -> 'Direction':
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ConfigurationError(f"Unknown direction: {value!r}") from None


@dataclass(frozen=True)
class RadarConfig:
    carrier_frequency: float = 2.4e10
    propagation_speed: float = 2.998e8
    sampling_frequency: float = 2560.0
    duration: float = 6.0
    aspect_angle: float = 0.0
    max_doppler: float = 500.0

    def __post_init__(self):
        if not self.carrier_frequency > 0:
            raise ConfigurationError('carrier_frequency must be positive')
        if not self.propagation_speed > 0:
            raise ConfigurationError('propagation_speed must be positive')
        if not self.duration > 0:
            raise ConfigurationError('duration must be positive')
        if not self.sampling_frequency > 2 * self.max_doppler:
            raise ConfigurationError(
                f'sampling_frequency {self.sampling_frequency} Hz cannot represent '
                f'±{self.max_doppler} Hz Doppler'
            )

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sampling_frequency))

    @property
    def time_axis(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.sampling_frequency


@dataclass(frozen=True, eq=False)
class ScattererTrack:
    id: str
    reflectivity: float
    radial_velocity: np.ndarray
    # amplitude modulation in [0, 1]; None means a steady return
    taper: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.reflectivity < 0:
            raise ConfigurationError(f'{self.id}: reflectivity must be non-negative')
        velocity = np.asarray(self.radial_velocity, dtype=float)
        if not np.all(np.isfinite(velocity)):
            raise ConfigurationError(f'{self.id}: radial velocity must be finite')
        object.__setattr__(self, 'radial_velocity', velocity)
        if self.taper is not None:
            taper = np.asarray(self.taper, dtype=float)
            if taper.shape != velocity.shape:
                raise ConfigurationError(f'{self.id}: taper and velocity lengths differ')
            object.__setattr__(self, 'taper', taper)


@dataclass(frozen=True)
class GaitProfile:
    gait_class: GaitClass
    base_velocity: float = 1.0
    stride_rate: float = 0.9
    direction: Direction = Direction.TOWARD
    peak_foot_velocity: float = 3.0
    limp_attenuation: float = 0.7
    cane_peak_velocity: float = 2.0
    noise_snr: Optional[float] = None
    rng_seed: int = 0
    torso_sway: float = 0.05
    duty_cycle: float = 0.45
    torso_reflectivity: float = 1.0
    foot_reflectivity: float = 0.5
    shin_reflectivity: float = 0.3
    cane_reflectivity: float = 0.4
    # amplitude scale of the whole return (range and aspect of the run)
    path_gain: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'gait_class', GaitClass.parse(self.gait_class))
        object.__setattr__(self, 'direction', Direction.parse(self.direction))
        if not 0.5 <= self.stride_rate <= 2.0:
            raise ConfigurationError(f'stride_rate {self.stride_rate} Hz outside [0.5, 2.0]')
        if not 0 <= self.base_velocity < self.peak_foot_velocity:
            raise ConfigurationError('base_velocity must be non-negative and below peak_foot_velocity')
        if not 0 < self.limp_attenuation <= 1:
            raise ConfigurationError('limp_attenuation must lie in (0, 1]')
        if not 0 < self.duty_cycle <= 0.5:
            raise ConfigurationError('duty_cycle must lie in (0, 0.5]')
        if self.cane_peak_velocity < 0 or self.torso_sway < 0:
            raise ConfigurationError('velocities must be non-negative')
        reflectivities = (self.torso_reflectivity, self.foot_reflectivity,
                          self.shin_reflectivity, self.cane_reflectivity)
        if min(reflectivities) < 0:
            raise ConfigurationError('reflectivities must be non-negative')
        if not self.path_gain > 0:
            raise ConfigurationError('path_gain must be positive')

    @property
    def event_interval(self) -> float:
        """Seconds between consecutive micro-Doppler events (steps or cane plants)."""
        if self.gait_class is GaitClass.CWOOS:
            return 2.0 / (3.0 * self.stride_rate)
        return 1.0 / self.stride_rate

    @property
    def torso_lurch(self) -> float:
        """
        Amplitude in m/s of the torso's lurch at half the stride rate.

        Only a one-sided limp has one; it deepens with the limp.
        """
        if self.gait_class is GaitClass.L1:
            return 2.0 * self.torso_sway * (1.0 - self.limp_attenuation)
        return 0.0


@dataclass(frozen=True, eq=False)
class IQRecording:
    samples: np.ndarray
    config: RadarConfig = field(default_factory=RadarConfig)
    direction: Direction = Direction.TOWARD
    label: Optional[GaitClass] = None
    subject_id: Optional[str] = None

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.complex128)
        if samples.ndim != 1:
            raise RecordingError('samples must be one-dimensional')
        if samples.size != self.config.n_samples:
            raise RecordingError(
                f'expected {self.config.n_samples} samples for '
                f'{self.config.duration} s at {self.config.sampling_frequency} Hz, got {samples.size}'
            )
        if not np.all(np.isfinite(samples)):
            raise RecordingError('samples contain NaN or Inf')
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)
        object.__setattr__(self, 'direction', Direction.parse(self.direction))
        if self.label is not None:
            object.__setattr__(self, 'label', GaitClass.parse(self.label))

    def with_samples(self, samples: np.ndarray) -> 'IQRecording':
        return replace(self, samples=samples)


def doppler_shift(v, theta: float, cfg: RadarConfig):
    """Doppler shift in Hz of a scatterer with radial velocity ``v`` (m/s, positive receding)."""
    return -cfg.carrier_frequency * (2.0 * np.asarray(v, dtype=float) / cfg.propagation_speed) * np.cos(theta)


def radial_velocity_from_doppler(f_d, theta: float, cfg: RadarConfig):
    """Inverse of :func:`doppler_shift`."""
    return -np.asarray(f_d, dtype=float) * cfg.propagation_speed / (2.0 * cfg.carrier_frequency * np.cos(theta))


def _event_limbs(gait_class: GaitClass, k: int) -> Tuple[str, ...]:
    if gait_class is GaitClass.CWOOS:
        return (('foot_left',), ('foot_right',), ('cane',))[k % 3]
    if k % 2 == 0:
        return ('foot_left', 'cane') if gait_class is GaitClass.CW else ('foot_left',)
    return ('foot_right',)


def gait_tracks(profile: GaitProfile, cfg: RadarConfig) -> List[ScattererTrack]:
    """
    Build the scatterer tracks of one walk.

    Limb bursts are half-sines lasting ``2 * duty_cycle`` event intervals;
    the limb return fades in and out with the same shape, so limbs at rest
    are not seen by the radar.

    Returns:
        List of tracks with non-zero reflectivity
    """
    rng = np.random.default_rng(profile.rng_seed)
    t = cfg.time_axis
    n = t.size
    interval = profile.event_interval
    burst = 2.0 * profile.duty_cycle * interval

    sway_phase = rng.uniform(0.0, 2.0 * np.pi)
    torso_speed = profile.base_velocity + profile.torso_sway * np.sin(
        2.0 * np.pi * profile.stride_rate * t + sway_phase
    )
    if profile.torso_lurch:
        torso_speed = torso_speed + profile.torso_lurch * np.sin(np.pi * profile.stride_rate * t + sway_phase)

    speeds = {name: np.zeros(n) for name in ('foot_left', 'foot_right', 'cane')}
    tapers = {name: np.zeros(n) for name in speeds}
    peaks = {
        'foot_left': profile.peak_foot_velocity,
        'foot_right': profile.peak_foot_velocity,
        'cane': profile.cane_peak_velocity,
    }
    gains = {'foot_left': 1.0, 'foot_right': 1.0, 'cane': 1.0}
    if profile.gait_class is GaitClass.L1:
        gains['foot_right'] = profile.limp_attenuation
    elif profile.gait_class is GaitClass.L2:
        gains['foot_left'] = gains['foot_right'] = profile.limp_attenuation

    offset = rng.uniform(0.0, interval)
    first = -int(np.ceil(burst / interval))
    last = int(np.ceil(cfg.duration / interval))
    for k in range(first, last + 1):
        start = offset + k * interval
        tau = t - start
        inside = (tau >= 0.0) & (tau < burst)
        if not inside.any():
            continue
        shape = np.sin(np.pi * tau[inside] / burst)
        for limb in _event_limbs(profile.gait_class, k):
            speeds[limb][inside] = gains[limb] * peaks[limb] * shape
            tapers[limb][inside] = gains[limb] * shape

    sign = profile.direction.radial_sign
    tracks = [ScattererTrack('torso', profile.torso_reflectivity, sign * torso_speed)]
    for side in ('left', 'right'):
        foot = f'foot_{side}'
        tracks.append(ScattererTrack(foot, profile.foot_reflectivity, sign * speeds[foot], tapers[foot]))
        tracks.append(ScattererTrack(
            f'shin_{side}', profile.shin_reflectivity,
            sign * 0.5 * (torso_speed + speeds[foot]), tapers[foot],
        ))
    if profile.gait_class in (GaitClass.CW, GaitClass.CWOOS):
        tracks.append(ScattererTrack('cane', profile.cane_reflectivity, sign * speeds['cane'], tapers['cane']))
    return [track for track in tracks if track.reflectivity > 0]


def track_signal(track: ScattererTrack, cfg: RadarConfig) -> np.ndarray:
    """Baseband return of a single scatterer with accumulated Doppler phase."""
    f_d = doppler_shift(track.radial_velocity, cfg.aspect_angle, cfg)
    phase = 2.0 * np.pi * np.cumsum(f_d) / cfg.sampling_frequency
    amplitude = track.reflectivity / 2.0
    if track.taper is not None:
        amplitude = amplitude * track.taper
    return amplitude * np.exp(1j * PHASE_SIGN * phase)


def add_noise(samples: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Add complex white Gaussian noise at ``snr_db`` relative to the mean signal power."""
    power = float(np.mean(np.abs(samples) ** 2))
    sigma = np.sqrt(power / 10.0 ** (snr_db / 10.0) / 2.0)
    noise = rng.standard_normal(samples.size) + 1j * rng.standard_normal(samples.size)
    return samples + sigma * noise


def synthesize_gait(profile: GaitProfile, cfg: Optional[RadarConfig] = None,
                    subject_id: Optional[str] = None) -> IQRecording:
    """
    Synthesize one labeled walk.

    Args:
        profile: Kinematic profile and class
        cfg: Radar parameters (defaults to the 24 GHz configuration)
        subject_id: Optional subject label stored on the recording

    Returns:
        IQRecording with ``round(duration * fs)`` samples
    """
    cfg = cfg or RadarConfig()
    samples = np.zeros(cfg.n_samples, dtype=np.complex128)
    for track in gait_tracks(profile, cfg):
        samples += track_signal(track, cfg)
    samples *= profile.path_gain
    if profile.noise_snr is not None:
        # separate stream so noise does not perturb the kinematics draws
        noise_rng = np.random.default_rng([profile.rng_seed, 1])
        samples = add_noise(samples, profile.noise_snr, noise_rng)
    return IQRecording(samples, cfg, profile.direction, profile.gait_class, subject_id)


# Per-subject ranges.
SUBJECT_STRIDE_RATE = (0.75, 1.05)
SUBJECT_BASE_VELOCITY = (0.8, 1.2)
SUBJECT_PEAK_FOOT_VELOCITY = (2.6, 3.0)
SUBJECT_CANE_PEAK_VELOCITY = (1.8, 2.2)
SUBJECT_LIMP_ATTENUATION = (0.6, 0.8)
# Per-run variation around the subject: a walking speed shared by every
# limb, a stride rate, a received power, and ±RUN_JITTER on each velocity.
RUN_SPEED_SPREAD = 0.1
RUN_STRIDE_SPREAD = 0.05
RUN_PATH_GAIN_DB = 2.0
RUN_JITTER = 0.02


def iter_dataset_profiles(n_subjects: int, runs_per_class: int, seed: int,
                          noise_snr: Optional[float] = None) -> Iterator[Tuple[str, GaitProfile]]:
    """
    Yield ``(subject_id, profile)`` pairs of a balanced synthetic corpus.

    Directions alternate with subject index plus run index, so every
    subject starts on the opposite side of the previous one and both
    directions stay balanced for odd ``runs_per_class``.
    """
    if n_subjects < 1 or runs_per_class < 1:
        raise ConfigurationError('n_subjects and runs_per_class must be at least 1')
    subject_sequences = np.random.SeedSequence(seed).spawn(n_subjects)
    for index, sequence in enumerate(subject_sequences):
        rng = np.random.default_rng(sequence)
        subject_id = f'S{index + 1:02d}'
        stride = rng.uniform(*SUBJECT_STRIDE_RATE)
        base = rng.uniform(*SUBJECT_BASE_VELOCITY)
        peak = rng.uniform(*SUBJECT_PEAK_FOOT_VELOCITY)
        cane = rng.uniform(*SUBJECT_CANE_PEAK_VELOCITY)
        limp = rng.uniform(*SUBJECT_LIMP_ATTENUATION)
        for gait_class in GaitClass:
            for run in range(runs_per_class):
                speed = rng.uniform(1.0 - RUN_SPEED_SPREAD, 1.0 + RUN_SPEED_SPREAD)
                cadence = rng.uniform(1.0 - RUN_STRIDE_SPREAD, 1.0 + RUN_STRIDE_SPREAD)
                gain_db = rng.uniform(-RUN_PATH_GAIN_DB, RUN_PATH_GAIN_DB)
                jitter = rng.uniform(1.0 - RUN_JITTER, 1.0 + RUN_JITTER, size=4)
                yield subject_id, GaitProfile(
                    gait_class=gait_class,
                    base_velocity=base * speed * jitter[0],
                    stride_rate=float(np.clip(stride * cadence * jitter[1], 0.5, 2.0)),
                    direction=Direction.TOWARD if (index + run) % 2 == 0 else Direction.AWAY,
                    peak_foot_velocity=peak * speed * jitter[2],
                    limp_attenuation=limp,
                    cane_peak_velocity=cane * speed * jitter[3],
                    noise_snr=noise_snr,
                    rng_seed=int(rng.integers(0, 2 ** 32)),
                    path_gain=float(10.0 ** (gain_db / 20.0)),
                )


def synthesize_dataset(n_subjects: int, runs_per_class: int, seed: int,
                       cfg: Optional[RadarConfig] = None,
                       noise_snr: Optional[float] = None) -> List[IQRecording]:
    """Synthesize ``n_subjects * 5 * runs_per_class`` recordings deterministically from ``seed``."""
    recordings = [
        synthesize_gait(profile, cfg, subject_id)
        for subject_id, profile in iter_dataset_profiles(n_subjects, runs_per_class, seed, noise_snr)
    ]
    logger.info('Synthesized %d recordings from %d subjects', len(recordings), n_subjects)
    return recordings
