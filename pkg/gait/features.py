"""
Physical gait features and the comparison feature sets.

Physical features summarize one walk in nine numbers: micro-Doppler
repetition frequency, maximal Doppler shift, coefficient of variation of the
envelope peaks, the gait harmonic ratio and five harmonic amplitudes of the
limb energy signal.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.ndimage import uniform_filter1d
from scipy.optimize import minimize_scalar
from scipy.signal import find_peaks

from .config import PipelineConfig
from .cvd import (
    CVDImage, CadenceGrid, CadenceSpectrum, DopplerSpectrum, cadence_transform, cvd,
    mean_cadence_spectrum, mean_doppler_spectrum,
)
from .dsp import (
    EnergySignal, EnvelopeSignal, Spectrogram, default_torso_exclusion, denoise, energy_signal,
    envelope, remove_mean, spectrogram,
)
from .exceptions import CVDError, ConfigurationError, FeatureError, SpectrogramError
from .sim import Direction, IQRecording, RadarConfig, radial_velocity_from_doppler

logger = logging.getLogger(__name__)

BETA_VALUES = (1.0, 1.0 / 2.0, 1.0 / 3.0)
BETA_RANGE = (0.25, 1.5)
PHYSICAL_FEATURE_NAMES = ('f_mD', 'fDmax', 'cv', 'beta', 'alpha1', 'alpha2', 'alpha3', 'alpha4', 'alpha5')
PROFILE_SAMPLES = 100


@dataclass(frozen=True, eq=False)
class SOHModel:
    f0: float
    q: int
    amplitudes: np.ndarray
    phases: np.ndarray
    residual: float
    bic: float = float('nan')

    def __post_init__(self):
        if self.q < 1 or self.q > len(self.amplitudes):
            raise FeatureError(f'model order {self.q} outside [1, {len(self.amplitudes)}]')


@dataclass(frozen=True)
class PhysicalFeatures:
    f_mD: float
    f_Dmax: float
    c_v: float
    beta: float
    alphas: Tuple[float, ...]
    missing: Tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.alphas) != 5:
            raise FeatureError('physical features carry exactly five amplitudes')
        if 'beta' not in self.missing and self.beta not in BETA_VALUES:
            raise FeatureError(f'beta {self.beta} not in {BETA_VALUES}')

    def as_vector(self) -> np.ndarray:
        return np.array([self.f_mD, self.f_Dmax, self.c_v, self.beta, *self.alphas], dtype=float)


@dataclass(frozen=True, eq=False)
class BaselineFeaturesB:
    frequencies: np.ndarray
    profiles: np.ndarray
    v0: float
    variant: str = 'B1'
    missing: Tuple[str, ...] = ()

    def as_vector(self) -> np.ndarray:
        if self.variant == 'B2':
            return np.concatenate([self.frequencies, [abs(self.v0)]])
        return np.concatenate([self.frequencies, self.profiles.ravel(), [self.v0]])


@dataclass(frozen=True, eq=False)
class BaselineFeaturesR:
    f_mD: float
    fD_min: float
    fD_max: float
    gamma_profile: np.ndarray
    variant: str = 'R1'
    missing: Tuple[str, ...] = ()

    def as_vector(self) -> np.ndarray:
        if self.variant == 'R2':
            return np.asarray(self.gamma_profile, dtype=float)
        return np.array([self.f_mD, self.fD_min, self.fD_max], dtype=float)


def _odd_span(width_hz: float, spacing: float) -> int:
    bins = width_hz / spacing
    return max(1, 2 * int(round((bins - 1) / 2.0)) + 1)


def estimate_base_velocity(mds: DopplerSpectrum, cfg: RadarConfig, smoothing_hz: float = 11.0) -> float:
    """
    Torso radial velocity from the mean Doppler spectrum.

    The spectrum is smoothed with a moving average of about ``smoothing_hz``
    and its maximum located. Equal maxima are grouped into runs; the run at
    the lowest Doppler frequency wins and its centre is used.

    Returns:
        Signed radial velocity in m/s (positive receding)
    """
    values = np.asarray(mds.values, dtype=float)
    axis = np.asarray(mds.doppler_axis, dtype=float)
    if values.size == 0 or not np.any(values):
        raise FeatureError('mean Doppler spectrum is all zero')
    spacing = abs(axis[1] - axis[0]) if axis.size > 1 else 1.0
    smoothed = uniform_filter1d(values, size=_odd_span(smoothing_hz, spacing), mode='nearest')
    at_peak = np.isclose(smoothed, smoothed.max(), rtol=1e-9, atol=0.0)
    edges = np.diff(np.concatenate([[0], at_peak.astype(int), [0]]))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1) - 1
    centres = 0.5 * (axis[starts] + axis[stops])
    frequency = float(centres.min())
    return float(radial_velocity_from_doppler(frequency, 0.0, cfg))


def estimate_fmD(env: EnvelopeSignal, grid: CadenceGrid = CadenceGrid()) -> float:
    """Micro-Doppler repetition frequency: dominant cadence of the mean-removed envelope."""
    values = np.asarray(env.values, dtype=float)
    if values.size < 2 or np.ptp(values) == 0:
        raise FeatureError('envelope is constant')
    spectrum = cadence_transform(values - values.mean(), env.frame_rate, grid)
    return CadenceSpectrum(spectrum, grid.axis).dominant_cadence()


def estimate_fDmax(env: EnvelopeSignal, mode: str = 'samples') -> float:
    """
    Maximal Doppler shift: mean of the top 10 % of envelope magnitudes.

    Zero samples mark frames without energy and are left out; the decile
    holds ``max(1, floor(0.1 * n))`` values. In ``peaks`` mode only the local
    maxima of the envelope are ranked.
    """
    if mode not in ('samples', 'peaks'):
        raise ConfigurationError(f'unknown f_Dmax mode {mode!r}')
    magnitudes = np.abs(np.asarray(env.values, dtype=float))
    if mode == 'peaks':
        peaks, _ = find_peaks(magnitudes)
        if peaks.size:
            magnitudes = magnitudes[peaks]
    valid = magnitudes[magnitudes > 0]
    if valid.size == 0:
        return 0.0
    count = max(1, int(np.floor(0.1 * valid.size)))
    top = np.sort(valid)[-count:]
    return Direction.parse(env.direction).doppler_sign * float(top.mean())


def coefficient_of_variation(env: EnvelopeSignal, prominence: float = 0.05,
                             min_separation: float = 0.2) -> float:
    """
    Spread of the envelope's peak heights.

    A cubic spline through the local maxima of ``|envelope|`` is evaluated
    between the first and the last peak; the result is its std/mean.

    Args:
        env: Envelope signal
        prominence: Minimum peak prominence as a fraction of the largest magnitude
        min_separation: Minimum peak spacing in seconds

    Raises:
        FeatureError: fewer than two peaks, or a zero-mean spline
    """
    magnitudes = np.abs(np.asarray(env.values, dtype=float))
    if magnitudes.size == 0 or magnitudes.max() == 0:
        raise FeatureError('envelope has no peaks')
    distance = max(1, int(round(min_separation * env.frame_rate)))
    peaks, _ = find_peaks(magnitudes, prominence=prominence * magnitudes.max(), distance=distance)
    if peaks.size < 2:
        raise FeatureError(f'{peaks.size} envelope peak(s), two needed')
    times = np.asarray(env.time_axis, dtype=float)
    spline = CubicSpline(times[peaks], magnitudes[peaks])
    curve = spline(times[peaks[0]:peaks[-1] + 1])
    mean = curve.mean()
    if mean == 0:
        raise FeatureError('envelope peak spline has zero mean')
    return float(curve.std() / mean)


def soh_design(n_samples: int, rate: float, f0: float, q: int) -> np.ndarray:
    """Cosine and sine columns of the first ``q`` harmonics of ``f0``."""
    phase = 2.0 * np.pi * f0 * np.outer(np.arange(n_samples), np.arange(1, q + 1)) / rate
    return np.hstack([np.cos(phase), np.sin(phase)])


def soh_residual(x: np.ndarray, rate: float, f0: float, q: int) -> Tuple[float, np.ndarray]:
    """Squared error of the least-squares sum-of-harmonics fit and its coefficients."""
    design = soh_design(x.size, rate, f0, q)
    coefficients, _, _, _ = np.linalg.lstsq(design, x, rcond=None)
    error = x - design @ coefficients
    return float(error @ error), coefficients


def fit_soh(E: EnergySignal, f_mD: float, q_max: int = 5, refine_hz: float = 0.05,
            ratios: Sequence[float] = BETA_VALUES) -> SOHModel:
    """
    Nonlinear least-squares sum-of-harmonics fit of the energy signal.

    Candidate fundamentals are ``f_mD * ratio``; each is refined with a
    bounded scalar search inside ``±min(refine_hz, 0.1 * candidate)`` for
    every order up to ``q_max``. The pair with the lowest
    ``N * ln(xi / N) + q * ln(N)`` wins, earlier candidates and lower orders
    winning ties.

    Args:
        E: Energy signal; its mean is removed here
        f_mD: Micro-Doppler repetition frequency in Hz
        q_max: Largest model order

    Returns:
        SOHModel with amplitudes and phases padded to ``q_max``
    """
    if not f_mD > 0:
        raise FeatureError('f_mD must be positive')
    x = np.asarray(E.values, dtype=float)
    if not np.all(np.isfinite(x)):
        raise FeatureError('energy signal contains non-finite values')
    x = x - x.mean()
    n = x.size
    if n <= 2 * q_max:
        raise FeatureError(f'{n} energy samples are too few for order {q_max}')
    total = float(x @ x)
    if total == 0:
        return SOHModel(f_mD, 1, np.zeros(q_max), np.zeros(q_max), 0.0)
    floor = 1e-12 * total
    rate = E.frame_rate

    best = None
    for ratio in ratios:
        candidate = f_mD * ratio
        half_width = min(refine_hz, 0.1 * candidate)
        for q in range(1, q_max + 1):
            search = minimize_scalar(
                lambda f: soh_residual(x, rate, f, q)[0],
                bounds=(candidate - half_width, candidate + half_width),
                method='bounded', options={'xatol': 1e-5},
            )
            f0 = float(search.x)
            residual, coefficients = soh_residual(x, rate, f0, q)
            bic = n * np.log(max(residual, floor) / n) + q * np.log(n)
            if best is None or bic < best[0]:
                best = (bic, f0, q, residual, coefficients)

    bic, f0, q, residual, coefficients = best
    cosines, sines = coefficients[:q], coefficients[q:]
    amplitudes = np.zeros(q_max)
    phases = np.zeros(q_max)
    amplitudes[:q] = np.hypot(cosines, sines)
    phases[:q] = np.arctan2(-sines, cosines)
    return SOHModel(f0, q, amplitudes, phases, residual, float(bic))


def gait_harmonic_ratio(f0: float, f_mD: float) -> float:
    """Ratio ``f0 / f_mD`` snapped to 1, 1/2 or 1/3."""
    if not (f0 > 0 and f_mD > 0):
        raise FeatureError('frequencies must be positive')
    ratio = f0 / f_mD
    if not BETA_RANGE[0] <= ratio <= BETA_RANGE[1]:
        raise FeatureError(f'harmonic ratio {ratio:.3f} outside [{BETA_RANGE[0]}, {BETA_RANGE[1]}]')
    return min(BETA_VALUES, key=lambda value: abs(value - ratio))


@dataclass(frozen=True, eq=False)
class Signatures:
    """Intermediate products of one recording shared by every feature set."""
    recording: IQRecording
    spectrogram: Spectrogram
    envelope: EnvelopeSignal
    cvd: CVDImage
    mcs: CadenceSpectrum
    mds: DopplerSpectrum
    v0: Optional[float]
    energy: Optional[EnergySignal]
    problems: Tuple[str, ...] = field(default=())


def extract_signatures(rec: IQRecording, cfg: PipelineConfig) -> Signatures:
    """
    Run the time-frequency chain on one recording.

    The base velocity and the energy signal are optional: when the mean
    Doppler spectrum is empty they are ``None`` and the reason is kept in
    ``problems``.
    """
    spec = denoise(
        spectrogram(remove_mean(rec), cfg.stft), cfg.denoise_quantile, cfg.denoise_margin_db,
    )
    env = envelope(spec, rec.direction, cfg.energy_fraction)
    image = cvd(spec, rec.direction, cfg.cadence, cfg.doppler_rows, cfg.doppler_binning)
    mds = mean_doppler_spectrum(image)
    problems = []
    v0 = energy = None
    try:
        v0 = estimate_base_velocity(mds, rec.config, cfg.v0_smoothing_hz)
        exclusion = default_torso_exclusion(v0, rec.config, cfg.torso_margin_hz)
        energy = energy_signal(spec, exclusion, rec.direction)
    except (FeatureError, SpectrogramError) as exc:
        problems.append(str(exc))
    return Signatures(rec, spec, env, image, mean_cadence_spectrum(image), mds, v0, energy, tuple(problems))


def _describe(rec: IQRecording) -> str:
    label = rec.label.value if rec.label else 'unlabeled'
    return f'{rec.subject_id or "recording"} ({label}, {rec.direction.value})'


def physical_features(rec: IQRecording, cfg: PipelineConfig = PipelineConfig(),
                      signatures: Optional[Signatures] = None) -> PhysicalFeatures:
    """
    Nine-value physical feature vector of one recording.

    Constituent failures do not abort extraction: the affected features are
    set to zero and listed in ``missing``.
    """
    sig = signatures or extract_signatures(rec, cfg)
    missing: List[str] = []

    def attempt(names, compute):
        try:
            return compute()
        except (FeatureError, SpectrogramError, CVDError) as exc:
            logger.warning('%s: %s imputed as 0 (%s)', _describe(rec), ', '.join(names), exc)
            missing.extend(names)
            return None

    f_mD = attempt(('f_mD',), lambda: estimate_fmD(sig.envelope, cfg.cadence))
    f_Dmax = estimate_fDmax(sig.envelope, cfg.fdmax_mode)
    c_v = attempt(('cv',), lambda: coefficient_of_variation(sig.envelope))

    def harmonic_fit():
        if f_mD is None:
            raise FeatureError('no repetition frequency')
        if sig.energy is None:
            raise FeatureError('; '.join(sig.problems) or 'no energy signal')
        return fit_soh(sig.energy, f_mD, cfg.q_max, cfg.soh_refine_hz)

    alpha_names = tuple(f'alpha{i}' for i in range(1, 6))
    model = attempt(('beta',) + alpha_names, harmonic_fit)
    beta = None
    if model is not None:
        beta = attempt(('beta',), lambda: gait_harmonic_ratio(model.f0, f_mD))
    alphas = tuple(float(a) for a in model.amplitudes[:5]) if model is not None else (0.0,) * 5
    alphas = alphas + (0.0,) * (5 - len(alphas))
    return PhysicalFeatures(
        f_mD=f_mD or 0.0,
        f_Dmax=f_Dmax,
        c_v=c_v if c_v is not None else 0.0,
        beta=beta if beta is not None else 0.0,
        alphas=alphas,
        missing=tuple(missing),
    )


def _resample(profile: np.ndarray, samples: int = PROFILE_SAMPLES) -> np.ndarray:
    source = np.linspace(0.0, 1.0, profile.size)
    return np.interp(np.linspace(0.0, 1.0, samples), source, profile)


def baseline_bjorklund(c: CVDImage, mds: DopplerSpectrum, variant: str = 'B1',
                       radar: Optional[RadarConfig] = None, smoothing_hz: float = 11.0) -> BaselineFeaturesB:
    """
    Three strongest cadence peaks, their velocity profiles and the base velocity.

    Peaks of the mean cadence spectrum are local maxima at least two bins
    apart, ranked by height; fewer than three peaks are padded with zero
    frequencies and zero profiles.
    """
    if variant not in ('B1', 'B2'):
        raise ConfigurationError(f'unknown Bjorklund variant {variant!r}')
    mcs = mean_cadence_spectrum(c)
    peaks, _ = find_peaks(mcs.values, distance=2)
    peaks = peaks[peaks > 0]
    order = np.argsort(-mcs.values[peaks], kind='stable')
    chosen = peaks[order][:3]

    frequencies = np.zeros(3)
    profiles = np.zeros((3, PROFILE_SAMPLES))
    for slot, index in enumerate(chosen):
        frequencies[slot] = c.cadence_axis[index]
        profiles[slot] = _resample(c.values[:, index])
    missing = [f'f{slot + 1}' for slot in range(chosen.size, 3)]

    try:
        v0 = estimate_base_velocity(mds, radar or RadarConfig(), smoothing_hz)
    except FeatureError:
        v0 = 0.0
        missing.append('v0')
    return BaselineFeaturesB(frequencies, profiles, v0, variant, tuple(missing))


def baseline_ricci(c: CVDImage, f_mD: float, variant: str = 'R1', delta: int = 5,
                   gamma: float = 0.05) -> BaselineFeaturesR:
    """
    Doppler extent of the CVD around the repetition frequency.

    The ``delta`` cadence columns centred on ``f_mD`` are averaged and scaled
    to a unit maximum; the nearest and farthest Doppler rows above ``gamma``
    bound the micro-Doppler extent.
    """
    if variant not in ('R1', 'R2'):
        raise ConfigurationError(f'unknown Ricci variant {variant!r}')
    axis = c.cadence_axis
    if not axis[0] <= f_mD <= axis[-1]:
        raise FeatureError(f'f_mD {f_mD} Hz outside the cadence range')
    centre = int(np.argmin(np.abs(axis - f_mD)))
    low = max(0, centre - delta // 2)
    high = min(axis.size, low + delta)
    profile = c.values[:, low:high].mean(axis=1)
    peak = profile.max()
    profile = profile / peak if peak > 0 else np.zeros_like(profile)
    above = np.flatnonzero(profile > gamma)
    if above.size == 0:
        return BaselineFeaturesR(f_mD, 0.0, 0.0, profile, variant, ('fD_min', 'fD_max'))
    return BaselineFeaturesR(
        f_mD, float(c.doppler_axis[above[0]]), float(c.doppler_axis[above[-1]]), profile, variant,
    )
