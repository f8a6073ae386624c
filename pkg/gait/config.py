"""
Typed pipeline configuration built from ``settings.MDOP`` and an optional
run-config document.
"""
import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Mapping, Optional

from django.conf import settings

from .cvd import CadenceGrid, RepresentationKind
from .dsp import StftConfig
from .exceptions import ConfigurationError
from .sim import RadarConfig

FDMAX_MODES = ('samples', 'peaks')
CV_SCHEMES = ('kfold', 'loso')
DIRECTION_MODES = ('pooled', 'toward', 'away')
SECTIONS = (
    'radar', 'stft', 'denoise', 'envelope', 'energy', 'cadence', 'representation',
    'features', 'pca', 'knn', 'cv', 'simulation', 'acceptance',
)


@dataclass(frozen=True)
class PipelineConfig:
    stft: StftConfig = field(default_factory=lambda: StftConfig(hop=20))
    denoise_quantile: float = 0.6
    denoise_margin_db: float = 6.0
    energy_fraction: float = 0.95
    torso_margin_hz: float = 25.0
    cadence: CadenceGrid = field(default_factory=CadenceGrid)
    doppler_rows: int = 101
    doppler_binning: int = 4
    time_subsample: int = 1
    time_binning: int = 4
    time_columns: int = 192
    q_max: int = 5
    soh_refine_hz: float = 0.05
    fdmax_mode: str = 'samples'
    v0_smoothing_hz: float = 11.0
    ricci_delta: int = 5
    ricci_gamma: float = 0.05

    def __post_init__(self):
        if self.fdmax_mode not in FDMAX_MODES:
            raise ConfigurationError(f'fdmax_mode must be one of {FDMAX_MODES}')
        if not 1 <= self.q_max <= 10:
            raise ConfigurationError('q_max must lie in [1, 10]')
        if min(self.doppler_rows, self.doppler_binning, self.time_subsample,
               self.time_binning, self.time_columns, self.ricci_delta) < 1:
            raise ConfigurationError('representation sizes must be positive')


@dataclass(frozen=True)
class ExperimentConfig:
    n_components: int = 22
    center: bool = True
    representation: RepresentationKind = RepresentationKind.CVD_PRE
    kappa: int = 1
    standardize: bool = False
    scheme: str = 'kfold'
    folds: int = 10
    seed: int = 0
    direction: str = 'pooled'
    min_accuracy: Optional[float] = None
    max_fnr: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'representation', RepresentationKind.parse(self.representation))
        if self.scheme not in CV_SCHEMES:
            raise ConfigurationError(f'cv scheme must be one of {CV_SCHEMES}')
        if self.direction not in DIRECTION_MODES:
            raise ConfigurationError(f'direction must be one of {DIRECTION_MODES}')
        if self.kappa < 1 or self.n_components < 1 or self.folds < 2:
            raise ConfigurationError('kappa and n_components must be >= 1, folds >= 2')


@dataclass(frozen=True)
class SimulationConfig:
    subjects: int = 10
    runs_per_class: int = 20
    seed: int = 7
    noise_snr: Optional[float] = 10.0


@dataclass(frozen=True)
class RunConfig:
    radar: RadarConfig = field(default_factory=RadarConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)

    def as_dict(self) -> Dict[str, Any]:
        return json.loads(json.dumps(asdict(self), default=str))

    @property
    def hash(self) -> str:
        return config_hash(self)


def _merged(document: Mapping[str, Any], section: str) -> Dict[str, Any]:
    defaults = {key.lower(): value for key, value in settings.MDOP.get(section.upper(), {}).items()}
    overrides = document.get(section) or {}
    if not isinstance(overrides, Mapping):
        raise ConfigurationError(f'section {section!r} must be an object')
    unknown = set(overrides) - set(defaults)
    if unknown:
        raise ConfigurationError(f'unknown keys in {section!r}: {", ".join(sorted(unknown))}')
    return {**defaults, **overrides}


def build_run_config(document: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """
    Resolve a run-config document against the project defaults.

    Leave-one-subject-out runs default to 10 components and 24 neighbours
    unless the document sets them.

    Raises:
        ConfigurationError: unknown section or key, or a value out of range
    """
    document = dict(document or {})
    unknown = set(document) - set(SECTIONS)
    if unknown:
        raise ConfigurationError(f'unknown run-config sections: {", ".join(sorted(unknown))}')

    try:
        radar = RadarConfig(**_merged(document, 'radar'))
        stft = StftConfig(**_merged(document, 'stft'))
        cadence = CadenceGrid(**_merged(document, 'cadence'))
        denoise = _merged(document, 'denoise')
        representation = _merged(document, 'representation')
        features = _merged(document, 'features')
        pipeline = PipelineConfig(
            stft=stft,
            denoise_quantile=denoise['quantile'],
            denoise_margin_db=denoise['margin_db'],
            energy_fraction=_merged(document, 'envelope')['energy_fraction'],
            torso_margin_hz=_merged(document, 'energy')['torso_margin_hz'],
            cadence=cadence,
            doppler_rows=representation['doppler_rows'],
            doppler_binning=representation['doppler_binning'],
            time_subsample=representation['time_subsample'],
            time_binning=representation['time_binning'],
            time_columns=representation['time_columns'],
            **features,
        )
        pca = _merged(document, 'pca')
        knn = _merged(document, 'knn')
        cv = _merged(document, 'cv')
        loso_defaults = cv.pop('loso_defaults', {}) or {}
        if cv['scheme'] == 'loso':
            if 'n_components' not in (document.get('pca') or {}):
                pca['n_components'] = loso_defaults.get('n_components', pca['n_components'])
            if 'kappa' not in (document.get('knn') or {}):
                knn['kappa'] = loso_defaults.get('kappa', knn['kappa'])
        experiment = ExperimentConfig(**pca, **knn, **cv, **_merged(document, 'acceptance'))
        simulation = SimulationConfig(**_merged(document, 'simulation'))
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc
    return RunConfig(radar, pipeline, experiment, simulation)


def config_hash(run_config: RunConfig) -> str:
    """SHA-256 of the canonical JSON of a resolved configuration."""
    canonical = json.dumps(run_config.as_dict(), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def load_run_config_file(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    try:
        with open(path, encoding='utf-8') as handle:
            document = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f'cannot read run config {path}: {exc}') from exc
    if not isinstance(document, dict):
        raise ConfigurationError('run config must be a JSON object')
    return document
