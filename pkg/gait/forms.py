"""
Forms for the gait radar application
"""
import json
from typing import Any, Dict, Tuple

from django import forms
from django.core.exceptions import ValidationError

from .config import RunConfig, build_run_config
from .exceptions import ConfigurationError


class RunConfigForm(forms.Form):
    """Validates a run-config JSON document against the pipeline preconditions"""

    config = forms.CharField(
        required=False,
        widget=forms.Textarea(attrs={'rows': 8}),
        help_text='JSON object whose sections override settings.MDOP, e.g. {"knn": {"kappa": 3}}',
    )

    def clean_config(self):
        """Parse the JSON document"""
        text = self.cleaned_data.get('config')
        if not text:
            return {}
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f'Invalid JSON: {exc.msg} (line {exc.lineno}).')
        if not isinstance(document, dict):
            raise ValidationError('Run config must be a JSON object.')
        return document

    def clean(self):
        cleaned = super().clean()
        if 'config' not in cleaned:
            return cleaned
        try:
            run_config = build_run_config(cleaned['config'])
        except ConfigurationError as exc:
            raise ValidationError(str(exc))
        for problem in self._cross_checks(run_config):
            self.add_error(None, problem)
        cleaned['run_config'] = run_config
        return cleaned

    @staticmethod
    def _cross_checks(run_config: RunConfig):
        radar = run_config.radar
        pipeline = run_config.pipeline
        experiment = run_config.experiment
        stft = pipeline.stft
        try:
            stft.resolve_window_length(radar.sampling_frequency)
        except ConfigurationError as exc:
            yield f'STFT: {exc}.'
        frame_rate = radar.sampling_frequency / stft.hop
        if frame_rate < 2 * pipeline.cadence.max_cadence:
            yield (f'Frame rate {frame_rate:g} Hz cannot resolve cadences up to '
                   f'{pipeline.cadence.max_cadence:g} Hz; lower the STFT hop.')
        if pipeline.doppler_rows * pipeline.doppler_binning > stft.fft_size // 2:
            yield 'doppler_rows x doppler_binning exceeds the bins of one half-plane.'
        image_size = experiment.representation.shape[0] * experiment.representation.shape[1]
        if experiment.n_components > image_size:
            yield f'n_components exceeds the {image_size} values of a {experiment.representation.value} image.'
        if experiment.min_accuracy is not None and not 0 <= experiment.min_accuracy <= 1:
            yield 'min_accuracy must be a fraction in [0, 1].'
        if experiment.max_fnr is not None and not 0 <= experiment.max_fnr <= 1:
            yield 'max_fnr must be a fraction in [0, 1].'


def validate_run_config(text: str) -> Tuple[RunConfig, Dict[str, Any]]:
    """
    Validate a run-config JSON string.

    Returns:
        The resolved configuration and the parsed document

    Raises:
        ValidationError: with every problem found
    """
    form = RunConfigForm(data={'config': text or ''})
    if not form.is_valid():
        raise ValidationError([message for messages in form.errors.values() for message in messages])
    return form.cleaned_data['run_config'], form.cleaned_data['config']
