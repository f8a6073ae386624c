"""
Shared plumbing of the gait management commands: run-config loading,
manifest loading and the exit-code contract (1 validation, 2 runtime).
"""
from contextlib import contextmanager
from typing import Any, Dict, Tuple

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from ..config import RunConfig
from ..exceptions import ConfigurationError, GaitRadarError
from ..forms import validate_run_config
from ..storage import Manifest, load_manifest

VALIDATION_ERROR = 1
RUNTIME_ERROR = 2


class GaitCommand(BaseCommand):

    def add_config_argument(self, parser):
        parser.add_argument('--config', help='Run-config JSON file overriding settings.MDOP')

    def load_run_config(self, options) -> Tuple[RunConfig, Dict[str, Any]]:
        """Validated run config and the raw document it came from."""
        path = options.get('config')
        text = ''
        if path:
            try:
                with open(path, encoding='utf-8') as handle:
                    text = handle.read()
            except OSError as exc:
                raise CommandError(f'Cannot read run config {path}: {exc}', returncode=VALIDATION_ERROR)
        try:
            return validate_run_config(text)
        except ValidationError as exc:
            raise CommandError(f'Invalid run config: {"; ".join(exc.messages)}', returncode=VALIDATION_ERROR)

    def load_manifest(self, path: str) -> Manifest:
        try:
            manifest = load_manifest(path)
        except ConfigurationError as exc:
            raise CommandError(str(exc), returncode=VALIDATION_ERROR)
        if not len(manifest):
            raise CommandError(f'Manifest {path} lists no recordings', returncode=VALIDATION_ERROR)
        return manifest

    @contextmanager
    def runtime_errors(self):
        """Translate pipeline, I/O and parse failures into exit code 2."""
        try:
            yield
        except CommandError:
            raise
        except (GaitRadarError, OSError, ValueError) as exc:
            raise CommandError(str(exc), returncode=RUNTIME_ERROR) from exc
