"""
Management command to synthesize a labeled gait dataset
"""
import os
from collections import Counter
from dataclasses import asdict

from django.core.management.base import CommandError

from ...exceptions import ConfigurationError
from ...models import SimulatedDataset
from ...sim import iter_dataset_profiles
from ...storage import ManifestEntry, write_json, write_manifest
from ...tasks import profile_arguments, run_batch, synthesize_recording
from ..base import RUNTIME_ERROR, VALIDATION_ERROR, GaitCommand


class Command(GaitCommand):
    help = 'Synthesize IQ recordings of the five gait classes and write a manifest'

    def add_arguments(self, parser):
        parser.add_argument('--output', required=True, help='Dataset directory')
        parser.add_argument('--subjects', type=int, help='Number of subjects')
        parser.add_argument('--runs', type=int, help='Runs per class and subject')
        parser.add_argument('--seed', type=int, help='Dataset seed')
        parser.add_argument('--snr', type=float, help='Noise level in dB')
        parser.add_argument('--noiseless', action='store_true', help='Do not add receiver noise')
        parser.add_argument('--name', help='Dataset name (defaults to the directory name)')
        parser.add_argument('--workers', type=int, help='Worker threads (defaults to MDOP_THREADS)')
        self.add_config_argument(parser)

    def handle(self, *args, **options):
        run_config, _ = self.load_run_config(options)
        simulation = run_config.simulation
        subjects = options['subjects'] or simulation.subjects
        runs = options['runs'] or simulation.runs_per_class
        seed = simulation.seed if options['seed'] is None else options['seed']
        snr = None if options['noiseless'] else (simulation.noise_snr if options['snr'] is None else options['snr'])
        root = os.path.abspath(options['output'])
        try:
            os.makedirs(root, exist_ok=True)
        except OSError as exc:
            raise CommandError(f'Cannot create {root}: {exc}', returncode=RUNTIME_ERROR)
        if not os.access(root, os.W_OK):
            raise CommandError(f'Output directory {root} is not writable', returncode=RUNTIME_ERROR)

        self.stdout.write(f'Synthesizing {subjects} subjects x 5 classes x {runs} runs (seed {seed})...')
        try:
            profiles = list(iter_dataset_profiles(subjects, runs, seed, snr))
        except ConfigurationError as exc:
            raise CommandError(str(exc), returncode=VALIDATION_ERROR)

        entries, arguments = [], []
        runs_seen = Counter()
        radar = asdict(run_config.radar)
        for subject_id, profile in profiles:
            run = runs_seen[(subject_id, profile.gait_class)]
            runs_seen[(subject_id, profile.gait_class)] += 1
            filename = f'{subject_id}_{profile.gait_class.name}_{run:02d}.iq'
            entries.append(ManifestEntry(filename, subject_id, profile.gait_class, profile.direction))
            arguments.append((profile_arguments(profile), radar, subject_id, os.path.join(root, filename)))

        with self.runtime_errors():
            run_batch(synthesize_recording, arguments, options['workers'])
            manifest_path = write_manifest(entries, os.path.join(root, 'manifest.csv'))
            write_json(os.path.join(root, 'dataset.json'), {
                'seed': seed, 'subjects': subjects, 'runs_per_class': runs, 'noise_snr': snr,
                'recordings': len(entries), 'config_hash': run_config.hash,
            })

        SimulatedDataset.objects.create(
            name=options['name'] or os.path.basename(root),
            root=root,
            manifest_path=manifest_path,
            seed=seed,
            subjects=subjects,
            runs_per_class=runs,
            recording_count=len(entries),
            noise_snr=snr,
            config_hash=run_config.hash,
        )
        counts = Counter(entry.gait_class.value for entry in entries)
        for gait_class, count in counts.items():
            self.stdout.write(f'  {gait_class}: {count}')
        self.stdout.write(self.style.SUCCESS(f'Wrote {len(entries)} recordings and {manifest_path}'))
