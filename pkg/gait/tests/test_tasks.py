import json
import os
import time
from dataclasses import asdict
from tempfile import TemporaryDirectory
from unittest import mock

import numpy as np
from celery import shared_task
from django.conf import settings
from django.test import SimpleTestCase, override_settings

from gait import subspace
from gait.sim import GaitClass, GaitProfile, RadarConfig
from gait.storage import read_iq
from gait.tasks import load_model, profile_arguments, run_batch, synthesize_recording


@shared_task
def scaled(value, factor=2):
    return value * factor


class RunBatchTests(SimpleTestCase):

    def test_results_keep_argument_order(self):
        self.assertEqual(run_batch(scaled, [(n,) for n in range(20)], workers=4), [2 * n for n in range(20)])

    def test_single_worker(self):
        self.assertEqual(run_batch(scaled, [(1, 3), (2, 3)], workers=1), [3, 6])

    def test_empty_batch(self):
        self.assertEqual(run_batch(scaled, []), [])

    def test_first_failure_propagates(self):
        with self.assertRaises(TypeError):
            run_batch(scaled, [(1,), (None,)], workers=2)

    def test_celery_dispatch(self):
        mdop = {**settings.MDOP, 'USE_CELERY': True}
        with override_settings(MDOP=mdop), mock.patch('gait.tasks.group') as group:
            group.return_value.apply_async.return_value.get.return_value = [2, 4]
            self.assertEqual(run_batch(scaled, [(1,), (2,)]), [2, 4])
        signatures = list(group.call_args[0][0])
        self.assertEqual([sig.args for sig in signatures], [(1,), (2,)])


class SynthesisTaskTests(SimpleTestCase):

    def test_profile_arguments_are_json_ready(self):
        profile = GaitProfile(GaitClass.CWOOS, direction='away', noise_snr=10.0, rng_seed=5)
        document = json.loads(json.dumps(profile_arguments(profile)))
        self.assertEqual(document['gait_class'], 'CW/oos')
        self.assertEqual(GaitProfile(**document), profile)

    def test_synthesize_recording(self):
        profile = GaitProfile(GaitClass.L1, rng_seed=2)
        with TemporaryDirectory() as root:
            path = os.path.join(root, 'l1.iq')
            self.assertEqual(synthesize_recording(profile_arguments(profile), asdict(RadarConfig()), 'S04', path), path)
            rec = read_iq(path)
        self.assertIs(rec.label, GaitClass.L1)
        self.assertEqual(rec.samples.size, RadarConfig().n_samples)


class ModelCacheTests(SimpleTestCase):

    def test_reloads_only_when_the_file_changes(self):
        rng = np.random.default_rng(0)
        images = [rng.random(10) for _ in range(5)]
        with TemporaryDirectory() as root:
            path = os.path.join(root, 'model.mdpc')
            subspace.save(subspace.fit(images, 2), path)
            first = load_model(path)
            self.assertIs(load_model(path), first)
            subspace.save(subspace.fit(images, 3), path)
            later = time.time() + 10
            os.utime(path, (later, later))
            reloaded = load_model(path)
        self.assertIsNot(reloaded, first)
        self.assertEqual(reloaded.n_components, 3)
