import numpy as np
from django.test import SimpleTestCase

from gait.cvd import (
    CVDImage, CadenceGrid, RepresentationKind, cadence_transform, check_shape, cvd, ft_filtered_time,
    highpass_baseband, mean_cadence_spectrum, mean_doppler_spectrum, preprocess_cvd, spectrogram_image,
)
from gait.exceptions import CVDError, ConfigurationError
from gait.sim import RadarConfig

from .helpers import GRID_FRAMES, GRID_RATE, TOWARD_ROWS, make_spectrogram, tone


def random_cvd(seed=0, doppler_axis=TOWARD_ROWS):
    values = np.random.default_rng(seed).random((101, 129))
    return CVDImage(values / values.max(), CadenceGrid().axis, doppler_axis)


class CadenceGridTests(SimpleTestCase):

    def test_default_grid(self):
        grid = CadenceGrid()
        self.assertEqual(grid.axis.size, 129)
        self.assertAlmostEqual(grid.max_cadence, 5.12)

    def test_rejects_degenerate_grid(self):
        with self.assertRaises(ConfigurationError):
            CadenceGrid(resolution=0.0)


class CadenceTransformTests(SimpleTestCase):

    def test_single_tone(self):
        t = np.arange(GRID_FRAMES) / GRID_RATE
        spectrum = cadence_transform(np.cos(2 * np.pi * 0.9 * t), GRID_RATE)
        self.assertAlmostEqual(CadenceGrid().axis[np.argmax(spectrum)], 0.9, delta=0.04)

    def test_rejects_low_rate(self):
        with self.assertRaises(CVDError):
            cadence_transform(np.zeros(64), 8.0)


class CVDTests(SimpleTestCase):

    def test_requires_noise_reduction(self):
        spec = make_spectrogram(np.ones((GRID_FRAMES, 414)), noise_reduced=False)
        with self.assertRaises(CVDError):
            cvd(spec, 'toward')

    def test_time_constant_spectrogram(self):
        image = cvd(make_spectrogram(np.ones((GRID_FRAMES, 414))), 'toward')
        self.assertEqual(image.values.shape, (101, 129))
        self.assertFalse(image.values.any())

    def test_modulated_bin(self):
        t = np.arange(GRID_FRAMES) / GRID_RATE
        values = np.ones((GRID_FRAMES, 414))
        # 25 Hz is the 21st non-negative bin, so it lands in row 5
        values[:, 30] += 0.5 * (1 + np.cos(2 * np.pi * 0.9 * t))
        image = cvd(make_spectrogram(values), 'toward')
        row, column = np.unravel_index(np.argmax(image.values), image.values.shape)
        self.assertEqual(row, 5)
        self.assertAlmostEqual(image.cadence_axis[column], 0.9, delta=0.04)
        self.assertEqual(image.values.max(), 1.0)

    def test_invariant_to_circular_time_shift(self):
        values = np.random.default_rng(3).random((GRID_FRAMES, 414))
        original = cvd(make_spectrogram(values), 'toward')
        shifted = cvd(make_spectrogram(np.roll(values, 37, axis=0)), 'toward')
        np.testing.assert_allclose(shifted.values, original.values, rtol=1e-9, atol=1e-12)

    def test_doppler_axis_is_binned(self):
        image = cvd(make_spectrogram(np.random.default_rng(5).random((GRID_FRAMES, 414))), 'toward')
        np.testing.assert_allclose(image.doppler_axis[:2], [1.875, 6.875])

    def test_too_few_bins(self):
        spec = make_spectrogram(np.ones((GRID_FRAMES, 110)), np.arange(-10, 100) * 1.25)
        with self.assertRaises(CVDError):
            cvd(spec, 'toward')

    def test_rejects_negative_entries(self):
        with self.assertRaises(CVDError):
            CVDImage(-np.ones((2, 3)), np.arange(3), np.arange(2))


class MeanSpectrumTests(SimpleTestCase):
    grid = CadenceGrid()

    def test_all_zero(self):
        image = CVDImage(np.zeros((101, 129)), self.grid.axis, TOWARD_ROWS)
        self.assertFalse(mean_cadence_spectrum(image).values.any())
        self.assertFalse(mean_doppler_spectrum(image).values.any())

    def test_single_row(self):
        values = np.zeros((101, 129))
        row = np.random.default_rng(0).random(129)
        values[7] = row
        mcs = mean_cadence_spectrum(CVDImage(values, self.grid.axis, TOWARD_ROWS))
        np.testing.assert_allclose(mcs.values, row / 101)

    def test_single_column(self):
        values = np.zeros((101, 129))
        column = np.random.default_rng(1).random(101)
        values[:, 40] = column
        mds = mean_doppler_spectrum(CVDImage(values, self.grid.axis, TOWARD_ROWS))
        np.testing.assert_allclose(mds.values, column / 129)
        np.testing.assert_array_equal(mds.doppler_axis, TOWARD_ROWS)

    def test_dominant_cadence_skips_dc(self):
        values = np.zeros((101, 129))
        values[:, 0] = 5.0
        values[:, 20] = 1.0
        mcs = mean_cadence_spectrum(CVDImage(values, self.grid.axis, TOWARD_ROWS))
        self.assertAlmostEqual(mcs.dominant_cadence(), 0.8)

    def test_mean_spectra_are_linear(self):
        rng = np.random.default_rng(5)
        first, second = rng.random((2, 101, 129))
        combined = CVDImage(2.0 * first + 0.5 * second, self.grid.axis, TOWARD_ROWS)
        parts = [CVDImage(v, self.grid.axis, TOWARD_ROWS) for v in (first, second)]
        np.testing.assert_allclose(
            mean_cadence_spectrum(combined).values,
            2.0 * mean_cadence_spectrum(parts[0]).values + 0.5 * mean_cadence_spectrum(parts[1]).values,
            rtol=1e-13,
        )
        np.testing.assert_allclose(
            mean_doppler_spectrum(combined).values,
            2.0 * mean_doppler_spectrum(parts[0]).values + 0.5 * mean_doppler_spectrum(parts[1]).values,
            rtol=1e-13,
        )


class PreprocessTests(SimpleTestCase):

    def test_unit_warp_is_identity(self):
        image = random_cvd()
        warped = preprocess_cvd(image, 1.0, 500.0)
        self.assertTrue(warped.preprocessed)
        self.assertEqual(warped.values.shape, (101, 129))
        self.assertLess(np.abs(warped.values - image.values).max(), 1e-6)

    def test_away_half_plane_uses_magnitudes(self):
        image = random_cvd(1, -TOWARD_ROWS)
        warped = preprocess_cvd(image, 1.0, -500.0)
        self.assertLess(np.abs(warped.values - image.values).max(), 1e-6)

    def test_repetition_frequency_moves_to_one_hertz(self):
        values = np.zeros((101, 129))
        values[:, 50] = 1.0
        image = CVDImage(values, CadenceGrid().axis, TOWARD_ROWS)
        warped = preprocess_cvd(image, 2.0, 500.0)
        self.assertEqual(int(np.argmax(warped.values.sum(axis=0))), 25)

    def test_rejects_invalid_factors(self):
        image = random_cvd()
        for f_mD, f_Dmax in ((0.0, 300.0), (1.0, 0.0), (1.0, np.nan)):
            with self.subTest(f_mD=f_mD, f_Dmax=f_Dmax):
                with self.assertRaises(CVDError):
                    preprocess_cvd(image, f_mD, f_Dmax)


class FilteredTimeTests(SimpleTestCase):

    def test_highpass_removes_torso_line(self):
        radar = RadarConfig()
        low = highpass_baseband(tone(160.0).samples, 320.0, radar.sampling_frequency)
        high = highpass_baseband(tone(600.0).samples, 320.0, radar.sampling_frequency)
        middle = slice(2560, 12800)
        self.assertLess(np.sqrt(np.mean(np.abs(low[middle]) ** 2)), 0.05)
        self.assertGreater(np.sqrt(np.mean(np.abs(high[middle]) ** 2)), 0.95)

    def test_cutoff_above_nyquist(self):
        with self.assertRaises(CVDError):
            highpass_baseband(np.zeros(100, dtype=complex), 1500.0, 2560.0)

    def test_output_length(self):
        rec = tone(600.0)
        spectrum = ft_filtered_time(rec, 1.0)
        self.assertEqual(spectrum.values.shape, (129,))

    def test_rejects_non_positive_velocity(self):
        with self.assertRaises(CVDError):
            ft_filtered_time(tone(600.0), 0.0)


class SpectrogramImageTests(SimpleTestCase):

    def test_long_recording_is_cropped(self):
        spec = make_spectrogram(np.random.default_rng(0).random((800, 414)))
        image = spectrogram_image(spec, 'toward')
        self.assertEqual(image.shape, (101, 192))
        self.assertEqual(image.max(), 1.0)

    def test_short_recording_is_zero_padded(self):
        spec = make_spectrogram(np.random.default_rng(0).random((100, 414)) + 0.1)
        image = spectrogram_image(spec, 'toward')
        self.assertTrue(image[:, :25].all())
        self.assertFalse(image[:, 25:].any())

    def test_too_few_frames(self):
        with self.assertRaises(CVDError):
            spectrogram_image(make_spectrogram(np.ones((3, 414))), 'toward')


class RepresentationKindTests(SimpleTestCase):

    def test_shapes(self):
        self.assertEqual(RepresentationKind.SPECTROGRAM.shape, (101, 192))
        self.assertEqual(RepresentationKind.CVD_PRE.shape, (101, 129))
        self.assertEqual(RepresentationKind.FT_FILTERED_TIME.shape, (1, 129))

    def test_parse(self):
        self.assertIs(RepresentationKind.parse('cvd-pre'), RepresentationKind.CVD_PRE)
        with self.assertRaises(ConfigurationError):
            RepresentationKind.parse('hologram')

    def test_check_shape(self):
        self.assertEqual(check_shape('MCS', np.zeros(129)).shape, (1, 129))
        with self.assertRaises(CVDError):
            check_shape('CVD', np.zeros((101, 128)))
