"""
Builders shared by the gait test modules.
"""
import numpy as np

from gait.dsp import Spectrogram
from gait.sim import GaitClass, GaitProfile, IQRecording, RadarConfig

# cadence grid and frame rate for which the cadence transform is an exact DFT
GRID_RATE = 10.24
GRID_FRAMES = 256
# 404 non-negative bins: enough for 101 rows of 4 bins on the toward side
GRID_DOPPLER = np.arange(-10, 404) * 1.25


def torso_only(direction='toward', base_velocity=1.0, **kwargs):
    """A walker whose only scatterer is a torso at constant speed."""
    return GaitProfile(
        GaitClass.NW, base_velocity=base_velocity, direction=direction, torso_sway=0.0,
        foot_reflectivity=0.0, shin_reflectivity=0.0, **kwargs
    )


def tone(frequency, radar=None, amplitude=1.0):
    radar = radar or RadarConfig()
    return IQRecording(amplitude * np.exp(2j * np.pi * frequency * radar.time_axis), radar)


def make_spectrogram(values, doppler_axis=GRID_DOPPLER, frame_rate=GRID_RATE, noise_reduced=True):
    values = np.asarray(values, dtype=float)
    time_axis = np.arange(values.shape[0]) / frame_rate
    return Spectrogram(values, time_axis, doppler_axis, frame_rate, noise_reduced)


# binned Doppler centres of a toward CVD built from 1.25 Hz bins
TOWARD_ROWS = (np.arange(101) * 4 + 1.5) * 1.25

# 10-fold PCA result over 200 trials per class, rows NW, L1, L2, CW, CW/oos
PCA_CONFUSION = np.array([
    [187, 2, 1, 9, 1],
    [0, 191, 0, 9, 0],
    [3, 3, 186, 8, 0],
    [13, 8, 1, 177, 1],
    [1, 1, 0, 1, 197],
])
