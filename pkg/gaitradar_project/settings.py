"""
Django settings for gaitradar_project project.

Generated by 'django-admin startproject' using Django 6.0.

For more information on this file, see
https://docs.djangoproject.com/en/6.0/topics/settings/

For the full list of settings and their values, see
https://docs.djangoproject.com/en/6.0/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get(
    'DJANGO_SECRET_KEY',
    'django-insecure-gaitradar-local-only-7d2f0c9e1b4a48f6a3c5e8d1f0b2a4c6',
)

DEBUG = os.environ.get('DJANGO_DEBUG', '0') == '1'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'gait',
]


# Database
# https://docs.djangoproject.com/en/6.0/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization
# https://docs.djangoproject.com/en/6.0/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

# Generated artifacts (reports, figures) land here unless a command says otherwise
MEDIA_ROOT = BASE_DIR / 'media'

# Default primary key field type
# https://docs.djangoproject.com/en/6.0/ref/settings/#default-auto-field
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'gait': {
            'handlers': ['console'],
            'level': os.environ.get('MDOP_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}


# Micro-Doppler pipeline defaults. A run config document overrides any of
# these per section (lower-case keys), see gait.config.
MDOP = {
    'RADAR': {
        'carrier_frequency': 24e9,
        'propagation_speed': 2.998e8,
        'sampling_frequency': 2560.0,
        'duration': 6.0,
        'aspect_angle': 0.0,
        'max_doppler': 500.0,
    },
    'STFT': {
        'window': 'hamming',
        'window_length': None,  # round(0.1 * fs)
        # hop 20 yields exactly the hop-1 frames sub-sampled by 20
        'hop': 20,
        'fft_size': 2048,
    },
    'DENOISE': {
        'quantile': 0.6,
        'margin_db': 6.0,
    },
    'ENVELOPE': {
        'energy_fraction': 0.95,
    },
    'ENERGY': {
        'torso_margin_hz': 25.0,
    },
    'CADENCE': {
        'resolution': 0.04,
        'n_bins': 129,
    },
    'REPRESENTATION': {
        'doppler_rows': 101,
        'doppler_binning': 4,
        'time_subsample': 1,
        'time_binning': 4,
        'time_columns': 192,
    },
    'FEATURES': {
        'q_max': 5,
        'soh_refine_hz': 0.05,
        'fdmax_mode': 'samples',
        'v0_smoothing_hz': 11.0,
        'ricci_delta': 5,
        'ricci_gamma': 0.05,
    },
    'PCA': {
        'n_components': 22,
        'center': True,
        'representation': 'CVD_PRE',
    },
    'KNN': {
        'kappa': 1,
        'standardize': False,
    },
    'CV': {
        'scheme': 'kfold',
        'folds': 10,
        'seed': 0,
        'direction': 'pooled',
        # leave-one-subject-out runs use these unless a run config sets them
        'loso_defaults': {'n_components': 10, 'kappa': 24},
    },
    'SIMULATION': {
        'subjects': 10,
        'runs_per_class': 20,
        'seed': 7,
        'noise_snr': 10.0,
    },
    'ACCEPTANCE': {
        'min_accuracy': None,
        'max_fnr': None,
    },
    'THREADS': int(os.environ.get('MDOP_THREADS', os.cpu_count() or 1)),
    'USE_CELERY': os.environ.get('MDOP_USE_CELERY', '0') == '1',
}


# Celery Configuration (Optional)
CELERY_BROKER_URL = os.environ.get('CELERY_BROKER_URL', 'redis://localhost:6379/0')
CELERY_RESULT_BACKEND = os.environ.get('CELERY_RESULT_BACKEND', 'redis://localhost:6379/0')
CELERY_ACCEPT_CONTENT = ['json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = 'UTC'
