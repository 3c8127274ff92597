"""
Django settings for the popmc project.

popmc is driven entirely through management commands (``python manage.py
popmcmc ...`` or ``python -m popmc popmcmc ...``); there is no web surface.
Settings here configure the run ledger database, logging and the
``MONTECARLO`` engine defaults.

For the full list of Django settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

from pathlib import Path
import os

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Django refuses to start without a secret key; nothing here is signed.
SECRET_KEY = os.getenv('SECRET_KEY', 'popmc-insecure-3v#n0t-used-for-signing')

DEBUG = os.getenv('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'rest_framework',
    'montecarlo',
]

MIDDLEWARE = []


# Database
# The run ledger (montecarlo.ExperimentRun) lives in a local sqlite file.

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.getenv('POPMC_DB_PATH', str(BASE_DIR / 'db.sqlite3')),
    }
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Logging

LOG_LEVEL = os.getenv('POPMC_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'montecarlo': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}


# Monte Carlo engine defaults. Experiment-specific defaults (chain counts,
# particle counts, model parameters) live on the serializers in
# montecarlo/serializers.py; these are the knobs shared by every experiment.

MONTECARLO = {
    'SEED': int(os.getenv('POPMC_SEED', '12345')),
    'WORKERS': int(os.getenv('POPMC_WORKERS', '1')),
    'PRECISION': os.getenv('POPMC_PRECISION', 'double'),  # single | double
    'GENERATOR': os.getenv('POPMC_GENERATOR', 'mrg32k3a'),  # mrg32k3a | xorshift
    'BLOCK_LENGTH': 2 ** 40,  # draws reserved per substream
    'OUT_DIR': os.getenv('POPMC_OUT_DIR', str(BASE_DIR / 'runs')),
    'RECORD_RUNS': os.getenv('POPMC_RECORD_RUNS', 'True') == 'True',
    'KDE_MAX_POINTS': 20000,
}
