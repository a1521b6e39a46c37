"""
Django settings for the coalitions project.

Only the pieces the analysis commands need are configured: the apps, logging
and the caps/tolerances every enumeration reads. Values can be overridden
from the environment or a .env file through python-decouple.
"""

from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='coalitions-local-analysis-only')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
    'core',
    'games',
    'equilibria',
    'smoothness',
    'dynamics',
    'cli',
]

# Analyses are computed on the fly; nothing is stored.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

REST_FRAMEWORK = {
    'COERCE_DECIMAL_TO_STRING': False,
    'STRICT_JSON': True,
}

LOG_LEVEL = config('LOG_LEVEL', default='WARNING')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'plain',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': LOG_LEVEL,
    },
}

# Enumeration caps
PROFILE_CAP = config('PROFILE_CAP', default=10_000_000, cast=int)
PERMUTATION_CAP = config('PERMUTATION_CAP', default=8, cast=int)
PERMUTATION_SAMPLES = config('PERMUTATION_SAMPLES', default=2000, cast=int)
CHAIN_STATE_CAP = config('CHAIN_STATE_CAP', default=20_000, cast=int)
PAYOFF_CACHE_SIZE = config('PAYOFF_CACHE_SIZE', default=65536, cast=int)

# Stationary distributions
DENSE_SOLVE_LIMIT = config('DENSE_SOLVE_LIMIT', default=2000, cast=int)
POWER_ITERATION_TOL = config('POWER_ITERATION_TOL', default=1e-12, cast=float)
POWER_ITERATION_MAX_STEPS = config('POWER_ITERATION_MAX_STEPS', default=1_000_000, cast=int)

# Tolerances
IMPROVEMENT_TOL = config('IMPROVEMENT_TOL', default=1e-9, cast=float)
SINK_BOUND_TOL = config('SINK_BOUND_TOL', default=1e-6, cast=float)
