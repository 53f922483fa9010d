"""
Django settings for the uvortex project.

uvortex has no database, no URL routing and no templates: the project
package exists to configure the apps, the logging tree and the
simulation defaults used by the management commands.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

from pathlib import Path
import os

# Try to import decouple, fall back to os.environ if not available
try:
    from decouple import config
except ImportError:
    # Fallback: use os.environ.get with defaults
    def config(key, default=None, cast=None):
        value = os.environ.get(key, default)
        if cast and value is not None:
            if cast is bool and isinstance(value, str):
                return value.strip().lower() in ('1', 'true', 'yes', 'on')
            return cast(value)
        return value

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='uvortex-local-only-key')

DEBUG = config('DEBUG', default=True, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    # Project apps
    'wavefield',
    'masks',
    'propagation',
    'analysis',
    'pipeline',
]

DATABASES = {}

USE_I18N = False

USE_TZ = True

TIME_ZONE = 'UTC'


# Simulation defaults

OUTPUT_DIR = Path(config('UVORTEX_OUTPUT_DIR', default=str(BASE_DIR / 'output')))

DEMO_CONFIG_DIR = BASE_DIR / 'pipeline' / 'configs'

DEFAULT_GRID_SIZE = config('UVORTEX_GRID_SIZE', default=1024, cast=int)
DEFAULT_PIXEL_PITCH = config('UVORTEX_PIXEL_PITCH', default=10e-6, cast=float)  # meters
DEFAULT_WAVELENGTH = config('UVORTEX_WAVELENGTH', default=266e-9, cast=float)  # meters

OAM_AZIMUTH_SAMPLES = config('UVORTEX_AZIMUTH_SAMPLES', default=720, cast=int)
LOBE_PROMINENCE = config('UVORTEX_LOBE_PROMINENCE', default=0.3, cast=float)
FRINGE_THRESHOLD = config('UVORTEX_FRINGE_THRESHOLD', default=0.1, cast=float)

# Full-scale acceptance runs (2048^2 and 4096^2 grids) take minutes
RUN_SLOW_TESTS = config('RUN_SLOW_TESTS', default=False, cast=bool)


# Logging Configuration
LOG_DIR = BASE_DIR / 'logs'
os.makedirs(LOG_DIR, exist_ok=True)

LOG_LEVEL = config('LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'file': {
            'level': 'INFO',
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': os.path.join(LOG_DIR, 'uvortex.log'),
            'maxBytes': 1024 * 1024 * 10,  # 10MB
            'backupCount': 5,
            'formatter': 'verbose',
        },
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console', 'file'],
        'level': 'WARNING',
    },
    'loggers': {
        'django': {
            'handlers': ['console', 'file'],
            'level': 'INFO',
            'propagate': False,
        },
        **{
            app: {
                'handlers': ['console', 'file'],
                'level': LOG_LEVEL,
                'propagate': False,
            }
            for app in ('wavefield', 'masks', 'propagation', 'analysis', 'pipeline')
        },
    },
}
