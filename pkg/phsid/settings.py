"""
Django settings for the phsid project.

phsid has no database and no web surface; Django provides the settings
layer, logging configuration, management commands and the test runner.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.0/ref/settings/
"""

import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent
FIXTURES_DIR = BASE_DIR / "fixtures"

SECRET_KEY = os.environ.get("SECRET_KEY", "django-insecure-phsid-local")

DEBUG = os.environ.get("DEBUG", False)


# Application definition

INSTALLED_APPS = [
    "phsid.core",
    "phsid.sensitivity",
    "phsid.calibration",
    "phsid.data",
    "phsid.cli",
]

DATABASES: dict = {}

USE_TZ = True


# Identification runs

# Fallback seed for `generate` when --seed is not given.
PHSID_SEED = os.environ.get("PHSID_SEED") or None

# Thread pool size for per-direction sensitivity solves (1 = serial).
PHSID_WORKERS = int(os.environ.get("PHSID_WORKERS", 1))


# Logging
# https://docs.djangoproject.com/en/5.0/topics/logging/

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "{levelname} {name}: {message}", "style": "{"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "loggers": {
        "phsid": {
            "handlers": ["console"],
            "level": os.environ.get("PHSID_LOG_LEVEL", "WARNING"),
            "propagate": False,
        },
    },
}


_sentry = os.environ.get("SENTRY_DSN")
if _sentry:
    import sentry_sdk

    sentry_sdk.init(
        dsn=_sentry,
        traces_sample_rate=0.2,
    )
