from .base import *  # noqa
from .base import env

# GENERAL
# ------------------------------------------------------------------------------
# https://docs.djangoproject.com/en/dev/ref/settings/#debug
DEBUG = True
# https://docs.djangoproject.com/en/dev/ref/settings/#secret-key
SECRET_KEY = env(
    "DJANGO_SECRET_KEY",
    default="Lw8vQe2RkT5yZp0aNc7mXs3dHf9gJb1uVi4oYt6rEq2wKz8xCn5lMa0sPd7fGh3J",
)
# https://docs.djangoproject.com/en/dev/ref/settings/#allowed-hosts
ALLOWED_HOSTS = ["localhost", "0.0.0.0", "127.0.0.1"]

# LOGGING
# ------------------------------------------------------------------------------
LOGGING["loggers"]["ras_lab"]["level"] = env("RAS_LOG_LEVEL", default="DEBUG")  # noqa F405
