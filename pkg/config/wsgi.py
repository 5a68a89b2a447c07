"""
WSGI config for the ras_lab run ledger.

It exposes the module-level variable ``application`` used by Django's
``runserver`` and by any WSGI server serving the ledger admin.
"""
import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings.production")

application = get_wsgi_application()
