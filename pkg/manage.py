#!/usr/bin/env python
"""Django entry point: ``python manage.py ras <subcommand>``, ``migrate``, ``runscript``."""
import os
import sys


def main():
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings.local")
    try:
        from django.core.management import execute_from_command_line
    except ImportError:
        try:
            import django  # noqa
        except ImportError:
            raise ImportError(
                "Couldn't import Django. Install requirements/local.txt in the active virtual environment."
            )
        raise
    execute_from_command_line(sys.argv)


if __name__ == "__main__":
    main()
