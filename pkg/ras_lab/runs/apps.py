from django.apps import AppConfig
from django.utils.translation import gettext_lazy as _


class RunsConfig(AppConfig):
    name = "ras_lab.runs"
    verbose_name = _("Solver runs")
    default_auto_field = "django.db.models.AutoField"
