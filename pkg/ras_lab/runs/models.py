"""Run ledger models."""
from django.db import models
from django.utils.translation import gettext_lazy as _
from model_utils.models import TimeStampedModel


class SolveRun(TimeStampedModel):
    """One invocation of a ``ras`` subcommand."""

    class Status(models.TextChoices):
        RUNNING = ("running", _("running"))
        SUCCEEDED = ("succeeded", _("succeeded"))
        FAILED = ("failed", _("failed"))

    subcommand = models.CharField(verbose_name=_("subcommand"), max_length=32)
    benchmark = models.CharField(verbose_name=_("benchmark"), max_length=32)
    config_hash = models.CharField(verbose_name=_("config hash"), max_length=64, db_index=True)
    seed = models.BigIntegerField(verbose_name=_("master seed"))
    output_dir = models.CharField(verbose_name=_("output directory"), max_length=1024)
    status = models.CharField(
        verbose_name=_("status"), max_length=16, choices=Status.choices, default=Status.RUNNING
    )
    summary = models.JSONField(verbose_name=_("summary"), default=dict, blank=True)
    error = models.JSONField(verbose_name=_("error"), null=True, blank=True)
    wall_time = models.FloatField(verbose_name=_("wall time (s)"), null=True, blank=True)

    class Meta:
        ordering = ["-created"]

    def finish(self, summary: dict, wall_time: float):
        self.status = SolveRun.Status.SUCCEEDED
        self.summary = summary
        self.wall_time = wall_time
        self.save(update_fields=["status", "summary", "wall_time", "modified"])

    def fail(self, error: dict, wall_time: float):
        self.status = SolveRun.Status.FAILED
        self.error = error
        self.wall_time = wall_time
        self.save(update_fields=["status", "error", "wall_time", "modified"])

    def __str__(self):
        """Custom string representation."""
        return f"{self.subcommand} - {self.benchmark} - {self.config_hash[:12]} ({self.status})"
