"""Run ledger admin setup."""
from django.contrib import admin

from .models import SolveRun


@admin.register(SolveRun)
class SolveRunAdmin(admin.ModelAdmin):
    list_display = ["subcommand", "benchmark", "config_hash", "seed", "status", "wall_time", "created"]
    list_filter = ["subcommand", "benchmark", "status"]
    search_fields = ["config_hash"]
    readonly_fields = ["summary", "error"]
