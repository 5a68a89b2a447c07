"""``manage.py ras <subcommand>``: the reach-avoid-stay pipeline."""
import json

from django.core.management.base import BaseCommand, CommandError

from ras_lab.runs.cli import add_arguments, load_config, run_subcommand
from ras_lab.utils.exceptions import RasLabError


class Command(BaseCommand):
    help = "Solve, train, simulate, evaluate and render one reach-avoid-stay run configuration."

    def add_arguments(self, parser):
        add_arguments(parser)

    def handle(self, *args, **options):
        try:
            outcome = run_subcommand(
                options["subcommand"],
                load_config(options["config"]),
                threads=options["threads"],
                output_dir=options["output_dir"],
            )
        except RasLabError as error:
            raise CommandError(json.dumps(error.as_dict(), sort_keys=True, default=str), returncode=error.exit_code)
        self.stdout.write(self.style.SUCCESS(outcome.line))
