import json

import pytest
from django.core.management import CommandError, call_command

from ras_lab.runs.cli import run_subcommand
from ras_lab.runs.models import SolveRun
from ras_lab.runs.tests.factories import RunConfigFactory, SolveRunFactory
from ras_lab.utils.exceptions import DependencyError

pytestmark = pytest.mark.django_db


def test_str():
    run = SolveRunFactory(config_hash="f" * 64)
    assert str(run) == f"solve-h - cart2d - {'f' * 12} (running)"


def test_finish_and_fail():
    run = SolveRunFactory()
    run.finish({"sweeps": 3}, wall_time=1.5)
    run.refresh_from_db()
    assert run.status == SolveRun.Status.SUCCEEDED
    assert run.summary == {"sweeps": 3}

    run.fail({"error": "non_convergence"}, wall_time=2.0)
    run.refresh_from_db()
    assert run.status == SolveRun.Status.FAILED
    assert run.error == {"error": "non_convergence"}


def test_failed_subcommands_are_recorded(settings, tmp_path):
    settings.RAS_RECORD_RUNS = True
    config = RunConfigFactory()
    with pytest.raises(DependencyError):
        run_subcommand("solve-v", config, output_dir=tmp_path)
    run = SolveRun.objects.get()
    assert run.status == SolveRun.Status.FAILED
    assert run.error["error"] == "missing_dependency"
    assert run.config_hash == config.config_hash
    assert run.wall_time is not None


def test_nothing_is_recorded_when_disabled(settings, tmp_path):
    settings.RAS_RECORD_RUNS = False
    with pytest.raises(DependencyError):
        run_subcommand("build-hg", RunConfigFactory(), output_dir=tmp_path)
    assert not SolveRun.objects.exists()


def test_command_reports_machine_readable_errors(tmp_path):
    with pytest.raises(CommandError) as excinfo:
        call_command("ras", "build-hg", "--output-dir", str(tmp_path))
    assert excinfo.value.returncode == 2
    assert json.loads(str(excinfo.value))["error"] == "missing_dependency"
