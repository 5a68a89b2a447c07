"""Whole cart2d pipeline, for ``manage.py runscript reproduce_cart_study``.

The run configuration path comes from ``RAS_CONFIG``; benchmark defaults
apply when it is unset.
"""
import logging

import environ

from ras_lab.runs.cli import load_config, run_subcommand

logger = logging.getLogger(__name__)

STEPS = ("solve-h", "build-hg", "solve-v", "solve-ra", "simulate", "evaluate", "render", "export")


def run():
    config = load_config(environ.Env().str("RAS_CONFIG", default="") or None)
    for subcommand in STEPS:
        outcome = run_subcommand(subcommand, config)
        logger.info(outcome.line)
        print(outcome.line)
