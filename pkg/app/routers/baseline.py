# app/routers/baseline.py

import click
import pandas as pd

from app.dependencies.options import CommandError, bins_option, emit, resolve_config, run_options
from app.errors import LabError
from app.models.schemas import BaselineConfig
from app.services.analysis import random_baseline
from app.services.storage import build_document, write_csv


@click.command("baseline")
@run_options
@bins_option
@click.option("--n", type=int, default=None, help="Number of sites.")
@click.option("--samples", type=int, default=None, help="Number of Haar-random states.")
def command(config_path, **flags):
    """mu and sigma over balanced cuts for seeded Haar-random states."""
    try:
        config = resolve_config(BaselineConfig, config_path, flags)
        summary = random_baseline(config.n, config.samples, seed=config.seed, bins=config.bins)

        # pooled histogram of every sampled participation number
        if config.out:
            write_csv(pd.DataFrame([b.model_dump() for b in summary.pooled.histogram]), config.out)
        emit(build_document("baseline", config, summary), config.out)
    except LabError as e:
        raise CommandError(e)
