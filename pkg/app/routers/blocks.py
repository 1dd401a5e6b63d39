# app/routers/blocks.py

import logging

import click
import pandas as pd

from app.dependencies.options import (
    CommandError,
    chain_options,
    coupling_option,
    emit,
    resolve_config,
    run_options,
)
from app.errors import LabError
from app.models.schemas import BlocksConfig
from app.services.analysis import block_entropy_profile
from app.services.storage import build_document, write_csv

logger = logging.getLogger(__name__)


@click.command("blocks")
@run_options
@chain_options
@coupling_option
@click.option("--max-len", type=int, default=None, help="Longest block (default n//2).")
def command(config_path, **flags):
    """Von Neumann entropy of contiguous blocks against block length, position-averaged and central."""
    try:
        config = resolve_config(BlocksConfig, config_path, flags)
        profile = block_entropy_profile(
            config.n,
            config.g,
            epsilon=config.eps,
            max_len=config.max_len,
            solver=config.solver,
            tol=config.tol,
            max_iter=config.max_iter,
            seed=config.seed,
        )
        if profile.slope is not None:
            logger.info(
                "n=%d g=%g: S(l) slope against log2(l) = %.4f (central blocks %.4f)",
                profile.n,
                profile.g,
                profile.slope,
                profile.central_slope,
            )

        if config.out:
            write_csv(pd.DataFrame([point.model_dump() for point in profile.points]), config.out)
        emit(build_document("blocks", config, profile), config.out)
    except LabError as e:
        raise CommandError(e)
