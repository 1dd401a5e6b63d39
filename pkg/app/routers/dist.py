# app/routers/dist.py

import logging

import click

from app.dependencies.options import (
    CommandError,
    bins_option,
    chain_options,
    coupling_option,
    emit,
    partitions_option,
    resolve_config,
    resolve_family,
    resolve_state,
    run_options,
)
from app.errors import LabError
from app.models.schemas import DistConfig
from app.services.analysis import contiguity_breakdown, distribution
from app.services.storage import build_document, records_frame, write_csv

logger = logging.getLogger(__name__)


@click.command("dist")
@run_options
@chain_options
@coupling_option
@partitions_option
@bins_option
@click.option("--state", type=str, default=None, help="ground | ghz | plus | haar | file:<path>")
@click.option("--state-file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--entropy/--no-entropy", default=None, help="Add the von Neumann entropy column.")
@click.option("--measure", type=click.Choice(["participation", "entropy", "linear"]), default=None)
def command(config_path, **flags):
    """Distribution of a bipartite measure over a partition family for one state."""
    try:
        config = resolve_config(DistConfig, config_path, flags)

        # 1. State and family
        state, result = resolve_state(config)
        family = resolve_family(config.partitions, state.n)

        # 2. Records and summary
        with_entropy = config.entropy or config.measure == "entropy"
        summary, records = distribution(
            state, family, bins=config.bins, with_entropy=with_entropy, measure=config.measure, threads=config.threads
        )
        logger.info("n=%d %s: mu=%.6f sigma=%.6f over %d cuts", state.n, family.label, summary.mu, summary.sigma, summary.count)

        payload = {
            "n": state.n,
            "family": family.label,
            "summary": summary.model_dump(mode="json"),
            "by_contiguity": {
                name: group.model_dump(mode="json") if group is not None else None
                for name, group in contiguity_breakdown(records, bins=config.bins, measure=config.measure).items()
            },
        }
        if result is not None:
            payload["energy"] = result.energy
            payload["residual"] = result.residual

        # 3. Artifacts
        if config.out:
            payload["records_file"] = str(write_csv(records_frame(records, with_entropy=with_entropy), config.out))
        emit(build_document("dist", config, payload), config.out)

    except LabError as e:
        raise CommandError(e)
