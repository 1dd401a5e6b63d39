# app/routers/sweep.py

import click

from app.dependencies.options import (
    CommandError,
    chain_options,
    emit,
    grid_options,
    partitions_option,
    resolve_config,
    resolve_family,
    run_options,
)
from app.errors import LabError
from app.models.schemas import SweepConfig
from app.services.analysis import make_grid, sweep_g
from app.services.storage import build_document, sweep_frame, write_csv


@click.command("sweep")
@run_options
@chain_options
@grid_options
@partitions_option
@click.option("--measure", type=click.Choice(["participation", "entropy", "linear"]), default=None)
def command(config_path, **flags):
    """mu(g) and sigma(g) over a grid of couplings, with the location of both maxima."""
    try:
        config = resolve_config(SweepConfig, config_path, flags)
        resolve_family(config.partitions, config.n)

        sweep = sweep_g(
            config.n,
            config.eps,
            make_grid(config.g_min, config.g_max, config.g_step),
            family_kind=config.partitions,
            measure=config.measure,
            solver=config.solver,
            refine=config.refine,
            threads=config.threads,
            tol=config.tol,
            max_iter=config.max_iter,
            seed=config.seed,
        )

        payload = {
            "n": sweep.n,
            "epsilon": sweep.epsilon,
            "family": sweep.family,
            "maxima": {
                "g_mu_max": sweep.g_mu_max,
                "g_mu_max_uncertainty": sweep.g_mu_max_uncertainty,
                "mu_max": sweep.mu_max,
                "g_sigma_max": sweep.g_sigma_max,
                "g_sigma_max_uncertainty": sweep.g_sigma_max_uncertainty,
                "sigma_max": sweep.sigma_max,
                "sigma_at_mu_max": sweep.sigma_at_mu_max,
            },
            "points": len(sweep.points),
        }
        if config.out:
            payload["curve_file"] = str(write_csv(sweep_frame(sweep), config.out))
        else:
            payload["curve"] = [point.model_dump(include={"g", "mu", "sigma"}) for point in sweep.points]
        emit(build_document("sweep", config, payload), config.out)

    except LabError as e:
        raise CommandError(e)
