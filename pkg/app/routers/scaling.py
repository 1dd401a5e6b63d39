# app/routers/scaling.py

import logging

import click

from app.dependencies.options import CommandError, emit, grid_options, resolve_config, run_options
from app.errors import LabError
from app.models.schemas import ScalingConfig
from app.services.analysis import make_grid, scaling_study, sigma_rel
from app.services.fitting import fit_scaling
from app.services.storage import build_document, scaling_frame, write_csv

logger = logging.getLogger(__name__)


@click.command("scaling")
@run_options
@grid_options
@click.option("--n-list", type=str, default=None, help="Chain lengths, e.g. 7-11 or 7,9,11.")
@click.option("--eps", type=float, default=None, help="Longitudinal field strength.")
def command(config_path, **flags):
    """Sweep maxima for several chain lengths, their finite-size fits and sigma_rel."""
    try:
        config = resolve_config(ScalingConfig, config_path, flags)

        # 1. One sweep per n
        points, _ = scaling_study(
            config.n_list,
            config.eps,
            make_grid(config.g_min, config.g_max, config.g_step),
            refine=config.refine,
            solver=config.solver,
            threads=config.threads,
            tol=config.tol,
            max_iter=config.max_iter,
            seed=config.seed,
        )

        # 2. Fits; a failing model is reported, the rest still run
        fits = fit_scaling(points)
        results = {outcome.target: outcome.result for outcome in fits}
        report = sigma_rel(points, mu_fit=results.get("mu_max"), sigma_fit=results.get("sigma_at_mu_max"))

        payload = {
            "points": [point.model_dump(mode="json") for point in points],
            "ordering_holds": all(point.ordering_holds for point in points),
            "fits": [outcome.model_dump(mode="json") for outcome in fits],
            "sigma_rel": report.model_dump(mode="json"),
        }
        logger.info(
            "sigma_rel over n=%s is %s; exponent of the fitted composite %s", report.ns, report.trend, report.exponent
        )

        if config.out:
            payload["points_file"] = str(write_csv(scaling_frame(points), config.out))
        emit(build_document("scaling", config, payload), config.out)

    except LabError as e:
        raise CommandError(e)
