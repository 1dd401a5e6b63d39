# app/routers/ground.py

import logging

import click

from app.config import settings
from app.dependencies.options import (
    CommandError,
    chain_options,
    coupling_option,
    emit,
    resolve_config,
    run_options,
)
from app.errors import LabError
from app.models.schemas import GroundConfig
from app.services.ising import make_parameters
from app.services.solver import energy_gap, ground_state
from app.services.storage import build_document, save_state

logger = logging.getLogger(__name__)

AMPLITUDE_PRINT_LIMIT = 14


@click.command("ground")
@run_options
@chain_options
@coupling_option
@click.option("--amplitudes/--no-amplitudes", default=None, help="Include the ground-state vector in the output.")
@click.option("--save-state", type=str, default=None, help="Write the ground state to this file ('n=' header, 're im' lines).")
def command(config_path, **flags):
    """Ground-state energy, gap and residual of the chain at one coupling."""
    try:
        config = resolve_config(GroundConfig, config_path, flags)
        params = make_parameters(config.n, config.g, config.eps)

        # 1. Solve
        result = ground_state(params, solver=config.solver, tol=config.tol, max_iter=config.max_iter, seed=config.seed)
        gap = result.gap if result.gap is not None else energy_gap(params)

        payload = {
            "n": params.n,
            "g": params.g,
            "epsilon": params.epsilon,
            "energy": result.energy,
            "gap": gap,
            "residual": result.residual,
            "solver": result.solver,
            "iterations": result.iterations,
            "near_degenerate": gap < settings.degeneracy_threshold,
        }
        if payload["near_degenerate"]:
            logger.warning("Gap %.3e is below the degeneracy threshold; the returned state is the Z2-even one", gap)

        # 2. Optional amplitudes
        if config.amplitudes:
            if params.n > AMPLITUDE_PRINT_LIMIT:
                logger.warning("Printing %d amplitudes for n=%d", params.dim, params.n)
            amplitudes = result.state.amplitudes
            payload["amplitudes"] = [[float(a.real), float(a.imag)] for a in amplitudes]

        # 3. Optional state file
        if config.save_state:
            payload["state_file"] = str(save_state(result.state, config.save_state))

        emit(build_document("ground", config, payload), config.out)

    except LabError as e:
        raise CommandError(e)
