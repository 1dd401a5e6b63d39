# app/routers/verify.py

import click

from app.dependencies.options import CommandError, emit, resolve_config, run_options
from app.errors import LabError, VerificationError
from app.models.schemas import VerifyConfig
from app.services.storage import build_document
from app.services.verification import run_verification


@click.command("verify")
@run_options
@click.option("--cases", type=int, default=None, help="Random (state, cut) pairs per oracle check.")
@click.option("--max-n", type=int, default=None, help="Largest n drawn for the oracle checks.")
@click.option("--inject-corruption/--no-inject-corruption", default=None, help="Add an unnormalized vector to confirm failures are caught.")
def command(config_path, **flags):
    """Runs the oracle checks; exits 4 when any of them fails."""
    try:
        config = resolve_config(VerifyConfig, config_path, flags)
        report = run_verification(config)
        emit(build_document("verify", config, report), config.out)

        if not report.passed:
            failed = ", ".join(check.name for check in report.checks if not check.passed)
            raise VerificationError(f"verification failed: {failed}")
    except LabError as e:
        raise CommandError(e)
