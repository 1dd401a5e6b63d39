# app/dependencies/options.py

import logging
from typing import Any, Callable, Dict, Optional, Tuple, Type, TypeVar

import click
from dotenv import dotenv_values
from pydantic import BaseModel, ValidationError

from app.errors import ConfigError, ContractViolation, LabError
from app.models.schemas import (
    DistConfig,
    GroundStateResult,
    PartitionFamily,
    PureState,
    describe_validation_error,
)
from app.services.ising import make_parameters
from app.services.partitions import parse_partition_spec
from app.services.solver import ground_state
from app.services.state import ghz_state, haar_random_state, product_plus_state
from app.services.storage import dump_document, load_state, write_json

logger = logging.getLogger(__name__)

Config = TypeVar("Config", bound=BaseModel)


class CommandError(click.ClickException):
    """Carries a LabError to click with its exit code."""

    def __init__(self, error: LabError):
        super().__init__(error.detail)
        self.exit_code = error.exit_code


def _stack(*decorators: Callable) -> Callable:
    def apply(func: Callable) -> Callable:
        for decorator in reversed(decorators):
            func = decorator(func)
        return func

    return apply


# Every flag defaults to None so that config-file values are only overridden by flags actually given.
run_options = _stack(
    click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
                 help="Flat key=value file; flags override its values."),
    click.option("--seed", type=int, default=None, help="Seed for random states and Lanczos start vectors."),
    click.option("--threads", type=int, default=None, help="Worker count (default: ENTLAB_THREADS or CPU count)."),
    click.option("--out", type=str, default=None, help="Output stem; writes <stem>.csv / <stem>.json."),
    click.option("--solver", type=click.Choice(["auto", "dense", "lanczos"]), default=None),
    click.option("--tol", type=float, default=None, help="Lanczos residual tolerance."),
    click.option("--max-iter", type=int, default=None, help="Lanczos iteration cap."),
)

chain_options = _stack(
    click.option("--n", type=int, default=None, help="Number of sites."),
    click.option("--eps", type=float, default=None, help="Longitudinal field strength."),
)

coupling_option = click.option("--g", type=float, default=None, help="Coupling g in [0, 1].")

grid_options = _stack(
    click.option("--g-min", type=float, default=None),
    click.option("--g-max", type=float, default=None),
    click.option("--g-step", type=float, default=None),
    click.option("--refine/--no-refine", default=None, help="0.002-step pass around each coarse maximum."),
)

partitions_option = click.option(
    "--partitions", type=str, default=None, help="balanced | contiguous:<L> | size:<m> | file:<path>"
)

bins_option = click.option("--bins", type=int, default=None, help="Histogram bin count.")


def read_config_file(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    values = {}
    for key, raw in dotenv_values(path).items():
        if raw is not None:
            values[key.strip().replace("-", "_")] = raw
    return values


def resolve_config(model_cls: Type[Config], config_path: Optional[str], flags: Dict[str, Any]) -> Config:
    """Model defaults < config file < explicit flags; fails naming every offending field."""
    values = read_config_file(config_path)
    values.update({key: value for key, value in flags.items() if value is not None})
    try:
        return model_cls.model_validate(values)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {describe_validation_error(e)}") from e


def resolve_family(spec: str, n: int) -> PartitionFamily:
    try:
        return parse_partition_spec(spec, n)
    except ContractViolation as e:
        raise ConfigError(e.detail) from e


def resolve_state(config: DistConfig) -> Tuple[PureState, Optional[GroundStateResult]]:
    """The state a `dist` run analyses, and the ground-state result when one was computed."""
    source = config.state
    if config.state_file is not None:
        source = f"file:{config.state_file}"

    if source.startswith("file:"):
        state = load_state(source[len("file:"):])
        if config.n is not None and config.n != state.n:
            raise ConfigError(f"n={config.n} does not match the state file (n={state.n})")
        return state, None
    if source == "ghz":
        return ghz_state(config.n), None
    if source == "plus":
        return product_plus_state(config.n), None
    if source == "haar":
        return haar_random_state(config.n, config.seed), None

    result = ground_state(
        make_parameters(config.n, config.g, config.eps),
        solver=config.solver,
        tol=config.tol,
        max_iter=config.max_iter,
        seed=config.seed,
    )
    return result.state, result


def emit(document: Dict[str, Any], stem: Optional[str]) -> None:
    if write_json(document, stem) is None:
        click.echo(dump_document(document))
