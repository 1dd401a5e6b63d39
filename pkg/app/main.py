import click

from app.config import configure_logging
from app.routers import baseline, blocks, dist, ground, scaling, sweep, verify


@click.group()
@click.version_option("1.0", prog_name="entlab")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False), default=None)
def cli(log_level):
    """Multipartite entanglement of the Ising chain ground state."""
    configure_logging(log_level.upper() if log_level else None)


cli.add_command(ground.command)
cli.add_command(dist.command)
cli.add_command(sweep.command)
cli.add_command(scaling.command)
cli.add_command(baseline.command)
cli.add_command(blocks.command)
cli.add_command(verify.command)


if __name__ == "__main__":
    cli()
