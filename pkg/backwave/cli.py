from pathlib import Path
from typing import Sequence
import logging

import click

from backwave import subcommands
from backwave.config import load_config
from backwave.errors import BackwaveError

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def run_subcommand(
    name: str,
    config_path: str = None,
    out: str = None,
    overrides: Sequence[str] = (),
    verify: bool = False,
    seed: int = None,
) -> int:
    """
    Load the configuration, run one subcommand and return the process exit code.

    Errors are reported as `error[<category>]: <message>` on stderr; nothing is written
    when the configuration cannot be loaded.
    """
    try:
        cfg = load_config(config_path, overrides)
        out_dir = Path(out) if out else Path(cfg.output.directory)
        written = subcommands.run(name, cfg, out_dir, verify=verify, seed=seed)
    except BackwaveError as e:
        click.echo(f"error[{e.category}]: {e}", err=True)
        return e.exit_code

    for path in written:
        click.echo(str(path))

    return 0


SUBCOMMAND_OPTIONS = [
    click.option(
        "--config",
        "-c",
        "config_path",
        default=None,
        type=click.Path(),
        help="Path to the source configuration file (default: shipped scenario).",
    ),
    click.option(
        "--out",
        "-o",
        default=None,
        type=click.Path(),
        help="Output directory (default: output.directory of the config).",
    ),
    click.option(
        "--verify",
        is_flag=True,
        default=False,
        help="Run the numerical oracles and property checks; exit 4 on a tolerance breach.",
    ),
    click.option(
        "--seed",
        default=None,
        type=int,
        help="Seed of the pair-event generator (overrides events.seed).",
    ),
    click.option(
        "--override",
        "overrides",
        multiple=True,
        help="Override a config value as section.key=value (repeatable).",
    ),
]


def subcommand_options(func):
    """
    Shared flags of every subcommand.
    """
    for option in reversed(SUBCOMMAND_OPTIONS):
        func = option(func)

    return func


def _dispatch(name: str, config_path: str, out: str, verify: bool, seed: int, overrides: Sequence[str]) -> None:
    code = run_subcommand(name, config_path, out, overrides, verify, seed)
    if code:
        click.get_current_context().exit(code)


@click.group()
@click.option(
    "--log-level",
    default="WARNING",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"]),
    help="Logging verbosity on stderr.",
)
def cli(log_level: str) -> None:
    logging.basicConfig(level=log_level, format=LOG_FORMAT)
    logging.captureWarnings(True)


@cli.command()
@subcommand_options
def dispersion(config_path: str, out: str, verify: bool, seed: int, overrides: Sequence[str]) -> None:
    """
    Refractive and group indices of the pump, signal and idler polarizations.
    """
    _dispatch("dispersion", config_path, out, verify, seed, overrides)


@cli.command()
@subcommand_options
def design(config_path: str, out: str, verify: bool, seed: int, overrides: Sequence[str]) -> None:
    """
    Quasi-phase-matching poling periods for degenerate emission.
    """
    _dispatch("design", config_path, out, verify, seed, overrides)


@cli.command()
@subcommand_options
def freespace(config_path: str, out: str, verify: bool, seed: int, overrides: Sequence[str]) -> None:
    """
    Non-resonant backward and forward gain spectra with the adjacent cavity mode pairs.
    """
    _dispatch("freespace", config_path, out, verify, seed, overrides)


@cli.command()
@subcommand_options
def cavity(config_path: str, out: str, verify: bool, seed: int, overrides: Sequence[str]) -> None:
    """
    Mode spacings, decay rates, cluster spacing and the single-mode condition.
    """
    _dispatch("cavity", config_path, out, verify, seed, overrides)


@cli.command()
@subcommand_options
def biphoton(config_path: str, out: str, verify: bool, seed: int, overrides: Sequence[str]) -> None:
    """
    Spectrum, linewidth, pair rate and brightness of the resonant source.
    """
    _dispatch("biphoton", config_path, out, verify, seed, overrides)


@cli.command()
@subcommand_options
def g2(config_path: str, out: str, verify: bool, seed: int, overrides: Sequence[str]) -> None:
    """
    Second-order correlation function and correlation time.
    """
    _dispatch("g2", config_path, out, verify, seed, overrides)


@cli.command()
@subcommand_options
def events(config_path: str, out: str, verify: bool, seed: int, overrides: Sequence[str]) -> None:
    """
    Simulated detection time stamps and their coincidence histogram.
    """
    _dispatch("events", config_path, out, verify, seed, overrides)


@cli.command()
@subcommand_options
def report(config_path: str, out: str, verify: bool, seed: int, overrides: Sequence[str]) -> None:
    """
    Full scalar table with the spectrum, correlation and gain overlay plots.
    """
    _dispatch("report", config_path, out, verify, seed, overrides)


@cli.command(hidden=True)
@subcommand_options
def oracle(config_path: str, out: str, verify: bool, seed: int, overrides: Sequence[str]) -> None:
    """
    Seeded cavity sweep and convergence trace for debugging the closed-form transfer functions.
    """
    _dispatch("oracle", config_path, out, verify, seed, overrides)
