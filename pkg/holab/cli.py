"""
Command-line front end.

    holab <command> [--scenario FILE | --builtin NAME] [--seed N] [--out DIR] [--tol-scale X]

Every check command writes ``report.json`` and ``report.txt`` to ``--out``
(default: the current directory) and exits 0 when all checks pass, 1 on a
failed check or numerical failure, 2 on a usage or scenario error (in which
case nothing is written).
"""

import logging
import sys
from typing import Callable, Optional

import click
import numpy as np

from holab.exceptions import ExpressionError, ScenarioError
from holab.scenario.catalog import builtin_names, builtin_scenario
from holab.scenario.report import Report, render_text, write_report
from holab.scenario.runner import COMMANDS, run_scenario
from holab.scenario.schema import Scenario, dumps_scenario, load_scenario

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

_HELP = {
    "bott": "Bott connection: Jacobi/closure residuals, flatness and linearity.",
    "differentiate": "Differentiate the Ad-representation (and holonomy) and compare with Bott.",
    "holonomy": "Holonomy by conjugation: linear parts, morphism law, slice independence.",
    "agree": "Bisection route against conjugation route on a 9-point grid.",
    "normality": "Ideal test against triviality of holonomy, with a witness.",
    "rightinv": "Right-invariance of holonomy and the transformation groupoid laws.",
    "foliation": "Transport along paths of a foliation: closed forms, variational, reversal.",
    "pairdemo": "Holonomy through the source fiber of the pair groupoid M x M.",
    "all": "Every command that applies to the scenario.",
}


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _resolve(scenario_path: Optional[str], builtin: Optional[str]) -> Scenario:
    if scenario_path and builtin:
        raise click.UsageError("--scenario and --builtin are mutually exclusive")
    if not scenario_path and not builtin:
        raise click.UsageError("one of --scenario or --builtin is required")
    if builtin:
        try:
            return builtin_scenario(builtin)
        except ValueError as exc:
            raise click.BadParameter(str(exc), param_hint="--builtin")
    return load_scenario(scenario_path)


_SCENARIO_OPTIONS = (
    click.option("--scenario", "scenario_path", type=click.Path(dir_okay=False), help="Scenario JSON file."),
    click.option("--builtin", help="Name of a built-in scenario (see `holab list`)."),
    click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Random seed (default 0)."),
    click.option("--out", "out_dir", type=click.Path(file_okay=False), default=".", help="Report directory."),
    click.option("--tol-scale", type=click.FloatRange(min=0, min_open=True), default=1.0,
                 help="Multiply every acceptance tolerance."),
    click.option("-v", "--verbose", count=True, help="-v for INFO, -vv for DEBUG logging on stderr."),
)


def scenario_options(fn: Callable) -> Callable:
    """Attach the options shared by every check command."""
    for option in reversed(_SCENARIO_OPTIONS):
        fn = option(fn)
    return fn


def _run(command: str, scenario_path, builtin, seed, out_dir, tol_scale, verbose) -> None:
    _configure_logging(verbose)
    scenario: Optional[Scenario] = None
    try:
        scenario = _resolve(scenario_path, builtin)
        report = run_scenario(scenario, command, seed=seed, tol_scale=tol_scale)
    except np.linalg.LinAlgError as exc:
        # LinAlgError is a ValueError, but it is a numerical failure, not bad input
        if scenario is None:
            raise
        report = Report(
            scenario=scenario.name,
            kind=scenario.kind,
            command=command,
            seed=seed if seed is not None else (scenario.seed or 0),
            tolerances={},
        )
        report.error(command, exc)
    except (ScenarioError, ExpressionError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    write_report(report, out_dir)
    click.echo(render_text(report), nl=False)
    sys.exit(EXIT_OK if report.passed else EXIT_FAILED)


@click.group()
@click.version_option(package_name="holab")
def cli():
    """Numerical lab for holonomy of wide Lie subalgebroids."""


def _make_command(name: str) -> click.Command:
    @scenario_options
    def command(**kwargs):
        _run(name, **kwargs)

    return cli.command(name=name, help=_HELP[name])(command)


for _name in COMMANDS:
    _make_command(_name)


@cli.command(name="list")
def list_builtins():
    """List the built-in scenarios."""
    for name in builtin_names():
        scenario = builtin_scenario(name)
        click.echo(f"{name:<20} {scenario.kind:<10} {scenario.description}")


@cli.command()
@click.argument("name")
def show(name: str):
    """Print a built-in scenario as JSON."""
    try:
        scenario = builtin_scenario(name)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="NAME")
    click.echo(dumps_scenario(scenario), nl=False)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
