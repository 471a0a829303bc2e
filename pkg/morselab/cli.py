"""
Command-line interface for morselab.

Usage:
    morselab flow --config flow.yaml --out runs/flow
    morselab critical --config torus.yaml
    morselab connections --config torus.yaml --workers 4
    morselab loja --config x4.yaml --seed 7
    morselab verify --config verify.yaml --out runs/verify
    morselab report runs/
    morselab fields list --json

Exit codes: 0 when every verdict passes, 1 when any fails, 2 for
configuration or input errors.

Requires the 'cli' extra:
    pip install morselab[cli]
"""

import functools
import json
import os
import sys
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

load_dotenv()
try:
    import click
    CLICK_AVAILABLE = True
except ImportError:
    CLICK_AVAILABLE = False
    click = None  # type: ignore


def _check_click():
    """Exit with a hint if click is not installed."""
    if not CLICK_AVAILABLE:
        print("Error: The 'click' package is required for CLI commands.")
        print("Install with: pip install morselab[cli]")
        sys.exit(1)


if CLICK_AVAILABLE:
    from .exceptions import ConfigurationError, InputError, MorselabError
    from .fields import FieldRegistry
    from .log_utils import configure_logging
    from .runner import (
        DEFAULT_OUTPUT_DIR,
        OUTPUT_DIR_ENV_VAR,
        ExitCode,
        load_config,
        regenerate_summaries,
        run_command,
    )


@click.group()
@click.version_option(package_name="morselab")
@click.option("--verbose", "-v", is_flag=True, help="Log progress at INFO level")
def cli(verbose: bool):
    """morselab - gradient flows, Morse theory and Lojasiewicz exponents.

    Every run writes run_report.json and summary.md into its output
    directory next to the CSV, JSON and SVG artifacts.
    """
    if verbose:
        configure_logging(level="INFO", force=True)


def _experiment_command(name: str):
    """Shared options and error handling of the config-driven subcommands."""

    def decorate(func):
        @cli.command(name)
        @click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False),
                      help="Experiment config (YAML)")
        @click.option("--out", "out_dir", type=click.Path(file_okay=False),
                      help="Output directory (default: config, then $MORSELAB_OUTPUT_DIR, then ./morselab-out)")
        @click.option("--workers", type=click.IntRange(min=1), help="Threads for independent trajectories")
        @click.option("--seed", type=int, help="Random seed, overrides the config")
        @functools.wraps(func)
        def command(config_path: str, out_dir: Optional[str], workers: Optional[int], seed: Optional[int]):
            try:
                cfg = load_config(config_path, {"workers": workers, "seed": seed})
                out = cfg.resolve_output_dir(out_dir)
                report = run_command(name, cfg, out)
            except (ConfigurationError, InputError) as e:
                click.echo(f"Error: {config_path}: {e}", err=True)
                sys.exit(ExitCode.INVALID)
            except MorselabError as e:
                click.echo(f"Error: {e}", err=True)
                sys.exit(ExitCode.FAILED)

            failed = sum(not v.passed for v in report.verdicts)
            status = click.style("PASS", fg="green") if report.passed else click.style("FAIL", fg="red")
            click.echo(f"{status} {len(report.verdicts)} verdicts, {failed} failed -> {out}")
            sys.exit(report.exit_code)

        return command

    return decorate


@_experiment_command("flow")
def flow_command():
    """Integrate the gradient flow from every configured start."""


@_experiment_command("critical")
def critical_command():
    """Sweep a box for critical points and classify them."""


@_experiment_command("connections")
def connections_command():
    """Trace unstable branches and build the connection graph."""


@_experiment_command("loja")
def loja_command():
    """Run the selected Lojasiewicz analyses on the configured starts."""


@_experiment_command("verify")
def verify_command():
    """Run the acceptance suite over the built-in catalog."""


@cli.command("report")
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              help="Output directory to scan (default: $MORSELAB_OUTPUT_DIR, then ./morselab-out)")
def report_command(out_dir: Optional[str]):
    """Regenerate summary.md for every run_report.json below the output directory."""
    directory = Path(out_dir or os.environ.get(OUTPUT_DIR_ENV_VAR) or DEFAULT_OUTPUT_DIR)
    try:
        written = regenerate_summaries(directory) if directory.is_dir() else []
    except ValueError as e:
        click.echo(f"Error: unreadable run report: {e}", err=True)
        sys.exit(ExitCode.INVALID)
    if not written:
        click.echo(f"No run_report.json found below {directory}", err=True)
        sys.exit(ExitCode.INVALID)
    for path in written:
        click.echo(str(path))


@cli.group()
def fields():
    """Catalog field commands."""
    pass


@fields.command("list")
@click.option("--json", "as_json", is_flag=True, help="Output as JSON")
def list_fields(as_json: bool):
    """List catalog fields with their parameters.

    Examples:

        morselab fields list

        morselab fields list --json
    """
    FieldRegistry.discover()
    rows = []
    for name in FieldRegistry.list_names():
        field_cls = FieldRegistry.get(name)
        if field_cls is None:
            continue
        doc = (field_cls.__doc__ or "").strip().splitlines()
        rows.append({
            "name": name,
            "params": sorted(field_cls.Params.model_fields),
            "summary": doc[0] if doc else "",
        })

    if as_json:
        click.echo(json.dumps(rows, indent=2))
        return
    if not rows:
        click.echo("No catalog fields registered.")
        return
    for row in rows:
        params = ", ".join(row["params"]) or "-"
        name = click.style(row["name"].ljust(20), bold=True)
        click.echo(f"  {name} params: {params}")
        if row["summary"]:
            click.echo(f"      {row['summary']}")


def main():
    """Entry point for the CLI."""
    _check_click()
    cli()


if __name__ == "__main__":
    main()
