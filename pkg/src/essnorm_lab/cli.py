"""Command-line entry point: run, validate, and list experiment scenarios.

Exit codes: 0 success (all scenario assertions passed), 1 assertion
failure, 2 configuration error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .experiments import SCENARIOS, ConfigError, ExperimentConfig, emit, run_scenario


def _load_config(path: str) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError("<file>", f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError("<file>", f"{path} is not valid JSON: {e}") from e
    return ExperimentConfig.from_dict(raw)


@click.group()
def main():
    """Experiments on essential norms of multiplication operators."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="Scenario config (JSON).")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Output directory.")
def run(config_path: str, out_dir: str):
    """Run a scenario and write CSV + report into the output directory."""
    try:
        config = _load_config(config_path)
        result = run_scenario(config)
    except ConfigError as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(2)
    except ValueError as e:
        # scenario precondition violated by otherwise well-formed data
        click.echo(f"config error: {e}", err=True)
        sys.exit(2)
    try:
        paths = emit(result, out_dir, config)
    except RuntimeError as e:
        click.echo(str(e), err=True)
        sys.exit(1)
    for p in paths:
        click.echo(f"wrote {p}")
    for check in result.checks:
        status = "PASS" if check.passed else "FAIL"
        click.echo(f"{result.scenario}: {check.name}: {status}")
    sys.exit(0 if result.passed else 1)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="Scenario config (JSON).")
def validate(config_path: str):
    """Parse and validate a config without running it."""
    try:
        config = _load_config(config_path)
    except ConfigError as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(2)
    click.echo(f"OK: {config.scenario}")


@main.command("list-scenarios")
def list_scenarios():
    """Print the available scenario names."""
    for name in SCENARIOS:
        click.echo(name)


if __name__ == "__main__":
    main()
