"""
Main entry point for extension verification
Command-line interface for running the verification suites, computing single
operator norms and printing counterexample diagnostics.
"""

import json
import sys
from typing import Any, Dict, Optional

import click
import numpy as np
import pandas as pd
import yaml
from dotenv import load_dotenv

from src.errors import ConfigError, ValidationError
from src.extension.banach_limits import c0_counterexample, l1_counterexample
from src.operators.matrix_operator import MatrixOperator
from src.operators.norm_engine import m_norm, operator_norm
from src.spaces.function_space import FunctionSpace
from src.spaces.measure import counting_measure, make_measure_space
from src.verification.engine import (
    EXIT_CONFIG_ERROR, REPORT_FORMATS, VerificationConfig, VerificationEngine, config_from_dict,
    dumps_report, load_config,
)
from src.verification.suites import SUITE_NAMES

SCENARIO_KEYS = ("weights", "blocks", "coarser", "Y", "exponents", "trials", "seed")


def _fail_config(error: Exception):
    click.echo(f"Configuration error: {error}", err=True)
    sys.exit(EXIT_CONFIG_ERROR)


def _apply_overrides(config: VerificationConfig, seed: Optional[int], trials: Optional[int],
                     out: Optional[str], fmt: Optional[str], workers: Optional[int],
                     progress: Optional[bool]) -> VerificationConfig:
    if seed is not None:
        config.seed = seed
    if trials is not None:
        if trials < 1:
            raise ConfigError("--trials", "must be at least 1")
        config.trials = trials
        # the flag also wins over per-suite trial counts
        for options in config.suites.values():
            if "trials" in options:
                options["trials"] = None
    if out is not None:
        config.out = out
    if fmt is not None:
        config.format = fmt
    if workers is not None:
        config.workers = workers
    if progress is not None:
        config.progress = progress
    return config


def _run(config: VerificationConfig, names):
    """Run suites, print or export the report, exit with the engine's code"""
    try:
        engine = VerificationEngine(config)
        report = engine.run(names)
    except ConfigError as error:
        _fail_config(error)
        return

    if config.out:
        engine.export_results(config.out, config.format)
        click.echo("\n=== VERIFICATION RESULTS ===")
        for row in report["checks"]:
            status = "PASS" if row["pass"] else "FAIL"
            click.echo(f"{status} {row['suite']}.{row['check']}: "
                       f"max residual {row['max_residual']:.3e} (bound {row['bound']:.0e}, "
                       f"{row['instances']} instances)")
    else:
        click.echo(dumps_report(report))
    sys.exit(engine.exit_code)


def _output_options(command):
    command = click.option("--out", default=None, help="Write the report to this file")(command)
    command = click.option("--format", "fmt", type=click.Choice(REPORT_FORMATS), default=None,
                           help="Report format")(command)
    command = click.option("--trials", type=int, default=None, help="Randomized trials per suite, overriding every configured count")(command)
    command = click.option("--seed", type=int, default=None, help="Master seed")(command)
    return command


@click.group()
def cli():
    """Banach space-valued extension verification"""
    load_dotenv()


@cli.command()
@click.argument("suite", type=click.Choice(("all",) + SUITE_NAMES), default="all")
@click.option("--config", "config_path", default=None, help="Configuration file path (YAML or JSON)")
@click.option("--workers", type=int, default=None, help="Threads used for randomized trials")
@click.option("--progress/--no-progress", default=None, help="Show progress bars")
@_output_options
def verify(suite, config_path, workers, progress, seed, trials, out, fmt):
    """Run one suite or all of them"""
    try:
        config = _apply_overrides(load_config(config_path), seed, trials, out, fmt, workers, progress)
    except ConfigError as error:
        _fail_config(error)
        return
    _run(config, None if suite == "all" else [suite])


@cli.command()
@click.option("--config", "scenario_path", required=True, help="Scenario file (YAML or JSON)")
@_output_options
def condexp(scenario_path, seed, trials, out, fmt):
    """Audit conditional expectation on a scenario"""
    try:
        with open(scenario_path, "r") as f:
            scenario = yaml.safe_load(f) or {}
        if not isinstance(scenario, dict):
            raise ConfigError("scenario", "expected a mapping")
        unknown = [key for key in scenario if key not in SCENARIO_KEYS]
        if unknown:
            raise ConfigError(str(unknown[0]), "unknown scenario key")
        options = {key: scenario[key] for key in ("weights", "blocks", "coarser", "Y", "exponents")
                   if key in scenario}
        verification: Dict[str, Any] = {}
        for key in ("seed", "trials"):
            if key in scenario:
                verification[key] = scenario[key]
        config = config_from_dict({"verification": verification, "suites": {"condexp": options}})
        config = _apply_overrides(config, seed, trials, out, fmt, None, None)
    except FileNotFoundError:
        _fail_config(ConfigError("config", f"file {scenario_path} not found"))
        return
    except yaml.YAMLError as error:
        _fail_config(ConfigError("config", f"cannot parse {scenario_path}: {error}"))
        return
    except ConfigError as error:
        _fail_config(error)
        return
    _run(config, ["condexp"])


def _space(weights: Optional[str], n: int, p: str) -> FunctionSpace:
    measure = counting_measure(n) if weights is None else make_measure_space(json.loads(weights))
    return FunctionSpace(measure, p)


@cli.command()
@click.option("--matrix", required=True, help="Operator matrix as JSON, target rows x source columns")
@click.option("--source-p", default="2", help="Source exponent (number or inf)")
@click.option("--target-p", default="2", help="Target exponent (number or inf)")
@click.option("--source-weights", default=None, help="Source atom weights as JSON")
@click.option("--target-weights", default=None, help="Target atom weights as JSON")
@click.option("--method", type=click.Choice(("auto", "ascent")), default="auto")
@click.option("--seed", type=int, default=0)
def norms(matrix, source_p, target_p, source_weights, target_weights, method, seed):
    """Operator norm and M-norm of one matrix"""
    try:
        values = np.asarray(json.loads(matrix), dtype=float)
        if values.ndim != 2:
            raise ValidationError("matrix must be a nested list of rows")
        T = MatrixOperator(values, _space(source_weights, values.shape[1], source_p),
                           _space(target_weights, values.shape[0], target_p))
        estimate = operator_norm(T, method=method, seed=seed)
        result = estimate.to_dict()
        result["m_norm"] = m_norm(T, method=method, seed=seed)
    except (ValidationError, ValueError) as error:
        _fail_config(ConfigError("--matrix", str(error)))
        return
    click.echo(json.dumps(result, indent=2, sort_keys=True))


@cli.command()
@click.option("--space", type=click.Choice(("c0", "l1")), required=True)
@click.option("--N", "N", type=int, default=10000, help="Cesaro window length")
@click.option("--K", "K", type=int, default=100, help="Head length")
@click.option("--format", "fmt", type=click.Choice(REPORT_FORMATS), default="json")
@click.option("--out", default=None, help="Write diagnostics to this file")
def counterexample(space, N, K, fmt, out):
    """Diagnostics for the failing c0- and l1-valued extensions"""
    try:
        if space == "c0":
            diagnostic = c0_counterexample(N, K)
            summary = {"space": "c0", "N": N, "K": K, "min_head": diagnostic.min_head}
            rows = diagnostic.to_rows()
        else:
            diagnostic = l1_counterexample(N, K)
            summary = {"space": "l1", **diagnostic.to_rows()[0]}
            rows = diagnostic.to_rows()
    except ValidationError as error:
        _fail_config(ConfigError("--K", str(error)))
        return

    if fmt == "csv":
        frame = pd.DataFrame(rows)
        if out:
            frame.to_csv(out, index=False)
        else:
            click.echo(frame.to_csv(index=False), nl=False)
        return
    payload = dict(summary)
    if space == "c0":
        payload["values"] = [row["value"] for row in rows]
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as f:
            f.write(text)
        click.echo(json.dumps(summary, sort_keys=True))
    else:
        click.echo(text)


if __name__ == "__main__":
    cli()
