"""Command-line entry point: ``verify``, ``solve`` and ``report``.

Exit codes: 0 when every check passes, 1 when a check fails or the solver
does not converge, 2 on configuration or runtime errors.
"""

import json
import sys
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path

import click
from loguru import logger
from pydantic import ValidationError

from src.config import RunConfig, load_run_config, settings
from src.errors import LabError, NonContractionError, PersistenceError
from src.solver.persistence import atomic_write_text, load_run, save_run
from src.solver.picard import solve_from_config
from src.verify.models import ContractionCheck, VerificationSuiteResult
from src.verify.report import write_csv_reports, write_json_report
from src.verify.solution import verify_bootstrap, verify_solution_decay
from src.verify.suite import VerificationService

EXIT_PASSED = 0
EXIT_FAILED = 1
EXIT_ERROR = 2


# --- Logging setup ---


def configure_logging(level: str | None = None) -> None:
    logger.remove()
    logger.add(
        sys.stderr,
        level=level or settings.log_level,
        format=(
            "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
            "<level>{level: <8}</level> | "
            "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> | "
            "<level>{message}</level>"
        ),
    )
    if settings.log_file:
        logger.add(
            settings.log_file,
            rotation="10 MB",
            retention="7 days",
            level="DEBUG",
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} | {message}",
        )


# --- Shared options ---


def _common_options(command):
    command = click.option("--out", "out", default=None, help="Output directory (defaults to [output] directory)")(
        command
    )
    command = click.option(
        "--seed", type=click.IntRange(min=0), default=None, help="Root seed (defaults to NSLAB_DEFAULT_SEED)"
    )(command)
    command = click.option("--config", "config_path", required=True, help="Run configuration file")(command)
    return command


def _emission_options(command):
    command = click.option("--csv/--no-csv", "write_csv", default=None, help="Write one CSV per decay series")(
        command
    )
    command = click.option("--json/--no-json", "write_json", default=None, help="Write the JSON report")(command)
    return command


def _output_dir(out: str | None, config: RunConfig) -> Path:
    return Path(out or config.output.directory or settings.output_dir)


def _seed(seed: int | None) -> int:
    return settings.default_seed if seed is None else seed


def _flag(value: bool | None, default: bool) -> bool:
    return default if value is None else value


@contextmanager
def _errors_exit(ctx: click.Context):
    """Turn laboratory and validation errors into exit code 2."""
    try:
        yield
    except (LabError, ValidationError) as exc:
        logger.error(str(exc))
        click.echo(f"error: {exc}", err=True)
        ctx.exit(EXIT_ERROR)


def _emit(result: VerificationSuiteResult, config: RunConfig, out: Path, name: str, seed: int, json_on, csv_on):
    if _flag(json_on, config.output.write_json):
        write_json_report(out, name, result, config, seed)
    if _flag(csv_on, config.output.write_csv):
        write_csv_reports(out, name, result.decay_reports)


def _summary(result: VerificationSuiteResult) -> str:
    total = (
        len(result.decay_reports)
        + len(result.kernel_audits)
        + len(result.similarity_checks)
        + len(result.reference_checks)
        + len(result.contraction_checks)
    )
    failed = result.failed_checks()
    if not failed:
        return f"PASS: {total} checks"
    return f"FAIL: {len(failed)} of {total} checks failed: {', '.join(failed)}"


# --- Commands ---


@click.group()
@click.option("--log-level", default=None, help="Override NSLAB_LOG_LEVEL")
def cli(log_level: str | None):
    """Numerical laboratory for weighted-decay mild solutions of Navier-Stokes."""
    configure_logging(log_level)


@cli.command()
@_common_options
@_emission_options
@click.pass_context
def verify(ctx, config_path, seed, out, write_json, write_csv):
    """Run the verification suite selected in [verify]."""
    with _errors_exit(ctx):
        config = load_run_config(config_path)
        seed = _seed(seed)
        result = VerificationService(config).run(seed)
        _emit(result, config, _output_dir(out, config), config.output.run_name, seed, write_json, write_csv)
        click.echo(_summary(result))
        code = EXIT_PASSED if result.passed else EXIT_FAILED
    ctx.exit(code)


@cli.command()
@_common_options
@click.option("--override-smallness", is_flag=True, help="Run even if delta exceeds the calibrated bound")
@click.pass_context
def solve(ctx, config_path, seed, out, override_smallness):
    """Construct the mild solution and persist its slices and diagnostics."""
    with _errors_exit(ctx):
        config = load_run_config(config_path)
        seed = _seed(seed)
        directory = _output_dir(out, config)
        name = config.output.run_name
        try:
            run = solve_from_config(config, seed, override_smallness=override_smallness)
        except NonContractionError as exc:
            path = directory / f"{name}.divergence.json"
            atomic_write_text(path, json.dumps(exc.diagnostics.model_dump(mode="json"), indent=2, sort_keys=True))
            click.echo(f"FAIL: {exc}; diagnostics in {path}", err=True)
            ctx.exit(EXIT_FAILED)

        metadata = {
            "config_hash": config.config_hash(),
            "seed": seed,
            "run_config": config.model_dump(mode="json"),
            "eta_hat": run.diagnostics.eta_hat,
            "delta": run.diagnostics.delta,
            "created_at": datetime.now(timezone.utc).isoformat(),
        }
        save_run(directory, name, run.solution, run.initial_data, run.diagnostics, metadata)
        diagnostics = run.diagnostics
        if diagnostics.converged:
            click.echo(f"PASS: converged in {diagnostics.iterations} iterations, residual {diagnostics.residual:.3e}")
            code = EXIT_PASSED
        else:
            click.echo(f"FAIL: no convergence after {diagnostics.iterations} iterations")
            code = EXIT_FAILED
    ctx.exit(code)


@cli.command()
@_common_options
@_emission_options
@click.pass_context
def report(ctx, config_path, seed, out, write_json, write_csv):
    """Decay and bootstrap reports of a persisted ``solve`` run."""
    with _errors_exit(ctx):
        config = load_run_config(config_path)
        directory = _output_dir(out, config)
        name = config.output.run_name
        stored = load_run(directory, name)
        if "run_config" in stored.metadata:
            try:
                config = RunConfig.model_validate(stored.metadata["run_config"])
            except ValidationError as exc:
                raise PersistenceError(f"{name}: stored configuration is invalid ({exc})") from exc
        seed = stored.metadata.get("seed", _seed(seed))

        weights, verify_section = config.weights, config.verify
        decay = verify_solution_decay(stored.solution, weights.gamma, weights.beta, stored.diagnostics)
        bootstrap = verify_bootstrap(
            stored.solution,
            weights.beta,
            verify_section.bootstrap_alphas,
            verify_section.bootstrap_hat_betas,
            stored.diagnostics,
        )
        contraction = ContractionCheck.from_diagnostics(stored.diagnostics, config.solver.tolerance)
        result = VerificationSuiteResult.assemble(decay_reports=[decay, bootstrap], contraction_checks=[contraction])
        _emit(result, config, directory, f"{name}.report", seed, write_json, write_csv)
        click.echo(_summary(result))
        code = EXIT_PASSED if result.passed else EXIT_FAILED
    ctx.exit(code)


def cli_main(argv: list[str] | None = None) -> int:
    """Run the CLI without exiting the interpreter; returns the exit code."""
    try:
        code = cli.main(args=argv, prog_name="nslab", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return EXIT_ERROR
    except click.Abort:
        return EXIT_ERROR
    return code if isinstance(code, int) else EXIT_PASSED


if __name__ == "__main__":
    sys.exit(cli_main())
