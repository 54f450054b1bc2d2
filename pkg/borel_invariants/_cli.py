import json
import sys
from typing import Any, Callable, Optional

import click
from pydantic import BaseModel, ValidationError

from .characters import laurent_monomial, stage_lattice, weight_table
from .config import CliConfig, Command, OutputFormat
from .exactmat import Matrix
from .exactnum import format_scalar
from .exceptions import (
    DegeneratePointError,
    IndexOutOfRange,
    InputFormatError,
    MatrixShapeError,
    SamplingExhaustedError,
)
from .invariants import InvariantId, Stage, evaluate, generator_table
from .logging import LOG_LEVEL_CHOICES, logger, set_level
from .verify import SUITES, SystemName, certify_rank, run_suite

# Inputs the user can fix: exit 2.
USAGE_ERRORS = (InputFormatError, IndexOutOfRange, MatrixShapeError, OSError)
# A check could not be completed at the sampled points: exit 1.
CHECK_ERRORS = (DegeneratePointError, SamplingExhaustedError)


class RunResult(BaseModel):
    exit_code: int
    output: str = ""
    diagnostic: Optional[str] = None


def render_triangle(columns: list[list[str]]) -> str:
    """
    Lay out generator columns as the bottom-aligned table: column ``i`` holds ``i`` cells,
    its last cell on the bottom row.
    """
    n = len(columns)
    width = max((len(cell) for column in columns for cell in column), default=0)
    lines = []
    for r in range(n):
        cells = []
        for c, column in enumerate(columns):
            offset = r - (n - len(column))
            cells.append(column[offset].ljust(width) if offset >= 0 else " " * width)

        lines.append("  ".join(cells).rstrip())

    return "\n".join(lines)


def _dump(payload: Any) -> str:
    return json.dumps(payload, indent=2)


def _table(config: CliConfig) -> RunResult:
    stage = config.resolved_stage
    columns = [[str(ident) for ident in column] for column in generator_table(config.n, stage)]
    if config.format is OutputFormat.TEXT:
        return RunResult(exit_code=0, output=render_triangle(columns))

    return RunResult(
        exit_code=0, output=_dump({"n": config.n, "stage": stage.value, "columns": columns})
    )


def _weights(config: CliConfig) -> RunResult:
    stage = config.resolved_stage
    table = weight_table(config.n, stage)
    if config.format is OutputFormat.TEXT:
        columns = [[w.to_monomial() for w in column] for column in table]
        return RunResult(exit_code=0, output=render_triangle(columns))

    columns = [[list(w.exponents) for w in column] for column in table]
    return RunResult(
        exit_code=0, output=_dump({"n": config.n, "stage": stage.value, "columns": columns})
    )


def _eval(config: CliConfig) -> RunResult:
    ident: InvariantId = config.invariant_id  # type: ignore[assignment]
    matrix = Matrix.parse_json(config.matrix_path.read_text())  # type: ignore[union-attr]
    if matrix.shape != (config.n, config.n):
        expected = (config.n, config.n)
        raise MatrixShapeError(f"Expecting a {expected} matrix. Received {matrix.shape}.")

    value = format_scalar(evaluate(ident, config.n, matrix))
    if config.format is OutputFormat.TEXT:
        return RunResult(exit_code=0, output=value)

    return RunResult(exit_code=0, output=_dump({"id": str(ident), "n": config.n, "value": value}))


def _verify(config: CliConfig) -> RunResult:
    extra = {"stage": config.resolved_stage} if config.suite == "lattice" else {}
    report = run_suite(
        config.suite,  # type: ignore[arg-type]
        config.n,
        trials=config.trials,
        seed=config.seed,
        bound=config.bound,
        max_retries=config.max_retries,
        jobs=config.jobs,
        **extra,
    )
    exit_code = 0 if report.ok else 1
    if config.format is OutputFormat.JSON:
        return RunResult(exit_code=exit_code, output=report.to_json())

    lines = [
        f"{report.check_name}: {report.passes}/{report.trials} passed "
        f"(n={report.n}, seed={report.seed})"
    ]
    for failure in report.failures:
        what = f" {failure.generator}" if failure.generator else ""
        lines.append(f"  trial {failure.trial}{what}: {failure.lhs} != {failure.rhs}")

    return RunResult(exit_code=exit_code, output="\n".join(lines))


def _rank(config: CliConfig) -> RunResult:
    certificate = certify_rank(
        config.system,  # type: ignore[arg-type]
        config.n,
        seed=config.seed,
        bound=config.bound,
        max_retries=config.max_retries,
    )
    exit_code = 0 if certificate.ok else 1
    if config.format is OutputFormat.JSON:
        return RunResult(exit_code=exit_code, output=certificate.to_json())

    summary = (
        f"{certificate.system} system, n={certificate.n}: rank {certificate.rank} "
        f"(expected {certificate.expected}, {certificate.attempts} point(s) tried)"
    )
    return RunResult(exit_code=exit_code, output=summary)


def _lattice(config: CliConfig) -> RunResult:
    stage = config.resolved_stage
    basis = stage_lattice(config.n, stage)
    labels = basis.labels or []
    if config.format is OutputFormat.TEXT:
        lines = [laurent_monomial(zip(labels, vector)) for vector in basis.vectors]
        return RunResult(exit_code=0, output="\n".join(lines))

    payload = {"n": config.n, "stage": stage.value, "labels": labels, "basis": basis.vectors}
    return RunResult(exit_code=0, output=_dump(payload))


_HANDLERS: dict[Command, Callable[[CliConfig], RunResult]] = {
    Command.TABLE: _table,
    Command.WEIGHTS: _weights,
    Command.EVAL: _eval,
    Command.VERIFY: _verify,
    Command.RANK: _rank,
    Command.LATTICE: _lattice,
}


def run(config: CliConfig) -> RunResult:
    """Execute one validated command. Exit 0 when everything passes, 1 on a failed check."""
    try:
        return _HANDLERS[config.command](config)
    except USAGE_ERRORS as err:
        return RunResult(exit_code=2, diagnostic=str(err))
    except CHECK_ERRORS as err:
        return RunResult(exit_code=1, diagnostic=str(err))


def _summarize(err: ValidationError) -> str:
    messages = []
    for error in err.errors():
        location = ".".join(str(part) for part in error["loc"]) or "config"
        messages.append(f"{location}: {error['msg']}")

    return "; ".join(messages)


def _execute(command: Command, **options):
    overrides = {key: value for key, value in options.items() if value is not None}
    try:
        config = CliConfig(command=command, **overrides)
    except ValidationError as err:
        raise click.UsageError(_summarize(err)) from err

    result = run(config)
    if result.output:
        click.echo(result.output)

    if result.diagnostic:
        logger.error(result.diagnostic)

    sys.exit(result.exit_code)


def _set_verbosity(ctx, param, value):
    set_level(value)


verbosity_option = click.option(
    "-v",
    "--verbosity",
    type=click.Choice(LOG_LEVEL_CHOICES, case_sensitive=False),
    default="WARNING",
    expose_value=False,
    is_eager=True,
    callback=_set_verbosity,
    help="Logging level (logs go to stderr).",
)
n_option = click.option("--n", "n", type=int, help="Matrix dimension.")
format_option = click.option(
    "--format", "format", type=click.Choice([f.value for f in OutputFormat]), help="Output format."
)
stage_option = click.option(
    "--stage", type=click.Choice([s.value for s in Stage]), help="Transformation-chain stage."
)
seed_option = click.option("--seed", type=int, help="Seed of the per-trial random streams.")
bound_option = click.option("--bound", type=int, help="Sampled numerator/denominator bound.")
retries_option = click.option("--max-retries", type=int, help="Resampling budget.")
large_option = click.option(
    "--allow-large", is_flag=True, default=None, help="Allow n above the configured max_n."
)


def common_options(fn):
    for option in (verbosity_option, large_option, format_option, n_option):
        fn = option(fn)

    return fn


@click.group()
def cli():
    """
    Exact-arithmetic workbench for the U- and B-invariants of the adjoint
    action of GL(n) on n x n matrices.
    """


@cli.command(short_help="Print the generator table of a chain stage")
@common_options
@stage_option
def table(**options):
    _execute(Command.TABLE, **options)


@cli.command(short_help="Print the weight table of a chain stage")
@common_options
@stage_option
def weights(**options):
    _execute(Command.WEIGHTS, **options)


@cli.command(name="eval", short_help="Evaluate one generator at a matrix")
@common_options
@click.option("--id", "id", help="Generator id, e.g. J:2,1, y:3 or Y:3,0.")
@click.option(
    "--matrix",
    "matrix_path",
    type=click.Path(dir_okay=False),
    help="JSON file with a square array of rational strings.",
)
def eval_(**options):
    _execute(Command.EVAL, **options)


@cli.command(short_help="Run a verification suite")
@common_options
@click.option("--suite", type=click.Choice(list(SUITES)), help="Suite to run.")
@click.option("--trials", type=int, help="Number of trials.")
@seed_option
@bound_option
@click.option("--jobs", type=int, help="Worker processes.")
@retries_option
@stage_option
def verify(**options):
    _execute(Command.VERIFY, **options)


@cli.command(short_help="Certify the Jacobian rank of a generator system")
@common_options
@click.option("--system", type=click.Choice([s.value for s in SystemName]), help="J or B.")
@seed_option
@bound_option
@retries_option
def rank(**options):
    _execute(Command.RANK, **options)


@cli.command(short_help="Print the invariant-monomial lattice of a chain stage")
@common_options
@stage_option
def lattice(**options):
    _execute(Command.LATTICE, **options)
