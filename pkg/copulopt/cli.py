"""
Command line interface.

Exit status: 0 success, 1 verification failure, 2 usage or domain error,
3 numeric failure.
"""
import functools
import logging
import re
from typing import Optional, Tuple

import click
import sentry_sdk
from pydantic import ValidationError

from .config import get_settings
from .core.analytic import PhiSpec, certify_uckelmann, solve_monotone, solve_uckelmann
from .core.copula import empirical_copula, shuffle_from_coupling
from .core.costfn import CostFunction, parse_cost, parse_phi
from .core.grid import bound, bound_sequence, build_matrix, support_points
from .core.lap import solve_lap
from .core.verify import SupportSet, check_cyclical_monotonicity, check_doubly_stochastic
from .errors import CopuloptError
from .schemas import (
    AnalyticRecord,
    BoundRow,
    BoundsRecord,
    CheckRecord,
    GridSpec,
    MonotoneRecord,
    RunConfig,
)
from .services import export
from .services.registry import registry_cost, registry_phi
from .services.sequences import avg_consecutive_distance, consecutive_pairs, vdc_sequence
from .services.svg import support_plot

logger = logging.getLogger(__name__)

VERIFICATION_FAILED = 1
MODES = ("lower", "midpoint", "upper")
LEVELS_RE = re.compile(r"^\s*(\d+)\s*(?:\.\.\s*(\d+)\s*)?$")


def _init_observability():
    settings = get_settings()
    logging.basicConfig(
        level=settings.LOG_LEVEL.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if settings.SENTRY_DSN:
        sentry_sdk.init(
            dsn=settings.SENTRY_DSN,
            environment=settings.ENVIRONMENT,
            traces_sample_rate=1.0,
        )


def handle_errors(func):
    """Map library exceptions to their exit status."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ValidationError as exc:
            message = "; ".join(err["msg"] for err in exc.errors())
            raise click.UsageError(message) from exc
        except CopuloptError as exc:
            logger.debug("Command failed", exc_info=True)
            click.echo(f"Error: {exc}", err=True)
            raise SystemExit(exc.exit_code)
    return wrapper


def parse_levels(text: str) -> Tuple[int, int]:
    match = LEVELS_RE.match(text)
    if not match:
        raise click.BadParameter(f"expected N or A..B, got {text!r}", param_hint="--n")
    lo = int(match.group(1))
    hi = int(match.group(2) or lo)
    return lo, hi


def select_cost(cost: Optional[str], expr: Optional[str]) -> CostFunction:
    return registry_cost(cost) if cost is not None else parse_cost(expr)


def emit(output, text: str):
    rendered = export.write_text(output, text)
    if rendered is not None:
        click.echo(rendered, nl=False)


cost_option = click.option("--cost", help="Built-in cost name, e.g. sincos.")
expr_option = click.option("--expr", help="Cost expression in x and y, e.g. 'x*y'.")
sense_option = click.option("--sense", type=click.Choice(["min", "max"]), default="max", show_default=True)
output_option = click.option("--output", "-o", type=click.Path(dir_okay=False), help="Write to file instead of stdout.")


@click.group()
def cli():
    """Extremal integrals over copulas: grid bounds, closed forms and certificates."""
    _init_observability()


@cli.command()
@cost_option
@expr_option
@click.option("--n", "levels", default="1..7", show_default=True, help="Level or range A..B.")
@click.option("--mode", type=click.Choice(["lower", "upper", "midpoint", "all"]), default="all", show_default=True)
@sense_option
@click.option("--subsamples", type=int, help="Samples per axis per cell for lower/upper.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@output_option
@click.option("--matrix-out", type=click.Path(dir_okay=False), help="Also write the cell matrices as n,mode,i,j,value CSV.")
@handle_errors
def bounds(cost, expr, levels, mode, sense, subsamples, fmt, output, matrix_out):
    """Grid bounds for every level in the range."""
    n_min, n_max = parse_levels(levels)
    config = RunConfig(
        command="bounds", cost=cost, expr=expr, n_min=n_min, n_max=n_max,
        mode=mode, sense=sense, subsamples=subsamples, output=output, fmt=fmt,
    )
    c = select_cost(config.cost, config.expr)
    modes = MODES if config.mode == "all" else (config.mode,)
    columns = {
        m: dict(bound_sequence(c, config.n_max, m, config.sense, n_min=config.n_min, subsamples=config.subsamples))
        for m in modes
    }
    levels_range = range(config.n_min, config.n_max + 1)
    if config.fmt == "json":
        record = BoundsRecord(
            cost=c.source,
            sense=config.sense,
            subsamples=config.subsamples or get_settings().GRID_SUBSAMPLES,
            rows=[BoundRow(n=n, **{m: columns[m][n] for m in modes}) for n in levels_range],
        )
        emit(config.output, record.to_json())
    else:
        table = [[n, *(columns[m][n] for m in modes)] for n in levels_range]
        emit(config.output, export.bounds_csv(list(modes), table))
    if matrix_out:
        extra = {} if config.subsamples is None else {"subsamples": config.subsamples}
        matrices = [build_matrix(c, GridSpec(n=n, mode=m, **extra)) for n in levels_range for m in modes]
        export.write_text(matrix_out, export.grid_matrix_csv(*matrices))


@cli.command("plot-support")
@cost_option
@expr_option
@click.option("--n", "level", type=int, required=True, help="Grid level.")
@click.option("--mode", type=click.Choice(["lower", "upper", "midpoint"]), default="midpoint", show_default=True)
@sense_option
@output_option
@click.option("--coupling-out", type=click.Path(dir_okay=False), help="Also write the coupling JSON record.")
@click.option("--shuffle-out", type=click.Path(dir_okay=False), help="Also write the coupling as a shuffle of M JSON record.")
@handle_errors
def plot_support(cost, expr, level, mode, sense, output, coupling_out, shuffle_out):
    """SVG scatter of the optimal coupling's support."""
    config = RunConfig(
        command="plot-support", cost=cost, expr=expr, n_min=level, n_max=level,
        mode=mode, sense=sense, output=output, fmt="svg",
    )
    c = select_cost(config.cost, config.expr)
    value, coupling = bound(c, GridSpec(n=level, mode=mode), config.sense)
    svg = support_plot(support_points(coupling), title=f"{c.source}  n={level}  {sense}={value:.6f}")
    emit(config.output, svg.render())
    if coupling_out:
        export.write_text(coupling_out, coupling.to_record().to_json())
    if shuffle_out:
        export.write_text(shuffle_out, shuffle_from_coupling(coupling).to_json())


@cli.command()
@cost_option
@expr_option
@click.option("--phi", help="phi(z) for costs phi(x + y), e.g. 'sin(pi*z)'.")
@click.option("--inflection", type=float, help="Inflection k of phi; located numerically if omitted.")
@click.option("--monotone", is_flag=True, help="Solve a positive cross derivative cost instead.")
@click.option("--certify-grid", type=int, help="Lattice size for the certificate.")
@output_option
@click.pass_context
@handle_errors
def analytic(ctx, cost, expr, phi, inflection, monotone, certify_grid, output):
    """Closed-form optimum with its certificate."""
    if monotone:
        if (cost is None) == (expr is None):
            raise click.UsageError("--monotone needs exactly one of --cost or --expr")
        c = select_cost(cost, expr)
        record = MonotoneRecord(max=solve_monotone(c, "max").value, min=solve_monotone(c, "min").value)
        emit(output, record.to_json())
        return

    if (cost is None) == (phi is None) or expr is not None:
        raise click.UsageError("give exactly one of --cost or --phi")
    if cost is not None:
        spec = registry_phi(cost)
    else:
        spec = PhiSpec(phi=parse_phi(phi), inflection=inflection, source=phi)

    solution = solve_uckelmann(spec)
    certificate = None
    if solution.branch == "shuffle":
        certificate = certify_uckelmann(spec, solution, certify_grid)
    record = AnalyticRecord(
        beta=solution.beta,
        value=solution.value,
        branch=solution.branch,
        certified=None if certificate is None else certificate.passed,
        certificate=certificate,
    )
    emit(output, record.to_json())
    if certificate is not None and not certificate.passed:
        ctx.exit(VERIFICATION_FAILED)


@cli.command()
@click.option("--base", type=int, default=2, show_default=True)
@click.option("--N", "count", type=int, default=100000, show_default=True, help="Number of terms.")
@click.option("--start", type=int, default=1, show_default=True, help="First index n.")
@click.option("--stat", type=click.Choice(["distance"]), default="distance", show_default=True)
@click.option("--emit", "emit_kind", type=click.Choice(["values", "pairs", "copula"]), help="Stream the sequence instead.")
@click.option("--resolution", type=int, default=16, show_default=True, help="Lattice resolution for --emit copula.")
@output_option
@handle_errors
def vdc(base, count, start, stat, emit_kind, resolution, output):
    """Van der Corput statistics and sequences."""
    if emit_kind == "values":
        emit(output, export.sequence_csv(start, vdc_sequence(base, count, start)))
    elif emit_kind == "pairs":
        emit(output, export.points_csv(consecutive_pairs(base, count, start)))
    elif emit_kind == "copula":
        copula = empirical_copula(consecutive_pairs(base, count, start), resolution)
        emit(output, export.empirical_copula_csv(copula))
    else:
        distance = avg_consecutive_distance(base, count)
        limit = 2.0 * (base - 1) / base ** 2
        emit(output, export.csv_text(["base", "N", stat, "limit"], [[base, count, distance, limit]]))


@cli.command()
@click.option("--coupling", "coupling_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Coupling JSON record or x,y support CSV.")
@cost_option
@expr_option
@sense_option
@click.option("--max-cycle", type=int, help="Longest sampled cycle.")
@click.option("--trials", type=int, help="Sampled cycles per length.")
@click.option("--seed", type=int, help="Seed of the cycle sampler.")
@output_option
@click.pass_context
@handle_errors
def check(ctx, coupling_path, cost, expr, sense, max_cycle, trials, seed, output):
    """Cyclical monotonicity (and marginals, for couplings) of a support."""
    config = RunConfig(command="check", cost=cost, expr=expr, sense=sense, output=output, fmt="json",
                       **({} if seed is None else {"seed": seed}))
    c = select_cost(config.cost, config.expr)
    doubly_stochastic = None
    with open(coupling_path, encoding="utf-8") as f:
        is_json = f.read(1024).lstrip().startswith("{")
    if is_json:
        coupling = export.read_coupling_json(coupling_path)
        points = support_points(coupling)
        doubly_stochastic = check_doubly_stochastic(coupling.matrix(), tol=0.0)
    else:
        points = export.read_points_csv(coupling_path)

    cycle = check_cyclical_monotonicity(SupportSet(points, config.sense), c, max_cycle, trials, config.seed)
    passed = cycle.passed and (doubly_stochastic is None or doubly_stochastic.passed)
    record = CheckRecord(passed=passed, cycle=cycle, doubly_stochastic=doubly_stochastic)
    emit(config.output, record.to_json())
    if not passed:
        ctx.exit(VERIFICATION_FAILED)


@cli.command("solve-lap")
@click.option("--matrix", "matrix_path", type=click.Path(exists=True, dir_okay=False), required=True)
@sense_option
@output_option
@handle_errors
def solve_lap_command(matrix_path, sense, output):
    """Solve the assignment problem for a square CSV matrix."""
    assignment = solve_lap(export.read_matrix_csv(matrix_path), sense)
    emit(output, assignment.to_record().to_json())


def main():
    cli(prog_name="copulopt")
