from __future__ import annotations
from collections.abc import Callable, Iterator
from contextlib import contextmanager
import csv
import functools
import io
import json
import logging
import sys
from typing import Any, Optional, TypeVar
import click
from . import __version__
from .core import (
    DEFAULT_TOLERANCES,
    EMPTY,
    ConvergenceError,
    DomainError,
    PointSet,
    Region,
    SinglePoint,
    Tolerances,
)
from .files import (
    dumps,
    jsonl,
    loads,
    point_set_from_json,
    result_from_json,
    result_to_json,
    write_atomic,
)
from .nd import MIN_SAMPLES, NdBallBody, ball_hull_nd, estimate_vk_nd
from .plane import (
    Lens,
    ball_body_2d,
    ball_hull_2d,
    dual_of,
    intrinsic_volumes_2d,
    lens_gap_for_area,
)
from .search import SearchConfig, minimize
from .svg import Layer, render
from .verify import (
    CheckReport,
    GeneratorLaw,
    TrialSpec,
    check_blaschke_santalo,
    check_brunn_minkowski,
    check_identities,
    check_mahler_2d,
    check_product,
    check_reverse_isoperimetric,
    check_support_identity,
)

log = logging.getLogger(__name__)

F = TypeVar("F", bound=Callable[..., Any])

LOG_LEVELS = ["CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"]

SUITES = ["bs", "product", "support", "identities", "mahler2d", "bm", "reverse"]

SUMMARY_FIELDS = ["check", "trials", "violations", "worst_margin", "seed"]


def _fail(kind: str, message: str, code: int) -> None:
    click.echo(json.dumps({"error": kind, "message": message}), err=True)
    sys.exit(code)


def reports_errors(func: F) -> F:
    """
    Convert library errors into a JSON error record on standard error: exit
    status 2 for bad input and 1 for computations that could not be
    certified
    """

    @functools.wraps(func)
    def wrapped(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except DomainError as e:
            _fail("input", str(e), 2)
        except OSError as e:
            _fail("input", f"{e.filename}: {e.strerror}", 2)
        except ConvergenceError as e:
            _fail("convergence", str(e), 1)

    return wrapped  # type: ignore[return-value]


def tolerances_for(tol: Optional[float]) -> Tolerances:
    """Tolerances with ``tol_check`` (and ``tol_geom`` if smaller) set to ``tol``"""
    if tol is None:
        return DEFAULT_TOLERANCES
    if tol <= 0:
        raise click.UsageError("--tol must be positive")
    return Tolerances(
        tol_geom=min(DEFAULT_TOLERANCES.tol_geom, tol),
        tol_merge=min(DEFAULT_TOLERANCES.tol_merge, tol),
        tol_check=tol,
    )


def read_json(path: str) -> Any:
    with click.open_file(path, encoding="utf-8") as fp:
        return loads(fp.read())


def emit(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        click.echo(text, nl=False)
    else:
        write_atomic(path, text)


@contextmanager
def _as_usage_error() -> Iterator[None]:
    try:
        yield
    except DomainError as e:
        raise click.UsageError(str(e))


input_option = click.option(
    "-i",
    "--input",
    "infile",
    default="-",
    show_default=True,
    metavar="FILE",
    help="Read the input document from FILE",
)

output_option = click.option(
    "-o",
    "--output",
    "outfile",
    metavar="FILE",
    help="Write output to FILE instead of standard output",
)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(
    __version__,
    "-V",
    "--version",
    message="ballbody %(version)s",
)
@click.option(
    "-l",
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    default="WARNING",
    show_default=True,
    help="Set logging level",
)
def main(log_level: str) -> None:
    """
    Compute r-ball bodies and r-ball hulls, check the inequalities they
    satisfy, and search for extremal bodies.

    Point set files are JSON documents of the form
    {"dim": D, "r": R, "points": [[x, y, ...], ...]}.
    """
    logging.basicConfig(
        format="%(asctime)s [%(levelname)-8s] %(name)s: %(message)s",
        datefmt="%H:%M:%S",
        level=getattr(logging, log_level.upper()),
        stream=sys.stderr,
    )


def nd_volumes(
    body: NdBallBody,
    ks: tuple[int, ...],
    samples: int,
    directions: int,
    seed: int,
    workers: int,
) -> list[dict[str, Any]]:
    for k in ks:
        if k > body.dim:
            raise click.UsageError(f"-k must be at most {body.dim}")
    return [
        estimate_vk_nd(
            body,
            k,
            n_samples=samples,
            n_directions=directions,
            seed=seed,
            workers=workers,
        ).for_json()
        for k in ks or (1, body.dim)
    ]


def nd_record(body: NdBallBody, volumes: list[dict[str, Any]]) -> dict[str, Any]:
    return {
        "result": "generators",
        "dim": body.dim,
        "r": body.radius,
        "points": body.array.tolist(),
        "volumes": volumes,
    }


nd_options = [
    click.option(
        "--samples",
        type=click.IntRange(min=MIN_SAMPLES),
        default=200_000,
        show_default=True,
        help="Monte Carlo samples for volume estimates in dimension 3 and up",
    ),
    click.option(
        "--directions",
        type=click.IntRange(min=1),
        default=200,
        show_default=True,
        help="Sphere directions for mean-width estimates and sampled hulls",
    ),
    click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True),
    click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True),
    click.option(
        "--tol", type=float, help="Geometric tolerance for coincidences and checks"
    ),
]


def with_nd_options(func: F) -> F:
    for opt in reversed(nd_options):
        func = opt(func)
    return func


@main.command()
@input_option
@output_option
@with_nd_options
@reports_errors
def body(
    infile: str,
    outfile: Optional[str],
    samples: int,
    directions: int,
    seed: int,
    workers: int,
    tol: Optional[float],
) -> None:
    """
    Compute the r-ball body X^r of a point set.

    In the plane the result is exact: an arc polygon, a single point, or
    {"result": "empty"}.  In higher dimensions the body is described by its
    generators together with seeded estimates of V_1 and V_d.
    """
    tolerances = tolerances_for(tol)
    x = point_set_from_json(read_json(infile))
    if x.dim == 2:
        doc = result_to_json(ball_body_2d(x, tolerances))
    else:
        nd_body = NdBallBody(x, tolerances)
        if nd_body.is_empty:
            doc = result_to_json(EMPTY)
        else:
            vols = nd_volumes(nd_body, (), samples, directions, seed, workers)
            doc = nd_record(nd_body, vols)
    emit(outfile, dumps(doc))


@main.command()
@input_option
@output_option
@with_nd_options
@reports_errors
def hull(
    infile: str,
    outfile: Optional[str],
    samples: int,
    directions: int,
    seed: int,
    workers: int,
    tol: Optional[float],
) -> None:
    """
    Compute the r-ball hull of a point set.

    In dimension 3 and up the hull is approximated from outside by the r-ball
    body of support points of X^r in DIRECTIONS seeded directions.
    """
    tolerances = tolerances_for(tol)
    x = point_set_from_json(read_json(infile))
    if x.dim == 2:
        doc = result_to_json(ball_hull_2d(x, tolerances))
    elif NdBallBody(x, tolerances).is_empty:
        doc = result_to_json(EMPTY)
    else:
        approx = ball_hull_nd(x, directions, seed, tolerances)
        doc = nd_record(
            approx, nd_volumes(approx, (), samples, directions, seed, workers)
        )
        doc["hull_directions"] = directions
        doc["hull_seed"] = seed
    emit(outfile, dumps(doc))


@main.command()
@input_option
@output_option
@click.option(
    "--r", "radius", type=float, help="Radius used when dualizing a single point"
)
@click.option("--tol", type=float, help="Geometric tolerance")
@reports_errors
def dual(
    infile: str, outfile: Optional[str], radius: Optional[float], tol: Optional[float]
) -> None:
    """Compute the r-dual A^r of a planar body file"""
    tolerances = tolerances_for(tol)
    b = result_from_json(read_json(infile))
    if isinstance(b, Region):
        r = b.polygon.radius if radius is None else radius
    elif isinstance(b, SinglePoint):
        if radius is None:
            raise click.UsageError("--r is required to dualize a single point")
        r = radius
    else:
        raise DomainError("The dual of the empty set is the whole plane")
    emit(outfile, dumps(result_to_json(dual_of(b, r, tolerances))))


@main.command()
@input_option
@output_option
@click.option(
    "--hull", "use_hull", is_flag=True, help="Measure the r-ball hull of a point set"
)
@click.option(
    "-k",
    "ks",
    type=click.IntRange(min=1),
    multiple=True,
    help="Intrinsic volume index to estimate in dimension 3 and up  [default: 1 and d]",
)
@with_nd_options
@reports_errors
def volumes(
    infile: str,
    outfile: Optional[str],
    use_hull: bool,
    ks: tuple[int, ...],
    samples: int,
    directions: int,
    seed: int,
    workers: int,
    tol: Optional[float],
) -> None:
    """
    Print the intrinsic volumes of a body.

    The input is either a planar body file or a point set file, in which case
    its r-ball body (or, with --hull, its r-ball hull) is measured.
    """
    tolerances = tolerances_for(tol)
    doc = read_json(infile)
    if not (isinstance(doc, dict) and "points" in doc):
        b = result_from_json(doc)
    else:
        x = point_set_from_json(doc)
        if x.dim == 2:
            b = ball_hull_2d(x, tolerances) if use_hull else ball_body_2d(x, tolerances)
        else:
            nd_body = NdBallBody(x, tolerances)
            if nd_body.is_empty:
                vols: list[dict[str, Any]] = []
            else:
                if use_hull:
                    nd_body = ball_hull_nd(x, directions, seed, tolerances)
                vols = nd_volumes(nd_body, ks, samples, directions, seed, workers)
            emit(outfile, dumps({"volumes": vols}))
            return
    v = intrinsic_volumes_2d(b)
    emit(outfile, dumps({"V1": v.v1, "V2": v.v2}))


def _run_suite(
    suite: str, spec: TrialSpec, ks: tuple[int, ...], v: Optional[float], workers: int
) -> list[CheckReport]:
    if suite == "support":
        return [check_support_identity(spec, workers)]
    elif suite == "identities":
        return [check_identities(spec, workers)]
    elif suite == "reverse":
        return [check_reverse_isoperimetric(spec, workers)]
    kvals = ks or tuple(range(1, spec.dim + 1))
    if suite == "bs":
        return [check_blaschke_santalo(spec, k, workers) for k in kvals]
    elif suite == "product":
        return [check_product(spec, k, workers) for k in kvals]
    elif suite == "bm":
        return [check_brunn_minkowski(spec, k, workers) for k in kvals]
    else:
        assert suite == "mahler2d"
        if v is None:
            raise click.UsageError("--v is required for the mahler2d suite")
        return [check_mahler_2d(spec, k, v, workers) for k in kvals]


def summary_csv(reports: list[CheckReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        writer.writerow(rep.summary_row())
    return buf.getvalue()


@main.command()
@click.option("--dim", type=click.IntRange(2, 8), default=2, show_default=True)
@click.option(
    "--k",
    "ks",
    type=click.IntRange(min=1),
    multiple=True,
    help="Intrinsic volume index; may be repeated  [default: all]",
)
@click.option("--r", "radius", type=float, default=1.0, show_default=True)
@click.option("--v", type=float, help="Target area for the mahler2d suite")
@click.option("--trials", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--tol", type=float, help="Slack allowed when checking an inequality")
@click.option("--n-min", type=click.IntRange(min=1), default=3, show_default=True)
@click.option("--n-max", type=click.IntRange(min=1), default=8, show_default=True)
@click.option(
    "--law",
    type=click.Choice([law.value for law in GeneratorLaw]),
    default="uniform",
    show_default=True,
    help="Distribution of random generators",
)
@click.option(
    "--scale",
    type=float,
    default=0.5,
    show_default=True,
    help="Scale of the generator distribution, as a multiple of r",
)
@click.option(
    "--samples",
    type=click.IntRange(min=MIN_SAMPLES),
    default=200_000,
    show_default=True,
    help="Monte Carlo samples per estimate in dimension 3 and up",
)
@click.option(
    "-o",
    "--output",
    "outfile",
    metavar="FILE",
    help="Write per-trial JSON lines to FILE",
)
@click.option(
    "--summary",
    metavar="FILE",
    help="Write the CSV summary to FILE instead of standard output",
)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@click.argument("suite", type=click.Choice(SUITES))
@reports_errors
def verify(
    suite: str,
    dim: int,
    ks: tuple[int, ...],
    radius: float,
    v: Optional[float],
    trials: int,
    seed: int,
    tol: Optional[float],
    n_min: int,
    n_max: int,
    law: str,
    scale: float,
    samples: int,
    outfile: Optional[str],
    summary: Optional[str],
    workers: int,
) -> None:
    """
    Run the randomized check suite SUITE and report a CSV summary.

    The exit status is 1 if any trial violates its inequality or identity, or
    could not be evaluated.
    """
    with _as_usage_error():
        spec = TrialSpec(
            dim=dim,
            r=radius,
            n_min=n_min,
            n_max=n_max,
            law=GeneratorLaw(law),
            law_scale=scale,
            trials=trials,
            seed=seed,
            tolerances=tolerances_for(tol),
            mc_samples=samples,
        )
        reports = _run_suite(suite, spec, ks, v, workers)
    for rep in reports:
        log.info(
            "%s: %d trial(s), %d violation(s), %d failure(s), worst margin %r",
            rep.check_name,
            rep.trials_run,
            rep.violations,
            rep.failures,
            rep.worst_margin,
        )
    if outfile is not None:
        records = (rec for rep in reports for rec in rep.jsonl_records())
        write_atomic(outfile, jsonl(records))
    emit(summary, summary_csv(reports))
    if not all(rep.passed for rep in reports):
        sys.exit(1)


def search_svg(result_doc: dict[str, Any], config: SearchConfig) -> str:
    x = PointSet.from_coords(result_doc["best_generators"], config.r)
    hull_body = ball_hull_2d(x)
    layers = [Layer(hull_body, "body", stroke="steelblue")]
    if isinstance(hull_body, (Region, SinglePoint)):
        layers.append(Layer(dual_of(hull_body, config.r), "dual", stroke="firebrick"))
    lens = Lens(config.r, lens_gap_for_area(config.r, config.v))
    layers.append(Layer(lens.polygon(), "lens", stroke="gray", dashed=True))
    return render(layers, config.r)


@main.command()
@click.option("--dim", type=click.IntRange(2, 3), default=2, show_default=True)
@click.option("--k", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--r", "radius", type=float, default=1.0, show_default=True)
@click.option("--v", type=float, required=True, help="Target volume of the body")
@click.option(
    "--n",
    type=click.IntRange(min=2),
    default=4,
    show_default=True,
    help="Number of generators",
)
@click.option("--restarts", type=click.IntRange(min=1), default=20, show_default=True)
@click.option(
    "--max-evals",
    type=click.IntRange(min=1),
    default=3000,
    show_default=True,
    help="Objective evaluations per restart",
)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@output_option
@click.option("--svg", "svgfile", metavar="FILE", help="Write an SVG drawing (2D only)")
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@reports_errors
def search(
    dim: int,
    k: int,
    radius: float,
    v: float,
    n: int,
    restarts: int,
    max_evals: int,
    seed: int,
    outfile: Optional[str],
    svgfile: Optional[str],
    workers: int,
) -> None:
    """
    Search for a body of volume V minimizing V_k of its dual.

    In the plane the result is compared with the lens of the same area; in
    three dimensions the search is exploratory and is compared with the
    two-ball lens and the spindle.
    """
    with _as_usage_error():
        config = SearchConfig(
            v=v,
            dim=dim,
            r=radius,
            k=k,
            n=n,
            restarts=restarts,
            max_evals=max_evals,
            seed=seed,
        )
    if svgfile is not None and dim != 2:
        raise click.UsageError("--svg is only available with --dim 2")
    result = minimize(config, workers=workers)
    doc = result.for_json()
    emit(outfile, dumps(doc))
    if svgfile is not None:
        write_atomic(svgfile, search_svg(doc, config))


if __name__ == "__main__":
    main()  # pragma: no cover
