"""
Randomized, deterministically seeded check suites for the identities and
inequalities satisfied by r-ball bodies, each producing a `CheckReport` of
per-trial records
"""

from __future__ import annotations
from collections.abc import Callable, Iterator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
import hashlib
import logging
import math
import multiprocessing
from typing import Any, NamedTuple
import numpy as np
from scipy.optimize import brentq
from .core import (
    DEFAULT_TOLERANCES,
    Ball,
    BallBodyResult,
    ConvergenceError,
    DomainError,
    Empty,
    FloatArray,
    PointSet,
    Region,
    Tolerances,
    area_centroid,
    ball_intrinsic_volume,
    congruence_distance,
    dual_ball,
    hausdorff_distance,
)
from .nd import (
    MIN_SAMPLES,
    NdBallBody,
    dual_nd,
    dual_vk,
    estimate_vd_nd,
    estimate_vk_nd,
    matching_ball,
    minimal_enclosing_ball,
    support_identity_residual_nd,
)
from .plane import (
    Lens,
    ball_body_2d,
    ball_hull_2d,
    contains_many_2d,
    dual_of,
    intrinsic_volumes_2d,
    lens_gap_for_area,
    lens_gap_for_half_perimeter,
    make_lens,
    minimal_enclosing_circle,
    support_value,
)

log = logging.getLogger(__name__)

#: Directions used by the planar support-identity check
SUPPORT_DIRECTIONS = 720

#: Sample points per trial for the membership identities
SAMPLE_POINTS = 1000


class GeneratorLaw(Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"
    CLUSTERED = "clustered"


@dataclass(frozen=True)
class TrialSpec:
    """
    Everything that determines a check run apart from the check itself.
    ``law_scale`` is the radius of the sampling ball (``UNIFORM``), the
    standard deviation (``GAUSSIAN``), or the radius within which cluster
    centers are drawn (``CLUSTERED``), all as multiples of ``r``.
    """

    dim: int = 2
    r: float = 1.0
    n_min: int = 3
    n_max: int = 8
    law: GeneratorLaw = GeneratorLaw.UNIFORM
    law_scale: float = 0.5
    trials: int = 1000
    seed: int = 0
    tolerances: Tolerances = DEFAULT_TOLERANCES
    max_resample: int = 100
    mc_samples: int = 200_000
    hull_directions: int = 2000
    width_directions: int = 200
    nd_support_tol: float = 0.02

    def __post_init__(self) -> None:
        if not 2 <= self.dim <= 8:
            raise DomainError(f"Dimension must be between 2 and 8, got {self.dim}")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise DomainError(f"Radius must be positive, got {self.r}")
        if not 1 <= self.n_min <= self.n_max:
            raise DomainError("Generator counts must satisfy 1 <= n_min <= n_max")
        if self.trials < 1:
            raise DomainError("Need at least one trial")
        if self.seed < 0:
            raise DomainError("Seed must be nonnegative")
        if self.law_scale <= 0:
            raise DomainError("Law scale must be positive")
        if self.mc_samples < MIN_SAMPLES:
            raise DomainError(f"Need at least {MIN_SAMPLES} Monte-Carlo samples")


@dataclass(frozen=True)
class TrialRecord:
    index: int
    digest: str
    values: dict[str, float]
    slack: float
    violated: bool
    near_equality: bool = False
    congruent: bool | None = None
    resampled: int = 0
    #: Set when the trial could not be evaluated
    error: str | None = None

    def for_json(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "inputs": self.digest,
            "values": self.values,
            "slack": self.slack,
            "violated": self.violated,
            "near_equality": self.near_equality,
            "congruent": self.congruent,
            "resampled": self.resampled,
            "error": self.error,
        }


@dataclass(frozen=True)
class CheckReport:
    check_name: str
    seed: int
    records: tuple[TrialRecord, ...] = field(default=())

    @property
    def trials_run(self) -> int:
        return len(self.records)

    @property
    def violations(self) -> int:
        return sum(rec.violated for rec in self.records)

    @property
    def failures(self) -> int:
        return sum(rec.error is not None for rec in self.records)

    @property
    def worst_margin(self) -> float:
        return min(
            (rec.slack for rec in self.records if rec.error is None),
            default=math.inf,
        )

    @property
    def equality_cases(self) -> int:
        return sum(rec.near_equality for rec in self.records)

    @property
    def equality_congruent(self) -> int:
        return sum(bool(rec.near_equality and rec.congruent) for rec in self.records)

    @property
    def resampled(self) -> int:
        return sum(rec.resampled for rec in self.records)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.failures == 0

    def summary_row(self) -> dict[str, Any]:
        return {
            "check": self.check_name,
            "trials": self.trials_run,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "seed": self.seed,
        }

    def jsonl_records(self) -> Iterator[dict[str, Any]]:
        for rec in self.records:
            yield {"check": self.check_name, **rec.for_json()}


# --- sampling --------------------------------------------------------------


def trial_rng(spec: TrialSpec, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([spec.seed, index]))


def sample_generators(
    spec: TrialSpec, rng: np.random.Generator, n: int | None = None
) -> FloatArray:
    """Draw a generator configuration from the trial's law"""
    if n is None:
        n = int(rng.integers(spec.n_min, spec.n_max + 1))
    d = spec.dim
    scale = spec.law_scale * spec.r
    if spec.law is GeneratorLaw.UNIFORM:
        return _uniform_ball(rng, n, d, scale)
    elif spec.law is GeneratorLaw.GAUSSIAN:
        return rng.normal(0.0, scale, size=(n, d))
    else:
        clusters = _uniform_ball(rng, int(rng.integers(2, 4)), d, scale)
        picks = rng.integers(0, len(clusters), size=n)
        return clusters[picks] + rng.normal(0.0, 0.1 * scale, size=(n, d))


def _uniform_ball(
    rng: np.random.Generator, n: int, d: int, radius: float
) -> FloatArray:
    z = rng.normal(size=(n, d))
    z /= np.linalg.norm(z, axis=1)[:, None]
    return z * (radius * rng.random(n) ** (1 / d))[:, None]


def digest(points: FloatArray) -> str:
    data = np.ascontiguousarray(points, dtype=float).tobytes()
    return hashlib.sha256(data).hexdigest()[:16]


class _Sample(NamedTuple):
    generators: PointSet
    body: Region
    resampled: int


def _sample_2d(
    spec: TrialSpec,
    rng: np.random.Generator,
    accept: Callable[[PointSet, Region], bool],
    build: Callable[[PointSet, Tolerances], object] = ball_hull_2d,
    n: int | None = None,
) -> _Sample:
    for attempt in range(spec.max_resample + 1):
        pts = PointSet.from_coords(sample_generators(spec, rng, n), spec.r)
        body = build(pts, spec.tolerances)
        if isinstance(body, Region) and accept(pts, body):
            return _Sample(pts, body, attempt)
        log.debug(
            "Resampling generators (attempt %d): got %r",
            attempt + 1,
            type(body).__name__,
        )
    raise ConvergenceError(f"No usable body after {spec.max_resample} resamples")


def _any(_pts: PointSet, _body: Region) -> bool:
    return True


def _guarded(trial: Callable[[int], TrialRecord], index: int) -> TrialRecord:
    try:
        return trial(index)
    except ConvergenceError as e:
        log.warning("Trial %d could not be evaluated: %s", index, e)
        return TrialRecord(index, "", {}, math.nan, False, error=str(e))


def _run(
    name: str,
    spec: TrialSpec,
    trial: Callable[[int], TrialRecord],
    workers: int = 1,
) -> CheckReport:
    run = partial(_guarded, trial)
    if workers > 1:
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            records = list(pool.map(run, range(spec.trials)))
    else:
        records = [run(i) for i in range(spec.trials)]
    report = CheckReport(name, spec.seed, tuple(records))
    log.info(
        "%s: %d trial(s), %d violation(s), %d failure(s), worst margin %r",
        name,
        report.trials_run,
        report.violations,
        report.failures,
        report.worst_margin,
    )
    return report


def equality_band(spec: TrialSpec, scale: float) -> float:
    return max(10 * spec.tolerances.tol_check, 1e-6 * scale)


def _congruence_tol(tolerances: Tolerances) -> float:
    return 10 * tolerances.tol_geom


# --- Blaschke–Santaló-type inequality --------------------------------------


class Comparison(NamedTuple):
    """One evaluated inequality ``lhs <= rhs`` and its equality verdict"""

    lhs: float
    rhs: float
    slack: float
    near_equality: bool
    congruent: bool | None


def _dual_vk_2d(a: Region | Ball, k: int, r: float, tolerances: Tolerances) -> float:
    if isinstance(a, Ball):
        dual = dual_ball(a, r, tolerances)
        if isinstance(dual, Ball):
            return ball_intrinsic_volume(2, k, dual.radius)
        return 0.0
    return intrinsic_volumes_2d(dual_of(a, r, tolerances)).vk(k)


def _centroid_ball(a: Region | Ball, radius: float) -> Ball:
    if isinstance(a, Ball):
        return Ball(a.center, radius)
    _, c = area_centroid(a)
    return Ball(c, radius)


def evaluate_blaschke_santalo_2d(
    a: Region | Ball,
    k: int,
    r: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    band: float | None = None,
) -> Comparison:
    """
    Compare ``V_k(A^r)`` with ``V_k(B^r)`` for the ball ``B`` of the same
    area as ``A``; near equality requires ``A`` to be congruent to ``B``
    """
    area = intrinsic_volumes_2d(a).v2
    mb = matching_ball(area, 2, r, tolerances)
    lhs = _dual_vk_2d(a, k, r, tolerances)
    rhs = dual_vk(mb, k)
    slack = rhs - lhs
    if band is None:
        band = max(10 * tolerances.tol_check, 1e-6 * ball_intrinsic_volume(2, k, r))
    near = slack <= band
    congruent = None
    if near:
        dist = congruence_distance(a, _centroid_ball(a, mb.ball.radius))
        congruent = dist <= _congruence_tol(tolerances)
    return Comparison(lhs, rhs, slack, near, congruent)


def _record(
    index: int,
    pts: FloatArray,
    cmp: Comparison,
    tol: float,
    resampled: int,
    **values: float,
) -> TrialRecord:
    violated = cmp.slack < -tol or (cmp.near_equality and cmp.congruent is False)
    return TrialRecord(
        index=index,
        digest=digest(pts),
        values={"lhs": cmp.lhs, "rhs": cmp.rhs, **values},
        slack=cmp.slack,
        violated=violated,
        near_equality=cmp.near_equality,
        congruent=cmp.congruent,
        resampled=resampled,
    )


def _bs_trial_2d(spec: TrialSpec, k: int, index: int) -> TrialRecord:
    rng = trial_rng(spec, index)
    sample = _sample_2d(spec, rng, _any)
    cmp = evaluate_blaschke_santalo_2d(
        sample.body,
        k,
        spec.r,
        spec.tolerances,
        equality_band(spec, ball_intrinsic_volume(2, k, spec.r)),
    )
    return _record(
        index,
        sample.generators.array,
        cmp,
        spec.tolerances.tol_check,
        sample.resampled,
    )


def _sample_nd(spec: TrialSpec, rng: np.random.Generator) -> tuple[NdBallBody, int]:
    for attempt in range(spec.max_resample + 1):
        pts = PointSet.from_coords(sample_generators(spec, rng), spec.r)
        body = NdBallBody(pts, spec.tolerances)
        if not body.is_empty:
            return body, attempt
    raise ConvergenceError(f"No nonempty body after {spec.max_resample} resamples")


def _bs_trial_nd(spec: TrialSpec, k: int, index: int) -> TrialRecord:
    rng = trial_rng(spec, index)
    body, resampled = _sample_nd(spec, rng)
    seed = int(rng.integers(2**32))
    d = spec.dim
    vol = estimate_vd_nd(body, spec.mc_samples, seed)

    def rhs_at(v: float) -> float:
        if v <= 0:
            return ball_intrinsic_volume(d, k, spec.r)
        return dual_vk(matching_ball(v, d, spec.r, spec.tolerances), k)

    rhs = rhs_at(vol.value)
    spread = rhs_at(vol.value + vol.std_error) - rhs_at(vol.value - vol.std_error)
    rhs_err = abs(spread) / 2
    dual = dual_nd(body, spec.hull_directions, seed)
    est = estimate_vk_nd(
        dual,
        k,
        n_samples=spec.mc_samples,
        n_directions=spec.width_directions,
        seed=seed,
    )
    sigma = math.hypot(est.std_error, rhs_err)
    slack = rhs - est.value
    return TrialRecord(
        index=index,
        digest=digest(body.array),
        values={
            "lhs": est.value,
            "rhs": rhs,
            "volume": vol.value,
            "sigma": sigma,
            "seed": seed,
        },
        slack=slack,
        violated=slack < -(3 * sigma + spec.tolerances.tol_check),
        resampled=resampled,
    )


def check_blaschke_santalo(spec: TrialSpec, k: int, workers: int = 1) -> CheckReport:
    """
    For random r-ball bodies ``A``, check ``V_k(A^r) <= V_k(B^r)`` where
    ``B`` is the ball of the same volume.  In the plane everything is exact;
    in higher dimensions ``A`` is the body ``X^r`` of the generators, both
    sides are estimated, and ``A^r`` is replaced by an outer approximation, so
    the check allows three combined standard errors.
    """
    _check_k(spec, k)
    trial = _bs_trial_2d if spec.dim == 2 else _bs_trial_nd
    return _run(f"blaschke_santalo_k{k}", spec, partial(trial, spec, k), workers)


def _check_k(spec: TrialSpec, k: int) -> None:
    if not 1 <= k <= spec.dim:
        raise DomainError(f"k must satisfy 1 <= k <= {spec.dim}, got {k}")


def _require_plane(spec: TrialSpec) -> None:
    if spec.dim != 2:
        raise DomainError("This check is only available in the plane")


# --- product inequality ----------------------------------------------------


def product_profile(x: float, k: int, r: float) -> float:
    """``x^k (r − x)^k``: the product ``P_k`` over balls, up to a constant"""
    if not 0 <= x <= r:
        raise DomainError(f"x must lie in [0, {r}], got {x}")
    return x**k * (r - x) ** k


def evaluate_product_2d(
    a: Region | Ball,
    k: int,
    r: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    band: float | None = None,
) -> Comparison:
    """Compare ``V_k(A) V_k(A^r)`` with its value for the ball of radius ``r/2``"""
    lhs = intrinsic_volumes_2d(a).vk(k) * _dual_vk_2d(a, k, r, tolerances)
    rhs = ball_intrinsic_volume(2, k, r / 2) ** 2
    slack = rhs - lhs
    if band is None:
        band = max(10 * tolerances.tol_check, 1e-6 * rhs)
    near = slack <= band
    congruent = None
    if near:
        dist = congruence_distance(a, _centroid_ball(a, r / 2))
        congruent = dist <= _congruence_tol(tolerances)
    return Comparison(lhs, rhs, slack, near, congruent)


def _product_trial(spec: TrialSpec, k: int, index: int) -> TrialRecord:
    rng = trial_rng(spec, index)
    sample = _sample_2d(spec, rng, _any)
    scale = ball_intrinsic_volume(2, k, spec.r / 2) ** 2
    cmp = evaluate_product_2d(
        sample.body, k, spec.r, spec.tolerances, equality_band(spec, scale)
    )
    return _record(
        index,
        sample.generators.array,
        cmp,
        spec.tolerances.tol_check,
        sample.resampled,
    )


def check_product(spec: TrialSpec, k: int, workers: int = 1) -> CheckReport:
    """Check ``P_k(A) <= P_k(B[o, r/2])`` on random planar r-ball bodies"""
    _require_plane(spec)
    _check_k(spec, k)
    return _run(f"product_k{k}", spec, partial(_product_trial, spec, k), workers)


# --- support identity ------------------------------------------------------


def support_identity_residual_2d(
    a: Region | Ball,
    r: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    n_directions: int = SUPPORT_DIRECTIONS,
) -> float:
    """``max_u |h_A(u) + h_(A^r)(−u) − r|`` over evenly spaced directions"""
    dual: BallBodyResult | Ball
    if isinstance(a, Ball):
        dual = dual_ball(a, r, tolerances)
    else:
        dual = dual_of(a, r, tolerances)
    if isinstance(dual, Empty):
        raise DomainError("Body has an empty dual")
    worst = 0.0
    for j in range(n_directions):
        theta = 2 * math.pi * j / n_directions
        u = (math.cos(theta), math.sin(theta))
        neg = (-u[0], -u[1])
        total = support_value(a, u, tolerances) + support_value(dual, neg, tolerances)
        worst = max(worst, abs(total - r))
    return worst


def _support_trial_2d(spec: TrialSpec, index: int) -> TrialRecord:
    rng = trial_rng(spec, index)
    sample = _sample_2d(spec, rng, _any)
    residual = support_identity_residual_2d(sample.body, spec.r, spec.tolerances)
    slack = spec.tolerances.tol_check - residual
    return TrialRecord(
        index=index,
        digest=digest(sample.generators.array),
        values={"residual": residual},
        slack=slack,
        violated=slack < 0,
        resampled=sample.resampled,
    )


def _support_trial_nd(spec: TrialSpec, index: int) -> TrialRecord:
    rng = trial_rng(spec, index)
    body, resampled = _sample_nd(spec, rng)
    seed = int(rng.integers(2**32))
    residual = support_identity_residual_nd(body, spec.hull_directions, 100, seed)
    slack = spec.nd_support_tol - residual
    return TrialRecord(
        index=index,
        digest=digest(body.array),
        values={"residual": residual, "seed": seed},
        slack=slack,
        violated=slack < 0,
        resampled=resampled,
    )


def check_support_identity(spec: TrialSpec, workers: int = 1) -> CheckReport:
    """
    Check that ``h_A(u) + h_(A^r)(−u) = r`` in every direction, i.e. that
    ``A + (−A^r)`` is the ball ``B[o, r]``
    """
    trial = _support_trial_2d if spec.dim == 2 else _support_trial_nd
    return _run("support_identity", spec, partial(trial, spec), workers)


# --- set identities --------------------------------------------------------


def _sample_points(
    spec: TrialSpec, rng: np.random.Generator, pts: PointSet
) -> FloatArray:
    lo = pts.array.min(axis=0) - spec.r
    hi = pts.array.max(axis=0) + spec.r
    return lo + (hi - lo) * rng.random((SAMPLE_POINTS, 2))


def _inside_all(
    bodies: list[BallBodyResult], samples: FloatArray, tol: float
) -> np.ndarray:
    inside = np.ones(len(samples), dtype=bool)
    for b in bodies:
        inside &= contains_many_2d(b, samples, tol)
    return inside


def _not_contained(
    inner: list[BallBodyResult],
    outer: list[BallBodyResult],
    samples: FloatArray,
    tol: float,
) -> int:
    # Samples clearly inside ``inner`` that are not even loosely inside ``outer``
    strict = _inside_all(inner, samples, -tol)
    return int(np.sum(strict & ~_inside_all(outer, samples, tol)))


def _identities_trial(spec: TrialSpec, index: int) -> TrialRecord:
    rng = trial_rng(spec, index)
    tol = spec.tolerances.tol_geom
    sample = _sample_2d(spec, rng, _any, build=ball_body_2d)
    x = sample.generators
    body = sample.body
    values: dict[str, float] = {}
    failures = 0

    triple = dual_of(dual_of(body, spec.r, spec.tolerances), spec.r, spec.tolerances)
    values["triple_dual"] = hausdorff_distance(triple, body)

    hull = ball_hull_2d(x, spec.tolerances)
    hull_dual = dual_of(hull, spec.r, spec.tolerances)
    values["hull_dual"] = hausdorff_distance(hull_dual, body)

    y = PointSet.from_coords(sample_generators(spec, rng), spec.r)
    union = ball_body_2d(x.union(y), spec.tolerances)
    other = ball_body_2d(y, spec.tolerances)
    samples = _sample_points(spec, rng, x)
    union_miss = _not_contained([body, other], [union], samples, tol)
    union_miss += _not_contained([union], [body, other], samples, tol)
    values["union_mismatches"] = union_miss

    extra = sample_generators(spec, rng, 2)
    bigger = ball_body_2d(
        PointSet.from_coords(np.vstack([x.array, extra]), spec.r), spec.tolerances
    )
    order_miss = _not_contained([bigger], [body], samples, tol)
    values["order_mismatches"] = order_miss

    center, radius = minimal_enclosing_circle(x.points)
    if radius > 0:
        factor = 1.05 if index % 2 else 0.95
        c = np.array(center)
        scaled = c + (x.array - c) * (factor * spec.r / radius)
        xs = PointSet.from_coords(scaled, spec.r)
        body_empty = isinstance(ball_body_2d(xs, spec.tolerances), Empty)
        hull_empty = isinstance(ball_hull_2d(xs, spec.tolerances), Empty)
        if body_empty != hull_empty or body_empty != (factor > 1):
            failures += 1
        values["straddle_factor"] = factor
    failures += union_miss + order_miss

    slack = tol - max(values["triple_dual"], values["hull_dual"])
    return TrialRecord(
        index=index,
        digest=digest(x.array),
        values=values,
        slack=slack,
        violated=slack < 0 or failures > 0,
        resampled=sample.resampled,
    )


def check_identities(spec: TrialSpec, workers: int = 1) -> CheckReport:
    """
    Check the set identities of the r-ball body operation on random planar
    generator sets: ``((X^r)^r)^r = X^r``, ``(X ∪ Y)^r = X^r ∩ Y^r``, order
    reversal, ``X^r = (conv_r X)^r``, and ``conv_r X = ∅ ⟺ X^r = ∅``
    """
    _require_plane(spec)
    return _run("identities", spec, partial(_identities_trial, spec), workers)


# --- homothety fitting -----------------------------------------------------


class HomothetyFit(NamedTuple):
    generators: PointSet
    scale: float
    value: float
    residual: float


def fit_homothety(
    points: FloatArray,
    r: float,
    target: float,
    measure: Callable[[PointSet], float],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> HomothetyFit:
    """
    Scale ``points`` about their centroid so that ``measure`` (a volume of
    the generated body, increasing in the scale) hits ``target``.  The scale
    is bracketed between zero and the value at which the generators'
    enclosing ball reaches radius ``r``.
    """
    pts = np.asarray(points, dtype=float)
    centroid = pts.mean(axis=0)
    if pts.shape[1] == 2:
        _, radius = minimal_enclosing_circle([tuple(p) for p in pts])
    else:
        _, radius = minimal_enclosing_ball(pts)
    if radius <= 0:
        raise DomainError("Cannot rescale a configuration of coincident points")
    # The enclosing radius scales linearly about any center
    hi = (r / radius) * (1 - 0.1 * tolerances.tol_geom / r)
    lo = 1e-4 * hi

    def at(scale: float) -> PointSet:
        coords = centroid + scale * (pts - centroid)
        return PointSet.from_coords(coords, r, tolerances.tol_merge)

    def f(scale: float) -> float:
        return measure(at(scale)) - target

    # Bodies at the ends of the bracket are nearly a point or nearly empty;
    # if one cannot be measured, step the end inward
    hi, f_hi = _bracket_end(f, [hi] + [hi * (1 - 10.0**-j) for j in (6, 5, 4, 3)])
    if f_hi < 0:
        raise ConvergenceError("Target volume is not reachable by rescaling")
    lo, f_lo = _bracket_end(f, [lo * 10**j for j in range(3)])
    if f_lo > 0:
        raise ConvergenceError("Target volume is below the smallest rescaling")
    root = brentq(
        f, lo, hi, xtol=1e-15 * hi, rtol=4 * np.finfo(float).eps, maxiter=200
    )
    scale = float(root)
    fitted = at(scale)
    value = measure(fitted)
    return HomothetyFit(fitted, scale, value, abs(value - target))


def _bracket_end(
    f: Callable[[float], float], scales: list[float]
) -> tuple[float, float]:
    for scale in scales[:-1]:
        try:
            return scale, f(scale)
        except ConvergenceError as e:
            log.debug("Could not measure the body at scale %r: %s", scale, e)
    return scales[-1], f(scales[-1])


def hull_area(x: PointSet) -> float:
    return intrinsic_volumes_2d(ball_hull_2d(x)).v2


def fit_area(
    points: FloatArray,
    r: float,
    v: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[HomothetyFit, Region]:
    """
    Rescale a planar configuration so that its r-ball hull has area ``v``
    (within ``1e-6·v``), returning the fit and the hull
    """
    if not 0 < v < math.pi * r * r:
        raise DomainError(f"Target area must satisfy 0 < v < πr², got {v}")
    fit = fit_homothety(points, r, v, hull_area, tolerances)
    hull = ball_hull_2d(fit.generators, tolerances)
    if fit.residual > 1e-6 * v or not isinstance(hull, Region):
        raise ConvergenceError(f"Area fit missed the target by {fit.residual}")
    return fit, hull


# --- Mahler-type inequality in the plane -----------------------------------


def lens_dual_vk(r: float, v: float, k: int) -> float:
    """``V_k(L^r)`` for the lens ``L`` of area ``v``, in closed form"""
    return Lens(r, lens_gap_for_area(r, v)).dual_volumes.vk(k)


def _mahler_trial(spec: TrialSpec, k: int, v: float, index: int) -> TrialRecord:
    rng = trial_rng(spec, index)
    baseline = lens_dual_vk(spec.r, v, k)
    n_min = max(2, spec.n_min)
    discarded = 0
    for _ in range(spec.max_resample + 1):
        n = int(rng.integers(n_min, max(n_min, spec.n_max) + 1))
        pts = sample_generators(spec, rng, n)
        try:
            fit, hull = fit_area(pts, spec.r, v, spec.tolerances)
        except (ConvergenceError, DomainError) as e:
            log.debug("Discarding trial %d configuration: %s", index, e)
            discarded += 1
            continue
        break
    else:
        raise ConvergenceError(f"Area targeting failed {discarded} times")
    lhs = intrinsic_volumes_2d(dual_of(hull, spec.r, spec.tolerances)).vk(k)
    slack = lhs - baseline
    near = slack <= equality_band(spec, baseline)
    congruent = None
    if near:
        lens = make_lens(spec.r, lens_gap_for_area(spec.r, v))
        congruent = congruence_distance(hull, lens) <= _congruence_tol(spec.tolerances)
    cmp = Comparison(lhs, baseline, slack, near, congruent)
    return _record(
        index,
        fit.generators.array,
        cmp,
        spec.tolerances.tol_check,
        discarded,
        area=fit.value,
    )


def check_mahler_2d(spec: TrialSpec, k: int, v: float, workers: int = 1) -> CheckReport:
    """
    Check ``V_k(A^r) >= V_k(L^r)`` for random planar r-ball bodies ``A``
    rescaled to area ``v``, where ``L`` is the lens of area ``v``
    """
    _require_plane(spec)
    if k not in (1, 2):
        raise DomainError(f"k must be 1 or 2, got {k}")
    if not 0 < v < math.pi * spec.r**2:
        raise DomainError(f"Target area must satisfy 0 < v < πr², got {v}")
    return _run(f"mahler2d_k{k}", spec, partial(_mahler_trial, spec, k, v), workers)


# --- Brunn–Minkowski chain and reverse isoperimetric inequality -------------


def evaluate_brunn_minkowski_2d(
    a: Region | Ball, k: int, r: float, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """Slack of ``V_k(A)^(1/k) + V_k(A^r)^(1/k) <= V_k(B[o, r])^(1/k)``"""
    own = intrinsic_volumes_2d(a).vk(k)
    lhs = own ** (1 / k) + _dual_vk_2d(a, k, r, tolerances) ** (1 / k)
    return ball_intrinsic_volume(2, k, r) ** (1 / k) - lhs


def _bm_trial(spec: TrialSpec, k: int, index: int) -> TrialRecord:
    rng = trial_rng(spec, index)
    sample = _sample_2d(spec, rng, _any)
    slack = evaluate_brunn_minkowski_2d(sample.body, k, spec.r, spec.tolerances)
    tol = spec.tolerances.tol_check
    # For k = 1 the chain is an identity in the plane
    violated = abs(slack) > tol if k == 1 else slack < -tol
    return TrialRecord(
        index=index,
        digest=digest(sample.generators.array),
        values={"slack": slack},
        slack=-abs(slack) if k == 1 else slack,
        violated=violated,
        resampled=sample.resampled,
    )


def check_brunn_minkowski(spec: TrialSpec, k: int, workers: int = 1) -> CheckReport:
    _require_plane(spec)
    if k not in (1, 2):
        raise DomainError(f"k must be 1 or 2, got {k}")
    return _run(f"brunn_minkowski_k{k}", spec, partial(_bm_trial, spec, k), workers)


def _not_disk(_pts: PointSet, body: Region) -> bool:
    return not body.polygon.full_disk


def evaluate_reverse_isoperimetric_2d(a: Region, r: float) -> tuple[float, float]:
    """
    Slacks of ``V_1(A) <= V_1(L)`` for the lens ``L`` of the same area and of
    ``V_2(L') <= V_2(A)`` for the lens ``L'`` of the same half-perimeter
    """
    vk = intrinsic_volumes_2d(a)
    same_area = Lens(r, lens_gap_for_area(r, vk.v2))
    same_perimeter = Lens(r, lens_gap_for_half_perimeter(r, vk.v1))
    return same_area.half_perimeter - vk.v1, vk.v2 - same_perimeter.area


def _reverse_trial(spec: TrialSpec, index: int) -> TrialRecord:
    rng = trial_rng(spec, index)
    sample = _sample_2d(spec, rng, _not_disk)
    perimeter_slack, area_slack = evaluate_reverse_isoperimetric_2d(sample.body, spec.r)
    slack = min(perimeter_slack, area_slack)
    return TrialRecord(
        index=index,
        digest=digest(sample.generators.array),
        values={"perimeter_slack": perimeter_slack, "area_slack": area_slack},
        slack=slack,
        violated=slack < -spec.tolerances.tol_check,
        resampled=sample.resampled,
    )


def check_reverse_isoperimetric(spec: TrialSpec, workers: int = 1) -> CheckReport:
    """
    Check that among planar r-ball bodies of a given area the lens has the
    largest perimeter, and dually the smallest area for a given perimeter
    """
    _require_plane(spec)
    return _run("reverse_isoperimetric", spec, partial(_reverse_trial, spec), workers)


__all__ = [
    "CheckReport",
    "Comparison",
    "GeneratorLaw",
    "HomothetyFit",
    "TrialRecord",
    "TrialSpec",
    "check_blaschke_santalo",
    "check_brunn_minkowski",
    "check_identities",
    "check_mahler_2d",
    "check_product",
    "check_reverse_isoperimetric",
    "check_support_identity",
    "evaluate_blaschke_santalo_2d",
    "evaluate_brunn_minkowski_2d",
    "evaluate_product_2d",
    "evaluate_reverse_isoperimetric_2d",
    "fit_area",
    "fit_homothety",
    "lens_dual_vk",
    "product_profile",
    "sample_generators",
    "support_identity_residual_2d",
]

