"""
Derivative-free search for r-ball bodies of a given volume minimizing an
intrinsic volume of their dual.  In the plane the lens is the known
minimizer; in three dimensions the search is exploratory.
"""

from __future__ import annotations
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import logging
import math
import multiprocessing
from typing import Any, NamedTuple
import numpy as np
from scipy.optimize import minimize as scipy_minimize
from .core import (
    ArcPolygon,
    ConvergenceError,
    DomainError,
    Empty,
    FloatArray,
    PointSet,
    Region,
    ball_intrinsic_volume,
    normalize_pose,
    omega,
)
from .nd import (
    NdBallBody,
    dual_nd,
    estimate_v1_nd,
    gap_for_volume_3d,
    lens_volumes_3d,
    radial_volume_nd,
    spindle_volumes_3d,
)
from .plane import (
    ball_hull_2d,
    dual_2d,
    dual_of,
    intrinsic_volumes_2d,
    lens_gap_for_area,
    make_lens,
)
from .verify import fit_homothety

log = logging.getLogger(__name__)

#: Restarts that cannot find a feasible random start within this many draws
#: are reported as infeasible
START_ATTEMPTS = 20


@dataclass(frozen=True)
class SearchConfig:
    """
    Parameters of a search.  ``initial_scale`` is the Nelder–Mead simplex
    edge relative to ``r``; it shrinks by ``simplex_shrink`` at each penalty
    stage.  ``max_evals`` bounds the objective evaluations per restart.
    """

    v: float
    dim: int = 2
    r: float = 1.0
    k: int = 1
    n: int = 4
    restarts: int = 20
    max_evals: int = 3000
    seed: int = 0
    initial_scale: float = 0.1
    simplex_shrink: float = 0.3
    adaptive: bool = True
    xatol: float = 1e-10
    fatol: float = 1e-13
    penalties: tuple[float, ...] = (1e2, 1e4, 1e6, 1e8)
    hull_directions: int = 256
    volume_directions: int = 4096
    width_directions: int = 128

    def __post_init__(self) -> None:
        if self.dim not in (2, 3):
            raise DomainError(f"Search dimension must be 2 or 3, got {self.dim}")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise DomainError(f"Radius must be positive, got {self.r}")
        bound = omega(self.dim) * self.r**self.dim
        if not 0 < self.v < bound:
            raise DomainError(
                f"Target volume must satisfy 0 < v < {bound!r} (the volume of"
                f" B[o, r]), got {self.v}"
            )
        if self.n < 2:
            raise DomainError(f"Need at least 2 generators, got {self.n}")
        if not 1 <= self.k <= self.dim:
            raise DomainError(f"k must satisfy 1 <= k <= {self.dim}, got {self.k}")
        if self.dim == 3 and self.k == 2:
            raise DomainError("The three-dimensional search supports k in {1, 3}")
        if self.restarts < 1 or self.max_evals < 1:
            raise DomainError("restarts and max_evals must be positive")
        if not self.penalties or any(w <= 0 for w in self.penalties):
            raise DomainError(
                "Penalty schedule must be a nonempty list of positive weights"
            )
        if self.seed < 0:
            raise DomainError("Seed must be nonnegative")

    @property
    def n_params(self) -> int:
        return 1 + self.dim * (self.n - 2)

    @property
    def exploratory(self) -> bool:
        return self.dim > 2


# --- parametrization -------------------------------------------------------


def expand(config: SearchConfig, params: FloatArray) -> FloatArray:
    """
    Generator coordinates from the reduced parameters: the first generator is
    the origin and the second lies on the first coordinate axis
    """
    pts = np.zeros((config.n, config.dim))
    pts[1, 0] = params[0]
    pts[2:] = np.asarray(params[1:], dtype=float).reshape(config.n - 2, config.dim)
    return pts


def reduce(config: SearchConfig, pts: FloatArray) -> FloatArray:
    """Reduced parameters of a configuration, up to congruence"""
    moved = np.asarray(pts, dtype=float) - pts[0]
    a = moved[1]
    length = float(np.linalg.norm(a))
    if length > 0:
        target = np.zeros(config.dim)
        target[0] = length
        w = a - target
        nw = float(np.linalg.norm(w))
        if nw > 1e-15 * length:
            w /= nw
            moved = moved - 2 * np.outer(moved @ w, w)
    return np.concatenate([[moved[1, 0]], moved[2:].ravel()])


# --- objective -------------------------------------------------------------


class Measured(NamedTuple):
    volume: float
    dual_vk: float


def _coords(config: SearchConfig, g: FloatArray) -> FloatArray:
    return np.asarray(g, dtype=float).reshape(config.n, config.dim)


def measure(config: SearchConfig, x: PointSet) -> Measured | None:
    """
    ``V_d(A)`` and ``V_k(A^r)`` for ``A = conv_r X``, or `None` when the hull
    is empty
    """
    if config.dim == 2:
        hull = ball_hull_2d(x)
        if isinstance(hull, Empty):
            return None
        return Measured(
            intrinsic_volumes_2d(hull).v2,
            intrinsic_volumes_2d(dual_of(hull, config.r)).vk(config.k),
        )
    body = NdBallBody(x)
    if body.is_empty:
        return None
    center = body.interior_point
    approx = dual_nd(body, config.hull_directions, config.seed)
    n_dirs, seed = config.volume_directions, config.seed
    volume = radial_volume_nd(approx, n_dirs, seed, center).value
    if config.k == config.dim:
        dual = radial_volume_nd(body, n_dirs, seed, center).value
    else:
        dual = estimate_v1_nd(body, config.width_directions, seed=seed).value
    return Measured(volume, dual)


def objective(
    config: SearchConfig, g: FloatArray, penalty: float | None = None
) -> float:
    """
    ``V_k(A^r) + penalty·(V_d(A) − v)²`` for ``A = conv_r`` of the generators
    with flattened coordinates ``g``.  An empty hull scores the finite
    sentinel ``2·V_k(B[o, r]) + penalty·v²``.
    """
    w = config.penalties[0] if penalty is None else penalty
    try:
        m = measure(config, PointSet.from_coords(_coords(config, g), config.r))
    except (ConvergenceError, DomainError) as e:
        log.debug("Objective fell back to the sentinel: %s", e)
        m = None
    if m is None:
        ceiling = 2 * ball_intrinsic_volume(config.dim, config.k, config.r)
        return ceiling + w * config.v**2
    return m.dual_vk + w * (m.volume - config.v) ** 2


def _volume_of(config: SearchConfig, x: PointSet) -> float:
    m = measure(config, x)
    return 0.0 if m is None else m.volume


def project_to_volume(
    config: SearchConfig, pts: FloatArray
) -> tuple[FloatArray, float]:
    """
    Rescale a configuration about its centroid so that its hull has volume
    ``v``; returns the coordinates (with no generators merged) and the
    residual ``|V_d(A) − v|``
    """
    fit = fit_homothety(pts, config.r, config.v, lambda x: _volume_of(config, x))
    centroid = pts.mean(axis=0)
    return centroid + fit.scale * (pts - centroid), fit.residual


# --- restarts --------------------------------------------------------------


@dataclass(frozen=True)
class RestartOutcome:
    index: int
    coords: FloatArray | None
    value: float
    residual: float
    trace: tuple[float, ...]
    evaluations: int

    def feasible(self, v: float) -> bool:
        return self.coords is not None and self.residual <= 1e-6 * v


def _random_start(
    config: SearchConfig, rng: np.random.Generator
) -> tuple[FloatArray, float] | None:
    for _ in range(START_ATTEMPTS):
        z = rng.normal(size=(config.n, config.dim))
        z /= np.linalg.norm(z, axis=1)[:, None]
        pts = z * (0.5 * config.r * rng.random(config.n) ** (1 / config.dim))[:, None]
        try:
            coords, residual = project_to_volume(config, pts)
        except (ConvergenceError, DomainError) as e:
            log.debug("Rejected start configuration: %s", e)
            continue
        if residual <= 1e-6 * config.v:
            return coords, residual
    return None


def run_restart(config: SearchConfig, index: int) -> RestartOutcome:
    """One multi-stage penalty descent from a seeded random start"""
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, index]))
    found = _random_start(config, rng)
    if found is None:
        log.info("Restart %d: no feasible start", index)
        return RestartOutcome(index, None, math.inf, math.inf, (), 0)
    start, best_residual = found
    params = reduce(config, start)
    best_coords = expand(config, params)
    best = objective(config, best_coords.ravel(), 0.0)
    trace = []
    evaluations = 0
    per_stage = max(1, config.max_evals // len(config.penalties))
    for stage, w in enumerate(config.penalties):
        edge = config.initial_scale * config.r * config.simplex_shrink**stage
        simplex = np.vstack([params, params + edge * np.eye(len(params))])
        res = scipy_minimize(
            lambda p, w=w: objective(config, expand(config, p).ravel(), w),
            params,
            method="Nelder-Mead",
            options={
                "maxfev": per_stage,
                "xatol": config.xatol,
                "fatol": config.fatol,
                "initial_simplex": simplex,
                "adaptive": config.adaptive,
            },
        )
        evaluations += int(res.nfev)
        try:
            coords, residual = project_to_volume(config, expand(config, res.x))
        except (ConvergenceError, DomainError) as e:
            log.debug("Restart %d stage %d: projection failed: %s", index, stage, e)
            trace.append(best)
            continue
        params = reduce(config, coords)
        value = objective(config, coords.ravel(), 0.0)
        if residual <= 1e-6 * config.v and value < best:
            best, best_coords, best_residual = value, coords, residual
        trace.append(best)
        log.debug("Restart %d stage %d (penalty %g): %r", index, stage, w, best)
    log.info(
        "Restart %d: best objective %r after %d evaluations",
        index,
        best,
        evaluations,
    )
    return RestartOutcome(
        index, best_coords, best, best_residual, tuple(trace), evaluations
    )


# --- baselines -------------------------------------------------------------


def lens_baseline(r: float, v: float, k: int) -> float:
    """``V_k(L^r)`` for the planar lens ``L`` of area ``v``"""
    if k not in (1, 2):
        raise DomainError(f"k must be 1 or 2, got {k}")
    if not 0 < v < math.pi * r * r:
        raise DomainError(f"Lens area must satisfy 0 < v < πr², got {v}")
    return intrinsic_volumes_2d(dual_2d(make_lens(r, lens_gap_for_area(r, v)))).vk(k)


def baselines_3d(r: float, v: float, k: int) -> dict[str, float]:
    """
    ``V_k(A^r)`` for the two-ball lens and for the spindle of two points,
    each of volume ``v``
    """
    t = gap_for_volume_3d(r, v)
    s = gap_for_volume_3d(r, v, spindle=True)
    return {
        "lens": spindle_volumes_3d(r, t)[k - 1],
        "spindle": lens_volumes_3d(r, s)[k - 1],
    }


# --- driver ----------------------------------------------------------------


@dataclass(frozen=True)
class SearchResult:
    config: SearchConfig
    best_generators: PointSet
    best_coordinates: FloatArray
    best_restart: int
    best_objective: float
    constraint_residual: float
    baseline: float
    baselines: dict[str, float]
    trace: tuple[tuple[float, ...], ...]
    normalized_shape: ArcPolygon | None
    evaluations: int

    @property
    def gap(self) -> float:
        return self.best_objective - self.baseline

    @property
    def exploratory(self) -> bool:
        return self.config.exploratory

    def for_json(self) -> dict[str, Any]:
        c = self.config
        return {
            "config": {
                "dim": c.dim,
                "r": c.r,
                "k": c.k,
                "v": c.v,
                "n": c.n,
                "restarts": c.restarts,
                "max_evals": c.max_evals,
                "seed": c.seed,
                "penalties": list(c.penalties),
            },
            "exploratory": self.exploratory,
            "best_generators": [list(p) for p in self.best_coordinates.tolist()],
            "best_restart": self.best_restart,
            "best_objective": self.best_objective,
            "constraint_residual": self.constraint_residual,
            "baseline": self.baseline,
            "baselines": self.baselines,
            "gap": self.gap,
            "trace": [list(t) for t in self.trace],
            "evaluations": self.evaluations,
        }


def minimize(config: SearchConfig, workers: int = 1) -> SearchResult:
    """
    Run ``config.restarts`` independent penalty descents and return the best
    feasible configuration.  The result is independent of ``workers``.
    """
    if workers > 1:
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            indices = range(config.restarts)
            outcomes = list(
                pool.map(run_restart, [config] * config.restarts, indices)
            )
    else:
        outcomes = [run_restart(config, i) for i in range(config.restarts)]
    feasible = [o for o in outcomes if o.feasible(config.v)]
    if not feasible:
        raise ConvergenceError(f"All {config.restarts} restart(s) ended infeasible")
    best = min(feasible, key=lambda o: (o.value, o.index))
    assert best.coords is not None
    generators = PointSet.from_coords(best.coords, config.r)
    if config.dim == 2:
        baselines = {"lens": lens_baseline(config.r, config.v, config.k)}
        hull = ball_hull_2d(generators)
        shape = normalize_pose(hull) if isinstance(hull, Region) else None
    else:
        baselines = baselines_3d(config.r, config.v, config.k)
        shape = None
    return SearchResult(
        config=config,
        best_generators=generators,
        best_coordinates=best.coords,
        best_restart=best.index,
        best_objective=best.value,
        constraint_residual=best.residual,
        baseline=min(baselines.values()),
        baselines=baselines,
        trace=tuple(o.trace for o in outcomes),
        normalized_shape=shape,
        evaluations=sum(o.evaluations for o in outcomes),
    )


