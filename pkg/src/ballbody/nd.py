"""
Sampled r-ball bodies in dimension ``d >= 2``: membership, exact projection
and support points found on the spheres where generator spheres meet,
Monte-Carlo / quasi-Monte-Carlo estimators for the intrinsic volumes, plus the
closed forms for the matching ball and the three-dimensional lens and spindle.
"""

from __future__ import annotations
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from itertools import combinations
import logging
import math
from typing import NamedTuple
import numpy as np
from scipy.optimize import bisect, minimize, nnls
from scipy.stats import norm, qmc
from .core import (
    DEFAULT_TOLERANCES,
    Ball,
    ConvergenceError,
    DomainError,
    Empty,
    FloatArray,
    PointSet,
    SinglePoint,
    Tolerances,
    _omega,
    ball_intrinsic_volume,
    dual_ball,
    omega,
)

log = logging.getLogger(__name__)

#: Number of samples drawn per Monte-Carlo chunk; each chunk has its own
#: child seed so results do not depend on the worker count
CHUNK_SIZE = 1 << 16

#: Above this many generators, support points are computed by constraint
#: generation over the farthest generators
ACTIVE_SET_LIMIT = 12

#: Anchor moves tried at one active-set size before the size doubles
ROUNDS_PER_SIZE = 3

#: Smallest hit-or-miss sample budget accepted for a volume estimate
MIN_SAMPLES = 1000

#: Rows of a point/generator distance matrix computed at once
_BLOCK_ELEMENTS = 1 << 22


class Method(Enum):
    MONTE_CARLO = "monte_carlo"
    MEAN_WIDTH = "mean_width"
    STEINER_FIT = "steiner_fit"
    RADIAL = "radial"


@dataclass(frozen=True)
class VkEstimate:
    """An estimate of the intrinsic volume ``V_k`` with its standard error"""

    k: int
    value: float
    std_error: float
    method: Method
    samples: int
    seed: int | None

    def for_json(self) -> dict:
        return {
            "k": self.k,
            "value": self.value,
            "std_error": self.std_error,
            "method": self.method.value,
            "samples": self.samples,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class NdBallBody:
    """
    The r-ball body ``X^r``, the intersection of the radius-``r`` balls
    centered at the generators, represented only by its generators
    """

    generators: PointSet
    tolerances: Tolerances = DEFAULT_TOLERANCES

    @property
    def dim(self) -> int:
        return self.generators.dim

    @property
    def radius(self) -> float:
        return self.generators.radius

    @property
    def array(self) -> FloatArray:
        return self.generators.array

    @cached_property
    def bounding_box(self) -> tuple[FloatArray, FloatArray]:
        """Intersection of the bounding boxes of the generating balls"""
        g = self.array
        return g.max(axis=0) - self.radius, g.min(axis=0) + self.radius

    @cached_property
    def enclosing_ball(self) -> tuple[FloatArray, float]:
        """Center and radius of the minimal enclosing ball of the generators"""
        return minimal_enclosing_ball(self.array)

    @property
    def is_empty(self) -> bool:
        return self.enclosing_ball[1] > self.radius + self.tolerances.tol_geom

    @property
    def interior_point(self) -> FloatArray:
        """A point of the body; strictly interior whenever the body has interior"""
        if self.is_empty:
            raise DomainError("Empty body has no interior point")
        return self.enclosing_ball[0]


def minimal_enclosing_ball(points: FloatArray) -> tuple[FloatArray, float]:
    """
    Minimal enclosing ball of a point cloud, found by minimizing the largest
    squared distance with SLSQP.  The returned radius is the exact largest
    distance from the returned center.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) == 1:
        return pts[0].copy(), 0.0
    c0 = pts.mean(axis=0)
    s0 = float(np.max(np.sum((pts - c0) ** 2, axis=1)))
    d = pts.shape[1]

    def cons(z: FloatArray) -> FloatArray:
        return z[d] - np.sum((pts - z[:d]) ** 2, axis=1)

    def cons_jac(z: FloatArray) -> FloatArray:
        jac = np.empty((len(pts), d + 1))
        jac[:, :d] = 2 * (pts - z[:d])
        jac[:, d] = 1.0
        return jac

    grad = np.zeros(d + 1)
    grad[d] = 1.0
    res = minimize(
        lambda z: z[d],
        np.append(c0, s0),
        jac=lambda z: grad,
        method="SLSQP",
        constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
        options={"ftol": 1e-15, "maxiter": 500},
    )
    center = res.x[:d] if np.all(np.isfinite(res.x)) else c0
    radius = float(np.sqrt(np.max(np.sum((pts - center) ** 2, axis=1))))
    if radius > math.sqrt(s0):
        center, radius = c0, math.sqrt(s0)
    return center, radius


def _contains_batch(
    pts: FloatArray, gens: FloatArray, r: float, tol: float
) -> np.ndarray:
    out = np.empty(len(pts), dtype=bool)
    bound = (r + tol) ** 2
    block = max(1, _BLOCK_ELEMENTS // max(1, len(gens)))
    for lo in range(0, len(pts), block):
        sub = pts[lo : lo + block]
        sq = np.sum((sub[:, None, :] - gens[None, :, :]) ** 2, axis=2)
        out[lo : lo + block] = np.all(sq <= bound, axis=1)
    return out


def membership_nd(body: NdBallBody, p: Sequence[float]) -> bool:
    """Whether ``p`` lies within ``r + tol_geom`` of every generator"""
    pt = np.asarray(p, dtype=float)
    if pt.shape != (body.dim,):
        raise DomainError(f"Point must have dimension {body.dim}")
    return bool(
        _contains_batch(pt[None], body.array, body.radius, body.tolerances.tol_geom)[0]
    )


class _FaceSphere(NamedTuple):
    center: FloatArray
    radius: FloatArray
    edges: FloatArray | None
    gram: FloatArray | None
    ok: np.ndarray


def _faces(size: int, d: int) -> list[list[int]]:
    """Generator index sets that can be active together at a boundary point"""
    return [
        list(face)
        for k in range(1, min(size, d) + 1)
        for face in combinations(range(size), k)
    ]


def _face_sphere(g: FloatArray, r: float, tol: float) -> _FaceSphere:
    # g has shape (B, k, d).  The k generator spheres meet in a sphere of
    # dimension d - k centered at the circumcenter of the generators, in the
    # orthogonal complement of their affine hull.
    g0 = g[:, 0, :]
    if g.shape[1] == 1:
        ones = np.ones(len(g), dtype=bool)
        return _FaceSphere(g0, np.full(len(g), r), None, None, ones)
    edges = g[:, 1:, :] - g0[:, None, :]
    sv = np.linalg.svd(edges, compute_uv=False)
    ok = sv[:, -1] > 1e-12 * np.maximum(sv[:, 0], r)
    gram = edges @ np.swapaxes(edges, 1, 2)
    gram[~ok] = np.eye(g.shape[1] - 1)
    half = 0.5 * np.diagonal(gram, axis1=1, axis2=2)
    alpha = np.linalg.solve(gram, half[..., None])
    center = g0 + (np.swapaxes(edges, 1, 2) @ alpha)[..., 0]
    rho2 = r * r - np.sum((center - g0) ** 2, axis=1)
    ok &= rho2 >= -2 * r * tol
    return _FaceSphere(center, np.sqrt(np.maximum(rho2, 0.0)), edges, gram, ok)


def _face_point(s: _FaceSphere, w: FloatArray) -> tuple[FloatArray, np.ndarray]:
    # The point of the sphere farthest along w.  When w has no component
    # normal to the face the sphere must have collapsed to its center.
    if s.edges is None or s.gram is None:
        perp = w
    else:
        beta = np.linalg.solve(s.gram, s.edges @ w[..., None])
        perp = w - (np.swapaxes(s.edges, 1, 2) @ beta)[..., 0]
    size = np.linalg.norm(perp, axis=1)
    scale = np.maximum(np.linalg.norm(w, axis=1), 1.0)
    ok = s.ok & ((s.radius == 0) | (size > 1e-12 * scale))
    unit = np.divide(
        perp, size[:, None], out=np.zeros_like(perp), where=size[:, None] > 0
    )
    return s.center + s.radius[:, None] * unit, ok


def _best_on_faces(
    centers: FloatArray,
    r: float,
    targets: FloatArray,
    nearest: bool,
    tol: float,
) -> FloatArray:
    """
    For each row of ``targets``, the maximizer of ``<u, x>`` (or, with
    ``nearest``, the point nearest to ``y``) over the intersection of the
    radius-``r`` balls about ``centers``.  ``centers`` has shape ``(1, K, d)``
    (shared by all rows) or ``(m, K, d)`` (one generator subset per row).

    The optimum is attained on the sphere where the balls of some affinely
    independent set of at most ``d`` active generators meet, and on that
    sphere it has a closed form; the answer is the best feasible candidate
    over all such sets.
    """
    m, d = targets.shape
    best = np.full((m, d), np.nan)
    score = np.full(m, np.inf)
    for face in _faces(centers.shape[1], d):
        s = _face_sphere(centers[:, face, :], r, tol)
        w = targets - s.center if nearest else targets
        x, ok = _face_point(s, w)
        reach = np.linalg.norm(x[:, None, :] - centers, axis=2)
        ok &= np.max(reach, axis=1) <= r + tol
        if nearest:
            value = np.sum((x - targets) ** 2, axis=1)
        else:
            value = -np.einsum("ij,ij->i", x, targets)
        better = ok & (value < score)
        best[better] = x[better]
        score[better] = value[better]
    missing = int(np.sum(~np.isfinite(score)))
    if missing:
        raise ConvergenceError(f"No feasible boundary point found for {missing} row(s)")
    return best


def _solve_on_faces(
    gens: FloatArray,
    r: float,
    targets: FloatArray,
    nearest: bool,
    tol: float,
    start: FloatArray | None = None,
) -> FloatArray:
    # Above ACTIVE_SET_LIMIT generators, solve over the generators farthest
    # from an anchor point.  Rows whose answer violates another generator move
    # their anchor to that answer, so the violated generators join the
    # subset; the subset doubles after every few such rounds.
    n = len(gens)
    if n <= ACTIVE_SET_LIMIT:
        return _best_on_faces(gens[None], r, targets, nearest, tol)
    if nearest or start is None:
        anchor = targets.copy()
    else:
        anchor = start + 4 * r * targets
    x = np.empty_like(targets)
    todo = np.arange(len(targets))
    size = ACTIVE_SET_LIMIT
    rounds = 0
    while len(todo):
        if size >= n:
            x[todo] = _best_on_faces(gens[None], r, targets[todo], nearest, tol)
            break
        near = _farthest(anchor[todo], gens, size)
        sub = _best_on_faces(gens[near], r, targets[todo], nearest, tol)
        fine = np.max(_distances(sub, gens), axis=1) <= r + tol
        x[todo[fine]] = sub[fine]
        anchor[todo[~fine]] = sub[~fine]
        todo = todo[~fine]
        rounds += 1
        if len(todo) and rounds % ROUNDS_PER_SIZE == 0:
            size = min(2 * size, n)
            log.debug("Growing active set to %d for %d row(s)", size, len(todo))
    return x


def _project(
    y: FloatArray,
    gens: FloatArray,
    r: float,
    tolerances: Tolerances,
) -> FloatArray:
    """Nearest point of the intersection of radius-``r`` balls to each row"""
    x = y.copy()
    outside = np.max(_distances(y, gens), axis=1) > r
    if np.any(outside):
        x[outside] = _solve_on_faces(
            gens, r, y[outside], nearest=True, tol=tolerances.tol_geom
        )
    return x


def project_nd(body: NdBallBody, pts: FloatArray) -> FloatArray:
    """Nearest points of the body to each row of ``pts``"""
    if body.is_empty:
        raise DomainError("Cannot project onto an empty body")
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    return _project(pts, body.array, body.radius, body.tolerances)


def distance_nd(body: NdBallBody, pts: FloatArray) -> FloatArray:
    """Euclidean distance from each row of ``pts`` to the body"""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if len(body.generators) == 1:
        gap = np.linalg.norm(pts - body.array[0], axis=1) - body.radius
        return np.maximum(gap, 0.0)
    return np.linalg.norm(pts - project_nd(body, pts), axis=1)


def _dual_gap(
    gens: FloatArray, r: float, u: FloatArray, x: FloatArray, active: np.ndarray
) -> float:
    # For multipliers lam >= 0 the maximum over y of the Lagrangian
    # <u, y> - 1/2 sum lam_i (|y - g_i|^2 - r^2) bounds h(u) from above.  The
    # multipliers are fitted to u = sum lam_i (x - g_i) over the active
    # generators.
    g = gens[active]
    if not len(g):
        return math.inf
    lam, _ = nnls((x - g).T, u)
    total = float(lam.sum())
    if total <= 0:
        return math.inf
    y = (u + lam @ g) / total
    bound = float(u @ y) - 0.5 * float(lam @ (np.sum((y - g) ** 2, axis=1) - r * r))
    return bound - float(u @ x)


def support_gaps(body: NdBallBody, dirs: FloatArray, x: FloatArray) -> FloatArray:
    """
    Certified upper bounds on ``h_A(u) − <x, u>`` for boundary points ``x``
    of the body and unit directions ``u``
    """
    gens = body.array
    r = body.radius
    reach = _distances(x, gens)
    gaps = np.empty(len(dirs))
    for i, (u, p) in enumerate(zip(dirs, x)):
        gaps[i] = _dual_gap(gens, r, u, p, reach[i] >= r * (1 - 1e-12))
        if gaps[i] > 1e-12:
            loose = reach[i] >= r - body.tolerances.tol_geom
            gaps[i] = min(gaps[i], _dual_gap(gens, r, u, p, loose))
    return gaps


def support_points_nd(
    body: NdBallBody,
    dirs: FloatArray,
    tol: float = 1e-9,
) -> FloatArray:
    """
    Maximizers of ``<x, u>`` over the body for each unit row ``u`` of
    ``dirs``, certified by a Lagrangian dual bound to within ``tol`` of the
    support value.  For large generator sets only the generators farthest
    from an anchor point are enforced, growing that subset until no generator
    is violated.
    """
    if body.is_empty:
        raise DomainError("The empty body has no support function")
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    norms = np.linalg.norm(dirs, axis=1)
    if dirs.shape[1] != body.dim:
        raise DomainError(f"Directions must have dimension {body.dim}")
    if np.any(norms == 0):
        raise DomainError("Direction must be nonzero")
    if np.any(np.abs(norms - 1) > body.tolerances.tol_geom):
        raise DomainError("Directions must be unit vectors")
    x = _solve_on_faces(
        body.array,
        body.radius,
        dirs,
        nearest=False,
        tol=body.tolerances.tol_geom,
        start=body.interior_point,
    )
    bad = int(np.sum(support_gaps(body, dirs, x) > tol))
    if bad:
        raise ConvergenceError(
            f"Support points could not be certified to {tol} in {bad} direction(s)"
        )
    return x


def _distances(pts: FloatArray, gens: FloatArray) -> FloatArray:
    out = np.empty((len(pts), len(gens)))
    block = max(1, _BLOCK_ELEMENTS // max(1, len(gens)))
    for lo in range(0, len(pts), block):
        sub = pts[lo : lo + block]
        out[lo : lo + block] = np.linalg.norm(
            sub[:, None, :] - gens[None, :, :], axis=2
        )
    return out


def _farthest(pts: FloatArray, gens: FloatArray, size: int) -> np.ndarray:
    dist = _distances(pts, gens)
    if size >= len(gens):
        return np.broadcast_to(np.arange(len(gens)), dist.shape).copy()
    return np.argpartition(-dist, size - 1, axis=1)[:, :size]


def support_nd(body: NdBallBody, u: Sequence[float], tol: float = 1e-9) -> float:
    """
    The support value ``h_A(u)`` of the body in direction ``u``, certified
    to within ``tol``
    """
    ud = np.asarray(u, dtype=float)
    x = support_points_nd(body, ud[None], tol)[0]
    return float(x @ ud)


def sphere_directions(d: int, n: int, seed: int = 0) -> FloatArray:
    """
    ``n`` deterministic, evenly spread unit vectors in dimension ``d``: a
    Halton sequence with a seeded random shift (modulo 1), pushed through the
    normal quantile function and normalized
    """
    if n < 1:
        raise DomainError("Need at least one direction")
    shift = np.random.default_rng(np.random.SeedSequence([seed])).random(d)
    u = (qmc.Halton(d=d, scramble=False).random(n + 1)[1:] + shift) % 1.0
    u = np.clip(u, 1e-12, 1 - 1e-12)
    z = norm.ppf(u)
    return z / np.linalg.norm(z, axis=1)[:, None]


def _chunk_hits(
    gens: FloatArray,
    r: float,
    tol: float,
    lo: FloatArray,
    hi: FloatArray,
    seed: int,
    chunk: int,
    count: int,
) -> int:
    rng = np.random.default_rng(np.random.SeedSequence([seed, chunk]))
    pts = lo + (hi - lo) * rng.random((count, len(lo)))
    return int(np.sum(_contains_batch(pts, gens, r, tol)))


def _chunks(n_samples: int) -> list[tuple[int, int]]:
    n_chunks = -(-n_samples // CHUNK_SIZE)
    return [
        (j, min(CHUNK_SIZE, n_samples - j * CHUNK_SIZE)) for j in range(n_chunks)
    ]


def _check_seed(seed: int) -> None:
    if seed < 0:
        raise DomainError(f"Seed must be nonnegative, got {seed}")


def estimate_vd_nd(
    body: NdBallBody, n_samples: int, seed: int, workers: int = 1
) -> VkEstimate:
    """
    Hit-or-miss Monte-Carlo estimate of the volume ``V_d`` over the bounding
    box.  Samples are drawn in fixed chunks with per-chunk seeds, so the
    estimate does not depend on ``workers``.
    """
    if n_samples < MIN_SAMPLES:
        raise DomainError(f"Need at least {MIN_SAMPLES} samples, got {n_samples}")
    _check_seed(seed)
    d = body.dim
    if body.is_empty:
        return VkEstimate(d, 0.0, 0.0, Method.MONTE_CARLO, n_samples, seed)
    lo, hi = body.bounding_box
    box = float(np.prod(hi - lo))
    tol = body.tolerances.tol_geom

    def run(job: tuple[int, int]) -> int:
        return _chunk_hits(body.array, body.radius, tol, lo, hi, seed, *job)

    jobs = _chunks(n_samples)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(run, jobs))
    else:
        hits = sum(map(run, jobs))
    p = hits / n_samples
    return VkEstimate(
        k=d,
        value=box * p,
        std_error=box * math.sqrt(p * (1 - p) / n_samples),
        method=Method.MONTE_CARLO,
        samples=n_samples,
        seed=seed,
    )


def radial_volume_nd(
    body: NdBallBody,
    n_directions: int,
    seed: int = 0,
    center: Sequence[float] | None = None,
) -> VkEstimate:
    """
    Volume from the radial function about an interior point ``c``:
    ``V_d = ω_d · mean(ρ(u)^d)`` over quasi-random directions, where
    ``ρ(u)`` is the distance from ``c`` to the boundary along ``u``.  With a
    fixed seed the estimate is a continuous function of the generators.
    """
    _check_seed(seed)
    d = body.dim
    if body.is_empty:
        return VkEstimate(d, 0.0, 0.0, Method.RADIAL, n_directions, seed)
    c = body.interior_point if center is None else np.asarray(center, dtype=float)
    gens = body.array
    off = gens - c
    slack = body.radius**2 - np.sum(off**2, axis=1)
    if np.any(slack < -body.tolerances.tol_geom):
        raise DomainError("Radial volume needs a center inside the body")
    u = sphere_directions(d, n_directions, seed)
    rho = np.full(n_directions, np.inf)
    block = max(1, _BLOCK_ELEMENTS // max(1, len(gens)))
    for lo in range(0, n_directions, block):
        b = u[lo : lo + block] @ off.T
        exit_t = b + np.sqrt(b * b + np.maximum(slack, 0.0))
        rho[lo : lo + block] = np.min(exit_t, axis=1)
    powers = rho**d
    w = omega(d)
    err = (
        w * float(np.std(powers, ddof=1)) / math.sqrt(n_directions)
        if n_directions > 1
        else 0.0
    )
    value = w * float(np.mean(powers))
    return VkEstimate(d, value, err, Method.RADIAL, n_directions, seed)


def mean_width_coefficient(d: int) -> float:
    """The factor ``c`` with ``V_1 = c · (mean width)``"""
    return d * omega(d) / (2 * _omega(d - 1))


def estimate_v1_nd(
    body: NdBallBody, n_directions: int, tol: float = 1e-9, seed: int = 0
) -> VkEstimate:
    """
    ``V_1`` from the mean width, averaged over ``n_directions`` antipodal
    pairs of quasi-random directions
    """
    if n_directions < 1:
        raise DomainError("Need at least one direction")
    _check_seed(seed)
    d = body.dim
    if body.is_empty:
        return VkEstimate(1, 0.0, 0.0, Method.MEAN_WIDTH, n_directions, seed)
    u = sphere_directions(d, n_directions, seed)
    x = support_points_nd(body, np.vstack([u, -u]), tol)
    h = np.einsum("ij,ij->i", x, np.vstack([u, -u]))
    widths = h[:n_directions] + h[n_directions:]
    c = mean_width_coefficient(d)
    err = (
        float(np.std(widths, ddof=1)) / math.sqrt(n_directions)
        if n_directions > 1
        else 0.0
    )
    return VkEstimate(
        k=1,
        value=c * float(np.mean(widths)),
        std_error=c * err,
        method=Method.MEAN_WIDTH,
        samples=n_directions,
        seed=seed,
    )


def steiner_vk_nd(
    body: NdBallBody,
    k: int,
    t_grid: Sequence[float],
    n_samples: int,
    seed: int,
    workers: int = 1,
) -> VkEstimate:
    """
    ``V_k`` from a least-squares fit of the Steiner polynomial
    ``vol(A + tB) = Σ_j ω_(d−j) V_j(A) t^(d−j)`` to Monte-Carlo volumes of
    parallel bodies.  One shared sample serves every ``t`` in the grid, and
    the standard error accounts for the resulting correlation between the
    volume estimates.
    """
    d = body.dim
    if not 1 <= k <= d:
        raise DomainError(f"k must satisfy 1 <= k <= {d}, got {k}")
    ts = np.array(sorted(float(t) for t in t_grid))
    if len(ts) < d + 1 or len(set(ts.tolist())) < len(ts):
        raise DomainError(f"Steiner fit needs at least {d + 1} distinct grid values")
    if ts[0] <= 0:
        raise DomainError("Steiner grid values must be positive")
    if n_samples < MIN_SAMPLES:
        raise DomainError(f"Need at least {MIN_SAMPLES} samples, got {n_samples}")
    _check_seed(seed)
    if body.is_empty:
        return VkEstimate(k, 0.0, 0.0, Method.STEINER_FIT, n_samples, seed)
    t_max = float(ts[-1])
    lo, hi = body.bounding_box
    lo = lo - t_max
    hi = hi + t_max
    box = float(np.prod(hi - lo))

    def run(job: tuple[int, int]) -> np.ndarray:
        chunk, count = job
        rng = np.random.default_rng(np.random.SeedSequence([seed, chunk]))
        pts = lo + (hi - lo) * rng.random((count, d))
        far = np.max(_distances(pts, body.array), axis=1) - body.radius > t_max
        dist = np.full(count, np.inf)
        near = ~far
        if np.any(near):
            dist[near] = distance_nd(body, pts[near])
        return np.sum(dist[:, None] <= ts[None, :], axis=0)

    jobs = _chunks(n_samples)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = sum(pool.map(run, jobs))
    else:
        counts = sum(map(run, jobs))
    p = np.asarray(counts, dtype=float) / n_samples
    vols = box * p
    # Nested indicators: Cov(1[d<=s], 1[d<=t]) = p(min) − p(s) p(t)
    cov = box * box * (np.minimum.outer(p, p) - np.outer(p, p)) / n_samples
    target = vols - _omega(d) * ts**d
    design = np.column_stack([_omega(d - j) * ts ** (d - j) for j in range(1, d + 1)])
    scale = np.linalg.norm(design, axis=0)
    scaled = design / scale
    cond = np.linalg.cond(scaled)
    if not np.isfinite(cond) or cond > 1e8:
        raise ConvergenceError(
            f"Steiner fit is ill-conditioned (condition number {cond:.3g});"
            " widen the t grid"
        )
    pinv = np.linalg.pinv(scaled)
    coef = (pinv @ target) / scale
    coef_cov = (pinv @ cov @ pinv.T) / np.outer(scale, scale)
    return VkEstimate(
        k=k,
        value=float(coef[k - 1]),
        std_error=float(math.sqrt(max(coef_cov[k - 1, k - 1], 0.0))),
        method=Method.STEINER_FIT,
        samples=n_samples,
        seed=seed,
    )


class MatchingBall(NamedTuple):
    ball: Ball
    dual: Ball | SinglePoint | Empty


def matching_ball(
    body_volume: float,
    d: int,
    r: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> MatchingBall:
    """
    The origin-centered ball ``B`` with ``V_d(B) = body_volume`` and its
    r-dual ``B^r``
    """
    if body_volume <= 0:
        raise DomainError(f"Volume must be positive, got {body_volume}")
    rho = (body_volume / omega(d)) ** (1 / d)
    ball = Ball((0.0,) * d, rho)
    return MatchingBall(ball, dual_ball(ball, r, tolerances))


def dual_vk(m: MatchingBall, k: int) -> float:
    """``V_k`` of the dual ball in a `MatchingBall` (zero when degenerate)"""
    if isinstance(m.dual, Ball):
        return ball_intrinsic_volume(m.dual.dim, k, m.dual.radius)
    return 0.0


def dual_nd(
    body: NdBallBody, n_directions: int, seed: int = 0, tol: float = 1e-9
) -> NdBallBody:
    """
    Outer approximation of ``A^r``: the r-ball body of the support points of
    ``A`` in ``n_directions`` quasi-random directions.  Since these points lie
    in ``A``, the result contains ``A^r`` and converges to it as the
    directions fill the sphere.
    """
    if body.is_empty:
        raise DomainError("The dual of the empty body is unbounded")
    dirs = sphere_directions(body.dim, n_directions, seed)
    pts = support_points_nd(body, dirs, tol)
    return NdBallBody(
        PointSet.from_coords(pts, body.radius, body.tolerances.tol_merge),
        body.tolerances,
    )


def ball_hull_nd(
    x: PointSet,
    n_directions: int,
    seed: int = 0,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> NdBallBody:
    """Outer approximation of ``conv_r X = (X^r)^r`` via `dual_nd`"""
    body = NdBallBody(x, tolerances)
    if body.is_empty:
        raise DomainError("Ball hull is empty: generators do not fit in an r-ball")
    return dual_nd(body, n_directions, seed)


def support_identity_residual_nd(
    body: NdBallBody,
    hull_directions: int,
    n_directions: int = 100,
    seed: int = 0,
) -> float:
    """
    ``max_u |h_A(u) + h_(A^r)(−u) − r|`` with ``A^r`` replaced by `dual_nd`
    """
    dual = dual_nd(body, hull_directions, seed)
    u = sphere_directions(body.dim, n_directions, seed + 1)
    ha = np.einsum("ij,ij->i", support_points_nd(body, u), u)
    hd = np.einsum("ij,ij->i", support_points_nd(dual, -u), -u)
    return float(np.max(np.abs(ha + hd - body.radius)))


def dual_v1_nd(estimate: VkEstimate, d: int, r: float) -> VkEstimate:
    """``V_1(A^r) = V_1(B[o, r]) − V_1(A)`` from an estimate of ``V_1(A)``"""
    if estimate.k != 1:
        raise DomainError("Mean-width duality applies to V_1 only")
    return VkEstimate(
        k=1,
        value=ball_intrinsic_volume(d, 1, r) - estimate.value,
        std_error=estimate.std_error,
        method=estimate.method,
        samples=estimate.samples,
        seed=estimate.seed,
    )


def estimate_vk_nd(
    body: NdBallBody,
    k: int,
    *,
    n_samples: int = 200_000,
    n_directions: int = 200,
    seed: int = 0,
    workers: int = 1,
) -> VkEstimate:
    """Route to the cheapest estimator available for ``V_k``"""
    d = body.dim
    if k == d:
        return estimate_vd_nd(body, n_samples, seed, workers)
    elif k == 1:
        return estimate_v1_nd(body, n_directions, seed=seed)
    else:
        lo, hi = body.bounding_box
        span = float(np.max(hi - lo)) if not body.is_empty else body.radius
        grid = np.linspace(0.25, 1.5, 6) * max(span, 1e-3)
        return steiner_vk_nd(body, k, grid, n_samples, seed, workers)


# --- three-dimensional lens and spindle ------------------------------------


def _check_gap(r: float, t: float) -> None:
    if not 0 < t < 2 * r:
        raise DomainError(f"Gap must satisfy 0 < t < 2r, got t={t}, r={r}")


def lens_volumes_3d(r: float, t: float) -> tuple[float, float, float]:
    """
    ``(V_1, V_2, V_3)`` of the lens ``B[−t/2 e, r] ∩ B[t/2 e, r]`` in
    dimension 3: two spherical caps of height ``h = r − t/2``
    """
    _check_gap(r, t)
    h = r - t / 2
    v3 = 2 * math.pi * h * h * (3 * r - h) / 3
    v2 = 2 * math.pi * r * h
    # Mean width; the axial component of a uniform direction is uniform
    a = t / (2 * r)
    rho = math.sqrt(r * r - t * t / 4)
    ridge = rho * (a * math.sqrt(1 - a * a) + math.asin(a)) / 2
    caps = r * (1 - a) - t / 4 * (1 - a * a)
    v1 = 4 * (ridge + caps)
    return v1, v2, v3


def spindle_volumes_3d(r: float, s: float) -> tuple[float, float, float]:
    """
    ``(V_1, V_2, V_3)`` of the spindle ``conv_r`` of two points ``s`` apart
    in dimension 3, the r-dual of the lens with gap ``s``
    """
    _check_gap(r, s)
    a = s / 2
    c = math.sqrt(r * r - a * a)
    arc = math.asin(a / r)
    v3 = math.pi * (2 * a * r * r - 2 * a**3 / 3 - 2 * c * r * r * arc)
    v2 = 2 * math.pi * r * (a - c * arc)
    v1 = ball_intrinsic_volume(3, 1, r) - lens_volumes_3d(r, s)[0]
    return v1, v2, v3


def lens_volume_3d(r: float, t: float) -> float:
    return lens_volumes_3d(r, t)[2]


def spindle_volume_3d(r: float, s: float) -> float:
    return spindle_volumes_3d(r, s)[2]


def gap_for_volume_3d(r: float, v: float, *, spindle: bool = False) -> float:
    """Gap of the lens (or spindle) in dimension 3 with volume ``v``"""
    full = omega(3) * r**3
    if not 0 < v < full:
        raise DomainError(f"Volume must satisfy 0 < v < {full}, got {v}")
    if spindle:
        f = lambda t: spindle_volume_3d(r, t) - v  # noqa: E731
    else:
        f = lambda t: lens_volume_3d(r, t) - v  # noqa: E731
    eps = 1e-12 * r
    t = bisect(
        f,
        eps,
        2 * r - eps,
        xtol=1e-15 * r,
        rtol=4 * np.finfo(float).eps,
        maxiter=400,
    )
    return float(t)


__all__ = [
    "MatchingBall",
    "Method",
    "NdBallBody",
    "VkEstimate",
    "ball_hull_nd",
    "distance_nd",
    "dual_nd",
    "dual_v1_nd",
    "estimate_v1_nd",
    "estimate_vd_nd",
    "estimate_vk_nd",
    "gap_for_volume_3d",
    "lens_volume_3d",
    "lens_volumes_3d",
    "matching_ball",
    "membership_nd",
    "minimal_enclosing_ball",
    "project_nd",
    "radial_volume_nd",
    "spindle_volume_3d",
    "spindle_volumes_3d",
    "steiner_vk_nd",
    "support_gaps",
    "support_nd",
    "support_points_nd",
]
