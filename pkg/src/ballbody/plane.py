"""
Exact planar r-ball bodies and r-ball hulls as arc polygons, together with
their support functions and intrinsic volumes, and the lens family.
"""

from __future__ import annotations
from collections.abc import Sequence
from dataclasses import dataclass
import logging
import math
from typing import NamedTuple
import numpy as np
from scipy.optimize import bisect
from .core import (
    DEFAULT_TOLERANCES,
    EMPTY,
    TWO_PI,
    Arc,
    ArcPolygon,
    Ball,
    BallBodyResult,
    ConvergenceError,
    DomainError,
    Empty,
    FloatArray,
    Point,
    PointSet,
    Region,
    SinglePoint,
    Tolerances,
    dedup_points,
)

log = logging.getLogger(__name__)

#: Arcs shorter than this (in radians) are dropped from the boundary
MIN_ARC_EXTENT = 1e-12

Circle = tuple[float, float, float]


# --- minimal enclosing circle (Welzl, iterative form) ----------------------


def minimal_enclosing_circle(points: Sequence[Point]) -> tuple[Point, float]:
    """
    Center and radius of the smallest circle enclosing ``points``.  The
    points are processed in a fixed pseudo-random order so that the result
    is reproducible.
    """
    if not points:
        raise DomainError("Cannot enclose an empty point set")
    pts = [(float(p[0]), float(p[1])) for p in points]
    order = np.random.default_rng(0).permutation(len(pts))
    shuffled = [pts[i] for i in order]
    c: Circle | None = None
    for i, p in enumerate(shuffled):
        if c is None or not _in_circle(p, c):
            c = _circle_from_one(shuffled[: i + 1], p)
    assert c is not None
    return (c[0], c[1]), c[2]


def _circle_from_one(
    points: list[tuple[float, float]], p: tuple[float, float]
) -> Circle:
    c: Circle = (p[0], p[1], 0.0)
    for i, q in enumerate(points):
        if not _in_circle(q, c):
            if c[2] == 0.0:
                c = _diameter(p, q)
            else:
                c = _circle_from_two(points[: i + 1], p, q)
    return c


def _circle_from_two(
    points: list[tuple[float, float]], p: tuple[float, float], q: tuple[float, float]
) -> Circle:
    circ = _diameter(p, q)
    left: Circle | None = None
    right: Circle | None = None
    for s in points:
        if _in_circle(s, circ):
            continue
        cross = _cross(p, q, s)
        c = _circumcircle(p, q, s)
        if c is None:
            continue
        elif cross > 0 and (left is None or _cross(p, q, c) > _cross(p, q, left)):
            left = c
        elif cross < 0 and (right is None or _cross(p, q, c) < _cross(p, q, right)):
            right = c
    if left is None and right is None:
        return circ
    elif left is None:
        assert right is not None
        return right
    elif right is None:
        return left
    else:
        return left if left[2] <= right[2] else right


def _diameter(a: tuple[float, float], b: tuple[float, float]) -> Circle:
    cx = (a[0] + b[0]) / 2
    cy = (a[1] + b[1]) / 2
    radius = max(math.hypot(cx - a[0], cy - a[1]), math.hypot(cx - b[0], cy - b[1]))
    return (cx, cy, radius)


def _circumcircle(
    a: tuple[float, float], b: tuple[float, float], c: tuple[float, float]
) -> Circle | None:
    ox = (min(a[0], b[0], c[0]) + max(a[0], b[0], c[0])) / 2
    oy = (min(a[1], b[1], c[1]) + max(a[1], b[1], c[1])) / 2
    ax, ay = a[0] - ox, a[1] - oy
    bx, by = b[0] - ox, b[1] - oy
    cx, cy = c[0] - ox, c[1] - oy
    d = (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) * 2.0
    if d == 0.0:
        return None
    sa = ax * ax + ay * ay
    sb = bx * bx + by * by
    sc = cx * cx + cy * cy
    x = ox + (sa * (by - cy) + sb * (cy - ay) + sc * (ay - by)) / d
    y = oy + (sa * (cx - bx) + sb * (ax - cx) + sc * (bx - ax)) / d
    rad = max(math.hypot(x - p[0], y - p[1]) for p in (a, b, c))
    return (x, y, rad)


def _in_circle(p: Sequence[float], c: Circle) -> bool:
    return math.hypot(p[0] - c[0], p[1] - c[1]) <= c[2] * (1 + 1e-14)


def _cross(p: Sequence[float], q: Sequence[float], s: Sequence[float]) -> float:
    return (q[0] - p[0]) * (s[1] - p[1]) - (q[1] - p[1]) * (s[0] - p[0])


# --- ball body and ball hull -----------------------------------------------


def _require_plane(x: PointSet) -> None:
    if x.dim != 2:
        raise DomainError(f"Planar operation given generators of dimension {x.dim}")


def ball_body_2d(
    x: PointSet, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> BallBodyResult:
    """
    Compute ``X^r``, the intersection of the radius-``r`` disks centered at
    the generators.  The body is empty when the minimal enclosing circle of
    ``X`` has radius greater than ``r``, a single point when it has radius
    ``r`` (within ``tol_geom``), and otherwise a region bounded by arcs
    centered at a subset of the generators.
    """
    _require_plane(x)
    r = x.radius
    center, rad = minimal_enclosing_circle(x.points)
    if rad > r + tolerances.tol_geom:
        log.debug("Enclosing radius %r exceeds %r; body is empty", rad, r)
        return EMPTY
    elif abs(rad - r) <= tolerances.tol_geom:
        return SinglePoint(center)
    # Generators closer than tol_geom bound the same arc
    gens = dedup_points(x.points, tolerances.tol_geom)
    if len(gens) == 1:
        return Region(ArcPolygon.disk(gens[0], r))
    return Region(_intersect_disks(np.array(gens), r, center, tolerances))


def _intersect_disks(
    gens: FloatArray, r: float, inner: Point, tolerances: Tolerances
) -> ArcPolygon:
    tol = tolerances.tol_geom
    candidates = []
    n = len(gens)
    for i in range(n):
        for j in range(i + 1, n):
            delta = gens[j] - gens[i]
            d = float(np.hypot(*delta))
            if d == 0 or d > 2 * r:
                continue
            h = math.sqrt(max(r * r - d * d / 4, 0.0))
            mid = (gens[i] + gens[j]) / 2
            perp = np.array([-delta[1], delta[0]]) / d
            candidates.append(mid + h * perp)
            candidates.append(mid - h * perp)
    if not candidates:
        raise ConvergenceError("No pairwise circle intersections found")
    cand = np.array(candidates)
    dist = np.linalg.norm(cand[:, None, :] - gens[None, :, :], axis=2)
    feasible = cand[np.all(dist <= r + tol, axis=1)]
    verts = np.array(dedup_points([tuple(v) for v in feasible], tol))
    if len(verts) < 2:
        raise ConvergenceError(
            f"Degenerate intersection: found {len(verts)} boundary vertices"
        )
    angles = np.arctan2(verts[:, 1] - inner[1], verts[:, 0] - inner[0])
    verts = verts[np.argsort(angles, kind="stable")]
    arcs = []
    m = len(verts)
    for i in range(m):
        arc = _joining_arc(verts[i], verts[(i + 1) % m], gens, r, tol)
        if arc.extent >= MIN_ARC_EXTENT:
            arcs.append(arc)
    if not arcs:
        raise ConvergenceError("All boundary arcs degenerated")
    return ArcPolygon(radius=r, arcs=tuple(arcs))


def _joining_arc(
    v: FloatArray, w: FloatArray, gens: FloatArray, r: float, tol: float
) -> Arc:
    # The generator whose counterclockwise minor arc from v to w stays inside
    # every other disk
    best: tuple[float, Arc] | None = None
    on_v = np.abs(np.linalg.norm(gens - v, axis=1) - r) <= tol
    on_w = np.abs(np.linalg.norm(gens - w, axis=1) - r) <= tol
    for g in gens[on_v & on_w]:
        s = math.atan2(v[1] - g[1], v[0] - g[0])
        e = math.atan2(w[1] - g[1], w[0] - g[0])
        extent = (e - s) % TWO_PI
        if extent > math.pi + tol:
            continue
        mid = g + r * np.array([math.cos(s + extent / 2), math.sin(s + extent / 2)])
        violation = float(np.max(np.linalg.norm(gens - mid, axis=1)) - r)
        if best is None or violation < best[0]:
            best = (violation, Arc((float(g[0]), float(g[1])), s, s + extent))
    if best is None:
        raise ConvergenceError(
            "Consecutive boundary vertices share no generator circle"
        )
    return best[1]


def ball_hull_2d(
    x: PointSet, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> BallBodyResult:
    """
    Compute ``conv_r X = (X^r)^r``, the intersection of all radius-``r``
    disks containing ``X``.  Each boundary arc of the hull is centered at a
    vertex of ``X^r`` and joins the two generators whose arcs meet there.
    """
    body = ball_body_2d(x, tolerances)
    if isinstance(body, Empty):
        return EMPTY
    elif isinstance(body, SinglePoint):
        return Region(ArcPolygon.disk(body.point, x.radius))
    elif body.polygon.full_disk:
        return SinglePoint(body.polygon.arcs[0].center)
    return Region(_dual_arcs(body.polygon))


def _dual_arcs(poly: ArcPolygon) -> ArcPolygon:
    verts = poly.vertices
    centers = poly.centers
    m = len(poly.arcs)
    arcs = []
    for i in range(m):
        vx, vy = verts[i]
        g0 = centers[i]
        g1 = centers[(i + 1) % m]
        s = math.atan2(g0[1] - vy, g0[0] - vx)
        extent = (math.atan2(g1[1] - vy, g1[0] - vx) - s) % TWO_PI
        if extent >= MIN_ARC_EXTENT:
            arcs.append(Arc((vx, vy), s, s + extent))
    return ArcPolygon(radius=poly.radius, arcs=tuple(arcs))


def dual_2d(
    a: Region | ArcPolygon,
    r: float | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> BallBodyResult:
    """
    Compute ``A^r`` for a planar r-ball body ``A``.  A full disk of radius
    ``r`` dualizes to its center; otherwise the dual is the r-ball hull of
    the arc centers of ``A``.
    """
    poly = a.polygon if isinstance(a, Region) else a
    if r is not None and abs(poly.radius - r) > tolerances.tol_geom * max(1.0, r):
        raise DomainError(
            f"Arc radius {poly.radius} does not match requested radius {r}"
        )
    if poly.full_disk:
        return SinglePoint(poly.arcs[0].center)
    return ball_hull_2d(PointSet.from_coords(poly.centers, poly.radius), tolerances)


def dual_of(
    b: BallBodyResult, r: float, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> BallBodyResult:
    """`dual_2d` extended to points: ``{p}^r`` is the disk ``B[p, r]``"""
    if isinstance(b, Empty):
        raise DomainError("The dual of the empty set is the whole plane")
    elif isinstance(b, SinglePoint):
        return Region(ArcPolygon.disk(b.point, r))
    return dual_2d(b, r, tolerances)


# --- support function, volumes, membership ---------------------------------


def _unit(u: Sequence[float], tol: float) -> tuple[float, float]:
    if len(u) != 2:
        raise DomainError("Direction must be planar")
    norm = math.hypot(u[0], u[1])
    if norm == 0:
        raise DomainError("Direction must be nonzero")
    if abs(norm - 1) > tol:
        raise DomainError(f"Direction must be a unit vector, got norm {norm}")
    return (float(u[0]), float(u[1]))


def support_2d(
    a: Region | ArcPolygon,
    u: Sequence[float],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """
    Support function ``h_A(u) = max_{p ∈ A} <p, u>``.  The maximum is
    attained at the point of an arc whose outward normal equals ``u`` when
    such an arc exists, and otherwise at a vertex.
    """
    poly = a.polygon if isinstance(a, Region) else a
    ux, uy = _unit(u, tolerances.tol_geom)
    theta = math.atan2(uy, ux)
    for arc in poly.arcs:
        if arc.contains_direction(theta):
            return arc.center[0] * ux + arc.center[1] * uy + poly.radius
    return max(vx * ux + vy * uy for vx, vy in poly.vertices)


def support_value(
    b: BallBodyResult | ArcPolygon | Ball,
    u: Sequence[float],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """`support_2d` extended to single points and exact balls"""
    if isinstance(b, SinglePoint):
        return b.point[0] * u[0] + b.point[1] * u[1]
    elif isinstance(b, Ball):
        return b.center[0] * u[0] + b.center[1] * u[1] + b.radius
    elif isinstance(b, Empty):
        raise DomainError("The empty set has no support function")
    return support_2d(b, u, tolerances)


class Vk2D(NamedTuple):
    """Half-perimeter and area of a planar convex body"""

    v1: float
    v2: float

    def vk(self, k: int) -> float:
        if k == 1:
            return self.v1
        elif k == 2:
            return self.v2
        raise DomainError(f"Planar intrinsic volumes have k in {{1, 2}}, got {k}")


def intrinsic_volumes_2d(b: BallBodyResult | ArcPolygon | Ball) -> Vk2D:
    """
    ``V_1`` (half-perimeter) and ``V_2`` (area) of a planar body: the area of
    the vertex polygon plus the circular segments cut off by the arcs
    """
    if isinstance(b, (Empty, SinglePoint)):
        return Vk2D(0.0, 0.0)
    elif isinstance(b, Ball):
        return Vk2D(math.pi * b.radius, math.pi * b.radius**2)
    poly = b.polygon if isinstance(b, Region) else b
    r = poly.radius
    extents = [a.extent for a in poly.arcs]
    v1 = r * sum(extents) / 2
    verts = poly.vertices
    shoelace = 0.0
    for (x0, y0), (x1, y1) in zip(verts, verts[1:] + verts[:1]):
        shoelace += x0 * y1 - x1 * y0
    segments = sum(r * r / 2 * (t - math.sin(t)) for t in extents)
    return Vk2D(v1, shoelace / 2 + segments)


def contains_2d(
    b: BallBodyResult | ArcPolygon | Ball,
    p: Sequence[float],
    tol: float = DEFAULT_TOLERANCES.tol_geom,
) -> bool:
    """Whether ``p`` lies in ``b`` (within ``tol``)"""
    return bool(contains_many_2d(b, np.array([p], dtype=float), tol)[0])


def contains_many_2d(
    b: BallBodyResult | ArcPolygon | Ball, pts: FloatArray, tol: float
) -> np.ndarray:
    if isinstance(b, Empty):
        return np.zeros(len(pts), dtype=bool)
    elif isinstance(b, SinglePoint):
        return np.linalg.norm(pts - np.array(b.point), axis=1) <= tol
    elif isinstance(b, Ball):
        return np.linalg.norm(pts - np.array(b.center), axis=1) <= b.radius + tol
    poly = b.polygon if isinstance(b, Region) else b
    centers = np.array(poly.centers)
    dist = np.linalg.norm(pts[:, None, :] - centers[None, :, :], axis=2)
    return np.all(dist <= poly.radius + tol, axis=1)


# --- lenses ----------------------------------------------------------------


def lens_area(r: float, t: float) -> float:
    """Area of the intersection of two radius-``r`` disks ``t`` apart"""
    return 2 * r * r * math.acos(t / (2 * r)) - t / 2 * math.sqrt(4 * r * r - t * t)


def lens_half_perimeter(r: float, t: float) -> float:
    return 2 * r * math.acos(t / (2 * r))


def make_lens(
    r: float, t: float, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> ArcPolygon:
    """
    The lens ``{(−t/2, 0), (t/2, 0)}^r``: two arcs of radius ``r`` meeting at
    ``(0, ±√(r² − t²/4))``
    """
    if not 0 < t < 2 * r:
        raise DomainError(f"Lens gap must satisfy 0 < t < 2r, got t={t}, r={r}")
    pair = PointSet.from_coords([(-t / 2, 0.0), (t / 2, 0.0)], r)
    body = ball_body_2d(pair, tolerances)
    if not isinstance(body, Region):  # pragma: no cover
        raise ConvergenceError(f"Lens with t={t} did not produce a region")
    return body.polygon


@dataclass(frozen=True)
class Lens:
    """A lens of radius ``r`` and gap ``t`` in a given pose"""

    radius: float
    gap: float
    angle: float = 0.0
    offset: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if not 0 < self.gap < 2 * self.radius:
            raise DomainError(
                f"Lens gap must satisfy 0 < t < 2r, got t={self.gap}, r={self.radius}"
            )

    def generators(self) -> PointSet:
        c, s = math.cos(self.angle), math.sin(self.angle)
        h = self.gap / 2
        return PointSet.from_coords(
            [
                (self.offset[0] - h * c, self.offset[1] - h * s),
                (self.offset[0] + h * c, self.offset[1] + h * s),
            ],
            self.radius,
        )

    def polygon(self) -> ArcPolygon:
        return make_lens(self.radius, self.gap).transformed(
            rotation=self.angle, shift=self.offset
        )

    @property
    def area(self) -> float:
        return lens_area(self.radius, self.gap)

    @property
    def half_perimeter(self) -> float:
        return lens_half_perimeter(self.radius, self.gap)

    @property
    def dual_volumes(self) -> Vk2D:
        """``V_1`` and ``V_2`` of the spindle ``conv_r`` of the two generators"""
        r = self.radius
        return Vk2D(
            math.pi * r - self.half_perimeter,
            _spindle_area(r, self.gap),
        )


def _spindle_area(r: float, s: float) -> float:
    # Two circular segments of chord s
    theta = 2 * math.asin(s / (2 * r))
    return r * r * (theta - math.sin(theta))


def lens_gap_for_area(r: float, v: float) -> float:
    """The gap ``t`` for which the radius-``r`` lens has area ``v``"""
    if not 0 < v < math.pi * r * r:
        raise DomainError(f"Lens area must satisfy 0 < v < πr², got {v}")
    t = bisect(
        lambda t: lens_area(r, t) - v,
        0.0,
        2 * r,
        xtol=1e-15 * r,
        rtol=4 * np.finfo(float).eps,
        maxiter=400,
    )
    return float(t)


def lens_gap_for_half_perimeter(r: float, w: float) -> float:
    """The gap ``t`` for which the radius-``r`` lens has half-perimeter ``w``"""
    if not 0 < w < math.pi * r:
        raise DomainError(f"Lens half-perimeter must satisfy 0 < w < πr, got {w}")
    return 2 * r * math.cos(w / (2 * r))


__all__ = [
    "Lens",
    "Vk2D",
    "ball_body_2d",
    "ball_hull_2d",
    "contains_2d",
    "dual_2d",
    "dual_of",
    "intrinsic_volumes_2d",
    "lens_area",
    "lens_gap_for_area",
    "lens_gap_for_half_perimeter",
    "lens_half_perimeter",
    "make_lens",
    "minimal_enclosing_circle",
    "support_2d",
    "support_value",
]

