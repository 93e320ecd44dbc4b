"""
Shared geometric primitives: points, balls, generator sets, planar arc
polygons, the three-valued ball-body result, tolerances, unit-ball constants,
and the shape-comparison utilities (exact planar Hausdorff distance, pose
normalization, congruence testing).
"""

from __future__ import annotations
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property
import logging
import math
from typing import NamedTuple, Union
import numpy as np
from numpy.typing import NDArray
from scipy.spatial import cKDTree

log = logging.getLogger(__name__)

#: Largest supported ambient dimension
MAX_DIM = 8

TWO_PI = 2 * math.pi

Point = tuple[float, ...]
FloatArray = NDArray[np.float64]


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation"""


class ConvergenceError(RuntimeError):
    """Raised when an iterative routine cannot certify its result"""


@dataclass(frozen=True)
class Tolerances:
    """
    Numerical tolerances: ``tol_geom`` for geometric coincidence,
    ``tol_merge`` for merging duplicate generators, and ``tol_check`` for the
    slack allowed when checking an inequality.
    """

    tol_geom: float = 1e-9
    tol_merge: float = 1e-12
    tol_check: float = 1e-9

    def __post_init__(self) -> None:
        if min(self.tol_geom, self.tol_merge, self.tol_check) <= 0:
            raise DomainError("Tolerances must be positive")
        if not (self.tol_merge <= self.tol_geom <= self.tol_check):
            raise DomainError(
                "Tolerances must satisfy tol_merge <= tol_geom <= tol_check"
            )


DEFAULT_TOLERANCES = Tolerances()


def _omega(d: int) -> float:
    # d = 0 is allowed here (omega_0 = 1) for use in intrinsic volume formulas
    return float(math.pi ** (d / 2) / math.gamma(1 + d / 2))


def omega(d: int) -> float:
    """Volume of the ``d``-dimensional unit ball, π^(d/2) / Γ(1 + d/2)"""
    if d < 1:
        raise DomainError(f"Unit-ball volume requires d >= 1, got {d}")
    return _omega(d)


def ball_intrinsic_volume(d: int, k: int, radius: float) -> float:
    """
    The ``k``-th intrinsic volume of a ``d``-dimensional ball of the given
    radius: binom(d, k) · ω_d / ω_(d−k) · radius^k.  ``V_d`` is the volume,
    ``2 V_(d−1)`` the surface area, and ``V_1`` is proportional to the mean
    width.
    """
    if d < 1:
        raise DomainError(f"Dimension must be positive, got {d}")
    if not 1 <= k <= d:
        raise DomainError(f"k must satisfy 1 <= k <= {d}, got {k}")
    if radius < 0:
        raise DomainError(f"Radius must be nonnegative, got {radius}")
    return math.comb(d, k) * _omega(d) / _omega(d - k) * radius**k


def as_point(coords: Iterable[float]) -> Point:
    p = tuple(float(c) for c in coords)
    if not all(math.isfinite(c) for c in p):
        raise DomainError(f"Point coordinates must be finite: {p!r}")
    return p


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball ``B[center, radius]``"""

    center: Point
    radius: float

    def __post_init__(self) -> None:
        if self.radius < 0 or not math.isfinite(self.radius):
            raise DomainError(f"Ball radius must be nonnegative: {self.radius}")

    @property
    def dim(self) -> int:
        return len(self.center)


@dataclass(frozen=True)
class PointSet:
    """
    A nonempty finite generator set in dimension ``dim`` together with the
    radius ``r`` of the balls it generates.  Use `PointSet.from_coords` to
    build one from raw coordinates; it validates and removes duplicates.
    """

    radius: float
    points: tuple[Point, ...]

    def __post_init__(self) -> None:
        if not self.points:
            raise DomainError("Generator set must be nonempty")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainError(f"Radius must be positive, got {self.radius}")
        dim = len(self.points[0])
        if not 2 <= dim <= MAX_DIM:
            raise DomainError(f"Dimension must be between 2 and {MAX_DIM}, got {dim}")
        for p in self.points:
            if len(p) != dim:
                raise DomainError("All generators must have the same dimension")
            if not all(math.isfinite(c) for c in p):
                raise DomainError(f"Generator coordinates must be finite: {p!r}")

    @classmethod
    def from_coords(
        cls,
        coords: Iterable[Iterable[float]] | FloatArray,
        radius: float,
        tol_merge: float = DEFAULT_TOLERANCES.tol_merge,
    ) -> PointSet:
        pts = [as_point(c) for c in coords]
        if not pts:
            raise DomainError("Generator set must be nonempty")
        if len({len(p) for p in pts}) != 1:
            raise DomainError("All generators must have the same dimension")
        return cls(radius=float(radius), points=dedup_points(pts, tol_merge))

    @property
    def dim(self) -> int:
        return len(self.points[0])

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def array(self) -> FloatArray:
        return np.array(self.points, dtype=float)

    def union(self, other: PointSet) -> PointSet:
        if other.dim != self.dim or other.radius != self.radius:
            raise DomainError("Generator sets differ in dimension or radius")
        return PointSet.from_coords(self.points + other.points, self.radius)


def dedup_points(pts: Sequence[Point], tol: float) -> tuple[Point, ...]:
    """Drop every point lying within ``tol`` of an earlier one"""
    if len(pts) < 2:
        return tuple(pts)
    pairs = cKDTree(np.array(pts)).query_pairs(tol, output_type="ndarray")
    drop = set(int(j) for j in pairs.max(axis=1)) if len(pairs) else set()
    return tuple(p for i, p in enumerate(pts) if i not in drop)


@dataclass(frozen=True)
class Arc:
    """
    A boundary arc of radius ``r`` (stored on the owning `ArcPolygon`) about
    ``center``, running counterclockwise from ``start_angle`` to
    ``end_angle`` (radians, ``end_angle > start_angle``).
    """

    center: tuple[float, float]
    start_angle: float
    end_angle: float

    @property
    def extent(self) -> float:
        return self.end_angle - self.start_angle

    def point_at(self, angle: float, radius: float) -> tuple[float, float]:
        return (
            self.center[0] + radius * math.cos(angle),
            self.center[1] + radius * math.sin(angle),
        )

    def contains_direction(self, theta: float) -> bool:
        return (theta - self.start_angle) % TWO_PI <= self.extent + 1e-15


@dataclass(frozen=True)
class ArcPolygon:
    """
    Boundary representation of a planar r-ball body: a counterclockwise
    cycle of radius-``radius`` arcs.  Vertex ``i`` is the endpoint shared by
    arc ``i`` and arc ``i+1``.  A full disk is a single arc of extent 2π
    with ``full_disk`` set.
    """

    radius: float
    arcs: tuple[Arc, ...]
    full_disk: bool = False

    def __post_init__(self) -> None:
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainError(f"Arc radius must be positive, got {self.radius}")
        if not self.arcs:
            raise DomainError("Arc polygon must have at least one arc")
        if self.full_disk and len(self.arcs) != 1:
            raise DomainError("A full disk consists of exactly one arc")

    @classmethod
    def disk(cls, center: Sequence[float], radius: float) -> ArcPolygon:
        c = as_point(center)
        return cls(
            radius=radius,
            arcs=(Arc((c[0], c[1]), -math.pi, math.pi),),
            full_disk=True,
        )

    @property
    def centers(self) -> tuple[tuple[float, float], ...]:
        return tuple(a.center for a in self.arcs)

    @property
    def vertices(self) -> tuple[tuple[float, float], ...]:
        if self.full_disk:
            return ()
        return tuple(a.point_at(a.end_angle, self.radius) for a in self.arcs)

    def validate(self, tol: float = 1e-9) -> None:
        """Check the structural invariants, raising `DomainError` on failure"""
        if self.full_disk:
            if abs(self.arcs[0].extent - TWO_PI) > tol:
                raise DomainError("A full disk arc must have extent 2π")
            return
        for i, a in enumerate(self.arcs):
            if not 0 < a.extent <= math.pi + tol:
                raise DomainError(f"Arc {i} has extent {a.extent} outside (0, π]")
            b = self.arcs[(i + 1) % len(self.arcs)]
            end = a.point_at(a.end_angle, self.radius)
            start = b.point_at(b.start_angle, self.radius)
            if math.dist(end, start) > tol * max(1.0, self.radius):
                raise DomainError(f"Arcs {i} and {i + 1} do not share an endpoint")
        total = sum(a.extent for a in self.arcs) + sum(
            self._vertex_cone(i) for i in range(len(self.arcs))
        )
        if abs(total - TWO_PI) > 1e-6:
            raise DomainError("Arc polygon boundary is not convex")

    def _vertex_cone(self, i: int) -> float:
        a = self.arcs[i]
        b = self.arcs[(i + 1) % len(self.arcs)]
        return (b.start_angle - a.end_angle) % TWO_PI

    def transformed(
        self,
        rotation: float = 0.0,
        shift: Sequence[float] = (0.0, 0.0),
        reflect: bool = False,
    ) -> ArcPolygon:
        """
        Apply the rigid motion ``p ↦ R(rotation)·F(p) + shift``, where ``F``
        mirrors the second coordinate when ``reflect`` is true
        """
        cos_a, sin_a = math.cos(rotation), math.sin(rotation)
        arcs = list(self.arcs)
        if reflect:
            arcs = [
                Arc((a.center[0], -a.center[1]), -a.end_angle, -a.start_angle)
                for a in reversed(arcs)
            ]
        moved = []
        for a in arcs:
            cx, cy = a.center
            start = _wrap(a.start_angle + rotation)
            moved.append(
                Arc(
                    (
                        cos_a * cx - sin_a * cy + shift[0],
                        sin_a * cx + cos_a * cy + shift[1],
                    ),
                    start,
                    start + a.extent,
                )
            )
        return ArcPolygon(self.radius, tuple(moved), self.full_disk)


def _wrap(theta: float) -> float:
    """Map an angle into [−π, π)"""
    return (theta + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True)
class Empty:
    """The empty r-ball body"""

    def __repr__(self) -> str:
        return "EMPTY"


EMPTY = Empty()


@dataclass(frozen=True)
class SinglePoint:
    """An r-ball body consisting of a single point"""

    point: Point

    @property
    def dim(self) -> int:
        return len(self.point)


@dataclass(frozen=True)
class Region:
    """A planar r-ball body with nonempty interior"""

    polygon: ArcPolygon


BallBodyResult = Union[Empty, SinglePoint, Region]

#: Anything whose planar support function is known in closed form
Shape2D = Union[BallBodyResult, ArcPolygon, Ball]


def dual_ball(
    ball: Ball, r: float, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> Ball | SinglePoint | Empty:
    """
    The r-ball body generated by a ball: ``B[c, ρ]^r`` is ``B[c, r − ρ]`` when
    ``ρ < r``, the center when ``ρ = r`` (within ``tol_geom``), and empty
    otherwise
    """
    if ball.radius > r + tolerances.tol_geom:
        return EMPTY
    elif abs(ball.radius - r) <= tolerances.tol_geom:
        return SinglePoint(ball.center)
    else:
        return Ball(ball.center, r - ball.radius)


# --- exact planar support functions ---------------------------------------

# On each piece, h(θ) = offset + <anchor, (cos θ, sin θ)>.
_Piece = tuple[float, float, float, float, float]  # lo, hi, offset, ax, ay


def _support_pieces(shape: Shape2D) -> list[_Piece]:
    if isinstance(shape, Region):
        shape = shape.polygon
    if isinstance(shape, SinglePoint):
        x, y = _planar(shape.point)
        raw = [(0.0, TWO_PI, 0.0, x, y)]
    elif isinstance(shape, Ball):
        x, y = _planar(shape.center)
        raw = [(0.0, TWO_PI, shape.radius, x, y)]
    elif isinstance(shape, ArcPolygon):
        raw = []
        n = len(shape.arcs)
        for i, a in enumerate(shape.arcs):
            raw.append((a.start_angle, a.end_angle, shape.radius, *a.center))
            if not shape.full_disk:
                cone = shape._vertex_cone(i)
                if cone > 0:
                    vx, vy = a.point_at(a.end_angle, shape.radius)
                    raw.append((a.end_angle, a.end_angle + cone, 0.0, vx, vy))
        if n == 0:  # pragma: no cover
            raise DomainError("Arc polygon has no arcs")
    else:
        raise DomainError(f"No support function for {shape!r}")
    pieces: list[_Piece] = []
    for lo, hi, off, ax, ay in raw:
        lo_n = lo % TWO_PI
        hi_n = lo_n + (hi - lo)
        if hi_n > TWO_PI:
            pieces.append((lo_n, TWO_PI, off, ax, ay))
            pieces.append((0.0, hi_n - TWO_PI, off, ax, ay))
        else:
            pieces.append((lo_n, hi_n, off, ax, ay))
    pieces.sort()
    return pieces


def _planar(p: Point) -> tuple[float, float]:
    if len(p) != 2:
        raise DomainError("Planar operation given a point of dimension != 2")
    return (p[0], p[1])


def _piece_at(pieces: list[_Piece], theta: float) -> _Piece:
    best = pieces[0]
    for pc in pieces:
        if pc[0] <= theta:
            best = pc
        else:
            break
    return best


def _max_abs_on_interval(
    off: float, wx: float, wy: float, lo: float, hi: float
) -> float:
    # max over θ ∈ [lo, hi] of |off + wx cos θ + wy sin θ|
    def f(t: float) -> float:
        return abs(off + wx * math.cos(t) + wy * math.sin(t))

    best = max(f(lo), f(hi))
    if wx != 0 or wy != 0:
        phi = math.atan2(wy, wx)
        for cand in (phi, phi + math.pi):
            t = lo + (cand - lo) % TWO_PI
            if t <= hi:
                best = max(best, f(t))
    return best


def support_sup_distance(a: Shape2D, b: Shape2D) -> float:
    """Exact ``sup_θ |h_a(θ) − h_b(θ)|`` for two nonempty planar shapes"""
    pa = _support_pieces(a)
    pb = _support_pieces(b)
    breaks = sorted({p[0] for p in pa} | {p[0] for p in pb} | {TWO_PI})
    best = 0.0
    for lo, hi in zip(breaks, breaks[1:]):
        if hi - lo <= 0:
            continue
        mid = (lo + hi) / 2
        _, _, off_a, ax, ay = _piece_at(pa, mid)
        _, _, off_b, bx, by = _piece_at(pb, mid)
        best = max(
            best, _max_abs_on_interval(off_a - off_b, ax - bx, ay - by, lo, hi)
        )
    return best


def _shape_dim(shape: Shape2D) -> int:
    if isinstance(shape, (SinglePoint, Ball)):
        return shape.dim
    return 2


def hausdorff_distance(a: Shape2D, b: Shape2D) -> float:
    """
    Symmetric Hausdorff distance between two planar ball-body results (or
    exact balls).  For nonempty convex sets it equals the sup-norm of the
    difference of the support functions, which is piecewise of the form
    ``c + <w, u(θ)>`` between the normal-angle breakpoints of the two
    boundaries and is maximized in closed form on each piece.  The distance
    between two empty sets is 0 and from an empty to a nonempty set is
    infinite.
    """
    for s in (a, b):
        if not isinstance(s, Empty) and _shape_dim(s) != 2:
            raise DomainError("Hausdorff distance is only defined for planar shapes")
    a_empty = isinstance(a, Empty)
    b_empty = isinstance(b, Empty)
    if a_empty and b_empty:
        return 0.0
    elif a_empty or b_empty:
        return math.inf
    return support_sup_distance(a, b)


# --- moments and pose normalization ----------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


class _Boundary(NamedTuple):
    z: NDArray[np.complex128]
    dz: NDArray[np.complex128]


def _boundary_quadrature(poly: ArcPolygon) -> _Boundary:
    zs = []
    dzs = []
    for a in poly.arcs:
        half = a.extent / 2
        t = half * _GL_NODES + (a.start_angle + a.end_angle) / 2
        e = np.exp(1j * t)
        zs.append(complex(*a.center) + poly.radius * e)
        dzs.append(1j * poly.radius * e * half * _GL_WEIGHTS)
    return _Boundary(np.concatenate(zs), np.concatenate(dzs))


def _moment(bd: _Boundary, m: int, n: int, shift: complex = 0) -> complex:
    # ∬ z^m z̄^n dA via Green's theorem: (1/2i) ∮ z^m z̄^(n+1) / (n+1) dz
    z = bd.z - shift
    val = np.sum(z**m * np.conj(z) ** (n + 1) * bd.dz) / (2j * (n + 1))
    return complex(val)


def _as_polygon(a: Shape2D) -> ArcPolygon:
    if isinstance(a, Region):
        return a.polygon
    elif isinstance(a, ArcPolygon):
        return a
    raise DomainError("Operation requires a region with nonempty interior")


def area_centroid(a: Region | ArcPolygon) -> tuple[float, tuple[float, float]]:
    poly = _as_polygon(a)
    bd = _boundary_quadrature(poly)
    area = _moment(bd, 0, 0).real
    c = _moment(bd, 1, 0) / area
    return area, (c.real, c.imag)


_ISOTROPY = 1e-9
_SIGN_EPS = 1e-9


class _Pose(NamedTuple):
    polygon: ArcPolygon
    isotropic: bool


def _normalize(poly: ArcPolygon) -> _Pose:
    _, (cx, cy) = area_centroid(poly)
    centered = poly.transformed(shift=(-cx, -cy))
    bd = _boundary_quadrature(centered)
    spread = _moment(bd, 1, 1).real
    c2 = _moment(bd, 2, 0)
    if abs(c2) <= _ISOTROPY * spread:
        return _Pose(centered, True)
    rotated = centered.transformed(rotation=-0.5 * math.atan2(c2.imag, c2.real))
    eps = _SIGN_EPS * spread**1.25
    bd = _boundary_quadrature(rotated)
    c3 = _moment(bd, 3, 0)
    d3 = _moment(bd, 2, 1)
    if (c3.real + 3 * d3.real) / 4 < -eps:
        rotated = rotated.transformed(rotation=math.pi)
        bd = _boundary_quadrature(rotated)
        c3 = _moment(bd, 3, 0)
        d3 = _moment(bd, 2, 1)
    if (3 * d3.imag - c3.imag) / 4 < -eps:
        rotated = rotated.transformed(reflect=True)
    return _Pose(rotated, False)


def normalize_pose(a: Region | ArcPolygon) -> ArcPolygon:
    """
    Move a planar region into a canonical pose: centroid at the origin,
    principal second-moment axis along the first coordinate axis, third
    central moment in the first coordinate made nonnegative by a half turn,
    and third central moment in the second coordinate made nonnegative by a
    reflection.  Shapes with isotropic second moments (disks in particular)
    are only translated.
    """
    if isinstance(a, (Empty, SinglePoint)):
        raise DomainError("Pose normalization requires a region")
    return _normalize(_as_polygon(a)).polygon


def _higher_order_angles(
    na: ArcPolygon, nb: ArcPolygon
) -> list[float]:
    # Rotations aligning the first non-vanishing complex moment of order >= 3
    ba = _boundary_quadrature(na)
    bb = _boundary_quadrature(nb)
    spread = _moment(ba, 1, 1).real
    for m in range(3, 9):
        ca = _moment(ba, m, 0)
        cb = _moment(bb, m, 0)
        if abs(ca) > _ISOTROPY * spread ** (1 + m / 4) and abs(cb) > 0:
            base = (math.atan2(ca.imag, ca.real) - math.atan2(cb.imag, cb.real)) / m
            return [base + TWO_PI * j / m for j in range(m)]
    return [0.0]


def congruence_distance(
    a: Region | ArcPolygon | Ball, b: Region | ArcPolygon | Ball
) -> float:
    """
    Smallest Hausdorff distance between ``a`` and an isometric copy of
    ``b``, over the candidates left open by `normalize_pose`
    """
    if isinstance(a, Ball) and isinstance(b, Ball):
        return abs(a.radius - b.radius)
    if isinstance(b, Ball):
        a, b = b, a
    if isinstance(a, Ball):
        poly = _as_polygon(b)
        _, c = area_centroid(poly)
        return hausdorff_distance(poly, Ball(c, a.radius))
    pa = _normalize(_as_polygon(a))
    pb = _normalize(_as_polygon(b))
    candidates: list[ArcPolygon] = []
    for reflect in (False, True):
        base = pb.polygon.transformed(reflect=reflect)
        if pa.isotropic or pb.isotropic:
            angles = _higher_order_angles(pa.polygon, base)
        else:
            angles = [0.0, math.pi]
        candidates.extend(base.transformed(rotation=t) for t in angles)
    return min(hausdorff_distance(pa.polygon, c) for c in candidates)


def is_congruent(
    a: Region | ArcPolygon | Ball,
    b: Region | ArcPolygon | Ball,
    tol: float = 10 * DEFAULT_TOLERANCES.tol_geom,
) -> bool:
    """Whether ``a`` and ``b`` are isometric up to Hausdorff distance ``tol``"""
    return congruence_distance(a, b) <= tol
