from __future__ import annotations
import math
from hypothesis import given, settings
from hypothesis import strategies as st
import pytest
from ballbody.core import (
    EMPTY,
    Arc,
    ArcPolygon,
    Ball,
    DomainError,
    PointSet,
    Region,
    SinglePoint,
    Tolerances,
    area_centroid,
    ball_intrinsic_volume,
    congruence_distance,
    dual_ball,
    hausdorff_distance,
    is_congruent,
    normalize_pose,
    omega,
)
from ballbody.plane import ball_body_2d, make_lens

ROOT3 = math.sqrt(3)


def body_of(points: list[tuple[float, float]], r: float = 1.0) -> ArcPolygon:
    b = ball_body_2d(PointSet.from_coords(points, r))
    assert isinstance(b, Region)
    return b.polygon


@pytest.mark.parametrize(
    "d,expected",
    [
        (1, 2.0),
        (2, math.pi),
        (3, 4 * math.pi / 3),
        (4, math.pi**2 / 2),
    ],
)
def test_omega(d: int, expected: float) -> None:
    assert omega(d) == pytest.approx(expected, rel=1e-15)


def test_omega_zero() -> None:
    with pytest.raises(DomainError):
        omega(0)


@pytest.mark.parametrize(
    "d,k,radius,expected",
    [
        (2, 1, 1.0, math.pi),
        (2, 2, 1.0, math.pi),
        (2, 1, 0.5, math.pi / 2),
        (2, 2, 0.5, math.pi / 4),
        (3, 1, 1.0, 4.0),
        (3, 2, 1.0, 2 * math.pi),
        (3, 3, 1.0, 4 * math.pi / 3),
        (3, 3, 2.0, 32 * math.pi / 3),
    ],
)
def test_ball_intrinsic_volume(d: int, k: int, radius: float, expected: float) -> None:
    assert ball_intrinsic_volume(d, k, radius) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("d,k", [(2, 0), (2, 3), (0, 1)])
def test_ball_intrinsic_volume_bad_k(d: int, k: int) -> None:
    with pytest.raises(DomainError):
        ball_intrinsic_volume(d, k, 1.0)


def test_tolerances_ordering() -> None:
    with pytest.raises(DomainError) as excinfo:
        Tolerances(tol_geom=1e-12, tol_merge=1e-9, tol_check=1e-9)
    assert str(excinfo.value) == (
        "Tolerances must satisfy tol_merge <= tol_geom <= tol_check"
    )


def test_tolerances_positive() -> None:
    with pytest.raises(DomainError):
        Tolerances(tol_geom=0.0)


def test_point_set_dedup() -> None:
    x = PointSet.from_coords([(0, 0), (0, 0), (1, 0), (1, 1e-14)], 1.0)
    assert x.points == ((0.0, 0.0), (1.0, 0.0))
    assert len(x) == 2
    assert x.dim == 2
    assert x.array.shape == (2, 2)


@pytest.mark.parametrize(
    "coords,radius",
    [
        ([], 1.0),
        ([(0.0, 0.0), (0.0, 0.0, 0.0)], 1.0),
        ([(0.0,)], 1.0),
        ([(0.0, math.nan)], 1.0),
        ([(0.0, math.inf)], 1.0),
        ([(0.0, 0.0)], 0.0),
        ([(0.0, 0.0)], -1.0),
        ([tuple([0.0] * 9)], 1.0),
    ],
)
def test_point_set_invalid(coords: list[tuple[float, ...]], radius: float) -> None:
    with pytest.raises(DomainError):
        PointSet.from_coords(coords, radius)


def test_point_set_union() -> None:
    x = PointSet.from_coords([(0, 0), (1, 0)], 1.0)
    y = PointSet.from_coords([(1, 0), (0, 1)], 1.0)
    assert x.union(y).points == ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))
    with pytest.raises(DomainError):
        x.union(PointSet.from_coords([(0, 0)], 2.0))


def test_ball_negative_radius() -> None:
    with pytest.raises(DomainError):
        Ball((0.0, 0.0), -1.0)


@pytest.mark.parametrize(
    "rho,expected",
    [
        (0.25, Ball((1.0, 2.0), 0.75)),
        (1.0, SinglePoint((1.0, 2.0))),
        (1.0 + 1e-12, SinglePoint((1.0, 2.0))),
        (1.5, EMPTY),
    ],
)
def test_dual_ball(rho: float, expected: object) -> None:
    assert dual_ball(Ball((1.0, 2.0), rho), 1.0) == expected


def test_disk_polygon() -> None:
    disk = ArcPolygon.disk((1.0, -1.0), 2.0)
    disk.validate()
    assert disk.full_disk
    assert disk.vertices == ()
    assert disk.centers == ((1.0, -1.0),)


def test_lens_vertices() -> None:
    lens = make_lens(1.0, 1.0)
    lens.validate()
    assert len(lens.arcs) == 2
    got = sorted(lens.vertices, key=lambda v: v[1])
    assert got[0] == pytest.approx((0.0, -ROOT3 / 2), abs=1e-12)
    assert got[1] == pytest.approx((0.0, ROOT3 / 2), abs=1e-12)


def test_validate_rejects_broken_cycle() -> None:
    lens = make_lens(1.0, 1.0)
    a0, a1 = lens.arcs
    broken = ArcPolygon(1.0, (a0, Arc(a1.center, a1.start_angle + 0.1, a1.end_angle)))
    with pytest.raises(DomainError):
        broken.validate()


def test_full_disk_needs_one_arc() -> None:
    lens = make_lens(1.0, 1.0)
    with pytest.raises(DomainError):
        ArcPolygon(1.0, lens.arcs, full_disk=True)


def test_hausdorff_empty() -> None:
    lens = Region(make_lens(1.0, 1.0))
    assert hausdorff_distance(EMPTY, EMPTY) == 0.0
    assert hausdorff_distance(EMPTY, lens) == math.inf
    assert hausdorff_distance(lens, EMPTY) == math.inf


def test_hausdorff_disks() -> None:
    a = ArcPolygon.disk((0.0, 0.0), 1.0)
    b = ArcPolygon.disk((0.3, 0.4), 1.0)
    assert hausdorff_distance(a, b) == pytest.approx(0.5, abs=1e-12)
    ball = Ball((0.0, 0.0), 0.75)
    assert hausdorff_distance(a, ball) == pytest.approx(0.25, abs=1e-12)


def test_hausdorff_points() -> None:
    d = hausdorff_distance(SinglePoint((0.0, 0.0)), SinglePoint((3.0, 4.0)))
    assert d == pytest.approx(5.0, abs=1e-12)


def test_hausdorff_lens_to_disk() -> None:
    # Farthest point of the unit disk about the origin from the lens is
    # (±1, 0), at distance 1/2 from the lens tips
    lens = make_lens(1.0, 1.0)
    disk = ArcPolygon.disk((0.0, 0.0), 1.0)
    assert hausdorff_distance(lens, disk) == pytest.approx(0.5, abs=1e-12)


def test_hausdorff_nonplanar() -> None:
    with pytest.raises(DomainError):
        hausdorff_distance(SinglePoint((0.0, 0.0, 0.0)), SinglePoint((0.0, 0.0, 1.0)))


def test_area_centroid_disk() -> None:
    area, c = area_centroid(ArcPolygon.disk((2.0, -1.0), 0.5))
    assert area == pytest.approx(math.pi / 4, rel=1e-12)
    assert c == pytest.approx((2.0, -1.0), abs=1e-12)


def test_area_centroid_lens() -> None:
    area, c = area_centroid(make_lens(1.0, 1.0).transformed(shift=(1.0, 1.0)))
    assert area == pytest.approx(2 * math.pi / 3 - ROOT3 / 2, rel=1e-12)
    assert c == pytest.approx((1.0, 1.0), abs=1e-12)


def test_normalize_pose_centers_body() -> None:
    poly = body_of([(0.0, 0.0), (0.4, 0.1), (0.1, 0.5)]).transformed(
        rotation=1.0, shift=(3.0, -2.0)
    )
    _, c = area_centroid(normalize_pose(poly))
    assert c == pytest.approx((0.0, 0.0), abs=1e-12)


def test_normalize_pose_requires_region() -> None:
    with pytest.raises(DomainError):
        normalize_pose(EMPTY)  # type: ignore[arg-type]


@settings(max_examples=25, deadline=None)
@given(
    rotation=st.floats(-math.pi, math.pi),
    dx=st.floats(-5, 5),
    dy=st.floats(-5, 5),
    reflect=st.booleans(),
)
def test_congruent_copies(rotation: float, dx: float, dy: float, reflect: bool) -> None:
    poly = body_of([(0.0, 0.0), (0.4, 0.1), (0.1, 0.5)])
    moved = poly.transformed(rotation=rotation, shift=(dx, dy), reflect=reflect)
    assert congruence_distance(poly, moved) <= 1e-9
    assert is_congruent(Region(poly), Region(moved))


def test_lens_congruence() -> None:
    lens = make_lens(1.0, 1.0)
    turned = lens.transformed(rotation=0.3, shift=(0.5, 0.5))
    assert is_congruent(lens, turned)
    assert not is_congruent(lens, make_lens(1.0, 1.1))


def test_congruence_with_ball() -> None:
    disk = ArcPolygon.disk((4.0, 4.0), 0.5)
    ball = Ball((0.0, 0.0), 0.5)
    assert congruence_distance(disk, ball) == pytest.approx(0.0, abs=1e-12)
    assert congruence_distance(Ball((0.0, 0.0), 0.5), Ball((1.0, 1.0), 0.75)) == 0.25
    assert not is_congruent(make_lens(1.0, 1.0), Ball((0.0, 0.0), 0.5))
