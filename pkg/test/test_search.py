from __future__ import annotations
import math
import numpy as np
import pytest
from ballbody.core import DomainError, PointSet, congruence_distance
from ballbody.nd import spindle_volume_3d
from ballbody.plane import ball_hull_2d, intrinsic_volumes_2d, make_lens
from ballbody.search import (
    SearchConfig,
    baselines_3d,
    expand,
    lens_baseline,
    measure,
    minimize,
    objective,
    project_to_volume,
    reduce,
)

ROOT3 = math.sqrt(3)

LENS_AREA = 2 * math.pi / 3 - ROOT3 / 2
SPINDLE_AREA = math.pi / 3 - ROOT3 / 2
LENS_VOLUME_3D = 5 * math.pi / 12


def pairwise(pts: np.ndarray) -> np.ndarray:
    return np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)


def test_config_volume_message() -> None:
    with pytest.raises(DomainError) as excinfo:
        SearchConfig(v=4.0)
    assert str(excinfo.value) == (
        "Target volume must satisfy 0 < v < 3.141592653589793 (the volume of"
        " B[o, r]), got 4.0"
    )


@pytest.mark.parametrize(
    "kwargs",
    [
        {"v": 1.0, "dim": 4},
        {"v": 1.0, "r": -1.0},
        {"v": 0.0},
        {"v": 1.0, "n": 1},
        {"v": 1.0, "k": 3},
        {"v": 1.0, "dim": 3, "k": 2},
        {"v": 1.0, "restarts": 0},
        {"v": 1.0, "max_evals": 0},
        {"v": 1.0, "penalties": ()},
        {"v": 1.0, "penalties": (1.0, -1.0)},
        {"v": 1.0, "seed": -2},
    ],
)
def test_config_invalid(kwargs: dict) -> None:
    with pytest.raises(DomainError):
        SearchConfig(**kwargs)


def test_config_dimensions() -> None:
    assert SearchConfig(v=1.0, n=4).n_params == 5
    assert SearchConfig(v=1.0, dim=3, n=4).n_params == 7
    assert not SearchConfig(v=1.0).exploratory
    assert SearchConfig(v=1.0, dim=3, k=3).exploratory


def test_expand_reduce() -> None:
    config = SearchConfig(v=1.0, n=4)
    params = np.array([0.4, 0.1, 0.3, -0.2, 0.25])
    pts = expand(config, params)
    assert pts.shape == (4, 2)
    assert list(pts[0]) == [0.0, 0.0]
    assert list(pts[1]) == [0.4, 0.0]
    assert reduce(config, pts) == pytest.approx(params, abs=1e-15)


def test_reduce_keeps_shape() -> None:
    config = SearchConfig(v=1.0, dim=3, k=3, n=4)
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(4, 3))
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    moved = pts @ q.T + np.array([1.0, -2.0, 0.5])
    back = expand(config, reduce(config, moved))
    assert pairwise(back) == pytest.approx(pairwise(pts), abs=1e-12)
    assert back[1, 1:] == pytest.approx(np.zeros(2), abs=1e-12)


def test_objective_spindle() -> None:
    # The hull of two points one apart is the spindle; its dual is the lens
    config = SearchConfig(v=SPINDLE_AREA, n=2, k=1)
    g = np.array([(-0.5, 0.0), (0.5, 0.0)]).ravel()
    assert objective(config, g, 1e4) == pytest.approx(2 * math.pi / 3, abs=1e-9)
    m = measure(config, PointSet.from_coords(g.reshape(2, 2), 1.0))
    assert m is not None
    assert m.volume == pytest.approx(SPINDLE_AREA, abs=1e-12)


def test_objective_empty_hull() -> None:
    config = SearchConfig(v=1.0, n=2, k=2)
    g = np.array([(-2.0, 0.0), (2.0, 0.0)]).ravel()
    assert objective(config, g, 10.0) == pytest.approx(2 * math.pi + 10.0)
    assert measure(config, PointSet.from_coords(g.reshape(2, 2), 1.0)) is None


def test_measure_3d() -> None:
    config = SearchConfig(v=0.5, dim=3, k=3, n=2)
    m = measure(config, PointSet.from_coords([(-0.5, 0, 0), (0.5, 0, 0)], 1.0))
    assert m is not None
    assert m.dual_vk == pytest.approx(LENS_VOLUME_3D, abs=0.02)
    assert m.volume > 0


def test_project_to_volume() -> None:
    config = SearchConfig(v=1.0, n=3)
    pts = np.array([(0.0, 0.0), (0.4, 0.1), (0.1, 0.5)])
    coords, residual = project_to_volume(config, pts)
    assert residual <= 1e-6
    area = intrinsic_volumes_2d(ball_hull_2d(PointSet.from_coords(coords, 1.0))).v2
    assert area == pytest.approx(1.0, rel=1e-6)
    assert pairwise(coords) / pairwise(coords)[0, 1] == pytest.approx(
        pairwise(pts) / pairwise(pts)[0, 1], abs=1e-9
    )


@pytest.mark.parametrize(
    "v,k,expected",
    [(LENS_AREA, 1, math.pi / 3), (LENS_AREA, 2, SPINDLE_AREA)],
)
def test_lens_baseline(v: float, k: int, expected: float) -> None:
    assert lens_baseline(1.0, v, k) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("v,k", [(1.0, 3), (math.pi, 1), (0.0, 2)])
def test_lens_baseline_invalid(v: float, k: int) -> None:
    with pytest.raises(DomainError):
        lens_baseline(1.0, v, k)


def test_baselines_3d() -> None:
    b = baselines_3d(1.0, LENS_VOLUME_3D, 3)
    assert set(b) == {"lens", "spindle"}
    assert b["lens"] == pytest.approx(spindle_volume_3d(1.0, 1.0), abs=1e-10)
    assert b["spindle"] > 0


@pytest.mark.slow
@pytest.mark.parametrize("k,expected", [(1, math.pi / 3), (2, SPINDLE_AREA)])
def test_minimize_finds_lens(k: int, expected: float) -> None:
    # The lens is the hull of its two tips and one point on each arc
    config = SearchConfig(v=LENS_AREA, k=k, n=4, restarts=20, seed=0)
    result = minimize(config)
    assert result.constraint_residual <= 1e-6
    assert result.baseline == pytest.approx(expected, abs=1e-10)
    assert abs(result.gap) <= 1e-6
    assert result.normalized_shape is not None
    assert congruence_distance(result.normalized_shape, make_lens(1.0, 1.0)) <= 1e-3


@pytest.mark.slow
def test_minimize_3d() -> None:
    config = SearchConfig(
        v=1.0,
        dim=3,
        k=3,
        n=3,
        restarts=2,
        max_evals=40,
        hull_directions=64,
        volume_directions=512,
        width_directions=32,
    )
    result = minimize(config)
    assert result.exploratory
    assert result.normalized_shape is None
    assert result.best_generators.dim == 3
    assert set(result.baselines) == {"lens", "spindle"}
    assert math.isfinite(result.best_objective)
    assert result.constraint_residual <= 1e-6


def test_minimize_2d() -> None:
    config = SearchConfig(v=1.0, k=1, n=3, restarts=2, max_evals=400, seed=3)
    result = minimize(config)
    assert result.constraint_residual <= 1e-6
    assert result.gap >= -1e-9
    assert result.baseline == pytest.approx(lens_baseline(1.0, 1.0, 1))
    assert len(result.trace) == 2
    assert result.normalized_shape is not None
    assert not result.exploratory
    doc = result.for_json()
    assert doc["config"]["v"] == 1.0
    assert doc["gap"] == result.gap
    assert len(doc["best_generators"]) == 3
    again = minimize(config)
    assert again.best_objective == result.best_objective
    assert np.array_equal(again.best_coordinates, result.best_coordinates)
