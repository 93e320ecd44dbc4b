from __future__ import annotations
from collections.abc import Callable
import math
from typing import Any
import numpy as np
import pytest
from pytest_mock import MockerFixture
from ballbody.core import Ball, ConvergenceError, DomainError, PointSet, Region
from ballbody.plane import ball_hull_2d, intrinsic_volumes_2d, make_lens
from ballbody.verify import (
    CheckReport,
    GeneratorLaw,
    TrialRecord,
    TrialSpec,
    check_blaschke_santalo,
    check_brunn_minkowski,
    check_identities,
    check_mahler_2d,
    check_product,
    check_reverse_isoperimetric,
    check_support_identity,
    evaluate_blaschke_santalo_2d,
    evaluate_brunn_minkowski_2d,
    evaluate_product_2d,
    evaluate_reverse_isoperimetric_2d,
    fit_area,
    fit_homothety,
    hull_area,
    lens_dual_vk,
    product_profile,
    sample_generators,
    trial_rng,
)

ROOT3 = math.sqrt(3)

LENS_AREA = 2 * math.pi / 3 - ROOT3 / 2
SPINDLE_AREA = math.pi / 3 - ROOT3 / 2

TRIANGLE = np.array([(0.0, 0.0), (0.4, 0.1), (0.1, 0.5)])


@pytest.fixture
def lens() -> Region:
    return Region(make_lens(1.0, 1.0))


def small_spec(trials: int = 6, seed: int = 42, **kwargs: Any) -> TrialSpec:
    return TrialSpec(trials=trials, seed=seed, **kwargs)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"dim": 1},
        {"dim": 9},
        {"r": 0.0},
        {"r": math.inf},
        {"n_min": 0},
        {"n_min": 5, "n_max": 4},
        {"trials": 0},
        {"seed": -1},
        {"law_scale": 0.0},
        {"mc_samples": 999},
    ],
)
def test_trial_spec_invalid(kwargs: dict) -> None:
    with pytest.raises(DomainError):
        TrialSpec(**kwargs)


@pytest.mark.parametrize("law", list(GeneratorLaw))
def test_sample_generators(law: GeneratorLaw) -> None:
    spec = TrialSpec(dim=3, law=law, n_min=4, n_max=6)
    pts = sample_generators(spec, trial_rng(spec, 0))
    assert pts.shape[1] == 3
    assert 4 <= len(pts) <= 6
    assert np.array_equal(pts, sample_generators(spec, trial_rng(spec, 0)))
    if law is GeneratorLaw.UNIFORM:
        assert np.all(np.linalg.norm(pts, axis=1) <= 0.5)


@pytest.mark.parametrize("k", [1, 2])
def test_blaschke_santalo_lens(lens: Region, k: int) -> None:
    rho = math.sqrt(LENS_AREA / math.pi)
    cmp = evaluate_blaschke_santalo_2d(lens, k, 1.0)
    expected_lhs = math.pi / 3 if k == 1 else SPINDLE_AREA
    expected_rhs = math.pi * (1 - rho) if k == 1 else math.pi * (1 - rho) ** 2
    assert cmp.lhs == pytest.approx(expected_lhs, abs=1e-12)
    assert cmp.rhs == pytest.approx(expected_rhs, abs=1e-12)
    assert cmp.slack == pytest.approx(expected_rhs - expected_lhs, abs=1e-12)
    assert not cmp.near_equality
    assert cmp.congruent is None


@pytest.mark.parametrize("k", [1, 2])
def test_blaschke_santalo_ball_is_equality(k: int) -> None:
    cmp = evaluate_blaschke_santalo_2d(Ball((0.3, 0.1), 0.5), k, 1.0)
    assert cmp.slack == pytest.approx(0.0, abs=1e-12)
    assert cmp.near_equality
    assert cmp.congruent


@pytest.mark.parametrize(
    "x,k,r,expected",
    [
        (0.3, 2, 1.0, 0.0441),
        (0.5, 1, 1.0, 0.25),
        (0.0, 1, 1.0, 0.0),
        (1.0, 3, 2.0, 1.0),
    ],
)
def test_product_profile(x: float, k: int, r: float, expected: float) -> None:
    assert product_profile(x, k, r) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("x", [-0.1, 1.1])
def test_product_profile_range(x: float) -> None:
    with pytest.raises(DomainError):
        product_profile(x, 1, 1.0)


def test_product_lens(lens: Region) -> None:
    cmp = evaluate_product_2d(lens, 2, 1.0)
    assert cmp.lhs == pytest.approx(LENS_AREA * SPINDLE_AREA, abs=1e-12)
    assert cmp.rhs == pytest.approx((math.pi / 4) ** 2, abs=1e-12)
    assert cmp.slack > 0
    cmp = evaluate_product_2d(lens, 1, 1.0)
    assert cmp.lhs == pytest.approx(2 * math.pi**2 / 9, abs=1e-12)


def test_product_half_ball_is_equality() -> None:
    cmp = evaluate_product_2d(Ball((0.0, 0.0), 0.5), 2, 1.0)
    assert cmp.near_equality
    assert cmp.congruent


def test_brunn_minkowski_lens(lens: Region) -> None:
    assert evaluate_brunn_minkowski_2d(lens, 1, 1.0) == pytest.approx(0.0, abs=1e-12)
    expected = math.sqrt(math.pi) - math.sqrt(LENS_AREA) - math.sqrt(SPINDLE_AREA)
    slack = evaluate_brunn_minkowski_2d(lens, 2, 1.0)
    assert slack == pytest.approx(expected, abs=1e-12)


def test_reverse_isoperimetric_lens(lens: Region) -> None:
    perimeter_slack, area_slack = evaluate_reverse_isoperimetric_2d(lens, 1.0)
    assert perimeter_slack == pytest.approx(0.0, abs=1e-9)
    assert area_slack == pytest.approx(0.0, abs=1e-9)


def test_lens_dual_vk() -> None:
    assert lens_dual_vk(1.0, LENS_AREA, 1) == pytest.approx(math.pi / 3, abs=1e-10)
    assert lens_dual_vk(1.0, LENS_AREA, 2) == pytest.approx(SPINDLE_AREA, abs=1e-10)


def test_fit_area() -> None:
    fit, hull = fit_area(TRIANGLE, 1.0, 1.0)
    assert fit.residual <= 1e-6
    assert intrinsic_volumes_2d(hull).v2 == pytest.approx(1.0, rel=1e-6)
    assert hull_area(fit.generators) == pytest.approx(fit.value)
    assert isinstance(ball_hull_2d(fit.generators), Region)


@pytest.mark.parametrize("v", [0.0, math.pi, -1.0])
def test_fit_area_range(v: float) -> None:
    with pytest.raises(DomainError):
        fit_area(TRIANGLE, 1.0, v)


def test_fit_homothety_coincident() -> None:
    with pytest.raises(DomainError):
        fit_homothety(np.array([(0.5, 0.5)]), 1.0, 1.0, hull_area)


def test_fit_homothety_unreachable() -> None:
    with pytest.raises(ConvergenceError):
        fit_homothety(TRIANGLE, 1.0, 10.0, hull_area)


def test_fit_homothety_steps_inside_bracket() -> None:
    calls: list[int] = []

    def flaky(x: PointSet) -> float:
        calls.append(len(x))
        if len(calls) == 1:
            raise ConvergenceError("nearly a point")
        return hull_area(x)

    fit = fit_homothety(TRIANGLE, 1.0, 1.0, flaky)
    assert fit.residual <= 1e-6
    assert len(calls) > 2


def test_check_report_summary() -> None:
    records = (
        TrialRecord(0, "aa", {"lhs": 1.0}, 0.5, False),
        TrialRecord(
            1, "bb", {"lhs": 2.0}, -0.25, True, near_equality=True, congruent=False
        ),
        TrialRecord(
            2,
            "cc",
            {"lhs": 3.0},
            1e-12,
            False,
            near_equality=True,
            congruent=True,
            resampled=3,
        ),
    )
    report = CheckReport("demo", 7, records)
    assert report.trials_run == 3
    assert report.violations == 1
    assert report.worst_margin == -0.25
    assert report.equality_cases == 2
    assert report.equality_congruent == 1
    assert report.resampled == 3
    assert not report.passed
    assert report.summary_row() == {
        "check": "demo",
        "trials": 3,
        "violations": 1,
        "worst_margin": -0.25,
        "seed": 7,
    }
    first = next(report.jsonl_records())
    assert first == {
        "check": "demo",
        "index": 0,
        "inputs": "aa",
        "values": {"lhs": 1.0},
        "slack": 0.5,
        "violated": False,
        "near_equality": False,
        "congruent": None,
        "resampled": 0,
        "error": None,
    }


def test_empty_report() -> None:
    report = CheckReport("demo", 0)
    assert report.passed
    assert report.worst_margin == math.inf


def test_failed_trials_are_reported(mocker: MockerFixture) -> None:
    def trial(_spec: TrialSpec, _k: int, index: int) -> TrialRecord:
        if index == 1:
            raise ConvergenceError("Support points could not be certified")
        return TrialRecord(index, "aa", {"lhs": 1.0}, 0.5, False)

    mocker.patch("ballbody.verify._bs_trial_2d", side_effect=trial)
    report = check_blaschke_santalo(small_spec(trials=3), 1)
    assert report.trials_run == 3
    assert report.failures == 1
    assert report.violations == 0
    assert report.worst_margin == 0.5
    assert not report.passed
    failed = list(report.jsonl_records())[1]
    assert failed["error"] == "Support points could not be certified"
    assert failed["violated"] is False
    assert math.isnan(failed["slack"])


@pytest.mark.parametrize("k", [1, 2])
def test_check_blaschke_santalo_2d(k: int) -> None:
    report = check_blaschke_santalo(small_spec(), k)
    assert report.check_name == f"blaschke_santalo_k{k}"
    assert report.trials_run == 6
    assert report.passed
    assert report.worst_margin >= -1e-9


def test_check_is_deterministic() -> None:
    spec = small_spec(trials=3, law=GeneratorLaw.CLUSTERED)
    assert check_blaschke_santalo(spec, 2) == check_blaschke_santalo(spec, 2)
    other = check_blaschke_santalo(small_spec(trials=3, seed=43), 2)
    assert [r.digest for r in other.records] != [
        r.digest for r in check_blaschke_santalo(small_spec(trials=3), 2).records
    ]


@pytest.mark.parametrize("k", [1, 2])
def test_check_product(k: int) -> None:
    assert check_product(small_spec(), k).passed


def test_check_support_identity_2d() -> None:
    spec = small_spec(law=GeneratorLaw.GAUSSIAN, law_scale=0.2)
    report = check_support_identity(spec)
    assert report.passed
    assert all(rec.values["residual"] <= 1e-9 for rec in report.records)


def test_check_identities() -> None:
    report = check_identities(small_spec())
    assert report.passed
    for rec in report.records:
        assert rec.values["union_mismatches"] == 0
        assert rec.values["order_mismatches"] == 0


@pytest.mark.parametrize("k", [1, 2])
def test_check_brunn_minkowski(k: int) -> None:
    assert check_brunn_minkowski(small_spec(), k).passed


def test_check_reverse_isoperimetric() -> None:
    assert check_reverse_isoperimetric(small_spec()).passed


@pytest.mark.parametrize("k", [1, 2])
def test_check_mahler_2d(k: int) -> None:
    report = check_mahler_2d(small_spec(trials=4), k, 1.0)
    assert report.passed
    for rec in report.records:
        assert rec.values["area"] == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize(
    "call",
    [
        lambda: check_product(TrialSpec(dim=3, trials=1), 1),
        lambda: check_identities(TrialSpec(dim=3, trials=1)),
        lambda: check_blaschke_santalo(TrialSpec(trials=1), 3),
        lambda: check_blaschke_santalo(TrialSpec(trials=1), 0),
        lambda: check_mahler_2d(TrialSpec(trials=1), 3, 1.0),
        lambda: check_mahler_2d(TrialSpec(trials=1), 1, 4.0),
        lambda: check_brunn_minkowski(TrialSpec(trials=1), 3),
        lambda: check_reverse_isoperimetric(TrialSpec(dim=4, trials=1)),
    ],
)
def test_check_rejects_bad_arguments(call: Callable[[], CheckReport]) -> None:
    with pytest.raises(DomainError):
        call()


@pytest.mark.slow
@pytest.mark.parametrize("k", [1, 3])
def test_check_blaschke_santalo_3d(k: int) -> None:
    spec = TrialSpec(
        dim=3,
        trials=2,
        seed=1,
        mc_samples=50_000,
        hull_directions=200,
        width_directions=100,
    )
    report = check_blaschke_santalo(spec, k)
    assert report.trials_run == 2
    assert report.passed
    for rec in report.records:
        assert rec.values["sigma"] >= 0


@pytest.mark.slow
@pytest.mark.parametrize("k", [1, 3])
def test_check_blaschke_santalo_3d_five_generators(k: int) -> None:
    spec = TrialSpec(
        dim=3,
        n_min=5,
        n_max=5,
        trials=4,
        seed=0,
        mc_samples=50_000,
        hull_directions=500,
        width_directions=100,
    )
    report = check_blaschke_santalo(spec, k)
    assert report.trials_run == 4
    assert report.failures == 0
    assert report.passed


@pytest.mark.slow
def test_check_support_identity_3d() -> None:
    spec = TrialSpec(dim=3, trials=2, seed=3, hull_directions=400)
    assert check_support_identity(spec).passed
