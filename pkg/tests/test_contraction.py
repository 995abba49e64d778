import pytest
from hypothesis import given
from hypothesis import strategies as st

from procsup import rng
from procsup.contraction import (
    CoordinateMap,
    MappedPair,
    apply_map,
    check_condition,
    compare_suprema,
    fit_min_C,
    trimmed_sq_distance,
)
from procsup.core import FiniteSet, Point
from procsup.errors import ParameterError, ValidationError


def _random_set(seed, count=6, dim=5, label="contraction-test"):
    gen = rng.stream(seed, label)
    rows = rng.standard_normal(gen, (count, dim))
    return FiniteSet(name=f"{label}-{seed}", points=tuple(Point(tuple(map(float, r))) for r in rows))


def test_trimmed_sq_distance_manual():
    s, t = Point((3.0, 1.0)), Point((0.0, 0.0))
    assert trimmed_sq_distance(s, t, 0) == pytest.approx(10.0, rel=1e-15)
    assert trimmed_sq_distance(s, t, 1) == pytest.approx(1.0, rel=1e-15)  # drop the largest square
    assert trimmed_sq_distance(s, t, 2) == 0.0
    assert trimmed_sq_distance(s, t, 9) == 0.0  # over-trim clamps to zero


def test_coordinate_map_validation():
    with pytest.raises(ParameterError, match="unknown map"):
        CoordinateMap("square")
    with pytest.raises(ParameterError):
        CoordinateMap("scale")  # missing factor
    with pytest.raises(ParameterError, match="lo <= hi"):
        CoordinateMap("clamp", (2.0, -1.0))
    with pytest.raises(ParameterError, match="nonnegative"):
        CoordinateMap("soft_threshold", (-0.5,))
    assert CoordinateMap("scale", (2.0,)).label == "scale(2.0)"


def test_apply_map_dedups_image_and_keeps_correspondence():
    t = Point((1.0, -2.0))
    ts = FiniteSet(name="pm", points=(t, Point((-1.0, 2.0))))
    pair = apply_map(ts, CoordinateMap("abs"))
    assert len(pair.image) == 1  # |t| == |-t|
    assert pair.correspondence == (0, 0)
    assert pair.image.points[0] == Point((1.0, 2.0))


@pytest.mark.parametrize("name,params", [("abs", ()), ("clamp", (-1.0, 1.0)),
                                         ("soft_threshold", (0.5,))])
def test_lipschitz_maps_satisfy_condition_at_one(name, params):
    for seed in range(5):
        pair = apply_map(_random_set(seed), CoordinateMap(name, params))
        result = check_condition(pair, 1.0, p_max=5, tol=1e-12)
        assert result.satisfied, (name, seed, result.margin)


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0, 5.0])
def test_fit_calibration_on_scaling(c):
    pair = apply_map(_random_set(11, count=5, dim=4), CoordinateMap("scale", (c,)))
    report = fit_min_C(pair, p_max=4)
    assert report.c_star == pytest.approx(max(abs(c), 1.0), abs=1e-4)


def test_fit_reports_infeasible_above_cap():
    pair = apply_map(_random_set(3, count=4, dim=3), CoordinateMap("scale", (5000.0,)))
    report = fit_min_C(pair, p_max=3)
    assert report.c_star is None
    assert report.to_dict()["c_star"] == "infeasible"


@given(st.integers(min_value=0, max_value=2**31), st.floats(min_value=1.0, max_value=8.0))
def test_fitted_constant_is_feasible_and_tight(seed, probe):
    pair = apply_map(_random_set(seed, count=4, dim=4, label="fit-prop"),
                     CoordinateMap("scale", (probe,)))
    report = fit_min_C(pair, p_max=4)
    assert report.c_star is not None
    assert check_condition(pair, report.c_star, p_max=4).satisfied
    # feasibility is monotone: anything clearly above stays feasible
    assert check_condition(pair, report.c_star * 1.5 + 0.1, p_max=4).satisfied


def test_check_condition_rejects_bad_arguments():
    pair = apply_map(_random_set(0), CoordinateMap("abs"))
    with pytest.raises(ParameterError):
        check_condition(pair, 0.5, p_max=3)
    with pytest.raises(ParameterError):
        check_condition(pair, 1.0, p_max=-1)
    with pytest.raises(ParameterError):
        fit_min_C(pair, tol=0.0)


def test_mapped_pair_validates_correspondence():
    src = _random_set(1, count=2, dim=2)
    img = _random_set(2, count=2, dim=2)
    with pytest.raises(ValidationError):
        MappedPair(source=src, image=img, correspondence=(0,), map_label="x")
    with pytest.raises(ValidationError):
        MappedPair(source=src, image=img, correspondence=(0, 5), map_label="x")


@pytest.mark.parametrize("name,params", [("abs", ()), ("clamp", (-0.8, 0.8)),
                                         ("soft_threshold", (0.3,))])
def test_contractions_do_not_increase_sup(name, params):
    for seed in range(4):
        pair = apply_map(_random_set(seed, count=8, dim=6), CoordinateMap(name, params))
        report = compare_suprema(pair)
        assert report.lhs <= report.rhs * (1 + 1e-12) + 1e-12
        assert report.extras["map"].startswith(name)
