import math

import numpy as np
import pytest

from procsup import rng
from procsup.core import FiniteSet, Point, Seed
from procsup.errors import ParameterError, ParseError, ValidationError
from procsup.oleszkiewicz import (
    NormKind,
    VectorSystem,
    check_weak_contraction,
    generate_functionals,
    load_vector_system,
    save_vector_system,
    strong_moment_ratio,
    weak_moment_constant,
)
from procsup.suprema import brute_force_bernoulli_sup


def _basis_system(dim, scale=1.0, norm=NormKind.SUP):
    vectors = tuple(
        Point(tuple(scale if j == i else 0.0 for j in range(dim))) for i in range(dim)
    )
    return VectorSystem(name=f"basis-{dim}-{scale}", vectors=vectors, norm=norm)


def _random_system(seed, terms, dim, norm=NormKind.SUP):
    gen = rng.stream(seed, "ole-test")
    rows = rng.standard_normal(gen, (terms, dim))
    vectors = tuple(Point(tuple(map(float, r))) for r in rows)
    return VectorSystem(name=f"rand-{seed}", vectors=vectors, norm=norm)


def test_system_validation():
    with pytest.raises(ValidationError):
        VectorSystem(name="empty", vectors=(), norm=NormKind.SUP)
    with pytest.raises(ValidationError):
        VectorSystem(name="mixed", vectors=(Point((1.0,)), Point((1.0, 2.0))), norm=NormKind.SUP)


def test_functionals_live_in_the_dual_ball():
    for norm in NormKind:
        sample = generate_functionals(norm, 5, 12, Seed(3))
        assert len(sample) == 2 * 5 + 12
        for w in sample.functionals:
            arr = w.array
            dual = np.abs(arr).sum() if norm is NormKind.SUP else np.linalg.norm(arr)
            assert dual <= 1.0 + 1e-9


def test_functionals_deterministic():
    a = generate_functionals(NormKind.SUP, 4, 6, Seed(1))
    b = generate_functionals(NormKind.SUP, 4, 6, Seed(1))
    assert a.functionals == b.functionals


def test_weak_constant_on_halved_system():
    y = _random_system(5, 6, 4)
    x = VectorSystem(
        name="half",
        vectors=tuple(Point(tuple(0.5 * c for c in v.coords)) for v in y.vectors),
        norm=NormKind.SUP,
    )
    funcs = generate_functionals(NormKind.SUP, 4, 8, Seed(2))
    weak = weak_moment_constant(x, y, funcs)
    assert weak.value == pytest.approx(0.5, rel=1e-12)
    strong = strong_moment_ratio(x, y)
    assert strong.ratio == pytest.approx(0.5, rel=1e-12)
    report = check_weak_contraction(x, y, funcs)
    assert report.c_star == pytest.approx(1.0, abs=1e-4)


def test_weak_constant_reports_infinity_when_y_degenerate():
    x = _basis_system(3)
    # term counts must match x; repeated terms are legal in a series
    y = VectorSystem(
        name="zeros", vectors=(Point((0.0, 0.0, 0.0)),) * 3, norm=NormKind.SUP
    )
    funcs = generate_functionals(NormKind.SUP, 3, 0, Seed(0))
    weak = weak_moment_constant(x, y, funcs)
    assert math.isinf(weak.value)
    report = check_weak_contraction(x, y, funcs)
    assert report.c_star is None  # nothing contracts 0 onto a nonzero vector


def test_strong_moment_exact_sup_norm_of_basis_is_one():
    sys_ = _basis_system(4)
    report = strong_moment_ratio(sys_, sys_)
    assert report.lhs == pytest.approx(1.0, abs=1e-14)
    assert report.ratio == pytest.approx(1.0, rel=1e-14)
    assert "exact" in report.lhs_label


def test_strong_moment_exact_euclidean_of_basis_is_sqrt_dim():
    sys_ = _basis_system(5, norm=NormKind.EUCLIDEAN)
    report = strong_moment_ratio(sys_, sys_)
    assert report.lhs == pytest.approx(math.sqrt(5.0), rel=1e-14)


def test_strong_moment_cross_checks_against_sign_supremum():
    # E || sum_i eps_i x_i ||_sup equals E sup over the +/- coordinate columns
    # of the term matrix: two independent enumerations of the same quantity.
    sys_ = _random_system(8, terms=6, dim=3)
    report = strong_moment_ratio(sys_, sys_)
    cols = sys_.matrix.T
    pts = [Point(tuple(map(float, c))) for c in cols]
    pts += [Point(tuple(-v for v in p.coords)) for p in pts]
    sup = brute_force_bernoulli_sup(FiniteSet(name="cols", points=tuple(pts)))
    assert report.lhs == pytest.approx(sup.value, rel=1e-12)


def test_strong_moment_mc_route_for_many_terms():
    sys_ = _random_system(9, terms=25, dim=3)
    report = strong_moment_ratio(sys_, sys_, samples=5000, seed=Seed(1))
    assert "monte-carlo" in report.lhs_label
    assert report.ratio == pytest.approx(1.0, rel=1e-12)  # same content hash, same draws


def test_norm_mismatch_rejected():
    a = _basis_system(3, norm=NormKind.SUP)
    b = _basis_system(3, norm=NormKind.EUCLIDEAN)
    with pytest.raises(ParameterError):
        strong_moment_ratio(a, b)


def test_system_save_load_roundtrip(tmp_path):
    sys_ = _random_system(4, terms=3, dim=4, norm=NormKind.EUCLIDEAN)
    path = tmp_path / "sys.json"
    save_vector_system(sys_, path)
    back = load_vector_system(path)
    assert back.vectors == sys_.vectors
    assert back.norm is sys_.norm


def test_system_load_errors(tmp_path):
    missing = tmp_path / "nope.json"
    with pytest.raises(ParseError, match="no such file"):
        load_vector_system(missing)
    wrong = tmp_path / "wrong.json"
    wrong.write_text('{"format": "finite-set"}')
    with pytest.raises(ParseError, match="not a vector-system file"):
        load_vector_system(wrong)
