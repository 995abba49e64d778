import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from procsup import rng
from procsup.chaining import (
    EXHAUSTIVE_MAX_POINTS,
    SUP_BOUND_FACTOR,
    Block,
    PartitionTree,
    build_partition_greedy,
    chain_bound,
    combine_sum_set,
    exhaustive_gamma,
    level_budget,
    tree_from_dict,
    verify_sup_bound,
)
from procsup.core import FiniteSet, Point, ProcessKind, Seed
from procsup.errors import CapacityError, ParameterError, ValidationError
from procsup.moments import MomentModel
from procsup.suprema import brute_force_bernoulli_sup


def _random_set(seed, count, dim, label="chaining-test"):
    gen = rng.stream(seed, label)
    rows = rng.standard_normal(gen, (count, dim))
    return FiniteSet(name=f"{label}-{seed}", points=tuple(Point(tuple(map(float, r))) for r in rows))


def test_level_budgets():
    assert [level_budget(n) for n in range(4)] == [2, 4, 16, 256]
    with pytest.raises(ParameterError):
        level_budget(-1)


def test_block_sorts_members_and_checks_rep():
    b = Block(members=(3, 1, 2), rep=2)
    assert b.members == (1, 2, 3)
    with pytest.raises(ValidationError):
        Block(members=(0, 1), rep=5)


def test_tree_validation_rejects_bad_structures():
    sing = lambda i: Block(members=(i,), rep=i)
    with pytest.raises(ValidationError, match="level 0"):
        PartitionTree(n_points=2, levels=((sing(0), sing(1)),))
    with pytest.raises(ValidationError, match="singleton"):
        PartitionTree(n_points=2, levels=((Block((0, 1), 0),),))
    with pytest.raises(ValidationError, match="covered"):
        PartitionTree(n_points=2, levels=((Block((0, 1), 0),), (sing(0),)))
    # level 2 blocks must refine level 1
    with pytest.raises(ValidationError, match="straddles"):
        PartitionTree(
            n_points=3,
            levels=(
                (Block((0, 1, 2), 0),),
                (Block((0, 1), 0), Block((2,), 2)),
                (Block((1, 2), 1), sing(0)),
            ),
        )


def test_tree_budget_enforced():
    # level 1 admits at most 4 blocks; five singletons must be rejected
    sing = lambda i: Block(members=(i,), rep=i)
    with pytest.raises(ValidationError, match="budget"):
        PartitionTree(
            n_points=5,
            levels=((Block(tuple(range(5)), 0),), tuple(sing(i) for i in range(5))),
        )


def test_tree_dict_roundtrip():
    tree = build_partition_greedy(_random_set(3, 7, 4))
    back = tree_from_dict(tree.to_dict())
    assert back == tree


@given(st.integers(min_value=1, max_value=12), st.integers(min_value=0, max_value=2**31))
def test_greedy_tree_is_admissible_and_terminal(count, seed):
    ts = _random_set(seed, count, 3, "greedy-prop")
    tree = build_partition_greedy(ts)  # construction validates admissibility
    assert all(len(b.members) == 1 for b in tree.levels[-1])
    assert tree.depth <= max(1, math.ceil(math.log2(max(2, count))))  # singletons come fast


def test_chain_bound_two_points_is_increment_norm():
    s, t = Point((0.0, 0.0)), Point((3.0, 4.0))
    ts = FiniteSet(name="pair", points=(s, t))
    bound = chain_bound(ts, build_partition_greedy(ts), MomentModel.gaussian_exact())
    assert bound.value == pytest.approx(5.0, rel=1e-12)  # ||t - s||_2 at p = 2


def test_chain_bound_checks_tree_size():
    ts = _random_set(0, 3, 2)
    other = build_partition_greedy(_random_set(1, 4, 2))
    with pytest.raises(ParameterError):
        chain_bound(ts, other, MomentModel.gaussian_exact())


@pytest.mark.parametrize(
    "model",
    [MomentModel.gaussian_exact(), MomentModel.bernoulli_exact(), MomentModel.bernoulli_proxy()],
    ids=lambda m: m.label,
)
@pytest.mark.parametrize("count", [2, 3, 4, 5])
def test_exhaustive_never_exceeds_greedy(model, count):
    for seed in range(6):
        ts = _random_set(10 * seed + count, count, 5, "exh")
        best = exhaustive_gamma(ts, model).value
        greedy = chain_bound(ts, build_partition_greedy(ts), model).value
        assert best <= greedy * (1 + 1e-12)


def test_exhaustive_two_point_gaussian_is_distance():
    for seed in range(8):
        ts = _random_set(seed, 2, 6, "exh-pair")
        want = float(np.linalg.norm(ts.points[1].array - ts.points[0].array))
        got = exhaustive_gamma(ts, MomentModel.gaussian_exact()).value
        assert got == pytest.approx(want, rel=1e-12)


def test_exhaustive_point_cap():
    ts = _random_set(0, EXHAUSTIVE_MAX_POINTS + 1, 3)
    with pytest.raises(CapacityError):
        exhaustive_gamma(ts, MomentModel.gaussian_exact())


# --- sum-set combiner ---


def test_combine_sum_set_with_origin_shifts_levels():
    ts = _random_set(5, 4, 3, "comb-base")
    zero = FiniteSet(name="origin", points=(Point.zero(3),))
    combined, tree = combine_sum_set(
        zero, build_partition_greedy(zero), ts, build_partition_greedy(ts)
    )
    assert combined.points == ts.points  # 0 + B = B, order preserved
    base = build_partition_greedy(ts)
    model = MomentModel.gaussian_exact()
    got = chain_bound(combined, tree, model)
    # the combined tree replays the base splits one level later, where the
    # norm order doubles, so the bound can only grow and by at most sqrt(3)
    lhs = chain_bound(ts, base, model).value
    assert lhs <= got.value <= math.sqrt(3.0) * lhs * (1 + 1e-12)


def test_combine_sum_set_covers_all_sums():
    a = _random_set(1, 3, 4, "comb-a")
    b = _random_set(2, 4, 4, "comb-b")
    combined, tree = combine_sum_set(
        a, build_partition_greedy(a), b, build_partition_greedy(b)
    )
    want = {tuple(pa.array + pb.array) for pa in a.points for pb in b.points}
    assert {p.coords for p in combined.points} == want
    assert tree.n_points == len(combined)


@pytest.mark.parametrize("seed", range(5))
def test_combiner_subadditivity_sqrt3(seed):
    model = MomentModel.gaussian_exact()
    a = _random_set(seed, 4, 5, "sub-a")
    b = _random_set(seed + 100, 5, 5, "sub-b")
    tree_a, tree_b = build_partition_greedy(a), build_partition_greedy(b)
    combined, tree = combine_sum_set(a, tree_a, b, tree_b)
    lhs = chain_bound(combined, tree, model).value
    rhs = chain_bound(a, tree_a, model).value + chain_bound(b, tree_b, model).value
    assert lhs <= math.sqrt(3.0) * rhs * (1 + 1e-12)


def test_combine_dimension_mismatch():
    a = _random_set(1, 2, 3)
    b = _random_set(2, 2, 4)
    with pytest.raises(ParameterError):
        combine_sum_set(a, build_partition_greedy(a), b, build_partition_greedy(b))


# --- the supremum bound ---


@pytest.mark.parametrize("seed", range(4))
def test_verify_sup_bound_bernoulli_exact(seed):
    ts = _random_set(seed, 10, 8, "verify")
    report = verify_sup_bound(ts, ProcessKind.BERNOULLI)
    assert not report.violation
    assert report.lhs == pytest.approx(brute_force_bernoulli_sup(ts).value)
    assert report.ratio <= SUP_BOUND_FACTOR
    assert report.extras["tree_depth"] >= 1


def test_verify_sup_bound_gaussian_mc():
    ts = _random_set(7, 6, 5, "verify-g")
    report = verify_sup_bound(ts, ProcessKind.GAUSSIAN, samples=20_000, seed=Seed(1))
    assert not report.violation
    assert report.lhs_stderr > 0.0


def test_verify_sup_bound_rejects_gaussian_exact():
    ts = _random_set(7, 3, 4)
    with pytest.raises(ParameterError):
        verify_sup_bound(ts, ProcessKind.GAUSSIAN, exact=True)
