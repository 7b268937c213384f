import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cholord import (
    LengthMismatch,
    NotSorted,
    Ordering,
    TooLarge,
    TTransform,
    WeightedDag,
    apply_t_transform,
    check_majorization,
    majorization_table,
    prefix_check,
    schur_criterion,
    weakly_majorizes,
)

from oracles import load_fixture

HUB = load_fixture("three_node_hub")
CHAIN = load_fixture("four_node_chain")


def _dag(fix):
    return WeightedDag.from_json_dict(fix["dag"])


vectors = st.lists(st.floats(min_value=0.0, max_value=100.0), min_size=1, max_size=8)
pos_vectors = st.lists(st.floats(min_value=0.01, max_value=100.0), min_size=1, max_size=8)


def test_weak_majorization_basics():
    assert weakly_majorizes([2.0, 2.0], [3.0, 1.0])
    assert not weakly_majorizes([3.0, 1.0], [2.0, 2.0])
    assert weakly_majorizes([4.0, 3.0, 1.0], [4.24, 3.23, 0.87])
    with pytest.raises(LengthMismatch):
        weakly_majorizes([1.0], [1.0, 2.0])


@given(vectors)
def test_weak_majorization_reflexive(x):
    assert weakly_majorizes(x, x)


@given(vectors, st.integers(0, 7), st.integers(0, 7), st.floats(0.0, 1.0))
def test_t_transform_output_is_majorized(x, i, j, lam):
    i, j = i % len(x), j % len(x)
    if i == j:
        j = (j + 1) % len(x)
    if len(x) == 1:
        return
    out = apply_t_transform(TTransform(i, j, lam), x)
    assert np.sum(out) == pytest.approx(np.sum(x), abs=1e-9 * (1 + abs(np.sum(x))))
    assert weakly_majorizes(out, x)


@given(pos_vectors, st.data())
def test_t_transform_chains_stay_majorized(y, data):
    n = len(y)
    if n == 1:
        return
    x = np.asarray(y, dtype=float)
    for _ in range(data.draw(st.integers(1, 5))):
        i = data.draw(st.integers(0, n - 1))
        j = data.draw(st.integers(0, n - 1))
        if i == j:
            continue
        lam = data.draw(st.floats(0.0, 1.0))
        x = apply_t_transform(TTransform(i, j, lam), x)
    assert weakly_majorizes(x, y)


@given(pos_vectors, st.data())
def test_weak_majorization_transitive(y, data):
    n = len(y)
    if n == 1:
        return
    mid = np.asarray(y, dtype=float)
    for _ in range(2):  # y >= mid >= x via two transform chains
        i, j = data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1))
        if i != j:
            mid = apply_t_transform(TTransform(i, j, data.draw(st.floats(0.0, 1.0))), mid)
    x = mid * data.draw(st.floats(0.5, 1.0))
    assert weakly_majorizes(mid, y)
    assert weakly_majorizes(x, mid)
    assert weakly_majorizes(x, y)


@given(pos_vectors, st.data())
def test_prefix_check_implies_weak_majorization(y, data):
    # draw x by shrinking y a little and sorting, so both outcomes occur
    y = np.asarray(y, dtype=float)
    shrink = data.draw(st.floats(0.3, 1.0))
    x = np.sort(y * shrink)[::-1]
    if prefix_check(x, y):
        assert weakly_majorizes(x, y)


def test_prefix_check_golden_rows():
    assert prefix_check([4.0, 3.0, 1.0], [4.24, 3.0, 0.94])
    assert prefix_check([4.0, 2.0, 1.5, 1.0], [5.33, 1.83, 1.50, 0.82])
    with pytest.raises(NotSorted):
        prefix_check([1.0, 2.0], [3.0, 1.0])
    with pytest.raises(NotSorted):
        prefix_check([1.0, 0.0], [3.0, 1.0])


def test_t_transform_degenerate_cases():
    x = np.array([5.0, 1.0, 2.0])
    assert np.array_equal(apply_t_transform(TTransform(0, 2, 1.0), x), x)
    swapped = apply_t_transform(TTransform(0, 2, 0.0), x)
    assert np.array_equal(swapped, [2.0, 1.0, 5.0])


def test_schur_criterion_values():
    assert schur_criterion([3.0, 4.0]) == pytest.approx(5.0)
    rng = np.random.default_rng(0)
    x = rng.uniform(0.1, 5.0, size=6)
    perm = rng.permutation(6)
    assert schur_criterion(x[perm]) == schur_criterion(x)


@settings(max_examples=50)
@given(pos_vectors, st.data())
def test_schur_criterion_strict_on_strict_majorization(y, data):
    n = len(y)
    if n == 1:
        return
    y = np.asarray(y, dtype=float)
    x = y.copy()
    moved = False
    for _ in range(data.draw(st.integers(1, 4))):
        i = data.draw(st.integers(0, n - 1))
        j = data.draw(st.integers(0, n - 1))
        lam = data.draw(st.floats(0.05, 0.95))
        if i == j or abs(x[i] - x[j]) < 1e-6 * (1 + abs(x[i])):
            continue
        x = apply_t_transform(TTransform(i, j, lam), x)
        moved = True
    if moved and sorted(x) != sorted(y):
        assert schur_criterion(x) < schur_criterion(y)


def test_check_majorization_golden_models_hold():
    for fix in (HUB, CHAIN):
        rep = check_majorization(_dag(fix))
        assert rep.holds and rep.witness is None


def test_majorization_table_matches_golden_vectors():
    for fix in (HUB, CHAIN):
        rows = {perm: y for perm, y, ok in majorization_table(_dag(fix))}
        assert len(rows) == len(fix["rows"])
        for row in fix["rows"]:
            got = rows[tuple(row["perm"])]
            assert got == pytest.approx(row["y"], abs=fix["tolerance"])


def test_check_majorization_single_node():
    dag = WeightedDag(p=1, edges=(), noise_vars=np.array([2.0]), order=Ordering((0,)))
    assert check_majorization(dag).holds


def test_check_majorization_finds_witness():
    # weak child variance below the parent's: the reversed pair fails
    dag = WeightedDag(
        p=2, edges=((0, 1, 0.1),), noise_vars=np.array([1.0, 0.01]), order=Ordering((0, 1))
    )
    rep = check_majorization(dag)
    assert not rep.holds
    assert rep.witness is not None and rep.witness.perm == (1, 0)


def test_check_majorization_size_limit():
    dag = WeightedDag(p=9, edges=(), noise_vars=np.ones(9), order=Ordering(tuple(range(9))))
    with pytest.raises(TooLarge):
        check_majorization(dag)
    small = WeightedDag(p=4, edges=(), noise_vars=np.ones(4), order=Ordering(tuple(range(4))))
    with pytest.raises(TooLarge):
        check_majorization(small, max_p=3)
    assert check_majorization(small, max_p=4).holds
