import numpy as np
import pytest

from cholord import WeightedDag, exhaustive_order, is_topological, population_covariance

from oracles import load_fixture, oracle_min_permutation, schur_conditional_variances

HUB = load_fixture("three_node_hub")
CHAIN = load_fixture("four_node_chain")


def _sigma(fix):
    return population_covariance(WeightedDag.from_json_dict(fix["dag"]))


def test_oracle_unsorted_sequence_hub_reversed_start():
    # ordering (2, 0, 1): marginal 4.24, then 4 - 3.6^2/4.24, then 3
    seq = schur_conditional_variances(_sigma(HUB), (2, 0, 1))
    assert seq == pytest.approx([4.24, 0.943, 3.0], abs=0.01)
    assert np.sort(seq)[::-1] == pytest.approx([4.24, 3.0, 0.94], abs=0.01)


def test_oracle_diagonal_matrix():
    perm, f = oracle_min_permutation(np.diag([2.0, 1.0, 3.0]))
    assert perm == (0, 1, 2)
    assert f == pytest.approx(np.sqrt(6.0))


def test_oracle_minimum_matches_library_on_golden_models():
    for fix in (HUB, CHAIN):
        S = _sigma(fix)
        perm, f = oracle_min_permutation(S)
        lib = exhaustive_order(S)
        f_lib = float(np.sqrt(np.sum(schur_conditional_variances(S, lib.perm))))
        assert f_lib == pytest.approx(f, rel=1e-12)
        assert perm == lib.perm


def test_oracle_minimizer_is_topological_for_chain_model():
    dag = WeightedDag.from_json_dict(CHAIN["dag"])
    perm, _ = oracle_min_permutation(population_covariance(dag))
    from cholord import Ordering

    assert is_topological(Ordering(perm), dag)


def test_fixture_vectors_are_sorted_descending():
    for fix in (HUB, CHAIN):
        for row in fix["rows"]:
            y = row["y"]
            assert all(a >= b for a, b in zip(y, y[1:]))
