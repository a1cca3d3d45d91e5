import random
from fractions import Fraction

import pytest

from opttree.bitvec import BitVector
from opttree.bounds import (BoundToggles, child_accuracy_admissible,
                            count_trees, equivalent_points_floor,
                            leaf_is_dead, lookahead_prunes,
                            max_leaves_apriori, max_leaves_current,
                            max_leaves_parent_specific,
                            remaining_evaluations,
                            remaining_evaluations_log10, similar_support_omega,
                            split_gain, symmetry_savings,
                            total_evaluations_bound_log10)
from opttree.dataset import build_equivalence_index, from_rows
from opttree.tree import Clause, make_child_leaf, make_leaf, root_tree
from tests.conftest import random_dataset


def test_toggles_defaults_and_replace():
    t = BoundToggles()
    assert t.hierarchical
    assert t.lookahead and t.equivalent_points and t.permutation_cache
    assert not t.similar_support
    t2 = t.replace(lookahead=False)
    assert not t2.lookahead and t.lookahead


def test_leaf_is_dead():
    lam = Fraction(1, 100)
    assert leaf_is_dead(15, lam, 1000)
    assert not leaf_is_dead(20, lam, 1000)  # boundary: equality passes
    assert not leaf_is_dead(0, Fraction(0), 1000)  # lam=0: never dead
    with pytest.raises(ValueError):
        leaf_is_dead(1, lam, 0)


def test_child_accuracy_admissible():
    lam = Fraction(1, 100)
    assert not child_accuracy_admissible(9, lam, 1000)
    assert child_accuracy_admissible(10, lam, 1000)  # >= is inclusive
    assert not child_accuracy_admissible(0, lam, 1000)


def test_monotone_in_lambda():
    for n in (0, 5, 10, 20):
        for a, b in ((Fraction(1, 100), Fraction(1, 10)),):
            if leaf_is_dead(n, a, 100):
                assert leaf_is_dead(n, b, 100)
            if not child_accuracy_admissible(n, a, 100):
                assert not child_accuracy_admissible(n, b, 100)


def _split_leaves(rows, labels, feature):
    ds = from_rows([f"f{j}" for j in range(len(rows[0]))], rows, labels)
    eq = build_equivalence_index(ds)
    lam = Fraction(1, 100)
    parent = make_leaf([], ds, eq, lam)
    left = make_child_leaf(parent, feature, False, ds, eq, lam)
    right = make_child_leaf(parent, feature, True, ds, eq, lam)
    return ds, parent, left, right


def test_split_gain_formula():
    # parent 10 captured / 7 correct; children 6/5 and 4/4 (counts as in
    # the formula; stubs carry real capture vectors for the partition check)
    from types import SimpleNamespace
    parent_bits = [1] * 10 + [0] * 90
    left_bits = [1] * 6 + [0] * 94
    right_bits = [0] * 6 + [1] * 4 + [0] * 90
    parent = SimpleNamespace(capture=BitVector.make(parent_bits), n_correct=7)
    left = SimpleNamespace(capture=BitVector.make(left_bits), n_correct=5)
    right = SimpleNamespace(capture=BitVector.make(right_bits), n_correct=4)
    a_k, must = split_gain(parent, left, right, 100, Fraction(1, 100))
    assert a_k == Fraction(2, 100)
    assert not must


def test_split_gain_zero_gain_must_split():
    rows = [[0], [1]]
    ds, parent, left, right = _split_leaves(rows, [0, 0], 0)
    a_k, must = split_gain(parent, left, right, 2, Fraction(1, 100))
    assert a_k == 0
    assert must


def test_split_gain_rejects_capture_mismatch():
    rows = [[0, 0], [1, 1]]
    ds, parent, left, _ = _split_leaves(rows, [0, 1], 0)
    with pytest.raises(ValueError):
        split_gain(parent, left, left, 2, Fraction(1, 100))


def test_split_gain_nonnegative_random():
    rng = random.Random(3)
    for _ in range(200):
        ds = random_dataset(rng, rng.randint(2, 30), rng.randint(1, 4))
        eq = build_equivalence_index(ds)
        lam = Fraction(1, 50)
        parent = make_leaf([], ds, eq, lam)
        f = rng.randrange(ds.n_features)
        left = make_child_leaf(parent, f, False, ds, eq, lam)
        right = make_child_leaf(parent, f, True, ds, eq, lam)
        a_k, _ = split_gain(parent, left, right, ds.n_samples, lam)
        assert a_k >= 0


def test_lookahead_prunes():
    lam = Fraction(1, 100)
    assert lookahead_prunes(Fraction(30, 100), lam, Fraction(305, 1000))
    assert not lookahead_prunes(Fraction(30, 100), lam, Fraction(32, 100))
    assert lookahead_prunes(Fraction(31, 100), lam, Fraction(32, 100))


def test_equivalent_points_floor():
    rows = [[0, 1]] * 4 + [[1, 0]] * 2
    labels = [1, 1, 1, 1, 0, 1]
    ds = from_rows(["a", "b"], rows, labels)
    eq = build_equivalence_index(ds)
    tree = root_tree(ds, Fraction(1, 100), eq)
    assert equivalent_points_floor(tree) == Fraction(1, 6)

    distinct = from_rows(["a", "b"], [[0, 0], [0, 1], [1, 0]], [1, 0, 1])
    root = root_tree(distinct, Fraction(1, 100),
                     build_equivalence_index(distinct))
    assert equivalent_points_floor(root) == 0


def test_equivalent_points_floor_le_splittable_error():
    rng = random.Random(5)
    for _ in range(100):
        ds = random_dataset(rng, rng.randint(4, 30), 3, duplicate_bias=0.5)
        eq = build_equivalence_index(ds)
        tree = root_tree(ds, Fraction(1, 20), eq)
        assert equivalent_points_floor(tree) \
            <= Fraction(tree.err_splittable(), ds.n_samples)


def test_max_leaves_formulas():
    assert max_leaves_apriori(Fraction(1, 200), 10) == 100
    assert max_leaves_apriori(Fraction(3, 10), 4) == 1
    assert max_leaves_apriori(Fraction(1, 2), 4) == 1
    with pytest.raises(ValueError):
        max_leaves_apriori(Fraction(0), 4)

    assert max_leaves_current(Fraction(33, 100), Fraction(1, 200), 12) == 66
    assert max_leaves_current(Fraction(1, 10), Fraction(1, 10), 12) == 1
    assert max_leaves_current(Fraction(1, 2), Fraction(1, 200), 12) \
        == max_leaves_apriori(Fraction(1, 200), 12)

    lam = Fraction(1, 100)
    assert max_leaves_parent_specific(Fraction(0), 0, Fraction(33, 100),
                                      Fraction(1, 200), 12) == 66
    assert max_leaves_parent_specific(Fraction(1, 10), 4,
                                      Fraction(1, 10) + lam, lam, 10) == 5
    assert max_leaves_parent_specific(Fraction(1, 10), 4,
                                      Fraction(1, 10) + 3 * lam, lam, 10) == 7


def test_remaining_evaluations():
    lam = Fraction(1, 10)
    assert remaining_evaluations_log10(Fraction(1, 2), [], lam, 3) is None
    # single entry with f = 0: only the k=0 term, Gamma = 1
    assert remaining_evaluations(Fraction(1, 10),
                                 [(Fraction(1, 10), 2)], lam, 3) == 1
    assert remaining_evaluations_log10(Fraction(1, 10),
                                       [(Fraction(1, 10), 2)], lam, 3) == 0
    # f = 2, L = 1, M = 1: slots = 2, 1 + 2 + 2 = 5
    got = remaining_evaluations(Fraction(3, 10), [(Fraction(1, 10), 1)],
                                lam, 1)
    assert got == 5


def test_total_evaluations_bound():
    assert total_evaluations_bound_log10(Fraction(1, 2), 1) == 0  # 1+3=4
    prev = -1
    for m in range(1, 6):
        cur = total_evaluations_bound_log10(Fraction(1, 10), m)
        assert cur >= prev
        prev = cur
    with pytest.raises(ValueError):
        total_evaluations_bound_log10(Fraction(0), 3)


def test_symmetry_savings_values():
    assert symmetry_savings(10, 5) == 35463
    assert symmetry_savings(10, 1) == 0
    got = symmetry_savings(20, 10)
    assert round(got / 10 ** (len(str(got)) - 6)) == 736891  # 6 sig figs
    with pytest.raises(ValueError):
        symmetry_savings(10, 0)


def test_count_trees_table():
    assert count_trees(10, 1) == 10
    assert count_trees(10, 2) == 1000
    assert count_trees(20, 2) == 8000
    assert count_trees(10, 3) == 5_329_000
    with pytest.raises(ValueError):
        count_trees(0, 1)


def test_similar_support_omega():
    a = BitVector.make([0, 1, 1, 1, 0, 0, 0, 0, 0, 0])
    b = BitVector.make([0, 0, 1, 1, 1, 0, 0, 0, 0, 0])
    assert similar_support_omega(a, b, 10) == Fraction(2, 10)
    assert similar_support_omega(a, a, 10) == 0
    c = BitVector.make([1, 0, 0, 0, 0, 0, 0, 0, 0, 0])
    d = BitVector.make([0, 1, 1, 0, 0, 0, 0, 0, 0, 0])
    assert similar_support_omega(c, d, 10) == Fraction(3, 10)
