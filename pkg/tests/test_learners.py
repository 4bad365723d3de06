import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import stabilimeter as sm
from stabilimeter.errors import DataError, ParameterError

from test_core import exhaustive_dataset


def dataset_from_rows(rows, labels, num_attrs):
    schema = sm.boolean_schema(num_attrs)
    return sm.Dataset(schema, ("0", "1"), np.array(rows), np.array(labels))


def oracle_gain_ratio(column, labels):
    """Independent gain-ratio computation from count dictionaries."""
    def entropy(counter):
        total = sum(counter.values())
        return -sum(c / total * math.log2(c / total) for c in counter.values() if c)

    n = len(labels)
    class_entropy = entropy(Counter(labels))
    by_level = Counter(column)
    if len(by_level) < 2:
        return 0.0
    conditional = sum(
        cnt / n * entropy(Counter(l for v, l in zip(column, labels) if v == lev))
        for lev, cnt in by_level.items()
    )
    split_info = entropy(by_level)
    return (class_entropy - conditional) / split_info


class TestMajority:
    def test_most_frequent(self):
        data = dataset_from_rows([[0, 0]] * 7 + [[1, 1]] * 3, [0] * 7 + [1] * 3, 2)
        concept = sm.train_majority(data)
        assert concept.classify([1, 1]) == 0

    def test_tie_breaks_to_lowest_class(self):
        data = dataset_from_rows([[0, 0]] * 10, [1] * 5 + [0] * 5, 2)
        assert sm.train_majority(data).classify([0, 0]) == 0

    def test_empty_rejected(self):
        data = exhaustive_dataset(2, lambda r: r[0]).subset(np.array([], dtype=int))
        with pytest.raises(DataError):
            sm.train_majority(data)


class TestGainRatio:
    def test_attribute_identical_to_class(self):
        rng = np.random.default_rng(0)
        labels = rng.integers(0, 2, size=20)
        rows = np.column_stack([labels, rng.integers(0, 2, size=20)])
        data = dataset_from_rows(rows, labels, 2)
        assert sm.gain_ratio(data, 0) == 1.0

    def test_independent_attribute_zero(self):
        # exhaustive balanced table: x2 carries no information about x1
        data = exhaustive_dataset(2, lambda r: r[0])
        assert sm.gain_ratio(data, 1) == 0.0

    def test_noisy_copy_ranks_below_clean_predictor(self):
        rng = np.random.default_rng(3)
        labels = rng.integers(0, 2, size=40)
        noisy = labels ^ (rng.random(40) < 0.2)
        data = dataset_from_rows(np.column_stack([labels, noisy]), labels, 2)
        assert sm.gain_ratio(data, 0) > sm.gain_ratio(data, 1)

    def test_matches_oracle(self):
        rng = np.random.default_rng(7)
        for trial in range(10):
            labels = rng.integers(0, 2, size=30)
            col = rng.integers(0, 3, size=30)
            schema = sm.AttributeSchema((
                sm.Attribute("a", ("0", "1", "2")),
                sm.Attribute("b", ("0", "1")),
            ))
            data = sm.Dataset(schema, ("0", "1"),
                              np.column_stack([col, rng.integers(0, 2, 30)]), labels)
            got = sm.gain_ratio(data, 0)
            want = oracle_gain_ratio(col.tolist(), labels.tolist())
            assert got == pytest.approx(want, abs=1e-12)

    def test_single_observed_level_returns_zero(self):
        data = dataset_from_rows([[0, 1], [0, 0], [0, 1]], [0, 1, 0], 2)
        assert sm.gain_ratio(data, 0) == 0.0

    def test_index_out_of_range(self):
        data = exhaustive_dataset(2, lambda r: r[0])
        with pytest.raises(DataError):
            sm.gain_ratio(data, 5)


class TestTree:
    def test_single_split_on_defining_attribute(self):
        data = exhaustive_dataset(2, lambda r: r[0])
        tree = sm.train_tree(data)
        assert tree.depth() == 1
        assert sm.evaluate_accuracy(tree, data) == 1.0

    def test_blocking_min_gain_ratio_gives_majority_constant(self):
        data = exhaustive_dataset(3, lambda r: r[0]).subset(np.arange(7))
        tree = sm.train_tree(data, sm.TreeParams(min_gain_ratio=2.0))
        majority = sm.train_majority(data)
        queries = exhaustive_dataset(3, lambda r: 0).vectors
        assert np.array_equal(tree.classify_batch(queries),
                              majority.classify_batch(queries))

    def test_gain_ratio_order_flip_changes_tree(self):
        # two explicit datasets where the leading attribute flips: labels
        # follow x1 exactly in one sample and x2 exactly in the other
        rows = [[0, 0, 0], [0, 1, 1], [1, 0, 0], [1, 1, 1], [0, 0, 1], [1, 1, 0]]
        labels_a = [r[0] for r in rows]
        labels_b = [r[1] for r in rows]
        data_a = dataset_from_rows(rows, labels_a, 3)
        data_b = dataset_from_rows(rows, labels_b, 3)
        assert sm.gain_ratio(data_a, 0) > sm.gain_ratio(data_a, 1)
        assert sm.gain_ratio(data_b, 1) > sm.gain_ratio(data_b, 0)
        tree_a = sm.train_tree(data_a)
        tree_b = sm.train_tree(data_b)
        disagreements = [
            v for v in exhaustive_dataset(3, lambda r: 0).vectors
            if tree_a.classify(v) != tree_b.classify(v)
        ]
        assert disagreements
        assert all(v[0] != v[1] for v in disagreements)

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_consistent_data_fits_perfectly(self, seed):
        rng = np.random.default_rng(seed)
        vectors = np.unique(rng.integers(0, 2, size=(12, 3)), axis=0)
        labels = rng.integers(0, 2, size=len(vectors))
        data = dataset_from_rows(vectors, labels, 3)
        tree = sm.train_tree(data, sm.TreeParams(min_gain_ratio=0.0, max_depth=None,
                                                 min_leaf=1))
        assert sm.evaluate_accuracy(tree, data) == 1.0

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_column_permutation_preserves_training_accuracy(self, seed):
        rng = np.random.default_rng(seed)
        vectors = rng.integers(0, 2, size=(20, 4))
        labels = rng.integers(0, 2, size=20)
        data = dataset_from_rows(vectors, labels, 4)
        perm = rng.permutation(4)
        permuted = dataset_from_rows(vectors[:, perm], labels, 4)
        acc = sm.evaluate_accuracy(sm.train_tree(data), data)
        acc_perm = sm.evaluate_accuracy(sm.train_tree(permuted), permuted)
        assert acc == acc_perm

    def test_max_depth_limits(self):
        data = exhaustive_dataset(4, lambda r: r[0] ^ r[1] ^ r[2])
        tree = sm.train_tree(data, sm.TreeParams(max_depth=2))
        assert tree.depth() <= 2

    def test_params_validated(self):
        with pytest.raises(ParameterError):
            sm.TreeParams(min_gain_ratio=-1)
        with pytest.raises(ParameterError):
            sm.TreeParams(max_depth=0)
        with pytest.raises(ParameterError):
            sm.TreeParams(min_leaf=0)


class TestKnn:
    def test_k1_recalls_stored_vector(self):
        data = dataset_from_rows([[0, 0], [0, 1], [1, 0]], [0, 1, 1], 2)
        concept = sm.train_knn(data, 1)
        assert concept.classify([0, 1]) == 1
        assert concept.classify([0, 0]) == 0

    def test_k_equals_size_is_majority(self):
        data = dataset_from_rows([[0, 0], [0, 1], [1, 0], [1, 1]], [1, 1, 1, 0], 2)
        concept = sm.train_knn(data, 4)
        majority = sm.train_majority(data)
        queries = exhaustive_dataset(2, lambda r: 0).vectors
        assert np.array_equal(concept.classify_batch(queries),
                              majority.classify_batch(queries))

    def test_k1_reproduces_defining_attribute(self):
        data = exhaustive_dataset(2, lambda r: r[0])
        concept = sm.train_knn(data, 1)
        for v in data.vectors:
            assert concept.classify(v) == v[0]

    def test_distance_tie_prefers_lower_index(self):
        # query equidistant from rows 0 and 1; stable order keeps row 0 first
        data = dataset_from_rows([[0, 0], [1, 1]], [0, 1], 2)
        concept = sm.train_knn(data, 1)
        assert concept.classify([0, 1]) == 0

    def test_k_too_large(self):
        data = dataset_from_rows([[0, 0], [1, 1]], [0, 1], 2)
        with pytest.raises(ParameterError):
            sm.train_knn(data, 3)


class TestMemorizing:
    def _data(self, seed, size=40):
        target = sm.FormulaConcept(sm.Var(0), num_vars=3)
        dist = sm.ConceptNoiseDistribution(target, sm.UniformDistribution(target.schema), 0.1)
        return sm.sample_dataset(dist, size, seed)

    def test_first_batch_outputs_fresh_concept(self):
        state = sm.MemorizingState(epsilon=0.0)
        concept, new_state = sm.train_memorizing(sm.TreeLearner(), state, self._data(1))
        assert new_state.previous is concept

    def test_equal_accuracy_keeps_previous(self):
        data = self._data(2)
        previous = sm.train_tree(data)  # fits data, same accuracy as retrain
        state = sm.MemorizingState(previous=previous, epsilon=0.0)
        concept, _ = sm.train_memorizing(sm.TreeLearner(), state, data)
        assert concept is previous

    def test_clear_improvement_switches(self):
        data = self._data(3)
        bad = sm.ConstantConcept(data.schema, data.classes, 0)
        state = sm.MemorizingState(previous=bad, epsilon=0.05)
        concept, _ = sm.train_memorizing(sm.TreeLearner(), state, data)
        acc_gain = (sm.evaluate_accuracy(concept, data)
                    - sm.evaluate_accuracy(bad, data))
        assert concept is not bad and acc_gain > 0.05

    def test_huge_epsilon_freezes_first_concept(self):
        learner = sm.MemorizingLearner(sm.TreeLearner(), epsilon=10.0)
        first = learner.train(self._data(4))
        second = learner.train(self._data(5))
        third = learner.train(self._data(6))
        assert second is first and third is first

    def test_fork_resets_memory(self):
        learner = sm.MemorizingLearner(sm.TreeLearner(), epsilon=10.0)
        learner.train(self._data(7))
        fork = learner.fork()
        assert fork.state.previous is None
        assert learner.state.previous is not None


class TestLearnerHelpers:
    def test_fixed_class_learner_ignores_data(self):
        data = exhaustive_dataset(2, lambda r: r[0])
        concept = sm.FixedClassLearner(1).train(data)
        assert np.all(concept.classify_batch(data.vectors) == 1)

    def test_chooser_picks_training_accuracy_winner(self):
        data = exhaustive_dataset(2, lambda r: r[0])
        f_good = sm.FormulaConcept(sm.Var(0), num_vars=2)
        f_bad = sm.FormulaConcept(sm.Var(1), num_vars=2)
        assert sm.ChooserLearner([f_bad, f_good]).train(data) is f_good

    def test_chooser_tie_prefers_first(self):
        data = exhaustive_dataset(2, lambda r: r[0] ^ r[1])
        f1 = sm.FormulaConcept(sm.Var(0), num_vars=2)
        f2 = sm.FormulaConcept(sm.Var(1), num_vars=2)
        assert sm.ChooserLearner([f1, f2]).train(data) is f1
