import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import stabilimeter as sm
from stabilimeter.errors import ParameterError


def anchors(num_vars=2):
    f1 = sm.FormulaConcept(sm.Var(0), num_vars=num_vars)
    f2 = sm.FormulaConcept(sm.Var(1), num_vars=num_vars)
    return f1, f2


def mixture(p, num_vars=2):
    f1, f2 = anchors(num_vars)
    return sm.MixtureParams(sm.UniformDistribution(f1.schema), p, f1, f2)


class ContrarianChooser(sm.Learner):
    """Picks the candidate with the *lowest* training accuracy."""

    name = "contrarian"

    def __init__(self, candidates):
        self.candidates = tuple(candidates)

    def train(self, data, seed=0):
        return min(self.candidates,
                   key=lambda c: sm.evaluate_accuracy(c, data))


class TestDelta:
    def test_equal_and_unequal(self):
        assert sm.delta(3, 3) == 1
        assert sm.delta(0, 1) == 0

    @given(st.integers(0, 10), st.integers(0, 10))
    def test_symmetry(self, a, b):
        assert sm.delta(a, b) == sm.delta(b, a)


class TestSampleMixture:
    def test_p_zero_labels_from_f1(self):
        f1, _ = anchors()
        data = sm.sample_mixture(mixture(0.0), 200, 1)
        assert np.array_equal(data.labels, f1.classify_batch(data.vectors))

    def test_p_one_labels_from_f2(self):
        _, f2 = anchors()
        data = sm.sample_mixture(mixture(1.0), 200, 1)
        assert np.array_equal(data.labels, f2.classify_batch(data.vectors))

    def test_invalid_p_rejected(self):
        with pytest.raises(ParameterError):
            mixture(1.5)

    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.integers(0, 1000))
    @settings(max_examples=25, deadline=None)
    def test_vector_marginal_independent_of_p(self, p1, p2, seed):
        a = sm.sample_mixture(mixture(p1), 100, seed)
        b = sm.sample_mixture(mixture(p2), 100, seed)
        assert np.array_equal(a.vectors, b.vectors)

    @given(st.floats(0.0, 1.0), st.integers(0, 1000))
    @settings(max_examples=25, deadline=None)
    def test_agreeing_vectors_get_the_common_label(self, p, seed):
        f1, f2 = anchors()
        data = sm.sample_mixture(mixture(p), 150, seed)
        l1 = f1.classify_batch(data.vectors)
        l2 = f2.classify_batch(data.vectors)
        same = l1 == l2
        assert np.array_equal(data.labels[same], l1[same])

    def test_balanced_mixture_on_disagreement_vectors(self):
        # where f1 != f2, the label follows f1 half the time (4 sigma window)
        f1, f2 = anchors()
        data = sm.sample_mixture(mixture(0.5), 8000, 3)
        l1 = f1.classify_batch(data.vectors)
        l2 = f2.classify_batch(data.vectors)
        differ = l1 != l2
        k = int(differ.sum())
        frac_f1 = float(np.mean(data.labels[differ] == l1[differ]))
        assert abs(frac_f1 - 0.5) <= 4 * 0.5 / k ** 0.5

    def test_swapped_reverses_roles(self):
        f1, f2 = anchors()
        direct = sm.sample_mixture(mixture(0.0), 100, 5)
        swapped = sm.sample_mixture(mixture(1.0).swapped(), 100, 5)
        assert direct == swapped


class TestMeasurePreference:
    def test_always_f1_learner(self):
        f1, f2 = anchors()
        dist = sm.UniformDistribution(f1.schema)
        for p in (0.0, 0.5, 1.0):
            res = sm.measure_preference(
                sm.FixedConceptLearner(f1), f1, f2, mixture(p), 50, 8, dist, 400, 2)
            assert res.mean_agree_f1 == 1.0
            assert res.prefers_f1

    def test_always_f2_learner(self):
        f1, f2 = anchors()
        dist = sm.UniformDistribution(f1.schema)
        for p in (0.0, 0.5, 1.0):
            res = sm.measure_preference(
                sm.FixedConceptLearner(f2), f1, f2, mixture(p), 50, 8, dist, 400, 2)
            assert not res.prefers_f1

    def test_identical_anchors_get_identical_means(self):
        f1, _ = anchors()
        params = sm.MixtureParams(sm.UniformDistribution(f1.schema), 0.3, f1, f1)
        res = sm.measure_preference(sm.TreeLearner(), f1, f1, params, 40, 6,
                                    sm.UniformDistribution(f1.schema), 300, 9)
        assert res.mean_agree_f1 == res.mean_agree_f2
        assert not res.prefers_f1
        assert not res.decided

    def test_chooser_prefers_dominant_evidence(self):
        f1, f2 = anchors()
        chooser = sm.ChooserLearner([f1, f2])
        dist = sm.UniformDistribution(f1.schema)
        res = sm.measure_preference(chooser, f1, f2, mixture(0.1), 100, 12,
                                    dist, 500, 4)
        assert res.prefers_f1 and res.decided


class TestBiasStrength:
    def test_always_f1_flips_never(self):
        f1, f2 = anchors()
        res = sm.measure_bias_strength(sm.FixedConceptLearner(f1), f1, f2,
                                       trials=6, n_agree=300, seed=3)
        assert res.flip_threshold == 1.0
        assert res.strength_toward_f1 == 1.0
        assert res.biased_toward_f1_at_half
        assert not res.indeterminate

    def test_grid_always_contains_half_and_one(self):
        f1, f2 = anchors()
        res = sm.measure_bias_strength(sm.FixedConceptLearner(f1), f1, f2,
                                       grid_step=0.07, trials=2, n_agree=100, seed=0)
        assert 0.5 in res.grid and 1.0 in res.grid and 0.0 in res.grid

    def test_biased_at_half_matches_the_half_point(self):
        f1, f2 = anchors()
        chooser = sm.ChooserLearner([f1, f2])
        res = sm.measure_bias_strength(chooser, f1, f2, train_size=60,
                                       trials=10, n_agree=300, seed=6)
        at_half = next(r for r in res.results if r.p == 0.5)
        assert res.biased_toward_f1_at_half == at_half.prefers_f1

    def test_contrarian_curve_is_flagged_indeterminate(self):
        f1, f2 = anchors()
        learner = ContrarianChooser([f1, f2])
        res = sm.measure_bias_strength(learner, f1, f2, train_size=100,
                                       trials=12, n_agree=400, seed=1)
        assert res.indeterminate
        assert res.flip_threshold is None

    def test_grid_step_validated(self):
        f1, f2 = anchors()
        with pytest.raises(ParameterError):
            sm.measure_bias_strength(sm.FixedConceptLearner(f1), f1, f2,
                                     grid_step=0.2, trials=2, n_agree=50)

    def test_serialization_shapes(self):
        f1, f2 = anchors()
        res = sm.measure_bias_strength(sm.FixedConceptLearner(f1), f1, f2,
                                       trials=3, n_agree=100, seed=0)
        doc = res.to_json_dict()
        assert set(doc) == {"curve", "flip_threshold", "biased_toward_f1_at_half",
                            "indeterminate", "strength_toward_f1", "master_seed"}
        assert set(doc["curve"][0]) == {"p", "mean_agree_f1", "mean_agree_f2",
                                        "decided", "prefers_f1"}
        rows = res.to_csv_rows()
        assert len(rows) == len(res.grid)
        assert all(len(r) == 2 for r in rows)

    def test_parallel_equals_sequential(self):
        f1, f2 = anchors()
        chooser = sm.ChooserLearner([f1, f2])
        kwargs = dict(train_size=40, trials=4, n_agree=200, seed=8)
        a = sm.measure_bias_strength(chooser, f1, f2, **kwargs)
        b = sm.measure_bias_strength(chooser, f1, f2, n_jobs=2, **kwargs)
        assert a.to_json_dict() == b.to_json_dict()
