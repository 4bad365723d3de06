"""Reference learners: majority/constant baselines, a gain-ratio decision
tree, k-nearest-neighbour, and a concept-memorizing wrapper.

All tie-breaking is deterministic: attribute ties resolve to the lowest
attribute index, class ties to the lowest class index.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    Concept,
    ConstantConcept,
    Dataset,
    SeedSpec,
    evaluate_accuracy,
)
from .errors import DataError, ParameterError

__all__ = [
    "Learner",
    "MajorityLearner",
    "FixedClassLearner",
    "FixedConceptLearner",
    "ChooserLearner",
    "TreeParams",
    "TreeLearner",
    "TreeConcept",
    "KnnLearner",
    "InstanceConcept",
    "MemorizingState",
    "MemorizingLearner",
    "train_majority",
    "train_tree",
    "train_knn",
    "train_memorizing",
    "gain_ratio",
]


class Learner(ABC):
    """A function from datasets to concepts, deterministic given (data, seed)."""

    name: str = "learner"

    @abstractmethod
    def train(self, data: Dataset, seed: SeedSpec | int = 0) -> Concept:
        ...

    def fork(self) -> "Learner":
        """Independent copy for use inside estimation loops.

        Stateless learners return themselves; stateful wrappers return a
        fresh instance so loop iterations stay order-independent.
        """
        return self


def _majority_class(labels: np.ndarray, n_classes: int) -> int:
    # argmax returns the first maximum, i.e. the lowest class index on ties
    return int(np.bincount(labels, minlength=n_classes).argmax())


class MajorityLearner(Learner):
    """Constant concept predicting the most frequent training class."""

    name = "majority"

    def train(self, data, seed=0):
        if len(data) == 0:
            raise DataError("cannot train on an empty dataset")
        return ConstantConcept(
            data.schema, data.classes, _majority_class(data.labels, len(data.classes))
        )


def train_majority(data: Dataset) -> Concept:
    return MajorityLearner().train(data)


class FixedClassLearner(Learner):
    """Ignores the data entirely and always predicts one class index."""

    def __init__(self, class_index: int = 0):
        if class_index < 0:
            raise ParameterError("class_index must be >= 0")
        self.class_index = class_index
        self.name = f"constant[{class_index}]"

    def train(self, data, seed=0):
        if len(data) == 0:
            raise DataError("cannot train on an empty dataset")
        return ConstantConcept(data.schema, data.classes, self.class_index)


class FixedConceptLearner(Learner):
    """Always outputs the same pre-built concept."""

    def __init__(self, concept: Concept, name: str = "fixed-concept"):
        self.concept = concept
        self.name = name

    def train(self, data, seed=0):
        if data.schema != self.concept.schema or data.classes != self.concept.classes:
            raise DataError("dataset schema differs from the fixed concept's")
        return self.concept


class ChooserLearner(Learner):
    """Picks the candidate concept with the highest training accuracy.

    Ties resolve to the earliest candidate.
    """

    name = "chooser"

    def __init__(self, candidates):
        candidates = tuple(candidates)
        if not candidates:
            raise ParameterError("chooser needs at least one candidate concept")
        self.candidates = candidates

    def train(self, data, seed=0):
        best = self.candidates[0]
        best_acc = evaluate_accuracy(best, data)
        for cand in self.candidates[1:]:
            acc = evaluate_accuracy(cand, data)
            if acc > best_acc:
                best, best_acc = cand, acc
        return best


# ---------------------------------------------------------------------------
# Gain-ratio decision tree
# ---------------------------------------------------------------------------

def _entropy(counts: np.ndarray) -> float:
    """Base-2 entropy of a count vector."""
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _gain_and_ratio(col: np.ndarray, labels: np.ndarray, cardinality: int,
                    n_classes: int) -> tuple[float, float]:
    """(information gain, gain ratio) of one attribute column; (0, 0) for
    attributes with fewer than two observed levels."""
    level_counts = np.bincount(col, minlength=cardinality)
    if np.count_nonzero(level_counts) < 2:
        return 0.0, 0.0
    n = len(col)
    class_entropy = _entropy(np.bincount(labels, minlength=n_classes))
    conditional = 0.0
    for level in range(cardinality):
        cnt = level_counts[level]
        if cnt == 0:
            continue
        sub = labels[col == level]
        conditional += (cnt / n) * _entropy(np.bincount(sub, minlength=n_classes))
    gain = class_entropy - conditional
    split_info = _entropy(level_counts)
    if split_info == 0.0:
        return gain, 0.0
    return gain, gain / split_info


def gain_ratio(data: Dataset, attribute_index: int) -> float:
    """C4.5 information gain ratio of one attribute on a dataset.

    Information gain divided by the split information of the attribute's
    value partition, both with base-2 logarithms. Returns 0 for attributes
    with fewer than two observed levels (split information 0).
    """
    if len(data) == 0:
        raise DataError("cannot compute gain ratio on an empty dataset")
    if not 0 <= attribute_index < len(data.schema):
        raise DataError(f"attribute index {attribute_index} out of range")
    return _gain_and_ratio(
        data.vectors[:, attribute_index],
        data.labels,
        data.schema.cardinalities[attribute_index],
        len(data.classes),
    )[1]


@dataclass(frozen=True)
class TreeParams:
    """Stopping knobs for tree induction.

    `min_gain_ratio` is the pre-pruning strength: splits whose best gain
    ratio falls below it are rejected. `max_depth=None` means unbounded.
    """

    min_gain_ratio: float = 0.0
    max_depth: int | None = None
    min_leaf: int = 1

    def __post_init__(self):
        if self.min_gain_ratio < 0:
            raise ParameterError("min_gain_ratio must be >= 0")
        if self.max_depth is not None and self.max_depth < 1:
            raise ParameterError("max_depth must be >= 1")
        if self.min_leaf < 1:
            raise ParameterError("min_leaf must be >= 1")


@dataclass(frozen=True)
class _Leaf:
    label: int


@dataclass(frozen=True)
class _Split:
    attribute: int
    children: tuple


class TreeConcept(Concept):
    """Multiway decision tree over categorical attributes."""

    kind = "tree"

    def __init__(self, schema, classes, root):
        super().__init__(schema, classes)
        self.root = root

    def classify_batch(self, vectors):
        out = np.empty(len(vectors), dtype=np.int64)
        self._fill(self.root, vectors, np.arange(len(vectors)), out)
        return out

    def _fill(self, node, vectors, idx, out):
        if isinstance(node, _Leaf):
            out[idx] = node.label
            return
        col = vectors[idx, node.attribute]
        for level, child in enumerate(node.children):
            sub = idx[col == level]
            if len(sub):
                self._fill(child, vectors, sub, out)

    def node_count(self) -> int:
        def count(node):
            if isinstance(node, _Leaf):
                return 1
            return 1 + sum(count(c) for c in node.children)
        return count(self.root)

    def depth(self) -> int:
        def d(node):
            if isinstance(node, _Leaf):
                return 0
            return 1 + max(d(c) for c in node.children)
        return d(self.root)


class TreeLearner(Learner):
    """Top-down induction choosing the attribute with maximal gain ratio.

    Splits one child per attribute level. A node becomes a leaf when it is
    pure, smaller than `min_leaf`, at `max_depth`, or when no attribute with
    at least two observed levels reaches `min_gain_ratio`. Leaves predict
    the node majority class; all ties resolve to the lowest index.
    """

    def __init__(self, params: TreeParams = TreeParams()):
        self.params = params
        self.name = "tree"

    def train(self, data, seed=0):
        if len(data) == 0:
            raise DataError("cannot train on an empty dataset")
        cards = data.schema.cardinalities
        n_classes = len(data.classes)
        params = self.params

        def grow(rows: np.ndarray, depth: int):
            labels = data.labels[rows]
            majority = _majority_class(labels, n_classes)
            if (
                len(rows) < params.min_leaf
                or (params.max_depth is not None and depth >= params.max_depth)
                or np.all(labels == labels[0])
            ):
                return _Leaf(majority)
            vecs = data.vectors[rows]
            best_attr, best_ratio = None, -1.0
            for j in range(len(cards)):
                if np.count_nonzero(np.bincount(vecs[:, j], minlength=cards[j])) < 2:
                    continue
                ratio = _gain_and_ratio(vecs[:, j], labels, cards[j], n_classes)[1]
                if ratio > best_ratio:
                    best_attr, best_ratio = j, ratio
            if best_attr is None or best_ratio < params.min_gain_ratio:
                return _Leaf(majority)
            col = vecs[:, best_attr]
            children = []
            for level in range(cards[best_attr]):
                sub = rows[col == level]
                if len(sub) == 0:
                    children.append(_Leaf(majority))
                else:
                    children.append(grow(sub, depth + 1))
            return _Split(best_attr, tuple(children))

        root = grow(np.arange(len(data)), 0)
        return TreeConcept(data.schema, data.classes, root)


def train_tree(data: Dataset, params: TreeParams = TreeParams()) -> Concept:
    return TreeLearner(params).train(data)


# ---------------------------------------------------------------------------
# k-nearest-neighbour
# ---------------------------------------------------------------------------

class InstanceConcept(Concept):
    """Majority label among the k nearest stored instances (Hamming distance).

    Distance ties resolve to the lower stored-example index, label ties to
    the lowest class index.
    """

    kind = "instances"

    def __init__(self, schema, classes, vectors, labels, k: int):
        super().__init__(schema, classes)
        self.vectors = np.asarray(vectors, dtype=np.int64)
        self.labels = np.asarray(labels, dtype=np.int64)
        schema.validate_vectors(self.vectors)
        if not 1 <= k <= len(self.vectors):
            raise ParameterError(
                f"k={k} outside [1, {len(self.vectors)}] for the stored instances"
            )
        self.k = int(k)

    def classify_batch(self, vectors):
        m, s = self.vectors.shape
        out = np.empty(len(vectors), dtype=np.int64)
        chunk = max(1, (1 << 22) // max(1, m * s))
        for start in range(0, len(vectors), chunk):
            q = vectors[start:start + chunk]
            dists = (q[:, None, :] != self.vectors[None, :, :]).sum(axis=2)
            # stable sort keeps lower stored index first among equal distances
            nearest = np.argsort(dists, axis=1, kind="stable")[:, : self.k]
            counts = np.zeros((len(q), len(self.classes)), dtype=np.int64)
            rows = np.arange(len(q))
            for j in range(self.k):
                counts[rows, self.labels[nearest[:, j]]] += 1
            out[start:start + chunk] = counts.argmax(axis=1)
        return out


class KnnLearner(Learner):
    def __init__(self, k: int):
        if k < 1:
            raise ParameterError("k must be >= 1")
        self.k = k
        self.name = f"knn[{k}]"

    def train(self, data, seed=0):
        if len(data) == 0:
            raise DataError("cannot train on an empty dataset")
        if self.k > len(data):
            raise ParameterError(f"k={self.k} exceeds dataset size {len(data)}")
        return InstanceConcept(data.schema, data.classes, data.vectors,
                               data.labels, self.k)


def train_knn(data: Dataset, k: int) -> Concept:
    return KnnLearner(k).train(data)


# ---------------------------------------------------------------------------
# Concept-memorizing wrapper
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MemorizingState:
    """Carries the previously output concept between training calls."""

    previous: Concept | None = None
    epsilon: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.epsilon) or self.epsilon < 0:
            raise ParameterError("epsilon must be finite and >= 0")


def train_memorizing(base: Learner, state: MemorizingState, data: Dataset,
                     seed: SeedSpec | int = 0) -> tuple[Concept, MemorizingState]:
    """Train `base`, but keep the remembered concept unless the new one beats
    it by more than `state.epsilon` training accuracy. Returns the output
    concept and the updated state.
    """
    fresh = base.train(data, seed)
    output = fresh
    if state.previous is not None:
        gain = evaluate_accuracy(fresh, data) - evaluate_accuracy(state.previous, data)
        if gain <= state.epsilon:
            output = state.previous
    return output, replace(state, previous=output)


class MemorizingLearner(Learner):
    """Learner-protocol wrapper around `train_memorizing`.

    Stateful across `train` calls; `fork()` returns a copy with empty
    memory so estimation loops stay order-independent.
    """

    def __init__(self, base: Learner, epsilon: float = 0.0):
        self.base = base
        self.state = MemorizingState(epsilon=epsilon)
        self.name = f"memorizing:{base.name}"

    def train(self, data, seed=0):
        concept, self.state = train_memorizing(self.base, self.state, data, seed)
        return concept

    def fork(self):
        return MemorizingLearner(self.base.fork(), self.state.epsilon)
