"""Domain types and sampling primitives.

Attribute spaces are finite products of finite categorical attributes;
vectors are stored as integer level indices in numpy arrays. All samplers
take an explicit seed (via `SeedSpec`) and are deterministic given it.
"""
from __future__ import annotations

import csv
import hashlib
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DataError, ParameterError, ParseError

__all__ = [
    "Attribute",
    "AttributeSchema",
    "LabeledExample",
    "Dataset",
    "Concept",
    "ConstantConcept",
    "AttributeDistribution",
    "UniformDistribution",
    "EmpiricalDistribution",
    "TableDistribution",
    "LabeledDistribution",
    "ConceptNoiseDistribution",
    "EmpiricalLabeledDistribution",
    "SeedSpec",
    "as_seedspec",
    "boolean_schema",
    "sample_dataset",
    "split_half",
    "evaluate_accuracy",
    "load_dataset_csv",
    "save_dataset_csv",
    "load_schema_file",
    "save_schema_file",
]

BINARY_CLASSES = ("0", "1")


# ---------------------------------------------------------------------------
# Schema
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Attribute:
    """One categorical attribute: a name and an ordered tuple of level names."""

    name: str
    levels: tuple[str, ...]

    def __post_init__(self):
        if not self.name:
            raise ParameterError("attribute name must be nonempty")
        if len(self.levels) < 2:
            raise ParameterError(
                f"attribute {self.name!r} needs at least 2 levels, got {len(self.levels)}"
            )
        if len(set(self.levels)) != len(self.levels):
            raise ParameterError(f"attribute {self.name!r} has duplicate levels")

    @property
    def cardinality(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class AttributeSchema:
    """Ordered attribute declarations defining a finite vector space."""

    attributes: tuple[Attribute, ...]

    def __post_init__(self):
        if not self.attributes:
            raise ParameterError("schema needs at least one attribute")
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ParameterError("attribute names must be unique")

    def __len__(self) -> int:
        return len(self.attributes)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(a.cardinality for a in self.attributes)

    @property
    def space_size(self) -> int:
        """Exact number of distinct vectors (Python int, never overflows)."""
        size = 1
        for a in self.attributes:
            size *= a.cardinality
        return size

    def index_of(self, name: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == name:
                return i
        raise DataError(f"no attribute named {name!r}")

    def validate_vectors(self, vectors: np.ndarray) -> None:
        if vectors.ndim != 2 or vectors.shape[1] != len(self):
            raise DataError(
                f"vectors have shape {vectors.shape}, expected (*, {len(self)})"
            )
        for j, card in enumerate(self.cardinalities):
            col = vectors[:, j]
            if col.size and (col.min() < 0 or col.max() >= card):
                raise DataError(
                    f"attribute {self.attributes[j].name!r} has values outside "
                    f"[0, {card})"
                )


def boolean_schema(num_attrs: int, prefix: str = "x") -> AttributeSchema:
    """Schema of `num_attrs` boolean attributes named x1..xN with levels 0/1."""
    if num_attrs < 1:
        raise ParameterError("num_attrs must be >= 1")
    return AttributeSchema(
        tuple(Attribute(f"{prefix}{i + 1}", ("0", "1")) for i in range(num_attrs))
    )


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LabeledExample:
    vector: tuple[int, ...]
    label: int


def _frozen_array(values, dtype=np.int64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """A finite sequence of labeled vectors. Immutable after construction.

    `provenance` records how the data was sampled (seed, purpose); it is
    informational and excluded from equality.
    """

    schema: AttributeSchema
    classes: tuple[str, ...]
    vectors: np.ndarray
    labels: np.ndarray
    provenance: dict | None = None

    def __post_init__(self):
        object.__setattr__(self, "vectors", _frozen_array(self.vectors))
        object.__setattr__(self, "labels", _frozen_array(self.labels))
        if len(self.classes) < 2:
            raise DataError("class set must contain at least 2 classes")
        if len(set(self.classes)) != len(self.classes):
            raise DataError("class names must be unique")
        if self.labels.ndim != 1 or len(self.labels) != len(self.vectors):
            raise DataError("labels must be one per vector")
        self.schema.validate_vectors(self.vectors)
        if self.labels.size and (
            self.labels.min() < 0 or self.labels.max() >= len(self.classes)
        ):
            raise DataError("labels outside the class set")

    @property
    def size(self) -> int:
        return len(self.vectors)

    def __len__(self) -> int:
        return len(self.vectors)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.schema == other.schema
            and self.classes == other.classes
            and np.array_equal(self.vectors, other.vectors)
            and np.array_equal(self.labels, other.labels)
        )

    def examples(self) -> Iterator[LabeledExample]:
        for row, label in zip(self.vectors, self.labels):
            yield LabeledExample(tuple(int(v) for v in row), int(label))

    def subset(self, indices: np.ndarray) -> "Dataset":
        return Dataset(self.schema, self.classes, self.vectors[indices],
                       self.labels[indices])


# ---------------------------------------------------------------------------
# Concepts
# ---------------------------------------------------------------------------

class Concept(ABC):
    """A total deterministic function from attribute vectors to class indices."""

    kind: str = "abstract"

    def __init__(self, schema: AttributeSchema, classes: tuple[str, ...]):
        self.schema = schema
        self.classes = tuple(classes)
        if len(self.classes) < 2:
            raise DataError("class set must contain at least 2 classes")

    @abstractmethod
    def classify_batch(self, vectors: np.ndarray) -> np.ndarray:
        """Class index for each row of `vectors` (shape (n, len(schema)))."""

    def classify(self, vector: Sequence[int]) -> int:
        arr = np.asarray(vector, dtype=np.int64).reshape(1, -1)
        return int(self.classify_batch(arr)[0])

    def compatible_with(self, other: "Concept") -> bool:
        return self.schema == other.schema and self.classes == other.classes


class ConstantConcept(Concept):
    """Always predicts one class."""

    kind = "constant"

    def __init__(self, schema, classes, class_index: int):
        super().__init__(schema, classes)
        if not 0 <= class_index < len(self.classes):
            raise ParameterError(f"class index {class_index} outside the class set")
        self.class_index = int(class_index)

    def classify_batch(self, vectors: np.ndarray) -> np.ndarray:
        return np.full(len(vectors), self.class_index, dtype=np.int64)


# ---------------------------------------------------------------------------
# Seeds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeedSpec:
    """Hierarchical deterministic seed derivation.

    Child seeds are 64-bit blake2b hashes of (master_seed, purpose, index),
    so distinct purposes and indices yield independent streams and the
    derivation is a pure function of its inputs.
    """

    master_seed: int

    def __post_init__(self):
        if not isinstance(self.master_seed, int):
            raise ParameterError("master_seed must be an integer")

    def derive(self, purpose: str, index: int = 0) -> int:
        digest = hashlib.blake2b(
            f"{self.master_seed % (1 << 64)}|{purpose}|{index}".encode(),
            digest_size=8,
        ).digest()
        return int.from_bytes(digest, "little")

    def spawn(self, purpose: str, index: int = 0) -> "SeedSpec":
        return SeedSpec(self.derive(purpose, index))

    def rng(self, purpose: str, index: int = 0) -> np.random.Generator:
        return np.random.default_rng(self.derive(purpose, index))


def as_seedspec(seed: "SeedSpec | int") -> SeedSpec:
    if isinstance(seed, SeedSpec):
        return seed
    return SeedSpec(int(seed))


# ---------------------------------------------------------------------------
# Attribute distributions (D_A)
# ---------------------------------------------------------------------------

class AttributeDistribution(ABC):
    """A sampler over attribute vectors."""

    def __init__(self, schema: AttributeSchema):
        self.schema = schema

    @abstractmethod
    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draw `size` iid vectors as an (size, len(schema)) int array."""

    def support_size(self) -> int | None:
        """Number of support vectors if the support is enumerable, else None."""
        return None

    def iter_support(self, chunk_size: int = 65536) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Yield (vectors, integer weights) chunks covering the support."""
        raise DataError(f"{type(self).__name__} support is not enumerable")

    def total_weight(self) -> int:
        raise DataError(f"{type(self).__name__} support is not enumerable")

    def strictly_positive(self) -> bool:
        """True when every vector of the space has nonzero probability."""
        return False


class UniformDistribution(AttributeDistribution):
    """Equal probability on every vector of the product space."""

    def sample(self, size, rng):
        cols = [rng.integers(0, card, size=size) for card in self.schema.cardinalities]
        return np.column_stack(cols).astype(np.int64)

    def support_size(self):
        return self.schema.space_size

    def iter_support(self, chunk_size=65536):
        cards = self.schema.cardinalities
        # suffix products: attribute 0 varies slowest (row-major enumeration)
        divisors = [1] * len(cards)
        for j in range(len(cards) - 2, -1, -1):
            divisors[j] = divisors[j + 1] * cards[j + 1]
        total = self.schema.space_size
        for start in range(0, total, chunk_size):
            stop = min(start + chunk_size, total)
            idx = np.arange(start, stop, dtype=np.int64)
            cols = [(idx // divisors[j]) % cards[j] for j in range(len(cards))]
            yield np.column_stack(cols), np.ones(stop - start, dtype=np.int64)

    def total_weight(self):
        return self.schema.space_size

    def strictly_positive(self):
        return True


class TableDistribution(AttributeDistribution):
    """Explicit support vectors with positive integer weights."""

    def __init__(self, schema, vectors, weights):
        super().__init__(schema)
        self.vectors = _frozen_array(vectors)
        self.weights = _frozen_array(weights)
        schema.validate_vectors(self.vectors)
        if self.weights.ndim != 1 or len(self.weights) != len(self.vectors):
            raise ParameterError("one weight per support vector required")
        if len(self.vectors) == 0:
            raise ParameterError("table distribution needs a nonempty support")
        if self.weights.min() <= 0:
            raise ParameterError("table weights must be positive")
        if len(np.unique(self.vectors, axis=0)) != len(self.vectors):
            raise ParameterError("table support vectors must be distinct")
        self._total = int(self.weights.sum())

    def sample(self, size, rng):
        probs = self.weights / self._total
        idx = rng.choice(len(self.vectors), size=size, p=probs)
        return self.vectors[idx]

    def support_size(self):
        return len(self.vectors)

    def iter_support(self, chunk_size=65536):
        for start in range(0, len(self.vectors), chunk_size):
            stop = min(start + chunk_size, len(self.vectors))
            yield self.vectors[start:stop], self.weights[start:stop]

    def total_weight(self):
        return self._total

    def strictly_positive(self):
        return len(self.vectors) == self.schema.space_size


class MarginalDistribution(AttributeDistribution):
    """The attribute marginal of a labeled distribution (labels discarded)."""

    def __init__(self, labeled: "LabeledDistribution"):
        super().__init__(labeled.schema)
        self.labeled = labeled

    def sample(self, size, rng):
        return self.labeled.sample(size, rng)[0]


class EmpiricalDistribution(AttributeDistribution):
    """Resamples vectors uniformly from a dataset's rows."""

    def __init__(self, data: Dataset):
        super().__init__(data.schema)
        if len(data) == 0:
            raise DataError("empirical distribution needs a nonempty dataset")
        self._rows = data.vectors

    def sample(self, size, rng):
        idx = rng.integers(0, len(self._rows), size=size)
        return self._rows[idx]

    def _support(self):
        return np.unique(self._rows, axis=0, return_counts=True)

    def support_size(self):
        return len(self._support()[0])

    def iter_support(self, chunk_size=65536):
        uniq, counts = self._support()
        for start in range(0, len(uniq), chunk_size):
            stop = min(start + chunk_size, len(uniq))
            yield uniq[start:stop], counts[start:stop].astype(np.int64)

    def total_weight(self):
        return int(self._support()[1].sum())

    def strictly_positive(self):
        return self.support_size() == self.schema.space_size


# ---------------------------------------------------------------------------
# Labeled distributions (D_{A x C})
# ---------------------------------------------------------------------------

class LabeledDistribution(ABC):
    """A sampler over labeled examples."""

    def __init__(self, schema: AttributeSchema, classes: tuple[str, ...]):
        self.schema = schema
        self.classes = tuple(classes)

    @abstractmethod
    def sample(self, size: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Draw `size` iid labeled examples as (vectors, labels) arrays."""


class ConceptNoiseDistribution(LabeledDistribution):
    """Vectors from an attribute distribution, labeled by a target concept,
    with each label independently flipped to a different class at `flip_rate`.
    """

    def __init__(self, target: Concept, attr_dist: AttributeDistribution,
                 flip_rate: float = 0.0):
        if attr_dist.schema != target.schema:
            raise DataError("attribute distribution schema differs from the target's")
        if not 0.0 <= flip_rate <= 1.0:
            raise ParameterError(f"flip_rate {flip_rate} outside [0, 1]")
        super().__init__(target.schema, target.classes)
        self.target = target
        self.attr_dist = attr_dist
        self.flip_rate = float(flip_rate)

    def sample(self, size, rng):
        vectors = self.attr_dist.sample(size, rng)
        labels = self.target.classify_batch(vectors)
        flips = rng.random(size) < self.flip_rate
        offsets = rng.integers(1, len(self.classes), size=size)
        labels = np.where(flips, (labels + offsets) % len(self.classes), labels)
        return vectors, labels


class EmpiricalLabeledDistribution(LabeledDistribution):
    """Resamples labeled rows uniformly from a dataset."""

    def __init__(self, data: Dataset):
        if len(data) == 0:
            raise DataError("empirical distribution needs a nonempty dataset")
        super().__init__(data.schema, data.classes)
        self._data = data

    def sample(self, size, rng):
        idx = rng.integers(0, len(self._data), size=size)
        return self._data.vectors[idx], self._data.labels[idx]


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def sample_dataset(dist: LabeledDistribution, size: int, seed: SeedSpec | int) -> Dataset:
    """Draw an iid dataset of `size` examples from `dist`."""
    if size < 1:
        raise ParameterError(f"size must be >= 1, got {size}")
    spec = as_seedspec(seed)
    vectors, labels = dist.sample(size, spec.rng("sample-dataset"))
    provenance = {"master_seed": spec.master_seed, "purpose": "sample-dataset"}
    return Dataset(dist.schema, dist.classes, vectors, labels, provenance)


def split_half(data: Dataset, seed: SeedSpec | int) -> tuple[Dataset, Dataset]:
    """Uniformly random partition into two disjoint halves.

    Sizes differ by at most one; for odd sizes the larger half lands on
    either side with equal probability.
    """
    n = len(data)
    if n < 2:
        raise DataError(f"need at least 2 examples to split, got {n}")
    rng = as_seedspec(seed).rng("split-half")
    perm = rng.permutation(n)
    cut = n // 2
    if n % 2 == 1:
        cut += int(rng.integers(0, 2))
    return data.subset(perm[:cut]), data.subset(perm[cut:])


def evaluate_accuracy(concept: Concept, data: Dataset) -> float:
    """Fraction of examples whose label the concept reproduces (exact ratio)."""
    if len(data) == 0:
        raise DataError("cannot evaluate accuracy on an empty dataset")
    if concept.schema != data.schema or concept.classes != data.classes:
        raise DataError("concept and dataset disagree on schema or classes")
    correct = int(np.count_nonzero(concept.classify_batch(data.vectors) == data.labels))
    return correct / len(data)


# ---------------------------------------------------------------------------
# CSV dataset format
# ---------------------------------------------------------------------------
# First row: attribute names followed by the literal column `class`; values
# are level names. Schema may be declared in a sidecar file with one line per
# column: `name:level1,level2,...` (class line included, named `class`).

def save_dataset_csv(data: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(data.schema.names) + ["class"])
        for row, label in zip(data.vectors, data.labels):
            writer.writerow(
                [data.schema.attributes[j].levels[v] for j, v in enumerate(row)]
                + [data.classes[label]]
            )


def save_schema_file(data: Dataset, path) -> None:
    with open(path, "w") as fh:
        for attr in data.schema.attributes:
            fh.write(f"{attr.name}:{','.join(attr.levels)}\n")
        fh.write(f"class:{','.join(data.classes)}\n")


def load_schema_file(path) -> tuple[list[tuple[str, tuple[str, ...]]], tuple[str, ...] | None]:
    """Parse a sidecar schema file into (attribute declarations, classes)."""
    decls: list[tuple[str, tuple[str, ...]]] = []
    classes = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if ":" not in line:
                raise ParseError(f"{path}:{lineno}: expected `name:level1,level2,...`")
            name, _, levels_text = line.partition(":")
            name = name.strip()
            levels = tuple(s.strip() for s in levels_text.split(","))
            if any(not lvl for lvl in levels):
                raise ParseError(f"{path}:{lineno}: empty level name")
            if name == "class":
                classes = levels
            else:
                decls.append((name, levels))
    return decls, classes


def load_dataset_csv(path, schema_path=None) -> Dataset:
    """Read the CSV dataset format, inferring the schema unless a sidecar is given.

    Inferred levels and classes are ordered by first appearance in the file.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}:1: empty file") from None
        header = [h.strip() for h in header]
        if not header or header[-1] != "class":
            raise ParseError(f"{path}:1: last column must be named `class`")
        attr_names = header[:-1]
        if not attr_names:
            raise ParseError(f"{path}:1: no attribute columns")
        if len(set(attr_names)) != len(attr_names):
            raise ParseError(f"{path}:1: duplicate attribute names")

        declared_levels: dict[str, tuple[str, ...]] | None = None
        declared_classes = None
        if schema_path is not None:
            decls, declared_classes = load_schema_file(schema_path)
            declared = dict(decls)
            missing = [n for n in attr_names if n not in declared]
            if missing:
                raise ParseError(f"{schema_path}: no declaration for column(s) {missing}")
            declared_levels = {n: declared[n] for n in attr_names}

        level_maps: list[dict[str, int]] = []
        level_orders: list[list[str]] = []
        for name in attr_names:
            if declared_levels is not None:
                levels = list(declared_levels[name])
                level_maps.append({lvl: i for i, lvl in enumerate(levels)})
                level_orders.append(levels)
            else:
                level_maps.append({})
                level_orders.append([])
        class_map: dict[str, int] = {}
        class_order: list[str] = []
        if declared_classes is not None:
            class_order = list(declared_classes)
            class_map = {c: i for i, c in enumerate(class_order)}

        rows: list[list[int]] = []
        labels: list[int] = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise ParseError(
                    f"{path}:{lineno}: expected {len(header)} values, got {len(rec)}"
                )
            row = []
            for j, value in enumerate(rec[:-1]):
                value = value.strip()
                if value not in level_maps[j]:
                    if declared_levels is not None:
                        raise ParseError(
                            f"{path}:{lineno}: value {value!r} not a declared level "
                            f"of {attr_names[j]!r}"
                        )
                    level_maps[j][value] = len(level_orders[j])
                    level_orders[j].append(value)
                row.append(level_maps[j][value])
            label = rec[-1].strip()
            if label not in class_map:
                if declared_classes is not None:
                    raise ParseError(
                        f"{path}:{lineno}: class {label!r} not declared"
                    )
                class_map[label] = len(class_order)
                class_order.append(label)
            rows.append(row)
            labels.append(class_map[label])

    for j, order in enumerate(level_orders):
        if len(order) < 2:
            raise ParseError(
                f"{path}: attribute {attr_names[j]!r} has fewer than 2 observed "
                f"levels; supply a sidecar schema file"
            )
    if len(class_order) < 2:
        raise ParseError(
            f"{path}: fewer than 2 observed classes; supply a sidecar schema file"
        )
    schema = AttributeSchema(
        tuple(Attribute(n, tuple(order)) for n, order in zip(attr_names, level_orders))
    )
    vectors = np.array(rows, dtype=np.int64).reshape(len(rows), len(attr_names))
    return Dataset(schema, tuple(class_order), vectors, np.array(labels, dtype=np.int64))
