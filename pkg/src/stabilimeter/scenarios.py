"""Synthetic generators: the correlated-attribute instability setup,
drifting batch sequences, and random propositional formulas.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .agreement import And, BooleanFormula, Const, FormulaConcept, Not, Or, Var
from .core import (
    BINARY_CLASSES,
    Dataset,
    LabeledDistribution,
    SeedSpec,
    as_seedspec,
    boolean_schema,
    sample_dataset,
)
from .errors import ParameterError

__all__ = [
    "CorrelatedScenario",
    "make_correlated_scenario",
    "DEFAULT_LABEL_NOISE",
    "DriftSequence",
    "make_drift_sequence",
    "make_random_formula",
]

# Default label noise for the correlated scenario. With noiseless labels the
# first attribute is always a perfect predictor, so its gain ratio is exactly
# maximal and the deterministic tie rule would hand it every split: the
# near-tie between the correlated pair could never flip and the instability
# the scenario exists to demonstrate would vanish.
DEFAULT_LABEL_NOISE = 0.03


class CorrelatedScenario(LabeledDistribution):
    """Two nearly redundant boolean attributes plus independent noise ones.

    Attribute 1 drives the class; attribute 2 disagrees with attribute 1
    with probability `noise_rate` (so their correlation is 1 - 2*noise_rate);
    the remaining s-2 attributes are uniform and independent. Labels follow
    attribute 1 except that exactly round(label_noise * size) rows per draw
    are flipped (chosen without replacement), so every sampled dataset
    carries the corruption that drives the instability.
    """

    def __init__(self, s: int, noise_rate: float,
                 label_noise: float = DEFAULT_LABEL_NOISE):
        if s < 2:
            raise ParameterError(f"s must be >= 2, got {s}")
        if not 0.0 <= noise_rate < 0.5:
            raise ParameterError(f"noise_rate {noise_rate} outside [0, 0.5)")
        if not 0.0 <= label_noise < 0.5:
            raise ParameterError(f"label_noise {label_noise} outside [0, 0.5)")
        super().__init__(boolean_schema(s), BINARY_CLASSES)
        self.s = s
        self.noise_rate = float(noise_rate)
        self.label_noise = float(label_noise)

    @property
    def target(self) -> FormulaConcept:
        """The concept the labels are (noisy copies of): class = attribute 1."""
        return FormulaConcept(Var(0), num_vars=self.s)

    def sample(self, size, rng):
        a1 = rng.integers(0, 2, size=size)
        a2 = np.where(rng.random(size) < self.noise_rate, 1 - a1, a1)
        rest = rng.integers(0, 2, size=(size, self.s - 2))
        vectors = np.column_stack([a1, a2, rest]) if self.s > 2 else \
            np.column_stack([a1, a2])
        labels = a1.copy()
        flips = int(round(self.label_noise * size))
        if flips:
            idx = rng.choice(size, size=flips, replace=False)
            labels[idx] = 1 - labels[idx]
        return vectors.astype(np.int64), labels.astype(np.int64)


def make_correlated_scenario(s: int, noise_rate: float,
                             label_noise: float = DEFAULT_LABEL_NOISE) -> CorrelatedScenario:
    """Labeled distribution exhibiting correlated-attribute instability."""
    return CorrelatedScenario(s, noise_rate, label_noise)


@dataclass(frozen=True)
class DriftSequence:
    """Batch stream switching generating distribution at `drift_at`."""

    pre_drift: LabeledDistribution
    post_drift: LabeledDistribution
    drift_at: int
    batch_count: int
    batch_size: int

    def __post_init__(self):
        if self.batch_count < 2:
            raise ParameterError("batch_count must be >= 2")
        if not 1 <= self.drift_at < self.batch_count:
            raise ParameterError(
                f"drift_at must be in [1, {self.batch_count - 1}], got {self.drift_at}"
            )
        if self.batch_size < 1:
            raise ParameterError("batch_size must be >= 1")
        if (self.pre_drift.schema != self.post_drift.schema
                or self.pre_drift.classes != self.post_drift.classes):
            raise ParameterError("pre- and post-drift distributions must share "
                                 "schema and classes")


def make_drift_sequence(seq: DriftSequence, seed: SeedSpec | int) -> list[Dataset]:
    """Sample the batches: indices below `drift_at` from the pre-drift
    distribution, the rest from the post-drift one."""
    spec = as_seedspec(seed)
    batches = []
    for k in range(seq.batch_count):
        dist = seq.pre_drift if k < seq.drift_at else seq.post_drift
        batches.append(sample_dataset(dist, seq.batch_size, spec.spawn("drift-batch", k)))
    return batches


def make_random_formula(s: int, max_depth: int, seed: SeedSpec | int) -> BooleanFormula:
    """Uniformly random operator tree of depth at most `max_depth` over
    variables 0..s-1. Deterministic given the seed."""
    if s < 1:
        raise ParameterError(f"s must be >= 1, got {s}")
    if max_depth < 1:
        raise ParameterError(f"max_depth must be >= 1, got {max_depth}")
    rng = as_seedspec(seed).rng("random-formula")

    def gen(depth: int) -> BooleanFormula:
        kinds = ("var", "const") if depth >= max_depth else \
            ("var", "const", "not", "and", "or")
        kind = kinds[rng.integers(0, len(kinds))]
        if kind == "var":
            return Var(int(rng.integers(0, s)))
        if kind == "const":
            return Const(bool(rng.integers(0, 2)))
        if kind == "not":
            return Not(gen(depth + 1))
        left, right = gen(depth + 1), gen(depth + 1)
        return And(left, right) if kind == "and" else Or(left, right)

    return gen(1)
