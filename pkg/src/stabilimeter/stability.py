"""Joint estimation of predictive accuracy and stability.

The estimator repeats m times: randomly halve the data, train on each half,
cross-test each concept on the opposite half, and measure the agreement of
the two concepts on n fresh vectors from an attribute distribution. The
reported stability is the mean per-iteration agreement; its worst-case
standard deviation is 0.5/sqrt(m), independent of n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from joblib import Parallel, delayed

from .agreement import estimate_agreement
from .core import (
    AttributeDistribution,
    Dataset,
    SeedSpec,
    UniformDistribution,
    as_seedspec,
    evaluate_accuracy,
    split_half,
)
from .errors import DataError, LearnerError, ParameterError
from .learners import Learner

__all__ = [
    "IterationRecord",
    "IterationFailure",
    "StabilityReport",
    "estimate_stability_accuracy",
    "stability_worst_case_std",
    "DriftAlarm",
    "monitor_drift",
]


@dataclass(frozen=True)
class IterationRecord:
    """One split-train-compare round: fold accuracies and agreement."""

    index: int
    acc1: float  # accuracy of the first-half concept on the second half
    acc2: float  # accuracy of the second-half concept on the first half
    agree_count: int
    stab: float  # agree_count / n, the per-iteration agreement


@dataclass(frozen=True)
class IterationFailure:
    index: int
    message: str


@dataclass(frozen=True)
class StabilityReport:
    learner_name: str
    m: int
    n: int
    master_seed: int
    iterations: tuple[IterationRecord, ...]
    failures: tuple[IterationFailure, ...] = ()

    @property
    def accuracy_estimate(self) -> float:
        accs = [a for rec in self.iterations for a in (rec.acc1, rec.acc2)]
        return sum(accs) / len(accs)

    @property
    def stability_estimate(self) -> float:
        return sum(rec.stab for rec in self.iterations) / len(self.iterations)

    @property
    def std_bound_stability(self) -> float:
        return stability_worst_case_std(self.m)

    @property
    def std_bound_agreement(self) -> float:
        return 0.5 / math.sqrt(self.n)

    def to_json_dict(self) -> dict:
        return {
            "accuracy_estimate": self.accuracy_estimate,
            "stability_estimate": self.stability_estimate,
            "m": self.m,
            "n": self.n,
            "iterations": [
                {"acc1": rec.acc1, "acc2": rec.acc2, "stab": rec.stab}
                for rec in self.iterations
            ],
            "std_bound_stability": self.std_bound_stability,
            "std_bound_agreement": self.std_bound_agreement,
            "master_seed": self.master_seed,
            "learner": self.learner_name,
            "failures": [
                {"iteration": f.index, "message": f.message} for f in self.failures
            ],
        }


def stability_worst_case_std(m: int) -> float:
    """Worst-case standard deviation of the stability estimate, 0.5/sqrt(m)."""
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    return 0.5 / math.sqrt(m)


def _train_or_fail(learner: Learner, data: Dataset, seed: int,
                   context: str):
    try:
        return learner.train(data, seed)
    except Exception as exc:  # noqa: BLE001 - policy: wrap with context
        raise LearnerError(f"learner {learner.name!r} failed on {context}: {exc}") from exc


def _run_iteration(learner, data, n, dist, spec, i) -> IterationRecord:
    it = spec.spawn("stability-iteration", i)
    local = learner.fork()
    t1, t2 = split_half(data, it.spawn("split"))
    f1 = _train_or_fail(local, t1, it.derive("train", 0), f"iteration {i}, half 1")
    f2 = _train_or_fail(local, t2, it.derive("train", 1), f"iteration {i}, half 2")
    acc1 = evaluate_accuracy(f1, t2)
    acc2 = evaluate_accuracy(f2, t1)
    est = estimate_agreement(f1, f2, dist, n, it.spawn("agreement"))
    return IterationRecord(i, acc1, acc2, est.agree_count, est.value)


def _run_iteration_safe(learner, data, n, dist, spec, i):
    try:
        return _run_iteration(learner, data, n, dist, spec, i)
    except LearnerError as exc:
        return IterationFailure(i, str(exc))


def estimate_stability_accuracy(learner: Learner, data: Dataset, m: int = 20,
                                n: int = 10_000,
                                dist: AttributeDistribution | None = None,
                                seed: SeedSpec | int = 0, n_jobs: int = 1,
                                skip_failures: bool = False) -> StabilityReport:
    """Estimate predictive accuracy and stability by m repeated half-splits.

    `dist` defaults to the uniform distribution over the data's full vector
    space. Each iteration derives its own seeds, so parallel (`n_jobs`) and
    sequential runs produce identical reports.

    Learner failures abort the run by default; with `skip_failures=True`
    the failing iterations are excluded from the estimates and recorded on
    the report (note the exclusion can bias the estimates).
    """
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if len(data) < 2:
        raise DataError("stability estimation needs at least 2 examples")
    if dist is None:
        dist = UniformDistribution(data.schema)
    if dist.schema != data.schema:
        raise DataError("agreement distribution schema differs from the data's")
    spec = as_seedspec(seed)

    run = _run_iteration_safe if skip_failures else _run_iteration
    if n_jobs != 1:
        results = Parallel(n_jobs=n_jobs)(
            delayed(run)(learner, data, n, dist, spec, i) for i in range(m)
        )
    else:
        results = [run(learner, data, n, dist, spec, i) for i in range(m)]

    records = tuple(r for r in results if isinstance(r, IterationRecord))
    failures = tuple(r for r in results if isinstance(r, IterationFailure))
    if not records:
        raise LearnerError("every iteration failed; no estimates available")
    return StabilityReport(
        learner_name=learner.name,
        m=m,
        n=n,
        master_seed=spec.master_seed,
        iterations=records,
        failures=failures,
    )


# ---------------------------------------------------------------------------
# Drift monitoring
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DriftAlarm:
    """Agreement check between concepts induced from consecutive batches."""

    batch_pair_index: int
    agreement: float
    threshold: float
    fired: bool

    def __post_init__(self):
        if self.fired != (self.agreement < self.threshold):
            raise ParameterError("fired flag inconsistent with agreement/threshold")

    @property
    def pair(self) -> tuple[int, int]:
        return (self.batch_pair_index, self.batch_pair_index + 1)


def monitor_drift(learner: Learner, batches, dist: AttributeDistribution | None = None,
                  n: int = 10_000, threshold: float = 0.5,
                  seed: SeedSpec | int = 0) -> list[DriftAlarm]:
    """Train on each batch in order and compare consecutive induced concepts.

    Returns one record per consecutive pair; `fired` marks pairs whose
    agreement fell below the threshold. Batches are processed in sequence so
    stateful learners see them in arrival order.
    """
    batches = list(batches)
    if len(batches) < 2:
        raise DataError("drift monitoring needs at least 2 batches")
    if not 0.0 <= threshold <= 1.0:
        raise ParameterError(f"threshold {threshold} outside [0, 1]")
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    schema = batches[0].schema
    for k, batch in enumerate(batches):
        if batch.schema != schema or batch.classes != batches[0].classes:
            raise DataError(f"batch {k} disagrees on schema or classes")
    if dist is None:
        dist = UniformDistribution(schema)
    spec = as_seedspec(seed)

    concepts = [
        _train_or_fail(learner, batch, spec.derive("drift-train", k), f"batch {k}")
        for k, batch in enumerate(batches)
    ]
    alarms = []
    for k in range(len(concepts) - 1):
        est = estimate_agreement(concepts[k], concepts[k + 1], dist, n,
                                 spec.spawn("drift-agreement", k))
        alarms.append(DriftAlarm(
            batch_pair_index=k,
            agreement=est.value,
            threshold=threshold,
            fired=est.value < threshold,
        ))
    return alarms
