"""Preferential-bias measurement.

Training sets are drawn from a mixture: each vector comes from a base
attribute distribution and is labeled by concept f1 with probability (1-p)
and by concept f2 with probability p. Sweeping p and asking which of f1/f2
the induced concepts agree with more reveals how much evidence the learner
needs before it stops producing f1-like output: the flip threshold. A
learner with no preference flips near p = 0.5; a learner biased toward f1
keeps preferring it for p well above 0.5.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import binomtest

from .agreement import _chunk_sizes, _check_comparable
from .core import (
    AttributeDistribution,
    Concept,
    Dataset,
    LabeledDistribution,
    SeedSpec,
    UniformDistribution,
    as_seedspec,
    sample_dataset,
)
from .errors import DataError, ParameterError
from .learners import Learner
from .stability import _train_or_fail

__all__ = [
    "delta",
    "MixtureParams",
    "MixtureDistribution",
    "sample_mixture",
    "TrialRecord",
    "PreferenceResult",
    "measure_preference",
    "BiasStrengthResult",
    "measure_bias_strength",
    "SIGN_TEST_ALPHA",
]

# Grid points whose paired sign test is not significant at this level are
# marked undecided rather than forced into a preference.
SIGN_TEST_ALPHA = 0.05


def delta(c1: int, c2: int) -> int:
    """Class-equality indicator: 1 if c1 = c2, else 0."""
    return 1 if c1 == c2 else 0


@dataclass(frozen=True)
class MixtureParams:
    """Mixture family: label = f1(a) with weight (1-p), f2(a) with weight p."""

    base_dist: AttributeDistribution
    p: float
    f1: Concept
    f2: Concept

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"p={self.p} outside [0, 1]")
        _check_comparable(self.f1, self.f2, self.base_dist)

    def swapped(self) -> "MixtureParams":
        """Roles reversed: label = f2(a) with weight (1-p), f1(a) with weight p."""
        return MixtureParams(self.base_dist, self.p, self.f2, self.f1)

    def at(self, p: float) -> "MixtureParams":
        return MixtureParams(self.base_dist, p, self.f1, self.f2)


class MixtureDistribution(LabeledDistribution):
    """Labeled sampler for a MixtureParams.

    The vector draw is independent of p, so the attribute marginal always
    equals the base distribution; on vectors where f1 and f2 agree the label
    equals their common value for every p.
    """

    def __init__(self, params: MixtureParams):
        super().__init__(params.f1.schema, params.f1.classes)
        self.params = params

    def sample(self, size, rng):
        vectors = self.params.base_dist.sample(size, rng)
        from_f2 = rng.random(size) < self.params.p
        labels1 = self.params.f1.classify_batch(vectors)
        labels2 = self.params.f2.classify_batch(vectors)
        return vectors, np.where(from_f2, labels2, labels1)


def sample_mixture(params: MixtureParams, size: int, seed: SeedSpec | int) -> Dataset:
    """Draw a training set of `size` examples from the mixture."""
    return sample_dataset(MixtureDistribution(params), size, seed)


# ---------------------------------------------------------------------------
# Preference
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    agree_f1: float
    agree_f2: float


@dataclass(frozen=True)
class PreferenceResult:
    """Mean agreement of induced concepts with each anchor concept."""

    p: float
    mean_agree_f1: float
    mean_agree_f2: float
    trials: int
    per_trial: tuple[TrialRecord, ...]
    decided: bool
    sign_test_p: float

    @property
    def prefers_f1(self) -> bool:
        return self.mean_agree_f1 > self.mean_agree_f2

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "mean_agree_f1": self.mean_agree_f1,
            "mean_agree_f2": self.mean_agree_f2,
            "decided": self.decided,
            "prefers_f1": self.prefers_f1,
        }


def _paired_agreement(induced: Concept, f1: Concept, f2: Concept,
                      dist: AttributeDistribution, n: int,
                      spec: SeedSpec) -> tuple[int, int]:
    """Agreement counts of `induced` with f1 and with f2 on the same draws."""
    count1 = count2 = 0
    for i, size in enumerate(_chunk_sizes(n)):
        vectors = dist.sample(size, spec.rng("agreement-sample", i))
        got = induced.classify_batch(vectors)
        count1 += int(np.count_nonzero(got == f1.classify_batch(vectors)))
        count2 += int(np.count_nonzero(got == f2.classify_batch(vectors)))
    return count1, count2


def _sign_test(diffs) -> tuple[bool, float]:
    pos = sum(1 for d in diffs if d > 0)
    neg = sum(1 for d in diffs if d < 0)
    if pos + neg == 0:
        return False, 1.0
    result = binomtest(pos, pos + neg, 0.5)
    return bool(result.pvalue < SIGN_TEST_ALPHA), float(result.pvalue)


def measure_preference(learner: Learner, f1: Concept, f2: Concept,
                       params: MixtureParams, train_size: int, trials: int,
                       agree_dist: AttributeDistribution, n_agree: int,
                       seed: SeedSpec | int) -> PreferenceResult:
    """Estimate whether concepts induced from mixture training sets agree
    more with f1 or with f2.

    `params` controls the training mixture (and may have the anchor roles
    swapped); f1/f2 are the anchors the agreement is measured against. Each
    trial samples a fresh training set, trains a forked learner, and
    measures both agreements on the same vector draws, so identical anchors
    yield identical means.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if train_size < 1:
        raise ParameterError(f"train_size must be >= 1, got {train_size}")
    if n_agree < 1:
        raise ParameterError(f"n_agree must be >= 1, got {n_agree}")
    _check_comparable(f1, f2, agree_dist)
    if f1.schema != params.f1.schema or f1.classes != params.f1.classes:
        raise DataError("mixture concepts and anchors disagree on schema or classes")
    spec = as_seedspec(seed)

    records = []
    for t in range(trials):
        trial = spec.spawn("preference-trial", t)
        data = sample_mixture(params, train_size, trial.spawn("train-data"))
        local = learner.fork()
        induced = _train_or_fail(local, data, trial.derive("train"), f"trial {t}")
        c1, c2 = _paired_agreement(induced, f1, f2, agree_dist, n_agree,
                                   trial.spawn("agree"))
        records.append(TrialRecord(c1 / n_agree, c2 / n_agree))

    decided, pvalue = _sign_test([r.agree_f1 - r.agree_f2 for r in records])
    return PreferenceResult(
        p=params.p,
        mean_agree_f1=sum(r.agree_f1 for r in records) / trials,
        mean_agree_f2=sum(r.agree_f2 for r in records) / trials,
        trials=trials,
        per_trial=tuple(records),
        decided=decided,
        sign_test_p=pvalue,
    )


# ---------------------------------------------------------------------------
# Bias strength
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BiasStrengthResult:
    """Preference curve over the mixture weight grid.

    `flip_threshold` is the largest decided grid p at which the learner
    still prefers f1; it is reported only when the decided preferences are
    monotone in p (True before False), otherwise the result is flagged
    indeterminate. `strength_toward_f1` repeats the threshold when it
    exceeds 0.5, the range in which it measures a genuine bias.
    """

    grid: tuple[float, ...]
    results: tuple[PreferenceResult, ...]
    flip_threshold: float | None
    biased_toward_f1_at_half: bool
    indeterminate: bool
    master_seed: int

    @property
    def strength_toward_f1(self) -> float | None:
        if self.flip_threshold is not None and self.flip_threshold > 0.5:
            return self.flip_threshold
        return None

    def to_json_dict(self) -> dict:
        return {
            "curve": [r.to_json_dict() for r in self.results],
            "flip_threshold": self.flip_threshold,
            "biased_toward_f1_at_half": self.biased_toward_f1_at_half,
            "indeterminate": self.indeterminate,
            "strength_toward_f1": self.strength_toward_f1,
            "master_seed": self.master_seed,
        }

    def to_csv_rows(self) -> list[tuple[float, float]]:
        """Two-column plot data: p and the preference for f1 (mean difference)."""
        return [(r.p, r.mean_agree_f1 - r.mean_agree_f2) for r in self.results]


def _grid(step: float) -> tuple[float, ...]:
    points = {0.0, 0.5, 1.0}
    i = 1
    while True:
        p = round(i * step, 9)
        if p >= 1.0:
            break
        points.add(p)
        i += 1
    return tuple(sorted(points))


def measure_bias_strength(learner: Learner, f1: Concept, f2: Concept,
                          base_dist: AttributeDistribution | None = None,
                          grid_step: float = 0.05, train_size: int = 100,
                          trials: int = 30,
                          agree_dist: AttributeDistribution | None = None,
                          n_agree: int = 2000, seed: SeedSpec | int = 0,
                          n_jobs: int = 1,
                          swap_mixture_roles: bool = False) -> BiasStrengthResult:
    """Sweep the mixture weight p over a grid and locate the flip threshold.

    With `swap_mixture_roles=True` the mixture labels vectors by f2 with
    weight (1-p) and f1 with weight p (the alternative orientation of the
    family); the anchors and the reported preference stay (f1, f2).
    """
    if not 0.0 < grid_step <= 0.1:
        raise ParameterError(f"grid_step {grid_step} outside (0, 0.1]")
    _check_comparable(f1, f2)
    if base_dist is None:
        base_dist = UniformDistribution(f1.schema)
    if agree_dist is None:
        agree_dist = UniformDistribution(f1.schema)
    spec = as_seedspec(seed)
    grid = _grid(grid_step)

    def run_point(i: int, p: float) -> PreferenceResult:
        params = MixtureParams(base_dist, p, f1, f2)
        if swap_mixture_roles:
            params = params.swapped()
        return measure_preference(
            learner, f1, f2, params, train_size, trials, agree_dist, n_agree,
            spec.spawn("bias-grid", i),
        )

    if n_jobs != 1:
        results = Parallel(n_jobs=n_jobs)(
            delayed(run_point)(i, p) for i, p in enumerate(grid)
        )
    else:
        results = [run_point(i, p) for i, p in enumerate(grid)]
    results = tuple(results)

    decided = [(r.p, r.prefers_f1) for r in results if r.decided]
    seen_false = False
    monotone = True
    for _, prefers in decided:
        if prefers and seen_false:
            monotone = False
            break
        if not prefers:
            seen_false = True
    if monotone:
        trues = [p for p, prefers in decided if prefers]
        flip_threshold = max(trues) if trues else None
        indeterminate = False
    else:
        flip_threshold = None
        indeterminate = True

    at_half = next(r for r in results if r.p == 0.5)
    return BiasStrengthResult(
        grid=grid,
        results=results,
        flip_threshold=flip_threshold,
        biased_toward_f1_at_half=at_half.prefers_f1,
        indeterminate=indeterminate,
        master_seed=spec.master_seed,
    )
