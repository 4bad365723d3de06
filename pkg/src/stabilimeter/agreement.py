"""Semantic agreement between concepts.

`estimate_agreement` is the Monte Carlo estimator: the fraction of vectors,
drawn from an attribute distribution, on which two concepts assign the same
class. Its worst-case standard deviation is 0.5/sqrt(n) (Bernoulli bound at
p = 0.5). `exact_agreement` enumerates the support instead and returns an
exact rational, which makes agreement-equals-one a crisp test for the
material equivalence of boolean formulas under strictly positive
distributions.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np
from joblib import Parallel, delayed

from .core import (
    AttributeDistribution,
    AttributeSchema,
    Concept,
    SeedSpec,
    as_seedspec,
    boolean_schema,
    BINARY_CLASSES,
)
from .errors import CapacityError, DataError, ParameterError, ParseError

__all__ = [
    "Var",
    "Const",
    "Not",
    "And",
    "Or",
    "BooleanFormula",
    "parse_formula",
    "formula_to_sexpr",
    "formula_variables",
    "truth_table",
    "FormulaConcept",
    "AgreementEstimate",
    "estimate_agreement",
    "exact_agreement",
    "materially_equivalent",
    "DEFAULT_EXACT_LIMIT",
    "SAMPLE_CHUNK",
]

# Exact enumeration beyond this many support vectors raises CapacityError;
# Monte Carlo estimation stays cheap regardless of space size.
DEFAULT_EXACT_LIMIT = 1 << 24

# Sampling happens in fixed-size chunks, each with its own derived seed, so
# partitioning chunks across workers cannot change the merged count.
SAMPLE_CHUNK = 8192


# ---------------------------------------------------------------------------
# Propositional formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    index: int

    def evaluate(self, vectors: np.ndarray) -> np.ndarray:
        return vectors[:, self.index] == 1


@dataclass(frozen=True)
class Const:
    value: bool

    def evaluate(self, vectors):
        return np.full(len(vectors), self.value, dtype=bool)


@dataclass(frozen=True)
class Not:
    child: "BooleanFormula"

    def evaluate(self, vectors):
        return ~self.child.evaluate(vectors)


@dataclass(frozen=True)
class And:
    left: "BooleanFormula"
    right: "BooleanFormula"

    def evaluate(self, vectors):
        return self.left.evaluate(vectors) & self.right.evaluate(vectors)


@dataclass(frozen=True)
class Or:
    left: "BooleanFormula"
    right: "BooleanFormula"

    def evaluate(self, vectors):
        return self.left.evaluate(vectors) | self.right.evaluate(vectors)


BooleanFormula = Var | Const | Not | And | Or


def formula_variables(formula: BooleanFormula) -> set[int]:
    if isinstance(formula, Var):
        return {formula.index}
    if isinstance(formula, Const):
        return set()
    if isinstance(formula, Not):
        return formula_variables(formula.child)
    return formula_variables(formula.left) | formula_variables(formula.right)


def formula_to_sexpr(formula: BooleanFormula) -> str:
    """Prefix s-expression form, e.g. `(and (var 0) (not (var 1)))`."""
    if isinstance(formula, Var):
        return f"(var {formula.index})"
    if isinstance(formula, Const):
        return "true" if formula.value else "false"
    if isinstance(formula, Not):
        return f"(not {formula_to_sexpr(formula.child)})"
    op = "and" if isinstance(formula, And) else "or"
    return f"({op} {formula_to_sexpr(formula.left)} {formula_to_sexpr(formula.right)})"


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse_formula(text: str) -> BooleanFormula:
    """Parse the s-expression form; round-trips with `formula_to_sexpr`."""
    tokens = _TOKEN.findall(text)
    pos = 0

    def fail(msg: str):
        raise ParseError(f"formula: {msg} (token {pos} in {text!r})")

    def next_token():
        nonlocal pos
        if pos >= len(tokens):
            fail("unexpected end of input")
        tok = tokens[pos]
        pos += 1
        return tok

    def expr():
        tok = next_token()
        if tok == "true":
            return Const(True)
        if tok == "false":
            return Const(False)
        if tok != "(":
            fail(f"unexpected token {tok!r}")
        head = next_token()
        if head == "var":
            num = next_token()
            if not num.isdigit():
                fail(f"variable index must be a nonnegative integer, got {num!r}")
            node = Var(int(num))
        elif head == "not":
            node = Not(expr())
        elif head in ("and", "or"):
            left, right = expr(), expr()
            node = And(left, right) if head == "and" else Or(left, right)
        else:
            fail(f"unknown operator {head!r}")
        if next_token() != ")":
            fail("expected `)`")
        return node

    result = expr()
    if pos != len(tokens):
        fail("trailing tokens")
    return result


def truth_table(formula: BooleanFormula, num_vars: int) -> np.ndarray:
    """Formula value on all 2**num_vars vectors, variable 0 varying slowest."""
    if num_vars < 1:
        raise ParameterError("num_vars must be >= 1")
    idx = np.arange(1 << num_vars, dtype=np.int64)
    vectors = (idx[:, None] >> np.arange(num_vars - 1, -1, -1)) & 1
    return formula.evaluate(vectors)


class FormulaConcept(Concept):
    """A propositional formula as a binary concept: class 1 iff it holds."""

    kind = "formula"

    def __init__(self, formula: BooleanFormula, num_vars: int | None = None,
                 schema: AttributeSchema | None = None):
        used = formula_variables(formula)
        min_vars = max(used) + 1 if used else 1
        if schema is None:
            schema = boolean_schema(num_vars if num_vars is not None else min_vars)
        if any(card != 2 for card in schema.cardinalities):
            raise DataError("formula concepts require an all-boolean schema")
        if min_vars > len(schema):
            raise DataError(
                f"formula uses variable {max(used)} but the schema has only "
                f"{len(schema)} attributes"
            )
        super().__init__(schema, BINARY_CLASSES)
        self.formula = formula

    def classify_batch(self, vectors):
        return self.formula.evaluate(vectors).astype(np.int64)


# ---------------------------------------------------------------------------
# Agreement estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AgreementEstimate:
    """Monte Carlo agreement: agreeing draws over total draws."""

    agree_count: int
    sample_count: int

    def __post_init__(self):
        if self.sample_count < 1:
            raise ParameterError("sample_count must be >= 1")
        if not 0 <= self.agree_count <= self.sample_count:
            raise ParameterError("agree_count outside [0, sample_count]")

    @property
    def value(self) -> float:
        return self.agree_count / self.sample_count

    @property
    def worst_case_std(self) -> float:
        return 0.5 / math.sqrt(self.sample_count)


def _check_comparable(f1: Concept, f2: Concept,
                      dist: AttributeDistribution | None = None) -> None:
    if not f1.compatible_with(f2):
        raise DataError("concepts disagree on schema or classes")
    if dist is not None and dist.schema != f1.schema:
        raise DataError("distribution schema differs from the concepts'")


def _chunk_sizes(n: int) -> list[int]:
    sizes = [SAMPLE_CHUNK] * (n // SAMPLE_CHUNK)
    if n % SAMPLE_CHUNK:
        sizes.append(n % SAMPLE_CHUNK)
    return sizes


def sample_chunks(dist: AttributeDistribution, n: int,
                  spec: SeedSpec) -> Iterator[np.ndarray]:
    """Deterministic chunked sampling: chunk i always uses the same derived
    seed, so the concatenated draw does not depend on execution layout."""
    for i, size in enumerate(_chunk_sizes(n)):
        yield dist.sample(size, spec.rng("agreement-sample", i))


def _count_chunk(f1, f2, dist, spec, index, size) -> int:
    vectors = dist.sample(size, spec.rng("agreement-sample", index))
    return int(np.count_nonzero(
        f1.classify_batch(vectors) == f2.classify_batch(vectors)
    ))


def estimate_agreement(f1: Concept, f2: Concept, dist: AttributeDistribution,
                       n: int, seed: SeedSpec | int,
                       n_jobs: int = 1) -> AgreementEstimate:
    """Fraction of n iid draws from `dist` on which f1 and f2 agree."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    _check_comparable(f1, f2, dist)
    spec = as_seedspec(seed)
    sizes = _chunk_sizes(n)
    if n_jobs != 1 and len(sizes) > 1:
        counts = Parallel(n_jobs=n_jobs)(
            delayed(_count_chunk)(f1, f2, dist, spec, i, size)
            for i, size in enumerate(sizes)
        )
    else:
        counts = [_count_chunk(f1, f2, dist, spec, i, size)
                  for i, size in enumerate(sizes)]
    return AgreementEstimate(agree_count=sum(counts), sample_count=n)


def exact_agreement(f1: Concept, f2: Concept, dist: AttributeDistribution,
                    max_vectors: int = DEFAULT_EXACT_LIMIT) -> Fraction:
    """Exact probability of agreement under an enumerable distribution."""
    _check_comparable(f1, f2, dist)
    size = dist.support_size()
    if size is None:
        raise DataError(
            f"{type(dist).__name__} is not enumerable; use estimate_agreement"
        )
    if size > max_vectors:
        raise CapacityError(
            f"support of {size} vectors exceeds the exact-enumeration bound "
            f"of {max_vectors}; use estimate_agreement instead"
        )
    agree = 0
    for vectors, weights in dist.iter_support():
        same = f1.classify_batch(vectors) == f2.classify_batch(vectors)
        agree += int(weights[same].sum())
    return Fraction(agree, dist.total_weight())


def materially_equivalent(f1: Concept, f2: Concept, dist: AttributeDistribution,
                          max_vectors: int = DEFAULT_EXACT_LIMIT) -> bool:
    """True iff the concepts agree everywhere the distribution can reach.

    Requires a distribution that is strictly positive on the whole space;
    under that condition agreement 1 is equivalent to identical truth tables.
    """
    if not dist.strictly_positive():
        raise DataError(
            "material equivalence requires a distribution assigning nonzero "
            "probability to every vector"
        )
    return exact_agreement(f1, f2, dist, max_vectors=max_vectors) == 1
