"""Model representations: polynomial term sums, structured component sums,
and opaque black-box evaluators.

A :class:`PolynomialModel` is the fully transparent case, a sum of
coefficient-times-monomial terms.  A :class:`StructuredModel` is a sum of
components, each an arbitrary callable over a small subset of the features.
A :class:`BlackBoxModel` only promises a deterministic scalar evaluator.

All three expose ``p`` (feature count), ``evaluate`` (one vector) and
``evaluate_batch`` (a matrix of rows), which is the whole surface the
attribution engines need.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .subsets import SubsetMask

__all__ = [
    "ModelSpecError",
    "PolynomialModel",
    "StructuredModel",
    "BlackBoxModel",
    "Model",
    "evaluate",
    "model_order",
    "decompose_polynomial",
    "parse_model_spec",
    "serialize_model_spec",
    "as_feature_vector",
]


class ModelSpecError(ValueError):
    """Raised for malformed or inconsistent model-spec documents."""


def as_feature_vector(values: Sequence[float] | np.ndarray, p: int) -> np.ndarray:
    """Validate and return a length-p float64 feature vector."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != p:
        raise ValueError(f"expected a length-{p} feature vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("feature vector contains non-finite entries")
    return x


@dataclass(frozen=True)
class PolynomialModel:
    """A sum of terms ``coef * prod(x[j] for j in vars)``.

    Terms are keyed by their variable set: duplicates are merged by summing
    coefficients at construction, and terms whose merged coefficient is
    exactly zero are dropped so that :func:`model_order` reflects the
    effective interaction order.  ``vars`` tuples are strictly increasing;
    the empty tuple is the constant term.
    """

    p: int
    terms: tuple[tuple[float, tuple[int, ...]], ...]

    def __init__(self, p: int, terms: Sequence[tuple[float, Sequence[int]]]):
        if p < 0:
            raise ValueError(f"feature count must be non-negative, got {p}")
        merged: dict[tuple[int, ...], float] = {}
        for coef, variables in terms:
            key = tuple(sorted(variables))
            if len(set(key)) != len(key):
                raise ValueError(f"term variables must be distinct, got {variables}")
            for j in key:
                if not 0 <= j < p:
                    raise ModelSpecError(f"feature index {j} out of range(0, {p})")
            merged[key] = merged.get(key, 0.0) + float(coef)
        kept = tuple(
            (coef, key)
            for key, coef in sorted(merged.items(), key=lambda kv: (len(kv[0]), kv[0]))
            if coef != 0.0
        )
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "terms", kept)

    def evaluate(self, x: np.ndarray) -> float:
        # monomial first, coefficient last: the same association order as
        # evaluate_batch, so scalar and batch results agree bit for bit
        total = 0.0
        for coef, variables in self.terms:
            monomial = 1.0
            for j in variables:
                monomial *= x[j]
            total += coef * monomial
        return total

    def evaluate_batch(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.float64)
        out = np.zeros(rows.shape[0])
        for coef, variables in self.terms:
            if variables:
                out += coef * np.prod(rows[:, variables], axis=1)
            else:
                out += coef
        return out

    def __add__(self, other: "PolynomialModel") -> "PolynomialModel":
        if self.p != other.p:
            raise ValueError(f"feature counts differ: {self.p} vs {other.p}")
        return PolynomialModel(self.p, list(self.terms) + list(other.terms))


@dataclass(frozen=True)
class StructuredModel:
    """A sum of components, each depending on a small feature subset.

    ``components`` maps a feature subset v to an evaluator ``f_v`` taking the
    sub-vector ``x[sorted(v)]``.  An empty v denotes the constant component
    (its evaluator is called with an empty array).
    """

    p: int
    components: tuple[tuple[SubsetMask, Callable[[np.ndarray], float]], ...]

    def __init__(
        self,
        p: int,
        components: Sequence[tuple[SubsetMask, Callable[[np.ndarray], float]]],
    ):
        for v, _ in components:
            if v.p != p:
                raise ValueError(f"component mask size {v.p} does not match p={p}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "components", tuple(components))

    def evaluate(self, x: np.ndarray) -> float:
        total = 0.0
        for v, f_v in self.components:
            total += float(f_v(x[list(v.indices())]))
        return total

    def evaluate_batch(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.float64)
        return np.array([self.evaluate(row) for row in rows])


@dataclass(frozen=True)
class BlackBoxModel:
    """An opaque deterministic evaluator with an optional declared order.

    ``declared_order`` is an upper bound on the interaction order the caller
    asserts; the order-limited attribution engines are exact only when the
    true order does not exceed it.
    """

    p: int
    evaluator: Callable[[np.ndarray], float]
    declared_order: int | None = None
    batch_evaluator: Callable[[np.ndarray], np.ndarray] | None = field(default=None)

    def evaluate(self, x: np.ndarray) -> float:
        return float(self.evaluator(x))

    def evaluate_batch(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.float64)
        if self.batch_evaluator is not None:
            out = np.asarray(self.batch_evaluator(rows), dtype=np.float64)
            if out.shape != (rows.shape[0],):
                raise ValueError(f"batch evaluator returned shape {out.shape}, expected ({rows.shape[0]},)")
            return out
        return np.array([self.evaluate(row) for row in rows])


Model = PolynomialModel | StructuredModel | BlackBoxModel


def evaluate(model: Model, x: Sequence[float] | np.ndarray) -> float:
    """Evaluate any model on one feature vector, with dimension checks."""
    vec = as_feature_vector(x, model.p)
    return float(model.evaluate(vec))


def model_order(model: PolynomialModel | StructuredModel) -> int:
    """Highest interaction order: max term/component cardinality.

    1 for a purely additive model, 0 for a constant-only (or empty) model.
    """
    if isinstance(model, PolynomialModel):
        return max((len(v) for _, v in model.terms), default=0)
    return max((v.cardinality for v, _ in model.components), default=0)


def decompose_polynomial(model: PolynomialModel) -> StructuredModel:
    """Split a polynomial into one component per distinct variable set.

    After construction-time merging each variable set appears in exactly one
    term, so each component is a single monomial over its local sub-vector.
    Evaluation is preserved pointwise up to float reassociation.
    """

    def make_component(coef: float) -> Callable[[np.ndarray], float]:
        def f_v(sub: np.ndarray) -> float:
            value = coef
            for s in sub:
                value *= s
            return value

        return f_v

    components = [
        (SubsetMask.from_indices(variables, model.p), make_component(coef))
        for coef, variables in model.terms
    ]
    if not components:
        components = [(SubsetMask.empty(model.p), lambda sub: 0.0)]
    return StructuredModel(model.p, components)


def parse_model_spec(text: str) -> PolynomialModel:
    """Parse the JSON model-spec format into a :class:`PolynomialModel`.

    Format: ``{"p": int, "terms": [{"coef": number, "vars": [int, ...]}, ...]}``
    with 0-based feature indices.  Listing the same variable set twice with
    different coefficients is rejected as ambiguous; an identical repeat is
    tolerated and collapsed to a single term.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelSpecError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelSpecError("model spec must be a JSON object")
    if "p" not in doc or not isinstance(doc["p"], int) or isinstance(doc["p"], bool):
        raise ModelSpecError('model spec needs an integer "p" field')
    p = doc["p"]
    if p < 0:
        raise ModelSpecError(f'"p" must be non-negative, got {p}')
    raw_terms = doc.get("terms", [])
    if not isinstance(raw_terms, list):
        raise ModelSpecError('"terms" must be a list')

    seen: dict[tuple[int, ...], float] = {}
    for entry in raw_terms:
        if not isinstance(entry, dict) or "coef" not in entry or "vars" not in entry:
            raise ModelSpecError(f'each term needs "coef" and "vars", got {entry!r}')
        coef = entry["coef"]
        if not isinstance(coef, (int, float)) or isinstance(coef, bool):
            raise ModelSpecError(f'"coef" must be a number, got {coef!r}')
        variables = entry["vars"]
        if not isinstance(variables, list) or not all(
            isinstance(j, int) and not isinstance(j, bool) for j in variables
        ):
            raise ModelSpecError(f'"vars" must be a list of integers, got {variables!r}')
        for j in variables:
            if not 0 <= j < p:
                raise ModelSpecError(f"feature index {j} out of range(0, {p})")
        key = tuple(sorted(variables))
        if len(set(key)) != len(key):
            raise ModelSpecError(f"term variables must be distinct, got {variables}")
        if key in seen and seen[key] != float(coef):
            raise ModelSpecError(
                f"duplicate term for vars {list(key)} with conflicting coefficients "
                f"{seen[key]} and {coef}"
            )
        seen[key] = float(coef)

    return PolynomialModel(p, [(coef, key) for key, coef in seen.items()])


def serialize_model_spec(model: PolynomialModel) -> str:
    """Serialize to the JSON model-spec format (inverse of parsing)."""
    doc = {
        "p": model.p,
        "terms": [{"coef": coef, "vars": list(variables)} for coef, variables in model.terms],
    }
    return json.dumps(doc, indent=2)
