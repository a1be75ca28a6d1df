"""Coalition cost functions.

The worth ``c(f, u)`` of a feature coalition u is the model output with the
features in u taken from the explained instance x and the rest either
replaced by a fixed baseline point z or averaged over a background dataset
(the interventional reading: full background rows are substituted jointly
for the absent block).

Both shipped variants are additive across model sums and ignore features a
component does not depend on, which is what every exact attribution routine
in this package relies on.  A conditional-expectation cost would break the
second property and is deliberately not provided.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .models import Model, PolynomialModel, StructuredModel, as_feature_vector, decompose_polynomial
from .subsets import SubsetMask

__all__ = [
    "BaselineVariant",
    "KernelVariant",
    "CostContext",
    "baseline_context",
    "kernel_context",
    "AssumptionReport",
    "check_assumption1",
]


@dataclass(frozen=True)
class BaselineVariant:
    """Reference-point cost: absent features are read from the point z."""

    z: np.ndarray

    def describe(self) -> str:
        return "baseline"


@dataclass(frozen=True)
class KernelVariant:
    """Background-average cost: absent features are averaged over rows."""

    background: np.ndarray

    def describe(self) -> str:
        return f"kernel[{self.background.shape[0]} rows]"


@dataclass
class CostContext:
    """One instance x bound to a cost variant and a model, with memoization.

    ``eval_count`` tallies underlying model evaluations (each background row
    counts once), so it is a hardware-independent work measure.  Repeated
    cost queries for the same subset hit the cache and add nothing.
    """

    model: Model
    x: np.ndarray
    variant: BaselineVariant | KernelVariant
    cache: dict[int, float] = field(default_factory=dict)
    eval_count: int = 0

    @property
    def p(self) -> int:
        return self.model.p

    def cost(self, u: SubsetMask) -> float:
        if u.p != self.p:
            raise ValueError(f"subset is over {u.p} features, model has {self.p}")
        hit = self.cache.get(u.bits)
        if hit is not None:
            return hit
        value = self._compute(u)
        if not np.isfinite(value):
            raise ValueError(f"model returned non-finite value for subset {u!r}")
        self.cache[u.bits] = value
        return value

    def _compute(self, u: SubsetMask) -> float:
        member = u.to_bool_array()
        if isinstance(self.variant, BaselineVariant):
            mixed = np.where(member, self.x, self.variant.z)
            self.eval_count += 1
            return float(self.model.evaluate(mixed))
        background = self.variant.background
        mixed = np.where(member[None, :], self.x[None, :], background)
        self.eval_count += background.shape[0]
        return float(np.mean(self.model.evaluate_batch(mixed)))

    def gradient(self, u: SubsetMask, i: int) -> float:
        """Marginal contribution of feature i on top of coalition u."""
        if u.contains(i):
            raise ValueError(f"feature {i} already in coalition {u!r}")
        return self.cost(u.add(i)) - self.cost(u)


def baseline_context(model: Model, x: Sequence[float] | np.ndarray, z: Sequence[float] | np.ndarray) -> CostContext:
    """Build a reference-point cost context for one instance."""
    return CostContext(model, as_feature_vector(x, model.p), BaselineVariant(as_feature_vector(z, model.p)))


def kernel_context(
    model: Model, x: Sequence[float] | np.ndarray, background: np.ndarray
) -> CostContext:
    """Build a background-average cost context for one instance."""
    bg = np.asarray(background, dtype=np.float64)
    if bg.ndim != 2 or bg.shape[0] == 0 or bg.shape[1] != model.p:
        raise ValueError(f"background must be a non-empty (n, {model.p}) matrix, got shape {bg.shape}")
    if not np.all(np.isfinite(bg)):
        raise ValueError("background contains non-finite entries")
    return CostContext(model, as_feature_vector(x, model.p), KernelVariant(bg))


@dataclass(frozen=True)
class AssumptionReport:
    """Observed violations of cost additivity and absent-feature invariance."""

    max_additivity_violation: float
    max_dummy_violation: float
    scale: float
    tolerance_factor: float = 1e-10

    @property
    def passed(self) -> bool:
        bound = self.tolerance_factor * self.scale
        return self.max_additivity_violation <= bound and self.max_dummy_violation <= bound


def check_assumption1(
    variant: BaselineVariant | KernelVariant,
    f1: Model,
    f2: Model,
    trial_subsets: Sequence[SubsetMask],
    trial_instances: np.ndarray,
) -> AssumptionReport:
    """Measure how far a cost variant is from additive and dummy behavior.

    Additivity compares ``c(f1+f2, u)`` with ``c(f1, u) + c(f2, u)``; the
    dummy check compares ``c(f_v, u)`` with ``c(f_v, u & v)`` for each
    component of f1 (f1 is decomposed if it is a plain polynomial).
    Violations are reported, never raised.
    """
    if f1.p != f2.p:
        raise ValueError(f"feature counts differ: {f1.p} vs {f2.p}")
    instances = np.atleast_2d(np.asarray(trial_instances, dtype=np.float64))

    if isinstance(f1, PolynomialModel) and isinstance(f2, PolynomialModel):
        f_sum: Model = f1 + f2
    else:
        p = f1.p
        from .models import BlackBoxModel

        f_sum = BlackBoxModel(
            p,
            lambda vec, _a=f1, _b=f2: _a.evaluate(vec) + _b.evaluate(vec),
            batch_evaluator=lambda rows, _a=f1, _b=f2: np.asarray(_a.evaluate_batch(rows))
            + np.asarray(_b.evaluate_batch(rows)),
        )

    if isinstance(f1, StructuredModel):
        structured = f1
    elif isinstance(f1, PolynomialModel):
        structured = decompose_polynomial(f1)
    else:
        structured = None

    max_additivity = 0.0
    max_dummy = 0.0
    scale = 0.0
    for row in instances:
        ctx_sum = CostContext(f_sum, as_feature_vector(row, f1.p), variant)
        ctx_1 = CostContext(f1, ctx_sum.x, variant)
        ctx_2 = CostContext(f2, ctx_sum.x, variant)
        for u in trial_subsets:
            c1, c2, cs = ctx_1.cost(u), ctx_2.cost(u), ctx_sum.cost(u)
            scale = max(scale, abs(c1), abs(c2), abs(cs), 1.0)
            max_additivity = max(max_additivity, abs(cs - c1 - c2))
        if structured is not None:
            for v, f_v in structured.components:
                single = StructuredModel(f1.p, [(v, f_v)])
                ctx_v = CostContext(single, ctx_sum.x, variant)
                for u in trial_subsets:
                    full = ctx_v.cost(u)
                    restricted = ctx_v.cost(u.intersect(v))
                    scale = max(scale, abs(full), 1.0)
                    max_dummy = max(max_dummy, abs(full - restricted))
    return AssumptionReport(max_additivity, max_dummy, scale)
