"""Ground-truth Shapley computation and the permutation-sampling baseline.

:func:`shap_exact_subsets` is the reference implementation used as the
oracle throughout the test suite: a direct weighted sum of coalition
gradients over all 2^p subsets.  :func:`shap_exact_permutations` averages
prefix gradients over all p! orderings, which is the same value by a
counting argument and serves as an independent cross-check.
:func:`shap_sampling` is the Monte Carlo estimator that averages the prefix
gradients of m uniformly sampled orderings.
"""

from __future__ import annotations

from itertools import permutations
from math import factorial, sqrt

import numpy as np

from ._engine import exact_subsets_phi
from .attribution import Attribution
from .costs import CostContext
from .subsets import SubsetMask

__all__ = [
    "shap_exact_subsets",
    "shap_exact_permutations",
    "shap_sampling",
    "sampling_std_order2",
]


def shap_exact_subsets(ctx: CostContext, max_features: int = 20) -> Attribution:
    """Exact Shapley values by full coalition enumeration (2^p costs)."""
    p = ctx.p
    if p > max_features:
        raise ValueError(f"p={p} exceeds the enumeration limit {max_features} (2^p blow-up)")
    before = ctx.eval_count
    phi = exact_subsets_phi(ctx.cost, p)
    return Attribution(phi, method="exact_subsets", eval_count=ctx.eval_count - before)


def shap_exact_permutations(ctx: CostContext, max_features: int = 9) -> Attribution:
    """Exact Shapley values by averaging prefix gradients over all p! orders.

    Intended purely as a cross-check of :func:`shap_exact_subsets`; the
    cost cache keeps the distinct evaluations at 2^p even though p!
    orderings are walked.
    """
    p = ctx.p
    if p > max_features:
        raise ValueError(f"p={p} exceeds the permutation limit {max_features} (p! blow-up)")
    before = ctx.eval_count
    phi = np.zeros(p)
    for order in permutations(range(p)):
        previous = ctx.cost(SubsetMask.empty(p))
        mask = SubsetMask.empty(p)
        for i in order:
            mask = mask.add(i)
            current = ctx.cost(mask)
            phi[i] += current - previous
            previous = current
    phi /= factorial(p)
    return Attribution(phi, method="exact_permutations", eval_count=ctx.eval_count - before)


def shap_sampling(ctx: CostContext, m: int, seed: int | np.random.Generator) -> Attribution:
    """Monte Carlo Shapley estimate from m sampled feature orderings.

    Each sampled ordering is swept once, so every feature receives one
    prefix gradient per ordering (at most p+1 fresh cost values each); the
    estimate is the per-feature mean.  Orderings are drawn uniformly with
    replacement from a generator owned by this call, so results are
    deterministic given the seed.
    """
    if m < 1:
        raise ValueError(f"sample count must be at least 1, got {m}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    p = ctx.p
    before = ctx.eval_count
    phi = np.zeros(p)
    for _ in range(m):
        order = rng.permutation(p)
        previous = ctx.cost(SubsetMask.empty(p))
        mask = SubsetMask.empty(p)
        for i in order:
            mask = mask.add(int(i))
            current = ctx.cost(mask)
            phi[i] += current - previous
            previous = current
    phi /= m
    return Attribution(phi, method="sampling", eval_count=ctx.eval_count - before)


def sampling_std_order2(x: np.ndarray, z: np.ndarray, m: int) -> float:
    """Closed-form standard error of the sampled first-feature attribution
    for the model sum(x_j) + x_0 * x_1 under a reference-point cost.

    The prefix gradient for feature 0 takes one of two values depending on
    whether feature 1 precedes it, each with probability one half, giving a
    per-ordering standard deviation of |(x_0 - z_0)(x_1 - z_1)| / 2 and a
    mean-of-m standard error of that over sqrt(m).
    """
    if m < 1:
        raise ValueError(f"sample count must be at least 1, got {m}")
    return abs((x[0] - z[0]) * (x[1] - z[1])) / sqrt(4.0 * m)
