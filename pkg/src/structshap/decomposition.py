"""Attribution from a known functional decomposition.

Because both shipped cost variants are additive across model sums and blind
to features a component does not touch, the Shapley values of a component
sum are the per-feature sums of each component's Shapley values.  Each
component only needs its own 2^|v| local coalition costs, so total work is
bounded by component sizes, not by p.

For decompositions that are hierarchically orthogonal under an independent
feature distribution there is a further shortcut: under the
background-average cost every component's value splits evenly among its
member features, needing no cost evaluations at all.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from ._engine import exact_subsets_phi
from .attribution import Attribution
from .costs import BaselineVariant, CostContext, KernelVariant
from .models import StructuredModel, as_feature_vector
from .subsets import SubsetMask

__all__ = ["shap_from_decomposition", "shap_orthogonal_fanova"]


def _local_cost_fn(
    f_v: Callable[[np.ndarray], float],
    members: tuple[int, ...],
    x: np.ndarray,
    variant: BaselineVariant | KernelVariant,
) -> tuple[Callable[[SubsetMask], float], Callable[[], int]]:
    """Cost of one component restricted to its own feature subset.

    The returned callable takes coalitions over the |v| local coordinates.
    A local memo keeps each of the 2^|v| costs to a single evaluation; the
    second return value reports how many component evaluations were spent.
    """
    cols = np.array(members, dtype=int)
    x_local = x[cols]
    counter = {"evals": 0}
    memo: dict[int, float] = {}

    if isinstance(variant, BaselineVariant):
        z_local = variant.z[cols]

        def local_cost(u: SubsetMask) -> float:
            hit = memo.get(u.bits)
            if hit is not None:
                return hit
            keep = u.to_bool_array()
            value = float(f_v(np.where(keep, x_local, z_local)))
            counter["evals"] += 1
            memo[u.bits] = value
            return value

    else:
        bg_local = variant.background[:, cols]

        def local_cost(u: SubsetMask) -> float:
            hit = memo.get(u.bits)
            if hit is not None:
                return hit
            keep = u.to_bool_array()
            mixed = np.where(keep[None, :], x_local[None, :], bg_local)
            value = float(np.mean([f_v(row) for row in mixed]))
            counter["evals"] += bg_local.shape[0]
            memo[u.bits] = value
            return value

    return local_cost, lambda: counter["evals"]


def shap_from_decomposition(
    model: StructuredModel,
    ctx: CostContext,
    component_limit: int = 15,
) -> Attribution:
    """Exact Shapley values of a component sum, one component at a time.

    Each component's Shapley values are computed by full enumeration over
    its |v| local features (the subset weights use |v|, not p: coalitions
    that agree inside v share one gradient, and their full-space weights
    collapse to the local ones).  Per-feature results are summed in the
    model's fixed component order.
    """
    p = model.p
    phi = np.zeros(p)
    evals = 0
    for v, f_v in model.components:
        members = v.indices()
        k = len(members)
        if k > component_limit:
            raise ValueError(
                f"component over {members} has {k} features, exceeding the limit {component_limit}"
            )
        if k == 0:
            continue
        local_cost, spent = _local_cost_fn(f_v, members, ctx.x, ctx.variant)
        local_phi = exact_subsets_phi(local_cost, k)
        for local_i, global_i in enumerate(members):
            phi[global_i] += local_phi[local_i]
        evals += spent()
    return Attribution(phi, method="decomposition", eval_count=evals)


def shap_orthogonal_fanova(model: StructuredModel, x: np.ndarray) -> Attribution:
    """Even-split shortcut for hierarchically orthogonal decompositions.

    Valid when the caller asserts the decomposition is orthogonal under an
    independent feature distribution and the cost is the background-average
    kind over that distribution; then every lower coalition cost of a
    component vanishes and phi_i is the sum of f_v(x_v) / |v| over the
    components containing i.  Orthogonality is not verified here.
    """
    vec = as_feature_vector(x, model.p)
    phi = np.zeros(model.p)
    evals = 0
    for v, f_v in model.components:
        members = v.indices()
        if not members:
            continue
        share = float(f_v(vec[list(members)])) / len(members)
        evals += 1
        for i in members:
            phi[i] += share
    return Attribution(phi, method="orthogonal_fanova", eval_count=evals)
