"""Shared attribution kernels.

Everything here is generic over the cost callable: it may return a plain
float (one instance) or an (n,) array (a whole dataset evaluated at once),
and the accumulation code broadcasts either way.  Public wrappers live in
:mod:`structshap.oracle`, :mod:`structshap.orderk` and
:mod:`structshap.batch`.

The enumeration-based kernels visit every subset exactly once, streaming
costs into per-size sums instead of retaining them:

    T_s    = sum of c(S) over all subsets S with |S| = s
    G_s[i] = sum of c(S) over those S that contain feature i

Both the full enumeration formula and the order-limited formula are linear
in these sums, so no subset value is needed twice.
"""

from __future__ import annotations

from math import comb
from typing import Callable

import numpy as np

from .subsets import SubsetMask, subsets_of_size

CostFn = Callable[[SubsetMask], "float | np.ndarray"]


def shapley_weight_table(p: int) -> np.ndarray:
    """Subset weights w[s] = s!(p-s-1)!/p! = 1/(p*C(p-1,s)) for s=0..p-1.

    Computed through exact integer binomials, so each entry is correct to
    one rounding of the final division even for large p.
    """
    return np.array([1.0 / (p * comb(p - 1, s)) for s in range(p)])


def size_sums(
    cost: CostFn,
    p: int,
    sizes: "list[int] | set[int]",
    cache: dict[int, tuple] | None = None,
) -> dict[int, tuple]:
    """Per-size cost sums: cache[s] = (G_s, T_s) with G_s[i] the sum of c(S)
    over size-s coalitions containing i, and T_s the sum over all of them.

    Each missing size is enumerated exactly once; ``cache`` (if given) is
    extended in place so repeated calls never revisit a size.
    """
    out = cache if cache is not None else {}
    for s in sorted(set(sizes)):
        if s in out:
            continue
        g_s = None
        t_s = None
        for mask in subsets_of_size(p, s):
            c = cost(mask)
            if g_s is None:
                g_s = np.zeros((p,) + np.shape(c))
                t_s = np.zeros(np.shape(c)) if np.shape(c) else 0.0
            t_s = t_s + c
            for i in mask:
                g_s[i] += c
        out[s] = (g_s, t_s)
    return out


def exact_subsets_phi(cost: CostFn, p: int) -> np.ndarray:
    """Full-enumeration Shapley values over all 2^p coalitions.

    phi[i] = sum over coalitions u not containing i of
             w[|u|] * (c(u + i) - c(u)).
    Walks coalition sizes upward keeping two layers of cost values, so each
    coalition is evaluated once and every gradient is formed as an explicit
    pairwise difference -- a feature the model never touches cancels
    exactly, giving a bit-exact zero attribution.
    """
    if p == 0:
        return np.zeros(0)
    w = shapley_weight_table(p)
    base = cost(SubsetMask.empty(p))
    phi = np.zeros((p,) + np.shape(base))
    layer: dict[int, "float | np.ndarray"] = {0: base}
    for s in range(p):
        next_layer = {mask.bits: cost(mask) for mask in subsets_of_size(p, s + 1)}
        for u in subsets_of_size(p, s):
            c_u = layer[u.bits]
            for i in range(p):
                if not u.contains(i):
                    phi[i] += w[s] * (next_layer[u.bits | (1 << i)] - c_u)
        layer = next_layer
    return phi


def order_k_needed_js(p: int, q: int) -> list[int]:
    """Gradient-anchor cardinalities used by the order-limited formula."""
    return list(range(q + 1)) + [p - 1 - m for m in range(q, -1, -1)]


def order_k_anchor_count(p: int, q: int) -> int:
    """Per-feature count of coalition gradients the formula averages over."""
    return 2 * sum(comb(p - 1, m) for m in range(q + 1))


def order_k_distinct_args(p: int, q: int) -> int:
    """Distinct coalitions the cost function is evaluated at (all features)."""
    sizes = set()
    for j in order_k_needed_js(p, q):
        sizes.add(j)
        sizes.add(j + 1)
    return sum(comb(p, s) for s in sizes)


def averaged_gradients(
    cost: CostFn,
    p: int,
    js: list[int],
    sums_cache: dict[int, tuple] | None = None,
) -> dict[int, np.ndarray]:
    """Per-feature average gradient over all coalitions of each size in js.

    d[j][i] = mean over u with |u| = j, i not in u, of (c(u + i) - c(u)).
    A coalition of size s+1 enters d_s positively through each member and a
    coalition of size s enters negatively through each non-member, so d_j
    assembles from the per-size sums of sizes j and j+1.
    """
    sums = size_sums(cost, p, {s for j in js for s in (j, j + 1)}, sums_cache)
    d: dict[int, np.ndarray] = {}
    for j in js:
        g_j, t_j = sums[j]
        g_next, _ = sums[j + 1]
        d[j] = (g_next - (t_j - g_j)) / comb(p - 1, j)
    return d


def order_k_phi(
    cost: CostFn,
    p: int,
    q: int,
    a: np.ndarray,
    sums_cache: dict[int, tuple] | None = None,
) -> np.ndarray:
    """Order-limited Shapley formula: phi = sum_m a[m] * (d_m + d_{p-m-1}).

    The low-cardinality averages d_0..d_q and their high-cardinality
    counterparts d_{p-q-1}..d_{p-1} are the only gradient information used;
    both tails must be disjoint, i.e. 2(q+1) <= p (callers enforce this).
    A shared ``sums_cache`` lets repeated calls at rising q pay only for the
    coalition sizes they add.
    """
    js = order_k_needed_js(p, q)
    d = averaged_gradients(cost, p, js, sums_cache)
    phi = np.zeros_like(d[0])
    for m in range(q + 1):
        phi += a[m] * (d[m] + d[p - 1 - m])
    return phi
