"""Attribution result container."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Attribution"]


@dataclass(frozen=True)
class Attribution:
    """Per-feature attribution values plus method metadata.

    ``eval_count`` is the number of underlying model evaluations the method
    consumed (background rows counted individually).  ``order_used`` and
    ``converged`` are populated by the order-limited and iterative methods
    and left as None elsewhere.
    """

    phi: np.ndarray
    method: str
    eval_count: int
    order_used: int | None = None
    converged: bool | None = None

    def __post_init__(self) -> None:
        phi = np.asarray(self.phi, dtype=np.float64)
        if phi.ndim != 1:
            raise ValueError(f"phi must be one-dimensional, got shape {phi.shape}")
        if not np.all(np.isfinite(phi)):
            raise ValueError("phi contains non-finite entries")
        object.__setattr__(self, "phi", phi)

    @property
    def p(self) -> int:
        return self.phi.shape[0]
