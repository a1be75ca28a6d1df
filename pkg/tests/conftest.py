import numpy as np
import pytest

from structshap import PolynomialModel


def random_polynomial(
    rng: np.random.Generator,
    p: int,
    max_term_size: int,
    n_terms: int | None = None,
    coef_low: float = -2.0,
    coef_high: float = 2.0,
) -> PolynomialModel:
    """Random term-sum model with at least one term of the maximal size.

    Guaranteeing one maximal term pins the model order, which the order-K
    tests rely on.
    """
    max_term_size = min(max_term_size, p)
    if n_terms is None:
        n_terms = int(rng.integers(2, 7))
    terms: list[tuple[float, list[int]]] = []
    for t in range(n_terms):
        size = max_term_size if t == 0 else int(rng.integers(1, max_term_size + 1))
        variables = sorted(rng.choice(p, size=size, replace=False).tolist())
        coef = float(rng.uniform(coef_low, coef_high))
        if coef == 0.0:
            coef = 1.0
        terms.append((coef, variables))
    return PolynomialModel(p, terms)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
