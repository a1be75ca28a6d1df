import numpy as np
import pytest

from structshap import (
    BaselineVariant,
    KernelVariant,
    baseline_context,
    decompose_polynomial,
    iterative_scan,
    kernel_context,
    shap_exact_subsets,
    shap_exact_subsets_batch,
    shap_from_decomposition,
    shap_from_decomposition_batch,
    shap_iterative,
    shap_order_k,
    shap_order_k_batch,
    shap_sampling_batch,
)

from conftest import random_polynomial


@pytest.fixture
def setup(rng):
    p = 8
    model = random_polynomial(rng, p, max_term_size=4)
    rows = rng.normal(size=(30, p))
    z = rng.normal(size=p)
    background = rng.normal(size=(5, p))
    return model, rows, z, background


def test_exact_batch_matches_scalar(setup):
    model, rows, z, background = setup
    for variant, make_ctx in (
        (BaselineVariant(z), lambda row: baseline_context(model, row, z)),
        (KernelVariant(background), lambda row: kernel_context(model, row, background)),
    ):
        batch = shap_exact_subsets_batch(model, rows, variant)
        scalar = np.vstack([shap_exact_subsets(make_ctx(row)).phi for row in rows])
        np.testing.assert_allclose(batch.phi, scalar, atol=1e-12)
        assert batch.distinct_costs == 2**model.p


def test_order_k_batch_matches_scalar(setup):
    model, rows, z, background = setup
    for variant, make_ctx in (
        (BaselineVariant(z), lambda row: baseline_context(model, row, z)),
        (KernelVariant(background), lambda row: kernel_context(model, row, background)),
    ):
        for K in (1, 2, 3, 4):
            batch = shap_order_k_batch(model, rows, variant, K)
            scalar = np.vstack([shap_order_k(make_ctx(row), K).phi for row in rows])
            np.testing.assert_allclose(batch.phi, scalar, atol=1e-12)


def test_decomposition_batch_matches_scalar(setup):
    model, rows, z, background = setup
    structured = decompose_polynomial(model)
    for variant, make_ctx in (
        (BaselineVariant(z), lambda row: baseline_context(model, row, z)),
        (KernelVariant(background), lambda row: kernel_context(model, row, background)),
    ):
        batch = shap_from_decomposition_batch(model, rows, variant)
        scalar = np.vstack([shap_from_decomposition(structured, make_ctx(row)).phi for row in rows])
        np.testing.assert_allclose(batch.phi, scalar, atol=1e-10)


def test_decomposition_batch_structured_fallback(setup, rng):
    model, rows, z, _ = setup
    structured = decompose_polynomial(model)
    fast = shap_from_decomposition_batch(model, rows, BaselineVariant(z))
    slow = shap_from_decomposition_batch(structured, rows, BaselineVariant(z))
    np.testing.assert_allclose(fast.phi, slow.phi, atol=1e-10)


def test_sampling_batch_deterministic_and_bounded(setup):
    model, rows, z, _ = setup
    variant = BaselineVariant(z)
    a = shap_sampling_batch(model, rows, variant, m=12, seed=3)
    b = shap_sampling_batch(model, rows, variant, m=12, seed=3)
    np.testing.assert_array_equal(a.phi, b.phi)
    assert a.eval_count <= 12 * (model.p + 1) * rows.shape[0]


def test_sampling_batch_additive_exact(rng):
    p = 6
    from structshap import PolynomialModel

    model = PolynomialModel(p, [(1.0, [j]) for j in range(p)])
    rows = rng.normal(size=(12, p))
    z = rng.normal(size=p)
    result = shap_sampling_batch(model, rows, BaselineVariant(z), m=3, seed=0)
    np.testing.assert_allclose(result.phi, rows - z, atol=1e-12)


def test_iterative_scan_matches_scalar_driver(setup):
    model, rows, z, _ = setup
    variant = BaselineVariant(z)
    batch = iterative_scan(model, rows, variant, max_order=8, threshold=1e-4)
    scalar = shap_iterative(
        lambda row: baseline_context(model, row, z), rows, max_order=8, threshold=1e-4
    )
    assert batch.order_used == scalar.order_used
    assert batch.converged == scalar.converged
    np.testing.assert_allclose(batch.phi, scalar.phi, atol=1e-12)
    for (k1, d1), (k2, d2) in zip(batch.history, scalar.history):
        assert k1 == k2
        assert d1 == pytest.approx(d2, rel=1e-9, abs=1e-15)


def test_iterative_scan_reuses_gradients_across_orders(setup):
    model, rows, z, _ = setup
    variant = BaselineVariant(z)
    scan = iterative_scan(model, rows, variant, max_order=8, threshold=1e-12)
    # total fresh evaluations equal one run at the highest order reached
    direct = shap_order_k_batch(model, rows, variant, scan.order_used)
    assert scan.eval_count == direct.eval_count
