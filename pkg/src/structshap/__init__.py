"""Exact Shapley-value attribution in polynomial time by exploiting model
structure: known functional decomposition, known interaction order, or an
iteratively estimated order.  Includes a brute-force oracle and a
permutation-sampling baseline for validation and benchmarking.
"""

from .attribution import Attribution
from .batch import (
    BatchCostCache,
    BatchIterativeResult,
    BatchResult,
    iterative_scan,
    shap_exact_subsets_batch,
    shap_from_decomposition_batch,
    shap_order_k_batch,
    shap_sampling_batch,
)
from .costs import (
    AssumptionReport,
    BaselineVariant,
    CostContext,
    KernelVariant,
    baseline_context,
    check_assumption1,
    kernel_context,
)
from .decomposition import shap_from_decomposition, shap_orthogonal_fanova
from .models import (
    BlackBoxModel,
    Model,
    ModelSpecError,
    PolynomialModel,
    StructuredModel,
    as_feature_vector,
    decompose_polynomial,
    evaluate,
    model_order,
    parse_model_spec,
    serialize_model_spec,
)
from .oracle import (
    sampling_std_order2,
    shap_exact_permutations,
    shap_exact_subsets,
    shap_sampling,
)
from .orderk import (
    CoefficientReport,
    IterativeResult,
    OrderKCoefficients,
    convergence_metric,
    order_sequence,
    shap_iterative,
    shap_order_k,
    solve_coefficients,
    verify_coefficients,
)
from .subsets import SubsetMask, all_subsets, subsets_of_size

__version__ = "0.1.0"

__all__ = [
    "Attribution",
    "AssumptionReport",
    "BaselineVariant",
    "BatchCostCache",
    "BatchIterativeResult",
    "BatchResult",
    "BlackBoxModel",
    "CoefficientReport",
    "CostContext",
    "IterativeResult",
    "KernelVariant",
    "Model",
    "ModelSpecError",
    "OrderKCoefficients",
    "PolynomialModel",
    "StructuredModel",
    "SubsetMask",
    "all_subsets",
    "as_feature_vector",
    "baseline_context",
    "check_assumption1",
    "convergence_metric",
    "decompose_polynomial",
    "evaluate",
    "iterative_scan",
    "kernel_context",
    "model_order",
    "order_sequence",
    "parse_model_spec",
    "sampling_std_order2",
    "serialize_model_spec",
    "shap_exact_permutations",
    "shap_exact_subsets",
    "shap_exact_subsets_batch",
    "shap_from_decomposition",
    "shap_from_decomposition_batch",
    "shap_iterative",
    "shap_order_k",
    "shap_order_k_batch",
    "shap_orthogonal_fanova",
    "shap_sampling",
    "shap_sampling_batch",
    "solve_coefficients",
    "subsets_of_size",
    "verify_coefficients",
]
