"""Benchmark harness: reference models, datasets, baselines, and the three
experiment drivers (accuracy, convergence, timing).

The bundled reference models are low-order polynomials over i.i.d. standard
normal features: an order-2 model (all main effects plus four disjoint
pairs), an order-4 model (adding two four-way products over the same
features), and an order-6 model (further adding a six-way product with a
configurable coefficient).  Main effects extend to all p features when
p > 10; the interaction index pattern is fixed, which is why p >= 10 is
required.

Every experiment is deterministic given the config seed; wall-clock
columns are the only nondeterministic output.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace
from math import sqrt
from typing import Sequence

import numpy as np

from .batch import (
    iterative_scan,
    shap_exact_subsets_batch,
    shap_from_decomposition_batch,
    shap_order_k_batch,
    shap_sampling_batch,
)
from .costs import BaselineVariant
from .models import PolynomialModel, model_order
from .orderk import convergence_metric

__all__ = [
    "MethodSpec",
    "ExperimentConfig",
    "build_reference_model",
    "interacting_features",
    "generate_dataset",
    "make_baseline",
    "run_accuracy_experiment",
    "run_convergence_experiment",
    "run_timing_experiment",
    "ACCURACY_FIELDS",
    "CONVERGENCE_FIELDS",
    "TIMING_FIELDS",
]

_MODEL_IDS = ("order2", "order4", "order6")
_BASELINE_KINDS = ("mean", "p975")

_PAIRS = ((0, 1), (2, 3), (4, 5), (6, 7))
_QUADS = ((0, 1, 2, 3), (4, 5, 6, 7))
_SIX = (0, 1, 2, 3, 4, 5)


def build_reference_model(model_id: str, alpha: float | None, p: int) -> PolynomialModel:
    """Construct one of the bundled reference models with p >= 10 features."""
    if model_id not in _MODEL_IDS:
        raise ValueError(f"unknown model id {model_id!r}, expected one of {_MODEL_IDS}")
    if p < 10:
        raise ValueError(f"reference models need p >= 10 (interaction indices are fixed), got {p}")
    terms: list[tuple[float, Sequence[int]]] = [(1.0, [j]) for j in range(p)]
    terms += [(1.0, list(pair)) for pair in _PAIRS]
    if model_id in ("order4", "order6"):
        terms += [(1.0, list(quad)) for quad in _QUADS]
    if model_id == "order6":
        if alpha is None:
            raise ValueError("order6 needs the six-way coefficient alpha")
        if alpha <= 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        terms.append((float(alpha), list(_SIX)))
    return PolynomialModel(p, terms)


def interacting_features(model: PolynomialModel) -> np.ndarray:
    """Boolean mask of features that appear in at least one interaction term."""
    mask = np.zeros(model.p, dtype=bool)
    for _, variables in model.terms:
        if len(variables) >= 2:
            for j in variables:
                mask[j] = True
    return mask


def generate_dataset(p: int, n: int, seed: int) -> np.ndarray:
    """n x p i.i.d. standard normal draws, reproducible per seed."""
    if n < 1:
        raise ValueError(f"need at least one instance, got n={n}")
    return np.random.default_rng(seed).standard_normal((n, p))


def make_baseline(dataset: np.ndarray, kind: str) -> np.ndarray:
    """Per-column mean, or per-column empirical 97.5th percentile.

    The percentile uses linear interpolation between closest order
    statistics (numpy's default).
    """
    data = np.atleast_2d(np.asarray(dataset, dtype=np.float64))
    if data.shape[0] == 0:
        raise ValueError("dataset is empty")
    if kind == "mean":
        return data.mean(axis=0)
    if kind == "p975":
        return np.percentile(data, 97.5, axis=0)
    raise ValueError(f"unknown baseline kind {kind!r}, expected one of {_BASELINE_KINDS}")


@dataclass(frozen=True)
class MethodSpec:
    """One attribution method plus its parameters, as named on the CLI."""

    name: str  # fdcmp | orderk | iterative | sampling | exact
    order: int | None = None
    samples: int | None = None
    seed: int | None = None
    max_order: int | None = None
    threshold: float | None = None

    def label(self) -> str:
        if self.name == "sampling":
            return f"sampling-{self.samples}"
        if self.name == "orderk":
            return f"orderk-{self.order}" if self.order else "orderk"
        return self.name

    @classmethod
    def from_dict(cls, doc: dict) -> "MethodSpec":
        known = {"name", "order", "samples", "seed", "max_order", "threshold"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown method fields: {sorted(unknown)}")
        name = doc.get("name")
        if name not in ("fdcmp", "orderk", "iterative", "sampling", "exact"):
            raise ValueError(f"unknown method name {name!r}")
        spec = cls(
            name=name,
            order=doc.get("order"),
            samples=doc.get("samples"),
            seed=doc.get("seed"),
            max_order=doc.get("max_order"),
            threshold=doc.get("threshold"),
        )
        if name == "sampling" and (spec.samples is None or spec.samples < 1):
            raise ValueError("sampling needs a positive 'samples' count")
        return spec


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration mirrored by the bench CLI's JSON config files."""

    model_id: str
    p: int
    n_instances: int
    baseline_kind: str
    methods: tuple[MethodSpec, ...]
    alpha: float | None = None
    seed: int = 0
    out_dir: str | None = None

    def __post_init__(self) -> None:
        if self.model_id not in _MODEL_IDS:
            raise ValueError(f"unknown model id {self.model_id!r}")
        if self.baseline_kind not in _BASELINE_KINDS:
            raise ValueError(f"unknown baseline kind {self.baseline_kind!r}")
        if self.n_instances < 1:
            raise ValueError("n_instances must be at least 1")
        if self.p < 10:
            raise ValueError("reference models need p >= 10")
        if self.model_id == "order6" and self.alpha is None:
            raise ValueError("order6 needs alpha")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        doc = json.loads(text)
        known = {"model", "alpha", "p", "n_instances", "baseline", "methods", "seed", "out_dir"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        methods = tuple(MethodSpec.from_dict(m) for m in doc.get("methods", []))
        return cls(
            model_id=doc.get("model", ""),
            p=int(doc.get("p", 10)),
            n_instances=int(doc.get("n_instances", 1)),
            baseline_kind=doc.get("baseline", "mean"),
            methods=methods,
            alpha=doc.get("alpha"),
            seed=int(doc.get("seed", 0)),
            out_dir=doc.get("out_dir"),
        )

    def build(self) -> tuple[PolynomialModel, np.ndarray, BaselineVariant]:
        model = build_reference_model(self.model_id, self.alpha, self.p)
        data = generate_dataset(self.p, self.n_instances, self.seed)
        z = make_baseline(data, self.baseline_kind)
        return model, data, BaselineVariant(z)


def _resolve_order(method: MethodSpec, model: PolynomialModel) -> MethodSpec:
    """Fill in the model's true order for order-limited runs left open."""
    if method.name == "orderk" and method.order is None:
        return replace(method, order=model_order(model))
    return method


def _run_method(model: PolynomialModel, data: np.ndarray, variant: BaselineVariant, method: MethodSpec):
    if method.name == "fdcmp":
        return shap_from_decomposition_batch(model, data, variant)
    if method.name == "orderk":
        order = method.order if method.order is not None else model_order(model)
        return shap_order_k_batch(model, data, variant, order)
    if method.name == "iterative":
        return iterative_scan(
            model,
            data,
            variant,
            max_order=method.max_order if method.max_order is not None else 10,
            threshold=method.threshold if method.threshold is not None else 1e-4,
        )
    if method.name == "sampling":
        return shap_sampling_batch(
            model, data, variant, m=method.samples, seed=method.seed if method.seed is not None else 0
        )
    if method.name == "exact":
        return shap_exact_subsets_batch(model, data, variant)
    raise ValueError(f"unknown method {method.name!r}")


ACCURACY_FIELDS = (
    "instance",
    "feature",
    "method",
    "baseline_kind",
    "true_phi",
    "estimated_phi",
    "interacting",
)


def run_accuracy_experiment(config: ExperimentConfig) -> list[dict]:
    """Per-(instance, feature, method) rows of estimated vs true attribution.

    The true values come from the decomposition path, which is exact for
    the reference models at any p.  Rows carry an ``interacting`` flag so
    figure-style views can drop the pure main-effect features (whose
    sampled values are exact by construction); the raw rows keep every
    feature.
    """
    model, data, variant = config.build()
    truth = shap_from_decomposition_batch(model, data, variant).phi
    interacting = interacting_features(model)
    rows: list[dict] = []
    for method in config.methods:
        method = _resolve_order(method, model)
        result = _run_method(model, data, variant, method)
        label = method.label()
        estimate = result.phi
        for idx in range(data.shape[0]):
            for j in range(model.p):
                rows.append(
                    {
                        "instance": idx,
                        "feature": j,
                        "method": label,
                        "baseline_kind": config.baseline_kind,
                        "true_phi": float(truth[idx, j]),
                        "estimated_phi": float(estimate[idx, j]),
                        "interacting": int(interacting[j]),
                    }
                )
    return rows


CONVERGENCE_FIELDS = ("alpha", "baseline_kind", "order", "rel_diff_vs_true")


def run_convergence_experiment(config: ExperimentConfig, orders: Sequence[int] = (2, 4, 6, 8)) -> list[dict]:
    """Normalized difference between order-limited and true attributions.

    Requires an order-6 model config; reuses the convergence metric with
    the true attribution matrix as the reference side.
    """
    if config.model_id != "order6":
        raise ValueError("convergence experiment expects an order6 model config")
    model, data, variant = config.build()
    truth = shap_from_decomposition_batch(model, data, variant).phi
    rows: list[dict] = []
    sums_cache: dict[int, tuple] = {}
    for order in orders:
        result = shap_order_k_batch(model, data, variant, order, sums_cache=sums_cache)
        diff = convergence_metric(result.phi, truth)
        rows.append(
            {
                "alpha": float(config.alpha),
                "baseline_kind": config.baseline_kind,
                "order": order,
                "rel_diff_vs_true": float(diff),
            }
        )
    return rows


TIMING_FIELDS = (
    "method",
    "model_id",
    "alpha",
    "p",
    "n_instances",
    "baseline_kind",
    "wall_seconds",
    "eval_count",
    "eval_count_per_instance",
    "work_units",
    "distinct_costs",
    "order_used",
    "converged",
)


def run_timing_experiment(config: ExperimentConfig) -> list[dict]:
    """Wall-clock and work accounting per method on one model config.

    Runs single-threaded.  ``eval_count`` counts underlying function
    invocations (components count like any other function); ``work_units``
    weights each invocation by the term count of the function evaluated, a
    hardware-independent measure of arithmetic work under which the
    decomposition method's advantage is visible even against the very cheap
    low-order formulas.  Wall-clock is informative only.
    """
    model, data, variant = config.build()
    n_terms = len(model.terms)
    rows: list[dict] = []
    for method in config.methods:
        method = _resolve_order(method, model)
        start = time.perf_counter()
        result = _run_method(model, data, variant, method)
        elapsed = time.perf_counter() - start
        terms_per_eval = 1 if method.name == "fdcmp" else n_terms
        rows.append(
            {
                "method": method.label(),
                "model_id": config.model_id,
                "alpha": "" if config.alpha is None else float(config.alpha),
                "p": config.p,
                "n_instances": config.n_instances,
                "baseline_kind": config.baseline_kind,
                "wall_seconds": float(elapsed),
                "eval_count": result.eval_count,
                "eval_count_per_instance": result.eval_count / data.shape[0],
                "work_units": result.eval_count * terms_per_eval,
                "distinct_costs": result.distinct_costs,
                "order_used": "" if result.order_used is None else result.order_used,
                "converged": "" if result.converged is None else int(result.converged),
            }
        )
    return rows


def rmse(rows: Sequence[dict], method: str, interacting_only: bool = True) -> float:
    """Root-mean-square error of one method's rows from an accuracy run."""
    errors = [
        (row["estimated_phi"] - row["true_phi"]) ** 2
        for row in rows
        if row["method"] == method and (not interacting_only or row["interacting"])
    ]
    if not errors:
        raise ValueError(f"no rows for method {method!r}")
    return sqrt(float(np.mean(errors)))
