"""A compact run of the benchmark harness.

Compares the decomposition route, the order-limited formula, the iterative
driver, and permutation sampling on the bundled order-6 reference model:
estimation error for the sampled methods and work accounting for all.
"""

from structshap.bench import (
    ExperimentConfig,
    MethodSpec,
    rmse,
    run_accuracy_experiment,
    run_timing_experiment,
)

config = ExperimentConfig(
    model_id="order6",
    alpha=1.0,
    p=10,
    n_instances=1000,
    baseline_kind="mean",
    methods=(
        MethodSpec("fdcmp"),
        MethodSpec("orderk"),
        MethodSpec("iterative", max_order=10, threshold=1e-4),
        MethodSpec("sampling", samples=25, seed=0),
        MethodSpec("sampling", samples=100, seed=0),
    ),
    seed=7,
)

rows = run_accuracy_experiment(config)
print("estimation error on interacting features (RMSE):")
for method in ("sampling-25", "sampling-100", "orderk-6", "fdcmp"):
    print(f"  {method:>12}: {rmse(rows, method):.6f}")

print("\nwork accounting (per instance):")
timing = run_timing_experiment(config)
header = f"  {'method':>12} {'evals':>8} {'work':>10} {'seconds':>8}"
print(header)
for row in timing:
    print(
        f"  {row['method']:>12} {row['eval_count_per_instance']:>8.0f} "
        f"{row['work_units'] / config.n_instances:>10.0f} {row['wall_seconds']:>8.3f}"
    )
