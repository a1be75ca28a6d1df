"""Command-line interface.

Subcommands:

  explain   model spec (or callback protocol) + data CSV -> attribution CSV
  bench     accuracy | convergence | timing experiment from a JSON config
  plot      render an experiment CSV to an image (needs matplotlib)
  coeffs    solve | verify the order-limited combination weights (JSON io)
  model     parse: validate a model spec and print its canonical form

The ``--callback-stdio`` mode of ``explain`` serves black-box models owned
by another process: the engine writes one JSON request per line to stdout
({"id": n, "op": "eval", "x": [[...], ...]}) and expects one JSON reply per
line on stdin ({"id": n, "y": [...]} or {"id": n, "error": "..."}).  On
success it finishes with {"op": "done", ...}; a callback error aborts with
{"op": "error", ...} and exit code 3, leaving no output file behind.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .batch import (
    iterative_scan,
    shap_exact_subsets_batch,
    shap_from_decomposition_batch,
    shap_order_k_batch,
    shap_sampling_batch,
)
from .bench import (
    ACCURACY_FIELDS,
    CONVERGENCE_FIELDS,
    TIMING_FIELDS,
    ExperimentConfig,
    run_accuracy_experiment,
    run_convergence_experiment,
    run_timing_experiment,
)
from .costs import BaselineVariant, KernelVariant
from .dataio import read_matrix_csv, read_vector_csv, write_attribution_csv, write_rows_csv
from .models import (
    BlackBoxModel,
    ModelSpecError,
    model_order,
    parse_model_spec,
    serialize_model_spec,
)
from .orderk import OrderKCoefficients, solve_coefficients, verify_coefficients

_METHODS = ("fdcmp", "orderk", "iterative", "sampling", "exact")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="structshap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("explain", help="attribute a dataset under one model and method")
    ex.add_argument("--model", help="model-spec JSON file")
    ex.add_argument("--callback-stdio", action="store_true", help="serve a remote black-box model over stdio")
    ex.add_argument("--p", type=int, help="feature count (callback mode only)")
    ex.add_argument("--declared-order", type=int, help="order bound of the callback model")
    ex.add_argument("--data", required=True, help="dataset CSV (one row per instance)")
    ex.add_argument("--baseline", default="mean", help="mean | p975 | path to a baseline vector CSV")
    ex.add_argument("--cost", choices=("baseline", "kernel"), default="baseline")
    ex.add_argument("--background", help="background dataset CSV (kernel cost)")
    ex.add_argument("--method", required=True, choices=_METHODS)
    ex.add_argument("--order", type=int, help="interaction order for the orderk method")
    ex.add_argument("--samples", type=int, default=25, help="sampled orderings (sampling method)")
    ex.add_argument("--seed", type=int, default=0)
    ex.add_argument("--threshold", type=float, default=1e-4, help="iterative convergence threshold")
    ex.add_argument("--max-order", type=int, default=10, help="iterative order cap")
    ex.add_argument("--out", required=True, help="attribution CSV to write")
    ex.add_argument("--stats-out", help="optional JSON sidecar with eval_count and run metadata")

    be = sub.add_parser("bench", help="run a benchmark experiment from a JSON config")
    be.add_argument("kind", choices=("accuracy", "convergence", "timing"))
    be.add_argument("--config", required=True, help="JSON config file")
    be.add_argument("--out", help="output CSV (default: <kind>.csv under the config's out_dir)")

    pl = sub.add_parser("plot", help="render an experiment CSV to an image")
    pl.add_argument("kind", choices=("accuracy", "convergence", "timing"))
    pl.add_argument("--csv", required=True)
    pl.add_argument("--out", required=True, help="image path (.png, .svg, ...)")

    co = sub.add_parser("coeffs", help="solve or verify order-limited combination weights")
    co_sub = co.add_subparsers(dest="coeffs_command", required=True)
    solve = co_sub.add_parser("solve")
    solve.add_argument("--p", type=int, required=True)
    solve.add_argument("--order", type=int, required=True)
    solve.add_argument("--out", help="write the solution JSON here instead of stdout")
    verify = co_sub.add_parser("verify")
    verify.add_argument("--file", required=True, help="solution JSON produced by 'coeffs solve'")

    mo = sub.add_parser("model", help="model-spec utilities")
    mo_sub = mo.add_subparsers(dest="model_command", required=True)
    parse = mo_sub.add_parser("parse", help="validate a model spec, print canonical form")
    parse.add_argument("--model", required=True)
    parse.add_argument("--out", help="write the canonical spec here instead of stdout")

    return parser


def _load_variant(args, p: int, data: np.ndarray):
    if args.cost == "kernel":
        if not args.background:
            raise SystemExit("--cost kernel needs --background")
        background = read_matrix_csv(args.background)
        if background.shape[1] != p:
            raise SystemExit(f"background has {background.shape[1]} columns, expected {p}")
        return KernelVariant(background)
    if args.baseline == "mean":
        z = data.mean(axis=0)
    elif args.baseline == "p975":
        z = np.percentile(data, 97.5, axis=0)
    else:
        z = read_vector_csv(args.baseline, p)
    return BaselineVariant(z)


class _CallbackAborted(RuntimeError):
    pass


class _StdioModelServer:
    """Black-box model whose evaluations are answered by the parent process."""

    def __init__(self, p: int, stdin, stdout):
        self.p = p
        self._stdin = stdin
        self._stdout = stdout
        self._next_id = 0

    def evaluate_batch(self, rows: np.ndarray) -> np.ndarray:
        request_id = self._next_id
        self._next_id += 1
        request = {"id": request_id, "op": "eval", "x": np.asarray(rows, dtype=float).tolist()}
        self._stdout.write(json.dumps(request) + "\n")
        self._stdout.flush()
        line = self._stdin.readline()
        if not line:
            raise _CallbackAborted("callback host closed the stream")
        reply = json.loads(line)
        if reply.get("id") != request_id:
            raise _CallbackAborted(f"out-of-order reply id {reply.get('id')!r}")
        if "error" in reply:
            raise _CallbackAborted(str(reply["error"]))
        values = np.asarray(reply["y"], dtype=np.float64)
        if values.shape != (rows.shape[0],):
            raise _CallbackAborted(f"callback returned {values.shape[0]} values for {rows.shape[0]} rows")
        return values

    def evaluate(self, x: np.ndarray) -> float:
        return float(self.evaluate_batch(np.asarray(x, dtype=float)[None, :])[0])


def _cmd_explain(args) -> int:
    data = read_matrix_csv(args.data)
    stdio_server = None
    if args.callback_stdio:
        if args.p is None:
            raise SystemExit("--callback-stdio needs --p")
        stdio_server = _StdioModelServer(args.p, sys.stdin, sys.stdout)
        model = BlackBoxModel(
            args.p,
            stdio_server.evaluate,
            declared_order=args.declared_order,
            batch_evaluator=stdio_server.evaluate_batch,
        )
        poly = None
    else:
        if not args.model:
            raise SystemExit("explain needs --model or --callback-stdio")
        try:
            poly = parse_model_spec(Path(args.model).read_text())
        except ModelSpecError as exc:
            raise SystemExit(f"bad model spec: {exc}")
        model = poly
    p = model.p
    if data.shape[1] != p:
        raise SystemExit(f"data has {data.shape[1]} columns, model expects {p}")
    variant = _load_variant(args, p, data)

    order_used: int | None = None
    converged: bool | None = None
    try:
        if args.method == "fdcmp":
            if poly is None:
                raise SystemExit("fdcmp needs a transparent model spec, not a callback")
            result = shap_from_decomposition_batch(poly, data, variant)
            phi = result.phi
        elif args.method == "orderk":
            order = args.order
            if order is None:
                if poly is not None:
                    order = model_order(poly)
                elif args.declared_order is not None:
                    order = args.declared_order
                else:
                    raise SystemExit("orderk needs --order (or --declared-order in callback mode)")
            result = shap_order_k_batch(model, data, variant, order)
            phi, order_used = result.phi, order
        elif args.method == "iterative":
            result = iterative_scan(
                model, data, variant, max_order=args.max_order, threshold=args.threshold
            )
            phi, order_used, converged = result.phi, result.order_used, result.converged
        elif args.method == "sampling":
            result = shap_sampling_batch(model, data, variant, m=args.samples, seed=args.seed)
            phi = result.phi
        else:
            result = shap_exact_subsets_batch(model, data, variant)
            phi = result.phi
    except _CallbackAborted as exc:
        sys.stdout.write(json.dumps({"op": "error", "message": str(exc)}) + "\n")
        sys.stdout.flush()
        return 3

    write_attribution_csv(args.out, phi, order_used=order_used, converged=converged)
    if args.stats_out:
        stats = {
            "eval_count": int(result.eval_count),
            "order_used": order_used,
            "converged": converged,
            "rows": int(phi.shape[0]),
            "p": int(phi.shape[1]),
        }
        Path(args.stats_out).write_text(json.dumps(stats) + "\n")
    if stdio_server is not None:
        done = {"op": "done", "out": str(args.out), "eval_count": int(result.eval_count)}
        sys.stdout.write(json.dumps(done) + "\n")
        sys.stdout.flush()
    else:
        print(f"wrote {args.out} ({phi.shape[0]} rows, {phi.shape[1]} features)")
    return 0


def _cmd_bench(args) -> int:
    config = ExperimentConfig.from_json(Path(args.config).read_text())
    out = args.out
    if out is None:
        out_dir = Path(config.out_dir or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        out = out_dir / f"{args.kind}.csv"
    if args.kind == "accuracy":
        rows = run_accuracy_experiment(config)
        write_rows_csv(out, rows, ACCURACY_FIELDS)
    elif args.kind == "convergence":
        rows = run_convergence_experiment(config)
        write_rows_csv(out, rows, CONVERGENCE_FIELDS)
    else:
        rows = run_timing_experiment(config)
        write_rows_csv(out, rows, TIMING_FIELDS)
    print(f"wrote {out} ({len(rows)} rows)")
    return 0


def _cmd_plot(args) -> int:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        raise SystemExit("plotting needs matplotlib (pip install structshap[plot])")

    import csv as _csv

    with open(args.csv, newline="") as fh:
        rows = list(_csv.DictReader(fh))
    if not rows:
        raise SystemExit(f"{args.csv}: no rows")

    if args.kind == "accuracy":
        methods = sorted({row["method"] for row in rows})
        fig, axes = plt.subplots(1, len(methods), figsize=(4 * len(methods), 4), squeeze=False)
        for ax, method in zip(axes[0], methods):
            pts = [
                (float(r["true_phi"]), float(r["estimated_phi"]))
                for r in rows
                if r["method"] == method and r["interacting"] == "1"
            ]
            if pts:
                true_vals, est_vals = zip(*pts)
                ax.scatter(true_vals, est_vals, s=4, alpha=0.4)
                lo = min(min(true_vals), min(est_vals))
                hi = max(max(true_vals), max(est_vals))
                ax.plot([lo, hi], [lo, hi], lw=1, color="black")
            ax.set_title(method)
            ax.set_xlabel("true")
            ax.set_ylabel("estimated")
    elif args.kind == "convergence":
        fig, ax = plt.subplots(figsize=(6, 4))
        groups = sorted({(r["alpha"], r["baseline_kind"]) for r in rows})
        for alpha, kind in groups:
            pts = sorted(
                (int(r["order"]), float(r["rel_diff_vs_true"]))
                for r in rows
                if r["alpha"] == alpha and r["baseline_kind"] == kind
            )
            ax.plot(*zip(*pts), marker="o", label=f"alpha={alpha}, {kind}")
        ax.set_xlabel("order")
        ax.set_ylabel("relative difference vs true")
        ax.set_yscale("symlog", linthresh=1e-10)
        ax.legend()
    else:
        fig, ax = plt.subplots(figsize=(7, 4))
        labels = [r["method"] for r in rows]
        counts = [float(r["eval_count"]) for r in rows]
        ax.bar(labels, counts)
        ax.set_ylabel("model evaluations")
        ax.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    fig.savefig(args.out, dpi=130)
    print(f"wrote {args.out}")
    return 0


def _cmd_coeffs(args) -> int:
    if args.coeffs_command == "solve":
        coeffs = solve_coefficients(args.p, args.order)
        doc = {"p": coeffs.p, "K": coeffs.K, "q": coeffs.q, "a": coeffs.a.tolist()}
        text = json.dumps(doc, indent=2)
        if args.out:
            Path(args.out).write_text(text + "\n")
            print(f"wrote {args.out}")
        else:
            print(text)
        return 0
    doc = json.loads(Path(args.file).read_text())
    coeffs = OrderKCoefficients(p=doc["p"], K=doc["K"], q=doc["q"], a=np.asarray(doc["a"]))
    report = verify_coefficients(coeffs)
    print(
        json.dumps(
            {
                "passed": report.passed,
                "max_system_residual": report.max_system_residual,
                "max_identity_residual": report.max_identity_residual,
            }
        )
    )
    return 0 if report.passed else 1


def _cmd_model(args) -> int:
    try:
        model = parse_model_spec(Path(args.model).read_text())
    except ModelSpecError as exc:
        raise SystemExit(f"bad model spec: {exc}")
    text = serialize_model_spec(model)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "explain":
            return _cmd_explain(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "plot":
            return _cmd_plot(args)
        if args.command == "coeffs":
            return _cmd_coeffs(args)
        return _cmd_model(args)
    except (ValueError, OSError) as exc:
        raise SystemExit(str(exc))


if __name__ == "__main__":
    raise SystemExit(main())
