"""Command-line driver binding datasets, configs, methods and evaluators.

Subcommands
-----------
- ``run``         one method on one dataset, with classification evaluation
- ``reconstruct`` structure-only embedding quality (neighbor retrieval)
- ``diagnose``    karate degree-law check, negative-spectrum check, or an
                  over-smoothing comparison across methods
- ``grid``        sweep (dataset, method, k) cells by validation accuracy

Reports are deterministic for a fixed (dataset, config, seed): wall-clock
timing is printed to stdout and never written into report files, so repeat
runs produce byte-identical output. Config files are plain ``key=value``
lines (``#`` comments); precedence is flags > file > defaults. Every command
honors ``--seed`` and defaults to seed 0, never wall-clock entropy.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
import time
from dataclasses import replace

import numpy as np

from .classify import LOSS_KINDS, LabelData
from .evaluate import (
    evaluate_embedding,
    graph_reconstruction,
    karate_verification,
    verify_igc_filter,
)
from .graph import (
    DataFormatError,
    Dataset,
    SamplingError,
    SparseGraph,
    load_dataset,
    resolve_dataset_path,
    sample_negative_graph,
)
from .methods import (
    METHOD_NAMES,
    MethodConfig,
    NumericalDivergenceError,
    run_ggc,
    run_ggcm,
    run_ogc,
    run_s2gc,
    run_sgc,
)
from .operators import oversmoothing_indicator
from .rng import Pcg32

REPORT_FORMATS = ("json", "tsv")
EVAL_MODES = ("auto", "logreg", "none")
DEFAULT_DEPTH = {"sgc": 2, "s2gc": 16}


class ConfigError(ValueError):
    """Bad config file or flag combination."""


# ---------------------------------------------------------------------------
# Config files and override merging
# ---------------------------------------------------------------------------


def _parse_bool(value: str) -> bool:
    low = value.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


# Every key a config file may set; flags use the same names (dashes for
# underscores). Unknown keys are rejected so typos fail loudly.
CONFIG_KEYS: dict[str, type | object] = {
    "dataset": str,
    "method": str,
    "k": int,
    "seed": int,
    "out": str,
    "format": str,
    "eval": str,
    "max_iters": int,
    "beta": float,
    "decay": float,
    "eta_sup": float,
    "eta_w": float,
    "alpha": float,
    "neg_edges": int,
    "loss_kind": str,
    "lim": _parse_bool,
    "freeze_negative": _parse_bool,
    "igc_input": str,
}

_METHOD_FIELDS = (
    "max_iters",
    "eta_sup",
    "eta_w",
    "alpha",
    "neg_edges",
    "loss_kind",
    "lim",
    "seed",
    "freeze_negative",
    "igc_input",
)


def parse_config_file(path: str) -> dict:
    """Read a key=value config file, casting values and rejecting unknown keys."""
    opts: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            opts[key] = CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}")
    return opts


def resolve_options(args: argparse.Namespace) -> dict:
    """Merge defaults < config file < flags into one option dict."""
    opts: dict = {"seed": 0, "format": "json", "eval": "auto"}
    config_path = getattr(args, "config", None)
    if config_path:
        opts.update(parse_config_file(config_path))
    for key in CONFIG_KEYS:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            opts[key] = flag_value
    if opts["format"] not in REPORT_FORMATS:
        raise ConfigError(f"format must be one of {REPORT_FORMATS}, got {opts['format']!r}")
    if opts["eval"] not in EVAL_MODES:
        raise ConfigError(f"eval must be one of {EVAL_MODES}, got {opts['eval']!r}")
    return opts


def build_method_config(method: str, opts: dict) -> MethodConfig:
    """Per-method defaults overlaid with any explicit hyper-parameters."""
    cfg = MethodConfig.for_method(method)
    lgc = cfg.lgc
    if "beta" in opts:
        lgc = replace(lgc, beta=opts["beta"])
    if "decay" in opts:
        lgc = replace(lgc, decay=opts["decay"])
    overrides = {key: opts[key] for key in _METHOD_FIELDS if key in opts}
    if method in ("ogc", "ggc", "ggcm") and "k" in opts and "max_iters" not in opts:
        overrides["max_iters"] = opts["k"]
    try:
        return replace(cfg, lgc=lgc, **overrides)
    except ValueError as exc:
        raise ConfigError(str(exc))


def _require_method(opts: dict) -> str:
    method = opts.get("method")
    if method is None:
        raise ConfigError("no method specified (use --method)")
    if method not in METHOD_NAMES:
        raise ConfigError(f"unknown method {method!r}; expected one of {METHOD_NAMES}")
    return method


def _load_from_opts(opts: dict) -> Dataset:
    name = opts.get("dataset")
    if name is None:
        raise ConfigError("no dataset specified (use --dataset)")
    return load_dataset(resolve_dataset_path(name))


def _depth(opts: dict, method: str) -> int:
    if "k" in opts:
        return opts["k"]
    return DEFAULT_DEPTH.get(method, MethodConfig.for_method(method).max_iters)


# ---------------------------------------------------------------------------
# Report serialization (deterministic; no wall-clock content)
# ---------------------------------------------------------------------------


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_report(report: dict, fmt: str) -> str:
    """Render a report dict as JSON or TSV (config prologue + one table)."""
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
    lines = [f"# command\t{report['command']}"]
    for section in ("config", "summary"):
        for key in sorted(report.get(section, {})):
            lines.append(f"# {section}.{key}\t{_cell(report[section][key])}")
    lines.append("\t".join(report["columns"]))
    for row in report["rows"]:
        lines.append("\t".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def emit_report(report: dict, opts: dict) -> None:
    text = serialize_report(report, opts["format"])
    out = opts.get("out")
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(f"report written to {out}")
    else:
        sys.stdout.write(text)


def _config_section(opts: dict, cfg: MethodConfig | None = None, **extra) -> dict:
    section = {
        "dataset": opts.get("dataset"),
        "method": opts.get("method"),
        "seed": opts["seed"],
        "format": opts["format"],
    }
    if cfg is not None:
        section.update(
            max_iters=cfg.max_iters,
            beta=cfg.lgc.beta,
            decay=cfg.lgc.decay,
            eta_sup=cfg.eta_sup,
            eta_w=cfg.eta_w,
            alpha=cfg.alpha,
            neg_edges=cfg.neg_edges,
            loss_kind=cfg.loss_kind,
            lim=cfg.lim,
            freeze_negative=cfg.freeze_negative,
            igc_input=cfg.igc_input,
        )
    section.update(extra)
    return section


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def _run_and_eval(ds: Dataset, method: str, cfg: MethodConfig, k: int, eval_mode: str) -> dict:
    """Execute one (dataset, method, k) cell; shared by run and grid."""
    labels = LabelData.from_dataset(ds)
    rows: list[list] = []
    columns = ["k", "beta", "val_acc", "test_acc", "q_sup", "q_smo", "q_sharp", "q_igc"]
    summary: dict = {"eval": eval_mode}

    def loss_cells(losses):
        if losses is None:
            return [None, None, None, None]
        return [losses.q_sup, losses.q_smo, losses.q_sharp, losses.q_igc]

    if method == "ogc":
        trace = run_ogc(ds, cfg)
        for rec in trace.records:
            rows.append([rec.k, rec.beta, rec.val_acc, rec.test_acc] + loss_cells(rec.losses))
        last = trace.records[-1]
        summary.update(
            iterations=last.k,
            stopped_early=last.k < cfg.max_iters,
            val_acc=last.val_acc,
            test_acc=last.test_acc,
        )
        if eval_mode == "logreg":
            val, test = evaluate_embedding(trace.final_embedding, labels, cfg.seed, last.k)
            summary.update(val_acc=val, test_acc=test)
    elif method in ("ggc", "ggcm"):
        trace = run_ggc(ds, cfg) if method == "ggc" else run_ggcm(ds, cfg)
        for rec in trace.records:
            rows.append([rec.k, rec.beta, None, None] + loss_cells(rec.losses))
        summary["iterations"] = trace.records[-1].k
        if eval_mode != "none":
            val, test = evaluate_embedding(
                trace.final_embedding, labels, cfg.seed, trace.records[-1].k
            )
            summary.update(val_acc=val, test_acc=test)
    else:  # sgc / s2gc
        emb = run_sgc(ds, k) if method == "sgc" else run_s2gc(ds, k, cfg.alpha)
        summary["iterations"] = k
        val = test = None
        if eval_mode != "none":
            val, test = evaluate_embedding(emb, labels, cfg.seed, k)
            summary.update(val_acc=val, test_acc=test)
        rows.append([k, None, val, test, None, None, None, None])
    return {"columns": columns, "rows": rows, "summary": summary}


def cmd_run(args: argparse.Namespace) -> int:
    opts = resolve_options(args)
    method = _require_method(opts)
    ds = _load_from_opts(opts)
    cfg = build_method_config(method, opts)
    k = _depth(opts, method)
    start = time.perf_counter()
    result = _run_and_eval(ds, method, cfg, k, opts["eval"])
    elapsed = time.perf_counter() - start
    report = {
        "command": "run",
        "config": _config_section(opts, cfg, k=k, eval=opts["eval"]),
        "summary": result["summary"],
        "columns": result["columns"],
        "rows": result["rows"],
    }
    summary = result["summary"]
    print(f"dataset={ds.name} method={method} seed={cfg.seed}")
    for key in ("iterations", "stopped_early", "val_acc", "test_acc"):
        if key in summary and summary[key] is not None:
            print(f"  {key} = {_cell(summary[key])}")
    print(f"  elapsed = {elapsed:.3f}s")
    emit_report(report, opts)
    return 0


# ---------------------------------------------------------------------------
# reconstruct
# ---------------------------------------------------------------------------


def cmd_reconstruct(args: argparse.Namespace) -> int:
    opts = resolve_options(args)
    method = _require_method(opts)
    ds = _load_from_opts(opts)
    cfg = build_method_config(method, opts)
    k = opts.get("k")
    if k is None:
        raise ConfigError("reconstruct needs an explicit --k (propagation depth)")
    start = time.perf_counter()
    rep = graph_reconstruction(ds.graph, method, k, cfg)
    elapsed = time.perf_counter() - start
    report = {
        "command": "reconstruct",
        "config": _config_section(opts, cfg, k=k),
        "summary": {"mean_accuracy": rep.mean_accuracy, "nodes": ds.graph.n},
        "columns": ["node", "degree", "precision"],
        "rows": [
            [i, int(ds.graph.degrees[i]), float(rep.per_node_precision[i])]
            for i in range(ds.graph.n)
        ],
    }
    print(
        f"dataset={ds.name} method={method} k={k} "
        f"mean_reconstruction_accuracy={rep.mean_accuracy!r}"
    )
    print(f"  elapsed = {elapsed:.3f}s")
    emit_report(report, opts)
    return 0


# ---------------------------------------------------------------------------
# diagnose
# ---------------------------------------------------------------------------


def cmd_diagnose_karate(args: argparse.Namespace) -> int:
    opts = resolve_options(args)
    k = opts.get("k", 512)
    rep = karate_verification(seed=opts["seed"], k=k)
    report = {
        "command": "diagnose karate",
        "config": {"seed": rep.seed, "k": rep.k, "format": opts["format"]},
        "summary": {
            "max_ratio_residual": rep.max_ratio_residual,
            "max_same_degree_diff": rep.max_same_degree_diff,
        },
        "columns": ["node", "degree", "component", "u0", "u1"],
        "rows": [
            [
                i,
                int(rep.degrees[i]),
                int(rep.components[i]),
                float(rep.embeddings[i, 0]),
                float(rep.embeddings[i, 1]),
            ]
            for i in range(rep.degrees.shape[0])
        ],
    }
    print(
        f"karate degree-law check: k={rep.k} seed={rep.seed} "
        f"max_ratio_residual={rep.max_ratio_residual!r} "
        f"max_same_degree_diff={rep.max_same_degree_diff!r}"
    )
    emit_report(report, opts)
    return 0


def cmd_diagnose_spectrum(args: argparse.Namespace) -> int:
    opts = resolve_options(args)
    nodes = args.nodes
    neg_edges = args.neg_edges if args.neg_edges is not None else 3 * nodes
    empty = SparseGraph.from_edges(nodes, [])
    rng = Pcg32(opts["seed"])
    ng = sample_negative_graph(empty, neg_edges, rng)
    rep = verify_igc_filter(ng)
    gap = float(np.max(np.abs(rep.exact_response - rep.approx_response)))
    report = {
        "command": "diagnose spectrum",
        "config": {
            "nodes": nodes,
            "neg_edges": neg_edges,
            "seed": opts["seed"],
            "format": opts["format"],
        },
        "summary": {
            "xi_bar": rep.xi_bar,
            "lambda_max": rep.lambda_max,
            "bound": rep.bound,
            "max_abs_gap": gap,
            "bound_holds": bool(rep.lambda_max <= rep.bound + 1e-9),
        },
        "columns": ["lambda", "exact_response", "approx_response"],
        "rows": [
            [float(rep.lambdas[i]), float(rep.exact_response[i]), float(rep.approx_response[i])]
            for i in range(rep.lambdas.shape[0])
        ],
    }
    print(
        f"inverse-convolution spectrum: nodes={nodes} neg_edges={neg_edges} "
        f"lambda_max={rep.lambda_max!r} <= bound={rep.bound!r} < 2"
    )
    print(f"  mean negative degree xi_bar = {rep.xi_bar!r}; max |exact - approx| = {gap!r}")
    emit_report(report, opts)
    return 0


def _oversmooth_embedding(ds: Dataset, method: str, k: int, opts: dict) -> np.ndarray:
    cfg = build_method_config(method, {**opts, "k": k})
    if method == "sgc":
        return run_sgc(ds, k)
    if method == "s2gc":
        return run_s2gc(ds, k, cfg.alpha)
    cfg = replace(cfg, max_iters=k, snapshots="last", record_losses=False)
    if method == "ogc":
        return run_ogc(ds, cfg).final_embedding
    trace = run_ggc(ds, cfg) if method == "ggc" else run_ggcm(ds, cfg)
    return trace.final_embedding


def cmd_diagnose_oversmooth(args: argparse.Namespace) -> int:
    opts = resolve_options(args)
    ds = _load_from_opts(opts)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise ConfigError("no methods given (use --methods sgc,ggc)")
    for m in methods:
        if m not in METHOD_NAMES:
            raise ConfigError(f"unknown method {m!r}; expected one of {METHOD_NAMES}")
    k = opts.get("k", 64)
    rows = []
    indicators = {}
    for m in methods:
        u = _oversmooth_embedding(ds, m, k, opts)
        ind = oversmoothing_indicator(u, ds.graph)
        indicators[m] = ind
        rows.append([m, k, ind])
    report = {
        "command": "diagnose oversmooth",
        "config": _config_section(opts, None, k=k, methods=",".join(methods)),
        "summary": {f"indicator_{m}": indicators[m] for m in methods},
        "columns": ["method", "k", "oversmoothing_indicator"],
        "rows": rows,
    }
    print(f"over-smoothing indicators on {ds.name} at k={k} (higher = less smoothed):")
    for m in methods:
        print(f"  {m:6s} {indicators[m]!r}")
    emit_report(report, opts)
    return 0


# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------


def _grid_cell(task: tuple) -> dict:
    dataset, method, k, opts = task
    ds = load_dataset(resolve_dataset_path(dataset))
    cfg = build_method_config(method, opts)
    result = _run_and_eval(ds, method, cfg, k, "auto")
    summary = result["summary"]
    return {
        "dataset": dataset,
        "method": method,
        "k": k,
        "val_acc": summary.get("val_acc"),
        "test_acc": summary.get("test_acc"),
    }


def cmd_grid(args: argparse.Namespace) -> int:
    opts = resolve_options(args)
    datasets = [d.strip() for d in (opts.get("dataset") or "").split(",") if d.strip()]
    methods = [m.strip() for m in (opts.get("method") or "").split(",") if m.strip()]
    if not datasets:
        raise ConfigError("no dataset specified (use --dataset name[,name...])")
    if not methods:
        raise ConfigError("no method specified (use --method name[,name...])")
    for m in methods:
        if m not in METHOD_NAMES:
            raise ConfigError(f"unknown method {m!r}; expected one of {METHOD_NAMES}")
    try:
        ks = [int(tok) for tok in args.ks.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"bad --k list {args.ks!r}; expected comma-separated integers")
    if not ks:
        raise ConfigError("empty --k list")
    cell_opts = {key: opts[key] for key in opts if key not in ("dataset", "method", "k", "out")}
    tasks = [(d, m, k, {**cell_opts, "k": k}) for d in datasets for m in methods for k in ks]
    start = time.perf_counter()
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            cells = list(pool.map(_grid_cell, tasks))
    else:
        cells = [_grid_cell(t) for t in tasks]
    elapsed = time.perf_counter() - start
    best = max(
        (c for c in cells if c["val_acc"] is not None),
        key=lambda c: c["val_acc"],
        default=None,
    )
    report = {
        "command": "grid",
        "config": {
            "datasets": ",".join(datasets),
            "methods": ",".join(methods),
            "ks": ",".join(str(k) for k in ks),
            "seed": opts["seed"],
            "format": opts["format"],
        },
        "summary": {
            "cells": len(cells),
            "best_dataset": best["dataset"] if best else None,
            "best_method": best["method"] if best else None,
            "best_k": best["k"] if best else None,
            "best_val_acc": best["val_acc"] if best else None,
            "best_test_acc": best["test_acc"] if best else None,
        },
        "columns": ["dataset", "method", "k", "val_acc", "test_acc"],
        "rows": [[c["dataset"], c["method"], c["k"], c["val_acc"], c["test_acc"]] for c in cells],
    }
    print(f"grid: {len(cells)} cells in {elapsed:.3f}s (jobs={args.jobs})")
    for c in cells:
        print(
            f"  {c['dataset']:12s} {c['method']:5s} k={c['k']:<4d} "
            f"val={_cell(c['val_acc']):22s} test={_cell(c['test_acc'])}"
        )
    if best:
        print(
            f"best by val accuracy: {best['dataset']} {best['method']} k={best['k']} "
            f"val={_cell(best['val_acc'])} test={_cell(best['test_acc'])}"
        )
    emit_report(report, opts)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Exit 1 (config error) on bad usage instead of argparse's default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common_flags(parser: argparse.ArgumentParser, *, config: bool = True):
    parser.add_argument("--seed", type=int, default=None, help="run seed (default 0)")
    parser.add_argument("--out", default=None, help="report file path (default: stdout)")
    parser.add_argument("--format", default=None, choices=REPORT_FORMATS, help="report format")
    if config:
        parser.add_argument("--config", default=None, help="key=value config file")


def _add_method_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    parser.add_argument("--beta", type=float, default=None, help="lazy-walk strength")
    parser.add_argument("--decay", type=float, default=None, help="per-iteration beta decay")
    parser.add_argument("--eta-sup", dest="eta_sup", type=float, default=None)
    parser.add_argument("--eta-w", dest="eta_w", type=float, default=None)
    parser.add_argument("--alpha", type=float, default=None, help="input blend weight")
    parser.add_argument("--neg-edges", dest="neg_edges", type=int, default=None)
    parser.add_argument("--loss-kind", dest="loss_kind", choices=LOSS_KINDS, default=None)
    parser.add_argument("--lim", type=_parse_bool, default=None, metavar="BOOL",
                        help="restrict the embedding correction to train rows")
    parser.add_argument("--freeze-negative", dest="freeze_negative", type=_parse_bool,
                        default=None, metavar="BOOL")
    parser.add_argument("--igc-input", dest="igc_input", choices=("previous", "smoothed"),
                        default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graphprop", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run",
                           help="run one method on one dataset and evaluate")
    p_run.add_argument("--dataset", default=None, help="dataset name or directory")
    p_run.add_argument("--method", default=None, help=f"one of {METHOD_NAMES}")
    p_run.add_argument("--k", type=int, default=None,
                       help="propagation depth (iterations for the iterative methods)")
    p_run.add_argument("--eval", default=None, choices=EVAL_MODES,
                       help="final evaluation: internal predictions (auto) or logistic probe")
    _add_common_flags(p_run)
    _add_method_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_rec = sub.add_parser("reconstruct",
                           help="neighbor-retrieval accuracy of structure-only embeddings")
    p_rec.add_argument("--dataset", default=None)
    p_rec.add_argument("--method", default=None, help="sgc, s2gc, ggc or ggcm")
    p_rec.add_argument("--k", type=int, default=None, help="propagation depth")
    _add_common_flags(p_rec)
    _add_method_flags(p_rec)
    p_rec.set_defaults(func=cmd_reconstruct)

    p_diag = sub.add_parser("diagnose",
                            help="built-in verification drivers")
    diag_sub = p_diag.add_subparsers(dest="check", required=True, parser_class=_Parser)

    p_kar = diag_sub.add_parser("karate",
                                help="degree-law convergence on the bundled karate graph")
    p_kar.add_argument("--k", type=int, default=None, help="convolution steps (default 512)")
    _add_common_flags(p_kar)
    p_kar.set_defaults(func=cmd_diagnose_karate)

    p_spec = diag_sub.add_parser("spectrum",
                                 help="inverse-convolution spectrum on a random negative graph")
    p_spec.add_argument("--nodes", type=int, default=100)
    p_spec.add_argument("--neg-edges", dest="neg_edges", type=int, default=None,
                        help="sampled pairs (default 3*nodes)")
    _add_common_flags(p_spec)
    p_spec.set_defaults(func=cmd_diagnose_spectrum)

    p_over = diag_sub.add_parser("oversmooth",
                                 help="compare over-smoothing indicators across methods")
    p_over.add_argument("--dataset", default=None)
    p_over.add_argument("--methods", required=True, help="comma-separated method names")
    p_over.add_argument("--k", type=int, default=None, help="depth (default 64)")
    _add_common_flags(p_over)
    _add_method_flags(p_over)
    p_over.set_defaults(func=cmd_diagnose_oversmooth)

    p_grid = sub.add_parser("grid",
                            help="sweep (dataset, method, k) cells by validation accuracy")
    p_grid.add_argument("--dataset", default=None, help="comma-separated dataset names")
    p_grid.add_argument("--method", default=None, help="comma-separated method names")
    p_grid.add_argument("--k", dest="ks", default="2,4,8,16",
                        help="comma-separated depths (default 2,4,8,16)")
    p_grid.add_argument("--jobs", type=int, default=1,
                        help="parallel worker processes for independent cells")
    _add_common_flags(p_grid)
    _add_method_flags(p_grid)
    p_grid.set_defaults(func=cmd_grid)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalDivergenceError as exc:
        print(f"error: numerical divergence: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, DataFormatError, SamplingError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
