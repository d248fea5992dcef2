"""Experiment harness: named methods, evaluation reports, grids, gamma sweeps.

Method names combine a loss with a sampling strategy:
  L-GCN (baseline), CB, FL, RS, RIWS, CB+RS, FL+RS, CB+RIWS, FL+RIWS
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from pathlib import Path
from typing import Any

import numpy as np

from .cluster import bcubed, edge_ap, merge_links, score_edges
from .data import EmbeddingSet, SynthesisSpec, build_imbalanced_subset, load_embeddings
from .knn import ExpansionConfig
from .losses import LossConfig, LossKind
from .model import GcnParams
from .sampling import Strategy, StrategyKind
from .training import TrainConfig, TrainHistory, train

# default expansion coefficients per sampling strategy
DEFAULT_GAMMA = {
    StrategyKind.BASELINE_TOPK: 1.0,
    StrategyKind.BALANCED_RESAMPLE: 1.2,
    StrategyKind.RIWS: 2.0,
}

METHOD_NAMES = ("L-GCN", "CB", "FL", "RS", "RIWS", "CB+RS", "FL+RS", "CB+RIWS", "FL+RIWS")

_LOSS_BY_TOKEN = {"CB": LossKind.CLASS_BALANCE, "FL": LossKind.FOCAL}
_STRATEGY_BY_TOKEN = {"RS": StrategyKind.BALANCED_RESAMPLE, "RIWS": StrategyKind.RIWS}


class ConfigError(Exception):
    pass


def parse_method(name: str) -> tuple[StrategyKind, LossKind]:
    """Map a method name to (sampling strategy, loss kind)."""
    loss = LossKind.CE
    strat = StrategyKind.BASELINE_TOPK
    if name == "L-GCN":
        return strat, loss
    for token in name.split("+"):
        if token in _LOSS_BY_TOKEN:
            loss = _LOSS_BY_TOKEN[token]
        elif token in _STRATEGY_BY_TOKEN:
            strat = _STRATEGY_BY_TOKEN[token]
        else:
            raise ConfigError(f"unknown method token {token!r} in {name!r}")
    return strat, loss


def method_train_config(
    method: str, seed: int, base: dict[str, Any] | None = None
) -> TrainConfig:
    """Build a TrainConfig for a named method over a base config dict."""
    base = dict(base or {})
    strat_kind, loss_kind = parse_method(method)
    gamma = base.pop("gamma_expand", None)
    if gamma is None:
        gamma = DEFAULT_GAMMA[strat_kind]
    expansion = ExpansionConfig(
        k=base.pop("k", 10), gamma_expand=float(gamma), k2=base.pop("k2", 5)
    )
    loss = LossConfig(
        kind=loss_kind,
        alpha_pos=base.pop("alpha_pos", 0.5),
        gamma_focal=base.pop("gamma_focal", 2.0),
    )
    known = {f.name for f in dataclasses.fields(TrainConfig)} - {"strategy", "loss", "seed"}
    unknown = set(base) - known
    if unknown:
        raise ConfigError(f"unknown train config keys: {sorted(unknown)}")
    if "hidden_dims" in base:
        base["hidden_dims"] = tuple(base["hidden_dims"])
    return TrainConfig(
        strategy=Strategy(kind=strat_kind, expansion=expansion),
        loss=loss,
        seed=seed,
        **base,
    )


def config_hash(payload: Any) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def train_config_digest(cfg: TrainConfig) -> str:
    d = dataclasses.asdict(cfg)
    d["strategy"]["kind"] = cfg.strategy.kind.value
    d["loss"]["kind"] = cfg.loss.kind.value
    return config_hash(d)


# ---------------------------------------------------------------------------
# evaluation report

REPORT_SCHEMA = {
    "type": "object",
    "required": ["dataset", "method", "seed", "ap", "bcubed", "runtime_s", "degeneracy"],
    "properties": {
        "dataset": {"type": "string"},
        "method": {"type": "string"},
        "seed": {"type": "integer"},
        "ap": {"type": "number"},
        "bcubed": {
            "type": "object",
            "required": ["p", "r", "f", "tau"],
            "properties": {
                "p": {"type": "number"},
                "r": {"type": "number"},
                "f": {"type": "number"},
                "tau": {"type": "number"},
            },
        },
        "runtime_s": {"type": "number"},
        "degeneracy": {
            "type": "object",
            "required": ["single_class_pools", "clamps"],
            "properties": {
                "single_class_pools": {"type": "integer"},
                "clamps": {"type": "integer"},
            },
        },
        "config_hash": {"type": "string"},
        "tau_sweep": {"type": "array"},
    },
}


def validate_report(report: dict) -> None:
    import jsonschema

    jsonschema.validate(report, REPORT_SCHEMA)


def default_tau_grid(step: float = 0.05) -> np.ndarray:
    return np.round(np.arange(0.0, 1.0 + step / 2, step), 10)


def evaluate(
    dataset: EmbeddingSet,
    params: GcnParams,
    expansion: ExpansionConfig,
    r: int = 10,
    tau_grid: np.ndarray | None = None,
    dataset_name: str | None = None,
    method: str = "custom",
    seed: int = 0,
    history: TrainHistory | None = None,
) -> dict:
    """Edge AP plus tau-swept BCubed; best-F threshold reported alongside the sweep."""
    start = time.perf_counter()
    if tau_grid is None:
        tau_grid = default_tau_grid()
    scored = score_edges(dataset, params, expansion, r=r)
    ap = edge_ap(scored)
    sweep = []
    best = None
    for tau in tau_grid:
        clusters = merge_links(scored, float(tau), dataset.n)
        p, rec, f = bcubed(clusters, dataset.labels)
        row = {"tau": float(tau), "p": p, "r": rec, "f": f}
        sweep.append(row)
        if best is None or f > best["f"]:
            best = row
    degeneracy = {"single_class_pools": 0, "clamps": 0}
    if history is not None:
        degeneracy = {
            "single_class_pools": int(sum(history.single_class_pools)),
            "clamps": int(sum(history.clamps)),
        }
    report = {
        "dataset": dataset_name if dataset_name is not None else dataset.name,
        "method": method,
        "seed": int(seed),
        "ap": float(ap),
        "bcubed": {"p": best["p"], "r": best["r"], "f": best["f"], "tau": best["tau"]},
        "runtime_s": time.perf_counter() - start,
        "degeneracy": degeneracy,
        "tau_sweep": sweep,
    }
    validate_report(report)
    return report


def run_cell(
    train_set: EmbeddingSet,
    eval_set: EmbeddingSet,
    method: str,
    seed: int,
    base_cfg: dict[str, Any] | None = None,
    tau_grid: np.ndarray | None = None,
    dataset_name: str | None = None,
) -> dict:
    """Train one method on train_set, evaluate on eval_set; one report dict."""
    start = time.perf_counter()
    cfg = method_train_config(method, seed, base_cfg)
    params, history = train(train_set, cfg)
    report = evaluate(
        eval_set,
        params,
        cfg.strategy.expansion,
        r=cfg.r,
        tau_grid=tau_grid,
        dataset_name=dataset_name if dataset_name is not None else train_set.name,
        method=method,
        seed=seed,
        history=history,
    )
    report["runtime_s"] = time.perf_counter() - start
    report["config_hash"] = train_config_digest(cfg)
    report["diverged"] = history.diverged
    return report


# ---------------------------------------------------------------------------
# experiment grids


def load_experiment_spec(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read experiment spec {path}: {exc}") from None
    for key in ("train_manifest", "eval_manifest", "methods", "seeds"):
        if key not in spec:
            raise ConfigError(f"experiment spec missing {key!r}")
    if not spec["methods"] or not spec["seeds"]:
        raise ConfigError("methods and seeds must be nonempty")
    for name in spec["methods"]:
        parse_method(name)
    spec.setdefault("grid", [])       # list of [m, n]; empty = use train set as-is
    spec.setdefault("train_config", {})
    return spec


def _grid_datasets(spec: dict, base_dir: Path) -> list[tuple[str, EmbeddingSet]]:
    source = load_embeddings(base_dir / spec["train_manifest"])
    if not spec["grid"]:
        return [(source.name, source)]
    out = []
    for m, n in spec["grid"]:
        sub = build_imbalanced_subset(
            source, SynthesisSpec(majority_identity_count=m, minority_identity_size=n,
                                  seed=spec.get("subset_seed", 0))
        )
        out.append((f"(H{m},S{n})", sub))
    return out


def run_matrix(spec: dict, out_dir: str | Path, spec_dir: str | Path = ".") -> dict:
    """Full (dataset x method x seed) grid with resume-by-config-hash.

    Completed cells (matching hash on disk) are skipped; failed cells are
    recorded, never abort the grid.
    """
    out_dir = Path(out_dir)
    cells_dir = out_dir / "cells"
    cells_dir.mkdir(parents=True, exist_ok=True)
    spec_dir = Path(spec_dir)
    eval_set = load_embeddings(spec_dir / spec["eval_manifest"])
    datasets = _grid_datasets(spec, spec_dir)
    cells = []
    failed = 0
    for ds_name, ds in datasets:
        for method in spec["methods"]:
            for seed in spec["seeds"]:
                chash = config_hash(
                    {"dataset": ds_name, "method": method, "seed": seed,
                     "train_config": spec["train_config"]}
                )
                cell_path = cells_dir / f"cell-{chash}.json"
                if cell_path.exists():
                    cells.append(json.loads(cell_path.read_text()))
                    continue
                try:
                    report = run_cell(
                        ds, eval_set, method, seed,
                        base_cfg=spec["train_config"], dataset_name=ds_name,
                    )
                    report["cell_hash"] = chash
                except Exception as exc:  # cell failures must not kill the grid
                    report = {
                        "dataset": ds_name, "method": method, "seed": int(seed),
                        "failed": True, "error": f"{type(exc).__name__}: {exc}",
                        "cell_hash": chash,
                    }
                    failed += 1
                cell_path.write_text(json.dumps(report, indent=2) + "\n")
                cells.append(report)
    report = assemble_report(cells)
    report["failed_cells"] = failed
    (out_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    return report


def assemble_report(cells: list[dict]) -> dict:
    """Per-method per-dataset mean AP over seeds, plus the row average."""
    ok = [c for c in cells if not c.get("failed")]
    datasets = sorted({c["dataset"] for c in ok})
    methods = []
    rows: dict[str, dict] = {}
    for c in ok:
        rows.setdefault(c["method"], {}).setdefault(c["dataset"], []).append(c["ap"])
        if c["method"] not in methods:
            methods.append(c["method"])
    table = {}
    for method in methods:
        row = {ds: float(np.mean(rows[method][ds])) for ds in datasets if ds in rows[method]}
        row["Avg"] = float(np.mean(list(row.values())))
        table[method] = row
    return {"datasets": datasets, "table": table, "cells": cells}


def sweep_gamma(
    spec: dict,
    gammas: list[float],
    out_dir: str | Path,
    spec_dir: str | Path = ".",
) -> list[dict]:
    """Train/eval balanced-resampling and RIWS per gamma; emit plot-ready TSVs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec_dir = Path(spec_dir)
    train_set = load_embeddings(spec_dir / spec["train_manifest"])
    eval_set = load_embeddings(spec_dir / spec["eval_manifest"])
    rows = []
    for gamma in gammas:
        for method in ("RS", "RIWS"):
            aps = []
            for seed in spec["seeds"]:
                base = dict(spec.get("train_config", {}))
                base["gamma_expand"] = gamma
                report = run_cell(train_set, eval_set, method, seed, base_cfg=base)
                aps.append(report["ap"])
            rows.append(
                {"gamma": float(gamma), "method": method,
                 "ap_mean": float(np.mean(aps)), "ap_per_seed": aps}
            )
    with open(out_dir / "gamma_sweep.tsv", "w") as fh:
        fh.write("gamma\tmethod\tap_mean\n")
        for row in rows:
            fh.write(f"{row['gamma']}\t{row['method']}\t{row['ap_mean']:.6f}\n")
    (out_dir / "gamma_sweep.json").write_text(json.dumps(rows, indent=2) + "\n")
    return rows


def format_report_table(report: dict) -> str:
    """Render the matrix report as an aligned text table."""
    datasets = report["datasets"]
    header = ["Method"] + datasets + ["Avg"]
    lines = ["\t".join(header)]
    for method, row in report["table"].items():
        cells = [method] + [
            f"{row[ds]:.4f}" if ds in row else "-" for ds in datasets
        ] + [f"{row['Avg']:.4f}"]
        lines.append("\t".join(cells))
    return "\n".join(lines)
