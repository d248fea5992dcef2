"""Command-line harness.

Subcommands: synth, subset, train, eval, cluster, matrix, sweep-gamma, report.
Exit codes: 0 success, 2 partial failure, 3 config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .cluster import clustering_to_tsv, merge_links, score_edges
from .data import (
    DataError,
    SynthesisSpec,
    SyntheticSpec,
    build_imbalanced_subset,
    generate_synthetic,
    load_embeddings,
    save_embeddings,
)
from .harness import ConfigError
from .knn import ExpansionConfig
from .model import load_checkpoint, save_checkpoint
from .training import train

EXIT_OK = 0
EXIT_PARTIAL = 2
EXIT_CONFIG = 3


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def cmd_synth(args) -> int:
    cfg = _read_json(args.config)
    try:
        spec = SyntheticSpec(
            class_count=cfg["class_count"],
            sizes=tuple(cfg["sizes"]),
            dim=cfg["dim"],
            sigma=cfg.get("sigma", 0.1),
            separation=cfg.get("separation", 1.0),
            seed=args.seed if args.seed is not None else cfg.get("seed", 0),
        )
    except KeyError as exc:
        raise ConfigError(f"synth config missing key {exc}") from None
    dataset = generate_synthetic(spec)
    out = Path(args.out)
    manifest = out if out.suffix == ".json" else out / "manifest.json"
    save_embeddings(dataset, manifest)
    print(manifest)
    return EXIT_OK


def cmd_subset(args) -> int:
    dataset = load_embeddings(args.manifest)
    sub = build_imbalanced_subset(
        dataset,
        SynthesisSpec(
            majority_identity_count=args.m,
            minority_identity_size=args.n,
            seed=args.seed or 0,
        ),
    )
    out = Path(args.out)
    manifest = out if out.suffix == ".json" else out / "manifest.json"
    save_embeddings(sub, manifest)
    print(manifest)
    return EXIT_OK


def cmd_train(args) -> int:
    dataset = load_embeddings(args.manifest)
    cfg_dict = _read_json(args.config) if args.config else {}
    method = cfg_dict.pop("method", "L-GCN")
    seed = args.seed if args.seed is not None else cfg_dict.pop("seed", 0)
    cfg_dict.pop("seed", None)
    if args.deterministic:
        cfg_dict["deterministic"] = True
    cfg = harness.method_train_config(method, seed, cfg_dict)
    params, history = train(dataset, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(params, out / "checkpoint.lgck", harness.train_config_digest(cfg))
    history.to_tsv(out / "history.tsv")
    meta = {
        "method": method,
        "seed": int(seed),
        "config_hash": harness.train_config_digest(cfg),
        "diverged": history.diverged,
        "k": cfg.strategy.expansion.k,
        "k2": cfg.strategy.expansion.k2,
        "r": cfg.r,
    }
    (out / "train_meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    print(out / "checkpoint.lgck")
    return EXIT_PARTIAL if history.diverged else EXIT_OK


def _eval_expansion(args, meta: dict) -> tuple[ExpansionConfig, int]:
    cfg = _read_json(args.config) if args.config else {}
    k = cfg.get("k", meta.get("k", 10))
    k2 = cfg.get("k2", meta.get("k2", 5))
    r = cfg.get("r", meta.get("r", 10))
    return ExpansionConfig(k=k, gamma_expand=1.0, k2=k2), r


def _train_meta(checkpoint_path: str) -> dict:
    meta_path = Path(checkpoint_path).parent / "train_meta.json"
    if meta_path.exists():
        return json.loads(meta_path.read_text())
    return {}


def cmd_eval(args) -> int:
    dataset = load_embeddings(args.manifest)
    params, _ = load_checkpoint(args.checkpoint)
    meta = _train_meta(args.checkpoint)
    expansion, r = _eval_expansion(args, meta)
    report = harness.evaluate(
        dataset,
        params,
        expansion,
        r=r,
        method=args.method or meta.get("method", "custom"),
        seed=args.seed if args.seed is not None else meta.get("seed", 0),
    )
    if args.deterministic:
        # wall-clock is the only nondeterministic report field; zero it so
        # deterministic runs emit byte-identical JSON
        report["runtime_s"] = 0.0
    out = Path(args.out) if args.out else None
    text = json.dumps(report, indent=2) + "\n"
    if out:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        print(out)
    else:
        print(text, end="")
    return EXIT_OK


def cmd_cluster(args) -> int:
    dataset = load_embeddings(args.manifest)
    params, _ = load_checkpoint(args.checkpoint)
    meta = _train_meta(args.checkpoint)
    expansion, r = _eval_expansion(args, meta)
    scored = score_edges(dataset, params, expansion, r=r)
    clusters = merge_links(scored, args.tau, dataset.n)
    clustering_to_tsv(clusters, args.out)
    print(args.out)
    return EXIT_OK


def cmd_matrix(args) -> int:
    spec = harness.load_experiment_spec(args.config)
    report = harness.run_matrix(spec, args.out, spec_dir=Path(args.config).parent)
    print(harness.format_report_table(report))
    return EXIT_PARTIAL if report.get("failed_cells") else EXIT_OK


def cmd_sweep_gamma(args) -> int:
    spec = harness.load_experiment_spec(args.config)
    gammas = [float(g) for g in args.gammas.split(",")]
    rows = harness.sweep_gamma(spec, gammas, args.out, spec_dir=Path(args.config).parent)
    for row in rows:
        print(f"gamma={row['gamma']}\t{row['method']}\tAP={row['ap_mean']:.4f}")
    return EXIT_OK


def cmd_report(args) -> int:
    report_path = Path(args.out) / "report.json"
    if not report_path.exists():
        raise ConfigError(f"no report.json under {args.out}; run `matrix` first")
    report = json.loads(report_path.read_text())
    print(harness.format_report_table(report))
    return EXIT_PARTIAL if report.get("failed_cells") else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linkgcn")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--config", default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--deterministic", action="store_true")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("synth", help="generate a synthetic embedding set")
    common(p)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("subset", help="build an (m, n) imbalanced subset")
    p.add_argument("manifest")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    common(p)
    p.set_defaults(fn=cmd_subset)

    p = sub.add_parser("train", help="train a linkage model")
    p.add_argument("manifest")
    common(p)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="edge AP + tau-swept BCubed report")
    p.add_argument("manifest")
    p.add_argument("checkpoint")
    p.add_argument("--method", default=None)
    common(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("cluster", help="threshold link scores into clusters")
    p.add_argument("manifest")
    p.add_argument("checkpoint")
    p.add_argument("--tau", type=float, default=0.5)
    common(p)
    p.set_defaults(fn=cmd_cluster)

    p = sub.add_parser("matrix", help="run the (dataset x method x seed) grid")
    common(p)
    p.set_defaults(fn=cmd_matrix)

    p = sub.add_parser("sweep-gamma", help="AP vs expansion coefficient sweep")
    p.add_argument("--gammas", default="1.0,1.2,1.5,2.0")
    common(p)
    p.set_defaults(fn=cmd_sweep_gamma)

    p = sub.add_parser("report", help="re-render a matrix report")
    common(p)
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    required = {
        "synth": ["config", "out"],
        "train": ["out"],
        "matrix": ["config", "out"],
        "sweep-gamma": ["config", "out"],
        "report": ["out"],
        "subset": ["out"],
        "cluster": ["out"],
    }
    if getattr(args, "threads", None):
        try:
            import numba

            numba.set_num_threads(args.threads)
        except (ImportError, ValueError):
            pass
    try:
        for field in required.get(args.command, []):
            if getattr(args, field.replace("-", "_"), None) is None:
                raise ConfigError(f"--{field} is required for {args.command}")
        return args.fn(args)
    except (ConfigError, DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
