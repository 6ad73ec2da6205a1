"""Command-line harness: prepare, features, relabel, sweep, report.

Every stage is independently runnable; feature extraction results are cached
under <out>/cache and shared between stages and reruns.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, parse_config
from .data import filter_binary
from .sweep import (
    emit_csv,
    emit_plot_data,
    iter_size_points,
    load_dataset,
    read_csv,
    run_experiment,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pqk-bench",
        description="Projected-quantum-kernel vs classical-feature benchmark harness",
    )
    parser.add_argument("--config", type=Path, default=None, help="key = value config file")
    parser.add_argument("--data-dir", type=Path, default=Path("data"), help="dataset directory")
    parser.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    parser.add_argument("--threads", type=int, default=1, help="feature-extraction workers")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("prepare", help="parse and filter the raw dataset, save an npz snapshot")
    sub.add_parser("features", help="compute and cache encoded features for every sweep size")
    sub.add_parser("relabel", help="compute geometric differences and relabeled targets")
    sub.add_parser("sweep", help="run the full sweep and write records CSV")
    sub.add_parser("report", help="summarize a records CSV into plot-data files")
    return parser


def _load_config(args) -> ExperimentConfig:
    if args.config is None:
        return ExperimentConfig()
    return parse_config(args.config)


def cmd_prepare(config: ExperimentConfig, args) -> None:
    train_raw, test_raw = load_dataset(config.dataset, args.data_dir)
    a, b = config.class_pair
    train = filter_binary(train_raw, a, b)
    test = filter_binary(test_raw, a, b)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"prepared_{config.dataset}.npz"
    np.savez_compressed(
        path,
        train_images=train.images,
        train_labels=train.labels,
        test_images=test.images,
        test_labels=test.labels,
        class_pair=np.array(config.class_pair),
    )
    print(f"{config.dataset}: kept {train.n} train / {test.n} test rows for classes {a} vs {b}")
    print(f"wrote {path}")


def cmd_features(config: ExperimentConfig, args) -> None:
    cache = args.out / "cache"
    for point in iter_size_points(config, args.data_dir, cache_dir=cache, n_jobs=args.threads):
        print(
            f"size {point.size}: cached {point.F_train.shape[0]} train and "
            f"{point.F_eval.shape[0]} eval feature rows ({point.F_train.shape[1]} columns)"
        )
    print(f"feature cache under {cache}")


def cmd_relabel(config: ExperimentConfig, args) -> None:
    cache = args.out / "cache"
    args.out.mkdir(parents=True, exist_ok=True)
    print("size  g        gamma_q   gamma_c   train_balance")
    for point in iter_size_points(config, args.data_dir, cache_dir=cache, n_jobs=args.threads):
        path = args.out / f"relabel_{config.dataset}_size{point.size}.npz"
        np.savez(
            path,
            y_train=point.y_train,
            y_eval=point.y_eval,
            g=point.g,
            gamma_q=point.gamma_q,
            gamma_c=point.gamma_c,
        )
        print(
            f"{point.size:<5d} {point.g:<8.3f} {point.gamma_q:<9.4f} {point.gamma_c:<9.4f} "
            f"{point.y_train.mean():.3f}"
        )


def cmd_sweep(config: ExperimentConfig, args) -> None:
    records = run_experiment(
        config,
        args.data_dir,
        cache_dir=args.out / "cache",
        n_jobs=args.threads,
        verbose=True,
    )
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"records_{config.dataset}.csv"
    emit_csv(records, path)
    print(f"wrote {len(records)} records to {path}")


def cmd_report(config: ExperimentConfig, args) -> None:
    path = args.out / f"records_{config.dataset}.csv"
    if not path.exists():
        raise FileNotFoundError(f"no records CSV at {path}; run the sweep first")
    records = read_csv(path)
    written = emit_plot_data(records, args.out)
    for p in written:
        print(f"wrote {p}")


COMMANDS = {
    "prepare": cmd_prepare,
    "features": cmd_features,
    "relabel": cmd_relabel,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    config = _load_config(args)
    try:
        COMMANDS[args.command](config, args)
    except (OSError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
