#!/usr/bin/env python3
"""
PVC-MC command line.

    python cli.py run   [--config cfg.json] [--paired-fraction F] [--repeats R] [--jobs J] ...
    python cli.py train [--config cfg.json] [--paired-fraction F] [--seed S] --out-dir DIR
    python cli.py eval  --true labels.csv --pred clusters.csv
    python cli.py synth --out-dir DIR [--clusters K] [--n N] [--dims 10,10] ...

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from config.experiment_config import (
    ExperimentConfig,
    SyntheticSource,
    apply_overrides,
    load_experiment_config,
)
from config.settings import load_settings
from src.clustering.spectral import dump_embedding
from src.data.dataset import load_labels, save_dataset
from src.experiment.report import FORMATS, emit_report, write_report_bundle
from src.experiment.runner import run_experiment, run_lambda_grid, run_pipeline
from src.impute.knn import dump_neighbors
from src.metrics.scores import acc, nmi
from src.training.persistence import save_result
from src.utils.errors import ConfigError, DatasetError, PVCMCError
from src.utils.logger import logger
from src.utils.validation import validate_experiment_config

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON experiment config")
    parser.add_argument("--paired-fraction", type=float, help="Fraction of fully observed samples")
    parser.add_argument("--seed", type=int, help="Base seed (mask and network initialization)")
    parser.add_argument("--k-latent", type=int, help="Latent dimension (default: number of clusters)")
    parser.add_argument("--clusters", type=int, help="Number of clusters K")
    parser.add_argument("--lambda1", type=float, help="Self-expression weight")
    parser.add_argument("--lambda2", type=float, help="Contrastive weight")
    parser.add_argument("--lambda3", type=float, help="Clustering-loss weight")
    parser.add_argument("--alpha", type=float, help="View-weight sharpness")
    parser.add_argument("--tau", type=float, help="Contrastive temperature")
    parser.add_argument("--knn-k", type=int, help="Neighbors used for imputation")
    parser.add_argument("--out-dir", help="Output directory (default: PVCMC_OUT_DIR)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pvc-mc", description="Partial multi-view clustering experiments")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Paired-fraction sweep with repeated seeds")
    _add_config_flags(run)
    run.add_argument("--repeats", type=int, help="Repeats per paired fraction")
    run.add_argument("--jobs", type=int, help="Cells to run in parallel (default: PVCMC_JOBS)")
    run.add_argument("--format", choices=FORMATS + ("all",), default="all", help="Report format")
    run.add_argument("--lambda-grid", action="store_true", help="Sweep lambda1=lambda2=lambda3 over the standard grid")

    train = commands.add_parser("train", help="Single training run; dumps Z, weights and history")
    _add_config_flags(train)
    train.add_argument("--dump-neighbors", action="store_true", help="Also write the imputation neighbor audit CSV")
    train.add_argument("--dump-embedding", action="store_true", help="Also write the spectral embedding CSV")

    evaluate = commands.add_parser("eval", help="ACC and NMI of a labeling against ground truth")
    evaluate.add_argument("--true", required=True, dest="true_path", help="Ground-truth labels file")
    evaluate.add_argument("--pred", required=True, dest="pred_path", help="Predicted labels file")

    synth = commands.add_parser("synth", help="Write a synthetic multi-view dataset")
    synth.add_argument("--out-dir", required=True)
    synth.add_argument("--clusters", type=int, default=3)
    synth.add_argument("--n", type=int, default=150)
    synth.add_argument("--dims", default="10,10", help="Comma-separated view dimensions")
    synth.add_argument("--separation", type=float, default=10.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--noise-view", type=int, help="View index replaced by pure noise")
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    config = load_experiment_config(args.config) if args.config else ExperimentConfig()
    return apply_overrides(config, {
        "paired_fraction": args.paired_fraction,
        "repeats": getattr(args, "repeats", None),
        "seed": args.seed,
        "k_latent": args.k_latent,
        "clusters": args.clusters,
        "lambda1": args.lambda1,
        "lambda2": args.lambda2,
        "lambda3": args.lambda3,
        "alpha": args.alpha,
        "tau": args.tau,
        "knn_k": args.knn_k,
    })


def _validated(config: ExperimentConfig) -> ExperimentConfig:
    is_valid, message = validate_experiment_config(config)
    if not is_valid:
        raise ConfigError(message)
    return config


def cmd_run(args: argparse.Namespace) -> int:
    settings = load_settings()
    config = _validated(_config_from_args(args))
    out_dir = Path(args.out_dir) if args.out_dir else settings.out_dir / "experiment"
    jobs = args.jobs or settings.jobs

    if args.lambda_grid:
        reports = [(f"lambda_{value:g}", report) for value, report in run_lambda_grid(config, jobs)]
    else:
        reports = [("", run_experiment(config, jobs))]

    complete = True
    for name, report in reports:
        target = out_dir / name if name else out_dir
        if args.format == "all":
            paths = write_report_bundle(report, target)
            print(f"Report written to {paths['markdown']}")
        else:
            print(f"Report written to {emit_report(report, target, args.format)}")
        complete = complete and report.complete
    return EXIT_OK if complete else EXIT_RUNTIME


def _train_fraction(args: argparse.Namespace, config: ExperimentConfig) -> float:
    """Paired fraction for a single run: the flag, else the config's first fraction, else fully paired."""
    if args.config or args.paired_fraction is not None:
        return config.paired_fractions[0]
    logger.info("train: no --config or --paired-fraction given, using paired fraction 1.0 (no imputation)")
    print("Paired fraction: 1.0 (default, no imputation)")
    return 1.0


def cmd_train(args: argparse.Namespace) -> int:
    settings = load_settings()
    config = _validated(_config_from_args(args))
    out_dir = Path(args.out_dir) if args.out_dir else settings.out_dir / "train"
    dataset = config.dataset.load(config.normalize)
    n_clusters = config.resolve_clusters(dataset)
    fraction = _train_fraction(args, config)

    output = run_pipeline(config, dataset, n_clusters, fraction, config.base_seed)
    save_result(output.result, out_dir)
    labels_path = out_dir / "labels.csv"
    labels_path.write_text("".join(f"{int(label)}\n" for label in output.clusters.labels), encoding="utf-8")
    if args.dump_neighbors and output.result.imputation is not None:
        dump_neighbors(output.result.imputation, out_dir / "neighbors.csv")
    if args.dump_embedding:
        dump_embedding(output.clusters.eigenvalues, output.clusters.embedding, out_dir / "embedding.csv")

    print(f"Saved result to {out_dir}")
    print(f"View weights: {np.round(output.result.weights.w, 4).tolist()}")
    if dataset.labels is not None:
        print(f"ACC={acc(dataset.labels, output.clusters.labels):.4f} NMI={nmi(dataset.labels, output.clusters.labels):.4f}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    y = load_labels(args.true_path)
    l = load_labels(args.pred_path)
    print(f"ACC={acc(y, l):.4f} NMI={nmi(y, l):.4f}")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    source = SyntheticSource(
        n_clusters=args.clusters,
        n=args.n,
        dims=tuple(int(d) for d in args.dims.split(",") if d.strip()),
        separation=args.separation,
        seed=args.seed,
        noise_view=args.noise_view,
    )
    print(f"Manifest written to {save_dataset(source.generate(), args.out_dir)}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "train": cmd_train, "eval": cmd_eval, "synth": cmd_synth}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on a bad flag; --help exits 0
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DatasetError) as e:
        logger.error(f"Configuration error: {e}")
        print(f"❌ Error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except PVCMCError as e:
        logger.exception(f"{args.command} failed")
        print(f"❌ Error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception(f"{args.command} failed with unexpected error")
        print(f"❌ Error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
