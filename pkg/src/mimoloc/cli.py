"""Command line front end.

Subcommands: generate (synthesize a dataset file), run (train all branches
and write report/loss/CDF CSVs plus figures), spatialcorr (channel
correlation against transmitter separation), inspect (print a dataset
header). Exit codes: 0 success, 1 training or internal failure, 2 invalid
configuration or unreadable input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import configio, pipeline, plots, storage
from .channel import generate_dataset, plan_positions
from .neuralnet import TrainingDiverged


def _load(args) -> configio.ExperimentConfig:
    seed = getattr(args, "seed", None)
    if args.config is None:
        cfg = configio.config_from_pairs({}, seed_override=seed)
    else:
        cfg = configio.load_config(args.config, seed_override=seed)
    return configio.with_overrides(
        cfg,
        fraction=getattr(args, "fraction", None),
        strategy=getattr(args, "split", None),
        literal_cov=True if getattr(args, "literal_cov", False) else None,
        out=getattr(args, "out", None),
    )


def _dataset_path(cfg, default_name="dataset.bin") -> Path:
    if cfg.run.dataset is not None:
        return Path(cfg.run.dataset)
    return Path(cfg.run.out or ".") / default_name


def cmd_generate(args) -> int:
    cfg = _load(args)
    plan_positions(cfg.plan, room=cfg.scene.room)    # fail fast on bad geometry
    dataset = generate_dataset(cfg.scene, cfg.plan)
    path = _dataset_path(cfg)
    path.parent.mkdir(parents=True, exist_ok=True)
    size = storage.save_dataset(path, dataset)
    t, m, n = dataset.dims
    print(f"wrote {path}: T={t} M={m} N={n} ({size} bytes)")
    return 0


def cmd_run(args) -> int:
    cfg = _load(args)
    path = _dataset_path(cfg)
    if not path.exists():
        raise configio.ConfigError(f"dataset not found: {path}")
    dataset = storage.load_dataset(path, scene=cfg.scene)
    out = Path(cfg.run.out or "out")
    out.mkdir(parents=True, exist_ok=True)

    plan = pipeline.SplitPlan(train_fraction=cfg.run.train_fraction,
                              strategy=cfg.run.strategy,
                              seed=configio.derive_seeds(cfg.run.seed)["split_seed"])
    train_configs = {k: cfg.train for k in cfg.run.kinds}
    alpha, run, report = pipeline.run_experiment(
        dataset, plan, train_configs, l_bins=cfg.run.l_bins,
        kinds=cfg.run.kinds, literal_cov=cfg.run.literal_cov,
        standardize=cfg.run.standardize, seed=cfg.run.seed)

    cfg_hash = storage.config_hash(configio.canonical_pairs(cfg))
    truth = dataset.positions[run.test_idx]
    storage.write_report_csv(out / "report.csv", truth, run.test_idx,
                             report.errors, report.percentiles, report.rho,
                             cfg_hash)
    for kind, history in run.loss_history.items():
        storage.write_loss_csv(out / f"loss_{kind}.csv", history)
        storage.save_model(out / f"model_{kind}.bin", run.models[kind])
    for method in report.methods:
        storage.write_cdf_csv(out / f"cdf_{method}.csv", report.cdf[method])
    if not getattr(args, "no_figures", False):
        plots.save_cdf_figure(out / "cdf.png", report.cdf,
                              wavelength=cfg.scene.wavelength)
        plots.save_loss_figure(out / "loss.png", run.loss_history)

    print(f"normalization alpha={alpha:.6g}  config_hash={cfg_hash}")
    for method in report.methods:
        p = report.percentiles[method]
        print(f"{method:>6}: median={p[50]:.4f} m  p90={p[90]:.4f} m  "
              f"p95={p[95]:.4f} m")
    if report.rho is not None:
        print(f"branch error correlation rho={report.rho:.4f}")
    return 0


def cmd_spatialcorr(args) -> int:
    cfg = _load(args)
    path = _dataset_path(cfg)
    if not path.exists():
        raise configio.ConfigError(f"dataset not found: {path}")
    dataset = storage.load_dataset(path, scene=cfg.scene)
    lam = cfg.scene.wavelength
    if args.max_delta is not None:
        grid = np.arange(0.0, args.max_delta + 1e-12, args.step or lam / 16)
    else:
        grid = np.arange(33) * lam / 16    # 0 to 2 wavelengths
    # first scan line is the uniformly spaced stretch
    idx = np.arange(min(cfg.plan.samples_per_line, dataset.n_snapshots))
    rows = pipeline.spatial_correlation(dataset, idx, grid)
    out = Path(cfg.run.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    storage.write_spatialcorr_csv(out / "spatialcorr.csv", rows, lam)
    if not getattr(args, "no_figures", False):
        plots.save_spatialcorr_figure(out / "spatialcorr.png", rows, lam)
    print(f"wrote {out / 'spatialcorr.csv'} ({len(rows)} separations)")
    return 0


def cmd_inspect(args) -> int:
    path = args.dataset
    if path is None:
        cfg = _load(args)
        path = _dataset_path(cfg)
    t, m, n = storage.read_header(path)
    size = Path(path).stat().st_size
    print(f"{path}: T={t} M={m} N={n} ({size} bytes)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimoloc",
        description="Synthetic massive MIMO channel datasets and "
                    "fingerprint-based positioning experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--out", help="output directory")

    g = sub.add_parser("generate", help="synthesize and write a dataset file")
    common(g)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="train branches and write reports")
    common(r)
    r.add_argument("--fraction", type=float, help="training fraction override")
    r.add_argument("--split", choices=("stride", "random"),
                   help="split strategy override")
    r.add_argument("--literal-cov", action="store_true", dest="literal_cov",
                   help="pack covariance by summed triangles (lossy)")
    r.add_argument("--no-figures", action="store_true", dest="no_figures",
                   help="skip PNG rendering")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("spatialcorr", help="channel correlation vs separation")
    common(s)
    s.add_argument("--max-delta", type=float, dest="max_delta",
                   help="largest separation in metres")
    s.add_argument("--step", type=float, help="grid step in metres")
    s.add_argument("--no-figures", action="store_true", dest="no_figures",
                   help="skip PNG rendering")
    s.set_defaults(func=cmd_spatialcorr)

    i = sub.add_parser("inspect", help="print a dataset file header")
    common(i)
    i.add_argument("dataset", nargs="?", help="dataset file path")
    i.set_defaults(func=cmd_inspect)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (configio.ConfigError, storage.FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
