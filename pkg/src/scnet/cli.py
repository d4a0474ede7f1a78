"""``scnet`` command line: generate | train | eval | sweep | flops.

Settings come from a preset (``--preset``), then an optional config file
(``--config``), then ``--seed`` and ``--set key=value`` flags, then the
``SCNET_WORKERS`` environment variable.

Exit codes: 0 success, 2 configuration error, 3 I/O or file-format error,
4 training diverged.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys

from .baseline_fnn import build_fnn, fnn_sizes, load_fnn, save_fnn
from .config import ConfigError, RunConfig, load_config, parse_override
from .cvnn import COMPLEX_MAGIC, REAL_MAGIC, WeightFileError, init_network, load_network, save_network
from .dataset import DatasetError, generate_dataset, load_dataset, save_dataset, split
from .evaluation import CONTROLS, SweepSpec, flops, run_sweep, write_sweep_csv
from .optim import TrainingDiverged, evaluate, train, write_metrics_csv
from .seeding import derive_rng

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DIVERGED = 4

log = logging.getLogger("scnet")


def cmd_generate(cfg: RunConfig, out_path) -> None:
    ds = generate_dataset(cfg.num_samples, cfg.gen_params(), cfg.seed, workers=cfg.workers)
    save_dataset(ds, out_path)
    print(f"wrote {ds.meta.count} samples (M={ds.meta.num_antennas}, scale={ds.meta.scale:.6g}) to {out_path}")


def _build_model(kind: str, cfg: RunConfig, m: int):
    rng = derive_rng(cfg.seed, "init")
    if kind == "scnet":
        return init_network((m, *cfg.hidden, m), rng)
    return build_fnn(m, rng, cfg.hidden)


def cmd_train(cfg: RunConfig, dataset_path, model_out, metrics_out=None, kind: str = "scnet") -> list:
    ds = load_dataset(dataset_path)
    train_ds, eval_ds = split(ds, cfg.train_fraction)
    net = _build_model(kind, cfg, ds.meta.num_antennas)

    def report(r):
        log.info("epoch %d train_loss=%.6g eval_nmse=%.6g", r.epoch, r.train_loss, r.eval_nmse)

    net, metrics = train(net, train_ds, eval_ds, cfg.train_config(cfg.seed), on_epoch=report)
    (save_network if kind == "scnet" else save_fnn)(net, model_out)
    if metrics_out:
        write_metrics_csv(metrics_out, metrics)
    last = metrics[-1]
    print(f"trained {kind} for {last.epoch} epochs: train_loss={last.train_loss:.6g} eval_nmse={last.eval_nmse:.6g}")
    return metrics


def load_model(path):
    with open(path, "rb") as fh:
        magic = fh.read(8)
    if magic == COMPLEX_MAGIC:
        return load_network(path)
    if magic == REAL_MAGIC:
        return load_fnn(path)
    raise WeightFileError(f"{path}: unrecognised weight-file magic {magic!r}")


def cmd_eval(cfg: RunConfig, dataset_path, model_path, whole: bool = False) -> float:
    ds = load_dataset(dataset_path)
    target = ds if whole else split(ds, cfg.train_fraction)[1]
    net = load_model(model_path)
    _, value = evaluate(net, target)
    print(f"nmse={value!r} nmse_db={10 * math.log10(value):.4f} samples={len(target)}")
    return value


def cmd_sweep(cfg: RunConfig, sweep_name: str, out_csv) -> None:
    grid = {
        "angular_spread": cfg.angular_spread_grid,
        "freq_diff": cfg.freq_diff_grid,
        "path_count": cfg.path_count_grid,
    }[sweep_name]
    spec = SweepSpec(sweep_name, tuple(grid), cfg, cfg.sweep_seeds(), tuple(cfg.models))
    result = run_sweep(spec, workers=cfg.workers)
    write_sweep_csv(result, out_csv)
    for r in result.rows:
        print(f"{r.control_name}={r.control_value:g} {r.model}: nmse={r.mean_nmse:.6g} +/- {r.std_nmse:.3g}")


def cmd_flops(cfg: RunConfig) -> dict:
    c_sizes = cfg.scnet_sizes
    r_sizes = fnn_sizes(cfg.num_antennas, cfg.hidden)
    out = {"scnet": flops(c_sizes, True), "fnn": flops(r_sizes, False)}
    print(f"scnet sizes={c_sizes} flops={out['scnet']}")
    print(f"fnn   sizes={r_sizes} flops={out['fnn']}")
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--preset", choices=("paper", "desk"), default="paper")
    common.add_argument("--seed", type=int, help="master seed (u64)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key, e.g. --set train.epochs=10")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="scnet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="simulate a dataset file")
    g.add_argument("--out", required=True)

    t = sub.add_parser("train", parents=[common], help="train a model on a dataset file")
    t.add_argument("dataset")
    t.add_argument("--out", required=True, help="weight file to write")
    t.add_argument("--metrics", help="per-epoch CSV to write")
    t.add_argument("--model", choices=("scnet", "fnn"), default="scnet")

    e = sub.add_parser("eval", parents=[common], help="NMSE of a trained model")
    e.add_argument("dataset")
    e.add_argument("model")
    e.add_argument("--all", action="store_true", help="evaluate on every sample, not only the test split")

    s = sub.add_parser("sweep", parents=[common], help="NMSE sweep -> CSV")
    s.add_argument("name", choices=CONTROLS)
    s.add_argument("--out", required=True)

    sub.add_parser("flops", parents=[common], help="complexity report")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = dict(parse_override(item) for item in args.set)
        if args.seed is not None:
            overrides["seed"] = args.seed
        cfg = load_config(args.config, args.preset, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        if args.command == "generate":
            cmd_generate(cfg, args.out)
        elif args.command == "train":
            cmd_train(cfg, args.dataset, args.out, args.metrics, args.model)
        elif args.command == "eval":
            cmd_eval(cfg, args.dataset, args.model, args.all)
        elif args.command == "sweep":
            cmd_sweep(cfg, args.name, args.out)
        else:
            cmd_flops(cfg)
    except TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, DatasetError, WeightFileError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
