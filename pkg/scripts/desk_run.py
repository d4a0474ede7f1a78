"""Train SCNet and the FNN baseline once at a preset; write per-epoch CSVs.

    python scripts/desk_run.py --preset desk --seed 0 --out runs/desk
"""
import argparse
import pathlib
import time

from scnet.baseline_fnn import train_fnn
from scnet.config import load_config
from scnet.cvnn import init_network, save_network
from scnet.dataset import generate_dataset, split
from scnet.optim import train, write_metrics_csv
from scnet.seeding import derive_rng


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="desk", choices=("paper", "desk"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--epochs", type=int)
    ap.add_argument("--out", default="runs/desk")
    args = ap.parse_args()

    overrides = {"seed": args.seed}
    if args.epochs:
        overrides["epochs"] = args.epochs
    cfg = load_config(None, args.preset, overrides)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    ds = generate_dataset(cfg.num_samples, cfg.gen_params(), cfg.seed, workers=cfg.workers)
    tr, te = split(ds, cfg.train_fraction)
    print(f"dataset: {len(tr)} train / {len(te)} test, M={cfg.num_antennas} ({time.perf_counter() - t0:.1f} s)")

    tcfg = cfg.train_config(cfg.seed)
    net, m = train(init_network(cfg.scnet_sizes, derive_rng(cfg.seed, "init")), tr, te, tcfg)
    save_network(net, out / "scnet.bin")
    write_metrics_csv(out / "scnet_metrics.csv", m)
    fnn, mf = train_fnn(tr, te, tcfg, cfg.hidden)
    write_metrics_csv(out / "fnn_metrics.csv", mf)
    for name, trace in (("scnet", m), ("fnn", mf)):
        print(f"{name}: untrained nmse {trace[0].eval_nmse:.4f} -> {trace[-1].eval_nmse:.4f}, "
              f"train loss {trace[0].train_loss:.4f} -> {trace[-1].train_loss:.4f}")
    print(f"done in {time.perf_counter() - t0:.0f} s")


if __name__ == "__main__":
    main()
