"""How the path-delay range limits uplink-to-downlink prediction.

For each maximum delay, trains SCNet at the desk preset and also fits the
best linear predictor of the downlink from the uplink estimate (least squares
on the training split). With delays drawn up to 1e-4 s, a 120 MHz gap gives
each path a downlink phase that is effectively independent of its uplink
phase, so both predictors fall to NMSE >= 1.

    python scripts/delay_spread_probe.py --delays 0,1e-9,1e-8,1e-4
"""
import argparse
from dataclasses import replace

import numpy as np

from scnet.config import DESK
from scnet.cvnn import init_network
from scnet.dataset import generate_dataset, split
from scnet.evaluation import nmse
from scnet.optim import train
from scnet.seeding import derive_rng


def linear_reference(tr, te) -> float:
    w = np.linalg.lstsq(tr.inputs, tr.labels, rcond=None)[0]
    return nmse(te.inputs @ w, te.labels)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--delays", default="0,1e-9,3e-9,1e-8,1e-4")
    ap.add_argument("--epochs", type=int, default=DESK.epochs)
    ap.add_argument("--no-train", action="store_true", help="linear reference only")
    args = ap.parse_args()

    print("max_delay  linear_nmse  scnet_nmse")
    for d in (float(x) for x in args.delays.split(",")):
        cfg = replace(DESK, max_delay=d, epochs=args.epochs)
        ds = generate_dataset(cfg.num_samples, cfg.gen_params(), cfg.seed, workers=cfg.workers)
        tr, te = split(ds, cfg.train_fraction)
        lin = linear_reference(tr, te)
        net_nmse = float("nan")
        if not args.no_train:
            net = init_network(cfg.scnet_sizes, derive_rng(cfg.seed, "init"))
            net_nmse = train(net, tr, te, cfg.train_config(cfg.seed))[1][-1].eval_nmse
        print(f"{d:9.1e}  {lin:11.4f}  {net_nmse:10.4f}", flush=True)


if __name__ == "__main__":
    main()
