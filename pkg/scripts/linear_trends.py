"""Trend of the best linear uplink-to-downlink predictor over AS and frequency gap.

A cheap, training-free reference for the sweep trends: fits least squares
on a large desk-preset dataset at each grid value.

    python scripts/linear_trends.py --samples 20000
"""
import argparse
from dataclasses import replace

import numpy as np

from scnet.config import DESK
from scnet.dataset import generate_dataset, split
from scnet.evaluation import nmse


def linear_nmse(cfg, n, seed=7) -> float:
    ds = generate_dataset(n, cfg.gen_params(), seed, workers=cfg.workers)
    tr, te = split(ds, 0.8)
    w = np.linalg.lstsq(tr.inputs, tr.labels, rcond=None)[0]
    return nmse(te.inputs @ w, te.labels)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--antennas", type=int, default=DESK.num_antennas)
    ap.add_argument("--paths", type=int, default=DESK.num_paths)
    args = ap.parse_args()
    base = replace(DESK, num_antennas=args.antennas, num_paths=args.paths)
    for a in (5.0, 10.0, 15.0, 20.0, 25.0):
        print(f"AS {a:4.0f} deg: {linear_nmse(replace(base, angular_spread_deg=a), args.samples):.4f}", flush=True)
    for f in (10.0, 40.0, 80.0, 120.0):
        print(f"df {f:4.0f} MHz: {linear_nmse(replace(base, freq_diff_mhz=f), args.samples):.4f}", flush=True)


if __name__ == "__main__":
    main()
