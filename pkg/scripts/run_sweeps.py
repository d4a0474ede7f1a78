"""Run the angular-spread, frequency-gap and path-count sweeps to CSV.

    python scripts/run_sweeps.py --preset desk --out runs/sweeps
    python scripts/run_sweeps.py --preset desk --only freq_diff --grid 10,60,120
"""
import argparse
import pathlib
import time

from scnet.config import load_config
from scnet.evaluation import CONTROLS, SweepSpec, run_sweep, write_sweep_csv

GRIDS = {"angular_spread": "angular_spread_grid", "freq_diff": "freq_diff_grid", "path_count": "path_count_grid"}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="desk", choices=("paper", "desk"))
    ap.add_argument("--only", choices=CONTROLS)
    ap.add_argument("--grid", help="comma-separated values replacing the preset grid")
    ap.add_argument("--models", default="scnet,fnn")
    ap.add_argument("--out", default="runs/sweeps")
    args = ap.parse_args()

    cfg = load_config(None, args.preset)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for control in [args.only] if args.only else CONTROLS:
        grid = tuple(float(v) for v in args.grid.split(",")) if args.grid else getattr(cfg, GRIDS[control])
        spec = SweepSpec(control, tuple(grid), cfg, cfg.sweep_seeds(), tuple(args.models.split(",")))
        t0 = time.perf_counter()
        result = run_sweep(spec, workers=cfg.workers)
        write_sweep_csv(result, out / f"{control}.csv")
        for r in result.rows:
            print(f"{control}={r.control_value:g} {r.model}: {r.mean_nmse:.4f} +/- {r.std_nmse:.4f}")
        print(f"{control}: {time.perf_counter() - t0:.0f} s")


if __name__ == "__main__":
    main()
