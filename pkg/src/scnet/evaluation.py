"""NMSE metric, FLOPs counter and experiment sweeps."""
from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np

log = logging.getLogger(__name__)

CONTROLS = ("angular_spread", "freq_diff", "path_count")
MODELS = ("scnet", "fnn")


class DegenerateSampleWarning(UserWarning):
    pass


def nmse(pred, label) -> float:
    """Mean over samples of ``||label - pred||^2 / ||label||^2``.

    Samples whose label has zero norm are dropped with a warning; if every
    label is zero a ``ValueError`` is raised.
    """
    pred = np.atleast_2d(np.asarray(pred))
    label = np.atleast_2d(np.asarray(label))
    if pred.shape != label.shape:
        raise ValueError(f"pred {pred.shape} and label {label.shape} differ")
    den = np.sum(np.abs(label) ** 2, axis=-1)
    num = np.sum(np.abs(label - pred) ** 2, axis=-1)
    ok = den > 0
    if not np.all(ok):
        if not np.any(ok):
            raise ValueError("all label vectors have zero norm")
        warnings.warn(f"{np.sum(~ok)} zero-norm label(s) excluded from NMSE", DegenerateSampleWarning)
    return float(np.mean(num[ok] / den[ok]))


def flops(layer_sizes, is_complex: bool) -> int:
    """Multiplications in one forward pass; a complex multiply counts as 4 real ones."""
    sizes = [int(n) for n in layer_sizes]
    if len(sizes) < 2:
        raise ValueError("need at least two layer sizes")
    real = sum(a * b for a, b in zip(sizes[:-1], sizes[1:]))
    return 4 * real if is_complex else real


@dataclass(frozen=True)
class SweepSpec:
    control: str
    grid: tuple
    base: "RunConfig"  # noqa: F821
    seeds: tuple[int, ...] = (0, 1, 2)
    models: tuple[str, ...] = ("scnet",)

    def __post_init__(self):
        if self.control not in CONTROLS:
            raise ValueError(f"unknown control variable {self.control!r}; choose from {CONTROLS}")
        if len(self.grid) == 0:
            raise ValueError("sweep grid is empty")
        if len(self.seeds) == 0:
            raise ValueError("need at least one seed")
        bad = set(self.models) - set(MODELS)
        if bad:
            raise ValueError(f"unknown models {sorted(bad)}")


@dataclass(frozen=True)
class SweepRow:
    control_name: str
    control_value: float
    model: str
    mean_nmse: float
    std_nmse: float
    n_seeds: int
    n_test: int = 0
    diverged: int = 0


@dataclass
class SweepResult:
    rows: list[SweepRow]
    meta: dict = field(default_factory=dict)
    per_seed: dict = field(default_factory=dict)

    def row(self, value, model="scnet") -> SweepRow:
        for r in self.rows:
            if r.model == model and math.isclose(r.control_value, value):
                return r
        raise KeyError((value, model))


def _point_config(base, control, value):
    if control == "angular_spread":
        return replace(base, angular_spread_deg=float(value))
    if control == "freq_diff":
        return replace(base, freq_diff_mhz=float(value))
    return replace(base, num_paths=int(value))


def _train_model(kind, cfg, train_ds, test_ds, seed):
    from .baseline_fnn import train_fnn
    from .cvnn import init_network
    from .optim import train
    from .seeding import derive_rng

    tcfg = cfg.train_config(seed)
    if kind == "scnet":
        net = init_network(cfg.scnet_sizes, derive_rng(seed, "init"))
        return train(net, train_ds, test_ds, tcfg)
    return train_fnn(train_ds, test_ds, tcfg, cfg.hidden)


def _test_nmse(net, ds):
    from .optim import evaluate

    return evaluate(net, ds)[1]


def _run_point(job):
    """One (grid point, seed) job -> {model: [nmse per deployment value]}."""
    from .dataset import generate_dataset, split

    spec, value, seed = job
    cfg = _point_config(spec.base, spec.control, value) if spec.control != "path_count" else spec.base
    ds = generate_dataset(cfg.num_samples, cfg.gen_params(), seed)
    train_ds, test_ds = split(ds, cfg.train_fraction)
    deploy = {}
    if spec.control == "path_count":
        for p in spec.grid:
            pcfg = replace(cfg, num_paths=int(p))
            n_test = len(test_ds)
            # fresh users at the deployment path count, normalised with the training scale
            dep = generate_dataset(n_test, pcfg.gen_params(), _deploy_seed(seed, int(p)),
                                   scale=ds.meta.scale)
            deploy[float(p)] = dep
    else:
        deploy[float(value)] = test_ds
    out = {}
    for kind in spec.models:
        try:
            net, _ = _train_model(kind, cfg, train_ds, test_ds, seed)
            out[kind] = {v: _test_nmse(net, d) for v, d in deploy.items()}
        except Exception as exc:  # recorded per row, the sweep continues
            from .optim import TrainingDiverged

            if not isinstance(exc, TrainingDiverged):
                raise
            log.warning("point %s=%s seed %s (%s) diverged: %s", spec.control, value, seed, kind, exc)
            out[kind] = {v: math.nan for v in deploy}
    return out, {v: len(d) for v, d in deploy.items()}


def _deploy_seed(seed: int, paths: int) -> int:
    from .seeding import derive_seed_sequence

    return int(derive_seed_sequence(seed, "deploy", paths).generate_state(2, np.uint32).view(np.uint64)[0])


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Train from scratch per (grid point, seed) and aggregate test NMSE.

    For ``path_count`` the network is trained once per seed at the base
    configuration's path count and evaluated on fresh deployment sets at every
    grid value, without retraining.
    """
    if spec.control == "path_count":
        jobs = [(spec, None, s) for s in spec.seeds]
    else:
        jobs = [(spec, v, s) for v in spec.grid for s in spec.seeds]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_point, jobs))
    else:
        results = [_run_point(j) for j in jobs]

    per_seed: dict = {}
    n_test: dict = {}
    for (_, value, seed), (res, counts) in zip(jobs, results):
        for kind, vals in res.items():
            for v, e in vals.items():
                per_seed.setdefault((kind, v), {})[seed] = e
                n_test[v] = counts[v]

    rows = []
    for v in spec.grid:
        for kind in spec.models:
            vals = np.array([per_seed[(kind, float(v))][s] for s in spec.seeds])
            good = vals[np.isfinite(vals)]
            rows.append(SweepRow(
                control_name=spec.control,
                control_value=float(v),
                model=kind,
                mean_nmse=float(np.mean(good)) if good.size else math.nan,
                std_nmse=float(np.std(good)) if good.size else math.nan,
                n_seeds=int(good.size),
                n_test=n_test.get(float(v), 0),
                diverged=int(vals.size - good.size),
            ))
    meta = {"control": spec.control, "grid": list(spec.grid), "seeds": list(spec.seeds),
            "models": list(spec.models), "base": spec.base.to_dict()}
    return SweepResult(rows, meta, per_seed)


CSV_COLUMNS = ["control_name", "control_value", "model", "mean_nmse", "std_nmse", "n_seeds"]


def write_sweep_csv(result: SweepResult, path) -> None:
    """CSV rows plus a ``<path>.meta.json`` sidecar with the run metadata."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in result.rows:
            d = asdict(r)
            w.writerow([d["control_name"], repr(d["control_value"]), d["model"],
                        repr(d["mean_nmse"]), repr(d["std_nmse"]), d["n_seeds"]])
    with open(f"{path}.meta.json", "w") as fh:
        json.dump(result.meta, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
