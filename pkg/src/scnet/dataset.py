"""Paired (estimated uplink CSI -> true downlink CSI) sample sets.

Samples are stored as two ``(count, M)`` complex128 arrays rather than a list
of pair objects; ``ds[i]`` still hands back a :class:`SamplePair`.
"""
from __future__ import annotations

import math
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .channel_model import (
    ArrayConfig,
    Scenario,
    ScenarioParams,
    UPLINK_FREQ,
    _synthesize,
    draw_ray_arrays,
    sample_scenario,
)
from .estimation import EstimationConfig, estimate_array
from .seeding import derive_rng

MAGIC = b"SCNETDS1"
VERSION = 1
_HEADER = struct.Struct("<8sIIQdddIddQ")


class DatasetError(Exception):
    pass


class DatasetFormatError(DatasetError):
    """File is not a dataset file (bad magic)."""


class DatasetVersionError(DatasetError):
    pass


class DatasetTruncatedError(DatasetError):
    pass


class SplitError(DatasetError, ValueError):
    pass


@dataclass(frozen=True)
class SamplePair:
    input: np.ndarray
    label: np.ndarray


@dataclass(frozen=True)
class DatasetMeta:
    num_antennas: int
    f_up: float
    f_down: float
    angular_spread: float
    num_paths: int
    snr_db: float
    scale: float
    master_seed: int
    count: int


@dataclass(frozen=True)
class GenParams:
    array: ArrayConfig = field(default_factory=ArrayConfig)
    scenario: ScenarioParams = field(default_factory=ScenarioParams)
    f_up: float = UPLINK_FREQ
    f_down: float = UPLINK_FREQ + 120e6
    estimation: EstimationConfig = field(default_factory=EstimationConfig)
    label_noise: bool = False

    def __post_init__(self):
        if not (self.f_up > 0 and self.f_down > 0):
            raise ValueError("carrier frequencies must be > 0")


@dataclass
class Dataset:
    inputs: np.ndarray
    labels: np.ndarray
    meta: DatasetMeta

    def __post_init__(self):
        if self.inputs.shape != self.labels.shape or self.inputs.ndim != 2:
            raise DatasetError(f"inputs {self.inputs.shape} and labels {self.labels.shape} must be equal (count, M)")
        if self.inputs.shape != (self.meta.count, self.meta.num_antennas):
            raise DatasetError("sample arrays disagree with meta (count, M)")

    def __len__(self):
        return self.inputs.shape[0]

    def __getitem__(self, i) -> SamplePair:
        return SamplePair(self.inputs[i], self.labels[i])

    def denormalized(self) -> tuple[np.ndarray, np.ndarray]:
        s = self.meta.scale
        return self.inputs * s, self.labels * s


def _raw_sample(params: GenParams, master_seed: int, index: int):
    rng = derive_rng(master_seed, "sample", index)
    _, _, alpha, phi, tau, doa = draw_ray_arrays(rng, params.scenario)
    h_up = _synthesize(params.array, alpha, phi, tau, doa, params.f_up)
    h_down = _synthesize(params.array, alpha, phi, tau, doa, params.f_down)
    x = estimate_array(h_up, params.estimation, rng)
    if params.label_noise:
        h_down = estimate_array(h_down, params.estimation, rng)
    return x, h_down


def _raw_chunk(args):
    params, master_seed, start, stop = args
    m = params.array.num_antennas
    xs = np.empty((stop - start, m), dtype=np.complex128)
    ys = np.empty_like(xs)
    for k, i in enumerate(range(start, stop)):
        xs[k], ys[k] = _raw_sample(params, master_seed, i)
    return xs, ys


def regenerate_scenario(params: GenParams, master_seed: int, index: int) -> Scenario:
    """Rebuild the ray set behind sample ``index`` of a generated dataset."""
    return sample_scenario(derive_rng(master_seed, "sample", index), params.scenario)


def generate_dataset(count: int, params: GenParams, master_seed: int, workers: int = 1,
                     scale: float | None = None) -> Dataset:
    """Simulate ``count`` samples and normalise them by one global RMS scale.

    The scale is the RMS of all label entries unless ``scale`` is given (used
    to put deployment sets on the training set's scale).

    Sample ``i`` draws everything (rays, then estimation noise) from its own
    stream derived from ``(master_seed, "sample", i)``, so the result does not
    depend on ``workers``.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    workers = max(1, int(workers))
    if workers == 1 or count < 2 * workers:
        xs, ys = _raw_chunk((params, master_seed, 0, count))
    else:
        bounds = np.linspace(0, count, workers + 1).astype(int)
        jobs = [(params, master_seed, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_raw_chunk, jobs))
        xs = np.concatenate([p[0] for p in parts])
        ys = np.concatenate([p[1] for p in parts])

    if scale is None:
        scale = float(np.sqrt(np.mean(np.abs(ys) ** 2)))
    if not scale > 0:
        raise DatasetError("labels have zero power; cannot normalise")
    meta = DatasetMeta(
        num_antennas=params.array.num_antennas,
        f_up=params.f_up,
        f_down=params.f_down,
        angular_spread=params.scenario.angular_spread,
        num_paths=params.scenario.num_paths,
        snr_db=math.inf if params.estimation.noiseless else params.estimation.snr_db,
        scale=scale,
        master_seed=int(master_seed),
        count=count,
    )
    return Dataset(xs / scale, ys / scale, meta)


def split(ds: Dataset, train_fraction: float) -> tuple[Dataset, Dataset]:
    """Order-preserving head/tail split."""
    if not 0 < train_fraction < 1:
        raise SplitError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = len(ds)
    n_train = int(round(n * train_fraction))
    if n_train == 0 or n_train == n:
        raise SplitError(f"split of {n} samples at {train_fraction} leaves one side empty")
    head = Dataset(ds.inputs[:n_train], ds.labels[:n_train], replace(ds.meta, count=n_train))
    tail = Dataset(ds.inputs[n_train:], ds.labels[n_train:], replace(ds.meta, count=n - n_train))
    return head, tail


def save_dataset(ds: Dataset, path) -> None:
    m = ds.meta
    header = _HEADER.pack(
        MAGIC, VERSION, m.num_antennas, m.count, m.f_up, m.f_down,
        m.angular_spread, m.num_paths, m.snr_db, m.scale, m.master_seed,
    )
    payload = np.stack([ds.inputs, ds.labels], axis=1).astype("<c16", copy=False)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def load_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 8 or raw[:8] != MAGIC:
        raise DatasetFormatError(f"{os.fspath(path)}: not a dataset file (magic {raw[:8]!r})")
    if len(raw) < _HEADER.size:
        raise DatasetTruncatedError(f"{os.fspath(path)}: header truncated")
    (_, version, m_ant, count, f_up, f_down, spread, paths,
     snr_db, scale, seed) = _HEADER.unpack_from(raw)
    if version != VERSION:
        raise DatasetVersionError(f"{os.fspath(path)}: version {version}, expected {VERSION}")
    need = count * 2 * m_ant * 16
    body = raw[_HEADER.size:]
    if len(body) < need:
        raise DatasetTruncatedError(f"{os.fspath(path)}: payload has {len(body)} bytes, header declares {need}")
    if len(body) > need:
        raise DatasetFormatError(f"{os.fspath(path)}: {len(body) - need} trailing bytes after payload")
    arr = np.frombuffer(body, dtype="<c16").reshape(count, 2, m_ant).astype(np.complex128)
    meta = DatasetMeta(m_ant, f_up, f_down, spread, paths, snr_db, scale, seed, count)
    return Dataset(np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1]), meta)
