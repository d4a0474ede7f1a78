"""Run configuration: presets, ``key = value`` config files, flag overrides.

Config files are INI-style::

    [scenario]
    num_paths = 50
    angular_spread_deg = 10

Unknown sections or keys are rejected, and every error names the file line.
Angles are degrees here and radians everywhere else.
"""
from __future__ import annotations

import configparser
import dataclasses
import math
import os
import re
from dataclasses import dataclass, replace

import numpy as np

from .channel_model import SPEED_OF_LIGHT, ArrayConfig, ScenarioParams
from .dataset import GenParams
from .estimation import EstimationConfig
from .optim import TrainConfig
from .seeding import derive_seed_sequence


class ConfigError(ValueError):
    pass


# section -> field names; the field's default fixes its type
SECTIONS = {
    "array": ("num_antennas", "antenna_spacing"),
    "scenario": ("num_paths", "angular_spread_deg", "doa_sector_deg", "max_delay", "distance_range"),
    "carrier": ("f_up", "freq_diff_mhz"),
    "estimation": ("snr_db", "perfect_estimation", "label_noise", "channel_power"),
    "dataset": ("num_samples", "train_fraction"),
    "model": ("hidden",),
    "train": ("batch_size", "epochs", "lr", "shuffle"),
    "run": ("seed", "workers"),
    "sweep": ("num_seeds", "models", "angular_spread_grid", "freq_diff_grid", "path_count_grid"),
}


@dataclass(frozen=True)
class RunConfig:
    num_antennas: int = 128
    antenna_spacing: float | None = None  # None: half wavelength at f_up
    num_paths: int = 200
    angular_spread_deg: float = 10.0
    doa_sector_deg: tuple = (-60.0, 60.0)
    max_delay: float = 1e-4
    distance_range: tuple = (10.0, 500.0)
    f_up: float = 2.5e9
    freq_diff_mhz: float = 120.0
    snr_db: float = 25.0
    perfect_estimation: bool = False
    label_noise: bool = False
    channel_power: float = 1.0
    num_samples: int = 102_400
    train_fraction: float = 0.9
    hidden: tuple = (128, 64, 128)
    batch_size: int = 128
    epochs: int = 400
    lr: float = 1e-3
    shuffle: bool = True
    seed: int = 0
    workers: int = 1
    num_seeds: int = 3
    models: tuple = ("scnet", "fnn")
    angular_spread_grid: tuple = (5.0, 10.0, 15.0, 20.0, 25.0)
    freq_diff_grid: tuple = tuple(float(x) for x in range(10, 121, 10))
    path_count_grid: tuple = (50, 100, 150, 200, 250, 300)

    def __post_init__(self):
        try:
            self.gen_params()
            self.train_config(self.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if self.num_samples < 2:
            raise ConfigError("num_samples must be >= 2")
        if self.num_seeds < 1 or self.workers < 1:
            raise ConfigError("num_seeds and workers must be >= 1")
        if not self.hidden or min(self.hidden) < 1:
            raise ConfigError("hidden sizes must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in u64")

    @property
    def f_down(self) -> float:
        return self.f_up + self.freq_diff_mhz * 1e6

    @property
    def scnet_sizes(self) -> tuple:
        return (self.num_antennas, *self.hidden, self.num_antennas)

    def array_config(self) -> ArrayConfig:
        d = self.antenna_spacing if self.antenna_spacing is not None else SPEED_OF_LIGHT / (2 * self.f_up)
        return ArrayConfig(num_antennas=self.num_antennas, antenna_spacing=d)

    def gen_params(self) -> GenParams:
        return GenParams(
            array=self.array_config(),
            scenario=ScenarioParams(
                num_paths=self.num_paths,
                angular_spread=math.radians(self.angular_spread_deg),
                doa_sector=tuple(math.radians(a) for a in self.doa_sector_deg),
                max_delay=self.max_delay,
                distance_range=tuple(self.distance_range),
            ),
            f_up=self.f_up,
            f_down=self.f_down,
            estimation=EstimationConfig(snr_db=self.snr_db, channel_power=self.channel_power,
                                        perfect=self.perfect_estimation),
            label_noise=self.label_noise,
        )

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(batch_size=self.batch_size, epochs=self.epochs, lr=self.lr,
                           seed=seed, shuffle=self.shuffle)

    def sweep_seeds(self) -> tuple[int, ...]:
        """Per-repetition seeds hashed from the master seed (tag ``"sweep"``)."""
        return tuple(_u63(self.seed, "sweep", i) for i in range(self.num_seeds))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_text(self) -> str:
        """Serialise in the config-file format (round-trips through :func:`parse_config`)."""
        lines = []
        for section, keys in SECTIONS.items():
            lines.append(f"[{section}]")
            for k in keys:
                lines.append(f"{k} = {_format(getattr(self, k))}")
            lines.append("")
        return "\n".join(lines)


def _u63(master, tag, index) -> int:
    return int(derive_seed_sequence(master, tag, index).generate_state(1, np.uint64)[0] >> np.uint64(1))


PAPER = RunConfig()
DESK = RunConfig(
    num_antennas=32,
    num_paths=50,
    # the literal 1e-4 s draws make h(f_D) independent of h(f_U); see README
    max_delay=1e-9,
    num_samples=9216,
    train_fraction=8 / 9,
    epochs=200,
    path_count_grid=(25, 50, 100),
)
PRESETS = {"paper": PAPER, "desk": DESK}


def _format(v) -> str:
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(_format(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _convert(name: str, text: str):
    default = getattr(PAPER, name)
    field_type = {f.name: f.type for f in dataclasses.fields(RunConfig)}[name]
    text = text.strip()
    if name == "antenna_spacing":
        return None if text.lower() == "auto" else float(text)
    if isinstance(default, bool):
        low = text.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ValueError(f"expected a boolean, got {text!r}")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    if isinstance(default, tuple):
        items = [t.strip() for t in text.split(",") if t.strip()]
        if name == "models":
            return tuple(items)
        conv = int if name in ("hidden", "path_count_grid") else float
        return tuple(conv(t) for t in items)
    raise TypeError(f"unhandled field type {field_type}")


def _line_numbers(text: str) -> dict:
    """Map (section, key) -> 1-based line number."""
    where, section = {}, None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            where.setdefault((section, None), i)
            continue
        key = re.split(r"[=:]", s, maxsplit=1)[0].strip().lower()
        where[(section, key)] = i
    return where


def parse_config(text: str, base: RunConfig = PAPER, source: str = "<config>") -> RunConfig:
    """Apply a config file's keys on top of ``base``."""
    lines = _line_numbers(text)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    updates = {}
    for section in cp.sections():
        if section not in SECTIONS:
            raise ConfigError(f"{source}:{lines.get((section, None), '?')}: unknown section [{section}]")
        for key, value in cp.items(section):
            ln = lines.get((section, key), "?")
            if key not in SECTIONS[section]:
                raise ConfigError(f"{source}:{ln}: unknown key {key!r} in [{section}]")
            try:
                updates[key] = _convert(key, value)
            except ValueError as exc:
                raise ConfigError(f"{source}:{ln}: bad value for {key}: {exc}") from exc
    try:
        return replace(base, **updates)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path=None, preset: str = "paper", overrides: dict | None = None) -> RunConfig:
    """Preset, then file keys, then flag/env overrides."""
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    cfg = PRESETS[preset]
    if path is not None:
        with open(path) as fh:
            cfg = parse_config(fh.read(), cfg, source=os.fspath(path))
    if overrides:
        cfg = replace(cfg, **overrides)
    env = os.environ.get("SCNET_WORKERS")
    if env:
        try:
            cfg = replace(cfg, workers=int(env))
        except ValueError as exc:
            raise ConfigError(f"SCNET_WORKERS: {exc}") from exc
    return cfg


def parse_override(item: str) -> tuple[str, object]:
    """``section.key=value`` or ``key=value`` -> (field, converted value)."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not key=value")
    key, value = item.split("=", 1)
    key = key.strip().split(".")[-1]
    known = {k for keys in SECTIONS.values() for k in keys}
    if key not in known:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        return key, _convert(key, value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from exc
