"""Noisy uplink CSI via element-wise LMMSE estimation.

The pilot observation is modelled as ``y = h + n`` with circular complex
Gaussian noise of per-element variance ``channel_power / snr``.  With a scalar
prior of variance ``channel_power`` on each entry the LMMSE estimate is the
shrinkage ``snr / (1 + snr) * y``.  A full-covariance estimator would replace
:func:`shrinkage_factor` with a matrix filter; nothing else changes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel_model import ChannelVector


class EstimationConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EstimationConfig:
    snr_db: float = 25.0
    channel_power: float = 1.0
    # perfect=True bypasses noise entirely (ablation mode).
    perfect: bool = False

    def __post_init__(self):
        if not self.channel_power > 0:
            raise EstimationConfigError(f"channel_power must be > 0, got {self.channel_power}")
        if math.isnan(self.snr_db):
            raise EstimationConfigError("snr_db is NaN")

    @property
    def noiseless(self) -> bool:
        return self.perfect or self.snr_db == math.inf

    @property
    def snr_linear(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def noise_variance(self) -> float:
        return 0.0 if self.noiseless else self.channel_power / self.snr_linear


def shrinkage_factor(cfg: EstimationConfig) -> float:
    if cfg.noiseless:
        return 1.0
    g = cfg.snr_linear
    return g / (1.0 + g)


def complex_noise(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    """Circular complex Gaussian with ``E|n|^2 = variance``."""
    s = np.sqrt(variance / 2)
    return s * rng.standard_normal(shape) + 1j * s * rng.standard_normal(shape)


def estimate_array(h: np.ndarray, cfg: EstimationConfig, rng: np.random.Generator) -> np.ndarray:
    """LMMSE estimate for a raw complex array of any shape."""
    if cfg.noiseless:
        return np.array(h, dtype=np.complex128, copy=True)
    y = h + complex_noise(rng, np.shape(h), cfg.noise_variance)
    return shrinkage_factor(cfg) * y


def estimate_uplink(h: ChannelVector, cfg: EstimationConfig, rng: np.random.Generator) -> ChannelVector:
    return ChannelVector(h.carrier_frequency, estimate_array(h.coefficients, cfg, rng))
