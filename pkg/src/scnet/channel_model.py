"""Multipath ULA channel synthesis.

A channel at carrier ``f`` is the superposition of ``P`` rays, each
contributing ``alpha * exp(-j 2 pi f tau + j phi) * a(theta)`` where
``a(theta)`` is the uniform-linear-array manifold vector.  Uplink and
downlink channels of one user share the same ray set; only ``f`` differs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
UPLINK_FREQ = 2.5e9


class ChannelConfigError(ValueError):
    """Invalid array or carrier configuration."""


class ScenarioError(ValueError):
    """Invalid scenario or scenario-distribution parameters."""


@dataclass(frozen=True)
class ArrayConfig:
    num_antennas: int = 128
    antenna_spacing: float = SPEED_OF_LIGHT / (2 * UPLINK_FREQ)
    speed_of_light: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ChannelConfigError(f"num_antennas must be >= 1, got {self.num_antennas}")
        if not self.antenna_spacing > 0:
            raise ChannelConfigError(f"antenna_spacing must be > 0, got {self.antenna_spacing}")

    @classmethod
    def half_wavelength(cls, num_antennas: int, freq: float = UPLINK_FREQ) -> "ArrayConfig":
        return cls(num_antennas=num_antennas, antenna_spacing=SPEED_OF_LIGHT / (2 * freq))


@dataclass(frozen=True)
class Ray:
    attenuation: float
    phase: float
    delay: float
    doa: float

    def __post_init__(self):
        if self.attenuation < 0:
            raise ScenarioError(f"attenuation must be >= 0, got {self.attenuation}")
        if self.delay < 0:
            raise ScenarioError(f"delay must be >= 0, got {self.delay}")
        if not -np.pi <= self.phase < np.pi:
            raise ScenarioError(f"phase must lie in [-pi, pi), got {self.phase}")


@dataclass(frozen=True)
class Scenario:
    """A user's propagation state: rays plus the (mean DOA, AS, distance) that generated them."""

    rays: tuple[Ray, ...]
    mean_doa: float
    angular_spread: float
    distance: float = 0.0

    def __post_init__(self):
        if len(self.rays) == 0:
            raise ScenarioError("scenario needs at least one ray")
        if self.angular_spread < 0:
            raise ScenarioError("angular_spread must be >= 0")
        half = self.angular_spread / 2
        tol = 1e-12 * max(1.0, abs(self.mean_doa))
        for r in self.rays:
            if abs(r.doa - self.mean_doa) > half + tol:
                raise ScenarioError(f"ray DOA {r.doa} outside mean_doa +/- angular_spread/2")

    @property
    def num_paths(self) -> int:
        return len(self.rays)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Return (attenuation, phase, delay, doa) as float64 arrays of length P."""
        a = np.array([[r.attenuation, r.phase, r.delay, r.doa] for r in self.rays], dtype=np.float64)
        return a[:, 0], a[:, 1], a[:, 2], a[:, 3]


@dataclass(frozen=True)
class ChannelVector:
    carrier_frequency: float
    coefficients: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.coefficients)


@dataclass(frozen=True)
class ScenarioParams:
    """Distribution settings for :func:`sample_scenario`. Angles in radians."""

    num_paths: int = 200
    angular_spread: float = np.deg2rad(5.0)
    doa_sector: tuple[float, float] = (np.deg2rad(-60.0), np.deg2rad(60.0))
    max_delay: float = 1e-4
    rayleigh_scale: float | None = None
    distance_range: tuple[float, float] = (10.0, 500.0)

    def __post_init__(self):
        if self.num_paths < 1:
            raise ScenarioError(f"num_paths must be >= 1, got {self.num_paths}")
        if self.angular_spread < 0:
            raise ScenarioError(f"angular_spread must be >= 0, got {self.angular_spread}")
        if self.max_delay < 0:
            raise ScenarioError(f"max_delay must be >= 0, got {self.max_delay}")
        if self.doa_sector[0] > self.doa_sector[1]:
            raise ScenarioError("doa_sector must be (low, high) with low <= high")

    @property
    def scale(self) -> float:
        # Rayleigh E[alpha^2] = 2 sigma^2; pick sigma so that sum over paths has unit mean power.
        if self.rayleigh_scale is not None:
            return self.rayleigh_scale
        return np.sqrt(1.0 / (2 * self.num_paths))


def _check_freq(f):
    if not np.all(np.asarray(f) > 0):
        raise ChannelConfigError(f"carrier frequency must be > 0, got {f}")


def steering_vector(cfg: ArrayConfig, f: float, theta) -> np.ndarray:
    """ULA manifold vector(s) ``exp(-j chi m sin(theta))`` with ``chi = 2 pi d f / c``.

    ``theta`` may be a scalar (returns shape ``(M,)``) or an array of shape
    ``(P,)`` (returns shape ``(M, P)``, one column per angle).
    """
    _check_freq(f)
    chi = 2 * np.pi * cfg.antenna_spacing * f / cfg.speed_of_light
    m = np.arange(cfg.num_antennas, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    phase = -chi * np.multiply.outer(m, np.sin(theta))
    return np.exp(1j * phase)


def _path_gains(alpha, phi, tau, f):
    # 2 pi f tau reaches ~1e6 rad; keep it a separate factor so its range reduction
    # happens inside sin/cos (exact) rather than in a float sum with phi.
    delay_phase = 2 * np.pi * f * tau
    return alpha * np.exp(1j * phi) * (np.cos(delay_phase) - 1j * np.sin(delay_phase))


def synthesize_channel(cfg: ArrayConfig, scenario: Scenario, f: float) -> ChannelVector:
    _check_freq(f)
    alpha, phi, tau, doa = scenario.as_arrays()
    return ChannelVector(f, _synthesize(cfg, alpha, phi, tau, doa, f))


def _synthesize(cfg, alpha, phi, tau, doa, f):
    return steering_vector(cfg, f, doa) @ _path_gains(alpha, phi, tau, f)


def channel_pair(cfg: ArrayConfig, scenario: Scenario, f_up: float, f_down: float
                 ) -> tuple[ChannelVector, ChannelVector]:
    """Uplink and downlink channels built from one shared ray list."""
    return synthesize_channel(cfg, scenario, f_up), synthesize_channel(cfg, scenario, f_down)


def draw_ray_arrays(rng: np.random.Generator, params: ScenarioParams):
    """Draw one scenario as raw arrays: ``(mean_doa, distance, alpha, phi, tau, doa)``.

    Draw order is fixed so a seed pins down the result bit for bit.  This is
    the fast path used for bulk dataset generation; :func:`sample_scenario`
    wraps it into a validated :class:`Scenario`.
    """
    theta = rng.uniform(*params.doa_sector)
    distance = rng.uniform(*params.distance_range)
    p = params.num_paths
    alpha = rng.rayleigh(params.scale, size=p)
    phi = rng.uniform(-np.pi, np.pi, size=p)
    tau = rng.uniform(0.0, params.max_delay, size=p)
    half = params.angular_spread / 2
    doa = rng.uniform(theta - half, theta + half, size=p) if half > 0 else np.full(p, theta)
    # uniform(-pi, pi) can round up to exactly pi
    phi = np.where(phi >= np.pi, -np.pi, phi)
    return theta, distance, alpha, phi, tau, doa


def sample_scenario(rng: np.random.Generator, params: ScenarioParams) -> Scenario:
    theta, distance, alpha, phi, tau, doa = draw_ray_arrays(rng, params)
    rays = tuple(Ray(float(a), float(ph), float(t), float(d)) for a, ph, t, d in zip(alpha, phi, tau, doa))
    return Scenario(rays, float(theta), float(params.angular_spread), float(distance))
