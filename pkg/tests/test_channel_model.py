import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from scnet.channel_model import (
    SPEED_OF_LIGHT,
    ArrayConfig,
    ChannelConfigError,
    Ray,
    Scenario,
    ScenarioError,
    ScenarioParams,
    channel_pair,
    sample_scenario,
    steering_vector,
    synthesize_channel,
)

F_UP = 2.5e9


def _brute_force_channel(cfg, scenario, f):
    """Per-antenna scalar loop over the multipath sum, no vector ops."""
    out = []
    chi = 2 * math.pi * cfg.antenna_spacing * f / cfg.speed_of_light
    for m in range(cfg.num_antennas):
        acc = 0j
        for r in scenario.rays:
            gain = r.attenuation * cmath.exp(-1j * 2 * math.pi * f * r.delay) * cmath.exp(1j * r.phase)
            acc += gain * cmath.exp(-1j * chi * m * math.sin(r.doa))
        out.append(acc)
    return np.array(out)


def _random_scenario(rng, p, spread=0.3):
    theta = rng.uniform(-1, 1)
    rays = tuple(
        Ray(rng.rayleigh(0.5), rng.uniform(-np.pi, np.pi), rng.uniform(0, 1e-4),
            theta + rng.uniform(-spread / 2, spread / 2))
        for _ in range(p)
    )
    return Scenario(rays, theta, spread)


angles = st.floats(-np.pi / 2, np.pi / 2)


class TestSteeringVector:
    def test_broadside_is_all_ones(self):
        cfg = ArrayConfig(num_antennas=16)
        np.testing.assert_array_equal(steering_vector(cfg, F_UP, 0.0), np.ones(16))

    def test_half_wavelength_endfire(self):
        cfg = ArrayConfig(num_antennas=2, antenna_spacing=SPEED_OF_LIGHT / (2 * F_UP))
        np.testing.assert_allclose(steering_vector(cfg, F_UP, np.pi / 2), [1, -1], atol=1e-12)

    @given(angles, st.floats(1e8, 1e11), st.integers(1, 64))
    def test_unit_modulus_and_first_entry(self, theta, f, m):
        a = steering_vector(ArrayConfig(num_antennas=m), f, theta)
        assert a.shape == (m,)
        assert a[0] == 1
        np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-12)

    @given(angles)
    def test_negated_angle_is_conjugate(self, theta):
        cfg = ArrayConfig(num_antennas=32)
        np.testing.assert_allclose(steering_vector(cfg, F_UP, -theta),
                                   np.conj(steering_vector(cfg, F_UP, theta)), atol=1e-12)

    @pytest.mark.parametrize("f", [0.0, -1.0])
    def test_nonpositive_frequency(self, f):
        with pytest.raises(ChannelConfigError):
            steering_vector(ArrayConfig(num_antennas=4), f, 0.1)

    def test_zero_antennas(self):
        with pytest.raises(ChannelConfigError):
            ArrayConfig(num_antennas=0)


class TestSynthesize:
    def test_single_unit_ray_is_steering_vector(self):
        cfg = ArrayConfig(num_antennas=8)
        sc = Scenario((Ray(1.0, 0.0, 0.0, 0.3),), 0.3, 0.0)
        np.testing.assert_array_equal(synthesize_channel(cfg, sc, F_UP).coefficients,
                                      steering_vector(cfg, F_UP, 0.3))

    def test_two_half_rays_equal_one_full_ray(self):
        cfg = ArrayConfig(num_antennas=8)
        r = dict(phase=0.4, delay=3e-6, doa=0.2)
        two = Scenario((Ray(0.5, **r), Ray(0.5, **r)), 0.2, 0.0)
        one = Scenario((Ray(1.0, **r),), 0.2, 0.0)
        np.testing.assert_allclose(synthesize_channel(cfg, two, F_UP).coefficients,
                                   synthesize_channel(cfg, one, F_UP).coefficients, atol=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_scalar_loop(self, seed):
        rng = np.random.default_rng(seed)
        cfg = ArrayConfig(num_antennas=16)
        sc = _random_scenario(rng, 5)
        f = F_UP + rng.uniform(0, 2e8)
        np.testing.assert_allclose(synthesize_channel(cfg, sc, f).coefficients,
                                   _brute_force_channel(cfg, sc, f), rtol=0, atol=1e-12)

    def test_linearity_over_ray_lists(self):
        rng = np.random.default_rng(7)
        cfg = ArrayConfig(num_antennas=12)
        a, b = _random_scenario(rng, 4), _random_scenario(rng, 6, spread=0.2)
        theta = a.mean_doa
        both = Scenario(a.rays + b.rays, theta, 2 * (max(abs(r.doa - theta) for r in a.rays + b.rays)))
        h = lambda s: synthesize_channel(cfg, s, F_UP).coefficients
        np.testing.assert_allclose(h(both), h(a) + h(b), atol=1e-12)

    @given(st.floats(0.01, 100.0))
    @settings(max_examples=30)
    def test_scaling(self, s):
        cfg = ArrayConfig(num_antennas=8)
        sc = _random_scenario(np.random.default_rng(1), 3)
        scaled = Scenario(tuple(Ray(r.attenuation * s, r.phase, r.delay, r.doa) for r in sc.rays),
                          sc.mean_doa, sc.angular_spread)
        np.testing.assert_allclose(synthesize_channel(cfg, scaled, F_UP).coefficients,
                                   s * synthesize_channel(cfg, sc, F_UP).coefficients, rtol=1e-13, atol=1e-13)

    def test_empty_scenario_rejected(self):
        with pytest.raises(ScenarioError):
            Scenario((), 0.0, 0.1)

    def test_ray_outside_spread_rejected(self):
        with pytest.raises(ScenarioError):
            Scenario((Ray(1.0, 0.0, 0.0, 0.5),), 0.0, 0.2)

    @pytest.mark.parametrize("kw", [dict(attenuation=-1.0), dict(delay=-1e-9), dict(phase=np.pi)])
    def test_ray_invariants(self, kw):
        base = dict(attenuation=1.0, phase=0.0, delay=0.0, doa=0.0)
        with pytest.raises(ScenarioError):
            Ray(**{**base, **kw})


class TestChannelPair:
    def test_equal_frequencies_give_equal_channels(self):
        cfg = ArrayConfig(num_antennas=8)
        sc = _random_scenario(np.random.default_rng(3), 7)
        up, down = channel_pair(cfg, sc, F_UP, F_UP)
        np.testing.assert_array_equal(up.coefficients, down.coefficients)

    def test_delay_free_single_ray_differs_only_through_chi(self):
        cfg = ArrayConfig(num_antennas=8)
        theta, f_d = 0.4, F_UP + 1.2e8
        sc = Scenario((Ray(1.0, 0.0, 0.0, theta),), theta, 0.0)
        up, down = channel_pair(cfg, sc, F_UP, f_d)
        m = np.arange(8)
        chi_u = 2 * np.pi * cfg.antenna_spacing * F_UP / SPEED_OF_LIGHT
        chi_d = chi_u * f_d / F_UP
        np.testing.assert_allclose(up.coefficients, np.exp(-1j * chi_u * m * np.sin(theta)), atol=1e-12)
        np.testing.assert_allclose(down.coefficients, np.exp(-1j * chi_d * m * np.sin(theta)), atol=1e-12)

    def test_swap(self):
        cfg = ArrayConfig(num_antennas=8)
        sc = _random_scenario(np.random.default_rng(4), 5)
        up, down = channel_pair(cfg, sc, F_UP, F_UP + 5e7)
        down2, up2 = channel_pair(cfg, sc, F_UP + 5e7, F_UP)
        np.testing.assert_array_equal(up.coefficients, up2.coefficients)
        np.testing.assert_array_equal(down.coefficients, down2.coefficients)
        assert up.carrier_frequency == F_UP and down.carrier_frequency == F_UP + 5e7


class TestSampleScenario:
    def test_default_path_count_and_spread(self):
        params = ScenarioParams(num_paths=200, angular_spread=np.deg2rad(5.0))
        sc = sample_scenario(np.random.default_rng(0), params)
        assert sc.num_paths == 200
        doa = np.array([r.doa for r in sc.rays])
        assert np.all(np.abs(doa - sc.mean_doa) <= np.deg2rad(2.5))
        assert np.deg2rad(-60) <= sc.mean_doa <= np.deg2rad(60)

    def test_zero_spread(self):
        sc = sample_scenario(np.random.default_rng(0), ScenarioParams(num_paths=10, angular_spread=0.0))
        assert all(r.doa == sc.mean_doa for r in sc.rays)

    def test_phase_distribution(self):
        params = ScenarioParams(num_paths=100_000)
        sc = sample_scenario(np.random.default_rng(11), params)
        phi = np.array([r.phase for r in sc.rays])
        assert abs(phi.mean()) < 4 * np.pi / np.sqrt(3) / np.sqrt(phi.size)
        assert stats.kstest(phi, stats.uniform(-np.pi, 2 * np.pi).cdf).pvalue > 0.01
        tau = np.array([r.delay for r in sc.rays])
        assert tau.min() >= 0 and tau.max() <= 1e-4
        assert stats.kstest(tau, stats.uniform(0, 1e-4).cdf).pvalue > 0.01

    def test_rayleigh_power_normalised_per_path(self):
        params = ScenarioParams(num_paths=100_000)
        sc = sample_scenario(np.random.default_rng(5), params)
        alpha = np.array([r.attenuation for r in sc.rays])
        # sum of alpha^2 over P paths has unit mean
        assert np.mean(alpha**2) * params.num_paths == pytest.approx(1.0, rel=0.02)
        assert stats.kstest(alpha, stats.rayleigh(scale=params.scale).cdf).pvalue > 0.01

    def test_reproducible(self):
        params = ScenarioParams(num_paths=20)
        a = sample_scenario(np.random.default_rng(42), params)
        b = sample_scenario(np.random.default_rng(42), params)
        assert a == b

    @pytest.mark.parametrize("kw", [dict(num_paths=0), dict(angular_spread=-0.1)])
    def test_invalid_params(self, kw):
        with pytest.raises(ScenarioError):
            ScenarioParams(**kw)
