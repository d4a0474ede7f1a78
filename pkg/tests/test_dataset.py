import math
import struct
from dataclasses import replace

import numpy as np
import pytest

from scnet.channel_model import ArrayConfig, ScenarioParams, channel_pair
from scnet.config import PAPER
from scnet.dataset import (
    Dataset,
    DatasetFormatError,
    DatasetTruncatedError,
    DatasetVersionError,
    GenParams,
    SplitError,
    generate_dataset,
    load_dataset,
    regenerate_scenario,
    save_dataset,
    split,
)
from scnet.estimation import EstimationConfig
from scnet.evaluation import nmse

SMALL = GenParams(array=ArrayConfig.half_wavelength(8), scenario=ScenarioParams(num_paths=6))


@pytest.fixture(scope="module")
def ds():
    return generate_dataset(10, SMALL, master_seed=12)


def test_deterministic():
    a = generate_dataset(4, SMALL, 99)
    b = generate_dataset(4, SMALL, 99)
    assert a.inputs.tobytes() == b.inputs.tobytes()
    assert a.labels.tobytes() == b.labels.tobytes()
    assert a.meta == b.meta


def test_worker_count_does_not_change_result():
    a = generate_dataset(12, SMALL, 5, workers=1)
    b = generate_dataset(12, SMALL, 5, workers=3)
    assert a.inputs.tobytes() == b.inputs.tobytes() and a.labels.tobytes() == b.labels.tobytes()


def test_labels_unit_power(ds):
    assert np.mean(np.abs(ds.labels) ** 2) == pytest.approx(1.0, abs=1e-6)


def test_meta_echoes_full_settings():
    gp = PAPER.gen_params()
    d = generate_dataset(3, gp, 0)
    m = d.meta
    assert (m.num_antennas, m.f_up, m.num_paths, m.snr_db) == (128, 2.5e9, 200, 25.0)
    assert m.f_down == 2.5e9 + 120e6 and m.count == 3
    assert PAPER.num_samples == 102_400


@pytest.mark.parametrize("index", [0, 4, 9])
def test_pairs_share_one_ray_set(ds, index):
    sc = regenerate_scenario(SMALL, 12, index)
    _, down = channel_pair(SMALL.array, sc, SMALL.f_up, SMALL.f_down)
    np.testing.assert_allclose(ds.labels[index] * ds.meta.scale, down.coefficients, atol=1e-12)


def test_noiseless_input_is_uplink_channel():
    gp = GenParams(array=ArrayConfig.half_wavelength(8), scenario=ScenarioParams(num_paths=6),
                   estimation=EstimationConfig(perfect=True))
    d = generate_dataset(3, gp, 1)
    sc = regenerate_scenario(gp, 1, 2)
    up, _ = channel_pair(gp.array, sc, gp.f_up, gp.f_down)
    np.testing.assert_allclose(d.inputs[2] * d.meta.scale, up.coefficients, atol=1e-12)
    assert math.isinf(d.meta.snr_db)


def test_label_noise_flag():
    clean = generate_dataset(4, SMALL, 2)
    noisy = generate_dataset(4, GenParams(array=SMALL.array, scenario=SMALL.scenario, label_noise=True), 2)
    np.testing.assert_allclose(clean.inputs * clean.meta.scale, noisy.inputs * noisy.meta.scale, rtol=1e-13)
    assert not np.allclose(clean.labels * clean.meta.scale, noisy.labels * noisy.meta.scale)


def test_nmse_scale_invariant(ds):
    rng = np.random.default_rng(0)
    pred = ds.labels + 0.1 * rng.standard_normal(ds.labels.shape)
    raw_pred, raw_label = pred * ds.meta.scale, ds.labels * ds.meta.scale
    assert nmse(pred, ds.labels) == pytest.approx(nmse(raw_pred, raw_label), abs=1e-12)


class TestSplit:
    def test_sizes(self, ds):
        a, b = split(ds, 0.8)
        assert (len(a), len(b)) == (8, 2)
        assert (a.meta.count, b.meta.count) == (8, 2)

    def test_partition(self, ds):
        a, b = split(ds, 0.8)
        np.testing.assert_array_equal(np.vstack([a.inputs, b.inputs]), ds.inputs)
        np.testing.assert_array_equal(np.vstack([a.labels, b.labels]), ds.labels)

    def test_full_size_count(self):
        assert int(round(102_400 * 0.9)) == 92_160
        d = generate_dataset(2, SMALL, 0)
        zeros = np.zeros((102_400, 1), complex)
        big = Dataset(zeros, zeros.copy(), replace(d.meta, num_antennas=1, count=102_400))
        a, b = split(big, 0.9)
        assert (len(a), len(b)) == (92_160, 10_240)

    @pytest.mark.parametrize("frac", [0.0, 1.0, 0.01, 0.99])
    def test_empty_side(self, ds, frac):
        with pytest.raises(SplitError):
            split(ds, frac)


class TestFileFormat:
    def test_round_trip(self, ds, tmp_path):
        p = tmp_path / "d.bin"
        save_dataset(ds, p)
        back = load_dataset(p)
        assert back.meta == ds.meta
        assert back.inputs.tobytes() == ds.inputs.tobytes()
        assert back.labels.tobytes() == ds.labels.tobytes()

    def test_header_layout(self, ds, tmp_path):
        p = tmp_path / "d.bin"
        save_dataset(ds, p)
        raw = p.read_bytes()
        assert raw[:8] == b"SCNETDS1"
        version, m, count = struct.unpack_from("<IIQ", raw, 8)
        assert (version, m, count) == (1, 8, 10)
        header = 8 + 4 + 4 + 8 + 8 * 3 + 4 + 8 * 2 + 8
        assert len(raw) == header + 10 * 2 * 8 * 16
        first = np.frombuffer(raw, "<f8", count=2, offset=header)
        assert first.tolist() == [ds.inputs[0, 0].real, ds.inputs[0, 0].imag]
        label0 = np.frombuffer(raw, "<f8", count=2, offset=header + 8 * 16)
        assert label0.tolist() == [ds.labels[0, 0].real, ds.labels[0, 0].imag]

    def test_bad_magic(self, ds, tmp_path):
        p = tmp_path / "d.bin"
        save_dataset(ds, p)
        p.write_bytes(b"NOTADSET" + p.read_bytes()[8:])
        with pytest.raises(DatasetFormatError):
            load_dataset(p)

    def test_version_mismatch(self, ds, tmp_path):
        p = tmp_path / "d.bin"
        save_dataset(ds, p)
        raw = bytearray(p.read_bytes())
        raw[8:12] = struct.pack("<I", 7)
        p.write_bytes(bytes(raw))
        with pytest.raises(DatasetVersionError):
            load_dataset(p)

    @pytest.mark.parametrize("cut", [1, 100, 2000])
    def test_truncated(self, ds, tmp_path, cut):
        p = tmp_path / "d.bin"
        save_dataset(ds, p)
        p.write_bytes(p.read_bytes()[:-cut])
        with pytest.raises(DatasetTruncatedError):
            load_dataset(p)
