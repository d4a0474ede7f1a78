"""Real-valued fully-connected baseline.

Complex CSI is fed as stacked ``[re; im]`` vectors of length ``2M``.  Hidden
widths default to twice the SCNet widths so the baseline never has fewer
real parameters than the complex network it is compared against.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def pack(h):
    """Complex ``(..., M)`` -> real ``(..., 2M)`` as ``[re; im]``."""
    h = np.asarray(h)
    return np.concatenate([h.real, h.imag], axis=-1).astype(np.float64)


def unpack(x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] % 2:
        raise ValueError(f"cannot unpack odd length {x.shape[-1]}")
    n = x.shape[-1] // 2
    return x[..., :n] + 1j * x[..., n:]


@dataclass
class RealDenseLayer:
    weights: np.ndarray
    bias: np.ndarray
    has_activation: bool = True

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        self.bias = np.ascontiguousarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValueError(f"weights {self.weights.shape} / bias {self.bias.shape} inconsistent")


@dataclass
class RealTape:
    inputs: list
    pre_activations: list


@dataclass
class RealNetwork:
    layers: list[RealDenseLayer]

    def __post_init__(self):
        for a, b in zip(self.layers[:-1], self.layers[1:]):
            if a.weights.shape[0] != b.weights.shape[1]:
                raise ValueError("layer dims do not chain")

    @property
    def layer_sizes(self):
        return (self.layers[0].weights.shape[1],) + tuple(l.weights.shape[0] for l in self.layers)

    def parameters(self):
        out = []
        for l in self.layers:
            out += [l.weights, l.bias]
        return out

    def num_real_parameters(self):
        return sum(p.size for p in self.parameters())

    def copy(self):
        return RealNetwork([RealDenseLayer(l.weights.copy(), l.bias.copy(), l.has_activation)
                            for l in self.layers])

    # complex <-> model domain, so the training loop can stay model-agnostic
    encode = staticmethod(pack)
    decode = staticmethod(unpack)

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.layer_sizes[0]:
            raise ValueError(f"input shape {x.shape} does not match n0={self.layer_sizes[0]}")
        tape = RealTape([], [])
        h = x
        for l in self.layers:
            tape.inputs.append(h)
            z = h @ l.weights.T + l.bias
            tape.pre_activations.append(z)
            h = np.maximum(z, 0.0) if l.has_activation else z
        return h, tape

    def backward(self, tape, output_error):
        """Plain real backprop; returns ``[dW1, db1, dW2, db2, ...]`` summed over the batch."""
        g = np.asarray(output_error, dtype=np.float64)
        grads = []
        for l, x, z in zip(reversed(self.layers), reversed(tape.inputs), reversed(tape.pre_activations)):
            if l.has_activation:
                g = np.where(z > 0, g, 0.0)
            if g.ndim == 1:
                grads += [g.copy(), np.outer(g, x)]
            else:
                grads += [g.sum(axis=0), g.T @ x]
            g = g @ l.weights
        return grads[::-1]

    def __call__(self, x):
        return self.forward(x)[0]


def init_real_network(layer_sizes, rng: np.random.Generator) -> RealNetwork:
    """Gaussian weights with variance ``1/fan_in``, zero biases."""
    sizes = [int(n) for n in layer_sizes]
    if len(sizes) < 2 or min(sizes) < 1:
        raise ValueError(f"invalid layer sizes {sizes}")
    layers = []
    for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        w = rng.standard_normal((n_out, n_in)) / np.sqrt(n_in)
        layers.append(RealDenseLayer(w, np.zeros(n_out), has_activation=i < len(sizes) - 2))
    return RealNetwork(layers)


def fnn_sizes(num_antennas: int, complex_hidden=(128, 64, 128)) -> tuple[int, ...]:
    m2 = 2 * num_antennas
    return (m2, *(2 * h for h in complex_hidden), m2)


def real_parameter_count(sizes) -> int:
    return sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))


def build_fnn(num_antennas: int, rng: np.random.Generator, complex_hidden=(128, 64, 128)) -> RealNetwork:
    sizes = fnn_sizes(num_antennas, complex_hidden)
    scnet_reals = 2 * real_parameter_count((num_antennas, *complex_hidden, num_antennas))
    # fairness: the baseline must not be handicapped on parameter budget
    assert real_parameter_count(sizes) >= scnet_reals, (sizes, scnet_reals)
    return init_real_network(sizes, rng)


def train_fnn(train_ds, eval_ds, cfg, complex_hidden=(128, 64, 128)):
    """Train the baseline under exactly the SCNet protocol (loss, ADAM, seeds)."""
    from .optim import train
    from .seeding import derive_rng

    net = build_fnn(train_ds.meta.num_antennas, derive_rng(cfg.seed, "init"), complex_hidden)
    return train(net, train_ds, eval_ds, cfg)


def save_fnn(net: RealNetwork, path) -> None:
    from .cvnn import REAL_MAGIC, write_weights

    write_weights(path, REAL_MAGIC, net.layer_sizes, net.parameters(), "<f8")


def load_fnn(path) -> RealNetwork:
    from .cvnn import REAL_MAGIC, read_weights

    sizes, arrays = read_weights(path, REAL_MAGIC, "<f8")
    nl = len(sizes) - 1
    return RealNetwork([RealDenseLayer(arrays[2 * i], arrays[2 * i + 1], i < nl - 1) for i in range(nl)])
