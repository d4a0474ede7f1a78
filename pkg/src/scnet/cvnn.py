"""Complex-valued dense network with split CReLU activations.

Gradients are real partials packed as complex numbers: for a real loss
``L`` and a complex parameter ``w``, the stored gradient is
``dL/dRe(w) + 1j * dL/dIm(w)``.  With that convention a dense layer
``z = W x + b`` back-propagates as

    dW = G conj(x)^T,   db = G,   dx = W^H G

which is exactly what real backprop gives on the equivalent real network
(see :func:`real_composite_oracle`).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .baseline_fnn import RealDenseLayer, RealNetwork, pack as stack_complex, unpack as unstack_complex


class ShapeError(ValueError):
    pass


class ArchitectureError(ValueError):
    pass


class WeightFileError(Exception):
    pass


def crelu(z):
    """Split ReLU: ``max(Re z, 0) + 1j * max(Im z, 0)``."""
    z = np.asarray(z, dtype=np.complex128)
    return np.maximum(z.real, 0.0) + 1j * np.maximum(z.imag, 0.0)


def crelu_backward(pre, grad):
    # subgradient 0 at exactly 0
    return np.where(pre.real > 0, grad.real, 0.0) + 1j * np.where(pre.imag > 0, grad.imag, 0.0)


@dataclass
class ComplexDenseLayer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    has_activation: bool = True

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.complex128)
        self.bias = np.ascontiguousarray(self.bias, dtype=np.complex128)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ShapeError(f"weights {self.weights.shape} / bias {self.bias.shape} inconsistent")

    @property
    def in_dim(self):
        return self.weights.shape[1]

    @property
    def out_dim(self):
        return self.weights.shape[0]


@dataclass
class ComplexNetwork:
    layers: list[ComplexDenseLayer]

    def __post_init__(self):
        if not self.layers:
            raise ArchitectureError("network needs at least one layer")
        for a, b in zip(self.layers[:-1], self.layers[1:]):
            if a.out_dim != b.in_dim:
                raise ShapeError(f"layer dims do not chain: {a.out_dim} -> {b.in_dim}")
        if self.layers[-1].has_activation:
            raise ArchitectureError("last layer must be affine (no activation)")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.layers[0].in_dim,) + tuple(l.out_dim for l in self.layers)

    def parameters(self) -> list[np.ndarray]:
        """Parameter arrays in (W1, b1, W2, b2, ...) order; updates in place are visible to the net."""
        out = []
        for l in self.layers:
            out += [l.weights, l.bias]
        return out

    def copy(self) -> "ComplexNetwork":
        return ComplexNetwork([ComplexDenseLayer(l.weights.copy(), l.bias.copy(), l.has_activation)
                               for l in self.layers])

    def num_real_parameters(self) -> int:
        return sum(2 * p.size for p in self.parameters())

    @staticmethod
    def encode(h):
        return np.asarray(h, dtype=np.complex128)

    @staticmethod
    def decode(y):
        return y

    def forward(self, x):
        return forward(self, x)

    def backward(self, tape, output_error) -> list[np.ndarray]:
        return backward(self, tape, output_error).arrays()

    def __call__(self, x):
        return forward(self, x)[0]


@dataclass
class Tape:
    inputs: list[np.ndarray]  # input to each layer
    pre_activations: list[np.ndarray]


@dataclass
class GradientSet:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def arrays(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out


def forward(net: ComplexNetwork, x) -> tuple[np.ndarray, Tape]:
    """Evaluate the network on one vector ``(n0,)`` or a batch ``(V, n0)``."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[-1] != net.layer_sizes[0] or x.ndim not in (1, 2):
        raise ShapeError(f"input shape {x.shape} does not match n0={net.layer_sizes[0]}")
    tape = Tape([], [])
    h = x
    for layer in net.layers:
        tape.inputs.append(h)
        z = h @ layer.weights.T + layer.bias
        tape.pre_activations.append(z)
        h = crelu(z) if layer.has_activation else z
    return h, tape


def backward(net: ComplexNetwork, tape: Tape, output_error) -> GradientSet:
    """Gradients of a real loss given ``output_error = dL/dRe(out) + 1j dL/dIm(out)``.

    For a batch the per-sample contributions are summed.
    """
    if len(tape.pre_activations) != len(net.layers):
        raise ShapeError("tape does not belong to this network")
    g = np.asarray(output_error, dtype=np.complex128)
    if g.shape != tape.pre_activations[-1].shape:
        raise ShapeError(f"output_error shape {g.shape} != output shape {tape.pre_activations[-1].shape}")
    dws, dbs = [], []
    for layer, x, z in zip(reversed(net.layers), reversed(tape.inputs), reversed(tape.pre_activations)):
        if z.shape[-1] != layer.out_dim:
            raise ShapeError("tape does not belong to this network")
        if layer.has_activation:
            g = crelu_backward(z, g)
        if g.ndim == 1:
            dws.append(np.outer(g, x.conj()))
            dbs.append(g.copy())
        else:
            dws.append(g.T @ x.conj())
            dbs.append(g.sum(axis=0))
        g = g @ layer.weights.conj()
    return GradientSet(dws[::-1], dbs[::-1])


def init_network(layer_sizes, rng: np.random.Generator) -> ComplexNetwork:
    """Circular complex Gaussian weights with variance ``1/fan_in``, zero biases."""
    sizes = [int(n) for n in layer_sizes]
    if len(sizes) < 2:
        raise ArchitectureError("need at least input and output sizes")
    if min(sizes) < 1:
        raise ArchitectureError(f"layer sizes must be positive, got {sizes}")
    layers = []
    for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        std = np.sqrt(1.0 / (2 * n_in))
        w = std * rng.standard_normal((n_out, n_in)) + 1j * std * rng.standard_normal((n_out, n_in))
        layers.append(ComplexDenseLayer(w, np.zeros(n_out, dtype=np.complex128),
                                        has_activation=i < len(sizes) - 2))
    return ComplexNetwork(layers)


def real_composite_oracle(net: ComplexNetwork) -> RealNetwork:
    """The real network of doubled width equivalent to ``net``.

    Each complex weight ``a + jb`` becomes ``[[a, -b], [b, a]]``; with vectors
    laid out as ``[re; im]`` the full matrix is ``[[A, -B], [B, A]]``.  Split
    CReLU becomes an ordinary ReLU over both halves.
    """
    layers = []
    for l in net.layers:
        a, b = l.weights.real, l.weights.imag
        w = np.block([[a, -b], [b, a]])
        layers.append(RealDenseLayer(w, stack_complex(l.bias), l.has_activation))
    return RealNetwork(layers)


def fold_oracle_gradients(net: ComplexNetwork, real_grads: list[np.ndarray]) -> GradientSet:
    """Map gradients w.r.t. the oracle's block matrices back onto (Re, Im) of ``net``."""
    dws, dbs = [], []
    for l, (gw, gb) in zip(net.layers, zip(real_grads[0::2], real_grads[1::2])):
        o, i = l.out_dim, l.in_dim
        d_re = gw[:o, :i] + gw[o:, i:]
        d_im = -gw[:o, i:] + gw[o:, :i]
        dws.append(d_re + 1j * d_im)
        dbs.append(unstack_complex(gb))
    return GradientSet(dws, dbs)


# -- weight files -----------------------------------------------------------

COMPLEX_MAGIC = b"SCNETW01"
REAL_MAGIC = b"SCNETW0R"
WEIGHTS_VERSION = 1
_PREAMBLE = struct.Struct("<8sII")


def write_weights(path, magic: bytes, sizes, arrays, dtype: str) -> None:
    with open(path, "wb") as fh:
        fh.write(_PREAMBLE.pack(magic, WEIGHTS_VERSION, len(sizes)))
        fh.write(np.asarray(sizes, dtype="<u4").tobytes())
        for a in arrays:
            fh.write(np.ascontiguousarray(a).astype(dtype, copy=False).tobytes())


def read_weights(path, magic: bytes, dtype: str):
    """Return ``(sizes, [W1, b1, ...])`` from a weight file with the given magic."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:8] != magic:
        raise WeightFileError(f"bad magic {raw[:8]!r}, expected {magic!r}")
    if len(raw) < _PREAMBLE.size:
        raise WeightFileError("truncated header")
    _, version, n = _PREAMBLE.unpack_from(raw)
    if version != WEIGHTS_VERSION:
        raise WeightFileError(f"unsupported weight-file version {version}")
    off = _PREAMBLE.size
    if n < 2 or len(raw) < off + 4 * n:
        raise WeightFileError("truncated or invalid layer-size table")
    sizes = [int(s) for s in np.frombuffer(raw, dtype="<u4", count=n, offset=off)]
    off += 4 * n
    item = np.dtype(dtype).itemsize
    arrays = []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        for shape in ((n_out, n_in), (n_out,)):
            count = int(np.prod(shape))
            if len(raw) < off + count * item:
                raise WeightFileError("truncated payload")
            arrays.append(np.frombuffer(raw, dtype=dtype, count=count, offset=off).reshape(shape).copy())
            off += count * item
    if off != len(raw):
        raise WeightFileError(f"{len(raw) - off} trailing bytes")
    return sizes, arrays


def save_network(net: ComplexNetwork, path) -> None:
    write_weights(path, COMPLEX_MAGIC, net.layer_sizes, net.parameters(), "<c16")


def load_network(path) -> ComplexNetwork:
    sizes, arrays = read_weights(path, COMPLEX_MAGIC, "<c16")
    nl = len(sizes) - 1
    return ComplexNetwork([
        ComplexDenseLayer(arrays[2 * i].astype(np.complex128), arrays[2 * i + 1].astype(np.complex128),
                          has_activation=i < nl - 1)
        for i in range(nl)
    ])
