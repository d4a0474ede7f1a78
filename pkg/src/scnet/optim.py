"""Loss, component-wise ADAM and the epoch/batch training loop."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .evaluation import nmse
from .seeding import derive_rng

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, value: float):
        super().__init__(f"training diverged at epoch {epoch} (loss={value})")
        self.epoch = epoch


def loss(pred, label, n_h=None) -> float:
    """Mean squared magnitude over batch and vector length: ``sum ||p - l||^2 / (V * N_h)``."""
    return loss_and_error(pred, label, n_h)[0]


def loss_and_error(pred, label, n_h=None):
    """Loss plus its gradient w.r.t. ``pred`` packed as ``dL/dRe + 1j dL/dIm``.

    For real inputs this is the ordinary gradient.  Packed ``[re; im]`` vectors
    reproduce the complex value when ``n_h`` is given as the complex length.
    """
    pred = np.asarray(pred)
    label = np.asarray(label)
    if pred.shape != label.shape:
        raise ValueError(f"pred {pred.shape} and label {label.shape} differ")
    pred2 = pred.reshape(-1, pred.shape[-1]) if pred.ndim else pred.reshape(1, 1)
    v = pred2.shape[0]
    n_h = pred2.shape[1] if n_h is None else n_h
    r = pred - label
    denom = v * n_h
    return float(np.sum(np.abs(r) ** 2) / denom), 2.0 * r / denom


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    def __post_init__(self):
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta1, beta2 must lie in [0, 1)")


def _reals(a: np.ndarray) -> np.ndarray:
    # complex128 viewed as interleaved float64 pairs: (re, im) become separate scalars
    return a.view(np.float64) if np.iscomplexobj(a) else a


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState):
    """One bias-corrected ADAM update, in place, on every real component.

    Real and imaginary parts of complex parameters are updated as independent
    real scalars.  Returns ``(params, state)``.
    """
    if len(params) != len(grads):
        raise ValueError("params and grads differ in length")
    if not state.m:
        state.m = [np.zeros_like(_reals(p)) for p in params]
        state.v = [np.zeros_like(_reals(p)) for p in params]
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != np.shape(g):
            raise ValueError(f"param {p.shape} / grad {np.shape(g)} mismatch")
        pr, gr = _reals(p), _reals(np.ascontiguousarray(g, dtype=p.dtype))
        m *= b1
        m += (1 - b1) * gr
        v *= b2
        v += (1 - b2) * gr * gr
        pr -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 128
    epochs: int = 400
    lr: float = 1e-3
    seed: int = 0
    shuffle: bool = True
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.lr >= 0:
            raise ValueError("lr must be >= 0")


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_loss: float
    eval_nmse: float


def predict(net, x, batch_size: int = 4096):
    """Complex predictions for complex inputs ``(N, M)``, whatever the model domain."""
    x = np.asarray(x)
    out = [net.decode(net.forward(net.encode(x[i:i + batch_size]))[0]) for i in range(0, len(x), batch_size)]
    return np.concatenate(out) if out else np.empty_like(x)


def evaluate(net, ds) -> tuple[float, float]:
    """(loss, NMSE) of ``net`` on a whole dataset."""
    pred = predict(net, ds.inputs)
    return loss(pred, ds.labels), nmse(pred, ds.labels)


def train(net, train_ds, eval_ds, cfg: TrainConfig, on_epoch=None):
    """Train ``net`` in place; return ``(net, metrics)``.

    ``metrics[0]`` describes the untrained network (full-pass train loss);
    ``metrics[k]`` for ``k >= 1`` holds the sample-weighted mean of the batch
    losses seen during epoch ``k`` and the eval NMSE after it.
    """
    m = net.layer_sizes[0]
    if len(train_ds) == 0 or len(eval_ds) == 0:
        raise ValueError("datasets must be non-empty")
    if net.encode(train_ds.inputs[:1]).shape[-1] != m or eval_ds.inputs.shape[1] != train_ds.inputs.shape[1]:
        raise ValueError(f"dataset dimension does not match network input {m}")

    n_h = train_ds.inputs.shape[1]
    x_all = net.encode(train_ds.inputs)
    y_all = net.encode(train_ds.labels)
    state = AdamState(lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
    params = net.parameters()

    l0, _ = evaluate(net, train_ds)
    metrics = [EpochMetrics(0, l0, evaluate(net, eval_ds)[1])]
    if on_epoch:
        on_epoch(metrics[-1])
    n = len(x_all)
    for epoch in range(1, cfg.epochs + 1):
        order = derive_rng(cfg.seed, "shuffle", epoch).permutation(n) if cfg.shuffle else np.arange(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            out, tape = net.forward(x_all[idx])
            value, err = loss_and_error(out, y_all[idx], n_h)
            if not np.isfinite(value):
                raise TrainingDiverged(epoch, value)
            total += value * len(idx)
            adam_step(params, net.backward(tape, err), state)
        ev = evaluate(net, eval_ds)[1]
        if not np.isfinite(ev):
            raise TrainingDiverged(epoch, ev)
        metrics.append(EpochMetrics(epoch, total / n, ev))
        if on_epoch:
            on_epoch(metrics[-1])
    return net, metrics


def write_metrics_csv(path, metrics) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "train_loss", "eval_nmse"])
        for r in metrics:
            w.writerow([r.epoch, repr(r.train_loss), repr(r.eval_nmse)])
