"""Fully connected network engine written directly on numpy.

Forward pass, leaky-ReLU hidden layers with a linear 2-unit output,
mean-square coordinate loss, hand-derived backpropagation, SGD/Adam with a
stepped percentage learning-rate decay, and a layer-dimension builder for the
three fingerprint flavors (raw / cov / cir) at configurable array size.

Everything is deterministic given the seeds: weight init and mini-batch
shuffling each use their own Philox stream, and updates are applied in a
fixed layer order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .numerics import make_rng


class TrainingDiverged(RuntimeError):
    """Raised when the training loss stops being finite."""


@dataclass(frozen=True)
class MlpSpec:
    """Layer schedule plus activation slope and init seed."""

    layer_dims: tuple[tuple[int, int], ...]
    leaky_slope: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not self.layer_dims:
            raise ValueError("at least one layer required")
        for (_, out_a), (in_b, _) in zip(self.layer_dims, self.layer_dims[1:]):
            if out_a != in_b:
                raise ValueError(f"layer dims do not chain: {out_a} -> {in_b}")
        if self.layer_dims[-1][1] != 2:
            raise ValueError("final layer must emit 2-D coordinates")
        if not 0.0 < self.leaky_slope < 1.0:
            raise ValueError("leaky_slope must be in (0, 1)")

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0][0]


@dataclass
class MlpModel:
    weights: list[np.ndarray]   # (out, in) per layer
    biases: list[np.ndarray]    # (out,) per layer
    spec: MlpSpec

    @property
    def n_layers(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 64
    epochs: int = 200
    lr0: float = 1e-4
    lr_decay: float = 0.2           # fraction removed per decay step
    lr_decay_every: int = 10        # epochs between decay steps
    optimizer: str = "adam"         # "adam" or "sgd"
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")
        if self.lr0 <= 0 or not 0.0 < self.lr_decay <= 1.0 or self.lr_decay_every < 1:
            raise ValueError("invalid learning-rate schedule")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


def _ceil4(x: float) -> int:
    """Round a (possibly fractional) width up to a multiple of 4, minimum 4."""
    return max(4, int(-(-x // 4)) * 4)


def build_spec(kind: str, m: int, n: int = 0, l: int = 0,
               leaky_slope: float = 0.01, seed: int = 0) -> MlpSpec:
    """Layer schedule for one fingerprint flavor at array size m.

    The input width is the exact feature length; interior widths derived by
    division are rounded up to multiples of 4 so small arrays still produce
    valid schedules. Tail widths are fixed.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if kind == "raw":
        if n < 1:
            raise ValueError("raw kind needs n >= 1")
        mn = m * n
        dims = [2 * mn, _ceil4(mn), _ceil4(mn / 2), _ceil4(mn / 4), _ceil4(mn / 4),
                1024, 512, 128, 32, 4, 2]
    elif kind == "cov":
        mm = m * m
        dims = [mm, _ceil4(mm), _ceil4(mm / 2), _ceil4(mm / 4), _ceil4(mm / 4),
                1024, 512, 128, 32, 4, 2]
    elif kind == "cir":
        if l < 1:
            raise ValueError("cir kind needs l >= 1")
        ml = m * l
        dims = [2 * ml, _ceil4(ml), _ceil4(ml), _ceil4(ml),
                512, 512, 256, 128, 32, 4, 2]
    else:
        raise ValueError(f"unknown network kind {kind!r}")
    return MlpSpec(layer_dims=tuple(zip(dims[:-1], dims[1:])),
                   leaky_slope=leaky_slope, seed=seed)


def init_model(spec: MlpSpec) -> MlpModel:
    """Uniform +/- sqrt(6/(in+out)) weights, zero biases, from spec.seed."""
    rng = make_rng(spec.seed)
    weights, biases = [], []
    for din, dout in spec.layer_dims:
        bound = np.sqrt(6.0 / (din + dout))
        weights.append(rng.uniform(-bound, bound, size=(dout, din)))
        biases.append(np.zeros(dout))
    return MlpModel(weights=weights, biases=biases, spec=spec)


def _leaky(z: np.ndarray, slope: float) -> np.ndarray:
    return np.where(z > 0, z, slope * z)


def _leaky_grad(z: np.ndarray, slope: float) -> np.ndarray:
    # derivative at exactly 0 uses the slope
    return np.where(z > 0, 1.0, slope)


def forward(model: MlpModel, x: np.ndarray):
    """Network output for a single vector or a (B, d) batch.

    Hidden layers apply leaky ReLU; the output layer is linear. Returns
    (y, cache) where the cache holds layer inputs and pre-activations for
    backward().
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    a = x[np.newaxis, :] if single else x
    if a.shape[1] != model.spec.input_dim:
        raise ValueError(
            f"input length {a.shape[1]} != network input {model.spec.input_dim}")
    inputs, pres = [], []
    n_layers = model.n_layers
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        inputs.append(a)
        z = a @ w.T + b
        pres.append(z)
        a = z if i == n_layers - 1 else _leaky(z, model.spec.leaky_slope)
    cache = {"inputs": inputs, "pres": pres, "single": single}
    return (a[0] if single else a), cache


def predict(model: MlpModel, x: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """Batched forward pass without caching, chunked to bound memory."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return forward(model, x)[0]
    out = np.empty((x.shape[0], 2))
    for lo in range(0, x.shape[0], chunk):
        out[lo:lo + chunk] = forward(model, x[lo:lo + chunk])[0]
    return out


def mse_loss(pred: np.ndarray, truth: np.ndarray) -> float:
    """Mean over the batch of squared Euclidean distance."""
    pred = np.atleast_2d(np.asarray(pred, dtype=np.float64))
    truth = np.atleast_2d(np.asarray(truth, dtype=np.float64))
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {truth.shape}")
    if pred.shape[0] == 0:
        raise ValueError("empty batch")
    return float(np.mean(np.sum((pred - truth) ** 2, axis=1)))


def mse_loss_grad(pred: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """d(mse_loss)/d(pred): 2*(pred - truth)/B."""
    pred = np.atleast_2d(np.asarray(pred, dtype=np.float64))
    truth = np.atleast_2d(np.asarray(truth, dtype=np.float64))
    return 2.0 * (pred - truth) / pred.shape[0]


def backward(model: MlpModel, cache, grad_out: np.ndarray):
    """Gradients of the loss w.r.t. every weight and bias.

    grad_out is dLoss/d(output), shape matching the forward output. Returns a
    list of (dW, db) in layer order.
    """
    inputs, pres = cache["inputs"], cache["pres"]
    if len(inputs) != model.n_layers:
        raise ValueError("stale cache: layer count mismatch")
    for z, w in zip(pres, model.weights):
        if z.shape[-1] != w.shape[0]:
            raise ValueError("stale cache: shape mismatch")
    g = np.atleast_2d(np.asarray(grad_out, dtype=np.float64))
    slope = model.spec.leaky_slope
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * model.n_layers
    for i in range(model.n_layers - 1, -1, -1):
        if i != model.n_layers - 1:
            g = g * _leaky_grad(pres[i], slope)
        grads[i] = (g.T @ inputs[i], g.sum(axis=0))
        if i > 0:
            g = g @ model.weights[i]
    return grads


def lr_at_epoch(config: TrainConfig, epoch: int) -> float:
    """Stepped decay: lr0 * (1 - lr_decay)^(epoch // lr_decay_every).

    Evaluated in exact decimal arithmetic with a single final rounding, so
    percentage chains like 1e-4 -> 8e-5 -> 6.4e-5 land on the literal values.
    """
    k = epoch // config.lr_decay_every
    keep = 1 - Fraction(str(config.lr_decay))
    return float(Fraction(str(config.lr0)) * keep ** k)


@dataclass
class _AdamState:
    m: list
    v: list
    t: int = 0


def train(spec: MlpSpec, config: TrainConfig, features: np.ndarray,
          labels: np.ndarray) -> tuple[MlpModel, list[float]]:
    """Mini-batch training; returns the model and per-epoch mean loss.

    Batches are contiguous slices of a fresh permutation each epoch (one
    Philox stream seeded by shuffle_seed), the trailing partial batch is
    kept, and parameters update in layer order, so runs are bit-reproducible.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("empty training set")
    if y.shape != (x.shape[0], 2):
        raise ValueError(f"labels must be (n, 2), got {y.shape}")
    if x.shape[1] != spec.input_dim:
        raise ValueError(f"feature dim {x.shape[1]} != network input {spec.input_dim}")

    model = init_model(spec)
    adam = None
    if config.optimizer == "adam":
        adam = _AdamState(m=[(np.zeros_like(w), np.zeros_like(b))
                             for w, b in zip(model.weights, model.biases)],
                          v=[(np.zeros_like(w), np.zeros_like(b))
                             for w, b in zip(model.weights, model.biases)])
    shuffle_rng = make_rng(config.shuffle_seed)
    n = x.shape[0]
    history: list[float] = []

    for epoch in range(config.epochs):
        lr = lr_at_epoch(config, epoch)
        perm = shuffle_rng.permutation(n)
        loss_sum = 0.0
        for lo in range(0, n, config.batch_size):
            idx = perm[lo:lo + config.batch_size]
            pred, cache = forward(model, x[idx])
            loss_sum += mse_loss(pred, y[idx]) * len(idx)
            grads = backward(model, cache, mse_loss_grad(pred, y[idx]))
            if adam is not None:
                _adam_step(model, grads, adam, lr, config)
            else:
                _sgd_step(model, grads, lr)
        epoch_loss = loss_sum / n
        if not np.isfinite(epoch_loss):
            raise TrainingDiverged(f"training diverged at epoch {epoch}")
        history.append(epoch_loss)
    return model, history


def _sgd_step(model: MlpModel, grads, lr: float) -> None:
    for (w, b), (dw, db) in zip(zip(model.weights, model.biases), grads):
        w -= lr * dw
        b -= lr * db


def _adam_step(model: MlpModel, grads, state: _AdamState, lr: float,
               config: TrainConfig) -> None:
    b1, b2, eps = config.adam_beta1, config.adam_beta2, config.adam_eps
    state.t += 1
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for i, (dw, db) in enumerate(grads):
        mw, mb = state.m[i]
        vw, vb = state.v[i]
        mw *= b1; mw += (1 - b1) * dw
        mb *= b1; mb += (1 - b1) * db
        vw *= b2; vw += (1 - b2) * dw ** 2
        vb *= b2; vb += (1 - b2) * db ** 2
        model.weights[i] -= lr * (mw / c1) / (np.sqrt(vw / c2) + eps)
        model.biases[i] -= lr * (mb / c1) / (np.sqrt(vb / c2) + eps)


def param_count(spec: MlpSpec) -> int:
    """Total trainable parameters: sum of in*out + out over layers."""
    return sum(din * dout + dout for din, dout in spec.layer_dims)
