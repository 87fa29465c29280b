"""Feed-forward network with a single sigmoid output unit, trained by
mini-batch stochastic gradient descent on log-loss."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dataio import Dataset
from .errors import ComputationError, DataWarning, ParameterError
from .classifiers.base import FittedModel, PROB, register


@dataclass(frozen=True)
class MlpConfig:
    hidden_layers: tuple = (50, 50)
    activation: str = "rectifier"   # "rectifier" | "tanh"
    epochs: int = 10
    learning_rate: float = 0.005
    batch_size: int = 32
    seed: int = 0
    l2_reg: float = 0.0

    def __post_init__(self):
        if any(w <= 0 for w in self.hidden_layers):
            raise ParameterError("hidden layer widths must be positive")
        if self.activation not in ("rectifier", "tanh"):
            raise ParameterError(f"unknown activation {self.activation!r}")
        if self.learning_rate <= 0:
            raise ParameterError("learning_rate must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ParameterError("epochs and batch_size must be positive")


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class MlpParams:
    weights: list
    biases: list
    activation: str
    loss_trace: list = field(default_factory=list)

    def forward(self, X):
        """Returns (activations per layer, pre-activations per layer)."""
        acts = [X]
        zs = []
        a = X
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ W + b
            zs.append(z)
            if i == last:
                a = _sigmoid(z)
            elif self.activation == "tanh":
                a = np.tanh(z)
            else:
                a = np.maximum(z, 0.0)
            acts.append(a)
        return acts, zs

    def score_matrix(self, X):
        acts, _ = self.forward(X)
        return acts[-1][:, 0]

    def to_state(self):
        return {"weights": [W.tolist() for W in self.weights],
                "biases": [b.tolist() for b in self.biases],
                "activation": self.activation,
                "loss_trace": [float(v) for v in self.loss_trace]}

    @classmethod
    def from_state(cls, state):
        return cls(weights=[np.array(W, dtype=np.float64) for W in state["weights"]],
                   biases=[np.array(b, dtype=np.float64) for b in state["biases"]],
                   activation=state["activation"],
                   loss_trace=list(state["loss_trace"]))


def _init_params(sizes, activation, rng):
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        if activation == "rectifier":
            scale = np.sqrt(2.0 / fan_in)
        else:
            scale = np.sqrt(2.0 / (fan_in + fan_out))
        weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def _loss(params: MlpParams, X, y, l2_reg):
    p = np.clip(params.score_matrix(X), 1e-12, 1 - 1e-12)
    data = -np.mean(y * np.log(p) + (1 - y) * np.log(1 - p))
    reg = 0.5 * l2_reg * sum(float((W ** 2).sum()) for W in params.weights)
    return float(data + reg / X.shape[0])


def backprop_gradients(params: MlpParams, X, y, l2_reg=0.0):
    """Mean-per-sample gradients of log-loss (+ l2 on weights)."""
    n = X.shape[0]
    acts, zs = params.forward(X)
    p = acts[-1][:, 0]
    delta = ((p - y) / n)[:, None]
    grads_W, grads_b = [], []
    for layer in range(len(params.weights) - 1, -1, -1):
        gW = acts[layer].T @ delta + (l2_reg / n) * params.weights[layer]
        gb = delta.sum(axis=0)
        grads_W.append(gW)
        grads_b.append(gb)
        if layer > 0:
            delta = delta @ params.weights[layer].T
            if params.activation == "tanh":
                delta = delta * (1.0 - np.tanh(zs[layer - 1]) ** 2)
            else:
                delta = delta * (zs[layer - 1] > 0.0)
    return grads_W[::-1], grads_b[::-1]


def fit_mlp(train: Dataset, cfg: MlpConfig) -> FittedModel:
    """Mini-batch SGD with epoch-shuffled batches and seeded init
    (He-style scaling for the rectifier, Xavier-style for tanh)."""
    X = train.X
    y = train.y.astype(np.float64)
    if np.unique(train.y).size < 2:
        raise ParameterError("training data must contain both classes")
    if np.abs(X.mean(axis=0)).max() > 2.0 or X.std(axis=0).max() > 5.0:
        warnings.warn("features look unstandardized; training may be unstable",
                      DataWarning)
    rng = np.random.default_rng(cfg.seed)
    sizes = [X.shape[1], *cfg.hidden_layers, 1]
    weights, biases = _init_params(sizes, cfg.activation, rng)
    params = MlpParams(weights=weights, biases=biases, activation=cfg.activation)
    n = X.shape[0]
    last_finite = None
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            gW, gb = backprop_gradients(params, X[batch], y[batch], cfg.l2_reg)
            for W, b, dW, db in zip(params.weights, params.biases, gW, gb):
                W -= cfg.learning_rate * dW
                b -= cfg.learning_rate * db
        loss = _loss(params, X, y, cfg.l2_reg)
        if not np.isfinite(loss):
            raise ComputationError(
                f"training loss diverged at epoch {epoch + 1}; last finite "
                f"epoch loss was {last_finite}")
        last_finite = loss
        params.loss_trace.append(loss)
    return FittedModel(
        algorithm="mlp",
        feature_names=train.feature_names,
        hyperparameters={"hidden_layers": list(cfg.hidden_layers),
                         "activation": cfg.activation, "epochs": cfg.epochs,
                         "learning_rate": cfg.learning_rate,
                         "batch_size": cfg.batch_size, "seed": cfg.seed,
                         "l2_reg": cfg.l2_reg},
        params=params,
        kind=PROB,
    )


def gradient_check(params: MlpParams, X, y, epsilon: float = 1e-5,
                   l2_reg: float = 0.0) -> float:
    """Max relative error between backprop and central finite differences.

    For the rectifier, parameters whose perturbation flips any activation
    sign are skipped (the loss is not differentiable across a kink).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    gW, gb = backprop_gradients(params, X, y, l2_reg)
    analytic = np.concatenate([g.ravel() for g in gW] + [g.ravel() for g in gb])

    tensors = params.weights + params.biases

    def relu_pattern():
        _, zs = params.forward(X)
        return [z > 0 for z in zs[:-1]]

    base_pattern = relu_pattern() if params.activation == "rectifier" else None
    numeric = np.zeros_like(analytic)
    keep = np.ones(analytic.size, dtype=bool)
    pos = 0
    for tensor in tensors:
        flat = tensor.ravel()
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + epsilon
            hi = _loss(params, X, y, l2_reg)
            hi_pat = relu_pattern() if base_pattern is not None else None
            flat[idx] = orig - epsilon
            lo = _loss(params, X, y, l2_reg)
            lo_pat = relu_pattern() if base_pattern is not None else None
            flat[idx] = orig
            if base_pattern is not None:
                same = all(
                    np.array_equal(a, b) and np.array_equal(a, c)
                    for a, b, c in zip(base_pattern, hi_pat, lo_pat))
                if not same:
                    keep[pos + idx] = False
                    continue
            numeric[pos + idx] = (hi - lo) / (2.0 * epsilon)
        pos += flat.size
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
    rel = np.abs(analytic - numeric) / denom
    return float(rel[keep].max())


register("mlp", MlpParams)
