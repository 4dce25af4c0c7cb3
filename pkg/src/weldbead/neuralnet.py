"""Feedforward network for bead-geometry regression, built from scratch.

Dense layers with ReLU hidden activations and a linear output head. Weights
start from a fan-in-scaled uniform draw (he-uniform), inverted dropout sits
between the hidden layers, and training runs Adam on mean-absolute-error
loss with an optional held-out validation split.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import FeatureScheme


class TrainingDiverged(RuntimeError):
    """Raised when the training loss stops being finite."""


@dataclass(frozen=True)
class MlpArchitecture:
    input_size: int
    hidden_sizes: tuple[int, ...]
    output_size: int
    dropout_rate: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(self.hidden_sizes))
        if min(self.layer_sizes) < 1:
            raise ValueError(f"all layer sizes must be >= 1, got {self.layer_sizes}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.input_size, *self.hidden_sizes, self.output_size)


# Final architectures per feature basis: hidden widths 34-32, 34-35 and
# 20-25-15, all with dropout 0.1 between the hidden layers.
_PRESET_HIDDEN = {
    FeatureScheme.LINEAR: (34, 32),
    FeatureScheme.INTERACTIVE: (34, 35),
    FeatureScheme.FULL: (20, 25, 15),
}


def preset_architecture(scheme: FeatureScheme, output_size: int = 4) -> MlpArchitecture:
    """The final tuned architecture for a feature basis."""
    return MlpArchitecture(
        input_size=scheme.n_features,
        hidden_sizes=_PRESET_HIDDEN[scheme],
        output_size=output_size,
        dropout_rate=0.1,
    )


@dataclass
class MlpModel:
    architecture: MlpArchitecture
    weights: list[np.ndarray]   # weights[l] has shape (fan_in, fan_out)
    biases: list[np.ndarray]
    rng_seed: int

    def copy(self) -> "MlpModel":
        return MlpModel(
            architecture=self.architecture,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            rng_seed=self.rng_seed,
        )


def init_mlp(architecture: MlpArchitecture, seed: int) -> MlpModel:
    """Fresh model: weights uniform in +/- sqrt(6 / fan_in), biases zero."""
    rng = np.random.default_rng(seed)
    sizes = architecture.layer_sizes
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        limit = math.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(architecture, weights, biases, seed)


def _check_inputs(model: MlpModel, inputs) -> np.ndarray:
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    if X.shape[1] != model.architecture.input_size:
        raise ValueError(
            f"model expects {model.architecture.input_size} input features, got {X.shape[1]}"
        )
    return X


def _forward(model: MlpModel, X: np.ndarray, dropout_rng: np.random.Generator | None):
    """Forward pass returning pre-activations, activations and dropout masks.

    With dropout_rng set, each hidden unit's output between hidden layers is
    zeroed with probability dropout_rate and survivors are scaled by
    1 / (1 - rate), so inference needs no rescaling. The last hidden layer
    and the linear output are never dropped.
    """
    rate = model.architecture.dropout_rate
    n_hidden = len(model.architecture.hidden_sizes)
    a = X
    zs, acts, masks = [], [X], []
    for l, (W, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ W + b
        zs.append(z)
        if l == n_hidden:          # output layer: linear activation
            a = z
            masks.append(None)
        else:
            a = np.maximum(z, 0.0)
            mask = None
            if dropout_rng is not None and rate > 0.0 and l < n_hidden - 1:
                mask = (dropout_rng.random(a.shape) >= rate) / (1.0 - rate)
                a = a * mask
            masks.append(mask)
        acts.append(a)
    return zs, acts, masks


def forward(model: MlpModel, inputs, dropout_rng: np.random.Generator | None = None) -> np.ndarray:
    """Predictions for (n, input_size) inputs; pass a generator for train-mode dropout."""
    X = _check_inputs(model, inputs)
    return _forward(model, X, dropout_rng)[1][-1]


def layer_activations(
    model: MlpModel, inputs, dropout_rng: np.random.Generator | None = None
) -> list[np.ndarray]:
    """Per-layer activations (input first, output last); diagnostic helper."""
    X = _check_inputs(model, inputs)
    return _forward(model, X, dropout_rng)[1]


def _backprop(model, X, Y, zs, acts, masks):
    """Gradient of mean(|pred - target|) over all outputs, via reverse mode.

    The subgradient of |r| at r = 0 is taken as 0, as is the ReLU derivative
    at 0, so a perfect fit yields an exactly zero gradient.
    """
    resid = acts[-1] - Y
    delta = np.sign(resid) / resid.size
    g_weights = [None] * len(model.weights)
    g_biases = [None] * len(model.biases)
    for l in range(len(model.weights) - 1, -1, -1):
        g_weights[l] = acts[l].T @ delta
        g_biases[l] = delta.sum(axis=0)
        if l > 0:
            delta = delta @ model.weights[l].T
            if masks[l - 1] is not None:
                delta = delta * masks[l - 1]
            delta = delta * (zs[l - 1] > 0.0)
    return g_weights, g_biases


def gradient(model: MlpModel, inputs, targets):
    """MAE-loss gradient for the inference network (no dropout).

    Returns (weight_grads, bias_grads) with the same shapes as the model
    parameters.
    """
    X = _check_inputs(model, inputs)
    Y = np.atleast_2d(np.asarray(targets, dtype=float))
    if Y.shape != (X.shape[0], model.architecture.output_size):
        raise ValueError(
            f"targets must have shape {(X.shape[0], model.architecture.output_size)}, "
            f"got {Y.shape}"
        )
    if X.shape[0] == 0:
        raise ValueError("gradient needs a non-empty batch")
    zs, acts, masks = _forward(model, X, None)
    return _backprop(model, X, Y, zs, acts, masks)


def mae_loss(model: MlpModel, inputs, targets) -> float:
    preds = forward(model, inputs)
    return float(np.abs(preds - np.atleast_2d(targets)).mean())


@dataclass
class AdamState:
    """First/second moment accumulators with bias-corrected steps."""

    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def adam_init(params: list[np.ndarray], learning_rate: float) -> AdamState:
    state = AdamState(learning_rate=learning_rate)
    state.m = [np.zeros_like(p) for p in params]
    state.v = [np.zeros_like(p) for p in params]
    return state


def adam_step(state: AdamState, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
    """One in-place update: p -= lr * m_hat / (sqrt(v_hat) + eps)."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        m_hat = m / (1 - b1 ** state.t)
        v_hat = v / (1 - b2 ** state.t)
        p -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    learning_rate: float
    seed: int
    validation_fraction: float = 0.1
    batch_size: int | None = None   # None = full batch


@dataclass
class TrainingHistory:
    """Per-epoch loss curves; val_mae entries are NaN without a validation split."""

    train_mae: list[float] = field(default_factory=list)
    val_mae: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.train_mae)

    def to_csv(self, path) -> None:
        lines = ["epoch,train_mae,val_mae"]
        for epoch, (t, v) in enumerate(zip(self.train_mae, self.val_mae), start=1):
            lines.append(f"{epoch},{t:.17g},{v:.17g}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def train(model: MlpModel, inputs, targets, config: TrainConfig):
    """Train a copy of the model; returns (trained model, history).

    Full-batch Adam steps on MAE loss by default; all randomness (validation
    split, dropout masks, mini-batch order) flows from config.seed. The input
    model is left untouched.
    """
    X = _check_inputs(model, inputs)
    Y = np.atleast_2d(np.asarray(targets, dtype=float))
    n = X.shape[0]
    if n == 0:
        raise ValueError("training data must be non-empty")
    if Y.shape != (n, model.architecture.output_size):
        raise ValueError(
            f"targets must have shape {(n, model.architecture.output_size)}, got {Y.shape}"
        )
    vf = config.validation_fraction
    if not 0.0 <= vf <= 0.5:
        raise ValueError(f"validation_fraction must be in [0, 0.5], got {vf}")

    rng = np.random.default_rng(config.seed)
    n_val = int(round(n * vf))
    if vf > 0 and n_val == 0:
        raise ValueError(f"validation fraction {vf} yields an empty split for n={n}")
    if n_val >= n:
        raise ValueError(f"validation split leaves no training data (n={n}, n_val={n_val})")
    perm = rng.permutation(n)
    val_idx, fit_idx = perm[:n_val], perm[n_val:]
    X_val, Y_val = X[val_idx], Y[val_idx]
    X_fit, Y_fit = X[fit_idx], Y[fit_idx]

    trained = model.copy()
    params = trained.weights + trained.biases
    state = adam_init(params, config.learning_rate)
    history = TrainingHistory()
    n_fit = len(X_fit)
    batch = config.batch_size or n_fit

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n_fit) if batch < n_fit else np.arange(n_fit)
        abs_err_sum = 0.0
        for start in range(0, n_fit, batch):
            rows = order[start:start + batch]
            Xb, Yb = X_fit[rows], Y_fit[rows]
            zs, acts, masks = _forward(trained, Xb, rng)
            resid = acts[-1] - Yb
            abs_err_sum += float(np.abs(resid).sum())
            g_w, g_b = _backprop(trained, Xb, Yb, zs, acts, masks)
            adam_step(state, params, g_w + g_b)
        train_mae = abs_err_sum / (n_fit * trained.architecture.output_size)
        if not math.isfinite(train_mae):
            raise TrainingDiverged(f"non-finite training loss at epoch {epoch}")
        val = float("nan")
        if n_val:
            val = float(np.abs(forward(trained, X_val) - Y_val).mean())
        history.train_mae.append(train_mae)
        history.val_mae.append(val)
    return trained, history


def save_model(model: MlpModel, path) -> None:
    """Text serialization: architecture header, then row-major weight/bias blocks."""
    a = model.architecture
    lines = [
        f"input_size = {a.input_size}",
        f"hidden_sizes = {','.join(str(h) for h in a.hidden_sizes)}",
        f"output_size = {a.output_size}",
        f"dropout_rate = {a.dropout_rate:.17g}",
        f"seed = {model.rng_seed}",
    ]
    for l, (W, b) in enumerate(zip(model.weights, model.biases)):
        lines.append(f"[weights {l} {W.shape[0]}x{W.shape[1]}]")
        lines += [" ".join(f"{x:.17g}" for x in row) for row in W]
        lines.append(f"[biases {l} {len(b)}]")
        lines.append(" ".join(f"{x:.17g}" for x in b))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path) -> MlpModel:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = {}
    i = 0
    while i < len(lines) and not lines[i].startswith("["):
        key, _, value = lines[i].partition("=")
        if key.strip():
            header[key.strip()] = value.strip()
        i += 1
    architecture = MlpArchitecture(
        input_size=int(header["input_size"]),
        hidden_sizes=tuple(
            int(h) for h in header["hidden_sizes"].split(",") if h
        ),
        output_size=int(header["output_size"]),
        dropout_rate=float(header["dropout_rate"]),
    )
    weights, biases = [], []
    while i < len(lines):
        tag = lines[i].strip()
        if tag.startswith("[weights"):
            rows = int(tag.split()[2].split("x")[0].strip("]"))
            block = [
                [float(x) for x in lines[i + 1 + r].split()] for r in range(rows)
            ]
            weights.append(np.array(block))
            i += rows + 1
        elif tag.startswith("[biases"):
            biases.append(np.array([float(x) for x in lines[i + 1].split()]))
            i += 2
        else:
            i += 1
    model = MlpModel(architecture, weights, biases, int(header["seed"]))
    expected = list(zip(architecture.layer_sizes, architecture.layer_sizes[1:]))
    actual = [w.shape for w in weights]
    if actual != expected:
        raise ValueError(f"weight shapes {actual} do not chain as {expected}")
    return model
