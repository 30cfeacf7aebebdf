"""From-scratch feed-forward binary classifier on numpy.

The network is a plain dense chain: an input layer, relu hidden layers
(six by default), and a single sigmoid output unit. Weights W[i] have
shape (fan_out, fan_in) and layer i computes z = a @ W[i].T + b[i].
Training minimises binary cross-entropy with Adam and stops early on the
validation F1 of class 1. Everything is deterministic given the seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import NormStats, PatternVocab, feature_dimension
from .errors import (
    DimensionMismatch,
    DivergedLoss,
    EmptyDataset,
    LengthMismatch,
    SchemaMismatch,
)
from .features import FEATURE_SCHEMA_VERSION
from .metrics import compute_metrics

MODEL_SCHEMA_VERSION = "tabext-model-v1"

DEFAULT_HIDDEN = (256, 128, 64, 32, 16, 8)
PROB_EPS = 1e-7
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


HIDDEN_LAYER_COUNT = 6


@dataclass(frozen=True)
class NetworkConfig:
    """Training knobs; the defaults are the shipped configuration.

    The hidden layer count is fixed at six (input + 6 hidden + output = 8
    layers); only the widths are configurable.
    """

    hidden_sizes: tuple[int, ...] = DEFAULT_HIDDEN
    learning_rate: float = 1e-4
    batch_size: int = 256
    max_epochs: int = 200
    patience: int = 10
    seed: int = 0
    threshold: float = 0.5

    def __post_init__(self):
        if len(self.hidden_sizes) != HIDDEN_LAYER_COUNT:
            raise ValueError(
                f"exactly {HIDDEN_LAYER_COUNT} hidden layers required, "
                f"got {len(self.hidden_sizes)}"
            )
        if any(s < 1 for s in self.hidden_sizes):
            raise ValueError(f"hidden widths must be positive, got {self.hidden_sizes}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie in (0,1), got {self.threshold}")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 0:
            raise ValueError("batch_size and max_epochs must be >= 1, patience >= 0")


class Mlp:
    """Dense relu chain with one sigmoid output unit."""

    def __init__(
        self,
        input_dim: int,
        hidden_sizes: tuple[int, ...] = DEFAULT_HIDDEN,
        rng: np.random.Generator | None = None,
    ):
        if input_dim < 1:
            raise ValueError(f"input_dim must be >= 1, got {input_dim}")
        if not hidden_sizes or any(s < 1 for s in hidden_sizes):
            raise ValueError(f"hidden sizes must be positive, got {hidden_sizes}")
        if rng is None:
            rng = np.random.default_rng(0)
        self.input_dim = int(input_dim)
        self.hidden_sizes = tuple(int(s) for s in hidden_sizes)
        dims = [self.input_dim, *self.hidden_sizes, 1]
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for i in range(len(dims) - 1):
            fan_in, fan_out = dims[i], dims[i + 1]
            if i < len(dims) - 2:
                limit = np.sqrt(6.0 / fan_in)  # He-uniform for relu layers
            else:
                limit = np.sqrt(6.0 / (fan_in + fan_out))  # Xavier for sigmoid
            self.weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
            self.biases.append(np.zeros(fan_out))

    @classmethod
    def from_arrays(cls, weights: list[np.ndarray], biases: list[np.ndarray]) -> "Mlp":
        if len(weights) < 2 or len(weights) != len(biases):
            raise DimensionMismatch(
                f"{len(weights)} weight and {len(biases)} bias arrays"
            )
        for i, (w, b) in enumerate(zip(weights, biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise DimensionMismatch(f"layer {i}: W {w.shape} vs b {b.shape}")
            if i > 0 and w.shape[1] != weights[i - 1].shape[0]:
                raise DimensionMismatch(
                    f"layer {i} expects {w.shape[1]} inputs but layer "
                    f"{i - 1} emits {weights[i - 1].shape[0]}"
                )
        if weights[-1].shape[0] != 1:
            raise DimensionMismatch(
                f"output layer must have width 1, got {weights[-1].shape[0]}"
            )
        model = cls.__new__(cls)
        model.input_dim = int(weights[0].shape[1])
        model.hidden_sizes = tuple(int(w.shape[0]) for w in weights[:-1])
        model.weights = [np.asarray(w, dtype=float) for w in weights]
        model.biases = [np.asarray(b, dtype=float) for b in biases]
        return model

    def parameters(self) -> list[np.ndarray]:
        """Live references, interleaved [W0, b0, W1, b1, ...]."""
        params = []
        for w, b in zip(self.weights, self.biases):
            params.append(w)
            params.append(b)
        return params

    def _check_input(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise DimensionMismatch(f"expected a 2-d matrix, got shape {X.shape}")
        if X.shape[1] != self.input_dim:
            raise DimensionMismatch(
                f"expected {self.input_dim} features, got {X.shape[1]}"
            )
        if X.shape[0] == 0:
            raise EmptyDataset("cannot run the network on zero rows")
        return X

    def _forward(self, X: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Returns (pre-activations z per layer, activations a per layer).

        activations[0] is the input; the final activation is the sigmoid
        output clipped into [PROB_EPS, 1 - PROB_EPS].
        """
        activations = [X]
        zs = []
        a = X
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w.T + b
            zs.append(z)
            if i < len(self.weights) - 1:
                a = np.maximum(z, 0.0)
            else:
                a = np.clip(1.0 / (1.0 + np.exp(-z)), PROB_EPS, 1.0 - PROB_EPS)
            activations.append(a)
        return zs, activations

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = self._check_input(X)
        _, activations = self._forward(X)
        return activations[-1][:, 0]

    def predict(self, X: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        return (self.predict_proba(X) >= threshold).astype(int)

    def loss(self, X: np.ndarray, y: np.ndarray) -> float:
        p = self.predict_proba(X)
        y = _check_targets(y, len(p))
        return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))

    def loss_and_gradients(
        self, X: np.ndarray, y: np.ndarray
    ) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
        """Mean BCE over the batch and its gradients for every W and b."""
        X = self._check_input(X)
        y = _check_targets(y, X.shape[0])
        zs, activations = self._forward(X)
        p = activations[-1][:, 0]
        loss = float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))

        n = X.shape[0]
        grads_w = [np.empty(0)] * len(self.weights)
        grads_b = [np.empty(0)] * len(self.biases)
        dz = ((p - y) / n)[:, None]
        for i in range(len(self.weights) - 1, -1, -1):
            grads_w[i] = dz.T @ activations[i]
            grads_b[i] = dz.sum(axis=0)
            if i > 0:
                da = dz @ self.weights[i]
                dz = da * (zs[i - 1] > 0.0)
        return loss, grads_w, grads_b


def _check_targets(y, n: int) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise DimensionMismatch(f"targets must be 1-d, got shape {y.shape}")
    if len(y) != n:
        raise LengthMismatch(f"{n} rows vs {len(y)} targets")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("targets must be 0 or 1")
    return y


class AdamOptimizer:
    """Standard Adam with bias correction; one shared step counter."""

    def __init__(self, params: list[np.ndarray], learning_rate: float = 1e-4):
        self.params = params
        self.learning_rate = float(learning_rate)
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray]):
        if len(grads) != len(self.params):
            raise LengthMismatch(f"{len(grads)} gradients for {len(self.params)} params")
        self.t += 1
        for i, (p, g) in enumerate(zip(self.params, grads)):
            self.m[i] = ADAM_BETA1 * self.m[i] + (1.0 - ADAM_BETA1) * g
            self.v[i] = ADAM_BETA2 * self.v[i] + (1.0 - ADAM_BETA2) * g * g
            m_hat = self.m[i] / (1.0 - ADAM_BETA1 ** self.t)
            v_hat = self.v[i] / (1.0 - ADAM_BETA2 ** self.t)
            p -= self.learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float
    val_f1: float


@dataclass(frozen=True)
class TrainResult:
    history: tuple[EpochStats, ...]
    best_epoch: int
    best_val_f1: float
    stopped_early: bool


def train(
    model: Mlp,
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    config: NetworkConfig = NetworkConfig(),
    rng: np.random.Generator | None = None,
) -> TrainResult:
    """Mini-batch Adam with early stopping on validation class-1 F1.

    The best-scoring weights (first epoch on ties) are restored into the
    model before returning. Shuffles come from `rng`, or from a generator
    seeded with config.seed when omitted.
    """
    X_train = model._check_input(X_train)
    y_train = _check_targets(y_train, X_train.shape[0])
    X_val = model._check_input(X_val)
    y_val = _check_targets(y_val, X_val.shape[0])
    if rng is None:
        rng = np.random.default_rng(config.seed)

    optimizer = AdamOptimizer(model.parameters(), config.learning_rate)
    n = X_train.shape[0]
    best_f1 = -1.0
    best_epoch = 0
    best_params: list[np.ndarray] = []
    bad_epochs = 0
    stopped_early = False
    history = []

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            loss, grads_w, grads_b = model.loss_and_gradients(
                X_train[batch], y_train[batch]
            )
            if not np.isfinite(loss):
                raise DivergedLoss(f"non-finite training loss at epoch {epoch}")
            grads = []
            for gw, gb in zip(grads_w, grads_b):
                grads.append(gw)
                grads.append(gb)
            optimizer.step(grads)

        train_loss = model.loss(X_train, y_train)
        val_loss = model.loss(X_val, y_val)
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            raise DivergedLoss(f"non-finite epoch loss at epoch {epoch}")
        val_f1 = compute_metrics(
            y_val.astype(int), model.predict(X_val, config.threshold)
        ).per_class[1].f1
        history.append(EpochStats(epoch, train_loss, val_loss, val_f1))

        if val_f1 > best_f1:
            best_f1 = val_f1
            best_epoch = epoch
            best_params = [p.copy() for p in model.parameters()]
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= config.patience:
                stopped_early = True
                break

    for live, best in zip(model.parameters(), best_params):
        live[...] = best
    return TrainResult(tuple(history), best_epoch, best_f1, stopped_early)


def save_checkpoint(
    path: str | Path,
    model: Mlp,
    stats: NormStats,
    vocab: PatternVocab,
    metadata: dict | None = None,
):
    """JSON checkpoint carrying the model plus everything needed to encode
    raw feature rows at prediction time. Byte-deterministic for equal state.
    """
    if len(model.hidden_sizes) != HIDDEN_LAYER_COUNT:
        raise DimensionMismatch(
            f"checkpoints require the {HIDDEN_LAYER_COUNT}-hidden-layer "
            f"architecture, got {len(model.hidden_sizes)} hidden layers"
        )
    payload = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "feature_schema_version": FEATURE_SCHEMA_VERSION,
        "input_dim": model.input_dim,
        "hidden_sizes": list(model.hidden_sizes),
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "norm_stats": stats.to_dict(),
        "pattern_vocab": list(vocab.patterns),
        "metadata": metadata or {},
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_checkpoint(path: str | Path) -> tuple[Mlp, NormStats, PatternVocab, dict]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    version = payload.get("schema_version")
    if version != MODEL_SCHEMA_VERSION:
        raise SchemaMismatch(
            f"checkpoint version {version!r}, expected {MODEL_SCHEMA_VERSION!r}"
        )
    feature_version = payload.get("feature_schema_version")
    if feature_version != FEATURE_SCHEMA_VERSION:
        raise SchemaMismatch(
            f"checkpoint feature schema {feature_version!r}, "
            f"expected {FEATURE_SCHEMA_VERSION!r}"
        )
    model = Mlp.from_arrays(
        [np.asarray(w, dtype=float) for w in payload["weights"]],
        [np.asarray(b, dtype=float) for b in payload["biases"]],
    )
    if len(model.hidden_sizes) != HIDDEN_LAYER_COUNT:
        raise SchemaMismatch(
            f"checkpoint must hold {HIDDEN_LAYER_COUNT} hidden layers, "
            f"got {len(model.hidden_sizes)}"
        )
    stats = NormStats.from_dict(payload["norm_stats"])
    vocab = PatternVocab(tuple(payload["pattern_vocab"]))
    if model.input_dim != feature_dimension(vocab):
        raise SchemaMismatch(
            f"model expects {model.input_dim} features but the stored "
            f"vocabulary implies {feature_dimension(vocab)}"
        )
    return model, stats, vocab, payload.get("metadata", {})
