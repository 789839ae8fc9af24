"""Training loop, optimizers, and early stopping.

Every source of randomness (batch shuffling, dropout masks) is derived
from TrainingConfig.seed, so identical inputs give identical histories.
"""

import csv
import logging
import math
import shutil
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, DivergenceError
from .models import save_weights
from .nn.network import cross_entropy, softmax

log = logging.getLogger(__name__)

OPTIMIZER_KINDS = ("adam", "sgd")
DEFAULT_LEARNING_RATES = {"adam": 1e-4, "sgd": 1e-2}
DEFAULT_SGD_MOMENTUM = 0.9
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

MONITORS = ("val_loss", "val_accuracy")


@dataclass(frozen=True)
class EarlyStopSpec:
    monitor: str = "val_loss"
    patience: int = 10
    min_delta: float = 0.0
    restore_best: bool = True

    def to_dict(self):
        return {
            "monitor": self.monitor,
            "patience": self.patience,
            "min_delta": self.min_delta,
            "restore_best": self.restore_best,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True)
class TrainingConfig:
    optimizer_kind: str = "adam"
    learning_rate: float = None  # None -> per-optimizer default
    momentum: float = None  # sgd only; None -> 0.9 for sgd
    max_epochs: int = 100
    batch_size: int = 32
    early_stopping: EarlyStopSpec = field(default_factory=EarlyStopSpec)
    seed: int = 0

    @property
    def resolved_learning_rate(self):
        if self.learning_rate is not None:
            return self.learning_rate
        return DEFAULT_LEARNING_RATES[self.optimizer_kind]

    @property
    def resolved_momentum(self):
        if self.optimizer_kind != "sgd":
            return 0.0
        return DEFAULT_SGD_MOMENTUM if self.momentum is None else self.momentum

    def to_dict(self):
        return {
            "optimizer_kind": self.optimizer_kind,
            "learning_rate": self.learning_rate,
            "momentum": self.momentum,
            "max_epochs": self.max_epochs,
            "batch_size": self.batch_size,
            "early_stopping": self.early_stopping.to_dict(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["early_stopping"] = EarlyStopSpec.from_dict(d.get("early_stopping", {}))
        return cls(**d)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: float
    val_accuracy: float


@dataclass
class TrainedModel:
    model: object
    history: tuple
    stopped_early: bool
    best_epoch: int
    config: TrainingConfig


# ---- optimizers --------------------------------------------------------------


class SGD:
    """Stochastic gradient descent with classical momentum."""

    def __init__(self, learning_rate, momentum=0.0):
        self.learning_rate = learning_rate
        self.momentum = momentum
        self._velocity = {}

    def step(self, params):
        for key, value, grad in params:
            if self.momentum:
                buf = self._velocity.get(key)
                if buf is None:
                    buf = np.zeros_like(value)
                    self._velocity[key] = buf
                buf *= self.momentum
                buf += grad
                value -= self.learning_rate * buf
            else:
                value -= self.learning_rate * grad

    def describe(self):
        return {"kind": "sgd", "learning_rate": self.learning_rate, "momentum": self.momentum}


class Adam:
    """Adam with standard decay coefficients and bias correction."""

    def __init__(self, learning_rate, beta1=ADAM_BETA1, beta2=ADAM_BETA2, eps=ADAM_EPS):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = {}
        self._v = {}

    def step(self, params):
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for key, value, grad in params:
            m = self._m.get(key)
            if m is None:
                m = self._m[key] = np.zeros_like(value)
                self._v[key] = np.zeros_like(value)
            v = self._v[key]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(grad)
            m_hat = m / value.dtype.type(b1c)
            v_hat = v / value.dtype.type(b2c)
            value -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)

    def describe(self):
        return {
            "kind": "adam",
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
        }


def make_optimizer(kind, learning_rate, momentum=0.0):
    if kind not in OPTIMIZER_KINDS:
        raise ConfigError([f"optimizer_kind must be one of {OPTIMIZER_KINDS}, got {kind!r}"])
    if learning_rate is None or learning_rate <= 0:
        raise ConfigError([f"learning_rate must be positive, got {learning_rate}"])
    if kind == "sgd":
        return SGD(learning_rate, momentum=momentum or 0.0)
    return Adam(learning_rate)


# ---- early stopping ----------------------------------------------------------


def _series(history, monitor):
    if monitor == "val_loss":
        return [r.val_loss for r in history]
    if monitor == "val_accuracy":
        return [r.val_accuracy for r in history]
    raise ValueError(f"monitor must be one of {MONITORS}, got {monitor!r}")


def best_epoch_of(history, monitor):
    """1-based epoch of the best monitored value (earliest on ties)."""
    values = _series(history, monitor)
    if monitor == "val_loss":
        best = min(values)
    else:
        best = max(values)
    return values.index(best) + 1


def early_stop_check(history, spec):
    """Evaluate the stopping rule over a history prefix.

    Returns ("stop" | "continue", best_epoch). An epoch improves when it
    beats the running true best by more than min_delta; stopping fires
    once `patience` consecutive epochs (at least one) fail to improve.
    """
    if not history:
        raise ValueError("history must be nonempty")
    values = _series(history, spec.monitor)
    minimize = spec.monitor == "val_loss"
    best_so_far = values[0]
    wait = 0
    for current in values[1:]:
        if minimize:
            improved = current < best_so_far - spec.min_delta
            best_so_far = min(best_so_far, current)
        else:
            improved = current > best_so_far + spec.min_delta
            best_so_far = max(best_so_far, current)
        wait = 0 if improved else wait + 1
    decision = "stop" if (wait >= spec.patience and wait >= 1) else "continue"
    return decision, best_epoch_of(history, spec.monitor)


# ---- evaluation passes -------------------------------------------------------


def evaluate(model, data, batch_size):
    """Mean loss and accuracy over a dataset in eval mode (dropout off)."""
    n = len(data)
    total_loss = 0.0
    correct = 0
    for start in range(0, n, batch_size):
        idx = np.arange(start, min(start + batch_size, n))
        x, y = data.load(idx)
        logits = model.logits(x, training=False)
        total_loss += cross_entropy(logits, y) * len(idx)
        probs = softmax(logits)
        correct += int(np.sum(probs.argmax(axis=1) == y))
    return total_loss / n, correct / n


def predict_classes(model, data, batch_size):
    """Argmax class indices; exact ties resolve to the lowest index."""
    n = len(data)
    out = np.empty(n, dtype=np.int64)
    for start in range(0, n, batch_size):
        idx = np.arange(start, min(start + batch_size, n))
        x, _ = data.load(idx)
        out[idx] = model.forward(x, training=False).argmax(axis=1)
    return out


# ---- the training loop -------------------------------------------------------


def train(model, train_data, val_data, config, checkpoint_dir=None):
    """Run the seeded loop with early stopping; returns a TrainedModel.

    Dropout is active only on training steps. With restore_best, the model
    ends at its best-epoch snapshot. Non-finite losses abort with
    DivergenceError carrying the offending epoch.
    """
    if len(train_data) == 0 or len(val_data) == 0:
        raise DataError("train and validation sets must be nonempty")
    if getattr(train_data, "ids", None) and getattr(val_data, "ids", None):
        overlap = set(train_data.ids) & set(val_data.ids)
        if overlap:
            raise DataError(f"train and validation sets overlap on {len(overlap)} ids")
    if config.max_epochs < 1 or config.batch_size < 1:
        raise ConfigError(["max_epochs and batch_size must be >= 1"])

    shuffle_seq, dropout_seq = np.random.SeedSequence(config.seed).spawn(2)
    shuffle_rng = np.random.default_rng(shuffle_seq)
    dropout_rng = np.random.default_rng(dropout_seq)
    optimizer = make_optimizer(
        config.optimizer_kind, config.resolved_learning_rate, config.resolved_momentum
    )

    if checkpoint_dir is not None:
        checkpoint_dir = Path(checkpoint_dir)
        checkpoint_dir.mkdir(parents=True, exist_ok=True)

    n = len(train_data)
    history = []
    best_snapshot = None
    stopped_early = False
    spec = config.early_stopping

    for epoch in range(1, config.max_epochs + 1):
        perm = shuffle_rng.permutation(n)
        running_loss = 0.0
        running_correct = 0
        for start in range(0, n, config.batch_size):
            batch = perm[start : start + config.batch_size]
            x, y = train_data.load(batch)
            loss, correct = model.loss_and_gradients(x, y, rng=dropout_rng, training=True)
            if not math.isfinite(loss):
                raise DivergenceError(epoch)
            optimizer.step(
                (key, layer.params[pname], layer.grads[pname])
                for key, layer, pname in model.parameters(trainable_only=True)
            )
            running_loss += loss * len(batch)
            running_correct += correct
        val_loss, val_acc = evaluate(model, val_data, config.batch_size)
        if not math.isfinite(val_loss):
            raise DivergenceError(epoch, "non-finite validation loss")
        history.append(
            EpochRecord(epoch, running_loss / n, running_correct / n, val_loss, val_acc)
        )
        log.info(
            "epoch %d/%d: train_loss %.4f train_acc %.3f val_loss %.4f val_acc %.3f",
            epoch, config.max_epochs, running_loss / n, running_correct / n, val_loss, val_acc,
        )
        if checkpoint_dir is not None:
            epoch_dir = checkpoint_dir / f"epoch_{epoch}"
            epoch_dir.mkdir(exist_ok=True)
            save_weights(model, epoch_dir / "weights.npz")
        if best_epoch_of(history, spec.monitor) == epoch:
            best_snapshot = model.snapshot()
        decision, _ = early_stop_check(history, spec)
        if decision == "stop":
            stopped_early = True
            break

    best_epoch = best_epoch_of(history, spec.monitor)
    if spec.restore_best and best_snapshot is not None:
        model.load_snapshot(best_snapshot)
    if checkpoint_dir is not None:
        best_dir = checkpoint_dir / "best"
        if best_dir.exists():
            shutil.rmtree(best_dir)
        shutil.copytree(checkpoint_dir / f"epoch_{best_epoch}", best_dir)
    return TrainedModel(
        model=model,
        history=tuple(history),
        stopped_early=stopped_early,
        best_epoch=best_epoch,
        config=config,
    )


# ---- history serialization ---------------------------------------------------

HISTORY_FIELDS = ("epoch", "train_loss", "train_accuracy", "val_loss", "val_accuracy")


def write_history_csv(history, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HISTORY_FIELDS)
        for r in history:
            writer.writerow(
                [r.epoch, repr(r.train_loss), repr(r.train_accuracy), repr(r.val_loss), repr(r.val_accuracy)]
            )


def read_history_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            EpochRecord(
                int(row["epoch"]),
                float(row["train_loss"]),
                float(row["train_accuracy"]),
                float(row["val_loss"]),
                float(row["val_accuracy"]),
            )
            for row in reader
        ]
