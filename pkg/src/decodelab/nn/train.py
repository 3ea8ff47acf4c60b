"""Mini-batch training loop: AMSGrad, plateau LR reduction, early stop."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from decodelab.nn.model import Model, _loss_backward
from decodelab.nn.optim import AmsGrad

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 256
    max_epochs: int = 30
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    plateau_factor: float = 0.5
    plateau_patience: int = 2
    min_delta: float = 1e-4
    min_learning_rate: float = 1e-5
    label_weights: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.plateau_factor < 1.0:
            raise ValueError("plateau_factor must be in (0, 1)")
        if self.min_delta < 0:
            raise ValueError("min_delta must be >= 0")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("batch_size and max_epochs must be positive")


@dataclass
class EpochStats:
    epoch: int
    loss: float
    accuracy: float
    learning_rate: float


@dataclass
class TrainLog:
    epochs: list[EpochStats] = field(default_factory=list)
    stopped_reason: str = ""

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "loss", "accuracy", "lr"])
            for e in self.epochs:
                writer.writerow([e.epoch, f"{e.loss:.8f}", f"{e.accuracy:.6f}",
                                 f"{e.learning_rate:.8g}"])


def train(model: Model, inputs: np.ndarray, labels: np.ndarray,
          config: TrainConfig) -> TrainLog:
    """Train in place; deterministic for a fixed seed in single-threaded mode.

    The learning rate is multiplied by plateau_factor whenever the epoch loss
    has not improved by min_delta for plateau_patience consecutive epochs;
    training stops once the learning rate falls below min_learning_rate (or
    max_epochs is hit).
    """
    inputs = np.asarray(inputs, dtype=model.dtype)
    labels = np.asarray(labels, dtype=np.int64)
    if len(inputs) == 0:
        raise ValueError("empty training set")
    if len(inputs) != len(labels):
        raise ValueError("inputs/labels length mismatch")
    k = model.spec.output_classes
    if labels.min() < 0 or labels.max() >= k:
        raise ValueError("label out of range")
    weights = config.label_weights
    if weights is not None:
        weights = np.asarray(weights, dtype=model.dtype)
        if weights.shape != (k,):
            raise ValueError(f"label_weights must have shape ({k},)")
    else:
        weights = np.ones(k, dtype=model.dtype)

    opt = AmsGrad(model.params, config.learning_rate, config.beta1,
                  config.beta2, config.epsilon)
    rng = np.random.Generator(np.random.Philox(key=np.array([config.seed, 0x7247], dtype=np.uint64)))

    logbook = TrainLog()
    best_loss = np.inf
    stall = 0
    n = len(inputs)
    for epoch in range(config.max_epochs):
        t0 = time.perf_counter()
        order = rng.permutation(n)
        epoch_loss = 0.0
        correct = 0
        weight_total = 0.0
        for lo in range(0, n, config.batch_size):
            idx = order[lo:lo + config.batch_size]
            xb, yb = inputs[idx], labels[idx]
            loss, probs = _loss_backward(model, xb, yb, weights)
            correct += int((np.argmax(probs, axis=1) == yb).sum())
            opt.step(model.params, model.grads)
            bw = float(weights[yb].sum())
            epoch_loss += loss * bw
            weight_total += bw
        epoch_loss /= weight_total
        accuracy = correct / n
        logbook.epochs.append(EpochStats(epoch, epoch_loss, accuracy, opt.learning_rate))
        log.info("epoch %d: loss %.5f acc %.4f lr %.2g (%.1fs)",
                 epoch, epoch_loss, accuracy, opt.learning_rate, time.perf_counter() - t0)

        if epoch_loss < best_loss - config.min_delta:
            best_loss = epoch_loss
            stall = 0
        else:
            stall += 1
            if stall >= config.plateau_patience:
                opt.learning_rate *= config.plateau_factor
                stall = 0
                if opt.learning_rate < config.min_learning_rate:
                    logbook.stopped_reason = "learning rate below minimum"
                    break
    if not logbook.stopped_reason:
        logbook.stopped_reason = "max epochs reached"
    return logbook
