"""Cross-entropy training with Adam and patience-based early stopping."""

import dataclasses
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from mp3splice.errors import EmptyDataset, NonFiniteLoss, ShapeMismatch
from mp3splice.metrics import balanced_accuracy
from mp3splice.model.config import ModelConfig
from mp3splice.model.network import (PROB_FLOOR, ModelParameters, forward, init_params, loss_and_grads,
                                     predict_labels)
from mp3splice.model.weights import save_weights


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    batch_size: int = 32
    patience: int = 20
    epoch_cap: int = 1000
    dropout: float = 0.2
    seed: int = 0
    dtype: str = "float64"       # float32 halves the cost of the full-size model
    checkpoint_every: int = 0    # epochs; 0 keeps only the best snapshot
    eval_batch_size: int = 64
    stop_at: float | None = None  # end as soon as the validation score reaches this
    time_budget: float | None = None  # seconds; checked after each epoch

    def __post_init__(self):
        if self.patience < 1:
            raise ValueError("patience must be at least 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")


def loss(probs, labels) -> float:
    """Mean over frames of -log p(true class), p floored at 1e-12."""
    probs, labels = np.asarray(probs), np.asarray(labels)
    if probs.shape[:-1] != labels.shape:
        raise ShapeMismatch(f"probs {probs.shape} vs labels {labels.shape}")
    p = np.take_along_axis(probs, labels[..., None].astype(np.int64), axis=-1)[..., 0]
    return float(-np.log(np.maximum(p, PROB_FLOOR)).mean())


def gradients(params: ModelParameters, batch, seed=None) -> tuple:
    """(loss, grads) for a batch (mdct, scalefac, scalars, labels).

    ``seed`` fixes the dropout masks; None runs without dropout.
    """
    mdct, scalefac, scalars, labels = batch
    if len(labels) == 0:
        raise EmptyDataset("empty batch")
    rng = None if seed is None else (seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed))
    value, grads, _ = loss_and_grads(params, mdct, scalefac, scalars, np.asarray(labels, dtype=np.int64), rng)
    if not np.isfinite(value):
        raise NonFiniteLoss(f"loss is {value}")
    return value, grads


@dataclass
class AdamState:
    m: dict
    v: dict
    step: int = 0

    @classmethod
    def zeros_like(cls, params: ModelParameters) -> "AdamState":
        return cls({k: np.zeros_like(a) for k, a in params.tensors.items()},
                   {k: np.zeros_like(a) for k, a in params.tensors.items()})


def adam_step(params: ModelParameters, state: AdamState, grads: dict, cfg: TrainConfig) -> None:
    """Bias-corrected Adam, updating ``params`` and ``state`` in place."""
    state.step += 1
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    c1, c2 = 1.0 - b1 ** state.step, 1.0 - b2 ** state.step
    for k, g in grads.items():
        m, v = state.m[k], state.v[k]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        params.tensors[k] -= (cfg.learning_rate * (m / c1) / (np.sqrt(v / c2) + cfg.adam_epsilon)).astype(
            params.tensors[k].dtype, copy=False)


def predict_dataset(params: ModelParameters, dataset, batch_size: int = 64, dtype=np.float64) -> tuple:
    """(probabilities (W, L, 2), labels (W, L)) in evaluation mode."""
    probs, labels = [], []
    for lo in range(0, len(dataset), batch_size):
        mdct, sf, sc, y = dataset.batch(np.arange(lo, min(lo + batch_size, len(dataset))), dtype)
        probs.append(forward(params, mdct, sf, sc))
        labels.append(y)
    if not probs:
        raise EmptyDataset("no windows to evaluate")
    return np.concatenate(probs), np.concatenate(labels)


def validation_score(params: ModelParameters, dataset, batch_size: int = 64, dtype=np.float64) -> float:
    probs, labels = predict_dataset(params, dataset, batch_size, dtype)
    return float(balanced_accuracy(labels.ravel(), predict_labels(probs).ravel()))


@dataclass
class TrainState:
    params: ModelParameters
    adam: AdamState
    epoch: int = 0
    best_score: float = -np.inf
    best_epoch: int = 0
    best_params: ModelParameters | None = None
    history: list = field(default_factory=list)


def train(train_set, val_set, config: TrainConfig = TrainConfig(), model_config: ModelConfig | None = None,
          params: ModelParameters | None = None, evaluator=None, out_dir=None, log=None) -> TrainState:
    """Train until ``patience`` epochs pass without a new best validation
    balanced accuracy (or ``epoch_cap`` epochs, or ``stop_at`` is reached). Returns the final state;
    ``state.best_params`` is the best-epoch snapshot.

    ``evaluator(params) -> score`` replaces the validation metric when given.
    """
    if len(train_set) == 0:
        raise EmptyDataset("training set has no windows")
    if evaluator is None and len(val_set) == 0:
        raise EmptyDataset("validation set has no windows")
    dtype = np.dtype(config.dtype)
    rng = np.random.default_rng(config.seed)
    if params is None:
        mc = dataclasses.replace(model_config or ModelConfig(), dropout=config.dropout)
        params = init_params(mc, rng, dtype)
    else:
        params = ModelParameters(dataclasses.replace(params.config, dropout=config.dropout),
                                 {k: v.astype(dtype) for k, v in params.tensors.items()})
    evaluator = evaluator or (lambda p: validation_score(p, val_set, config.eval_batch_size, dtype))
    state = TrainState(params, AdamState.zeros_like(params))
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "history.jsonl").write_text("")
    stale = 0
    reached = False
    started = time.time()
    while state.epoch < config.epoch_cap and stale < config.patience and not reached:
        if config.time_budget is not None and time.time() - started > config.time_budget:
            break
        t0 = time.time()
        state.epoch += 1
        order = rng.permutation(len(train_set))
        losses = []
        for lo in range(0, len(order), config.batch_size):
            batch = train_set.batch(order[lo:lo + config.batch_size], dtype)
            value, grads = gradients(state.params, batch, rng if config.dropout > 0 else None)
            adam_step(state.params, state.adam, grads, config)
            losses.append(value)
        score = float(evaluator(state.params))
        improved = score > state.best_score
        reached = config.stop_at is not None and score >= config.stop_at
        if improved:
            state.best_score, state.best_epoch = score, state.epoch
            state.best_params = state.params.copy()
            stale = 0
        else:
            stale += 1
        row = {"epoch": state.epoch, "train_loss": float(np.mean(losses)), "val_balanced_accuracy": score,
               "best": improved, "seconds": round(time.time() - t0, 3)}
        state.history.append(row)
        if out is not None:
            with open(out / "history.jsonl", "a") as fh:
                fh.write(json.dumps(row) + "\n")
            if improved:
                save_weights(state.best_params, out / "best.npz", {"epoch": state.epoch, "val_score": score})
            if config.checkpoint_every and state.epoch % config.checkpoint_every == 0:
                save_weights(state.params, out / f"epoch{state.epoch:04d}.npz", {"epoch": state.epoch})
        if log is not None:
            log(f"epoch {state.epoch}: loss {row['train_loss']:.4f}, val bal. acc. {score:.2f}"
                f"{' *' if improved else ''}")
    return state
