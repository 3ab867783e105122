"""Train a small model until it memorizes a handful of windows. A model
that cannot do this has a bug in its forward or backward pass.

    python demos/03_overfit_small_model.py --forged /tmp/forge-demo/forged --out /tmp/overfit.npz

Uses the corpus written by 02_forge_dataset.py.
"""

import argparse
from pathlib import Path

import numpy as np

from mp3splice.forge import load_splits, read_manifest
from mp3splice.model import ModelConfig, forward, predict_labels
from mp3splice.model.weights import save_weights
from mp3splice.training import TrainConfig, train

ap = argparse.ArgumentParser()
ap.add_argument("--forged", default="/tmp/forge-demo/forged")
ap.add_argument("--out", default="/tmp/overfit.npz")
ap.add_argument("--windows", type=int, default=32)
args = ap.parse_args()
root = Path(args.forged)

data = load_splits(read_manifest(root / "manifest.jsonl"), root)["train"].dataset
ds = data.subset(np.linspace(0, len(data) - 1, args.windows).astype(int))
ds.norm = ds.fit_normalization()
mdct, sf, sc, y = ds.batch(np.arange(len(ds)))
print(f"{len(ds)} windows of {y.shape[1]} frames, {y.mean():.0%} of frames labeled 1")

cfg = ModelConfig.small(d_model=60, n_heads=5, n_layers=2, dropout=0.0)
print(f"model: d_model {cfg.d_model}, {cfg.n_heads} heads, {cfg.n_layers} layers")


def accuracy(params):
    return 100.0 * float(np.mean(predict_labels(forward(params, mdct, sf, sc)) == y))


# the training set doubles as the validation set; the evaluator scores plain accuracy
state = train(ds, ds, TrainConfig(learning_rate=1e-3, dropout=0.0, epoch_cap=500, patience=500, stop_at=95.0),
              cfg, evaluator=accuracy, log=lambda m: print(m) if "*" in m else None)
print(f"best frame accuracy {state.best_score:.1f}% at epoch {state.best_epoch}")

p1 = forward(state.best_params, mdct, sf, sc)[..., 1]
print("window 0 truth:     ", "".join(map(str, y[0])))
print("window 0 predicted: ", "".join(map(str, (p1[0] > 0.5).astype(int))))

# keep the normalization with the weights so localize can use them directly
save_weights(state.best_params, args.out, {"normalization": ds.norm.to_dict()})
print(f"weights written to {args.out}")
