"""Scaled-down end-to-end experiment: synthetic sources -> forged corpus ->
full-size model -> test-set scores and recall tables.

    python demos/mini_experiment.py --work /tmp/mini --segments 2000 --hours 4

Stages are cached in --work, so an interrupted run picks up where it left
off. At full scale (every window, training to convergence) the numpy model
needs days on one core; --train-windows and --hours bound the cost, and the
JSON summary records exactly what was run.
"""

import argparse
import json
import time
from pathlib import Path

import numpy as np

from mp3splice.features import WindowDataset
from mp3splice.forge import forge_dataset, load_splits, read_manifest, write_corpus
from mp3splice.metrics import PAPER_TYPE_COLUMNS, evaluate, format_tables
from mp3splice.model import ModelConfig, predict_labels
from mp3splice.training import TrainConfig, predict_dataset, train


def log(msg):
    print(time.strftime("%H:%M:%S"), msg, flush=True)


def subsample(ds, n, seed):
    if n is None or len(ds) <= n:
        return ds
    return ds.subset(np.sort(np.random.default_rng(seed).choice(len(ds), n, replace=False)))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--work", required=True)
    ap.add_argument("--segments", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--train-windows", type=int, default=8000)
    ap.add_argument("--val-windows", type=int, default=800)
    ap.add_argument("--test-windows", type=int, default=4000)
    ap.add_argument("--hours", type=float, default=4.0, help="training wall-clock budget")
    ap.add_argument("--patience", type=int, default=20)
    ap.add_argument("--lr", type=float, default=1e-4)
    ap.add_argument("--eval-batch", type=int, default=16, help="windows per evaluation pass; bounds memory")
    ap.add_argument("--run-name", default="run")
    ap.add_argument("--prepare-only", action="store_true", help="stop after building the window caches")
    args = ap.parse_args()
    work = Path(args.work)

    # 1. sources: ~17 segments per 90 s file
    sources = work / "sources"
    if not sources.exists():
        n_files = int(np.ceil(args.segments / 16))
        log(f"synthesizing {n_files} source files")
        write_corpus(sources, n_files, 90.0, seed=args.seed)

    # 2. forge
    manifest = work / "forged" / "manifest.jsonl"
    if not manifest.exists():
        log("forging")
        forge_dataset(sources, work / "forged", args.seed, workers=args.workers, max_segments=args.segments, log=log)
    records = read_manifest(manifest)
    ok = [r for r in records if r["status"] == "ok"]
    log(f"{len(ok)}/{len(records)} segments reconciled")

    # 3. windows
    cache = work / "cache"
    if not (cache / "test.npz").exists():
        log("parsing forged MP3s")
        cache.mkdir(parents=True, exist_ok=True)
        for name, data in load_splits(records, manifest.parent).items():
            data.dataset.save(cache / f"{name}.npz")
            last, n = data.window_metadata()
            np.savez_compressed(cache / f"{name}_meta.npz", last_type=last.astype(str), n_compressions=n)
    splits = {s: WindowDataset.load(cache / f"{s}.npz") for s in ("train", "val", "test")}
    norm = splits["train"].fit_normalization()
    for ds in splits.values():
        ds.norm = norm
    sizes = {s: len(d) for s, d in splits.items()}
    log(f"windows per split: {sizes}")
    if args.prepare_only:
        return

    # 4. train the full-size model on a bounded subset
    tr = subsample(splits["train"], args.train_windows, args.seed)
    va = subsample(splits["val"], args.val_windows, args.seed + 1)
    cfg = TrainConfig(learning_rate=args.lr, seed=args.seed, dtype="float32", patience=args.patience,
                      eval_batch_size=args.eval_batch, time_budget=3600 * args.hours)
    t0 = time.time()
    state = train(tr, va, cfg, ModelConfig(), out_dir=work / args.run_name, log=log)
    train_seconds = time.time() - t0

    # 5. test
    test_idx = np.sort(np.random.default_rng(args.seed + 2).choice(
        sizes["test"], min(sizes["test"], args.test_windows or sizes["test"]), replace=False))
    te = splits["test"].subset(test_idx)
    probs, y = predict_dataset(state.best_params, te, args.eval_batch, np.float32)
    meta = np.load(cache / "test_meta.npz")
    report = evaluate(y.ravel(), predict_labels(probs).ravel(), meta["last_type"][test_idx].ravel(),
                      meta["n_compressions"][test_idx].ravel(), PAPER_TYPE_COLUMNS)
    print(format_tables(report, "mini experiment", PAPER_TYPE_COLUMNS))
    summary = {
        "segments": len(records), "segments_reconciled": len(ok), "windows": sizes,
        "learning_rate": args.lr, "train_windows_used": len(tr), "val_windows_used": len(va), "test_windows_used": len(te),
        "epochs": state.epoch, "best_epoch": state.best_epoch, "best_val_balanced_accuracy": state.best_score,
        "train_hours": round(train_seconds / 3600, 2), "report": report.to_dict(),
    }
    (work / args.run_name / "summary.json").write_text(json.dumps(summary, indent=2))
    (work / "summary.json").write_text(json.dumps(summary, indent=2))
    log(f"test balanced accuracy {report.balanced_accuracy:.2f} (chance 50)")


if __name__ == "__main__":
    main()
