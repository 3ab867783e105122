"""Command line: forge, extract, train, eval, localize, records.

Exit status 0 on success, 1 on a domain error (or an unreadable file), 2 on
a usage error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from mp3splice.config import CONFIG_ENV, load_config
from mp3splice.errors import LengthMismatch, Mp3SpliceError

EPILOG = f"Configuration: --config FILE, else ${CONFIG_ENV}, else built-in defaults."


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _write_json(obj, out):
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_forge(args, cfg):
    from mp3splice.forge import Toolchain, forge_dataset
    workers = args.workers or cfg.getint("forge", "workers", fallback=2)
    records = forge_dataset(args.sources, args.out, args.seed, Toolchain.from_config(cfg), args.variable_slices,
                            workers, args.max_segments, log=print)
    ok = sum(r["status"] == "ok" for r in records)
    print(f"{ok}/{len(records)} segments forged; manifest at {Path(args.out) / 'manifest.jsonl'}")


def cmd_extract(args, cfg):
    from mp3splice.forge import load_splits, read_manifest
    manifest = Path(args.manifest)
    splits = load_splits(read_manifest(manifest), manifest.parent)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, data in splits.items():
        data.dataset.save(out / f"{name}.npz")
        last, n = data.window_metadata()
        np.savez_compressed(out / f"{name}_meta.npz", last_type=last.astype(str), n_compressions=n)
        print(f"{name}: {len(data.dataset)} windows")
    if len(splits["train"].dataset):
        splits["train"].dataset.fit_normalization().save(out / "normalization.json")


def _load_split(data_dir, name):
    from mp3splice.features import NormalizationStats, WindowDataset
    data_dir = Path(data_dir)
    ds = WindowDataset.load(data_dir / f"{name}.npz")
    ds.norm = NormalizationStats.load(data_dir / "normalization.json")
    return ds


def cmd_train(args, cfg):
    from mp3splice.model.config import ModelConfig
    from mp3splice.training import TrainConfig, train
    train_set, val_set = _load_split(args.data, "train"), _load_split(args.data, "val")
    if args.max_train_windows and len(train_set) > args.max_train_windows:
        pick = np.random.default_rng(args.seed).choice(len(train_set), args.max_train_windows, replace=False)
        train_set = train_set.subset(np.sort(pick))
    model_cfg = ModelConfig.small() if args.small else ModelConfig()
    tc = TrainConfig(learning_rate=args.lr, batch_size=args.batch_size, patience=args.patience,
                     epoch_cap=args.epoch_cap, dropout=args.dropout, seed=args.seed, dtype=args.dtype,
                     checkpoint_every=args.checkpoint_every)
    state = train(train_set, val_set, tc, model_cfg, out_dir=args.out, log=print)
    # best.npz is rewritten so it carries the normalization the model was trained with
    from mp3splice.model.weights import save_weights
    save_weights(state.best_params, Path(args.out) / "best.npz",
                 {"epoch": state.best_epoch, "val_score": state.best_score,
                  "normalization": train_set.norm.to_dict()})
    print(f"best epoch {state.best_epoch}, validation balanced accuracy {state.best_score:.2f}")


def _read_labels(path):
    path = Path(path)
    try:
        if path.suffix == ".npy":
            return np.load(path).ravel()
        text = path.read_text().strip()
        if text.startswith("["):
            return np.asarray(json.loads(text)).ravel()
        return np.asarray([int(c) for c in text.replace(",", " ").split()])
    except (OSError, ValueError) as exc:
        from mp3splice.errors import FileFormatError
        raise FileFormatError(f"{path}: {exc}") from exc


def cmd_eval(args, cfg):
    from mp3splice.metrics import PAPER_TYPE_COLUMNS, evaluate, format_tables
    if args.pred and args.truth:
        y_hat, y = _read_labels(args.pred), _read_labels(args.truth)
        if y.size != y_hat.size:
            raise LengthMismatch(f"{y.size} true labels vs {y_hat.size} predictions")
        report = evaluate(y, y_hat)
    elif args.weights and args.data:
        from mp3splice.features import NormalizationStats
        from mp3splice.model.network import predict_labels
        from mp3splice.model.weights import load_weights
        from mp3splice.training import predict_dataset
        params, extra = load_weights(args.weights)
        ds = _load_split(args.data, args.split)
        if "normalization" in extra:
            ds.norm = NormalizationStats.from_dict(extra["normalization"])
        probs, y = predict_dataset(params, ds, dtype=next(iter(params.tensors.values())).dtype)
        meta = np.load(Path(args.data) / f"{args.split}_meta.npz")
        columns = PAPER_TYPE_COLUMNS if args.paper_columns else None
        report = evaluate(y.ravel(), predict_labels(probs).ravel(), meta["last_type"].ravel(),
                          meta["n_compressions"].ravel(), **({"type_columns": columns} if columns else {}))
        print(format_tables(report, type_columns=columns))
    else:
        raise _UsageError("eval needs either --pred and --truth, or --weights and --data")
    _write_json(report.to_dict(), args.out)


def cmd_localize(args, cfg):
    from mp3splice.features import NormalizationStats
    from mp3splice.localize import localize
    from mp3splice.model.weights import load_weights
    params, extra = load_weights(args.weights)
    norm = NormalizationStats.from_dict(extra["normalization"]) if "normalization" in extra else None
    result = localize(args.mp3, params, norm, stride=args.stride)
    _write_json(result.to_dict(), args.out)


def cmd_records(args, cfg):
    from mp3splice.bitstream import parse_file, record_to_dict
    parsed = parse_file(args.mp3)
    lo, _, hi = (args.frames or ":").partition(":")
    chosen = parsed.records[int(lo) if lo else None:int(hi) if hi else None]
    lines = []
    for rec in chosen:
        if rec.usable:
            d = record_to_dict(rec)
            d["mdct_coef"] = [float(v) for v in d["mdct_coef"]]
            d["mdct_quantized"] = [int(v) for v in d["mdct_quantized"]]
        else:
            d = {"frame_index": rec.frame_index, "usable": False, "error": f"{type(rec.error).__name__}: {rec.error}"}
        lines.append(json.dumps(d, default=int))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mp3splice", description="MP3 splice localization toolkit.", epilog=EPILOG)
    p.add_argument("--config", help="key-value configuration file")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("forge", help="forge a labeled dataset of spliced MP3s from WAV sources", epilog=EPILOG)
    f.add_argument("--sources", required=True, help="directory of WAV files")
    f.add_argument("--out", required=True, help="output directory (MP3s and manifest.jsonl)")
    f.add_argument("--seed", type=int, required=True)
    f.add_argument("--variable-slices", action="store_true", help="slices of 10-80 frames, 1-3 compressions each")
    f.add_argument("--workers", type=int, help="parallel segment jobs (default from config)")
    f.add_argument("--max-segments", type=int, help="stop after this many segments")
    f.set_defaults(func=cmd_forge)

    e = sub.add_parser("extract", help="parse a forged dataset into window caches per split")
    e.add_argument("--manifest", required=True)
    e.add_argument("--out", required=True, help="directory for train/val/test caches")
    e.add_argument("--seed", type=int, default=0, help="unused; accepted for uniformity")
    e.set_defaults(func=cmd_extract)

    t = sub.add_parser("train", help="train a model on extracted caches")
    t.add_argument("--data", required=True, help="directory written by extract")
    t.add_argument("--out", required=True, help="directory for history.jsonl and best.npz")
    t.add_argument("--seed", type=int, required=True)
    t.add_argument("--small", action="store_true", help="reduced model (d_model 60, 5 heads, 2 layers)")
    t.add_argument("--lr", type=float, default=1e-4)
    t.add_argument("--batch-size", type=int, default=32)
    t.add_argument("--patience", type=int, default=20)
    t.add_argument("--epoch-cap", type=int, default=1000)
    t.add_argument("--dropout", type=float, default=0.2)
    t.add_argument("--dtype", choices=("float64", "float32"), default="float32")
    t.add_argument("--checkpoint-every", type=int, default=0)
    t.add_argument("--max-train-windows", type=int, help="train on a random subset of this size")
    t.set_defaults(func=cmd_train)

    v = sub.add_parser("eval", help="score predictions, or a model on an extracted split")
    v.add_argument("--pred", help="predicted labels (.npy, JSON list or whitespace-separated 0/1)")
    v.add_argument("--truth", help="true labels, same formats")
    v.add_argument("--weights")
    v.add_argument("--data", help="directory written by extract")
    v.add_argument("--split", default="test", choices=("train", "val", "test"))
    v.add_argument("--paper-columns", action="store_true", help="only the eight last-type columns of the paper")
    v.add_argument("--out", help="write the JSON report here")
    v.add_argument("--seed", type=int, default=0, help="unused; accepted for uniformity")
    v.set_defaults(func=cmd_eval)

    lo = sub.add_parser("localize", help="label every frame of an MP3 as singly or multiply compressed")
    lo.add_argument("mp3")
    lo.add_argument("--weights", required=True)
    lo.add_argument("--out", help="write the JSON result here (default stdout)")
    lo.add_argument("--stride", type=int, default=8)
    lo.set_defaults(func=cmd_localize)

    r = sub.add_parser("records", help="dump per-frame codec records as JSON lines")
    r.add_argument("mp3")
    r.add_argument("--frames", help="python-style slice, e.g. 10:20")
    r.add_argument("--out")
    r.set_defaults(func=cmd_records)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config)
        args.func(args, cfg)
    except _UsageError as exc:
        parser._subparsers._group_actions[0].choices[args.command].print_help(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (Mp3SpliceError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
