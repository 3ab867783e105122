"""Whole-corpus forging and the path from a manifest to window datasets."""

import hashlib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from mp3splice.bitstream import parse_file
from mp3splice.errors import EncoderFailure, FileFormatError, FrameCountMismatch, SourceTooShort
from mp3splice.features import WindowDataset
from mp3splice.forge.audio import FRAME_SAMPLES, read_wav
from mp3splice.forge.execute import execute_plan
from mp3splice.forge.manifest import SCHEMA_VERSION, slice_plans, write_manifest
from mp3splice.forge.partition import SPLITS, partition, windows_in
from mp3splice.forge.planning import plan_segment, segment_source
from mp3splice.forge.tools import ENCODERS, Toolchain


def list_sources(sources) -> list:
    if isinstance(sources, (str, Path)):
        root = Path(sources)
        return sorted(p for p in root.rglob("*") if p.suffix.lower() == ".wav")
    return [Path(p) for p in sources]


def derived_seed(*keys) -> int:
    return int(np.random.SeedSequence(list(keys)).generate_state(1)[0])


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _forge_segment(job: dict, tools: Toolchain, out_dir: Path) -> dict:
    rec = {k: job[k] for k in ("schema", "segment_id", "source", "source_sha256", "frame_range", "seed",
                               "variable_slices", "tools")}
    rng = np.random.default_rng(job["seed"])
    plans, labels = plan_segment(job["n_frames"], rng, ENCODERS, job["variable_slices"])
    rec.update(slices=[p.to_dict() for p in plans], final=plans[0].chain[-1].to_dict(),
               labels=labels.tolist(), mp3=f"mp3/{job['segment_id']}.mp3", split=None)
    try:
        report = execute_plan(job["samples"], plans, tools, out_dir / rec["mp3"])
    except (EncoderFailure, FrameCountMismatch) as exc:
        rec.update(status="failed", error=f"{type(exc).__name__}: {exc}")
        return rec
    r = report.reconciliation
    rec.update(status="ok", mp3_sha256=report.digest, n_output_frames=report.n_output,
               output_labels=r.labels.tolist(), output_source_frames=r.source_frame.tolist(),
               flagged_frames=r.flagged, encoder_delay=report.encoder_delay, delay_source=report.delay_source,
               roundtrips=report.roundtrips, length_fixes=report.length_fixes)
    return rec


def forge_dataset(sources, out_dir, seed: int, tools: Toolchain | None = None, variable: bool = False,
                  workers: int = 2, max_segments: int | None = None, log=None) -> list:
    """Forge every source into segments, partition them and write
    ``out_dir/manifest.jsonl``. Returns the manifest records.

    Segments run on a pool of ``workers`` threads, each driving its own
    encoder subprocesses; records are gathered in job order and written once.
    """
    out_dir = Path(out_dir)
    tools = tools or Toolchain.from_config()
    versions = tools.probe()
    paths = list_sources(sources)
    root = Path(sources) if isinstance(sources, (str, Path)) else None
    jobs = []
    for si, path in enumerate(paths):
        samples = read_wav(path)
        n_frames = len(samples) // FRAME_SAMPLES
        try:
            segments = segment_source(n_frames, np.random.default_rng(derived_seed(seed, si)))
        except SourceTooShort:
            if log:
                log(f"skipping {path.name}: shorter than one segment")
            continue
        name = str(path.relative_to(root)) if root else str(path)
        digest = _digest(path)
        for gi, (start, length) in enumerate(segments):
            jobs.append({"schema": SCHEMA_VERSION, "segment_id": f"s{si:04d}_g{gi:03d}", "source": name,
                         "source_sha256": digest, "frame_range": [start, start + length],
                         "seed": derived_seed(seed, si, gi), "variable_slices": variable, "tools": versions,
                         "n_frames": length,
                         "samples": samples[start * FRAME_SAMPLES:(start + length) * FRAME_SAMPLES]})
    if max_segments is not None:
        jobs = jobs[:max_segments]
    if not jobs:
        raise SourceTooShort("no source yields a full segment")
    records = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for i, rec in enumerate(pool.map(lambda j: _forge_segment(j, tools, out_dir), jobs), start=1):
            records.append(rec)
            if log and (i % 25 == 0 or i == len(jobs)):
                log(f"forged {i}/{len(jobs)} segments")
    assign_splits(records, seed)
    write_manifest(out_dir / "manifest.jsonl", records)
    return records


def assign_splits(records, seed: int) -> None:
    ok = [r for r in records if r["status"] == "ok"]
    if not ok:
        return
    splits = partition([windows_in(r["n_output_frames"]) for r in ok], np.random.default_rng(derived_seed(seed, 54)))
    for rec, split in zip(ok, splits):
        rec["split"] = split


def frame_metadata(rec: dict) -> tuple:
    """(labels, n_compressions, last type) per output frame of a forged MP3."""
    plans = slice_plans(rec)
    n_comp = np.concatenate([np.full(p.length, p.n_compressions) for p in plans])
    src = np.asarray(rec["output_source_frames"])
    return np.asarray(rec["output_labels"]), n_comp[src], plans[0].chain[-1].label


class SplitData:
    """A split's windows with per-frame compression metadata for the recall tables."""

    def __init__(self, dataset: WindowDataset, n_compressions: dict, last_type: dict):
        self.dataset = dataset
        self._n = n_compressions
        self._last = last_type

    def window_metadata(self) -> tuple:
        """(last_type (W, L), n_compressions (W, L)) aligned with the dataset."""
        d, length = self.dataset, self.dataset.length
        n = np.stack([self._n[s][k:k + length] for s, k in zip(d.sources, d.local_starts)]) if len(d) else \
            np.zeros((0, length), int)
        last = np.array([[self._last[s]] * length for s in d.sources]).reshape(len(d), length)
        return last, n


def load_splits(records, root, splits=SPLITS) -> dict:
    """Parse the forged MP3s of each split into window datasets."""
    root = Path(root)
    grouped = {s: [] for s in splits}
    for rec in records:
        if rec["status"] == "ok" and rec.get("split") in grouped:
            grouped[rec["split"]].append(rec)
    out = {}
    for split, recs in grouped.items():
        items, n_comp, last = [], {}, {}
        for rec in recs:
            parsed = parse_file(root / rec["mp3"])
            labels, n, last_type = frame_metadata(rec)
            if len(parsed.records) != len(labels):
                raise FileFormatError(f"{rec['mp3']}: {len(parsed.records)} frames, manifest says {len(labels)}")
            items.append((rec["segment_id"], parsed.records, labels))
            n_comp[rec["segment_id"]], last[rec["segment_id"]] = n, last_type
        out[split] = SplitData(WindowDataset.from_records(items), n_comp, last)
    return out
