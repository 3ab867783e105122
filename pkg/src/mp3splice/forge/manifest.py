"""JSON-lines manifest: one record per forged segment."""

import json
from pathlib import Path

import numpy as np

from mp3splice.errors import FileFormatError
from mp3splice.forge.planning import SlicePlan, labels_from_plans

SCHEMA_VERSION = 1
REQUIRED = ("schema", "segment_id", "source", "frame_range", "seed", "slices", "labels", "status")


def write_manifest(path, records) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    tmp.replace(path)


def read_manifest(path) -> list:
    records = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}:{n}: {exc}") from exc
        if rec.get("schema") != SCHEMA_VERSION:
            raise FileFormatError(f"{path}:{n}: schema {rec.get('schema')!r}, expected {SCHEMA_VERSION}")
        missing = [k for k in REQUIRED if k not in rec]
        if missing:
            raise FileFormatError(f"{path}:{n}: missing {', '.join(missing)}")
        records.append(rec)
    return records


def slice_plans(rec: dict) -> list:
    return [SlicePlan.from_dict(s) for s in rec["slices"]]


def check_manifest(records) -> list:
    """Problems found, as strings: label derivability, chain-tail sharing and
    segment-disjoint splits."""
    problems, seen = [], {}
    for rec in records:
        sid = rec["segment_id"]
        plans = slice_plans(rec)
        if not np.array_equal(labels_from_plans(plans), np.asarray(rec["labels"])):
            problems.append(f"{sid}: labels differ from the slice plans")
        if len({p.chain[-1] for p in plans}) != 1:
            problems.append(f"{sid}: slices end in different compressions")
        key = (rec["source"], tuple(rec["frame_range"]))
        if rec.get("split"):
            if seen.setdefault(key, rec["split"]) != rec["split"]:
                problems.append(f"{sid}: segment {key} appears in two splits")
    return problems
