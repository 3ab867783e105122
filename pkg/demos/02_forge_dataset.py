"""Forge a small labeled corpus: synthetic sources are cut into segments,
every 10-frame slice goes through 1-3 MP3 round trips, and the slices are
joined and compressed once more. Frames of slices that were compressed more
than once are labeled 1.

    python demos/02_forge_dataset.py --out /tmp/forge-demo

Needs the encoders (pip install .[forge] and a C compiler with libmp3lame).
"""

import argparse
import collections
from pathlib import Path

import numpy as np

from mp3splice.bitstream import parse_file
from mp3splice.forge import Toolchain, check_manifest, forge_dataset, read_manifest, write_corpus
from mp3splice.forge.planning import plan_segment
from mp3splice.forge.specs import CompressionSpec

ap = argparse.ArgumentParser()
ap.add_argument("--out", default="/tmp/forge-demo")
ap.add_argument("--files", type=int, default=4)
ap.add_argument("--seed", type=int, default=1)
args = ap.parse_args()
out = Path(args.out)

# a plan is pure bookkeeping, so it can be looked at before any encoding
plans, labels = plan_segment(120, np.random.default_rng(0))
print("plan for a 120-frame segment:")
for p in plans[:4]:
    print(f"  slice {p.slice_index}: frames {p.start}-{p.start + p.length - 1}, "
          f"{' -> '.join(c.label for c in p.chain)}")
print(f"  ... {len(plans)} slices, {int(labels.sum())} of {labels.size} frames labeled 1")

tools = Toolchain.from_config()
for name, version in tools.probe().items():
    print(f"{name}: {version}")

write_corpus(out / "sources", args.files, 30.0, seed=args.seed)
records = forge_dataset(out / "sources", out / "forged", seed=args.seed, tools=tools, log=print)

ok = [r for r in records if r["status"] == "ok"]
print(f"\n{len(ok)}/{len(records)} segments forged, manifest problems: {check_manifest(records) or 'none'}")
print("segments per split:", dict(collections.Counter(r["split"] for r in ok)))

# the final encode is one frame longer than the plan; labels follow the
# encoder delay, so output frame j carries the label of input frame j-1
r = ok[0]
print(f"\n{r['mp3']}: {r['frame_range'][1] - r['frame_range'][0]} planned frames, "
      f"{r['n_output_frames']} in the output, delay {r['encoder_delay']} ({r['delay_source']})")
print(f"flagged frames (outside the segment): {r['flagged_frames']}")
print("planned labels:", "".join(map(str, r["labels"][:40])))
print("output labels: ", "".join("-" if v is None else str(v) for v in r["output_labels"][:40]))
final = CompressionSpec.from_dict(r["final"])
print(f"final compression {final.label} via {final.encoder}, "
      f"parsed frames {len(parse_file(out / 'forged' / r['mp3']).records)}")

again = read_manifest(out / "forged" / "manifest.jsonl")
print(f"manifest re-read: {len(again)} records")
