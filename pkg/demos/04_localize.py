"""Label every frame of an MP3 as compressed once (0) or more than once (1)
and list the multiply-compressed regions in seconds.

    python demos/04_localize.py --weights /tmp/overfit.npz [file.mp3]

The weights from 03_overfit_small_model.py only memorized a few windows, so
expect rough labels; the point is the plumbing.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from mp3splice.features import NormalizationStats
from mp3splice.forge import read_manifest
from mp3splice.localize import localize
from mp3splice.model.weights import load_weights

ap = argparse.ArgumentParser()
ap.add_argument("mp3", nargs="?")
ap.add_argument("--weights", default="/tmp/overfit.npz")
ap.add_argument("--forged", default="/tmp/forge-demo/forged")
args = ap.parse_args()

truth = None
if args.mp3:
    path = Path(args.mp3)
else:
    # a test-split segment from the demo corpus, with its known labels
    root = Path(args.forged)
    rec = next(r for r in read_manifest(root / "manifest.jsonl") if r["split"] == "test")
    path, truth = root / rec["mp3"], rec["output_labels"]

params, extra = load_weights(args.weights)
norm = NormalizationStats.from_dict(extra["normalization"]) if "normalization" in extra else None
result = localize(path, params, norm)

labels = [f.label for f in result.frames]
print(f"{path.name}: {len(labels)} frames")
print("predicted:", "".join("-" if v is None else str(v) for v in labels))
if truth is not None:
    print("truth:    ", "".join("-" if v is None else str(v) for v in truth))
    both = [(a, b) for a, b in zip(labels, truth) if a is not None and b is not None]
    print(f"frame accuracy {100 * np.mean([a == b for a, b in both]):.1f}%")

print("\nregions labeled 1:")
for r in result.to_dict()["regions"][:10]:
    print(f"  frames {r['first_frame']}-{r['last_frame']}: {r['start_time']:.3f}s - {r['end_time']:.3f}s")
print("\nfirst frames of the JSON result:")
print(json.dumps(result.to_dict()["frames"][:3], indent=1))
