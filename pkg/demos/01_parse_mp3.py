"""Walk through one MP3 file: frames, the LAME tag, and the codec fields of
granule 0 / channel 0 that become the model's per-frame features.

    python demos/01_parse_mp3.py [file.mp3]
"""

import sys
from pathlib import Path

import numpy as np

from mp3splice.bitstream import parse_file
from mp3splice.features import SCALAR_FIELDS, raw_frame_features

path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parents[1] / "tests" / "data" / "music60.mp3"
parsed = parse_file(path)
info = parsed.info

# the Info/Xing frame is metadata, not audio, so it is not in parsed.records
print(f"{path.name}: {len(parsed)} audio frames, tag {info.tag_kind}, encoder {info.encoder}")
print(f"encoder delay {info.encoder_delay} samples, padding {info.encoder_padding}")

usable = [r for r in parsed.records if r.usable]
print(f"{len(usable)} usable frames, {len(parsed) - len(usable)} unusable")
for bad in (r for r in parsed.records if not r.usable):
    print(f"  frame {bad.frame_index}: {bad.error}")

# one frame up close
rec = usable[len(usable) // 2]
h, s = rec.header, rec.side
print(f"\nframe {rec.frame_index}: {h.bitrate} kbps, {h.channel_mode}, {h.frame_bytes} bytes")
print(f"  main_data_begin {s.main_data_begin} (bytes borrowed from the reservoir)")
print(f"  block type {s.block_type}, global gain {s.global_gain}, big_values {s.big_values}")
q = rec.mdct.quantized
print(f"  {np.count_nonzero(q)} of 576 quantized lines are nonzero, max |q| = {np.abs(q).max()}")

# features: 576 MDCT values as 32x18, scalefactors as 5x12, 18 scalars
f = raw_frame_features(rec)
print(f"\nfeature shapes: mdct {f.mdct_grid.shape}, scalefactors {f.scalefac_grid.shape}, "
      f"scalars {f.scalars.shape}")
for name, value in zip(SCALAR_FIELDS, f.scalars):
    print(f"  {name:22s} {value:g}")

# how the side information moves across the file
gains = np.array([r.side.global_gain for r in usable])
lengths = np.array([r.side.part2_3_length for r in usable])
print(f"\nglobal_gain over the file: min {gains.min()}, mean {gains.mean():.1f}, max {gains.max()}")
print(f"part2_3_length over the file: min {lengths.min()}, mean {lengths.mean():.0f}, max {lengths.max()} bits")
