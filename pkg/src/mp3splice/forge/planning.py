"""Segments of a source file and the compression plan of their slices."""

from dataclasses import dataclass

import numpy as np

from mp3splice.errors import SourceTooShort
from mp3splice.forge.specs import CompressionSpec, draw_spec

SLICE_FRAMES = 10
MIN_SEGMENT = 80
MAX_SEGMENT = 320
VARIABLE_SLICE_RANGE = (10, 80)


def segment_source(n_frames: int, rng) -> list:
    """Consecutive (start_frame, n_frames) segments.

    Each length is drawn uniformly from {80, 90, ..., 320} restricted to what
    still fits; once fewer than 80 frames remain the rest is dropped.
    """
    if n_frames < MIN_SEGMENT:
        raise SourceTooShort(f"{n_frames} frames, need at least {MIN_SEGMENT}")
    segments, start = [], 0
    while n_frames - start >= MIN_SEGMENT:
        longest = min(MAX_SEGMENT, (n_frames - start) // SLICE_FRAMES * SLICE_FRAMES)
        choices = np.arange(MIN_SEGMENT, longest + 1, SLICE_FRAMES)
        length = int(choices[rng.integers(len(choices))])
        segments.append((start, length))
        start += length
    return segments


@dataclass(frozen=True)
class SlicePlan:
    slice_index: int       # 1-based
    start: int             # first frame, relative to the segment
    length: int            # frames
    chain: tuple           # CompressionSpec per compression, last one shared by the segment

    @property
    def n_compressions(self) -> int:
        return len(self.chain)

    def to_dict(self) -> dict:
        return {"slice_index": self.slice_index, "start": self.start, "length": self.length,
                "n_compressions": self.n_compressions, "chain": [c.to_dict() for c in self.chain]}

    @classmethod
    def from_dict(cls, d: dict) -> "SlicePlan":
        return cls(d["slice_index"], d["start"], d["length"],
                   tuple(CompressionSpec.from_dict(c) for c in d["chain"]))


def labels_from_plans(plans) -> np.ndarray:
    """y_l = 1 iff frame l lies in a slice compressed more than once."""
    return np.concatenate([np.full(p.length, int(p.n_compressions > 1), dtype=np.int8) for p in plans])


def plan_segment(n_frames: int, rng, encoders=("encoderA", "encoderB"), variable: bool = False) -> tuple:
    """(slice plans, labels) for one segment.

    Fixed mode: 10-frame slices; odd slices are compressed 2 or 3 times, even
    slices once. Variable mode: slice lengths uniform in 10..80 frames and
    1..3 compressions per slice. The final compression is drawn once and ends
    every chain.
    """
    encoders = tuple(encoders)
    final = draw_spec(rng, encoders)
    if variable:
        lengths = _variable_lengths(n_frames, rng)
    else:
        if n_frames % SLICE_FRAMES:
            raise ValueError(f"segment of {n_frames} frames is not a whole number of slices")
        lengths = [SLICE_FRAMES] * (n_frames // SLICE_FRAMES)
    plans, start = [], 0
    for i, length in enumerate(lengths, start=1):
        if variable:
            n = int(rng.integers(1, 4))
        else:
            n = int(rng.integers(2, 4)) if i % 2 else 1
        chain = tuple(draw_spec(rng, encoders) for _ in range(n - 1)) + (final,)
        plans.append(SlicePlan(i, start, length, chain))
        start += length
    return plans, labels_from_plans(plans)


def _variable_lengths(n_frames: int, rng) -> list:
    lo, hi = VARIABLE_SLICE_RANGE
    lengths, left = [], n_frames
    while left > 0:
        if left <= hi:
            length = left
        else:
            # never leave a tail shorter than the minimum slice
            length = int(rng.integers(lo, min(hi, left - lo) + 1))
        lengths.append(length)
        left -= length
    return lengths
