"""Frame-level splice localization over a whole MP3 file.

Windows of L frames start every ``stride`` frames; if the last one stops
short of the end, one more window ending at the last frame is added. Frames
seen by several windows average their class-1 probabilities, then a frame is
labeled 1 when that mean exceeds 0.5. Unusable frames are skipped, so
windows run over the remaining usable frames in order.
"""

from dataclasses import dataclass, field

import numpy as np

from mp3splice.bitstream import parse_file
from mp3splice.errors import FileTooShort
from mp3splice.features import NormalizationStats, raw_frame_features
from mp3splice.model.network import forward

RESULT_SCHEMA = 1
SECONDS_PER_FRAME = 1152 / 44100


def frame_time(frame_index: int) -> float:
    return frame_index * SECONDS_PER_FRAME


def window_cover(n_frames: int, length: int = 20, stride: int = 8) -> list:
    """Window starts covering frames 0..n_frames-1."""
    if n_frames < length:
        raise FileTooShort(f"{n_frames} usable frames, need at least {length}")
    starts = list(range(0, n_frames - length + 1, stride))
    if starts[-1] + length < n_frames:
        starts.append(n_frames - length)
    return starts


def aggregate(window_probs, starts, n_frames: int) -> np.ndarray:
    """Mean class-1 probability per frame over every window containing it."""
    total, count = np.zeros(n_frames), np.zeros(n_frames)
    length = window_probs.shape[1]
    for p, s in zip(window_probs, starts):
        total[s:s + length] += p
        count[s:s + length] += 1
    return total / count


@dataclass
class FrameLabel:
    frame_index: int
    start_time: float
    label: int | None           # None for unusable frames
    probability: float | None


@dataclass
class LocalizationResult:
    path: str
    frames: list
    regions: list = field(default_factory=list)   # (first frame, last frame) of runs of label 1

    def to_dict(self) -> dict:
        return {
            "schema": RESULT_SCHEMA,
            "file": self.path,
            "frames": [{"frame_index": f.frame_index, "start_time": round(f.start_time, 3), "label": f.label,
                        "probability": None if f.probability is None else round(f.probability, 6)}
                       for f in self.frames],
            "regions": [{"first_frame": a, "last_frame": b, "start_time": round(frame_time(a), 3),
                         "end_time": round(frame_time(b + 1), 3)} for a, b in self.regions],
        }


def label_regions(frames) -> list:
    """Maximal runs of consecutive frame indices labeled 1."""
    regions, run = [], None
    for f in frames:
        if f.label == 1 and run is not None and f.frame_index == run[1] + 1:
            run[1] = f.frame_index
        elif f.label == 1:
            if run is not None:
                regions.append(tuple(run))
            run = [f.frame_index, f.frame_index]
        elif run is not None:
            regions.append(tuple(run))
            run = None
    if run is not None:
        regions.append(tuple(run))
    return regions


def localize(path, params, norm: NormalizationStats | None = None, stride: int = 8,
             batch_size: int = 32) -> LocalizationResult:
    parsed = parse_file(path)
    usable = [r for r in parsed.records if r.usable]
    length = params.config.L
    starts = window_cover(len(usable), length, stride)
    feats = [raw_frame_features(r) for r in usable]
    dtype = next(iter(params.tensors.values())).dtype
    mdct, sf, sc = (np.stack([getattr(f, k) for f in feats]) for k in ("mdct_grid", "scalefac_grid", "scalars"))
    if norm is not None:
        mdct, sf, sc = norm.apply(mdct, sf, sc)
    idx = np.asarray(starts)[:, None] + np.arange(length)
    probs = []
    # windows go through the network as batches; each batch is one vectorized pass
    for lo in range(0, len(starts), batch_size):
        w = idx[lo:lo + batch_size]
        probs.append(forward(params, mdct[w].astype(dtype), sf[w].astype(dtype), sc[w].astype(dtype))[..., 1])
    p1 = aggregate(np.concatenate(probs), starts, len(usable))
    by_index = {r.frame_index: (int(p > 0.5), float(p)) for r, p in zip(usable, p1)}
    frames = [FrameLabel(r.frame_index, frame_time(r.frame_index), *by_index.get(r.frame_index, (None, None)))
              for r in parsed.records]
    return LocalizationResult(str(path), frames, label_regions(frames))
