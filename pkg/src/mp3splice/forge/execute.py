"""Carry out a segment plan with the external encoders.

Label reconciliation: with N planned frames the final encode usually holds
N+1 audio frames because the encoder delays the signal. For output frame j
the energy of granule 0 is centred on input sample 1152·j + 278 − delay,
where ``delay`` is the encoder delay from the LAME tag (576 for the
encoders used here; centre measured with clicks swept through a LAME
encode). Output frame j takes the label of the input frame holding that
sample. Frames whose centre falls outside the segment take the nearest
frame's label and are flagged.
"""

import hashlib
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from mp3splice.bitstream.frames import scan_stream
from mp3splice.errors import BitstreamError, EncoderFailure, FrameCountMismatch
from mp3splice.forge.audio import FRAME_SAMPLES, read_wav, write_wav
from mp3splice.forge.planning import labels_from_plans

GRANULE0_CENTRE = 278
FRAME_TOLERANCE = 2


@dataclass
class Reconciliation:
    labels: np.ndarray         # one per output frame
    source_frame: np.ndarray   # planned frame each output frame was mapped to
    flagged: list              # output frames labeled by extension


def reconcile(labels, n_output: int, delay: int) -> Reconciliation:
    labels = np.asarray(labels)
    n = len(labels)
    if abs(n_output - n) > FRAME_TOLERANCE:
        raise FrameCountMismatch(f"final encode has {n_output} frames for {n} planned")
    j = np.arange(n_output)
    src = np.floor_divide(FRAME_SAMPLES * j + GRANULE0_CENTRE - delay, FRAME_SAMPLES)
    outside = (src < 0) | (src >= n)
    src = np.clip(src, 0, n - 1)
    return Reconciliation(labels[src].astype(np.int8), src, [int(i) for i in np.flatnonzero(outside)])


@dataclass
class ForgeReport:
    n_planned: int
    n_output: int
    encoder_delay: int
    delay_source: str                  # "tag" or "configured"
    reconciliation: Reconciliation
    roundtrips: int = 0
    length_fixes: list = field(default_factory=list)   # (slice_index, step, decoded - expected)
    digest: str = ""


def roundtrip(tools, samples, spec, tmp: Path) -> tuple:
    """Compress then decompress; returns (samples, decoded-length error)."""
    write_wav(tmp / "rt_in.wav", samples)
    tools.encode(spec, tmp / "rt_in.wav", tmp / "rt.mp3")
    tools.decode(tmp / "rt.mp3", tmp / "rt_out.wav")
    out = read_wav(tmp / "rt_out.wav")
    if out.shape[1] != samples.shape[1]:
        out = np.repeat(out[:, :1], samples.shape[1], axis=1) if out.shape[1] == 1 else out[:, :samples.shape[1]]
    err = len(out) - len(samples)
    if err > 0:
        out = out[:len(samples)]
    elif err < 0:
        out = np.concatenate([out, np.zeros((-err, out.shape[1]), out.dtype)])
    return out, err


def execute_plan(samples, plans, tools, out_path, workdir=None) -> ForgeReport:
    """Apply every slice's chain and write the final MP3 to ``out_path``.

    ``samples`` are the segment's int16 samples (frames·1152, channels).
    """
    samples = np.asarray(samples, dtype=np.int16)
    if samples.ndim == 1:
        samples = samples[:, None]
    n_frames = sum(p.length for p in plans)
    if len(samples) != n_frames * FRAME_SAMPLES:
        raise ValueError(f"{len(samples)} samples for a {n_frames}-frame plan")
    finals = {p.chain[-1] for p in plans}
    if len(finals) != 1:
        raise ValueError("slices disagree on the final compression")
    final = finals.pop()
    out_path = Path(out_path)
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        tmp = Path(tmp)
        parts, fixes, trips = [], [], 0
        for p in plans:
            x = samples[p.start * FRAME_SAMPLES:(p.start + p.length) * FRAME_SAMPLES]
            for step, spec in enumerate(p.chain[:-1], start=1):
                x, err = roundtrip(tools, x, spec, tmp)
                trips += 1
                if err:
                    fixes.append((p.slice_index, step, err))
            parts.append(x)
        write_wav(tmp / "segment.wav", np.concatenate(parts))
        out_path.parent.mkdir(parents=True, exist_ok=True)
        tools.encode(final, tmp / "segment.wav", out_path)
    data = out_path.read_bytes()
    try:
        info = scan_stream(data)
    except BitstreamError as exc:
        raise EncoderFailure(f"{out_path}: unreadable encoder output ({exc})") from exc
    if info.encoder_delay is not None:
        delay, source = info.encoder_delay, "tag"
    else:
        delay, source = tools.delay(final.encoder), "configured"
    rec = reconcile(labels_from_plans(plans), len(info.frames), delay)
    return ForgeReport(n_frames, len(info.frames), delay, source, rec, trips, fixes,
                       hashlib.sha256(data).hexdigest())
