"""Per-frame codec records: bit-reservoir resolution and field extraction."""

import os
from dataclasses import dataclass, field

import numpy as np

from mp3splice.bitstream.bitreader import BitReader
from mp3splice.bitstream.frames import FrameHeader, StreamInfo, scan_stream
from mp3splice.bitstream.huffman import huffman_decode
from mp3splice.bitstream.requantize import requantize
from mp3splice.bitstream.scalefactors import ScaleFactors, decode_scalefactors
from mp3splice.bitstream.sideinfo import SideInfo, parse_side_info
from mp3splice.errors import BitstreamError, ReservoirUnderflow

MAX_RESERVOIR = 511  # largest value a 9-bit main_data_begin can take


@dataclass(frozen=True)
class MdctCoefficients:
    quantized: np.ndarray    # 576 int64, bitstream (pre-reorder) order
    requantized: np.ndarray  # 576 float32


@dataclass(frozen=True)
class CodecFrameRecord:
    """Codec fields of granule 0, channel 0 of one audio frame."""

    frame_index: int
    header: FrameHeader
    side: SideInfo
    scalefactors: ScaleFactors
    mdct: MdctCoefficients
    usable: bool = field(default=True, init=False)


@dataclass(frozen=True)
class UnusableFrame:
    """A frame whose fields could not be recovered; never filled with zeros."""

    frame_index: int
    header: FrameHeader
    error: BitstreamError
    usable: bool = field(default=False, init=False)


@dataclass(frozen=True)
class ParsedFile:
    info: StreamInfo
    records: list  # CodecFrameRecord | UnusableFrame, one per audio frame

    def __len__(self):
        return len(self.records)


def _read_bytes(file) -> bytes:
    if isinstance(file, (bytes, bytearray, memoryview)):
        return bytes(file)
    with open(os.fspath(file), "rb") as fh:
        return fh.read()


def decode_granule(main_data: bytes, header: FrameHeader, side: SideInfo, frame_index: int = 0) -> CodecFrameRecord:
    """Decode granule 0 / channel 0 from main data that starts at its first bit."""
    r = BitReader(main_data)
    part3_end = side.part2_3_length
    sf = decode_scalefactors(r, side)
    q = huffman_decode(r, side, part3_end, header.sampling_rate)
    xr = requantize(q, side, sf, header.sampling_rate)
    return CodecFrameRecord(frame_index, header, side, sf, MdctCoefficients(q, xr))


def parse_file(file, sampling_rates=(44100,), stop_after: int | None = None) -> ParsedFile:
    """Parse every audio frame of an MP3 file (path or bytes).

    Main data is resolved through a rolling reservoir of the preceding frames'
    main-data slots. The reservoir is emptied at every resynchronization gap,
    so the frames right after a gap that point back into it become unusable.
    """
    data = _read_bytes(file)
    info = scan_stream(data, sampling_rates)
    reservoir = b""
    records = []
    for k, h in enumerate(info.frames):
        if stop_after is not None and k > stop_after:
            break
        if h.gap_before:
            reservoir = b""
        frame = data[h.byte_offset:h.byte_offset + h.frame_bytes]
        slot = frame[h.main_data_offset:]
        try:
            side = parse_side_info(frame, h)
            if side.main_data_begin > len(reservoir):
                raise ReservoirUnderflow(
                    f"main_data_begin {side.main_data_begin} but only {len(reservoir)} bytes buffered")
            back = reservoir[len(reservoir) - side.main_data_begin:]
            records.append(decode_granule(back + slot, h, side, k))
        except BitstreamError as exc:
            records.append(UnusableFrame(k, h, exc))
        reservoir = (reservoir + slot)[-MAX_RESERVOIR:]
    return ParsedFile(info, records)


def extract_codec_record(file, frame_index: int) -> CodecFrameRecord:
    """Record for one frame; raises the parse error if the frame is unusable."""
    parsed = parse_file(file, stop_after=frame_index)
    if not 0 <= frame_index < len(parsed.records):
        raise IndexError(f"frame {frame_index} out of range ({len(parsed.records)} frames)")
    rec = parsed.records[frame_index]
    if not rec.usable:
        raise rec.error
    return rec


def record_to_dict(rec: CodecFrameRecord) -> dict:
    """Table-1 field names, JSON-serializable."""
    s = rec.side
    return {
        "frame_index": rec.frame_index,
        "part_23_length": s.part2_3_length,
        "scalefactor": rec.scalefactors.bitstream_order().tolist(),
        "scalefac_compress": s.scalefac_compress,
        "scalefac_scale": int(s.scalefac_scale),
        "preflag": int(s.preflag),
        "global_gain": s.global_gain,
        "subblock_gain": list(s.subblock_gain),
        "big_values": s.big_values,
        "region_count": [s.region0_count, s.region1_count],
        "table_select": list(s.table_select),
        "count1_table": int(s.count1table_select),
        "block_type": s.block_type,
        "mixed_block_flag": int(s.mixed_block_flag),
        "mdct_coef": [float(v) for v in rec.mdct.requantized],
        "mdct_quantized": rec.mdct.quantized.tolist(),
    }
