"""Frame sync: walk an MP3 byte string and return its audio frame headers."""

from dataclasses import dataclass

from mp3splice.bitstream.tables import BITRATES_KBPS, CHANNEL_MODES, SAMPLING_RATES
from mp3splice.errors import NoFramesFound, UnsupportedFormat

# bitrate tables for the frame kinds we only need to *skip* consistently
_BITRATES_OTHER = {
    (1, 1): (None, 32, 64, 96, 128, 160, 192, 224, 256, 288, 320, 352, 384, 416, 448, None),
    (1, 2): (None, 32, 48, 56, 64, 80, 96, 112, 128, 160, 192, 224, 256, 320, 384, None),
    (2, 1): (None, 32, 48, 56, 64, 80, 96, 112, 128, 144, 160, 176, 192, 224, 256, None),
    (2, 2): (None, 8, 16, 24, 32, 40, 48, 56, 64, 80, 96, 112, 128, 144, 160, None),
}
_VERSIONS = {3: "MPEG-1", 2: "MPEG-2", 0: "MPEG-2.5"}


@dataclass(frozen=True)
class FrameHeader:
    byte_offset: int
    version: str
    layer: int
    bitrate: int              # kbps
    sampling_rate: int        # Hz
    padding: bool
    channel_mode: str         # stereo | joint | dual | mono
    mode_extension: int
    protected: bool           # a 16-bit CRC follows the header
    frame_bytes: int
    gap_before: bool = False  # bytes were skipped to resynchronize before this frame

    @property
    def n_channels(self) -> int:
        return 1 if self.channel_mode == "mono" else 2

    @property
    def side_info_bytes(self) -> int:
        return 17 if self.channel_mode == "mono" else 32

    @property
    def main_data_offset(self) -> int:
        """Offset of the main data slot relative to the frame start."""
        return 4 + (2 if self.protected else 0) + self.side_info_bytes

    @property
    def ms_stereo(self) -> bool:
        return self.channel_mode == "joint" and bool(self.mode_extension & 2)


@dataclass(frozen=True)
class StreamInfo:
    """Result of a full scan: audio frames plus what the Info/Xing tag says."""

    frames: list
    tag_kind: str | None = None       # "Xing", "Info" or "VBRI"
    tag_offset: int | None = None
    encoder: str | None = None        # e.g. "LAME3.100", "Lavc61.3."
    encoder_delay: int | None = None  # samples, from the LAME extension
    encoder_padding: int | None = None


def parse_header(data: bytes, pos: int) -> FrameHeader | tuple | None:
    """Decode the 4 header bytes at ``pos``.

    Returns a FrameHeader for MPEG-1 Layer III, a ``(version, layer, length)``
    tuple for other valid MPEG audio headers, or None if the bytes cannot be
    a frame header at all.
    """
    if pos + 4 > len(data):
        return None
    b0, b1, b2, b3 = data[pos], data[pos + 1], data[pos + 2], data[pos + 3]
    if b0 != 0xFF or (b1 & 0xE0) != 0xE0:
        return None
    version_bits = (b1 >> 3) & 3
    layer_bits = (b1 >> 1) & 3
    bitrate_index = b2 >> 4
    sr_index = (b2 >> 2) & 3
    if version_bits == 1 or layer_bits == 0 or bitrate_index in (0, 15) or sr_index == 3:
        return None
    if (b3 & 3) == 2:  # reserved emphasis
        return None
    layer = 4 - layer_bits
    padding = (b2 >> 1) & 1
    sampling_rate = SAMPLING_RATES[sr_index] >> {3: 0, 2: 1, 0: 2}[version_bits]

    if version_bits == 3 and layer == 3:
        bitrate = BITRATES_KBPS[bitrate_index]
        return FrameHeader(
            byte_offset=pos,
            version="MPEG-1",
            layer=3,
            bitrate=bitrate,
            sampling_rate=sampling_rate,
            padding=bool(padding),
            channel_mode=CHANNEL_MODES[b3 >> 6],
            mode_extension=(b3 >> 4) & 3,
            protected=not (b1 & 1),
            frame_bytes=144000 * bitrate // sampling_rate + padding,
        )

    v = 1 if version_bits == 3 else 2
    if layer == 1:
        bitrate = _BITRATES_OTHER[(v, 1)][bitrate_index]
        length = (12000 * bitrate // sampling_rate + padding) * 4
    elif v == 1:  # MPEG-1 Layer II
        bitrate = _BITRATES_OTHER[(1, 2)][bitrate_index]
        length = 144000 * bitrate // sampling_rate + padding
    else:  # MPEG-2 / 2.5, Layer II or III
        bitrate = _BITRATES_OTHER[(2, 2)][bitrate_index]
        length = (72000 if layer == 3 else 144000) * bitrate // sampling_rate + padding
    return (_VERSIONS[version_bits], layer, length)


def _header_length(h) -> int:
    return h.frame_bytes if isinstance(h, FrameHeader) else h[2]


def _same_stream(a, b) -> bool:
    if isinstance(a, FrameHeader) and isinstance(b, FrameHeader):
        return a.sampling_rate == b.sampling_rate
    if isinstance(a, FrameHeader) or isinstance(b, FrameHeader):
        return False
    return a[:2] == b[:2]


def _id3v2_length(data: bytes, pos: int) -> int:
    if data[pos:pos + 3] != b"ID3" or pos + 10 > len(data):
        return 0
    size = 0
    for b in data[pos + 6:pos + 10]:
        if b & 0x80:
            return 0
        size = (size << 7) | b
    footer = 10 if data[pos + 5] & 0x10 else 0
    return 10 + size + footer


def _read_tag(data: bytes, h: FrameHeader) -> dict | None:
    start = h.byte_offset
    frame = data[start:start + h.frame_bytes]
    xing_at = h.main_data_offset
    kind = frame[xing_at:xing_at + 4]
    if kind in (b"Xing", b"Info"):
        info = {"tag_kind": kind.decode()}
        flags = int.from_bytes(frame[xing_at + 4:xing_at + 8], "big")
        p = xing_at + 8
        p += 4 * bool(flags & 1) + 4 * bool(flags & 2) + 100 * bool(flags & 4) + 4 * bool(flags & 8)
        ext = frame[p:p + 24]
        if len(ext) == 24 and all(32 <= c < 127 for c in ext[:4]):
            info["encoder"] = ext[:9].decode("latin-1").rstrip("\x00 ")
            info["encoder_delay"] = (ext[21] << 4) | (ext[22] >> 4)
            info["encoder_padding"] = ((ext[22] & 0x0F) << 8) | ext[23]
        return info
    if frame[36:40] == b"VBRI":
        info = {"tag_kind": "VBRI", "encoder_delay": int.from_bytes(frame[42:44], "big")}
        return info
    return None


def scan_stream(data: bytes, sampling_rates=(44100,)) -> StreamInfo:
    """Walk ``data`` and return every MPEG-1 Layer III audio frame in order.

    Leading ID3v2 tags, a trailing ID3v1 tag and a leading Xing/Info/VBRI
    frame are skipped. A sync candidate is accepted only when the header is
    valid and the header one frame length later is consistent with it (or the
    candidate ends exactly at the end of data). After corrupt bytes the scan
    resumes at the next accepted candidate and marks that frame ``gap_before``.
    """
    data = bytes(data)
    end = len(data)
    if end >= 128 and data[end - 128:end - 125] == b"TAG":
        end -= 128
    pos = 0
    while pos < end and (skip := _id3v2_length(data, pos)):
        pos += skip

    frames: list[FrameHeader] = []
    foreign = 0
    expected = None   # where the next frame should start if the stream is intact
    previous = None   # last accepted header (audio, tag or foreign)
    tag: dict = {}
    while pos + 4 <= end:
        h = parse_header(data, pos)
        if h is None:
            pos += 1
            continue
        nxt = pos + _header_length(h)
        if nxt > end:
            pos += 1
            continue
        if pos == expected and _same_stream(previous, h):
            pass  # continuing an intact run of frames
        elif nxt + 4 <= end:
            following = parse_header(data, nxt)
            if following is None or not _same_stream(h, following):
                pos += 1
                continue
        previous = h
        if not isinstance(h, FrameHeader):
            foreign += 1
            expected = pos = nxt
            continue
        if h.sampling_rate not in sampling_rates:
            raise UnsupportedFormat(f"sampling rate {h.sampling_rate} Hz at byte {pos}")
        if not frames and not tag:
            found = _read_tag(data, h)
            if found is not None:
                tag = dict(found, tag_offset=pos)
                expected = pos = nxt
                continue
        if expected is not None and pos != expected:
            h = FrameHeader(**{**h.__dict__, "gap_before": True})
        frames.append(h)
        expected = pos = nxt

    if not frames:
        if foreign:
            raise UnsupportedFormat("stream holds MPEG audio frames but no MPEG-1 Layer III frames")
        raise NoFramesFound("no MPEG audio frame sync found")
    return StreamInfo(frames=frames, **tag)


def scan_frames(data: bytes, sampling_rates=(44100,)) -> list[FrameHeader]:
    return scan_stream(data, sampling_rates).frames
