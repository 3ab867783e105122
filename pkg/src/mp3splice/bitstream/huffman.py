"""Huffman decoding of the 576 quantized spectral lines of one granule."""

import numpy as np

from mp3splice.bitstream._huffman_tables import LINBITS, PAIR_TABLES, QUAD_TABLE_A, QUAD_TABLE_B
from mp3splice.bitstream.bitreader import BitReader
from mp3splice.bitstream.sideinfo import SideInfo
from mp3splice.bitstream.tables import GRANULE_LINES, SFB_LONG
from mp3splice.errors import BitUnderflow, InvalidCodeword


class _Codebook:
    """Prefix code as a dict from codeword bit-string to decoded value."""

    def __init__(self, codes, lengths, values):
        self.lookup = {}
        for code, n, value in zip(codes, lengths, values):
            self.lookup[format(code, f"0{n}b")] = value
        self.lengths = sorted(set(lengths))

    def decode(self, r: BitReader):
        bits, pos = r.bits, r.pos
        for n in self.lengths:
            if pos + n > r.limit:
                break
            value = self.lookup.get(bits[pos:pos + n])
            if value is not None:
                r.pos = pos + n
                return value
        if pos + self.lengths[-1] > r.limit:
            raise BitUnderflow(f"codeword at bit {pos} runs past the region budget")
        raise InvalidCodeword(f"no codeword matches at bit {pos}")


def _pair_book(n: int) -> _Codebook:
    size, codes, lengths = PAIR_TABLES[n]
    return _Codebook(codes, lengths, [divmod(i, size) for i in range(size * size)])


_BASE = {n: _pair_book(n) for n in PAIR_TABLES}
PAIR_BOOKS = {n: _BASE[16 if 16 <= n < 24 else 24 if n >= 24 else n] for n in range(32) if n not in (0, 4, 14)}
QUAD_BOOKS = tuple(
    _Codebook(codes, lengths, [((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1) for i in range(16)])
    for codes, lengths in (QUAD_TABLE_A, QUAD_TABLE_B)
)


def region_bounds(side: SideInfo, sampling_rate: int = 44100) -> tuple:
    """(region1_start, region2_start, big_values_end) in spectral lines."""
    end = min(2 * side.big_values, GRANULE_LINES)
    if side.window_switching_flag:
        r1, r2 = 36, GRANULE_LINES
    else:
        sfb = SFB_LONG[sampling_rate]
        r1 = sfb[min(side.region0_count + 1, 22)]
        r2 = sfb[min(side.region0_count + side.region1_count + 2, 22)]
    return min(r1, end), min(r2, end), end


def _signed(r: BitReader, v: int, linbits: int) -> int:
    if linbits and v == 15:
        v += r.read(linbits)
    if v and r.read(1):
        return -v
    return v


def huffman_decode(reader: BitReader, side: SideInfo, part3_end: int,
                   sampling_rate: int = 44100) -> np.ndarray:
    """Decode big_values pairs, count1 quads and the zero region.

    ``part3_end`` is the absolute bit position where this granule's Huffman
    data ends (start of scalefactors + part2_3_length). Codewords may not
    cross it.
    """
    out = np.zeros(GRANULE_LINES, dtype=np.int64)
    saved_limit = reader.limit
    if part3_end > reader.limit:
        raise BitUnderflow(f"part2_3_length ends at bit {part3_end}, data ends at {reader.limit}")
    reader.limit = part3_end
    try:
        r1, r2, end = region_bounds(side, sampling_rate)
        i = 0
        for stop, table in ((r1, side.table_select[0]), (r2, side.table_select[1]), (end, side.table_select[2])):
            if table == 0:
                i = stop  # table 0 codes all-zero pairs in no bits
                continue
            book, linbits = PAIR_BOOKS[table], LINBITS[table]
            while i < stop:
                x, y = book.decode(reader)
                out[i] = _signed(reader, x, linbits)
                out[i + 1] = _signed(reader, y, linbits)
                i += 2
        quad = QUAD_BOOKS[side.count1table_select]
        while i + 4 <= GRANULE_LINES and reader.pos < part3_end:
            for k, v in enumerate(quad.decode(reader)):
                out[i + k] = -v if v and reader.read(1) else v
            i += 4
    finally:
        reader.limit = saved_limit
    out.setflags(write=False)
    return out
