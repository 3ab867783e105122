from dataclasses import dataclass

import numpy as np

from mp3splice.bitstream.bitreader import BitReader
from mp3splice.bitstream.sideinfo import SideInfo
from mp3splice.bitstream.tables import (MIXED_LONG_BANDS, MIXED_SHORT_START, N_LONG_SF,
                                        N_SHORT_SF, SLEN)

LAYOUTS = ("long", "short", "mixed")


def layout_of(side: SideInfo) -> str:
    if side.block_type != "short":
        return "long"
    return "mixed" if side.mixed_block_flag else "short"


@dataclass(frozen=True)
class ScaleFactors:
    """Transmitted scalefactors of one granule/channel.

    ``long_block`` has 21 entries (long layout), 8 (mixed) or 0 (short).
    ``short_block`` is (12, 3) indexed [sfb, window] for short and mixed
    layouts, with sfb 0..2 left at zero for mixed blocks; it is (0, 3) for
    the long layout.
    """

    long_block: np.ndarray
    short_block: np.ndarray
    layout: str
    bits: int = 0  # part2 length: bits the scalefactors occupied

    def bitstream_order(self) -> np.ndarray:
        """Values in transmission order (long bands, then short sfb-major)."""
        start = MIXED_SHORT_START if self.layout == "mixed" else 0
        return np.concatenate([self.long_block, self.short_block[start:].ravel()])

    def as_grid(self) -> np.ndarray:
        """Fixed 5x12 grid: rows 0-1 long sfb 0-11 / 12-20 (zero padded),
        rows 2-4 short windows 0-2 over sfb 0-11."""
        grid = np.zeros((5, 12), dtype=np.int64)
        flat = np.zeros(24, dtype=np.int64)
        flat[:len(self.long_block)] = self.long_block
        grid[:2] = flat.reshape(2, 12)
        if len(self.short_block):
            grid[2:] = self.short_block.T
        return grid


def _frozen(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


def decode_scalefactors(reader: BitReader, side: SideInfo, prev_frame_context=None) -> ScaleFactors:
    """Read granule 0 scalefactors at the reader's position.

    ``prev_frame_context`` is accepted for symmetry with granule 1 decoding,
    where scfsi reuses earlier values; granule 0 never reuses, so it is unused.
    """
    slen1, slen2 = SLEN[side.scalefac_compress]
    start = reader.pos
    layout = layout_of(side)
    if layout == "long":
        long_sf = [reader.read(slen1) for _ in range(11)]
        long_sf += [reader.read(slen2) for _ in range(11, N_LONG_SF)]
        short_sf = np.zeros((0, 3))
    else:
        short_sf = np.zeros((N_SHORT_SF, 3), dtype=np.int64)
        if layout == "mixed":
            long_sf = [reader.read(slen1) for _ in range(MIXED_LONG_BANDS)]
            first = MIXED_SHORT_START
        else:
            long_sf = []
            first = 0
        for sfb in range(first, N_SHORT_SF):
            width = slen1 if sfb < 6 else slen2
            for w in range(3):
                short_sf[sfb, w] = reader.read(width)
    return ScaleFactors(long_block=_frozen(long_sf), short_block=_frozen(short_sf),
                        layout=layout, bits=reader.pos - start)
