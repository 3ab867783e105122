from dataclasses import dataclass

from mp3splice.bitstream.bitreader import BitReader
from mp3splice.bitstream.frames import FrameHeader
from mp3splice.bitstream.tables import BLOCK_TYPES
from mp3splice.errors import ReservedValue, TruncatedFrame


@dataclass(frozen=True)
class SideInfo:
    """Side information of granule 0, channel 0.

    For window-switched granules the region counts are not transmitted; they
    hold the implied defaults (region0_count 7, or 8 for pure short blocks,
    and region1_count = 20 - region0_count) and table_select[2] is 0.
    """

    main_data_begin: int
    part2_3_length: int
    big_values: int
    global_gain: int
    scalefac_compress: int
    window_switching_flag: bool
    block_type: str
    mixed_block_flag: bool
    table_select: tuple
    subblock_gain: tuple
    region0_count: int
    region1_count: int
    preflag: bool
    scalefac_scale: bool
    count1table_select: bool
    # part2_3_length of every granule/channel, in bitstream order; needed to
    # know where the frame's main data ends
    all_part2_3_lengths: tuple = ()

    @property
    def block_type_code(self) -> int:
        return BLOCK_TYPES.index(self.block_type)


def _read_granule_channel(r: BitReader) -> dict:
    g = {
        "part2_3_length": r.read(12),
        "big_values": r.read(9),
        "global_gain": r.read(8),
        "scalefac_compress": r.read(4),
        "window_switching_flag": r.flag(),
    }
    if g["window_switching_flag"]:
        bt = r.read(2)
        if bt == 0:
            raise ReservedValue("window_switching_flag set with block_type 0")
        mixed = r.flag()
        tables = (r.read(5), r.read(5), 0)
        gains = (r.read(3), r.read(3), r.read(3))
        r0 = 8 if bt == 2 and not mixed else 7
        g.update(block_type=BLOCK_TYPES[bt], mixed_block_flag=mixed, table_select=tables,
                 subblock_gain=gains, region0_count=r0, region1_count=20 - r0)
    else:
        tables = (r.read(5), r.read(5), r.read(5))
        g.update(block_type="normal", mixed_block_flag=False, table_select=tables,
                 subblock_gain=(0, 0, 0), region0_count=r.read(4), region1_count=r.read(3))
    g["preflag"] = r.flag()
    g["scalefac_scale"] = r.flag()
    g["count1table_select"] = r.flag()
    return g


def parse_side_info(frame: bytes, header: FrameHeader) -> SideInfo:
    """Decode the side information block that follows the header (and CRC).

    ``frame`` holds the frame bytes starting at the sync word. Only granule 0,
    channel 0 is returned, but the whole block is read so that malformed
    fields anywhere in it are reported.
    """
    start = 4 + (2 if header.protected else 0)
    end = start + header.side_info_bytes
    if len(frame) < end:
        raise TruncatedFrame(f"frame has {len(frame)} bytes, side info needs {end}")
    r = BitReader(frame[start:end])
    nch = header.n_channels
    main_data_begin = r.read(9)
    r.read(5 if nch == 1 else 3)  # private bits
    r.read(4 * nch)               # scfsi, unused by granule 0
    granules = [_read_granule_channel(r) for _ in range(2 * nch)]
    first = granules[0]
    if first["big_values"] > 288:
        raise ReservedValue(f"big_values {first['big_values']} > 288")
    for t in first["table_select"]:
        if t in (4, 14):
            raise ReservedValue(f"Huffman table {t} is not used by the format")
    return SideInfo(main_data_begin=main_data_begin,
                    all_part2_3_lengths=tuple(g["part2_3_length"] for g in granules),
                    **first)
