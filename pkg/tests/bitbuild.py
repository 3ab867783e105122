"""Tiny MSB-first bit writer for hand-built Layer III headers and side info."""


class BitWriter:
    def __init__(self):
        self.bits = []

    def put(self, value: int, n: int):
        self.bits += [(value >> (n - 1 - i)) & 1 for i in range(n)]
        return self

    def tobytes(self) -> bytes:
        bits = self.bits + [0] * (-len(self.bits) % 8)
        return bytes(int("".join(map(str, bits[i:i + 8])), 2) for i in range(0, len(bits), 8))


def header_bytes(bitrate_index=9, padding=0, mono=True, crc=False) -> bytes:
    """MPEG-1 Layer III, 44.1 kHz."""
    w = BitWriter().put(0x7FF, 11).put(3, 2).put(1, 2).put(0 if crc else 1, 1)
    w.put(bitrate_index, 4).put(0, 2).put(padding, 1).put(0, 1)
    w.put(3 if mono else 1, 2).put(0, 2).put(0, 1).put(1, 1).put(0, 2)
    return w.tobytes()


def granule_bits(w: BitWriter, part2_3_length=0, big_values=0, global_gain=0, scalefac_compress=0,
                 ws=0, block_type=0, mixed=0, table_select=(0, 0, 0), subblock_gain=(0, 0, 0),
                 region0=0, region1=0, preflag=0, scalefac_scale=0, count1=0):
    w.put(part2_3_length, 12).put(big_values, 9).put(global_gain, 8).put(scalefac_compress, 4).put(ws, 1)
    if ws:
        w.put(block_type, 2).put(mixed, 1).put(table_select[0], 5).put(table_select[1], 5)
        for g in subblock_gain:
            w.put(g, 3)
    else:
        for t in table_select:
            w.put(t, 5)
        w.put(region0, 4).put(region1, 3)
    w.put(preflag, 1).put(scalefac_scale, 1).put(count1, 1)
    return w


def mono_side_info(main_data_begin=0, **granule) -> bytes:
    w = BitWriter().put(main_data_begin, 9).put(0, 5).put(0, 4)
    granule_bits(w, **granule)
    granule_bits(w)
    return w.tobytes()


def mono_frame(main_data=b"", **granule) -> bytes:
    """A complete 128 kbps mono frame (417 bytes) with the given granule 0."""
    head = header_bytes(9) + mono_side_info(**granule)
    size = 144000 * 128 // 44100
    return (head + main_data).ljust(size, b"\0")[:size]
