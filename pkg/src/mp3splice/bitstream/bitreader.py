from mp3splice.errors import BitUnderflow


class BitReader:
    """MSB-first bit cursor over a byte string.

    The bytes are expanded once into a string of '0'/'1' characters; Huffman
    decoding then works on string slices, which is the fastest pure-Python
    representation for prefix matching. ``limit`` is an exclusive bit bound.
    """

    __slots__ = ("bits", "pos", "limit")

    def __init__(self, data: bytes, pos: int = 0, limit: int | None = None):
        n = len(data) * 8
        self.bits = bin(int.from_bytes(data, "big"))[2:].zfill(n) if data else ""
        self.pos = pos
        self.limit = n if limit is None else min(limit, n)

    def read(self, n: int) -> int:
        if n == 0:
            return 0
        end = self.pos + n
        if end > self.limit:
            raise BitUnderflow(f"need {n} bits at {self.pos}, limit {self.limit}")
        value = int(self.bits[self.pos:end], 2)
        self.pos = end
        return value

    def flag(self) -> bool:
        return self.read(1) == 1

    def remaining(self) -> int:
        return self.limit - self.pos
