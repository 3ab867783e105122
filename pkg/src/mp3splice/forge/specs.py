from dataclasses import dataclass

CBR_BITRATES = (64, 96, 128, 160, 192, 256)
VBR_QUALITIES = (1, 2, 3, 4, 5, 6)
GRID = tuple(("CBR", b) for b in CBR_BITRATES) + tuple(("VBR", q) for q in VBR_QUALITIES)


@dataclass(frozen=True)
class CompressionSpec:
    mode: str      # "CBR" | "VBR"
    value: int     # kbps for CBR, quality index for VBR
    encoder: str   # name of a configured encoder

    def __post_init__(self):
        if (self.mode, self.value) not in GRID:
            raise ValueError(f"{self.mode} {self.value} is not one of the twelve compression types")

    @property
    def label(self) -> str:
        """C<kbps> or V<quality>, as in the recall tables."""
        return f"{self.mode[0]}{self.value}"

    def to_dict(self) -> dict:
        return {"mode": self.mode, "value": self.value, "encoder": self.encoder}

    @classmethod
    def from_dict(cls, d: dict) -> "CompressionSpec":
        return cls(d["mode"], int(d["value"]), d["encoder"])


def draw_spec(rng, encoders) -> CompressionSpec:
    """Uniform over the twelve types and, independently, over the encoders."""
    mode, value = GRID[rng.integers(len(GRID))]
    return CompressionSpec(mode, value, encoders[rng.integers(len(encoders))])
