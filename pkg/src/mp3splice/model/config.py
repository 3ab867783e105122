from dataclasses import asdict, dataclass

from mp3splice.errors import ShapeMismatch


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters; defaults are the full-size network.

    Each CNN is three (Conv3-c, Conv3-c, Maxpool) stages followed by two
    FC layers of width ``cnn*_fc``. The per-frame vector is
    [CNN-1 | CNN-2 | scalars], so cnn1_fc + cnn2_fc + n_scalars = d_model.
    """

    d_model: int = 300
    n_layers: int = 8
    n_heads: int = 15
    L: int = 20
    mlp_hidden: int = 800
    ffn_hidden: int = 1200
    dropout: float = 0.2
    cnn1_channels: tuple = (32, 64, 128)
    cnn1_fc: int = 233
    cnn2_channels: tuple = (16, 32, 64)
    cnn2_fc: int = 49
    mdct_shape: tuple = (32, 18)
    scalefac_shape: tuple = (5, 12)
    n_scalars: int = 18
    n_classes: int = 2
    ln_eps: float = 1e-5

    def __post_init__(self):
        for name in ("cnn1_channels", "cnn2_channels", "mdct_shape", "scalefac_shape"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.d_model % self.n_heads:
            raise ShapeMismatch(f"n_heads={self.n_heads} does not divide d_model={self.d_model}")
        if self.cnn1_fc + self.cnn2_fc + self.n_scalars != self.d_model:
            raise ShapeMismatch(
                f"cnn1_fc + cnn2_fc + n_scalars = {self.cnn1_fc + self.cnn2_fc + self.n_scalars}, "
                f"d_model = {self.d_model}")

    @property
    def d_head(self) -> int:
        return self.d_model // self.n_heads

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)

    @classmethod
    def small(cls, d_model: int = 60, n_heads: int = 5, n_layers: int = 2, **kw) -> "ModelConfig":
        """Narrow network over the real feature shapes (18 scalars)."""
        cnn2_fc = kw.pop("cnn2_fc", max(4, (d_model - 18) // 4))
        defaults = dict(L=20, mlp_hidden=4 * d_model, ffn_hidden=4 * d_model,
                        cnn1_channels=(8, 16, 32), cnn2_channels=(4, 8, 16),
                        cnn1_fc=d_model - 18 - cnn2_fc, cnn2_fc=cnn2_fc)
        defaults.update(kw)
        return cls(d_model=d_model, n_heads=n_heads, n_layers=n_layers, **defaults)
