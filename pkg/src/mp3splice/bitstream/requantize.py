import numpy as np

from mp3splice.bitstream.scalefactors import ScaleFactors
from mp3splice.bitstream.sideinfo import SideInfo
from mp3splice.bitstream.tables import GRANULE_LINES, PRETAB, SFB_LONG, SFB_SHORT


def _long_exponents(side: SideInfo, sf: ScaleFactors, sfb, mult: float, n_bands: int) -> list:
    base = (side.global_gain - 210) / 4
    parts = []
    for b in range(n_bands):
        s = int(sf.long_block[b]) if b < len(sf.long_block) else 0
        if side.preflag:
            s += PRETAB[b]
        parts.append(np.full(sfb[b + 1] - sfb[b], base - mult * s))
    return parts


def _short_exponents(side: SideInfo, sf: ScaleFactors, sfb, mult: float, first_band: int) -> list:
    parts = []
    for b in range(first_band, len(sfb) - 1):
        width = sfb[b + 1] - sfb[b]
        for w in range(3):
            s = int(sf.short_block[b, w]) if b < len(sf.short_block) else 0
            e = (side.global_gain - 210 - 8 * side.subblock_gain[w]) / 4 - mult * s
            parts.append(np.full(width, e))
    return parts


def gain_exponents(side: SideInfo, sf: ScaleFactors, sampling_rate: int = 44100) -> np.ndarray:
    """Per-line base-2 exponent of the requantization gain."""
    mult = 0.5 * (1 + side.scalefac_scale)
    long_sfb, short_sfb = SFB_LONG[sampling_rate], SFB_SHORT[sampling_rate]
    if sf.layout == "long":
        parts = _long_exponents(side, sf, long_sfb, mult, len(long_sfb) - 1)
    elif sf.layout == "short":
        parts = _short_exponents(side, sf, short_sfb, mult, 0)
    else:
        # 8 long bands cover lines 0..35, short bands resume at sfb 3 (line 36)
        parts = _long_exponents(side, sf, long_sfb, mult, 8)
        parts += _short_exponents(side, sf, short_sfb, mult, 3)
    e = np.concatenate(parts)
    assert len(e) == GRANULE_LINES
    return e


def requantize(quantized: np.ndarray, side: SideInfo, sf: ScaleFactors,
               sampling_rate: int = 44100) -> np.ndarray:
    """sign(q)·|q|^(4/3)·2^gain, evaluated in float64 and returned as float32."""
    q = np.asarray(quantized, dtype=np.float64)
    x = np.sign(q) * np.abs(q) ** (4.0 / 3.0) * np.exp2(gain_exponents(side, sf, sampling_rate))
    out = x.astype(np.float32)
    out.setflags(write=False)
    return out
