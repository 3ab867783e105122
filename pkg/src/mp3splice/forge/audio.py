from math import gcd

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from mp3splice.errors import FileFormatError

SAMPLE_RATE = 44100
FRAME_SAMPLES = 1152


def _to_int16(x) -> np.ndarray:
    if x.dtype == np.int16:
        return x
    if x.dtype.kind == "f":
        return np.clip(np.round(x * 32767.0), -32768, 32767).astype(np.int16)
    if x.dtype == np.uint8:
        return ((x.astype(np.int16) - 128) << 8).astype(np.int16)
    bits = 8 * x.dtype.itemsize
    return (x.astype(np.int64) >> (bits - 16)).astype(np.int16)


def read_wav(path) -> np.ndarray:
    """16-bit samples (n, channels) at 44.1 kHz, resampling if needed."""
    try:
        rate, x = wavfile.read(path)
    except (ValueError, OSError) as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[1] > 2:
        raise FileFormatError(f"{path}: {x.shape[1]} channels, only mono or stereo are supported")
    if rate != SAMPLE_RATE:
        g = gcd(rate, SAMPLE_RATE)
        y = resample_poly(x.astype(np.float64), SAMPLE_RATE // g, rate // g, axis=0)
        scale = {"i": 2.0 ** (8 * x.dtype.itemsize - 1), "u": 128.0}.get(x.dtype.kind, 1.0)
        return _to_int16((y - (128.0 if x.dtype.kind == "u" else 0.0)) / scale)
    return _to_int16(x)


def write_wav(path, samples) -> None:
    wavfile.write(path, SAMPLE_RATE, np.ascontiguousarray(samples, dtype=np.int16))
