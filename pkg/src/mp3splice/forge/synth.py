"""Synthetic WAV sources for tests and demos when no audio corpus is at hand.

Three textures: ``music`` (harmonic notes with envelopes and a little
noise), ``speech`` (syllable-rate bursts of formant-filtered buzz) and
``drums`` (decaying noise hits over a bass line).
"""

from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from mp3splice.forge.audio import SAMPLE_RATE, write_wav

KINDS = ("music", "speech", "drums")


def _envelope(n: int, attack: int, rng) -> np.ndarray:
    env = np.exp(-np.arange(n) / (n * rng.uniform(0.2, 0.6)))
    env[:attack] *= np.linspace(0.0, 1.0, attack)
    return env


def _music(n: int, rng) -> np.ndarray:
    t = np.arange(n) / SAMPLE_RATE
    out = np.zeros(n)
    pos = 0
    while pos < n:
        dur = int(SAMPLE_RATE * rng.uniform(0.1, 0.6))
        f0 = 110.0 * 2 ** (rng.integers(0, 36) / 12)
        seg = slice(pos, min(n, pos + dur))
        m = seg.stop - seg.start
        note = sum(rng.uniform(0.2, 1.0) / k * np.sin(2 * np.pi * f0 * k * t[seg] + rng.uniform(0, 2 * np.pi))
                   for k in range(1, 8))
        out[seg] += note * _envelope(m, min(m, 200), rng)
        pos += int(dur * rng.uniform(0.5, 1.0))
    return out + 0.01 * rng.standard_normal(n)


def _speech(n: int, rng) -> np.ndarray:
    out = np.zeros(n)
    pos = 0
    while pos < n:
        dur = int(SAMPLE_RATE * rng.uniform(0.08, 0.3))
        m = min(dur, n - pos)
        f0 = rng.uniform(90, 250)
        phase = np.cumsum(np.full(m, f0 / SAMPLE_RATE))
        buzz = (phase % 1.0 < 0.1).astype(float) if rng.random() < 0.7 else rng.standard_normal(m) * 0.3
        for formant in rng.uniform([300, 900, 2200], [900, 2200, 3500]):
            r, w = 0.97, 2 * np.pi * formant / SAMPLE_RATE
            buzz = lfilter([1.0 - r], [1.0, -2 * r * np.cos(w), r * r], buzz)
        out[pos:pos + m] = buzz * np.hanning(m)
        pos += m + int(SAMPLE_RATE * rng.uniform(0.0, 0.12))
    return out / (np.abs(out).max() + 1e-9)


def _drums(n: int, rng) -> np.ndarray:
    out = 0.3 * np.sin(2 * np.pi * rng.uniform(40, 80) * np.arange(n) / SAMPLE_RATE)
    beat = int(SAMPLE_RATE * rng.uniform(0.2, 0.5))
    for pos in range(0, n, beat):
        m = min(n - pos, beat)
        out[pos:pos + m] += rng.standard_normal(m) * np.exp(-np.arange(m) / rng.uniform(300, 3000))
    return out


def synthesize(seconds: float, rng, kind: str = "music", channels: int = 2) -> np.ndarray:
    """int16 samples (n, channels) at 44.1 kHz."""
    n = int(seconds * SAMPLE_RATE)
    make = {"music": _music, "speech": _speech, "drums": _drums}[kind]
    chans = [make(n, rng)]
    if channels == 2:
        # a correlated second channel keeps joint stereo in play
        chans.append(0.7 * chans[0] + 0.3 * make(n, rng))
    x = np.stack(chans, axis=1)
    x *= rng.uniform(0.2, 0.8) / (np.abs(x).max() + 1e-9)
    return np.round(x * 32767).astype(np.int16)


def write_corpus(directory, n_files: int, seconds: float, seed: int = 0) -> list:
    """Write ``n_files`` synthetic WAVs cycling through the textures."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths = []
    for i in range(n_files):
        kind = KINDS[i % len(KINDS)]
        path = directory / f"{kind}_{i:04d}.wav"
        write_wav(path, synthesize(seconds, rng, kind, channels=1 + (i // len(KINDS)) % 2))
        paths.append(path)
    return paths
