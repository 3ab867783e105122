"""Regenerate the parser oracle corpus under tests/data/oracle.

Encodes three synthetic signals with both encoders over the twelve
compression types (CBR 64..256 kbps, VBR quality 1..6), then freezes the
reference decoder dump of every frame next to the files.

    python3 tools/make_oracle_corpus.py

Needs gcc, the bundled ffmpeg (imageio-ffmpeg) and the system libmp3lame.
"""

import gzip
import subprocess
import tempfile
import wave
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "tests" / "data" / "oracle"
SR = 44100
N_FRAMES = 12
TYPES = [("cbr", b) for b in (64, 96, 128, 160, 192, 256)] + [("vbr", q) for q in range(1, 7)]


def signals(rng):
    n = N_FRAMES * 1152
    t = np.arange(n) / SR
    # castanet-like clicks on a quiet tone: drives the encoder into short blocks
    clicks = 0.05 * np.sin(2 * np.pi * 330 * t)
    for start in range(2000, n - 600, 2900):
        clicks[start:start + 400] += rng.normal(0, 0.6, 400) * np.exp(-np.arange(400) / 60)
    # two detuned chords, different per channel: plain stereo / joint stereo
    left = sum(0.15 * np.sin(2 * np.pi * f * t) for f in (220, 277, 330, 440))
    right = sum(0.15 * np.sin(2 * np.pi * f * t + 1.0) for f in (221, 278, 331, 660))
    noise = rng.normal(0, 0.05, n)
    wide = np.stack([left + noise, right + 0.5 * noise], axis=1)
    # near-mono stereo pair: mid/side coding
    mid = left + rng.normal(0, 0.1, n)
    narrow = np.stack([mid, 0.97 * mid + rng.normal(0, 0.01, n)], axis=1)
    return {"clicks": clicks[:, None], "wide": wide, "narrow": narrow}


def write_wav(path, x):
    pcm = np.clip(np.round(x * 32767), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(pcm.shape[1])
        w.setsampwidth(2)
        w.setframerate(SR)
        w.writeframes(pcm.tobytes())


def main():
    import imageio_ffmpeg

    ffmpeg = imageio_ffmpeg.get_ffmpeg_exe()
    tmp = Path(tempfile.mkdtemp())
    lamecli = tmp / "lamecli"
    subprocess.run(["gcc", "-O2", "-o", lamecli, ROOT / "src" / "mp3splice" / "forge" / "lamecli.c",
                    "-l:libmp3lame.so.0", "-L/usr/lib/x86_64-linux-gnu"], check=True)
    mp3dump = tmp / "mp3dump"
    subprocess.run(["gcc", "-O2", "-o", mp3dump, ROOT / "tests" / "oracle" / "mp3dump.c", "-lm"], check=True)

    rng = np.random.default_rng(7)
    wavs = {}
    for name, x in signals(rng).items():
        wavs[name] = tmp / f"{name}.wav"
        write_wav(wavs[name], x)
    names = list(wavs)

    for old in OUT.glob("*.mp3"):
        old.unlink()
    lines = []
    for k, (mode, value) in enumerate(TYPES):
        for e, encoder in enumerate(("ffmpeg", "lame")):
            sig = names[(k + e) % len(names)]
            out = OUT / f"{encoder}_{mode}{value}_{sig}.mp3"
            if encoder == "ffmpeg":
                rate = ["-b:a", f"{value}k"] if mode == "cbr" else ["-q:a", str(value)]
                cmd = [ffmpeg, "-v", "error", "-y", "-i", wavs[sig], "-c:a", "libmp3lame", *rate, out]
            else:
                cmd = [lamecli, "-b" if mode == "cbr" else "-V", str(value), wavs[sig], out]
            subprocess.run(cmd, check=True)
            dump = subprocess.run([mp3dump, out], check=True, capture_output=True, text=True).stdout
            lines += [f'{{"file":"{out.name}",' + line[1:] for line in dump.splitlines()]
    with gzip.open(OUT / "reference.jsonl.gz", "wt") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"{len(lines)} reference frames written")


if __name__ == "__main__":
    main()
