"""External encoder/decoder executables, driven through argument templates."""

import shlex
import shutil
import subprocess
import sysconfig
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from mp3splice.config import load_config
from mp3splice.errors import EncoderFailure
from mp3splice.forge.specs import CompressionSpec

ENCODERS = ("encoderA", "encoderB")


def find_ffmpeg() -> str | None:
    exe = shutil.which("ffmpeg")
    if exe:
        return exe
    try:
        import imageio_ffmpeg
    except ImportError:
        return None
    try:
        return imageio_ffmpeg.get_ffmpeg_exe()
    except RuntimeError:
        return None


def build_lamecli(cache_dir=None) -> str | None:
    """Compile the bundled LAME front end against the system libmp3lame.

    It accepts the ``lame`` command-line subset used here (-b, -V, --version)
    and pins the output rate to the input rate. Returns None if no compiler
    or library is available.
    """
    cache = Path(cache_dir or Path.home() / ".cache" / "mp3splice")
    exe = cache / "lamecli"
    if exe.exists():
        return str(exe)
    gcc = shutil.which("gcc") or shutil.which("cc")
    if gcc is None:
        return None
    cache.mkdir(parents=True, exist_ok=True)
    src = resources.files("mp3splice.forge") / "lamecli.c"
    with resources.as_file(src) as path:
        libdir = sysconfig.get_config_var("LIBDIR") or "/usr/lib"
        for lib in ("-lmp3lame", "-l:libmp3lame.so.0"):
            cmd = [gcc, "-O2", "-o", str(exe), str(path), lib, "-L/usr/lib/x86_64-linux-gnu", f"-L{libdir}"]
            if subprocess.run(cmd, capture_output=True).returncode == 0:
                return str(exe)
    return None


def default_paths() -> dict:
    return {"ffmpeg": find_ffmpeg(), "lame": shutil.which("lame") or build_lamecli()}


@dataclass
class Toolchain:
    """Command templates for the two encoders and the decoder."""
    templates: dict                  # section -> {cbr, vbr, decode, version, delay}
    paths: dict
    versions: dict = field(default_factory=dict)

    @classmethod
    def from_config(cls, cfg=None) -> "Toolchain":
        if cfg is None or isinstance(cfg, (str, Path)):
            cfg = load_config(cfg)
        paths = {k: v for k, v in default_paths().items() if v}
        paths.update(dict(cfg["paths"]))
        templates = {s: dict(cfg[s]) for s in (*ENCODERS, "decoder")}
        return cls(templates, paths)

    def _command(self, template: str, **fields) -> list:
        try:
            return [part.format(**self.paths, **fields) for part in shlex.split(template)]
        except KeyError as exc:
            raise EncoderFailure(f"no path configured for {exc} in '{template}'") from None

    def _run(self, cmd: list, what: str) -> subprocess.CompletedProcess:
        try:
            done = subprocess.run(cmd, capture_output=True, timeout=600)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise EncoderFailure(f"{what}: {exc}") from exc
        if done.returncode != 0:
            msg = done.stderr.decode(errors="replace").strip().splitlines()
            raise EncoderFailure(f"{what} exited {done.returncode}: {msg[-1] if msg else ''}")
        return done

    def probe(self) -> dict:
        """First line of every tool's version output; fails if a tool is missing."""
        versions = {}
        for name in (*ENCODERS, "decoder"):
            out = self._run(self._command(self.templates[name]["version"]), f"{name} version probe")
            text = (out.stdout or out.stderr).decode(errors="replace").strip()
            versions[name] = text.splitlines()[0] if text else ""
        self.versions = versions
        return versions

    def delay(self, encoder: str) -> int:
        return int(self.templates[encoder].get("delay", 576))

    def encode(self, spec: CompressionSpec, wav, mp3) -> None:
        key = "cbr" if spec.mode == "CBR" else "vbr"
        cmd = self._command(self.templates[spec.encoder][key], input=str(wav), output=str(mp3),
                            bitrate=spec.value, quality=spec.value)
        self._run(cmd, f"{spec.encoder} {spec.label}")
        if not Path(mp3).is_file() or Path(mp3).stat().st_size == 0:
            raise EncoderFailure(f"{spec.encoder} {spec.label} produced no output")

    def decode(self, mp3, wav) -> None:
        self._run(self._command(self.templates["decoder"]["decode"], input=str(mp3), output=str(wav)), "decoder")
        if not Path(wav).is_file():
            raise EncoderFailure("decoder produced no output")
