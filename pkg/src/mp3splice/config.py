"""Key-value configuration shared by the forge and the command line.

The file is INI-style (``[section]`` then ``key = value``). Its path comes
from an explicit argument, else $MP3SPLICE_CONFIG, else built-in defaults.
Values under [paths] can be referenced in command templates as {name}.
"""

import configparser
import os
from pathlib import Path

from mp3splice.errors import FileFormatError

CONFIG_ENV = "MP3SPLICE_CONFIG"

DEFAULTS = {
    "encoderA": {
        "cbr": "{ffmpeg} -v error -nostdin -y -i {input} -c:a libmp3lame -b:a {bitrate}k {output}",
        "vbr": "{ffmpeg} -v error -nostdin -y -i {input} -c:a libmp3lame -q:a {quality} {output}",
        "version": "{ffmpeg} -version",
        "delay": "576",
    },
    "encoderB": {
        "cbr": "{lame} --resample 44.1 -b {bitrate} {input} {output}",
        "vbr": "{lame} --resample 44.1 -V {quality} {input} {output}",
        "version": "{lame} --version",
        "delay": "576",
    },
    "decoder": {
        "decode": "{ffmpeg} -v error -nostdin -y -i {input} -f wav -acodec pcm_s16le -ar 44100 {output}",
        "version": "{ffmpeg} -version",
    },
    "forge": {"workers": "2"},
}


def load_config(path=None) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser(interpolation=None)
    cfg.optionxform = str   # keep encoderA/encoderB spelling
    cfg.read_dict(DEFAULTS)
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        path = Path(path)
        if not path.is_file():
            raise FileFormatError(f"config file {path} not found")
        try:
            cfg.read(path)
        except configparser.Error as exc:
            raise FileFormatError(f"{path}: {exc}") from exc
    if not cfg.has_section("paths"):
        cfg.add_section("paths")
    return cfg
