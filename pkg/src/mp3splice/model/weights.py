"""Weight file: an .npz holding every tensor plus the config as JSON."""

import json

import numpy as np

from mp3splice.errors import FileFormatError, ShapeMismatch
from mp3splice.model.config import ModelConfig
from mp3splice.model.network import ModelParameters

WEIGHTS_VERSION = 1


def save_weights(params: ModelParameters, path, extra: dict | None = None):
    meta = {"version": WEIGHTS_VERSION, "config": params.config.to_dict(), "extra": extra or {}}
    arrays = {f"param/{k}": v for k, v in params.tensors.items()}
    with open(path, "wb") as fh:
        np.savez(fh, __meta__=np.array(json.dumps(meta)), **arrays)


def load_weights(path) -> tuple:
    """(ModelParameters, extra dict). Every shape is checked against the config."""
    try:
        with np.load(path, allow_pickle=False) as z:
            meta = json.loads(str(z["__meta__"]))
            tensors = {k[len("param/"):]: z[k] for k in z.files if k.startswith("param/")}
    except (OSError, ValueError, KeyError) as exc:
        raise FileFormatError(f"{path}: not a weight file ({exc})") from exc
    if meta.get("version") != WEIGHTS_VERSION:
        raise FileFormatError(f"{path}: weight file version {meta.get('version')}")
    params = ModelParameters(ModelConfig.from_dict(meta["config"]), tensors)
    try:
        params.audit()
    except ShapeMismatch as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    return params, meta.get("extra", {})
