"""Per-frame feature tensors and sliding windows of L frames.

Each usable frame becomes three arrays:

* ``mdct``: the 576 requantized coefficients as a 32x18 grid
  (sub-band major: row s holds lines 18s..18s+17);
* ``scalefac``: a 5x12 grid (see ``ScaleFactors.as_grid``);
* ``scalars``: the 18 remaining side-info fields in ``SCALAR_FIELDS`` order.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from mp3splice.bitstream.records import CodecFrameRecord
from mp3splice.errors import FileFormatError, ShapeMismatch, UnusableRecord

MDCT_SHAPE = (32, 18)
SCALEFAC_SHAPE = (5, 12)
SCALAR_FIELDS = (
    "part2_3_length", "scalefac_compress", "scalefac_scale", "preflag", "global_gain",
    "subblock_gain0", "subblock_gain1", "subblock_gain2", "big_values", "region0_count",
    "region1_count", "table_select0", "table_select1", "table_select2", "count1table_select",
    "block_type", "mixed_block_flag", "window_switching_flag",
)
N_SCALARS = len(SCALAR_FIELDS)

WINDOW_LENGTH = 20
WINDOW_STRIDE = 8

CACHE_VERSION = 1
_FIT_BLOCK = 8192


@dataclass(frozen=True)
class FrameFeatures:
    mdct_grid: np.ndarray      # (32, 18)
    scalefac_grid: np.ndarray  # (5, 12)
    scalars: np.ndarray        # (18,)


def scalar_vector(rec: CodecFrameRecord) -> np.ndarray:
    s = rec.side
    return np.array([
        s.part2_3_length, s.scalefac_compress, s.scalefac_scale, s.preflag, s.global_gain,
        *s.subblock_gain, s.big_values, s.region0_count, s.region1_count, *s.table_select,
        s.count1table_select, s.block_type_code, s.mixed_block_flag, s.window_switching_flag,
    ], dtype=np.float64)


@dataclass
class NormalizationStats:
    """Per-feature mean and standard deviation (training split only)."""

    mdct_mean: np.ndarray
    mdct_std: np.ndarray
    scalefac_mean: np.ndarray
    scalefac_std: np.ndarray
    scalars_mean: np.ndarray
    scalars_std: np.ndarray

    @classmethod
    def identity(cls) -> "NormalizationStats":
        return cls(np.zeros(MDCT_SHAPE), np.ones(MDCT_SHAPE), np.zeros(SCALEFAC_SHAPE),
                   np.ones(SCALEFAC_SHAPE), np.zeros(N_SCALARS), np.ones(N_SCALARS))

    @classmethod
    def fit(cls, mdct, scalefac, scalars, rows=None) -> "NormalizationStats":
        """Moments over the leading axis (restricted to ``rows`` if given);
        constant features keep std 1. Two float64 passes over blocks of rows
        keep memory flat for large frame stores."""
        def moments(x):
            x = np.asarray(x)
            idx = np.arange(len(x)) if rows is None else np.asarray(rows)
            blocks = [idx[i:i + _FIT_BLOCK] for i in range(0, len(idx), _FIT_BLOCK)]
            mu = sum(x[b].astype(np.float64).sum(axis=0) for b in blocks) / len(idx)
            var = sum(((x[b].astype(np.float64) - mu) ** 2).sum(axis=0) for b in blocks) / len(idx)
            sd = np.sqrt(var)
            return mu, np.where(sd > 0, sd, 1.0)
        return cls(*moments(mdct), *moments(scalefac), *moments(scalars))

    def apply(self, mdct, scalefac, scalars) -> tuple:
        return ((mdct - self.mdct_mean) / self.mdct_std,
                (scalefac - self.scalefac_mean) / self.scalefac_std,
                (scalars - self.scalars_mean) / self.scalars_std)

    def to_dict(self) -> dict:
        d = {k: np.asarray(v).tolist() for k, v in self.__dict__.items()}
        d["scalar_fields"] = list(SCALAR_FIELDS)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationStats":
        if d.get("scalar_fields") != list(SCALAR_FIELDS):
            raise FileFormatError("normalization stats were made for a different scalar layout")
        stats = cls(**{k: np.array(d[k], dtype=np.float64) for k in cls.__dataclass_fields__})
        ident = cls.identity()
        for k in cls.__dataclass_fields__:
            if getattr(stats, k).shape != getattr(ident, k).shape:
                raise FileFormatError(f"{k} has shape {getattr(stats, k).shape}")
        return stats

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "NormalizationStats":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (KeyError, ValueError, TypeError) as exc:
            raise FileFormatError(f"{path}: {exc}") from exc


def raw_frame_features(record) -> FrameFeatures:
    if not getattr(record, "usable", False):
        raise UnusableRecord(f"frame {record.frame_index} is unusable: {getattr(record, 'error', None)}")
    mdct = np.asarray(record.mdct.requantized, dtype=np.float64).reshape(MDCT_SHAPE)
    return FrameFeatures(mdct, record.scalefactors.as_grid().astype(np.float64), scalar_vector(record))


def build_frame_features(record, norm: NormalizationStats | None = None) -> FrameFeatures:
    f = raw_frame_features(record)
    if norm is None:
        return f
    return FrameFeatures(*norm.apply(f.mdct_grid, f.scalefac_grid, f.scalars))


@dataclass(frozen=True)
class FeatureWindow:
    mdct: np.ndarray      # (L, 32, 18)
    scalefac: np.ndarray  # (L, 5, 12)
    scalars: np.ndarray   # (L, 18)
    labels: np.ndarray    # (L,) in {0, 1}
    origin: tuple = ("", 0)  # (source id, first frame index)

    def __post_init__(self):
        n = len(self.labels)
        if (self.mdct.shape != (n, *MDCT_SHAPE) or self.scalefac.shape != (n, *SCALEFAC_SHAPE)
                or self.scalars.shape[0] != n):
            raise ShapeMismatch("window arrays disagree on L or per-frame shape")

    @property
    def features(self) -> list:
        return [FrameFeatures(*t) for t in zip(self.mdct, self.scalefac, self.scalars)]


def usable_window_starts(records, length: int = WINDOW_LENGTH, stride: int = WINDOW_STRIDE) -> list:
    """Starts 0, stride, 2·stride, ... whose window holds only usable, gap-free frames."""
    ok = np.array([r.usable for r in records], dtype=bool)
    gap = np.array([r.header.gap_before for r in records], dtype=bool)
    starts = []
    for s in range(0, len(records) - length + 1, stride):
        if ok[s:s + length].all() and not gap[s + 1:s + length].any():
            starts.append(s)
    return starts


def make_windows(records, labels, length: int = WINDOW_LENGTH, stride: int = WINDOW_STRIDE,
                 norm: NormalizationStats | None = None, source_id: str = "") -> list:
    labels = np.asarray(labels)
    if len(labels) != len(records):
        raise ShapeMismatch(f"{len(labels)} labels for {len(records)} frames")
    starts = usable_window_starts(records, length, stride)
    feats = {}
    windows = []
    for s in starts:
        for k in range(s, s + length):
            if k not in feats:
                feats[k] = build_frame_features(records[k], norm)
        fs = [feats[k] for k in range(s, s + length)]
        windows.append(FeatureWindow(
            mdct=np.stack([f.mdct_grid for f in fs]),
            scalefac=np.stack([f.scalefac_grid for f in fs]),
            scalars=np.stack([f.scalars for f in fs]),
            labels=labels[s:s + length].astype(np.int64),
            origin=(source_id, s),
        ))
    return windows


@dataclass
class WindowDataset:
    """Frames of many files stored once; windows are (frame offset) views.

    Holding frames rather than windows keeps a stride-8/L-20 dataset at 40%
    of the naive size.
    """

    mdct: np.ndarray       # (F, 32, 18) raw (unnormalized) features
    scalefac: np.ndarray   # (F, 5, 12)
    scalars: np.ndarray    # (F, 18)
    labels: np.ndarray     # (F,)
    starts: np.ndarray     # (W,) global frame index of each window start
    sources: list          # (W,) source id per window
    local_starts: np.ndarray  # (W,) start index within its source
    length: int = WINDOW_LENGTH
    norm: NormalizationStats | None = field(default=None, repr=False)

    @classmethod
    def empty(cls, length: int = WINDOW_LENGTH) -> "WindowDataset":
        return cls(np.zeros((0, *MDCT_SHAPE), np.float32), np.zeros((0, *SCALEFAC_SHAPE), np.float32),
                   np.zeros((0, N_SCALARS), np.float32), np.zeros(0, np.int8), np.zeros(0, np.int64), [],
                   np.zeros(0, np.int64), length)

    @classmethod
    def from_records(cls, items, length: int = WINDOW_LENGTH, stride: int = WINDOW_STRIDE) -> "WindowDataset":
        """``items``: iterable of (source_id, records, labels)."""
        mdct, sf, sc, lab, starts, sources, local = [], [], [], [], [], [], []
        offset = 0
        for source_id, records, labels in items:
            labels = np.asarray(labels)
            if len(labels) != len(records):
                raise ShapeMismatch(f"{source_id}: {len(labels)} labels for {len(records)} frames")
            ws = usable_window_starts(records, length, stride)
            if not ws:
                continue
            keep = sorted({k for s in ws for k in range(s, s + length)})
            remap = {k: i for i, k in enumerate(keep)}
            for k in keep:
                f = raw_frame_features(records[k])
                mdct.append(f.mdct_grid)
                sf.append(f.scalefac_grid)
                sc.append(f.scalars)
            lab.append(labels[keep])
            for s in ws:
                # windows are contiguous in the source, and so in ``keep``
                starts.append(offset + remap[s])
                sources.append(source_id)
                local.append(s)
            offset += len(keep)
        if not starts:
            return cls.empty(length)
        return cls(np.asarray(mdct, np.float32), np.asarray(sf, np.float32), np.asarray(sc, np.float32),
                   np.concatenate(lab).astype(np.int8), np.asarray(starts, np.int64), sources,
                   np.asarray(local, np.int64), length)

    @classmethod
    def from_arrays(cls, mdct, scalefac, scalars, labels, sources=None) -> "WindowDataset":
        """Independent windows given as (W, L, ...) arrays."""
        w, length = np.shape(labels)[:2]
        return cls(np.asarray(mdct).reshape(w * length, *np.shape(mdct)[2:]),
                   np.asarray(scalefac).reshape(w * length, *np.shape(scalefac)[2:]),
                   np.asarray(scalars).reshape(w * length, -1), np.asarray(labels).reshape(-1).astype(np.int8),
                   np.arange(w, dtype=np.int64) * length,
                   list(sources) if sources is not None else [f"w{i}" for i in range(w)],
                   np.zeros(w, dtype=np.int64), length)

    def __len__(self):
        return len(self.starts)

    def _frame_index(self, idx) -> np.ndarray:
        return self.starts[np.asarray(idx)][:, None] + np.arange(self.length)

    def batch(self, idx, dtype=np.float64) -> tuple:
        """(mdct, scalefac, scalars, labels) for windows ``idx``, normalized."""
        fi = self._frame_index(idx)
        mdct, sf, sc = (self.mdct[fi].astype(dtype), self.scalefac[fi].astype(dtype),
                        self.scalars[fi].astype(dtype))
        if self.norm is not None:
            mdct, sf, sc = (a.astype(dtype) for a in self.norm.apply(mdct, sf, sc))
        return mdct, sf, sc, self.labels[fi].astype(np.int64)

    def window(self, i: int) -> FeatureWindow:
        mdct, sf, sc, y = self.batch([i])
        return FeatureWindow(mdct[0], sf[0], sc[0], y[0], (self.sources[i], int(self.local_starts[i])))

    def subset(self, idx) -> "WindowDataset":
        """Same frame store, fewer windows."""
        idx = np.asarray(idx, dtype=np.int64)
        return WindowDataset(self.mdct, self.scalefac, self.scalars, self.labels, self.starts[idx],
                             [self.sources[i] for i in idx], self.local_starts[idx], self.length, self.norm)

    def select_sources(self, keep) -> "WindowDataset":
        keep = set(keep)
        return self.subset([i for i, s in enumerate(self.sources) if s in keep])

    def fit_normalization(self) -> NormalizationStats:
        """Moments over the distinct frames covered by this dataset's windows."""
        if not len(self):
            raise UnusableRecord("no windows to fit normalization on")
        frames = np.unique(self._frame_index(np.arange(len(self))))
        return NormalizationStats.fit(self.mdct, self.scalefac, self.scalars, rows=frames)

    def save(self, path):
        np.savez_compressed(
            path, version=np.array(CACHE_VERSION), length=np.array(self.length),
            mdct=self.mdct, scalefac=self.scalefac, scalars=self.scalars, labels=self.labels,
            starts=self.starts, local_starts=self.local_starts, sources=np.array(self.sources, dtype=str),
            scalar_fields=np.array(SCALAR_FIELDS))

    @classmethod
    def load(cls, path) -> "WindowDataset":
        try:
            z = np.load(path, allow_pickle=False)
            if int(z["version"]) != CACHE_VERSION:
                raise FileFormatError(f"{path}: cache version {int(z['version'])}, expected {CACHE_VERSION}")
            if tuple(z["scalar_fields"]) != SCALAR_FIELDS:
                raise FileFormatError(f"{path}: scalar layout differs")
            return cls(z["mdct"], z["scalefac"], z["scalars"], z["labels"], z["starts"],
                       [str(s) for s in z["sources"]], z["local_starts"], int(z["length"]))
        except (KeyError, ValueError, OSError) as exc:
            raise FileFormatError(f"{path}: {exc}") from exc
