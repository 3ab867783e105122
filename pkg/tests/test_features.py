import dataclasses

import numpy as np
import pytest

from mp3splice.bitstream import parse_file
from mp3splice.bitstream.records import MdctCoefficients, UnusableFrame
from mp3splice.bitstream.scalefactors import ScaleFactors
from mp3splice.errors import BitUnderflow, FileFormatError, ShapeMismatch, UnusableRecord
from mp3splice.features import (N_SCALARS, SCALAR_FIELDS, FeatureWindow, NormalizationStats, WindowDataset,
                                build_frame_features, make_windows, scalar_vector, usable_window_starts)


@pytest.fixture(scope="module")
def records(oracle_dir_module):
    """Usable frames of the whole oracle corpus, renumbered as one 200+ frame stream."""
    pool = [r for path in sorted(oracle_dir_module.glob("*.mp3")) for r in parse_file(path).records if r.usable]
    assert len(pool) >= 200
    return [dataclasses.replace(r, frame_index=i, header=dataclasses.replace(r.header, gap_before=False))
            for i, r in enumerate(pool)]


@pytest.fixture(scope="module")
def oracle_dir_module():
    from conftest import DATA
    return DATA / "oracle"


def with_mdct(rec, values):
    values = np.asarray(values, dtype=np.float32)
    return dataclasses.replace(rec, mdct=MdctCoefficients(np.zeros(576, np.int64), values))


def zero_record(rec):
    side = dataclasses.replace(rec.side, **{f.name: 0 for f in dataclasses.fields(rec.side)
                                            if f.name not in ("block_type", "table_select", "subblock_gain",
                                                              "all_part2_3_lengths")},
                               block_type="normal", table_select=(0, 0, 0), subblock_gain=(0, 0, 0))
    sf = ScaleFactors(np.zeros(21, np.int64), np.zeros((0, 3), np.int64), "long")
    return dataclasses.replace(with_mdct(rec, np.zeros(576)), side=side, scalefactors=sf)


def test_scalar_order_and_count(records):
    rec = records[0]
    v = scalar_vector(rec)
    assert N_SCALARS == 18 and len(SCALAR_FIELDS) == 18
    s = rec.side
    assert v[0] == s.part2_3_length and v[4] == s.global_gain and v[8] == s.big_values
    assert v[15] == s.block_type_code and v[17] == s.window_switching_flag


def test_zero_record_gives_zero_tensors(records):
    f = build_frame_features(zero_record(records[0]), NormalizationStats.identity())
    assert not f.mdct_grid.any() and not f.scalefac_grid.any() and not f.scalars.any()
    assert f.mdct_grid.shape == (32, 18) and f.scalefac_grid.shape == (5, 12)


def test_mdct_grid_is_subband_major(records):
    f = build_frame_features(with_mdct(records[0], np.arange(1, 577)), NormalizationStats.identity())
    s, k = np.meshgrid(np.arange(32), np.arange(18), indexing="ij")
    assert np.array_equal(f.mdct_grid, 18 * s + k + 1)


def test_short_block_scalefactors_fill_three_rows(records):
    short = np.arange(36).reshape(12, 3)
    rec = dataclasses.replace(records[0], scalefactors=ScaleFactors(np.zeros(0, np.int64), short, "short"))
    grid = build_frame_features(rec).scalefac_grid
    assert not grid[:2].any()
    for w in range(3):
        assert np.array_equal(grid[2 + w], short[:, w])


def test_unusable_record_raises(records):
    bad = UnusableFrame(5, records[0].header, BitUnderflow("cut"))
    with pytest.raises(UnusableRecord):
        build_frame_features(bad)


def test_normalization_is_fit_on_the_split(records, tmp_path):
    ds = WindowDataset.from_records([("a", records, np.zeros(len(records)))])
    norm = ds.fit_normalization()
    frames = np.unique(ds._frame_index(np.arange(len(ds))))
    raw = ds.scalars[frames].astype(np.float64)
    np.testing.assert_allclose(norm.scalars_mean, raw.mean(axis=0), rtol=1e-6)
    # over the distinct frames of the split the standardized features have mean ~0
    z = norm.apply(ds.mdct[frames], ds.scalefac[frames], ds.scalars[frames])
    assert all(np.abs(a.mean(axis=0)).max() < 1e-4 for a in z)
    # constant features keep std 1, so they normalize to exactly zero
    assert np.all(norm.scalars_std[raw.std(axis=0) == 0] == 1.0)
    norm.save(tmp_path / "n.json")
    back = NormalizationStats.load(tmp_path / "n.json")
    assert np.array_equal(back.mdct_std, norm.mdct_std)
    (tmp_path / "bad.json").write_text("{}")
    with pytest.raises(FileFormatError):
        NormalizationStats.load(tmp_path / "bad.json")


def test_normalization_moments_over_blocks_and_rows():
    # more rows than one accumulation block, with a large offset
    rng = np.random.default_rng(5)
    x = (1e3 + rng.normal(0, 2, (20000, 7))).astype(np.float32)
    rows = np.sort(rng.choice(len(x), 12345, replace=False))
    whole = NormalizationStats.fit(x, x, x)
    part = NormalizationStats.fit(x, x, x, rows=rows)
    ref = x.astype(np.float64)
    np.testing.assert_allclose(whole.mdct_mean, ref.mean(axis=0), rtol=1e-12)
    np.testing.assert_allclose(whole.mdct_std, ref.std(axis=0), rtol=1e-9)
    np.testing.assert_allclose(part.scalars_mean, ref[rows].mean(axis=0), rtol=1e-12)
    np.testing.assert_allclose(part.scalars_std, ref[rows].std(axis=0), rtol=1e-9)


def test_feature_determinism(records):
    a, b = build_frame_features(records[3]), build_frame_features(records[3])
    assert np.array_equal(a.mdct_grid, b.mdct_grid) and np.array_equal(a.scalars, b.scalars)


@pytest.mark.parametrize("n, starts", [(80, list(range(0, 57, 8))), (19, []), (20, [0]), (27, [0]), (28, [0, 8])])
def test_window_starts(records, n, starts):
    recs = records[:n]
    assert len(recs) == n
    windows = make_windows(recs, np.arange(n) % 2)
    assert [w.origin[1] for w in windows] == starts
    if n >= 20:
        assert len(windows) == (n - 20) // 8 + 1


def test_window_labels_are_aligned(records):
    labels = (np.arange(len(records)) // 10) % 2
    for w in make_windows(records, labels, source_id="f"):
        assert np.array_equal(w.labels, labels[w.origin[1]:w.origin[1] + 20])
        assert w.origin[0] == "f"


def test_window_starts_straddle_slice_boundaries(records):
    residues = {s % 10 for s in usable_window_starts(records[:200])}
    assert len(residues) > 1


def test_windows_with_gaps_or_unusable_frames_are_dropped(records):
    recs = list(records[:60])
    recs[10] = UnusableFrame(10, recs[10].header, BitUnderflow("cut"))
    recs[45] = dataclasses.replace(recs[45], header=dataclasses.replace(recs[45].header, gap_before=True))
    # 10 kills windows at 0 and 8; the gap before 45 kills 32 and 40 but not a window starting at it
    assert usable_window_starts(recs) == [16, 24]


def test_label_length_mismatch(records):
    with pytest.raises(ShapeMismatch):
        make_windows(records[:30], np.zeros(29))


def test_feature_window_validates_shapes():
    with pytest.raises(ShapeMismatch):
        FeatureWindow(np.zeros((20, 32, 18)), np.zeros((20, 5, 12)), np.zeros((19, 18)), np.zeros(20))


def test_dataset_matches_make_windows(records):
    labels = (np.arange(len(records)) // 10) % 2
    ds = WindowDataset.from_records([("f", records, labels)])
    windows = make_windows(records, labels, source_id="f")
    assert len(ds) == len(windows)
    for i in (0, len(ds) - 1):
        w = ds.window(i)
        assert w.origin == windows[i].origin
        np.testing.assert_allclose(w.mdct, windows[i].mdct, rtol=1e-6)
        assert np.array_equal(w.labels, windows[i].labels)


def test_dataset_cache_round_trip(records, tmp_path):
    ds = WindowDataset.from_records([("a", records[:50], np.ones(50)), ("b", records[50:], np.zeros(len(records) - 50))])
    ds.save(tmp_path / "c.npz")
    back = WindowDataset.load(tmp_path / "c.npz")
    assert back.sources == ds.sources and np.array_equal(back.starts, ds.starts)
    assert np.array_equal(back.batch([0, 3])[0], ds.batch([0, 3])[0])
    assert len(ds.select_sources({"a"})) == 4
    np.savez(tmp_path / "old.npz", version=np.array(0))
    with pytest.raises(FileFormatError):
        WindowDataset.load(tmp_path / "old.npz")
    with pytest.raises(FileFormatError):
        WindowDataset.load(tmp_path / "missing.npz")
