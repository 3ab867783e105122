import json

import numpy as np
import pytest

from conftest import DATA
from mp3splice.cli import run
from mp3splice.errors import FileTooShort
from mp3splice.localize import (SECONDS_PER_FRAME, FrameLabel, aggregate, frame_time, label_regions, localize,
                                window_cover)
from mp3splice.model import ModelConfig, init_params, save_weights

MP3 = DATA / "music60.mp3"


@pytest.fixture(scope="module")
def weights(tmp_path_factory):
    path = tmp_path_factory.mktemp("w") / "w.bin"
    save_weights(init_params(ModelConfig.small(), np.random.default_rng(0)), path)
    return path


def test_window_cover():
    assert window_cover(20) == [0]
    assert window_cover(28) == [0, 8]
    assert window_cover(30) == [0, 8, 10]
    with pytest.raises(FileTooShort):
        window_cover(19)


def test_window_cover_labels_every_frame_once():
    for n in range(20, 120):
        starts = window_cover(n)
        covered = np.zeros(n, int)
        for s in starts:
            covered[s:s + 20] += 1
        assert covered.min() >= 1 and starts[-1] + 20 == n


def test_aggregate_averages_overlaps():
    probs = np.stack([np.full(20, 0.2), np.full(20, 0.8)])
    p = aggregate(probs, [0, 8], 28)
    assert np.allclose(p[:8], 0.2) and np.allclose(p[8:20], 0.5) and np.allclose(p[20:], 0.8)


def test_frame_time():
    assert round(frame_time(100), 3) == 2.612
    assert SECONDS_PER_FRAME == pytest.approx(0.02612, abs=1e-5)


def test_regions_are_maximal_runs():
    labels = [0, 1, 1, 0, 1, None, 1, 1]
    frames = [FrameLabel(i, frame_time(i), l, None) for i, l in enumerate(labels)]
    assert label_regions(frames) == [(1, 2), (4, 4), (6, 7)]


def test_localize_is_deterministic_and_total(weights):
    from mp3splice.model import load_weights
    params, _ = load_weights(weights)
    a, b = localize(MP3, params), localize(MP3, params)
    assert a.to_dict() == b.to_dict()
    assert len(a.frames) == 61 and all(f.label in (0, 1) for f in a.frames)
    d = a.to_dict()
    assert d["frames"][100 % 61]["start_time"] == round(39 * 1152 / 44100, 3)


def test_localize_short_file(weights, oracle_dir):
    from mp3splice.model import load_weights
    with pytest.raises(FileTooShort):
        localize(oracle_dir / "lame_cbr128_clicks.mp3", load_weights(weights)[0])


def test_cli_localize_happy_path(weights, tmp_path):
    out = tmp_path / "result.json"
    assert run(["localize", str(MP3), "--weights", str(weights), "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["schema"] == 1 and len(d["frames"]) == 61


def test_cli_usage_errors(capsys):
    assert run(["bogus"]) == 2
    assert run([]) == 2
    assert run(["localize"]) == 2
    assert "usage" in capsys.readouterr().err


def test_cli_eval_length_mismatch(tmp_path, capsys):
    (tmp_path / "p").write_text("0 1 1")
    (tmp_path / "t").write_text("0 1")
    assert run(["eval", "--pred", str(tmp_path / "p"), "--truth", str(tmp_path / "t")]) == 1
    assert "LengthMismatch" in capsys.readouterr().err


def test_cli_eval_labels(tmp_path):
    (tmp_path / "p.json").write_text("[0, 1, 1, 0]")
    np.save(tmp_path / "t.npy", np.array([0, 1, 0, 0]))
    assert run(["eval", "--pred", str(tmp_path / "p.json"), "--truth", str(tmp_path / "t.npy"),
                "--out", str(tmp_path / "r.json")]) == 0
    assert json.loads((tmp_path / "r.json").read_text())["jaccard"] == 50.0


def test_cli_eval_needs_inputs(capsys):
    assert run(["eval"]) == 2


def test_cli_records(tmp_path):
    out = tmp_path / "r.jsonl"
    assert run(["records", str(MP3), "--frames", "3:6", "--out", str(out)]) == 0
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert [r["frame_index"] for r in rows] == [3, 4, 5]
    assert len(rows[0]["mdct_coef"]) == 576 and "global_gain" in rows[0]


def test_cli_domain_error_on_missing_file(tmp_path, weights):
    assert run(["localize", str(tmp_path / "none.mp3"), "--weights", str(weights)]) == 1


def test_cli_full_workflow(tmp_path):
    """forge -> extract -> train -> eval -> localize on a tiny synthetic corpus."""
    from mp3splice.forge import Toolchain, write_corpus
    try:
        Toolchain.from_config().probe()
    except Exception as exc:
        pytest.skip(f"encoders unavailable: {exc}")
    write_corpus(tmp_path / "src", 3, 8.0, seed=1)
    assert run(["forge", "--sources", str(tmp_path / "src"), "--out", str(tmp_path / "f"), "--seed", "1"]) == 0
    assert run(["extract", "--manifest", str(tmp_path / "f" / "manifest.jsonl"), "--out", str(tmp_path / "d")]) == 0
    assert run(["train", "--data", str(tmp_path / "d"), "--out", str(tmp_path / "run"), "--seed", "0", "--small",
                "--epoch-cap", "1"]) == 0
    assert run(["eval", "--weights", str(tmp_path / "run" / "best.npz"), "--data", str(tmp_path / "d"),
                "--paper-columns", "--out", str(tmp_path / "rep.json")]) == 0
    rep = json.loads((tmp_path / "rep.json").read_text())
    assert set(rep["recall_by_count"]) <= {"Single", "Double", "Triple", "Overall"}
    mp3 = next((tmp_path / "f" / "mp3").glob("*.mp3"))
    assert run(["localize", str(mp3), "--weights", str(tmp_path / "run" / "best.npz"),
                "--out", str(tmp_path / "loc.json")]) == 0
