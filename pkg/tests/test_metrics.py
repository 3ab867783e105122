import itertools

import numpy as np
import pytest

from mp3splice.errors import LengthMismatch
from mp3splice.metrics import (COUNT_COLUMNS, PAPER_TYPE_COLUMNS, Score, balanced_accuracy, confusion, evaluate, f1,
                               format_tables, grouped_recall, jaccard, spec_label)

ALL8 = [np.array(bits) for bits in itertools.product((0, 1), repeat=8)]


def brute(y, y_hat):
    """Index-set definitions, no confusion matrix involved."""
    pos = {i for i, v in enumerate(y) if v}
    pred = {i for i, v in enumerate(y_hat) if v}
    neg = set(range(len(y))) - pos
    union = pos | pred
    j = 100.0 if not union else 100.0 * len(pos & pred) / len(union)
    if not pred or not pos or not (pos & pred):
        f = 0.0
    else:
        p, r = len(pos & pred) / len(pred), len(pos & pred) / len(pos)
        f = 100.0 * 2 * p * r / (p + r)
    tnr = len(neg - pred) / len(neg) if neg else None
    tpr = len(pos & pred) / len(pos) if pos else None
    rates = [x for x in (tpr, tnr) if x is not None]
    ba = 100.0 * sum(rates) / len(rates) if rates else 0.0
    return j, f, ba


@pytest.fixture(scope="module")
def exhaustive():
    rows = []
    for y in ALL8:
        for y_hat in ALL8:
            rows.append((y, y_hat, (jaccard(y, y_hat), f1(y, y_hat), balanced_accuracy(y, y_hat)), brute(y, y_hat)))
    return rows


def test_exhaustive_agreement_with_set_definitions(exhaustive):
    assert len(exhaustive) == 65_536
    worst = max(abs(a - b) for _, _, got, want in exhaustive for a, b in zip(got, want))
    assert worst < 1e-9


def test_jaccard_never_exceeds_f1_off_the_degenerate_cases(exhaustive):
    for y, y_hat, (j, f, _), _ in exhaustive:
        if not (j.degenerate or f.degenerate):
            assert j <= f + 1e-9
    # the one exception: both empty is perfect agreement for J but undefined (0) for F1
    z = np.zeros(8, int)
    assert jaccard(z, z) == 100.0 and f1(z, z) == 0.0 and jaccard(z, z).degenerate


def test_flipping_a_correct_prediction_never_helps(exhaustive):
    by_key = {(tuple(y), tuple(y_hat)): got for y, y_hat, got, _ in exhaustive}
    rng = np.random.default_rng(0)
    for k in rng.choice(len(ALL8) ** 2, 4000, replace=False):
        y, y_hat = ALL8[k // 256], ALL8[k % 256]
        for i in np.flatnonzero(y == y_hat):
            worse = y_hat.copy()
            worse[i] ^= 1
            before, after = by_key[(tuple(y), tuple(y_hat))], by_key[(tuple(y), tuple(worse))]
            for b, a in zip(before, after):
                if not (a.degenerate or b.degenerate):
                    assert a <= b + 1e-9


def test_degenerate_flags():
    ones, zeros = np.ones(4, int), np.zeros(4, int)
    assert f1(ones, zeros).degenerate and f1(zeros, ones).degenerate
    assert balanced_accuracy(ones, ones) == 100.0 and balanced_accuracy(ones, ones).degenerate
    assert not balanced_accuracy([0, 1], [0, 1]).degenerate
    assert isinstance(jaccard([1], [1]), Score) and "degenerate" not in repr(jaccard([1], [1]))


def test_confusion_and_length_check():
    c = confusion([1, 1, 0, 0, 1], [1, 0, 1, 0, 1])
    assert (c.tp, c.fp, c.fn, c.tn, c.total) == (2, 1, 1, 1, 5)
    with pytest.raises(LengthMismatch):
        jaccard([1, 0], [1])


def test_spec_label():
    assert spec_label("CBR", 128) == "C128" and spec_label("vbr", 2) == "V2"


def test_grouped_recall_by_hand():
    #          single     double         triple
    y      = [0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1]
    n      = [1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3]
    last   = ["C64", "V2", "C64", "V2", "C64", "C64", "V2", "V2", "C64", "V2", "V2", "V2"]
    y_hat  = [0, 1, 0, 0, 1, 0, 1, 1, 1, 1, 0, 1]
    r = grouped_recall(y, last, n, y_hat)
    assert r.by_count == {"Single": 75.0, "Double": 75.0, "Triple": 75.0, "Overall": 75.0}
    # C64 multi frames: idx 4,5,8 -> 2 of 3; V2 multi frames: idx 6,7,9,10,11 -> 4 of 5
    assert r.by_last_type["C64"] == pytest.approx(200 / 3)
    assert r.by_last_type["V2"] == 80.0
    assert "C96" in r.empty_groups and "C96" not in r.by_last_type
    assert r.sizes["Overall"] == 8 and r.sizes["Single"] == 4


def test_overall_is_recall_over_all_multiply_compressed_frames():
    # unequal group sizes: Overall is pooled, not the mean of Double and Triple
    y, n = [1, 1, 1, 1], [2, 2, 2, 3]
    r = grouped_recall(y, ["C64"] * 4, n, [1, 1, 0, 0])
    assert r.by_count["Double"] == pytest.approx(200 / 3) and r.by_count["Triple"] == 0.0
    assert r.by_count["Overall"] == 50.0


def test_table_layouts_follow_the_papers_columns():
    y = [0, 1, 1, 1]
    rep = evaluate(y, [0, 1, 0, 1], ["C64", "C128", "V2", "V6"], [1, 2, 3, 2], type_columns=PAPER_TYPE_COLUMNS)
    text = format_tables(rep, "Ours", PAPER_TYPE_COLUMNS)
    tables = text.split("\n\n")
    assert tables[0].split("\n")[0].split() == ["Method", "Jaccard", "Score", "F1-score", "Balanced", "Accuracy"]
    assert tables[1].split("\n")[1].split() == ["Method", *PAPER_TYPE_COLUMNS]
    assert tables[2].split("\n")[1].split() == ["Method", *COUNT_COLUMNS]
    row = tables[1].split("\n")[-1].split()
    assert row[0] == "Ours" and row[1] == "-" and row[2] == "100.00"
    d = rep.to_dict()
    assert d["recall_by_count"]["Overall"] == pytest.approx(66.67)
    assert d["aggregation"].startswith("frames")
