"""Frame-level scores (x100) and the grouped recall tables.

Corpus-level scores concatenate the frames of all windows/files before
scoring; per-window averaging is never done.
"""

from dataclasses import dataclass, field

import numpy as np

from mp3splice.errors import LengthMismatch

COUNT_COLUMNS = ("Single", "Double", "Triple", "Overall")
# last-compression-type columns shown in the paper's recall table
PAPER_TYPE_COLUMNS = ("C64", "C128", "C160", "C192", "V1", "V2", "V4", "V6")
ALL_TYPE_COLUMNS = ("C64", "C96", "C128", "C160", "C192", "C256", "V1", "V2", "V3", "V4", "V5", "V6")


class Score(float):
    """A percentage that remembers whether it came from a degenerate case."""

    def __new__(cls, value, degenerate: bool = False):
        obj = super().__new__(cls, value)
        obj.degenerate = degenerate
        return obj

    def __repr__(self):
        return f"Score({float(self):.4f}{', degenerate' if self.degenerate else ''})"


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def _pair(y, y_hat):
    y, y_hat = np.asarray(y).astype(bool).ravel(), np.asarray(y_hat).astype(bool).ravel()
    if y.shape != y_hat.shape:
        raise LengthMismatch(f"{y.size} labels vs {y_hat.size} predictions")
    return y, y_hat


def confusion(y, y_hat) -> Confusion:
    y, y_hat = _pair(y, y_hat)
    tp = int(np.sum(y & y_hat))
    fp = int(np.sum(~y & y_hat))
    fn = int(np.sum(y & ~y_hat))
    return Confusion(tp, fp, fn, y.size - tp - fp - fn)


def jaccard(y, y_hat) -> Score:
    """|I(y) ∩ I(ŷ)| / |I(y) ∪ I(ŷ)|; two empty sets count as perfect agreement."""
    c = confusion(y, y_hat)
    union = c.tp + c.fp + c.fn
    if union == 0:
        return Score(100.0, degenerate=True)
    return Score(100.0 * c.tp / union)


def f1(y, y_hat) -> Score:
    """Class 1 is positive. Zero precision or recall denominators give 0, flagged."""
    c = confusion(y, y_hat)
    if c.tp + c.fp == 0 or c.tp + c.fn == 0:
        return Score(0.0, degenerate=True)
    if c.tp == 0:
        return Score(0.0)
    precision, recall = c.tp / (c.tp + c.fp), c.tp / (c.tp + c.fn)
    return Score(100.0 * 2 * precision * recall / (precision + recall))


def balanced_accuracy(y, y_hat) -> Score:
    """(TPR + TNR)/2. With one class absent from y, the recall of the present class, flagged."""
    c = confusion(y, y_hat)
    pos, neg = c.tp + c.fn, c.tn + c.fp
    if pos and neg:
        return Score(50.0 * (c.tp / pos + c.tn / neg))
    if pos:
        return Score(100.0 * c.tp / pos, degenerate=True)
    if neg:
        return Score(100.0 * c.tn / neg, degenerate=True)
    return Score(0.0, degenerate=True)


def spec_label(mode: str, value: int) -> str:
    """("CBR", 128) -> "C128", ("VBR", 2) -> "V2"."""
    return f"{mode[0].upper()}{value}"


@dataclass
class GroupedRecall:
    by_last_type: dict                 # label -> recall of class 1 on multiply-compressed frames
    by_count: dict                     # "Single"/"Double"/"Triple"/"Overall" -> recall
    sizes: dict = field(default_factory=dict)
    empty_groups: list = field(default_factory=list)


def _recall(correct) -> float:
    return 100.0 * float(np.mean(correct))


def grouped_recall(y, last_type, n_compressions, y_hat, type_columns=ALL_TYPE_COLUMNS) -> GroupedRecall:
    """Recall tables from per-frame metadata.

    Single: recall of class 0 on once-compressed frames. Double, Triple and
    every last-type group: recall of class 1 on the matching
    multiply-compressed frames. Overall: recall of class 1 over all
    multiply-compressed frames. Empty groups are listed, not scored.
    """
    y, y_hat = _pair(y, y_hat)
    n = np.asarray(n_compressions).ravel()
    last = np.asarray(last_type).astype(str).ravel()
    if not (n.size == last.size == y.size):
        raise LengthMismatch("metadata arrays differ in length from the labels")
    correct = y == y_hat
    multi = n >= 2
    result = GroupedRecall({}, {})
    groups = [("count", "Single", n == 1), ("count", "Double", n == 2), ("count", "Triple", n == 3),
              ("count", "Overall", multi)]
    groups += [("type", t, multi & (last == t)) for t in type_columns]
    for kind, name, mask in groups:
        target = result.by_count if kind == "count" else result.by_last_type
        result.sizes[name] = int(mask.sum())
        if not mask.any():
            result.empty_groups.append(name)
            continue
        target[name] = _recall(correct[mask])
    return result


@dataclass
class EvalReport:
    jaccard: Score
    f1: Score
    balanced_accuracy: Score
    confusion: Confusion
    recall: GroupedRecall | None = None
    aggregation: str = "frames of all windows concatenated"

    def to_dict(self) -> dict:
        d = {
            "aggregation": self.aggregation,
            "jaccard": round(float(self.jaccard), 2),
            "f1": round(float(self.f1), 2),
            "balanced_accuracy": round(float(self.balanced_accuracy), 2),
            "degenerate": [k for k in ("jaccard", "f1", "balanced_accuracy") if getattr(self, k).degenerate],
            "confusion": self.confusion.__dict__,
        }
        if self.recall is not None:
            d["recall_by_last_type"] = {k: round(v, 2) for k, v in self.recall.by_last_type.items()}
            d["recall_by_count"] = {k: round(v, 2) for k, v in self.recall.by_count.items()}
            d["group_sizes"] = self.recall.sizes
            d["empty_groups"] = self.recall.empty_groups
        return d


def evaluate(y, y_hat, last_type=None, n_compressions=None, type_columns=ALL_TYPE_COLUMNS) -> EvalReport:
    recall = None
    if last_type is not None and n_compressions is not None:
        recall = grouped_recall(y, last_type, n_compressions, y_hat, type_columns)
    return EvalReport(jaccard(y, y_hat), f1(y, y_hat), balanced_accuracy(y, y_hat), confusion(y, y_hat), recall)


def _table(header: list, rows: list) -> str:
    cells = [header] + rows
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    fmt = lambda r: "  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths)))
    rule = "-" * len(fmt(header))
    return "\n".join([fmt(header), rule] + [fmt(r) for r in rows])


def _cell(d: dict, key) -> str:
    return f"{d[key]:.2f}" if key in d else "-"


def format_tables(report: EvalReport, method: str = "This model", type_columns=None) -> str:
    """Plain-text tables laid out like the paper's three result tables."""
    out = [_table(["Method", "Jaccard Score", "F1-score", "Balanced Accuracy"],
                  [[method, f"{report.jaccard:.2f}", f"{report.f1:.2f}", f"{report.balanced_accuracy:.2f}"]])]
    if report.recall is not None:
        cols = list(type_columns or [t for t in ALL_TYPE_COLUMNS if report.recall.sizes.get(t)])
        out.append("Last MP3 compression type (recall on multiply compressed frames)\n"
                   + _table(["Method", *cols], [[method, *(_cell(report.recall.by_last_type, c) for c in cols)]]))
        out.append("Num. MP3 compression (recall)\n"
                   + _table(["Method", *COUNT_COLUMNS],
                            [[method, *(_cell(report.recall.by_count, c) for c in COUNT_COLUMNS)]]))
    return "\n\n".join(out)
