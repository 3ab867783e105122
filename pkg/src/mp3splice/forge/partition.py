import numpy as np

SPLITS = ("train", "val", "test")
FRACTIONS = (0.54, 0.13, 0.33)


def windows_in(n_frames: int, length: int = 20, stride: int = 8) -> int:
    return 0 if n_frames < length else (n_frames - length) // stride + 1


def partition(window_counts, rng, fractions=FRACTIONS) -> list:
    """Split name per segment; every segment goes to exactly one split.

    Segments are shuffled, then cut into three consecutive runs whose window
    totals are closest (L1 distance of the fractions) to ``fractions``. With
    three or more segments no split is left empty.
    """
    counts = np.asarray(window_counts, dtype=np.float64)
    n = len(counts)
    if n == 0:
        raise ValueError("nothing to partition")
    order = rng.permutation(n)
    total = counts.sum() or 1.0
    cum = np.concatenate([[0.0], np.cumsum(counts[order])]) / total
    a, b = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    ok = a <= b
    if n >= 3:
        ok &= (a >= 1) & (b - a >= 1) & (b <= n - 1)
    f0, f1, f2 = fractions
    cost = np.abs(cum[a] - f0) + np.abs(cum[b] - cum[a] - f1) + np.abs(1.0 - cum[b] - f2)
    cost = np.where(ok, cost, np.inf)
    ia, ib = np.unravel_index(np.argmin(cost), cost.shape)
    out = [""] * n
    for rank, seg in enumerate(order):
        out[seg] = SPLITS[0] if rank < ia else SPLITS[1] if rank < ib else SPLITS[2]
    return out
