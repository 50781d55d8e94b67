"""Pure-Python kernels. Same arithmetic as ``_ckernels.pyx``; results match exactly
for ranks and to rounding for Tanimoto sums."""
from __future__ import annotations

import numpy as np


def _dense(keys: list) -> list[int]:
    order = sorted(range(len(keys)), key=keys.__getitem__)
    ranks = [0] * len(keys)
    r = -1
    last = None
    for pos, i in enumerate(order):
        k = keys[i]
        if pos == 0 or k != last:
            r += 1
            last = k
        ranks[i] = r
    return ranks


def refine_ranks(
    invariants: np.ndarray,
    indptr: np.ndarray,
    neighbors: np.ndarray,
    orders: np.ndarray,
    tiebreak: np.ndarray,
) -> np.ndarray:
    """Iterative neighborhood refinement with individualization of ties.

    Returns a permutation rank (0..n-1) per atom.
    """
    n = len(invariants)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    ptr = indptr.tolist()
    nb = neighbors.tolist()
    od = orders.tolist()
    tb = tiebreak.tolist()
    rank = _dense(invariants.tolist())
    while True:
        classes = max(rank) + 1
        while True:
            keys = [
                (rank[i], tuple(sorted(rank[nb[k]] * 8 + od[k] for k in range(ptr[i], ptr[i + 1]))))
                for i in range(n)
            ]
            new = _dense(keys)
            new_classes = max(new) + 1
            rank = new
            if new_classes == classes:
                break
            classes = new_classes
        if classes == n:
            return np.asarray(rank, dtype=np.int64)
        counts = [0] * classes
        for r in rank:
            counts[r] += 1
        target = next(r for r in range(classes) if counts[r] > 1)
        chosen = min((i for i in range(n) if rank[i] == target), key=lambda i: (tb[i], i))
        rank = _dense([2 * rank[i] + (1 if rank[i] == target and i != chosen else 0) for i in range(n)])


def pairwise_tanimoto_sum(fps: np.ndarray) -> float:
    """Sum of Tanimoto similarity over all pairs i < j of packed uint64 rows."""
    n = fps.shape[0]
    counts = np.bitwise_count(fps).sum(axis=1).astype(np.int64)
    total = 0.0
    for i in range(n - 1):
        rest = fps[i + 1 :]
        inter = np.bitwise_count(rest & fps[i]).sum(axis=1).astype(np.int64)
        union = counts[i] + counts[i + 1 :] - inter
        sims = np.where(union == 0, 1.0, inter / np.where(union == 0, 1, union))
        for s in sims.tolist():
            total += s
    return total
