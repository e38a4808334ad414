"""Independent reference implementations used to cross-check the library.

Everything here is deliberately written the slow, obvious way (dense linear
algebra, direct formulas) and shares no code with ``iprank`` itself.
"""

from __future__ import annotations

import numpy as np


def dense_pagerank(n: int, edges: list[tuple[int, int, float]], alpha: float) -> np.ndarray:
    """Stationary teleporting random-walk scores via a dense linear solve.

    ``edges`` are (src, dst, weight) triples.  Rows are normalized by total
    out-weight; rows with no out-edges are replaced by the uniform
    distribution (dangling mass spread over all nodes).  Solves

        (I - alpha * B_eff^T) x = (1 - alpha) / n * 1

    which is the fixed point of the power iteration.
    """
    A = np.zeros((n, n))
    for src, dst, w in edges:
        A[src, dst] += w
    out = A.sum(axis=1)
    B = np.zeros_like(A)
    nonzero = out > 0
    B[nonzero] = A[nonzero] / out[nonzero, None]
    B[~nonzero] = 1.0 / n
    return np.linalg.solve(np.eye(n) - alpha * B.T, (1.0 - alpha) / n * np.ones(n))


def average_ranks(values: list[float]) -> list[float]:
    """1-based ranks of ``values`` ascending, ties replaced by their average."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1  # mean of positions i..j, 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def direct_spearman(xs: list[float], ys: list[float]) -> float:
    """Spearman correlation as Pearson correlation of average ranks."""
    rx = average_ranks(list(xs))
    ry = average_ranks(list(ys))
    mx = sum(rx) / len(rx)
    my = sum(ry) / len(ry)
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = sum((a - mx) ** 2 for a in rx)
    vy = sum((b - my) ** 2 for b in ry)
    if vx == 0 or vy == 0:
        raise ZeroDivisionError("rank variance is zero")
    return cov / (vx * vy) ** 0.5
