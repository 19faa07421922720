"""
网格合并: 近乎重合的点只保留一个
"""

from typing import Iterable, Union

import numpy as np

ArrayLike = Union[Iterable[float], np.ndarray]


def _as_array(points: ArrayLike) -> np.ndarray:
    if isinstance(points, np.ndarray):
        return points.astype(float).ravel()
    return np.asarray(list(points), dtype=float).ravel()


def collapse(points: ArrayLike, gap: float) -> np.ndarray:
    """sorted points with every point closer than gap to its kept predecessor dropped"""
    x = np.sort(_as_array(points))
    if x.size < 2:
        return x
    keep = np.ones(x.size, dtype=bool)
    last = x[0]
    for i in range(1, x.size):
        if x[i] - last < gap:
            keep[i] = False
        else:
            last = x[i]
    return x[keep]


def merge_points(base: ArrayLike, priority: ArrayLike = (), gap: float = 1e-9) -> np.ndarray:
    """
    base ∪ priority, sorted and strictly increasing with spacing ≥ gap.

    Priority points are kept exactly (near-equal priority points collapse to
    the smallest); base points within gap of a priority point are dropped.
    """
    p = collapse(priority, gap)
    b = _as_array(base)
    if p.size and b.size:
        idx = np.searchsorted(p, b)
        below = p[np.clip(idx - 1, 0, p.size - 1)]
        above = p[np.clip(idx, 0, p.size - 1)]
        dist = np.minimum(np.abs(b - below), np.abs(b - above))
        b = b[dist >= gap]
    b = collapse(b, gap)
    return np.sort(np.concatenate([b, p]))


def relative_gap(start: float, end: float, rtol: float = 1e-12) -> float:
    """gap for node sets on [start, end]"""
    return rtol * max(1.0, abs(start), abs(end), end - start)


def span_grid(
    start: float, end: float, base: ArrayLike = (), priority: ArrayLike = (), gap: float = 1e-9
) -> np.ndarray:
    """merge_points on [start, end] with both end points kept exactly"""
    inner = merge_points(base, priority, gap)
    inner = inner[(inner >= start + gap) & (inner <= end - gap)]
    if end - start < gap:
        return np.array([start, end]) if end > start else np.array([start])
    return np.concatenate([[start], inner, [end]])
