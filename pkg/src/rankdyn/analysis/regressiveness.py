"""Adjacent-rank difference function and the regressiveness index.

Sort an indicator's raw scores best first and take the gap between each
institution and the next one down. In a regressive indicator those gaps
shrink as rank worsens (climbing a place is cheap near the bottom); in a
progressive one, as in elite athletics, they grow.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InputError


@dataclass(frozen=True)
class DifferenceSeries:
    sorted_scores: tuple[float, ...]
    ds: tuple[float, ...]
    regressiveness_index: float | None


def regressiveness_index(ds: Sequence[float]) -> float | None:
    """Fraction of pairs ``n < m`` with ``ds[n] >= ds[m]``; ``None`` with fewer than 2 gaps."""
    gaps = np.asarray(ds, dtype=float)
    size = gaps.size
    if size < 2:
        return None
    holds = gaps[:, None] >= gaps[None, :]
    count = int(np.count_nonzero(np.triu(holds, k=1)))
    return count / (size * (size - 1) // 2)


def difference_series(raw_scores: Sequence[float]) -> DifferenceSeries:
    values = [float(v) for v in raw_scores]
    if len(values) < 2:
        raise InputError(f"need at least 2 scores, got {len(values)}")
    if not all(np.isfinite(values)):
        raise InputError("scores must be finite")
    ordered = sorted(values, reverse=True)
    ds = [ordered[i] - ordered[i + 1] for i in range(len(ordered) - 1)]
    return DifferenceSeries(tuple(ordered), tuple(ds), regressiveness_index(ds))


def regressiveness_report(
    raw_scores: Sequence[float], *, drop_top: bool = False, rescale: bool = False
) -> list[tuple[int, float]]:
    """Plot-ready ``(n, ds)`` pairs, ``n`` being the 1-based rank of the upper institution.

    ``drop_top`` omits the best institution, whose gap to the runner-up tends
    to dwarf everything else. ``rescale`` divides by the largest emitted gap
    so several indicators can share one axis.
    """
    series = difference_series(raw_scores)
    pairs = list(enumerate(series.ds, start=1))
    if drop_top:
        pairs = pairs[1:]
    if rescale and pairs:
        peak = max(d for _, d in pairs)
        if peak > 0:
            pairs = [(n, d / peak) for n, d in pairs]
    return pairs
