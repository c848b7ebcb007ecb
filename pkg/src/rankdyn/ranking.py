"""Rank-driven aggregation (KAM normalisation) and ranking comparison."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .errors import InputError

__all__ = [
    "KamEntry",
    "KamResult",
    "RankedEntry",
    "RankComparison",
    "kam_scores",
    "kam_remodeled",
    "aggregate_rank_driven",
    "compare_rankings",
]


@dataclass(frozen=True)
class KamEntry:
    id: str
    n_higher: int
    score: float


@dataclass(frozen=True)
class KamResult:
    entries: tuple[KamEntry, ...]
    population: int

    def scores(self) -> dict[str, float]:
        return {e.id: e.score for e in self.entries}


@dataclass(frozen=True)
class RankedEntry:
    id: str
    score: float
    rank: int


@dataclass(frozen=True)
class RankComparison:
    shifts: dict[str, int]
    rank_a: dict[str, int]
    rank_b: dict[str, int]
    mean_abs_shift: float
    max_abs_shift: int
    scope: tuple[int, int] | None = None


def _ids_for(values: Sequence[float], ids: Sequence[str] | None) -> list[str]:
    if ids is None:
        return [str(i) for i in range(len(values))]
    if len(ids) != len(values):
        raise InputError("ids and values differ in length")
    if len(set(ids)) != len(ids):
        raise InputError("ids must be unique")
    return list(ids)


def _count_higher(values: Sequence[float]) -> list[int]:
    # Number of values strictly greater than each entry; ties share a count.
    ascending = sorted(values)
    n = len(values)
    return [n - bisect.bisect_right(ascending, v) for v in values]


def kam_scores(
    values: Sequence[float], population: int = 500, ids: Sequence[str] | None = None
) -> KamResult:
    """KAM normalisation ``10 * (1 - N_n / population)`` on a 0-10 scale.

    ``N_n`` counts institutions with a strictly higher value, so tied
    institutions (a block of zeros, typically) share one score.
    """
    if len(values) == 0:
        raise InputError("kam_scores needs at least one value")
    if population < len(values):
        raise InputError(f"population {population} is smaller than the {len(values)} values")
    names = _ids_for(values, ids)
    higher = _count_higher(values)
    entries = tuple(
        KamEntry(name, h, 10.0 * (population - h) / population) for name, h in zip(names, higher)
    )
    return KamResult(entries, population)


def kam_remodeled(values: Sequence[float], ids: Sequence[str] | None = None) -> KamResult:
    """KAM restricted to the nonzero scorers; true zeros keep a score of 0."""
    if len(values) == 0:
        raise InputError("kam_remodeled needs at least one value")
    names = _ids_for(values, ids)
    higher = _count_higher(values)
    nonzero = sum(1 for v in values if v != 0)
    entries = []
    for name, v, h in zip(names, values, higher):
        score = 0.0 if v == 0 else 10.0 * (nonzero - h) / nonzero
        entries.append(KamEntry(name, h, score))
    return KamResult(tuple(entries), nonzero)


ScoreTableLike = Union[KamResult, Mapping[str, float]]


def aggregate_rank_driven(
    tables: Sequence[ScoreTableLike], weights: Sequence[float]
) -> list[RankedEntry]:
    """Weighted sum of per-indicator scores, ranked descending (ties by id).

    Each table is a :class:`KamResult` or any mapping id -> score, which lets
    a pass-through indicator sit next to KAM tables.
    """
    if len(tables) != len(weights):
        raise InputError(f"{len(tables)} tables but {len(weights)} weights")
    if not tables:
        raise InputError("nothing to aggregate")
    if any(w < 0 for w in weights) or not any(w > 0 for w in weights):
        raise InputError("weights must be >= 0 and not all zero")
    maps = [t.scores() if isinstance(t, KamResult) else dict(t) for t in tables]
    ids = set(maps[0])
    for i, m in enumerate(maps[1:], start=1):
        if set(m) != ids:
            raise InputError(f"table {i} covers a different set of institutions")
    totals = {name: sum(w * m[name] for w, m in zip(weights, maps)) for name in ids}
    order = sorted(ids, key=lambda name: (-totals[name], name))
    return [RankedEntry(name, totals[name], r) for r, name in enumerate(order, start=1)]


def _as_ranks(ranking: Sequence[RankedEntry] | Mapping[str, int]) -> dict[str, int]:
    if isinstance(ranking, Mapping):
        return {str(k): int(v) for k, v in ranking.items()}
    return {e.id: e.rank for e in ranking}


def compare_rankings(
    a: Sequence[RankedEntry] | Mapping[str, int],
    b: Sequence[RankedEntry] | Mapping[str, int],
    scope: tuple[int, int] | None = None,
) -> RankComparison:
    """Signed rank shifts ``rank_a - rank_b``, summarised over a rank range of ``a``.

    ``scope`` is an inclusive ``(first, last)`` range of positions in ``a``;
    only institutions inside it contribute to the shifts and statistics.
    """
    ra, rb = _as_ranks(a), _as_ranks(b)
    if set(ra) != set(rb):
        only_a = sorted(set(ra) - set(rb))[:3]
        only_b = sorted(set(rb) - set(ra))[:3]
        raise InputError(f"rankings cover different institutions (only in a: {only_a}, only in b: {only_b})")
    if scope is not None:
        lo, hi = scope
        if lo > hi:
            raise InputError(f"empty scope {lo}-{hi}")
        selected = [k for k in ra if lo <= ra[k] <= hi]
    else:
        selected = list(ra)
    selected.sort(key=lambda k: (ra[k], k))
    shifts = {k: ra[k] - rb[k] for k in selected}
    if shifts:
        mean_abs = sum(abs(s) for s in shifts.values()) / len(shifts)
        max_abs = max(abs(s) for s in shifts.values())
    else:
        mean_abs, max_abs = 0.0, 0
    return RankComparison(
        shifts,
        {k: ra[k] for k in selected},
        {k: rb[k] for k in selected},
        mean_abs,
        max_abs,
        scope,
    )
