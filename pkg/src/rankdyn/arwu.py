"""ARWU scoring: annual best-performer mode, fixed-gain mode, PCP and inversion.

All six indicators share the same transform: zero offset, square-root power,
and a per-indicator gain. In annual mode the gains are recomputed every year
so that each indicator's best performer lands on 100 and the total is then
rescaled to put the top institution on 100. In fixed mode the gains are a
frozen vector, so scores are comparable across years and may exceed 100.

PCP (per-capita performance) is built from the other five scores: their
weighted squares divided by the faculty head count (FTE). Institutions with
unknown FTE are scored either through the parameter ``k`` (annual mode) or a
dummy FTE (fixed mode); the two are linked by ``dummy_fte = 1e4 * k / cal``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ComputationError, DegenerateIndicatorError, EstimationError, InputError

__all__ = [
    "Indicator",
    "InstitutionClass",
    "InstitutionRecord",
    "GainSet",
    "Provenance",
    "ScoreRow",
    "ScoreTable",
    "Mode",
    "FIXED_GAINS",
    "DUMMY_FTE",
    "STANDARD_WEIGHTS",
    "SOCSCI_WEIGHTS",
    "scale_to_best",
    "indicator_score_fixed",
    "compute_pcp_raw",
    "compute_ws",
    "weighted_squares",
    "pcp_score_annual",
    "recover_dummy_fte",
    "estimate_k",
    "arwu_total",
    "annual_gains",
    "score_annual",
    "score_fixed_gain",
    "invert_published",
    "rescore",
    "invert_with_error",
    "band_label",
]


class Indicator(enum.IntEnum):
    ALUMNI = 1
    AWARD = 2
    HICI = 3
    SN = 4
    PUB = 5
    PCP = 6

    @property
    def column(self) -> str:
        return _COLUMNS[self]

    @classmethod
    def from_column(cls, name: str) -> Indicator:
        try:
            return _BY_COLUMN[name.strip().lower()]
        except KeyError:
            raise InputError(f"unknown indicator '{name}'") from None


_COLUMNS = {
    Indicator.ALUMNI: "alumni",
    Indicator.AWARD: "award",
    Indicator.HICI: "hici",
    Indicator.SN: "ns",
    Indicator.PUB: "pub",
    Indicator.PCP: "pcp",
}
_BY_COLUMN = {v: k for k, v in _COLUMNS.items()} | {"sn": Indicator.SN}

RAW_INDICATORS = (Indicator.ALUMNI, Indicator.AWARD, Indicator.HICI, Indicator.SN, Indicator.PUB)


class InstitutionClass(enum.Enum):
    STANDARD = "standard"
    SOCIAL_SCIENCE = "socsci"


class Provenance(enum.Enum):
    ANNUAL_BEST_PERFORMER = "annual"
    FIXED = "fixed"


class Mode(enum.Enum):
    ANNUAL = "annual"
    FIXED = "fixed"


# Average of the gains actually used in the 2011 and 2012 editions.
FIXED_GAINS = (17.875, 16.975, 7.225, 4.775, 0.850, 9.325)
DUMMY_FTE = 890.0

STANDARD_WEIGHTS = (0.1, 0.2, 0.2, 0.2, 0.2, 0.1)
SOCSCI_WEIGHTS = (0.125, 0.25, 0.25, 0.0, 0.25, 0.125)


@dataclass(frozen=True)
class InstitutionRecord:
    id: str
    name: str
    cls: InstitutionClass
    raw: Mapping[Indicator, float]
    fte: float | None = None
    published: Mapping[Indicator | str, float] | None = None

    def __post_init__(self) -> None:
        raw = {Indicator(k): float(v) for k, v in self.raw.items()}
        for ind in RAW_INDICATORS:
            value = raw.setdefault(ind, 0.0)
            if not math.isfinite(value) or value < 0:
                raise InputError(f"{self.id}: raw {ind.column} must be >= 0, got {value}")
        object.__setattr__(self, "raw", raw)
        if self.fte is not None and not (math.isfinite(self.fte) and self.fte > 0):
            raise InputError(f"{self.id}: fte must be positive, got {self.fte}")

    def effective_raw(self) -> tuple[float, float, float, float, float]:
        """Raw marks ALUMNI..PUB, with S&N zeroed for social-science institutions."""
        values = [self.raw[ind] for ind in RAW_INDICATORS]
        if self.cls is InstitutionClass.SOCIAL_SCIENCE:
            values[Indicator.SN - 1] = 0.0
        return tuple(values)  # type: ignore[return-value]


@dataclass(frozen=True)
class GainSet:
    gains: tuple[float, ...] = FIXED_GAINS
    provenance: Provenance = Provenance.FIXED
    dummy_fte: float = DUMMY_FTE
    k_param: float | None = None

    def __post_init__(self) -> None:
        gains = tuple(float(g) for g in self.gains)
        if len(gains) != 6:
            raise InputError(f"a gain set has 6 gains, got {len(gains)}")
        if not all(math.isfinite(g) and g > 0 for g in gains):
            raise InputError(f"all gains must be positive, got {gains}")
        if not (math.isfinite(self.dummy_fte) and self.dummy_fte > 0):
            raise InputError(f"dummy_fte must be positive, got {self.dummy_fte}")
        object.__setattr__(self, "gains", gains)

    def gain(self, indicator: Indicator) -> float:
        return self.gains[indicator - 1]

    def frozen(self) -> GainSet:
        """The same gains, relabelled for use as a fixed (year-independent) set."""
        return replace(self, provenance=Provenance.FIXED)


@dataclass(frozen=True)
class ScoreRow:
    id: str
    indicator_scores: tuple[float, float, float, float, float, float]
    total: float
    rank: int
    band: str | None = None


@dataclass(frozen=True)
class ScoreTable:
    rows: tuple[ScoreRow, ...]
    mode: Mode
    gains: GainSet | None = field(default=None, compare=False)

    def by_id(self) -> dict[str, ScoreRow]:
        return {row.id: row for row in self.rows}

    def ranks(self) -> dict[str, int]:
        return {row.id: row.rank for row in self.rows}


def scale_to_best(values: Sequence[float], name: str = "indicator") -> list[float]:
    """Rescale so the largest value becomes exactly 10000."""
    if len(values) == 0:
        raise ComputationError(f"cannot scale an empty {name}")
    peak = max(values)
    if not peak > 0:
        raise DegenerateIndicatorError(name)
    factor = 10000.0 / peak
    return [10000.0 if v == peak else v * factor for v in values]


def indicator_score_fixed(record: InstitutionRecord, gains: GainSet, indicator: Indicator) -> float:
    indicator = Indicator(indicator)
    if indicator is Indicator.PCP:
        return gains.gain(Indicator.PCP) * math.sqrt(compute_pcp_raw(record, gains))
    mark = record.effective_raw()[indicator - 1]
    if mark < 0:
        raise InputError(f"{record.id}: negative raw {indicator.column}")
    return gains.gain(indicator) * math.sqrt(mark)


def compute_pcp_raw(record: InstitutionRecord, gains: GainSet) -> float:
    """Raw PCP mark: gain-weighted squared indicator marks per FTE.

    Uses ``gains.dummy_fte`` when the record has no FTE.
    """
    fte = record.fte if record.fte is not None else gains.dummy_fte
    if not fte > 0:
        raise InputError(f"{record.id}: FTE must be positive, got {fte}")
    m = record.effective_raw()
    a = gains.gains
    first = a[0] ** 2 * m[0]
    rest = sum(a[i] ** 2 * m[i] for i in range(1, 5))
    if record.cls is InstitutionClass.SOCIAL_SCIENCE:
        return (9.0 * first + 14.0 * rest) / (7.0 * fte)
    return (first + 2.0 * rest) / fte


def compute_ws(indicator_scores: Sequence[float]) -> float:
    s = indicator_scores
    if len(s) < 5:
        raise InputError("compute_ws needs the five non-composed scores")
    if not all(math.isfinite(x) for x in s[:5]):
        raise InputError("indicator scores must be finite")
    return 0.1 * s[0] ** 2 + 0.2 * (s[1] ** 2 + s[2] ** 2 + s[3] ** 2 + s[4] ** 2)


def weighted_squares(indicator_scores: Sequence[float], cls: InstitutionClass) -> float:
    """WS generalised to the social-science PCP weights.

    For standard institutions this is :func:`compute_ws`. For social-science
    ones the ALUMNI term carries the extra 9/7 factor of the social-science
    PCP formula and S&N drops out, so ``10 * WS / FTE`` equals the raw PCP
    mark in both classes.
    """
    if cls is InstitutionClass.STANDARD:
        return compute_ws(indicator_scores)
    s = indicator_scores
    return 0.1 * (9.0 / 7.0) * s[0] ** 2 + 0.2 * (s[1] ** 2 + s[2] ** 2 + s[4] ** 2)


def pcp_score_annual(ws: float, fte: float | None, cal: float, k: float | None) -> float:
    """Annual-mode PCP score.

    ``cal`` is WS/FTE of the best per-capita performer. With an FTE the score
    is ``100 * sqrt((ws / fte) / cal)``; without one it is ``sqrt(ws / k)``.
    """
    if not cal > 0:
        raise InputError(f"cal must be positive, got {cal}")
    if fte is not None:
        if not fte > 0:
            raise InputError(f"fte must be positive, got {fte}")
        return 100.0 * math.sqrt((ws / fte) / cal)
    if k is None or not k > 0:
        raise InputError(f"k must be positive when FTE is unknown, got {k}")
    return math.sqrt(ws / k)


def recover_dummy_fte(k: float, cal: float) -> float:
    return 1e4 * k / cal


def estimate_k(ws: Sequence[float], pcp: Sequence[float]) -> float:
    """Least-squares K in ``PCP**2 = WS / K`` (regression through the origin).

    Parameters
    ----------
    ws : sequence of float
        Weighted squares of institutions whose FTE is unknown.
    pcp : sequence of float
        Their published PCP scores.
    """
    ws_arr = np.asarray(ws, dtype=float)
    pcp_arr = np.asarray(pcp, dtype=float)
    if ws_arr.shape != pcp_arr.shape:
        raise InputError("ws and pcp must have the same length")
    if ws_arr.size == 0:
        raise EstimationError("no records to estimate K from")
    denom = float(np.sum(ws_arr * pcp_arr**2))
    if not denom > 0:
        raise EstimationError("all published PCP scores are zero; K is not identifiable")
    return float(np.sum(ws_arr**2)) / denom


def arwu_total(indicator_scores: Sequence[float], cls: InstitutionClass) -> float:
    s = indicator_scores
    if len(s) != 6:
        raise InputError(f"expected 6 indicator scores, got {len(s)}")
    if not all(math.isfinite(x) for x in s):
        raise InputError("indicator scores must be finite")
    middle = s[1] + s[2] + s[3] + s[4]
    if cls is InstitutionClass.SOCIAL_SCIENCE:
        if s[3] != 0:
            raise InputError("social-science institutions must have S&N score 0")
        return (1.25 * s[0] + 1.25 * s[5] + 2.5 * middle) / 10.0
    return (s[0] + s[5] + 2.0 * middle) / 10.0


def band_label(rank: int, width: int = 50, first: int = 101, last: int = 500) -> str | None:
    """Presentation band for ranks published in groups (``"101-150"``...)."""
    if width < 1:
        raise InputError("band width must be >= 1")
    if rank < first or rank > last:
        return None
    lo = first + ((rank - first) // width) * width
    hi = min(lo + width - 1, last)
    return f"{lo}-{hi}"


def _rank_rows(
    ids: Sequence[str],
    scores: Sequence[tuple[float, ...]],
    totals: Sequence[float],
    band_width: int | None,
) -> tuple[ScoreRow, ...]:
    order = sorted(range(len(ids)), key=lambda j: (-totals[j], ids[j]))
    rows = []
    for rank, j in enumerate(order, start=1):
        band = band_label(rank, band_width) if band_width else None
        rows.append(ScoreRow(ids[j], tuple(scores[j]), totals[j], rank, band))  # type: ignore[arg-type]
    return tuple(rows)


def _check_ids(dataset: Sequence[InstitutionRecord]) -> None:
    if not dataset:
        raise InputError("dataset is empty")
    seen: set[str] = set()
    for rec in dataset:
        if rec.id in seen:
            raise InputError(f"duplicate institution id '{rec.id}'")
        seen.add(rec.id)


def _raw_matrix(dataset: Sequence[InstitutionRecord]) -> np.ndarray:
    raw = np.array([rec.effective_raw() for rec in dataset], dtype=float)
    for ind in RAW_INDICATORS:
        if not raw[:, ind - 1].max() > 0:
            raise DegenerateIndicatorError(ind.name)
    return raw


def _best_per_capita(dataset: Sequence[InstitutionRecord], ws: Sequence[float]) -> float:
    per_capita = [w / rec.fte for rec, w in zip(dataset, ws) if rec.fte is not None]
    if not per_capita:
        raise ComputationError("no institution has a known FTE; PCP cannot be calibrated")
    cal = max(per_capita)
    if not cal > 0:
        raise DegenerateIndicatorError(Indicator.PCP.name)
    return cal


def _missing_fte(dataset: Iterable[InstitutionRecord]) -> int:
    return sum(1 for rec in dataset if rec.fte is None)


def annual_gains(dataset: Sequence[InstitutionRecord], k: float | None = None) -> GainSet:
    """Gains implied by this dataset's best performers (100 / sqrt(BP)).

    The PCP gain is anchored on the best per-capita performer among
    institutions with known FTE; the dummy FTE is recovered from ``k``.
    When every FTE is known ``k`` is unused and the dummy FTE keeps its
    fixed-mode default.
    """
    _check_ids(dataset)
    raw = _raw_matrix(dataset)
    gains = [100.0 / math.sqrt(raw[:, i].max()) for i in range(5)]
    scores = [[gains[i] * math.sqrt(m[i]) for i in range(5)] for m in raw]
    ws = [weighted_squares(s, rec.cls) for s, rec in zip(scores, dataset)]
    cal = _best_per_capita(dataset, ws)
    # Raw PCP marks are 10 * WS / FTE, so the best per-capita mark is 10 * cal.
    gains.append(100.0 / math.sqrt(10.0 * cal))
    if _missing_fte(dataset):
        if k is None:
            raise InputError("k is required when some institutions have no FTE")
        dummy = recover_dummy_fte(k, cal)
    else:
        dummy = DUMMY_FTE
    return GainSet(tuple(gains), Provenance.ANNUAL_BEST_PERFORMER, dummy, k)


def score_annual(
    dataset: Sequence[InstitutionRecord],
    k: float | None = None,
    band_width: int | None = 50,
) -> ScoreTable:
    """Score a dataset the way a single ARWU edition does.

    Every indicator is scaled so its best performer has 10000, compressed by
    a square root to the 0-100 range, combined with the class weights, and
    the totals are rescaled so the top institution has 100. ``k`` scores PCP
    for institutions without an FTE and is required only if there are any.
    """
    _check_ids(dataset)
    raw = _raw_matrix(dataset)
    columns = [scale_to_best(list(raw[:, i]), RAW_INDICATORS[i].name) for i in range(5)]
    scores = [[100.0 * math.sqrt(columns[i][j] / 10000.0) for i in range(5)] for j in range(len(dataset))]
    ws = [weighted_squares(s, rec.cls) for s, rec in zip(scores, dataset)]
    cal = _best_per_capita(dataset, ws)
    if _missing_fte(dataset) and k is None:
        raise InputError(
            f"k is required: {_missing_fte(dataset)} institution(s) have no FTE"
        )
    for s, w, rec in zip(scores, ws, dataset):
        s.append(pcp_score_annual(w, rec.fte, cal, k))
    totals = [arwu_total(s, rec.cls) for s, rec in zip(scores, dataset)]
    top = max(totals)
    totals = [t * 100.0 / top for t in totals]
    ids = [rec.id for rec in dataset]
    rows = _rank_rows(ids, [tuple(s) for s in scores], totals, band_width)
    return ScoreTable(rows, Mode.ANNUAL, annual_gains(dataset, k))


def score_fixed_gain(
    dataset: Sequence[InstitutionRecord],
    gains: GainSet | None = None,
    band_width: int | None = 50,
) -> ScoreTable:
    """Score against a frozen gain vector; no rescaling, scores may pass 100."""
    gains = gains if gains is not None else GainSet()
    if gains.provenance is not Provenance.FIXED:
        raise InputError("score_fixed_gain needs a gain set with fixed provenance")
    _check_ids(dataset)
    scores = []
    totals = []
    for rec in dataset:
        s = [indicator_score_fixed(rec, gains, ind) for ind in Indicator]
        scores.append(tuple(s))
        totals.append(arwu_total(s, rec.cls))
    ids = [rec.id for rec in dataset]
    return ScoreTable(_rank_rows(ids, scores, totals, band_width), Mode.FIXED, gains)


def invert_published(published_score: float, gain: float | None = None) -> float:
    """Raw score behind a published indicator score.

    With ``gain=None`` the result is on the scaled 0-10000 raw scale
    (``10000 * (s/100)**2``); with a gain it is the raw mark ``(s/gain)**2``.
    """
    s = published_score
    if not math.isfinite(s) or s < 0:
        raise InputError(f"published score must be >= 0, got {s}")
    if gain is None:
        if s > 100:
            raise InputError(f"published score above 100 on the scaled scale: {s}")
        return 10000.0 * (s / 100.0) ** 2
    if not gain > 0:
        raise InputError(f"gain must be positive, got {gain}")
    return (s / gain) ** 2


def rescore(raw: float, gain: float | None = None) -> float:
    """Forward transform matching :func:`invert_published`."""
    if gain is None:
        return 100.0 * math.sqrt(raw / 10000.0)
    return gain * math.sqrt(raw)


def invert_with_error(
    published_score: float, gain: float | None = None, half_width: float = 0.05
) -> tuple[float, float, float]:
    """Point inversion plus the raw interval implied by +/- ``half_width`` on the score.

    Published scores carry one decimal, so the default half-width is 0.05.
    The interval is clipped to [0, 100] on the score side for the scaled scale.
    """
    point = invert_published(published_score, gain)
    lo = max(published_score - half_width, 0.0)
    hi = published_score + half_width
    if gain is None:
        hi = min(hi, 100.0)
    return point, invert_published(lo, gain), invert_published(hi, gain)
