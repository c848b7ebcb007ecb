"""Score-driven transform chain: mark -> offset -> power law -> gain -> score.

Each indicator (or athletic event) is described by a :class:`ScoringElement`.
A mark on the wrong side of the element's offset is outside the scoring range
and earns zero points; otherwise the score is ``gain * |mark - offset| ** power``.
An :class:`EventSet` sums element scores, optionally rounding each one first
as combined-events tables do.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Any, Sequence

from .errors import CalibrationError, ComputationError, InputError

__all__ = [
    "Direction",
    "Rounding",
    "ScoringElement",
    "EventSet",
    "transform_mark",
    "calibrate_gain",
    "score_event_set",
    "round_half_away",
    "event_set_from_dict",
    "load_event_set",
]


class Direction(enum.Enum):
    ASCENDING = "asc"  # larger mark is better (jumps, throws, publication counts)
    DESCENDING = "desc"  # smaller mark is better (running times)


class Rounding(enum.Enum):
    NONE = "none"
    NEAREST = "nearest"


@dataclass(frozen=True)
class ScoringElement:
    direction: Direction
    offset: float
    power: float
    gain: float
    name: str = ""

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gain) and self.gain > 0):
            raise InputError(f"gain must be positive, got {self.gain}")
        if not (math.isfinite(self.power) and self.power > 0):
            raise InputError(f"power must be positive, got {self.power}")
        if not math.isfinite(self.offset):
            raise InputError(f"offset must be finite, got {self.offset}")

    def __call__(self, mark: float) -> float:
        return transform_mark(self, mark)


@dataclass(frozen=True)
class EventSet:
    elements: tuple[ScoringElement, ...]
    rounding: Rounding = Rounding.NONE

    def __post_init__(self) -> None:
        if not self.elements:
            raise InputError("an event set needs at least one element")
        object.__setattr__(self, "elements", tuple(self.elements))


def transform_mark(element: ScoringElement, mark: float) -> float:
    """Score one mark with one element.

    Marks at the threshold score exactly 0, and so does anything beyond it
    (slower than the offset for descending events, shorter for ascending).
    """
    if not math.isfinite(mark):
        raise InputError(f"mark must be finite, got {mark}")
    if element.direction is Direction.ASCENDING:
        distance = mark - element.offset
    else:
        distance = element.offset - mark
    if distance <= 0:
        return 0.0
    try:
        score = element.gain * distance**element.power
    except OverflowError:
        score = math.inf
    if not math.isfinite(score):
        raise ComputationError(f"score overflows for mark {mark}")
    return score


def calibrate_gain(best_performer_mark: float, power: float, target: float = 100.0) -> float:
    """Gain that maps the best performer's mark (offset 0) onto ``target`` points."""
    if not math.isfinite(best_performer_mark) or best_performer_mark <= 0:
        raise CalibrationError(
            f"best performer mark must be positive, got {best_performer_mark}"
        )
    if power <= 0:
        raise CalibrationError(f"power must be positive, got {power}")
    return target / best_performer_mark**power


def round_half_away(value: float) -> float:
    """Round to the nearest integer, halves away from zero.

    Goes through Decimal so that values like 0.49999999999999994 are not
    pushed over the half by the addition that ``floor(x + 0.5)`` would do.
    """
    return float(Decimal(value).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def score_event_set(event_set: EventSet, marks: Sequence[float]) -> float:
    if len(marks) != len(event_set.elements):
        raise InputError(
            f"expected {len(event_set.elements)} marks, got {len(marks)}"
        )
    total = 0.0
    for element, mark in zip(event_set.elements, marks):
        points = transform_mark(element, mark)
        if event_set.rounding is Rounding.NEAREST:
            points = round_half_away(points)
        total += points
    return total


def event_set_from_dict(doc: dict[str, Any]) -> EventSet:
    try:
        rounding = Rounding(doc.get("rounding", "none"))
        elements = []
        for i, raw in enumerate(doc["elements"]):
            try:
                elements.append(
                    ScoringElement(
                        direction=Direction(raw["direction"]),
                        offset=float(raw["offset"]),
                        power=float(raw["power"]),
                        gain=float(raw["gain"]),
                        name=str(raw.get("name", "")),
                    )
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise InputError(f"element {i}: {exc}") from exc
    except KeyError as exc:
        raise InputError(f"event set is missing key {exc}") from exc
    except (ValueError, TypeError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"invalid event set: {exc}") from exc
    return EventSet(tuple(elements), rounding)


def load_event_set(path: str | Path) -> EventSet:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: expected a JSON object")
    return event_set_from_dict(doc)
