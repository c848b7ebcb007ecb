"""Score-driven and rank-driven ranking dynamics.

Submodules: :mod:`rankdyn.scoring` (generic transform chain),
:mod:`rankdyn.arwu` (ARWU scoring engine), :mod:`rankdyn.ranking`
(KAM aggregation and rank comparison), :mod:`rankdyn.analysis`
(PCA/KMO/Bartlett and regressiveness), :mod:`rankdyn.io` and
:mod:`rankdyn.cli`.
"""

from .arwu import (
    FIXED_GAINS,
    GainSet,
    Indicator,
    InstitutionClass,
    InstitutionRecord,
    ScoreTable,
    score_annual,
    score_fixed_gain,
)
from .errors import ComputationError, InputError, RankDynError
from .ranking import aggregate_rank_driven, compare_rankings, kam_remodeled, kam_scores
from .scoring import Direction, EventSet, Rounding, ScoringElement, score_event_set, transform_mark

__version__ = "0.1.0"

__all__ = [
    "FIXED_GAINS",
    "ComputationError",
    "Direction",
    "EventSet",
    "GainSet",
    "Indicator",
    "InputError",
    "InstitutionClass",
    "InstitutionRecord",
    "RankDynError",
    "Rounding",
    "ScoreTable",
    "ScoringElement",
    "aggregate_rank_driven",
    "compare_rankings",
    "kam_remodeled",
    "kam_scores",
    "score_annual",
    "score_event_set",
    "score_fixed_gain",
    "transform_mark",
]
