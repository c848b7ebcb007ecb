"""Indicator diagnostics: PCA validation and regressiveness."""

from .eigen import jacobi_eigh
from .pca import (
    BartlettResult,
    CorrelationMatrix,
    PcaReport,
    bartlett,
    correlation_matrix,
    kmo,
    pca_from_correlation,
)
from .regressiveness import (
    DifferenceSeries,
    difference_series,
    regressiveness_index,
    regressiveness_report,
)
from .special import chi2_sf, gammainc_lower, gammainc_upper

__all__ = [
    "BartlettResult",
    "CorrelationMatrix",
    "DifferenceSeries",
    "PcaReport",
    "bartlett",
    "chi2_sf",
    "correlation_matrix",
    "difference_series",
    "gammainc_lower",
    "gammainc_upper",
    "jacobi_eigh",
    "kmo",
    "pca_from_correlation",
    "regressiveness_index",
    "regressiveness_report",
]
