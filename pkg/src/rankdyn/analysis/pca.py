"""Correlation matrix, one-component PCA, KMO and Bartlett's sphericity test."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from ..errors import ComputationError, InputError, MatrixError
from .eigen import jacobi_eigh
from .special import chi2_sf

__all__ = [
    "CorrelationMatrix",
    "PcaReport",
    "BartlettResult",
    "correlation_matrix",
    "pca_from_correlation",
    "kmo",
    "bartlett",
    "CI_Z",
    "SE_FACTOR",
]

CI_Z = 1.96
# Factor standard errors taken as 1.5x the standard error of a plain correlation.
SE_FACTOR = 1.5


@dataclass(frozen=True)
class CorrelationMatrix:
    names: tuple[str, ...]
    entries: np.ndarray
    n_samples: int | None = None

    @property
    def dim(self) -> int:
        return len(self.names)

    def validate(self, tol: float = 1e-12) -> None:
        r = self.entries
        if r.shape != (self.dim, self.dim):
            raise InputError(f"matrix shape {r.shape} does not match {self.dim} names")
        if not np.all(np.isfinite(r)):
            raise InputError("correlation matrix has non-finite entries")
        if np.max(np.abs(r - r.T)) > tol:
            raise InputError("correlation matrix is not symmetric")
        if np.max(np.abs(np.diag(r) - 1.0)) > tol:
            raise InputError("correlation matrix diagonal is not 1")
        if np.max(np.abs(r)) > 1.0 + tol:
            raise InputError("correlation entries must lie in [-1, 1]")


@dataclass(frozen=True)
class BartlettResult:
    chi2: float
    df: int
    p: float


@dataclass(frozen=True)
class PcaReport:
    names: tuple[str, ...]
    eigenvalues: tuple[float, ...]
    pct_variance: tuple[float, ...]
    cumulative_pct: tuple[float, ...]
    loadings: tuple[float, ...]
    communalities: tuple[float, ...]
    score_coefficients: tuple[float, ...]
    ci_lower: tuple[float, ...] | None
    ci_upper: tuple[float, ...] | None
    kmo: float | None
    bartlett_chi2: float | None
    bartlett_df: int | None
    bartlett_p: float | None
    sigma: float | None
    se_factor: float
    n_samples: int | None
    residual: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def correlation_matrix(columns: Mapping[str, Sequence[float]]) -> CorrelationMatrix:
    """Pearson correlations between named columns of equal length."""
    names = tuple(columns)
    if len(names) < 1:
        raise InputError("no columns given")
    n = len(columns[names[0]])
    if any(len(columns[k]) != n for k in names):
        raise InputError("columns differ in length")
    data = np.array([np.asarray(columns[k], dtype=float) for k in names])
    if n < 3:
        raise InputError(f"need at least 3 samples, got {n}")
    centered = data - data.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.sum(centered**2, axis=1))
    for name, norm in zip(names, norms):
        if norm == 0:
            raise InputError(f"indicator '{name}' has zero variance")
    r = (centered @ centered.T) / np.outer(norms, norms)
    r = np.clip((r + r.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return CorrelationMatrix(names, r, n)


def _off_diagonal(dim: int) -> np.ndarray:
    return ~np.eye(dim, dtype=bool)


def kmo(matrix: CorrelationMatrix) -> float | None:
    """Kaiser-Meyer-Olkin sampling adequacy; ``None`` when there is no correlation at all."""
    matrix.validate()
    r = matrix.entries
    try:
        inv = np.linalg.inv(r)
    except np.linalg.LinAlgError:
        raise MatrixError("correlation matrix is singular; KMO undefined") from None
    if not np.all(np.isfinite(inv)) or np.linalg.cond(r) > 1e12:
        raise MatrixError("correlation matrix is singular; KMO undefined")
    d = np.sqrt(np.diag(inv))
    partial = -inv / np.outer(d, d)
    mask = _off_diagonal(matrix.dim)
    r2 = float(np.sum(r[mask] ** 2))
    q2 = float(np.sum(partial[mask] ** 2))
    if r2 + q2 == 0:
        return None
    return r2 / (r2 + q2)


def bartlett(matrix: CorrelationMatrix, n: int) -> BartlettResult:
    matrix.validate()
    p = matrix.dim
    if n <= p:
        raise InputError(f"Bartlett's test needs n > {p}, got n={n}")
    try:
        np.linalg.cholesky(matrix.entries)
    except np.linalg.LinAlgError:
        raise MatrixError("correlation matrix is not positive definite") from None
    _, logdet = np.linalg.slogdet(matrix.entries)
    chi2 = -(n - 1 - (2 * p + 5) / 6.0) * logdet
    chi2 = max(chi2, 0.0)  # det(I) = 1 gives -0.0
    df = p * (p - 1) // 2
    pval = chi2_sf(chi2, df) if df > 0 else 1.0
    return BartlettResult(chi2, df, pval)


def pca_from_correlation(matrix: CorrelationMatrix, n: int | None = None) -> PcaReport:
    """Principal components of a correlation matrix, first component in detail.

    Parameters
    ----------
    matrix : CorrelationMatrix
        Validated correlation matrix.
    n : int, optional
        Sample size behind the matrix; defaults to ``matrix.n_samples``.
        Without it the confidence intervals, KMO and Bartlett fields that
        need a sample size are left as ``None``.

    Notes
    -----
    Loadings are ``sqrt(lambda_1) * v_1`` with the sign chosen so the entry of
    largest magnitude is positive. Score coefficients are loadings divided by
    ``lambda_1``. The 95% interval on each coefficient is the interval
    ``loading +/- 1.96 * 1.5 * sigma`` divided by ``lambda_1``, with
    ``sigma = 1 / sqrt(n - 1)``.
    """
    matrix.validate()
    n = n if n is not None else matrix.n_samples
    r = matrix.entries
    p = matrix.dim
    values, vectors = jacobi_eigh(r)
    if np.any(values < -1e-10):
        raise MatrixError(f"correlation matrix has a negative eigenvalue {values.min():.3g}")
    values = np.where(values < 0, 0.0, values)
    residual = float(max(np.max(np.abs(r @ vectors[:, j] - values[j] * vectors[:, j])) for j in range(p)))

    lead = values[0]
    if not lead > 0:
        raise ComputationError("first eigenvalue is zero")
    v1 = vectors[:, 0]
    if v1[int(np.argmax(np.abs(v1)))] < 0:
        v1 = -v1
    loadings = math.sqrt(lead) * v1
    communalities = loadings**2
    coefficients = loadings / lead
    pct = 100.0 * values / p
    cum = np.cumsum(pct)

    if n is not None and n > 1:
        sigma: float | None = 1.0 / math.sqrt(n - 1)
        half = CI_Z * SE_FACTOR * sigma
        lower: tuple[float, ...] | None = tuple(float(x) for x in (loadings - half) / lead)
        upper: tuple[float, ...] | None = tuple(float(x) for x in (loadings + half) / lead)
    else:
        sigma = lower = upper = None

    # Singular or semi-definite matrices still get a PCA; the tests that
    # need an inverse or a log-determinant are reported as undefined.
    try:
        kmo_value = kmo(matrix)
    except MatrixError:
        kmo_value = None
    bt: BartlettResult | None = None
    if n is not None and n > p:
        try:
            bt = bartlett(matrix, n)
        except MatrixError:
            pass

    def tup(a: np.ndarray) -> tuple[float, ...]:
        return tuple(float(x) for x in a)

    return PcaReport(
        names=matrix.names,
        eigenvalues=tup(values),
        pct_variance=tup(pct),
        cumulative_pct=tup(cum),
        loadings=tup(loadings),
        communalities=tup(communalities),
        score_coefficients=tup(coefficients),
        ci_lower=lower,
        ci_upper=upper,
        kmo=kmo_value,
        bartlett_chi2=bt.chi2 if bt else None,
        bartlett_df=bt.df if bt else None,
        bartlett_p=bt.p if bt else None,
        sigma=sigma,
        se_factor=SE_FACTOR,
        n_samples=n,
        residual=residual,
    )
