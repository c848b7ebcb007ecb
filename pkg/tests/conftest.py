from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from rankdyn.analysis import CorrelationMatrix
from rankdyn.arwu import Indicator, InstitutionClass, InstitutionRecord

FIXTURES = Path(__file__).parent / "fixtures"

ARWU_CORR = np.array(
    [
        [1.0, 0.873, 0.733, 0.797, 0.526],
        [0.873, 1.0, 0.765, 0.790, 0.458],
        [0.733, 0.765, 1.0, 0.929, 0.699],
        [0.797, 0.790, 0.929, 1.0, 0.701],
        [0.526, 0.458, 0.699, 0.701, 1.0],
    ]
)
NAMES = ("alumni", "award", "hici", "ns", "pub")

_acceptance_lines: list[str] = []


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def arwu_corr() -> CorrelationMatrix:
    return CorrelationMatrix(NAMES, ARWU_CORR.copy(), 500)


def synthetic_dataset(rng: np.random.Generator, size: int = 40, socsci_share: float = 0.15,
                      missing_fte_share: float = 0.2) -> list[InstitutionRecord]:
    """Random institutions with plenty of zeros on the prize indicators."""
    records = []
    for j in range(size):
        raw = {
            Indicator.ALUMNI: float(rng.exponential(5.0)) if rng.random() > 0.55 else 0.0,
            Indicator.AWARD: float(rng.exponential(8.0)) if rng.random() > 0.65 else 0.0,
            Indicator.HICI: float(rng.poisson(20.0)),
            Indicator.SN: float(rng.exponential(30.0)),
            Indicator.PUB: float(rng.uniform(1500, 12000)),
        }
        cls = InstitutionClass.SOCIAL_SCIENCE if rng.random() < socsci_share else InstitutionClass.STANDARD
        fte = None if rng.random() < missing_fte_share else float(rng.uniform(200, 3000))
        records.append(InstitutionRecord(f"i{j:03d}", f"Inst {j}", cls, raw, fte))
    # Guarantee at least one standard institution with FTE so PCP can be calibrated.
    first = records[0]
    records[0] = InstitutionRecord(first.id, first.name, InstitutionClass.STANDARD, first.raw, 1000.0)
    return records


@pytest.fixture
def acceptance_report():
    def record(label: str, ok: bool, detail: str = "") -> None:
        status = "PASS" if ok else "FAIL"
        _acceptance_lines.append(f"[{status}] {label}" + (f" ({detail})" if detail else ""))

    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
