"""File formats: institution and published-score CSVs, gain sets, matrices, output."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .analysis.pca import CorrelationMatrix
from .arwu import (
    RAW_INDICATORS,
    GainSet,
    InstitutionClass,
    InstitutionRecord,
    Provenance,
)
from .errors import DatasetError, InputError

__all__ = [
    "DATASET_COLUMNS",
    "PUBLISHED_COLUMNS",
    "ingest_dataset",
    "ingest_published",
    "load_gainset",
    "gainset_to_dict",
    "load_correlation_csv",
    "read_ranking_csv",
    "fmt_float",
    "render_csv",
    "render_json",
    "write_output",
]

DATASET_COLUMNS = ("id", "name", "class", "alumni", "award", "hici", "ns", "pub", "fte")
PUBLISHED_COLUMNS = ("id", "alumni", "award", "hici", "ns", "pub", "pcp", "total")
_CLASSES = {"standard": InstitutionClass.STANDARD, "socsci": InstitutionClass.SOCIAL_SCIENCE}


def _open_csv(path: str | Path, required: Sequence[str]) -> tuple[csv.DictReader, Any]:
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    reader = csv.DictReader(handle)
    header = [h.strip() for h in (reader.fieldnames or [])]
    missing = [c for c in required if c not in header]
    if missing:
        handle.close()
        raise DatasetError(f"{path}: missing column(s) {', '.join(missing)}", row=1)
    reader.fieldnames = header
    return reader, handle


def _number(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DatasetError(f"malformed number '{text}'", row=row, column=column) from None
    if not math.isfinite(value):
        raise DatasetError(f"non-finite number '{text}'", row=row, column=column)
    return value


def ingest_dataset(path: str | Path) -> list[InstitutionRecord]:
    """Read and validate an institution CSV.

    Every violation in the file is collected before raising, so one run
    reports all bad cells. Row numbers count the header as row 1.
    """
    reader, handle = _open_csv(path, DATASET_COLUMNS)
    records: list[InstitutionRecord] = []
    problems: list[DatasetError] = []
    seen: dict[str, int] = {}
    with handle:
        for row in reader:
            line = reader.line_num
            bad = len(problems)
            ident = (row.get("id") or "").strip()
            if not ident:
                problems.append(DatasetError("empty id", row=line, column="id"))
            elif ident in seen:
                problems.append(
                    DatasetError(f"duplicate id '{ident}' (first at row {seen[ident]})", row=line, column="id")
                )
            else:
                seen[ident] = line
            cls_text = (row.get("class") or "").strip().lower()
            if cls_text not in _CLASSES:
                problems.append(DatasetError(f"unknown class '{row.get('class')}'", row=line, column="class"))
            raw = {}
            for ind in RAW_INDICATORS:
                col = ind.column
                try:
                    value = _number((row.get(col) or "").strip(), line, col)
                except DatasetError as exc:
                    problems.append(exc)
                    continue
                if value < 0:
                    problems.append(DatasetError(f"negative raw value {value}", row=line, column=col))
                raw[ind] = value
            fte_text = (row.get("fte") or "").strip()
            fte = None
            if fte_text:
                try:
                    fte = _number(fte_text, line, "fte")
                    if fte <= 0:
                        raise DatasetError(f"fte must be positive, got {fte}", row=line, column="fte")
                except DatasetError as exc:
                    problems.append(exc)
            if len(problems) == bad:
                records.append(
                    InstitutionRecord(ident, (row.get("name") or "").strip(), _CLASSES[cls_text], raw, fte)
                )
    if problems:
        first = problems[0]
        message = "; ".join(str(p) for p in problems)
        error = DatasetError(f"{path}: {message}")
        error.row, error.column = first.row, first.column
        raise error
    if not records:
        raise DatasetError(f"{path}: no data rows")
    return records


def ingest_published(path: str | Path) -> dict[str, dict[str, float]]:
    """Published-score CSV -> ``{id: {column: score}}``; empty cells are skipped."""
    reader, handle = _open_csv(path, ("id",))
    out: dict[str, dict[str, float]] = {}
    with handle:
        for row in reader:
            line = reader.line_num
            ident = (row.get("id") or "").strip()
            if not ident:
                raise DatasetError("empty id", row=line, column="id")
            if ident in out:
                raise DatasetError(f"duplicate id '{ident}'", row=line, column="id")
            scores = {}
            for col in PUBLISHED_COLUMNS[1:]:
                text = (row.get(col) or "").strip()
                if not text:
                    continue
                value = _number(text, line, col)
                if value < 0:
                    raise DatasetError(f"negative score {value}", row=line, column=col)
                scores[col] = value
            out[ident] = scores
    return out


def load_gainset(path: str | Path) -> GainSet:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc
    try:
        provenance = Provenance(doc.get("provenance", "fixed"))
        gains = tuple(float(g) for g in doc["gains"])
        kwargs: dict[str, Any] = {}
        if "dummy_fte" in doc:
            kwargs["dummy_fte"] = float(doc["dummy_fte"])
        if doc.get("k") is not None:
            kwargs["k_param"] = float(doc["k"])
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"{path}: invalid gain set ({exc})") from exc
    return GainSet(gains, provenance, **kwargs)


def gainset_to_dict(gains: GainSet) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "provenance": gains.provenance.value,
        "gains": list(gains.gains),
        "dummy_fte": gains.dummy_fte,
    }
    if gains.k_param is not None:
        doc["k"] = gains.k_param
    return doc


def load_correlation_csv(path: str | Path, n_samples: int | None = None) -> CorrelationMatrix:
    """Square correlation CSV whose header row holds the indicator names.

    A leading label column (first header cell empty) is tolerated.
    """
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            rows = [r for r in csv.reader(handle) if any(c.strip() for c in r)]
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    labelled = header[0] == ""
    names = header[1:] if labelled else header
    body = [r[1:] if labelled else r for r in rows[1:]]
    if len(body) != len(names):
        raise DatasetError(f"{path}: expected {len(names)} rows, got {len(body)}")
    values = np.empty((len(names), len(names)))
    for i, r in enumerate(body):
        if len(r) != len(names):
            raise DatasetError(f"expected {len(names)} columns, got {len(r)}", row=i + 2)
        for j, cell in enumerate(r):
            values[i, j] = _number(cell.strip(), i + 2, names[j])
    matrix = CorrelationMatrix(tuple(names), values, n_samples)
    matrix.validate()
    return matrix


def read_ranking_csv(path: str | Path) -> dict[str, int]:
    """``{id: rank}`` from any CSV with ``id`` and ``rank`` columns."""
    reader, handle = _open_csv(path, ("id", "rank"))
    ranks: dict[str, int] = {}
    with handle:
        for row in reader:
            line = reader.line_num
            ident = (row.get("id") or "").strip()
            if ident in ranks:
                raise DatasetError(f"duplicate id '{ident}'", row=line, column="id")
            text = (row.get("rank") or "").strip()
            try:
                rank = int(text)
            except ValueError:
                raise DatasetError(f"malformed rank '{text}'", row=line, column="rank") from None
            if rank < 1:
                raise DatasetError(f"rank must be >= 1, got {rank}", row=line, column="rank")
            ranks[ident] = rank
    return ranks


def fmt_float(value: float | None) -> str:
    """Six significant digits; integral values print without an exponent."""
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    text = format(float(value), ".6g")
    return "0" if text == "-0" else text


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_float(c) if isinstance(c, (float, np.floating)) else ("" if c is None else c) for c in row])
    return buf.getvalue()


def render_json(doc: Any) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def write_output(text: str, out: str | Path | None, stdout=None) -> None:
    """Write to ``out`` atomically (temp file in the same directory, then rename).

    ``out`` of ``None`` or ``"-"`` writes to stdout.
    """
    if out is None or str(out) == "-":
        (stdout or sys.stdout).write(text)
        return
    target = Path(out)
    directory = target.parent if str(target.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=directory)
    except OSError as exc:
        raise InputError(f"{out}: cannot write ({exc.strerror})") from exc
    try:
        os.chmod(tmp, 0o666 & ~_umask())
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except BaseException as exc:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        if isinstance(exc, OSError):
            raise InputError(f"{out}: cannot write ({exc.strerror})") from exc
        raise
