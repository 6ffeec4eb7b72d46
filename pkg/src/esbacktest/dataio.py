"""CSV input formats.

* PIT series: header ``date,u`` (date optional ISO-8601) or just ``u``.
* Returns: header ``date,return``; values are percent log-returns.
* Bivariate PITs: header ``date,u2,u12`` (or ``u2,u12``); u12 may be
  empty on dates without a market VaR violation.

Malformed rows are rejected with their line number; missing values are
never imputed.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import InputError
from .mesx import BivariatePitSeries
from .sampletx import PitSeries


def _open_rows(path):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise InputError(f"{path}: file is empty")
    return rows


def _parse_float(field: str, path, lineno: int, colname: str) -> float:
    try:
        return float(field)
    except ValueError:
        raise InputError(
            f"{path}: line {lineno}: cannot parse {colname} value {field!r}"
        ) from None


def read_pit_csv(path) -> PitSeries:
    rows = _open_rows(path)
    header = [h.strip().lower() for h in rows[0]]
    if header == ["date", "u"]:
        has_date = True
    elif header == ["u"]:
        has_date = False
    else:
        raise InputError(f"{path}: expected header 'date,u' or 'u', got {rows[0]!r}")
    dates = [] if has_date else None
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != len(header):
            raise InputError(f"{path}: line {lineno}: expected {len(header)} fields")
        if has_date:
            dates.append(row[0].strip())
        u = _parse_float(row[-1].strip(), path, lineno, "u")
        if not 0.0 <= u <= 1.0:
            raise InputError(f"{path}: line {lineno}: PIT value {u} outside [0, 1]")
        values.append(u)
    if not values:
        raise InputError(f"{path}: no data rows")
    try:
        return PitSeries(np.array(values), dates=tuple(dates) if dates else None)
    except InputError as e:
        raise InputError(f"{path}: {e}") from None


def read_returns_csv(path):
    rows = _open_rows(path)
    header = [h.strip().lower() for h in rows[0]]
    if header != ["date", "return"]:
        raise InputError(f"{path}: expected header 'date,return', got {rows[0]!r}")
    dates, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != 2:
            raise InputError(f"{path}: line {lineno}: expected 2 fields")
        dates.append(row[0].strip())
        values.append(_parse_float(row[1].strip(), path, lineno, "return"))
    if not values:
        raise InputError(f"{path}: no data rows")
    if any(a >= b for a, b in zip(dates, dates[1:])):
        raise InputError(f"{path}: dates must be strictly increasing")
    return dates, np.array(values)


def read_bivariate_csv(path) -> BivariatePitSeries:
    rows = _open_rows(path)
    header = [h.strip().lower() for h in rows[0]]
    if header == ["date", "u2", "u12"]:
        has_date = True
    elif header == ["u2", "u12"]:
        has_date = False
    else:
        raise InputError(
            f"{path}: expected header 'date,u2,u12' or 'u2,u12', got {rows[0]!r}"
        )
    dates = [] if has_date else None
    u2, u12 = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != len(header):
            raise InputError(f"{path}: line {lineno}: expected {len(header)} fields")
        if has_date:
            dates.append(row[0].strip())
        v2 = _parse_float(row[-2].strip(), path, lineno, "u2")
        if not 0.0 <= v2 <= 1.0:
            raise InputError(f"{path}: line {lineno}: u2 value {v2} outside [0, 1]")
        u2.append(v2)
        raw12 = row[-1].strip()
        u12.append(_parse_float(raw12, path, lineno, "u12") if raw12 else np.nan)
    if not u2:
        raise InputError(f"{path}: no data rows")
    try:
        return BivariatePitSeries(np.array(u2), np.array(u12),
                                  dates=tuple(dates) if dates else None)
    except InputError as e:
        raise InputError(f"{path}: {e}") from None


def write_pit_csv(path, values, dates=None) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if dates is not None:
            writer.writerow(["date", "u"])
            writer.writerows(zip(dates, (repr(float(v)) for v in values)))
        else:
            writer.writerow(["u"])
            writer.writerows([(repr(float(v)),) for v in values])
