"""CSV ingestion into :class:`TimeSeries`."""

from __future__ import annotations

import csv
import datetime as dt
import logging
import math
from pathlib import Path
from typing import Optional

from .errors import DataFileNotFound, NonNumericValue, ParseError
from .series import TimeSeries

logger = logging.getLogger(__name__)


def ingest_csv(path, date_col: Optional[str] = "date", value_col: str = "cases") -> TimeSeries:
    """Read one numeric column (dot decimals only) and an optional ISO-date column.

    Values like ``"3,622"`` are rejected rather than guessed at.
    """
    path = Path(path)
    if not path.is_file():
        raise DataFileNotFound(f"input file not found: {path}")
    try:
        text = path.read_text(encoding="utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path} is not valid UTF-8: {exc}") from exc

    reader = csv.DictReader(text.splitlines())
    columns = reader.fieldnames or []
    if value_col not in columns:
        raise ParseError(f"value column {value_col!r} not found; available columns: {columns}")
    use_dates = date_col is not None and date_col in columns
    if date_col is not None and not use_dates:
        logger.warning("date column %r not found; series will have no date index", date_col)

    values, raw_dates = [], []
    for row_no, row in enumerate(reader, start=1):
        cell = (row.get(value_col) or "").strip()
        if cell == "":
            raise ParseError(f"row {row_no}: empty value in column {value_col!r}")
        try:
            value = float(cell)
        except ValueError:
            raise NonNumericValue(f"row {row_no}: {cell!r} is not a number") from None
        if not math.isfinite(value):
            raise NonNumericValue(f"row {row_no}: {cell!r} is not finite")
        values.append(value)
        if use_dates:
            raw_dates.append((row.get(date_col) or "").strip())

    if not values:
        raise ParseError(f"{path} has no data rows")

    index = _parse_dates(raw_dates) if use_dates else None
    return TimeSeries(values, index=index, name=value_col)


def _parse_dates(raw: list[str]):
    try:
        dates = tuple(dt.date.fromisoformat(s) for s in raw)
    except ValueError as exc:
        logger.warning("dates are not ISO-8601 (%s); series will have no date index", exc)
        return None
    if any(not a < b for a, b in zip(dates, dates[1:])):
        logger.warning("dates are not strictly increasing; series will have no date index")
        return None
    return dates
