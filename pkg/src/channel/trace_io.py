"""
METARX Tap-Trace Files
Headerless CSV, one block per row, one tap per column, '.' decimals.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from channel.profiles import TapProfile


class TraceParseError(ValueError):
    """Malformed tap-trace file; row and column are 1-based when known."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[int] = None):
        location = ""
        if row is not None:
            location = f" (row {row}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + location)
        self.row = row
        self.column = column


def load_tap_trace(path: str | Path) -> TapProfile:
    """Read a trace; taps[l, j] = row j, column l."""
    trace_path = Path(path)
    if not trace_path.exists():
        raise FileNotFoundError(f"tap trace not found: {trace_path}")

    try:
        raw = pd.read_csv(trace_path, header=None, dtype=str, keep_default_na=False, skip_blank_lines=True)
    except pd.errors.EmptyDataError as exc:
        raise TraceParseError(f"tap trace is empty: {trace_path}", row=1) from exc
    except pd.errors.ParserError as exc:
        raise TraceParseError(f"tap trace has ragged rows: {exc}") from exc

    if raw.empty:
        raise TraceParseError(f"tap trace is empty: {trace_path}", row=1)

    values = np.empty(raw.shape, dtype=np.float64)
    for row_idx in range(raw.shape[0]):
        for col_idx in range(raw.shape[1]):
            cell = raw.iat[row_idx, col_idx]
            text = "" if cell is None or (isinstance(cell, float) and np.isnan(cell)) else str(cell).strip()
            if not text:
                raise TraceParseError("missing tap value", row=row_idx + 1, column=col_idx + 1)
            try:
                number = float(text)
            except ValueError as exc:
                raise TraceParseError(f"non-numeric tap value {text!r}", row=row_idx + 1, column=col_idx + 1) from exc
            if not np.isfinite(number):
                raise TraceParseError(f"non-finite tap value {text!r}", row=row_idx + 1, column=col_idx + 1)
            values[row_idx, col_idx] = number

    return TapProfile(values.T)


def save_tap_trace(profile: TapProfile, path: str | Path) -> Path:
    """Write a trace that loads back bit-exactly."""
    trace_path = Path(path)
    trace_path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(profile.taps.T)
    frame.to_csv(trace_path, header=False, index=False, float_format="%.17g")
    return trace_path
