"""Trace export as CSV, one row per proposal."""

import csv
from pathlib import Path
from typing import Any, Dict, List, Sequence

from ..errors import ConfigError
from .types import TraceRecord

TRACE_COLUMNS = ["k", "status", "mu", "err_res_mm", "err_grad"]


def trace_header(n_params: int) -> List[str]:
    return TRACE_COLUMNS + [f"x_{i}" for i in range(n_params)]


def _cell(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def write_trace_csv(trace: Sequence[TraceRecord], path: str | Path) -> Path:
    """Write ``k,status,mu,err_res_mm,err_grad,x_0..x_{n-1}`` rows."""
    if not trace:
        raise ValueError("trace is empty")
    csv_path = Path(path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(trace_header(len(trace[0].x)))
        for record in trace:
            writer.writerow(
                [
                    record.k,
                    record.status,
                    _cell(record.mu),
                    _cell(record.err_res),
                    _cell(record.err_grad),
                    *(_cell(value) for value in record.x),
                ]
            )
    return csv_path


def read_trace_csv(path: str | Path) -> List[Dict[str, Any]]:
    """Read a trace CSV into dict rows; empty cells become None.

    Raises:
        ConfigError: If the file is missing or lacks the trace columns
    """
    csv_path = Path(path)
    if not csv_path.exists():
        raise ConfigError(f"Trace file not found: {csv_path}")
    with open(csv_path, newline="") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        if header[: len(TRACE_COLUMNS)] != TRACE_COLUMNS:
            raise ConfigError(f"{csv_path} is not a trace file (header {header})")
        rows: List[Dict[str, Any]] = []
        for raw in reader:
            row: Dict[str, Any] = {"k": int(raw["k"]), "status": raw["status"]}
            for column in header[2:]:
                row[column] = float(raw[column]) if raw[column] else None
            rows.append(row)
    return rows


__all__ = ["TRACE_COLUMNS", "trace_header", "write_trace_csv", "read_trace_csv"]
