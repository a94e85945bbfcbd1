from __future__ import annotations

import csv
import io
import json
import math
import sys

import aiofiles

SWEEP_COLUMNS = ["n", "protocol", "dynamics", "trials", "p10", "p50", "p90", "censored", "rate", "ratio", "seed"]


def format_value(value) -> str:
    """Floats with 6 significant digits, None as an empty cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _json_value(value):
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(f"{value:.6g}")
    if isinstance(value, dict):
        return {key: _json_value(item) for key, item in value.items()}
    if isinstance(value, list):
        return [_json_value(item) for item in value]
    return value


def render_csv(records: list[dict], columns: list[str] | None = None) -> str:
    if columns is None:
        columns = list(records[0]) if records else []
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for record in records:
        writer.writerow([format_value(record.get(column)) for column in columns])
    return buffer.getvalue()


def render_json(records: list[dict], columns: list[str] | None = None) -> str:
    if columns is not None:
        records = [{column: record.get(column) for column in columns} for record in records]
    rows = [{key: _json_value(value) for key, value in record.items()} for record in records]
    return json.dumps(rows, indent=2) + "\n"


def render(records: list[dict], fmt: str = "csv", columns: list[str] | None = None) -> str:
    if fmt == "json":
        return render_json(records, columns)
    return render_csv(records, columns)


def sweep_columns(records: list[dict]) -> list[str]:
    """The fixed sweep header, plus the baseline columns when a baseline ran."""
    if any(record.get("iid_p50") is not None for record in records):
        return [*SWEEP_COLUMNS, "iid_p50", "dep_iid_ratio"]
    return SWEEP_COLUMNS


async def write_output(text: str, path: str | None = None):
    """Write to the given file, or to stdout when no path is set."""
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    async with aiofiles.open(path, "w", encoding="utf-8", newline="") as f:
        await f.write(text)


def render_document(record: dict) -> str:
    """A single JSON object, floats rounded like the tables."""
    return json.dumps({key: _json_value(value) for key, value in record.items()}, indent=2) + "\n"
