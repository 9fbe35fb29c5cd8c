"""
Report writer - CSV / JSON-lines rendering of subcommand rows
Rationals are written as "p/q"; files are replaced atomically
"""
import csv
import io
import json
import os
import sys
import tempfile
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

from backend.state import OutputFormat, Report
from backend.utils.helpers import format_rational


def to_json_value(value: Any) -> Any:
    """Convert a row value to its JSON form"""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (list, tuple)):
        return [to_json_value(v) for v in value]
    if isinstance(value, dict):
        return {str(k): to_json_value(v) for k, v in value.items()}
    if isinstance(value, float):
        return value
    if isinstance(value, int):
        return value
    if hasattr(value, "model_dump"):
        return value.model_dump(mode="json")
    return str(value)


def to_csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    converted = to_json_value(value)
    if isinstance(converted, (list, dict)):
        return json.dumps(converted, separators=(",", ":"))
    return str(converted)


def render_report(report: Report, output_format: OutputFormat, columns: Optional[List[str]] = None) -> str:
    """
    Render a report as text

    Args:
        report: Rows and seed of one subcommand run
        output_format: csv or json-lines
        columns: Column order; defaults to the keys of the first row

    Returns:
        Rendered text ending in a newline
    """
    if columns is None:
        columns = list(report.rows[0].keys()) if report.rows else []

    buffer = io.StringIO()
    if output_format == OutputFormat.CSV:
        if report.seed is not None:
            buffer.write(f"# seed={report.seed}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in report.rows:
            writer.writerow([to_csv_cell(row.get(col)) for col in columns])
    else:
        if report.seed is not None:
            buffer.write(json.dumps({"seed": report.seed}) + "\n")
        for row in report.rows:
            record = {col: to_json_value(row.get(col)) for col in columns}
            buffer.write(json.dumps(record, separators=(",", ":")) + "\n")
    return buffer.getvalue()


def write_report(
    report: Report,
    output_format: OutputFormat,
    output_path: Optional[str] = None,
    columns: Optional[List[str]] = None,
) -> str:
    """Render and write once: atomically to output_path, or to stdout"""
    text = render_report(report, output_format, columns)
    if output_path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return text

    target = Path(output_path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=str(target.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return text


def parse_json_lines(text: str) -> List[Dict[str, Any]]:
    """Parse JSON-lines output back into records (seed record included)"""
    return [json.loads(line) for line in text.splitlines() if line.strip()]
