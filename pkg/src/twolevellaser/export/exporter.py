"""Export of tables and reports to CSV/JSON files or stdout."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

FORMATS = ("csv", "json")


def _format_cell(value: Any) -> str:
    """Locale-independent text for one CSV cell."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": to_jsonable(value.real), "im": to_jsonable(value.imag)}
    return value


class Exporter:
    """Writes tables and report documents in one output format."""

    def __init__(self, output: Optional[Path] = None, fmt: str = "json"):
        """Initialize exporter.

        Args:
            output: File to write; stdout when None
            fmt: "csv" or "json"
        """
        fmt = fmt.lower()
        if fmt not in FORMATS:
            raise ValueError(f"Unsupported format: {fmt}")
        self.output = Path(output) if output is not None else None
        self.fmt = fmt

    def export_table(
        self,
        columns: Sequence[str],
        rows: Iterable[Sequence[Any]],
        config: Optional[dict[str, Any]] = None,
        meta: Optional[dict[str, Any]] = None,
    ) -> Optional[Path]:
        """Write a fixed-column table.

        CSV output starts with a ``# config`` comment line holding the
        effective configuration as JSON, then the header and data rows.
        """
        rows = [list(row) for row in rows]
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row has {len(row)} cells, expected {len(columns)}")

        if self.fmt == "json":
            document: dict[str, Any] = {}
            if config is not None:
                document["config"] = config
            if meta:
                document.update(meta)
            document["columns"] = list(columns)
            document["rows"] = rows
            return self.export_document(document)

        buffer = io.StringIO()
        if config is not None:
            buffer.write("# config " + json.dumps(to_jsonable(config), sort_keys=True) + "\n")
        for key, value in (meta or {}).items():
            buffer.write(f"# {key} " + json.dumps(to_jsonable(value), sort_keys=True) + "\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(cell) for cell in row])
        return self._write(buffer.getvalue())

    def export_document(self, document: dict[str, Any]) -> Optional[Path]:
        """Write a report document.

        JSON keeps the document's key order. CSV flattens a report with a
        ``comparisons`` list into one row per comparison, other documents
        into (key, value) rows.
        """
        if self.fmt == "json":
            return self._write(json.dumps(to_jsonable(document), indent=2) + "\n")

        config = document.get("config")
        if isinstance(document.get("comparisons"), list):
            columns = [
                "observable", "source", "simulated", "standard_error",
                "analytic", "tolerance", "tolerance_source", "verdict",
            ]
            rows = [[row.get(c) for c in columns] for row in document["comparisons"]]
            return self.export_table(columns, rows, config=config)

        rows = [
            [key, json.dumps(to_jsonable(value)) if isinstance(value, (dict, list)) else value]
            for key, value in document.items()
            if key != "config"
        ]
        return self.export_table(["key", "value"], rows, config=config)

    def _write(self, text: str) -> Optional[Path]:
        if self.output is None:
            sys.stdout.write(text)
            return None
        self.output.parent.mkdir(parents=True, exist_ok=True)
        with open(self.output, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        return self.output
