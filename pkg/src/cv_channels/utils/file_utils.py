"""File utility functions for table output."""

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Sequence


def ensure_output_directory(output_path: Path) -> Path:
    """Ensure output directory exists.

    Args:
        output_path: Output path (can be file or directory)

    Returns:
        Path to output directory
    """
    if output_path.suffix:
        output_dir = output_path.parent
    else:
        output_dir = output_path

    output_dir.mkdir(parents=True, exist_ok=True)
    return output_dir


def format_value(value: Any, significant_digits: int = 12) -> Any:
    """Round floats to a fixed number of significant digits.

    Integers, booleans and strings pass through unchanged; non-finite floats
    become the strings ``nan``, ``inf`` or ``-inf``.
    """
    if isinstance(value, bool) or not isinstance(value, float):
        return value
    if not math.isfinite(value):
        return str(value)
    return float(f"{value:.{significant_digits}g}")


def render_table(
    rows: Sequence[Dict[str, Any]],
    fmt: str = "csv",
    significant_digits: int = 12
) -> str:
    """Render rows as CSV or JSON text.

    Args:
        rows: Records sharing the same keys, in column order
        fmt: 'csv' or 'json'
        significant_digits: Significant digits for floats

    Returns:
        File contents

    Raises:
        ValueError: If the format is unsupported
    """
    formatted: List[Dict[str, Any]] = [
        {k: format_value(v, significant_digits) for k, v in row.items()} for row in rows
    ]

    if fmt.lower() == "json":
        return json.dumps(formatted, indent=2) + "\n"
    elif fmt.lower() == "csv":
        buffer = io.StringIO()
        if formatted:
            writer = csv.DictWriter(buffer, fieldnames=list(formatted[0].keys()), lineterminator="\n")
            writer.writeheader()
            for row in formatted:
                writer.writerow({k: (f"{v:.{significant_digits}g}" if isinstance(v, float) else v) for k, v in row.items()})
        return buffer.getvalue()
    else:
        raise ValueError(f"Unsupported export format: {fmt}")


def atomic_write_text(output_path: Path, content: str) -> Path:
    """Write text through a temporary file in the target directory and rename it.

    Args:
        output_path: Final file path
        content: Text to write

    Returns:
        The written path
    """
    output_dir = ensure_output_directory(output_path)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{output_path.name}.", suffix=".tmp", dir=str(output_dir))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(content)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, output_path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return output_path
