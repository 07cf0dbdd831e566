"""Flat table records written by the CLI commands."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from ..config.settings import settings
from ..exceptions import ValidityError
from ..utils.file_utils import atomic_write_text, render_table
from ..utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class SweepRecord:
    """One output row: inputs, observables and convergence metadata.

    Columns keep the insertion order of the three groups, so every record
    built by the same sweep flattens to the same header.
    """

    params: Dict[str, Any]
    observables: Dict[str, Any]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.metadata:
            raise ValidityError(f"record {self.params} carries no convergence metadata")

    def as_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {}
        row.update(self.params)
        row.update(self.observables)
        row.update(self.metadata)
        return row


def write_table(
    records: Sequence[SweepRecord],
    output_path: Path,
    fmt: Optional[str] = None,
    significant_digits: Optional[int] = None,
) -> Path:
    """Render records and write them atomically.

    Raises:
        ValidityError: If the records do not share one header
    """
    fmt = fmt or settings.output.format
    significant_digits = significant_digits or settings.output.significant_digits
    rows: List[Dict[str, Any]] = [record.as_row() for record in records]
    if rows:
        header = list(rows[0])
        for row in rows[1:]:
            if list(row) != header:
                raise ValidityError(f"record columns {list(row)} differ from header {header}")

    content = render_table(rows, fmt=fmt, significant_digits=significant_digits)
    path = atomic_write_text(Path(output_path), content)
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path
