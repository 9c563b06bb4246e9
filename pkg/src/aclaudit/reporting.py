"""Tabular Yes/No report: CSV rendering and column sorting."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

from .access_mask import REPORT_RIGHTS, ReportRight
from .errors import UnknownColumn
from .evaluator import RightsMatrix
from .principals import Directory, short_name

YES = "Yes"
NO = "No"
TEXT_COLUMNS = ("User", "Directory")


@dataclass(frozen=True)
class ReportTable:
    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def column(self, name: str) -> int:
        try:
            return self.header.index(name)
        except ValueError:
            raise UnknownColumn(name) from None


def ordered_rights(rights: Sequence[ReportRight]) -> tuple[ReportRight, ...]:
    wanted = set(rights)
    return tuple(r for r in REPORT_RIGHTS if r in wanted)


def to_table(matrix: RightsMatrix, rights: Sequence[ReportRight] | None = None,
             directory: Directory | None = None) -> ReportTable:
    """One text row per matrix row. Users are shown by account name without domain."""
    rights = ordered_rights(rights if rights is not None else matrix.rights)
    header = TEXT_COLUMNS + tuple(r.name for r in rights)
    rows = []
    for row in matrix.rows:
        who = short_name(directory.display_name(row.user)) if directory is not None else row.user
        rows.append((who, row.folder) + tuple(YES if row.values[r] else NO for r in rights))
    return ReportTable(header, tuple(rows))


def table_csv(table: ReportTable) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(table.header)
    writer.writerows(table.rows)
    return buf.getvalue().encode("utf-8")


def render_csv(matrix: RightsMatrix, rights: Sequence[ReportRight] | None = None,
               directory: Directory | None = None) -> bytes:
    return table_csv(to_table(matrix, rights, directory))


def read_csv(data: bytes) -> ReportTable:
    rows = list(csv.reader(io.StringIO(data.decode("utf-8"), newline="")))
    if not rows:
        raise ValueError("empty CSV")
    return ReportTable(tuple(rows[0]), tuple(tuple(r) for r in rows[1:]))


def sort_table(table: ReportTable, column: str, direction: str = "asc") -> ReportTable:
    """Stable sort. Text columns compare case-insensitively; in ascending
    order Yes sorts before No."""
    if direction not in ("asc", "desc"):
        raise ValueError(f"direction must be 'asc' or 'desc', got {direction!r}")
    idx = table.column(column)
    if column in TEXT_COLUMNS:
        def key(row):
            return row[idx].casefold()
    else:
        def key(row):
            return 0 if row[idx] == YES else 1
    return ReportTable(table.header, tuple(sorted(table.rows, key=key, reverse=direction == "desc")))
