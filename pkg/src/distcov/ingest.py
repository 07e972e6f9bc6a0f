"""Dataset loading and vertical partitioning, plus the handwritten-digits
feature-set presets used by the benchmark CLI.

The benchmark dataset is the UCI "Multiple Features" collection: six files
of per-digit feature columns sharing the same 2000 rows. Joined in canonical
file order they form a 2000x649 table; the presets below split that table
across 2..6 sites along the file boundaries.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .covariance import ColumnBlock
from .errors import (
    IoError,
    ParseError,
    RaggedRows,
    RowCountMismatch,
    SpecMismatch,
    UnsupportedPartitionCount,
)
from .matrix import DenseMatrix, column_slice

__all__ = [
    "PartitionSpec",
    "load_table",
    "hjoin",
    "partition_vertical",
    "mfeat_preset",
    "even_preset",
    "synthetic_table",
    "load_mfeat",
    "MFEAT_FILES",
    "MFEAT_WIDTHS",
]

# Canonical global column order of the six feature files: name, filename, width.
MFEAT_FILES: tuple[tuple[str, str, int], ...] = (
    ("Fact", "mfeat-fac", 216),
    ("Fou", "mfeat-fou", 76),
    ("Kar", "mfeat-kar", 64),
    ("Mor", "mfeat-mor", 6),
    ("Pix", "mfeat-pix", 240),
    ("Zer", "mfeat-zer", 47),
)
MFEAT_WIDTHS: tuple[int, ...] = tuple(w for _, _, w in MFEAT_FILES)
MFEAT_TOTAL_COLS: int = sum(MFEAT_WIDTHS)  # 649

# File-boundary groupings per site count; indices into MFEAT_FILES.
_MFEAT_GROUPINGS: dict[int, tuple[tuple[int, ...], ...]] = {
    2: ((0, 1, 2), (3, 4, 5)),
    3: ((0,), (1, 2), (3, 4, 5)),
    4: ((0,), (1, 2), (3, 4), (5,)),
    5: ((0,), (1,), (2,), (3, 4), (5,)),
    6: ((0,), (1,), (2,), (3,), (4,), (5,)),
}


@dataclass(frozen=True)
class PartitionSpec:
    """Assignment of every global column to exactly one site.

    Group i belongs to site i. The groups must be disjoint and together
    cover [0, total_cols) exactly.
    """

    total_cols: int
    groups: tuple[tuple[int, ...], ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "groups", tuple(tuple(int(c) for c in g) for g in self.groups)
        )
        if self.names is not None:
            object.__setattr__(self, "names", tuple(str(n) for n in self.names))
        if self.total_cols < 1:
            raise SpecMismatch(f"total_cols must be >= 1, got {self.total_cols}")
        if not self.groups:
            raise SpecMismatch("a partition needs at least one group")
        if self.names is not None and len(self.names) != len(self.groups):
            raise SpecMismatch(
                f"{len(self.names)} names for {len(self.groups)} groups"
            )
        seen: set[int] = set()
        for i, g in enumerate(self.groups):
            if not g:
                raise SpecMismatch(f"group {i} is empty")
            for c in g:
                if not 0 <= c < self.total_cols:
                    raise SpecMismatch(
                        f"group {i} references column {c}, valid range is "
                        f"[0, {self.total_cols})"
                    )
                if c in seen:
                    raise SpecMismatch(f"column {c} assigned to more than one group")
                seen.add(c)
        if len(seen) != self.total_cols:
            missing = next(c for c in range(self.total_cols) if c not in seen)
            raise SpecMismatch(f"column {missing} not assigned to any group")

    @property
    def sites(self) -> int:
        return len(self.groups)

    def to_json(self) -> str:
        groups = []
        for i, g in enumerate(self.groups):
            entry: dict = {"site": i, "cols": list(g)}
            if self.names is not None:
                entry["name"] = self.names[i]
            groups.append(entry)
        return json.dumps({"total_cols": self.total_cols, "groups": groups})

    @classmethod
    def from_json(cls, text: str) -> "PartitionSpec":
        try:
            doc = json.loads(text)
            total = int(doc["total_cols"])
            raw = list(doc["groups"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed partition spec: {exc}") from None
        raw.sort(key=lambda e: e.get("site", 0))
        for i, entry in enumerate(raw):
            if entry.get("site") != i:
                raise SpecMismatch(f"group site-ids must be 0..{len(raw) - 1} in order")
        groups = tuple(tuple(int(c) for c in e["cols"]) for e in raw)
        names = None
        if all("name" in e for e in raw):
            names = tuple(str(e["name"]) for e in raw)
        return cls(total_cols=total, groups=groups, names=names)


def load_table(path: str | Path, format: str = "whitespace") -> DenseMatrix:
    """Parse a numeric text file into a matrix.

    `format` is "whitespace" (runs of blanks between fields, the native
    layout of the benchmark files) or "csv". A CSV first row that does not
    parse as numbers is taken as a header and becomes the column labels.

    Raises:
        IoError: the file cannot be read.
        RaggedRows: rows disagree on field count.
        ParseError: a field is not a number, or the file has no data rows.
        NonFiniteValue: a field parses but is NaN or infinite.
    """
    if format not in ("whitespace", "csv"):
        raise ParseError(f"unknown format {format!r}, expected 'whitespace' or 'csv'")
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise IoError(f"cannot read {p}: {exc}") from None

    if format == "csv":
        rows = [r for r in csv.reader(text.splitlines()) if r]
    else:
        rows = [line.split() for line in text.splitlines() if line.strip()]

    labels: tuple[str, ...] | None = None
    if format == "csv" and rows and not _all_numeric(rows[0]):
        labels = tuple(f.strip() for f in rows[0])
        rows = rows[1:]
    if not rows:
        raise ParseError(f"{p}: no data rows")

    width = len(rows[0])
    data = np.empty((len(rows), width), dtype=np.float64)
    for i, fields in enumerate(rows):
        if len(fields) != width:
            raise RaggedRows(
                f"{p}: row {i + 1} has {len(fields)} fields, expected {width}"
            )
        for j, f in enumerate(fields):
            try:
                data[i, j] = float(f)
            except ValueError:
                raise ParseError(f"{p}: row {i + 1} field {j + 1}: {f!r} is not a number") from None
    return DenseMatrix(data, labels)


def _all_numeric(fields: Sequence[str]) -> bool:
    for f in fields:
        try:
            v = float(f)
        except ValueError:
            return False
        if not math.isfinite(v):
            return False
    return True


def hjoin(tables: Sequence[DenseMatrix]) -> DenseMatrix:
    """Concatenate tables column-wise; they must share the row count."""
    if not tables:
        raise RowCountMismatch("hjoin needs at least one table")
    rows = tables[0].rows
    for i, tbl in enumerate(tables):
        if tbl.rows != rows:
            raise RowCountMismatch(
                f"table {i} has {tbl.rows} rows, expected {rows}"
            )
    values = np.ascontiguousarray(np.hstack([t.values for t in tables]))
    labels: tuple[str, ...] | None = None
    if all(t.labels is not None for t in tables):
        labels = tuple(name for t in tables for name in t.labels)  # type: ignore[union-attr]
    return DenseMatrix._wrap(values, labels)


def partition_vertical(m: DenseMatrix, spec: PartitionSpec) -> list[ColumnBlock]:
    """Split a matrix into per-site column blocks according to the spec."""
    if spec.total_cols != m.cols:
        raise SpecMismatch(
            f"spec covers {spec.total_cols} columns, matrix has {m.cols}"
        )
    blocks = []
    for site, group in enumerate(spec.groups):
        blocks.append(
            ColumnBlock(site=site, data=column_slice(m, group), global_cols=group)
        )
    return blocks


def mfeat_preset(partitions: int) -> PartitionSpec:
    """The benchmark's file-boundary split of the 649 feature columns.

    2: {Fact-Fou-Kar | Mor-Pix-Zer}; 3: {Fact | Fou-Kar | Mor-Pix-Zer};
    4: {Fact | Fou-Kar | Mor-Pix | Zer}; 5: {Fact | Fou | Kar | Mor-Pix | Zer};
    6: one file per site.
    """
    if partitions not in _MFEAT_GROUPINGS:
        raise UnsupportedPartitionCount(
            f"no preset for {partitions} partitions, supported: 2..6"
        )
    starts = np.concatenate(([0], np.cumsum(MFEAT_WIDTHS)))
    groups = []
    names = []
    for file_idxs in _MFEAT_GROUPINGS[partitions]:
        cols: list[int] = []
        for fi in file_idxs:
            cols.extend(range(int(starts[fi]), int(starts[fi + 1])))
        groups.append(tuple(cols))
        names.append("-".join(MFEAT_FILES[fi][0] for fi in file_idxs))
    return PartitionSpec(
        total_cols=MFEAT_TOTAL_COLS, groups=tuple(groups), names=tuple(names)
    )


def even_preset(total_cols: int, partitions: int) -> PartitionSpec:
    """Near-even contiguous split of `total_cols` columns across sites."""
    if partitions < 1 or partitions > total_cols:
        raise SpecMismatch(
            f"cannot split {total_cols} columns across {partitions} sites"
        )
    bounds = np.linspace(0, total_cols, partitions + 1).astype(int)
    groups = tuple(
        tuple(range(int(bounds[i]), int(bounds[i + 1]))) for i in range(partitions)
    )
    return PartitionSpec(total_cols=total_cols, groups=groups)


def synthetic_table(rows: int, cols: int, seed: int = 0) -> DenseMatrix:
    """Deterministic stand-in dataset with non-trivial column scales.

    Gaussian noise with per-column scale and shift, so covariance matrices
    computed from it have distinct, non-degenerate entries.
    """
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((rows, cols))
    scale = 1.0 + (np.arange(cols, dtype=np.float64) % 7.0)
    shift = (np.arange(cols, dtype=np.float64) % 11.0) - 5.0
    data = np.ascontiguousarray(data * scale + shift)
    return DenseMatrix._wrap(data)


def load_mfeat(root: str | Path) -> DenseMatrix:
    """Load and join the six real feature files from a directory.

    Expects the canonical filenames (mfeat-fac, mfeat-fou, mfeat-kar,
    mfeat-mor, mfeat-pix, mfeat-zer) as distributed by the UCI repository.

    Raises:
        IoError: a file is missing or unreadable.
        SpecMismatch: a file has an unexpected column count.
    """
    rootp = Path(root)
    tables = []
    for name, fname, width in MFEAT_FILES:
        t = load_table(rootp / fname, format="whitespace")
        if t.cols != width:
            raise SpecMismatch(
                f"{fname}: expected {width} columns ({name}), found {t.cols}"
            )
        tables.append(t)
    return hjoin(tables)
