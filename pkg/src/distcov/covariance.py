"""Covariance kernels and the block algebra that assembles the global matrix.

Every entry of every block, local or cross, centralized or merged, funnels
through one kernel: center the two columns on their means, multiply, reduce
with a unit-stride dot product, divide by n-1. Because the kernel sees the
same contiguous column values on every path, a merged matrix is bit-identical
to the matrix a single-machine computation produces. That exactness is the
whole point, so nothing here is allowed to reorder a reduction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidCovariance,
    LengthMismatch,
    MissingPair,
    OverlappingPair,
    RowCountMismatch,
    SameSite,
    TooFewRows,
)
from .matrix import DenseMatrix, vector_mean

__all__ = [
    "ColumnBlock",
    "CovBlock",
    "GlobalCovariance",
    "covariance_pair",
    "local_covariance",
    "cross_covariance",
    "centralized_covariance",
    "merge_blocks",
]


@dataclass(frozen=True)
class ColumnBlock:
    """One site's vertical slice of the dataset: all rows, a subset of columns.

    ``global_cols[u]`` is the position of local column ``u`` in the full
    (unpartitioned) matrix.
    """

    site: int
    data: DenseMatrix
    global_cols: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "global_cols", tuple(int(c) for c in self.global_cols))
        if self.site < 0:
            raise DimensionMismatch(f"site id must be non-negative, got {self.site}")
        if self.data.cols < 1:
            raise DimensionMismatch("a column block must hold at least one column")
        if len(self.global_cols) != self.data.cols:
            raise DimensionMismatch(
                f"{len(self.global_cols)} global indices for {self.data.cols} columns"
            )
        if any(b <= a for a, b in zip(self.global_cols, self.global_cols[1:])):
            raise DimensionMismatch("global column indices must be strictly increasing")
        if self.global_cols and self.global_cols[0] < 0:
            raise DimensionMismatch("global column indices must be non-negative")

    @property
    def width(self) -> int:
        return self.data.cols


@dataclass(frozen=True)
class CovBlock:
    """A covariance sub-matrix between the columns of two sites.

    Entry (u, v) is the covariance of global column ``rows_global_cols[u]``
    with global column ``cols_global_cols[v]``. A block with
    ``site_a == site_b`` is a site's local covariance and must be square and
    bit-symmetric.
    """

    site_a: int
    site_b: int
    block: DenseMatrix
    rows_global_cols: tuple[int, ...]
    cols_global_cols: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows_global_cols", tuple(int(c) for c in self.rows_global_cols))
        object.__setattr__(self, "cols_global_cols", tuple(int(c) for c in self.cols_global_cols))
        if self.block.rows != len(self.rows_global_cols):
            raise DimensionMismatch(
                f"block has {self.block.rows} rows but {len(self.rows_global_cols)} row indices"
            )
        if self.block.cols != len(self.cols_global_cols):
            raise DimensionMismatch(
                f"block has {self.block.cols} cols but {len(self.cols_global_cols)} col indices"
            )
        if self.site_a == self.site_b:
            v = self.block.values
            if v.shape[0] != v.shape[1]:
                raise DimensionMismatch("a local covariance block must be square")
            if not np.array_equal(v, v.T):
                raise InvalidCovariance("a local covariance block must be exactly symmetric")


class GlobalCovariance:
    """The full m x m covariance matrix, exactly symmetric by construction.

    Each unordered pair is stored once (the upper triangle) and mirrored, so
    entry (i, j) bit-equals entry (j, i). Diagonal entries are variances and
    must be non-negative.
    """

    __slots__ = ("_matrix",)

    def __init__(self, values, labels: Sequence[str] | None = None):
        arr = np.array(values, dtype=np.float64, order="C")
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatch(f"covariance matrix must be square, got {arr.shape}")
        if arr.shape[0] < 1:
            raise DimensionMismatch("covariance matrix must have dimension >= 1")
        sym = np.triu(arr) + np.triu(arr, 1).T
        if np.any(np.diag(sym) < 0.0):
            raise InvalidCovariance("diagonal entries (variances) must be non-negative")
        self._matrix = DenseMatrix(sym, labels)

    @property
    def dim(self) -> int:
        return self._matrix.rows

    @property
    def matrix(self) -> DenseMatrix:
        return self._matrix

    @property
    def labels(self) -> tuple[str, ...] | None:
        return self._matrix.labels

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GlobalCovariance):
            return NotImplemented
        return self._matrix == other._matrix

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"GlobalCovariance(dim={self.dim})"


def covariance_pair(x, y, mean_x: float, mean_y: float) -> float:
    """Sample covariance of two columns given their means.

    Centered products are reduced by a unit-stride dot product over the rows
    and divided by n-1. This exact sequence of operations is what every block
    computation replays, entry for entry.

    Raises:
        LengthMismatch: if the columns differ in length.
        TooFewRows: if fewer than two rows (the denominator would be zero).
    """
    xa = np.ascontiguousarray(x, dtype=np.float64)
    ya = np.ascontiguousarray(y, dtype=np.float64)
    if xa.ndim != 1 or ya.ndim != 1:
        raise LengthMismatch("covariance_pair expects 1-D columns")
    if xa.shape[0] != ya.shape[0]:
        raise LengthMismatch(f"column lengths differ: {xa.shape[0]} vs {ya.shape[0]}")
    n = xa.shape[0]
    if n < 2:
        raise TooFewRows("sample covariance needs at least 2 rows")
    return float(np.dot(xa - mean_x, ya - mean_y)) / (n - 1)


def _centered_columns(data: DenseMatrix) -> np.ndarray:
    """Stack of centered columns, one contiguous row per column.

    Row u of the result is column u minus its mean. The transposed layout
    keeps each column unit-stride for the dot-product kernel; a strided
    reduction would not be bit-comparable with `covariance_pair`.
    """
    rows, cols = data.rows, data.cols
    out = np.empty((cols, rows), dtype=np.float64)
    for j in range(cols):
        col = data.column(j)
        out[j] = col - vector_mean(col)
    return out


def _pair_dot(cx: np.ndarray, cy: np.ndarray, n: int) -> float:
    # Same reduction as covariance_pair, on pre-centered contiguous columns.
    return float(np.dot(cx, cy)) / (n - 1)


def local_covariance(b: ColumnBlock) -> CovBlock:
    """Covariance block of one site's own columns.

    Only the upper triangle is computed; the lower is mirrored, so the block
    is exactly symmetric.
    """
    n = b.data.rows
    if n < 2:
        raise TooFewRows("sample covariance needs at least 2 rows")
    centered = _centered_columns(b.data)
    m = b.data.cols
    block = np.empty((m, m), dtype=np.float64)
    for p in range(m):
        for q in range(p, m):
            block[p, q] = _pair_dot(centered[p], centered[q], n)
    iu, ju = np.triu_indices(m, 1)
    block[ju, iu] = block[iu, ju]
    return CovBlock(
        site_a=b.site,
        site_b=b.site,
        block=DenseMatrix._wrap(block, b.data.labels),
        rows_global_cols=b.global_cols,
        cols_global_cols=b.global_cols,
    )


def cross_covariance(receiver: ColumnBlock, sender: ColumnBlock) -> CovBlock:
    """Cross-covariance block between a sender's and a receiver's columns.

    Computed at the receiver after the sender's raw columns arrive; entry
    (u, v) pairs sender column u with receiver column v. The receiver
    recomputes the sender's means from the raw data, which the two-pass
    kernel makes identical to sender-side means.
    """
    if receiver.site == sender.site:
        raise SameSite(f"cross covariance needs two distinct sites, both are {receiver.site}")
    n = receiver.data.rows
    if n != sender.data.rows:
        raise RowCountMismatch(
            f"row counts differ: sender {sender.data.rows}, receiver {receiver.data.rows}"
        )
    if n < 2:
        raise TooFewRows("sample covariance needs at least 2 rows")
    cs = _centered_columns(sender.data)
    cr = _centered_columns(receiver.data)
    block = np.empty((sender.data.cols, receiver.data.cols), dtype=np.float64)
    for u in range(sender.data.cols):
        for v in range(receiver.data.cols):
            block[u, v] = _pair_dot(cs[u], cr[v], n)
    return CovBlock(
        site_a=sender.site,
        site_b=receiver.site,
        block=DenseMatrix._wrap(block),
        rows_global_cols=sender.global_cols,
        cols_global_cols=receiver.global_cols,
    )


def centralized_covariance(m: DenseMatrix) -> GlobalCovariance:
    """Full covariance matrix computed directly on the unpartitioned data.

    This is the oracle every distributed result is checked against: same
    kernel, same column order, upper triangle mirrored.
    """
    n = m.rows
    if n < 2:
        raise TooFewRows("sample covariance needs at least 2 rows")
    if m.cols < 1:
        raise DimensionMismatch("covariance needs at least one column")
    centered = _centered_columns(m)
    dim = m.cols
    out = np.empty((dim, dim), dtype=np.float64)
    for p in range(dim):
        for q in range(p, dim):
            out[p, q] = _pair_dot(centered[p], centered[q], n)
    iu, ju = np.triu_indices(dim, 1)
    out[ju, iu] = out[iu, ju]
    return GlobalCovariance(out, m.labels)


def merge_blocks(
    local_blocks: Sequence[CovBlock],
    cross_blocks: Sequence[CovBlock],
    total_cols: int,
) -> GlobalCovariance:
    """Assemble the global covariance matrix from local and cross blocks.

    Coverage is validated before any entry is written: every unordered pair
    of global columns must be covered exactly once, with every column owned
    by exactly one local block. A partial merge would silently produce a
    wrong matrix, so gaps and overlaps are hard errors.

    Raises:
        MissingPair: some column pair is not covered.
        OverlappingPair: some column pair is covered twice.
        DimensionMismatch: a block references columns outside the matrix.
    """
    if total_cols < 1:
        raise DimensionMismatch("total_cols must be >= 1")

    for blk in local_blocks:
        if blk.site_a != blk.site_b:
            raise DimensionMismatch(
                f"cross block ({blk.site_a},{blk.site_b}) passed as a local block"
            )
    for blk in cross_blocks:
        if blk.site_a == blk.site_b:
            raise DimensionMismatch(f"local block of site {blk.site_a} passed as a cross block")

    all_blocks = list(local_blocks) + list(cross_blocks)
    for blk in all_blocks:
        for c in (*blk.rows_global_cols, *blk.cols_global_cols):
            if not 0 <= c < total_cols:
                raise DimensionMismatch(
                    f"block ({blk.site_a},{blk.site_b}) references column {c}, "
                    f"matrix has {total_cols}"
                )

    # Count coverage of ordered cells; exact symmetry of the count matrix
    # makes "each unordered pair exactly once" the same as "every cell == 1".
    count = np.zeros((total_cols, total_cols), dtype=np.int32)
    for blk in local_blocks:
        g = list(blk.rows_global_cols)
        count[np.ix_(g, g)] += 1
    for blk in cross_blocks:
        rg = list(blk.rows_global_cols)
        cg = list(blk.cols_global_cols)
        count[np.ix_(rg, cg)] += 1
        count[np.ix_(cg, rg)] += 1

    over = np.argwhere(count > 1)
    if over.size:
        i, j = over[0]
        raise OverlappingPair(f"column pair ({i},{j}) covered more than once")
    gaps = np.argwhere(count == 0)
    if gaps.size:
        i, j = gaps[0]
        raise MissingPair(f"column pair ({i},{j}) not covered by any block")

    out = np.empty((total_cols, total_cols), dtype=np.float64)
    for blk in local_blocks:
        g = list(blk.rows_global_cols)
        out[np.ix_(g, g)] = blk.block.values
    for blk in cross_blocks:
        rg = list(blk.rows_global_cols)
        cg = list(blk.cols_global_cols)
        out[np.ix_(rg, cg)] = blk.block.values
        out[np.ix_(cg, rg)] = blk.block.values.T

    labels = _merged_labels(local_blocks, total_cols)
    return GlobalCovariance(out, labels)


def _merged_labels(
    local_blocks: Sequence[CovBlock], total_cols: int
) -> tuple[str, ...] | None:
    # Labels survive the merge only if every local block carries them.
    slots: list[str | None] = [None] * total_cols
    for blk in local_blocks:
        names = blk.block.labels
        if names is None:
            return None
        for pos, name in zip(blk.rows_global_cols, names):
            slots[pos] = name
    if any(s is None for s in slots):
        return None
    return tuple(slots)  # type: ignore[arg-type]
