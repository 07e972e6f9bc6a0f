"""Machine-readable run reports, matrix dumps, and the dual-mode comparison.

A report never carries the full matrix — at benchmark scale that is 649x649
values — so equality is asserted via a checksum over the canonical byte
encoding, and `dump_matrix` exists for anyone who wants the actual numbers.
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from .costmodel import distributed_cost
from .covariance import GlobalCovariance
from .eigen import EigenDecomposition
from .errors import DimensionMismatch, IoError, MalformedFrame, MismatchError
from .matrix import DenseMatrix
from .runtime import RunMetrics, critical_path_ms, run_centralized, run_distributed
from .schedule import Schedule, build_schedule

__all__ = [
    "REPORT_VERSION",
    "matrix_checksum",
    "dump_matrix",
    "load_matrix_dump",
    "run_report",
    "compare_partitions",
    "DUMP_MAGIC",
]

REPORT_VERSION = 1
DUMP_MAGIC = b"DCMM"
_DUMP_HEADER = struct.Struct("<4sIQ")  # magic, dim, reserved


def matrix_checksum(m: DenseMatrix) -> str:
    """SHA-256 over the row-major binary64 little-endian matrix bytes."""
    return hashlib.sha256(m.tobytes()).hexdigest()


def dump_matrix(cov: GlobalCovariance, path: str | Path) -> None:
    """Write the full matrix: 16-byte header (magic, u32 dim, u64 reserved)
    followed by dim^2 binary64 little-endian values, row-major."""
    p = Path(path)
    try:
        with open(p, "wb") as fh:
            fh.write(_DUMP_HEADER.pack(DUMP_MAGIC, cov.dim, 0))
            fh.write(cov.matrix.tobytes())
    except OSError as exc:
        raise IoError(f"cannot write {p}: {exc}") from None


def load_matrix_dump(path: str | Path) -> DenseMatrix:
    """Read a matrix dump back, bit-exactly."""
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {p}: {exc}") from None
    if len(raw) < _DUMP_HEADER.size:
        raise MalformedFrame(f"{p}: shorter than the dump header")
    magic, dim, _ = _DUMP_HEADER.unpack_from(raw)
    if magic != DUMP_MAGIC:
        raise MalformedFrame(f"{p}: bad magic {magic!r}")
    body = raw[_DUMP_HEADER.size :]
    if len(body) != dim * dim * 8:
        raise MalformedFrame(
            f"{p}: dim {dim} needs {dim * dim * 8} value bytes, found {len(body)}"
        )
    values = np.frombuffer(body, dtype="<f8").astype(np.float64).reshape(dim, dim)
    return DenseMatrix(values)


def run_report(
    mode: str,
    partitions: int,
    cov: GlobalCovariance,
    decomp: EigenDecomposition,
    metrics: RunMetrics,
    schedule: Schedule | None = None,
) -> dict:
    """The stable JSON document for one run."""
    doc = {
        "report_version": REPORT_VERSION,
        "mode": mode,
        "partitions": partitions,
        "dim": cov.dim,
        "matrix_checksum": matrix_checksum(cov.matrix),
        "top_eigenvalues": list(decomp.eigenvalues[:10]),
        "metrics": metrics.to_dict(),
        "schedule": None
        if schedule is None
        else {"t": schedule.t, "r": schedule.r,
              "predecessors": [list(p) for p in schedule.predecessors]},
    }
    return doc


def compare_partitions(
    blocks,
    transport: str = "in-process",
    deadline_ms: float | None = None,
    _corrupt: bool = False,
) -> dict:
    """Run both modes on one partitioning and assert bit-exact equality.

    Returns one comparison row. `_corrupt` is a test hook that perturbs the
    distributed matrix before the equality check; it exists so the mismatch
    path stays exercised.

    Raises:
        MismatchError: the two matrices differ (never expected in real use).
    """
    t = len(blocks)
    schedule = build_schedule(t)
    dist_cov, dist_eig, dist_metrics = run_distributed(
        blocks, schedule, transport=transport, deadline_ms=deadline_ms
    )
    cen_cov, cen_eig, cen_metrics = run_centralized(blocks)

    dist_bytes = dist_cov.matrix.tobytes()
    if _corrupt:
        tampered = np.array(dist_cov.matrix.values)
        tampered[0, 0] += 1.0
        dist_bytes = DenseMatrix(tampered).tobytes()

    if dist_cov.dim != cen_cov.dim:
        raise DimensionMismatch(
            f"distributed dim {dist_cov.dim} vs centralized {cen_cov.dim}"
        )
    equal = dist_bytes == cen_cov.matrix.tobytes()
    if not equal:
        raise MismatchError(
            f"distributed and centralized matrices differ (t={t}, "
            f"distributed {hashlib.sha256(dist_bytes).hexdigest()[:16]}…, "
            f"centralized {matrix_checksum(cen_cov.matrix)[:16]}…)"
        )

    widths = [b.data.cols for b in sorted(blocks, key=lambda b: b.site)]
    # CPU reading on both sides: the centralized run is single-threaded, the
    # distributed aggregate assumes one processor per site.
    centralized_ms = cen_metrics.local_cov_cpu_ms[0]
    distributed_ms = critical_path_ms(dist_metrics, schedule)
    return {
        "partitions": t,
        "equal": True,
        "matrix_checksum": matrix_checksum(cen_cov.matrix),
        "top_eigenvalues": list(cen_eig.eigenvalues[:10]),
        "centralized_ms": centralized_ms,
        "distributed_ms": distributed_ms,
        "measured_speedup": (centralized_ms / distributed_ms) if distributed_ms > 0 else None,
        "cost_model": distributed_cost(widths, schedule).to_dict(),
        "distributed_metrics": dist_metrics.to_dict(),
        "centralized_metrics": cen_metrics.to_dict(),
        "distributed_eigen_top": list(dist_eig.eigenvalues[:3]),
    }
