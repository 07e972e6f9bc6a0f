"""Exact covariance of vertically partitioned data.

Each site holds every row but only a slice of the columns. Sites compute
their own covariance blocks, exchange raw columns along a ring predecessor
schedule so that every pair of sites meets exactly once, and a coordinator
merges the blocks into the full matrix — bit-identical to computing it on
the unpartitioned data — then extracts its eigen-components.
"""

from .costmodel import CostReport, centralized_cost, distributed_cost, speedup_lower_bound
from .covariance import (
    ColumnBlock,
    CovBlock,
    GlobalCovariance,
    centralized_covariance,
    covariance_pair,
    cross_covariance,
    local_covariance,
    merge_blocks,
)
from .eigen import EigenDecomposition, symmetric_eigen
from .errors import DistCovError
from .ingest import (
    PartitionSpec,
    hjoin,
    load_mfeat,
    load_table,
    mfeat_preset,
    partition_vertical,
    synthetic_table,
)
from .matrix import DenseMatrix, column_mean, column_slice, new_matrix
from .report import compare_partitions, dump_matrix, load_matrix_dump, matrix_checksum
from .runtime import (
    RunMetrics,
    TransferStat,
    critical_path_ms,
    run_centralized,
    run_distributed,
)
from .schedule import CoverageReport, Schedule, build_schedule, predecessor, validate_schedule
from .wire import MessageKind, ProtocolMessage, decode_message, encode_message

__version__ = "0.1.0"

__all__ = [
    "DenseMatrix",
    "new_matrix",
    "column_mean",
    "column_slice",
    "ColumnBlock",
    "CovBlock",
    "GlobalCovariance",
    "covariance_pair",
    "local_covariance",
    "cross_covariance",
    "centralized_covariance",
    "merge_blocks",
    "EigenDecomposition",
    "symmetric_eigen",
    "Schedule",
    "CoverageReport",
    "predecessor",
    "build_schedule",
    "validate_schedule",
    "PartitionSpec",
    "load_table",
    "hjoin",
    "partition_vertical",
    "mfeat_preset",
    "synthetic_table",
    "load_mfeat",
    "CostReport",
    "centralized_cost",
    "distributed_cost",
    "speedup_lower_bound",
    "MessageKind",
    "ProtocolMessage",
    "encode_message",
    "decode_message",
    "RunMetrics",
    "TransferStat",
    "run_distributed",
    "run_centralized",
    "critical_path_ms",
    "matrix_checksum",
    "dump_matrix",
    "load_matrix_dump",
    "compare_partitions",
    "DistCovError",
    "__version__",
]
