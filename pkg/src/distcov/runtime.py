"""Protocol runtime: per-site workers, a coordinator, and two transports.

One worker thread per site computes the site's local covariance block, ships
its raw columns to every site that lists it as a predecessor, computes a
cross block for each predecessor's columns as they arrive, and sends every
block to the coordinator (reserved endpoint id = t). The coordinator gathers
t local + C(t,2) cross blocks, merges them, and runs the eigen-decomposition.

Both transports move the same encoded frames, so byte counts are real and
the merged matrix is bit-identical either way: in-process uses one FIFO
queue per endpoint, TCP uses loopback sockets with one connection per
directed edge.
"""

from __future__ import annotations

import os
import queue
import socket
import struct
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .covariance import (
    ColumnBlock,
    CovBlock,
    GlobalCovariance,
    centralized_covariance,
    cross_covariance,
    local_covariance,
    merge_blocks,
)
from .eigen import EigenDecomposition, symmetric_eigen
from .errors import (
    DimensionMismatch,
    DistCovError,
    RowCountMismatch,
    TimeoutError,
    TooFewRows,
    TransportError,
)
from .matrix import DenseMatrix
from .schedule import Schedule
from .wire import HEADER, MessageKind, ProtocolMessage, decode_message, encode_message

__all__ = [
    "TransferStat",
    "RunMetrics",
    "InProcessTransport",
    "TcpTransport",
    "run_distributed",
    "run_centralized",
    "critical_path_ms",
    "DEFAULT_DEADLINE_MS",
]

DEFAULT_DEADLINE_MS = 60_000.0
_POLL_S = 0.025  # error-sink polling granularity while gathering


def _deadline_ms(override: float | None) -> float:
    if override is not None:
        return float(override)
    env = os.environ.get("DCM_DEADLINE_MS")
    if env:
        return float(env)
    return DEFAULT_DEADLINE_MS


@dataclass(frozen=True)
class TransferStat:
    """One raw-data shipment: encoded frame size and send wall time."""

    bytes: int
    ms: float


@dataclass(frozen=True)
class RunMetrics:
    """Timing breakdown of one run, all values in milliseconds.

    Per-site phases carry two readings: wall time (`*_ms`) and per-thread
    CPU time (`*_cpu_ms`). On a host with fewer cores than sites the worker
    threads time-slice, so each site's wall reading is inflated by its
    neighbours; the CPU reading is what the site would spend on a processor
    of its own. `transfers` is keyed by directed edge (sender, receiver) and
    covers raw column shipments only.
    """

    local_cov_ms: tuple[float, ...]
    cross_cov_ms: tuple[float, ...]
    local_cov_cpu_ms: tuple[float, ...] = ()
    cross_cov_cpu_ms: tuple[float, ...] = ()
    transfers: dict[tuple[int, int], TransferStat] = field(default_factory=dict)
    merge_ms: float = 0.0
    eigen_ms: float = 0.0
    protocol_ms: float = 0.0
    total_ms: float = 0.0

    def to_dict(self) -> dict:
        return {
            "local_cov_ms": list(self.local_cov_ms),
            "cross_cov_ms": list(self.cross_cov_ms),
            "local_cov_cpu_ms": list(self.local_cov_cpu_ms),
            "cross_cov_cpu_ms": list(self.cross_cov_cpu_ms),
            "transfers": [
                {"from": j, "to": k, "bytes": s.bytes, "ms": s.ms}
                for (j, k), s in sorted(self.transfers.items())
            ],
            "merge_ms": self.merge_ms,
            "eigen_ms": self.eigen_ms,
            "protocol_ms": self.protocol_ms,
            "total_ms": self.total_ms,
        }


def critical_path_ms(metrics: RunMetrics, schedule: Schedule) -> float:
    """Distributed time with one processor per site, derived from the
    measured per-site phases.

    Sites compute local blocks concurrently, then work through received
    blocks concurrently, so the protocol takes the slowest local phase plus
    the slowest cross phase (cross compute + inbound transfer cost). Phase
    costs are the per-thread CPU readings, which stay honest when the host
    has fewer cores than sites and the wall clocks overlap.
    """
    local = metrics.local_cov_cpu_ms or metrics.local_cov_ms
    cross = metrics.cross_cov_cpu_ms or metrics.cross_cov_ms
    slowest_local = max(local, default=0.0)
    slowest_cross = 0.0
    for k in range(schedule.t):
        inbound = sum(
            metrics.transfers[(j, k)].ms
            for j in schedule.predecessors[k]
            if (j, k) in metrics.transfers
        )
        slowest_cross = max(slowest_cross, cross[k] + inbound)
    return slowest_local + slowest_cross


class InProcessTransport:
    """FIFO queue per endpoint; frames are encoded/decoded exactly as on TCP."""

    def __init__(self, endpoints, log: list | None = None):
        self._queues: dict[int, queue.Queue] = {e: queue.Queue() for e in endpoints}
        self._log = log
        self._log_lock = threading.Lock()

    def send(self, msg: ProtocolMessage) -> TransferStat:
        t0 = time.perf_counter()
        frame = encode_message(msg)
        try:
            self._queues[msg.receiver].put(frame)
        except KeyError:
            raise TransportError(f"no endpoint {msg.receiver}") from None
        ms = (time.perf_counter() - t0) * 1e3
        if self._log is not None:
            with self._log_lock:
                self._log.append((msg.kind, msg.sender, msg.receiver, len(frame)))
        return TransferStat(bytes=len(frame), ms=ms)

    def recv(self, endpoint: int, timeout_s: float) -> ProtocolMessage:
        try:
            frame = self._queues[endpoint].get(timeout=max(timeout_s, 0.0))
        except queue.Empty:
            raise TimeoutError(
                f"endpoint {endpoint}: no message within {timeout_s:.3f}s"
            ) from None
        return decode_message(frame)

    def close(self) -> None:
        pass


class TcpTransport:
    """Loopback sockets: one listener per endpoint, one connection per
    directed edge, reader threads draining frames into per-endpoint inboxes.

    Readers never block senders — every complete frame is parked in an
    unbounded inbox queue, so the protocol cannot deadlock on socket
    buffers.
    """

    def __init__(self, endpoints, log: list | None = None):
        self._inbox: dict[int, queue.Queue] = {e: queue.Queue() for e in endpoints}
        self._log = log
        self._log_lock = threading.Lock()
        self._conn_lock = threading.Lock()
        self._conns: dict[tuple[int, int], socket.socket] = {}
        self._listeners: dict[int, socket.socket] = {}
        self._ports: dict[int, int] = {}
        self._threads: list[threading.Thread] = []
        self._closing = False
        for e in endpoints:
            srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            srv.bind(("127.0.0.1", 0))
            srv.listen()
            self._listeners[e] = srv
            self._ports[e] = srv.getsockname()[1]
            th = threading.Thread(
                target=self._accept_loop, args=(e, srv), daemon=True
            )
            th.start()
            self._threads.append(th)

    def _accept_loop(self, endpoint: int, srv: socket.socket) -> None:
        while True:
            try:
                conn, _ = srv.accept()
            except OSError:
                return  # listener closed
            th = threading.Thread(
                target=self._read_loop, args=(endpoint, conn), daemon=True
            )
            th.start()
            self._threads.append(th)

    def _read_loop(self, endpoint: int, conn: socket.socket) -> None:
        # Length field sits after magic(4) + kind(1) + sender(4) + receiver(4).
        try:
            while True:
                header = self._read_exact(conn, HEADER.size)
                if header is None:
                    return
                (length,) = struct.unpack_from("<Q", header, 13)
                payload = self._read_exact(conn, length) if length else b""
                if length and payload is None:
                    return
                self._inbox[endpoint].put(header + (payload or b""))
        finally:
            conn.close()

    @staticmethod
    def _read_exact(conn: socket.socket, n: int) -> bytes | None:
        buf = bytearray()
        while len(buf) < n:
            chunk = conn.recv(n - len(buf))
            if not chunk:
                return None  # peer closed
            buf.extend(chunk)
        return bytes(buf)

    def _connection(self, sender: int, receiver: int) -> socket.socket:
        key = (sender, receiver)
        with self._conn_lock:
            sock = self._conns.get(key)
            if sock is None:
                if receiver not in self._ports:
                    raise TransportError(f"no endpoint {receiver}")
                sock = socket.create_connection(("127.0.0.1", self._ports[receiver]))
                sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
                self._conns[key] = sock
        return sock

    def send(self, msg: ProtocolMessage) -> TransferStat:
        t0 = time.perf_counter()
        frame = encode_message(msg)
        sock = self._connection(msg.sender, msg.receiver)
        try:
            sock.sendall(frame)
        except OSError as exc:
            raise TransportError(
                f"send {msg.sender}->{msg.receiver} failed: {exc}"
            ) from None
        ms = (time.perf_counter() - t0) * 1e3
        if self._log is not None:
            with self._log_lock:
                self._log.append((msg.kind, msg.sender, msg.receiver, len(frame)))
        return TransferStat(bytes=len(frame), ms=ms)

    def recv(self, endpoint: int, timeout_s: float) -> ProtocolMessage:
        try:
            frame = self._inbox[endpoint].get(timeout=max(timeout_s, 0.0))
        except queue.Empty:
            raise TimeoutError(
                f"endpoint {endpoint}: no message within {timeout_s:.3f}s"
            ) from None
        return decode_message(frame)

    def close(self) -> None:
        self._closing = True
        for srv in self._listeners.values():
            srv.close()
        with self._conn_lock:
            for sock in self._conns.values():
                sock.close()
            self._conns.clear()


class _Draft:
    """Mutable metrics scratchpad shared by the worker threads.

    Each site writes only its own slots; the transfers dict takes one write
    per directed edge, guarded by a lock.
    """

    def __init__(self, t: int):
        self.local_ms = [0.0] * t
        self.cross_ms = [0.0] * t
        self.local_cpu_ms = [0.0] * t
        self.cross_cpu_ms = [0.0] * t
        self.transfers: dict[tuple[int, int], TransferStat] = {}
        self._lock = threading.Lock()

    def add_transfer(self, edge: tuple[int, int], stat: TransferStat) -> None:
        with self._lock:
            self.transfers[edge] = stat


def _site_worker(
    site: int,
    block: ColumnBlock,
    schedule: Schedule,
    transport,
    coordinator: int,
    draft: _Draft,
    errors: list,
    errors_lock: threading.Lock,
    deadline: float,
) -> None:
    try:
        t0, c0 = time.perf_counter(), time.thread_time()
        local = local_covariance(block)
        draft.local_ms[site] = (time.perf_counter() - t0) * 1e3
        draft.local_cpu_ms[site] = (time.thread_time() - c0) * 1e3
        transport.send(
            ProtocolMessage(MessageKind.COV_BLOCK, site, coordinator, local)
        )

        for receiver in schedule.receivers_from(site):
            stat = transport.send(
                ProtocolMessage(MessageKind.DATA_BLOCK, site, receiver, block)
            )
            draft.add_transfer((site, receiver), stat)

        pending = set(schedule.senders_to(site))
        cross_ms = 0.0
        cross_cpu_ms = 0.0
        while pending:
            msg = transport.recv(site, deadline - time.perf_counter())
            if msg.kind is not MessageKind.DATA_BLOCK:
                raise TransportError(
                    f"site {site} received unexpected {msg.kind.name} from {msg.sender}"
                )
            received = msg.payload
            assert isinstance(received, ColumnBlock)
            if received.site not in pending:
                raise TransportError(
                    f"site {site} received data from non-predecessor {received.site}"
                )
            pending.discard(received.site)
            t0, c0 = time.perf_counter(), time.thread_time()
            cross = cross_covariance(receiver=block, sender=received)
            cross_ms += (time.perf_counter() - t0) * 1e3
            cross_cpu_ms += (time.thread_time() - c0) * 1e3
            transport.send(
                ProtocolMessage(MessageKind.COV_BLOCK, site, coordinator, cross)
            )
        draft.cross_ms[site] = cross_ms
        draft.cross_cpu_ms[site] = cross_cpu_ms
        transport.send(ProtocolMessage(MessageKind.DONE, site, coordinator))
    except BaseException as exc:  # surfaced by the coordinator's poll loop
        with errors_lock:
            errors.append((site, exc))


def _check_blocks(blocks) -> tuple[int, int]:
    """Validate the common preconditions; returns (row count, total columns)."""
    if not blocks:
        raise DimensionMismatch("need at least one column block")
    sites = sorted(b.site for b in blocks)
    if sites != list(range(len(blocks))):
        raise DimensionMismatch(f"block sites must be 0..{len(blocks) - 1}, got {sites}")
    by_site = sorted(blocks, key=lambda b: b.site)
    rows = by_site[0].data.rows
    for b in by_site:
        if b.data.rows != rows:
            raise RowCountMismatch(
                f"site {b.site} has {b.data.rows} rows, site {by_site[0].site} has {rows}"
            )
    if rows < 2:
        raise TooFewRows("sample covariance needs at least 2 rows")
    total = max(c for b in blocks for c in b.global_cols) + 1
    return rows, total


def run_distributed(
    blocks,
    schedule: Schedule,
    transport: str = "in-process",
    deadline_ms: float | None = None,
    message_log: list | None = None,
) -> tuple[GlobalCovariance, EigenDecomposition, RunMetrics]:
    """Execute the full exchange protocol and return the merged result.

    `transport` is "in-process" or "tcp". Raises TimeoutError when a block
    fails to arrive within the deadline (DCM_DEADLINE_MS or 60 s), and
    propagates the first worker error otherwise.
    """
    blocks = sorted(blocks, key=lambda b: b.site)
    _, total_cols = _check_blocks(blocks)
    t = len(blocks)
    if schedule.t != t:
        raise DimensionMismatch(f"schedule is for {schedule.t} sites, got {t} blocks")
    coordinator = t  # reserved endpoint id
    endpoints = list(range(t)) + [coordinator]

    if transport == "in-process":
        net = InProcessTransport(endpoints, log=message_log)
    elif transport == "tcp":
        net = TcpTransport(endpoints, log=message_log)
    else:
        raise TransportError(f"unknown transport {transport!r}")

    deadline_s = _deadline_ms(deadline_ms) / 1e3
    start = time.perf_counter()
    deadline = start + deadline_s
    draft = _Draft(t)
    errors: list[tuple[int, BaseException]] = []
    errors_lock = threading.Lock()

    workers = [
        threading.Thread(
            target=_site_worker,
            args=(b.site, b, schedule, net, coordinator, draft, errors, errors_lock, deadline),
            daemon=True,
        )
        for b in blocks
    ]
    try:
        for w in workers:
            w.start()

        expected_blocks = t + t * (t - 1) // 2
        local_blocks: list[CovBlock] = []
        cross_blocks: list[CovBlock] = []
        done = 0
        while len(local_blocks) + len(cross_blocks) < expected_blocks or done < t:
            with errors_lock:
                if errors:
                    raise _first_error(errors)
            remaining = deadline - time.perf_counter()
            if remaining <= 0:
                raise TimeoutError(
                    f"coordinator: {len(local_blocks) + len(cross_blocks)}/"
                    f"{expected_blocks} blocks and {done}/{t} completions "
                    f"within {deadline_s:.3f}s"
                )
            try:
                msg = net.recv(coordinator, min(remaining, _POLL_S))
            except TimeoutError:
                continue  # poll slice elapsed; re-check errors and deadline
            if msg.kind is MessageKind.DONE:
                done += 1
            elif msg.kind is MessageKind.COV_BLOCK:
                blk = msg.payload
                assert isinstance(blk, CovBlock)
                (local_blocks if blk.site_a == blk.site_b else cross_blocks).append(blk)
            else:
                raise TransportError(
                    f"coordinator received unexpected {msg.kind.name} from {msg.sender}"
                )

        t0 = time.perf_counter()
        merged = merge_blocks(local_blocks, cross_blocks, total_cols)
        t1 = time.perf_counter()
        protocol_ms = (t1 - start) * 1e3
        merge_ms = (t1 - t0) * 1e3
        decomp = symmetric_eigen(merged)
        t2 = time.perf_counter()

        metrics = RunMetrics(
            local_cov_ms=tuple(draft.local_ms),
            cross_cov_ms=tuple(draft.cross_ms),
            local_cov_cpu_ms=tuple(draft.local_cpu_ms),
            cross_cov_cpu_ms=tuple(draft.cross_cpu_ms),
            transfers=dict(draft.transfers),
            merge_ms=merge_ms,
            eigen_ms=(t2 - t1) * 1e3,
            protocol_ms=protocol_ms,
            total_ms=(t2 - start) * 1e3,
        )
        return merged, decomp, metrics
    finally:
        net.close()
        for w in workers:
            w.join(timeout=1.0)


def _first_error(errors: list[tuple[int, BaseException]]) -> BaseException:
    site, exc = errors[0]
    if isinstance(exc, DistCovError):
        return exc
    return TransportError(f"site {site} worker failed: {exc!r}")


def run_centralized(
    blocks,
) -> tuple[GlobalCovariance, EigenDecomposition, RunMetrics]:
    """Single-machine oracle: reassemble the full table, then compute.

    The reassembled matrix places every block's columns at their global
    positions, so the result is comparable entry-for-entry with the
    distributed output.
    """
    blocks = sorted(blocks, key=lambda b: b.site)
    rows, total_cols = _check_blocks(blocks)

    seen: set[int] = set()
    for b in blocks:
        overlap = seen.intersection(b.global_cols)
        if overlap:
            raise DimensionMismatch(f"column {min(overlap)} held by two sites")
        seen.update(b.global_cols)
    if len(seen) != total_cols:
        missing = next(c for c in range(total_cols) if c not in seen)
        raise DimensionMismatch(f"column {missing} held by no site")

    full = np.empty((rows, total_cols), dtype=np.float64)
    labels: list[str] | None = [""] * total_cols
    for b in blocks:
        full[:, list(b.global_cols)] = b.data.values
        if labels is not None and b.data.labels is not None:
            for pos, name in zip(b.global_cols, b.data.labels):
                labels[pos] = name
        else:
            labels = None
    table = DenseMatrix._wrap(
        np.ascontiguousarray(full), tuple(labels) if labels else None
    )

    start, c0 = time.perf_counter(), time.thread_time()
    cov = centralized_covariance(table)
    t1, c1 = time.perf_counter(), time.thread_time()
    decomp = symmetric_eigen(cov)
    t2 = time.perf_counter()

    cov_ms = (t1 - start) * 1e3
    metrics = RunMetrics(
        local_cov_ms=(cov_ms,),
        cross_cov_ms=(),
        local_cov_cpu_ms=((c1 - c0) * 1e3,),
        cross_cov_cpu_ms=(),
        transfers={},
        merge_ms=0.0,
        eigen_ms=(t2 - t1) * 1e3,
        protocol_ms=cov_ms,
        total_ms=(t2 - start) * 1e3,
    )
    return cov, decomp, metrics
