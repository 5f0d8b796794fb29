"""Master role: broadcast a vector, collect sub-results, decode at the earliest instant.

Per-worker reader tasks feed one queue; a single coordinator drains it and is
the only code that touches a round's :class:`RoundState`.
"""
from __future__ import annotations

import asyncio
import contextlib
import logging
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from ..errors import IntegrityError, ProtocolError, RoundFailure, UsageError
from ..field import FieldContext
from ..linalg import Matrix
from ..params import SystemParams
from ..sharing import ClassicalShare, classical_decode, staircase_decode
from ..sharing.core import SHARE_TYPES
from . import wire
from .wire import MsgType, WireMessage

log = logging.getLogger(__name__)

Address = tuple[str, int]


def parse_address(text: str) -> Address:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise UsageError(f"expected host:port, got {text!r}")
    return host or "127.0.0.1", int(port)


class RoundState:
    """Sub-result bookkeeping for one round.

    ``decodable(d)`` holds once at least ``d`` workers have delivered
    ``alpha_d * b`` sub-results (classical codes: ``k`` workers, one each).
    """

    def __init__(self, round_id: int, params: SystemParams, scheme: str, b: int, workers):
        self.round_id = round_id
        self.params = params
        self.scheme = scheme
        self.b = b
        self.prefix = {w: 0 for w in workers}
        self.blocks: dict[int, list[np.ndarray]] = {w: [] for w in workers}
        self.failed: set[int] = set()
        self.started = time.monotonic()
        self.decoded_at: float | None = None
        self.d_star: int | None = None

    def candidates(self) -> range:
        if self.scheme == "classical":
            return range(self.params.k, self.params.k + 1)
        return range(self.params.k, self.params.n + 1)

    def needed(self, d: int) -> int:
        return 1 if self.scheme == "classical" else self.params.subshares_needed(d)

    def decodable(self, d: int) -> bool:
        need = self.needed(d)
        return sum(1 for v in self.prefix.values() if v >= need) >= d

    def first_decodable(self) -> int | None:
        for d in self.candidates():
            if self.decodable(d):
                return d
        return None

    def add(self, worker: int, index: int, block: np.ndarray) -> int | None:
        """Record sub-result ``index`` from ``worker``; return the smallest
        decodable ``d`` if one exists now."""
        if worker not in self.prefix:
            raise ProtocolError(f"sub-result from unknown worker {worker}")
        if index != self.prefix[worker]:
            raise ProtocolError(f"worker {worker} sent sub-result {index}, expected {self.prefix[worker]}")
        if index >= self.b:
            raise ProtocolError(f"worker {worker} sent more than b={self.b} sub-results")
        self.blocks[worker].append(block)
        self.prefix[worker] += 1
        return self.first_decodable()

    def still_possible(self) -> bool:
        live = len(self.prefix) - len(self.failed)
        return live >= self.params.k

    def mark_decoded(self, d: int):
        self.d_star = d
        self.decoded_at = time.monotonic()

    @property
    def elapsed(self) -> float | None:
        return None if self.decoded_at is None else self.decoded_at - self.started


@dataclass(frozen=True)
class RoundResult:
    value: Matrix
    round_id: int
    d_star: int
    elapsed: float
    prefixes: dict[int, int] = field(default_factory=dict)


@dataclass
class _Conn:
    index: int
    reader: asyncio.StreamReader
    writer: asyncio.StreamWriter
    info: wire.ShareInfo
    alive: bool = True
    pump: asyncio.Task | None = None


class Master:
    """Connects to a set of workers holding shares from one encode session.

    ``on_send(worker_index, raw)`` sees every outgoing message, for transcript
    inspection.
    """

    def __init__(self, addresses: Sequence[Address], *, timeout: float | None = 60.0,
                 on_send: Callable[[int, bytes], None] | None = None):
        if not addresses:
            raise UsageError("no worker addresses")
        self.addresses = [parse_address(a) if isinstance(a, str) else tuple(a) for a in addresses]
        self.timeout = timeout
        self.on_send = on_send
        self.conns: dict[int, _Conn] = {}
        self._queue: asyncio.Queue = asyncio.Queue()
        self._next_round = 1
        self.params: SystemParams | None = None
        self.scheme = ""
        self.ctx: FieldContext | None = None
        self.b = 1
        self.cols = 0
        self.original_m = 0

    async def __aenter__(self):
        await self.connect()
        return self

    async def __aexit__(self, *exc):
        await self.close()

    # -- session ---------------------------------------------------------------

    async def connect(self):
        infos = []
        for addr in self.addresses:
            try:
                reader, writer = await asyncio.wait_for(asyncio.open_connection(*addr), self.timeout)
                writer.write(WireMessage(MsgType.SETUP).to_bytes())
                await writer.drain()
                msg = await asyncio.wait_for(wire.read_message(reader), self.timeout)
            except (OSError, asyncio.TimeoutError) as exc:
                log.warning("worker %s:%d unreachable: %s", addr[0], addr[1], exc)
                continue
            if msg is None or msg.type != MsgType.SETUP:
                writer.close()
                raise ProtocolError(f"worker {addr[0]}:{addr[1]} did not answer SETUP")
            info = wire.unpack_setup(msg.payload)
            if info.worker_index in self.conns:
                writer.close()
                raise UsageError(f"two workers claim index {info.worker_index}")
            self.conns[info.worker_index] = _Conn(info.worker_index, reader, writer, info)
            infos.append(info)
        if not infos:
            raise RoundFailure("no worker reachable")
        self._adopt(infos)
        if len(self.conns) < self.params.k:
            await self.close()
            raise RoundFailure(f"only {len(infos)} workers reachable, need at least k={self.params.k}")
        for conn in self.conns.values():
            conn.pump = asyncio.create_task(self._pump(conn))

    def _adopt(self, infos):
        ref = infos[0]
        key = lambda i: (i.scheme, i.n, i.k, i.z, i.p, i.b, i.subshare_rows, i.cols, i.original_m)
        for info in infos[1:]:
            if key(info) != key(ref):
                raise UsageError(f"workers {ref.worker_index} and {info.worker_index} hold shares "
                                 "from different encode sessions")
        cls = SHARE_TYPES.get(ref.scheme)
        if cls is None:
            raise ProtocolError(f"unknown scheme code {ref.scheme}")
        self.params = SystemParams(ref.n, ref.k, ref.z)
        self.scheme = cls.scheme
        self.ctx = FieldContext(ref.p)
        self.b = ref.b
        self.cols = ref.cols
        self.original_m = ref.original_m

    async def _pump(self, conn: _Conn):
        try:
            while True:
                msg = await wire.read_message(conn.reader)
                await self._queue.put((conn.index, msg))
                if msg is None:
                    return
        except (ProtocolError, ConnectionError) as exc:
            await self._queue.put((conn.index, exc))

    async def close(self):
        for conn in self.conns.values():
            if conn.pump is not None:
                conn.pump.cancel()
            conn.writer.close()
        for conn in self.conns.values():
            with contextlib.suppress(Exception):
                await conn.writer.wait_closed()
            if conn.pump is not None:
                with contextlib.suppress(asyncio.CancelledError, Exception):
                    await conn.pump
        self.conns.clear()

    async def _send(self, conn: _Conn, msg: WireMessage):
        raw = msg.to_bytes()
        if self.on_send is not None:
            self.on_send(conn.index, raw)
        try:
            conn.writer.write(raw)
            await conn.writer.drain()
        except ConnectionError:
            conn.alive = False

    # -- rounds ----------------------------------------------------------------

    def check_vector(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=object).reshape(-1)
        if arr.size != self.cols:
            raise UsageError(f"x has {arr.size} entries, the shares have {self.cols} columns")
        return self.ctx.asarray([int(v) for v in arr])

    async def run_round(self, x) -> RoundResult:
        """Broadcast ``x``, decode ``A @ x`` as soon as some ``d`` is decodable."""
        if self.params is None:
            raise ProtocolError("master is not connected")
        vec = self.check_vector(x)
        rid = self._next_round
        self._next_round += 1
        live = [c for c in self.conns.values() if c.alive]
        state = RoundState(rid, self.params, self.scheme, self.b, [c.index for c in live])
        task = WireMessage(MsgType.TASK, rid, wire.pack_vector(self.ctx.p, vec))
        for conn in live:
            await self._send(conn, task)
        state.failed.update(c.index for c in live if not c.alive)

        d = state.first_decodable()
        deadline = None if self.timeout is None else state.started + self.timeout
        while d is None:
            if not state.still_possible():
                raise RoundFailure(f"round {rid}: only {len(state.prefix) - len(state.failed)} workers "
                                   f"still responsive, need k={self.params.k}")
            wait = None if deadline is None else max(deadline - time.monotonic(), 0.0)
            try:
                worker, msg = await asyncio.wait_for(self._queue.get(), wait)
            except asyncio.TimeoutError:
                raise RoundFailure(f"round {rid} timed out after {self.timeout}s") from None
            d = self._dispatch(state, worker, msg)
        state.mark_decoded(d)

        cancel = WireMessage(MsgType.CANCEL, rid)
        for conn in live:
            if conn.alive and state.prefix.get(conn.index, 0) < self.b:
                await self._send(conn, cancel)
        value = self._decode(state, d)
        return RoundResult(value, rid, d, state.elapsed, dict(state.prefix))

    def _dispatch(self, state: RoundState, worker: int, msg) -> int | None:
        conn = self.conns[worker]
        if msg is None or isinstance(msg, Exception):
            conn.alive = False
            state.failed.add(worker)
            log.warning("worker %d disconnected: %s", worker, msg or "end of stream")
            return None
        if msg.round_id != state.round_id:
            return None  # leftovers from an earlier round
        if msg.type == MsgType.PARTIAL:
            index, block = wire.unpack_partial(msg.payload)
            return state.add(worker, index, block)
        if msg.type == MsgType.ERROR:
            code, text = wire.unpack_error(msg.payload)
            log.warning("worker %d reported error %d: %s", worker, code, text)
            state.failed.add(worker)
        elif msg.type == MsgType.RESULT_ACK:
            if state.prefix.get(worker, 0) < self.b:
                state.failed.add(worker)
        return None

    def _decode(self, state: RoundState, d: int) -> Matrix:
        ctx = self.ctx
        blocks = {w: [Matrix(ctx.asarray(blk), ctx) for blk in bl] for w, bl in state.blocks.items() if bl}
        try:
            if self.scheme == "classical":
                shares = [ClassicalShare(w, (bl[0],), self.params, self.original_m) for w, bl in blocks.items()]
                return classical_decode(shares, self.params)
            return staircase_decode(blocks, d, self.params, self.original_m)
        except IntegrityError as exc:
            raise IntegrityError(f"round {state.round_id}: {exc}", exc.workers) from None


class HiddenVectorSession:
    """Two worker groups with independently encoded shares of the same ``A``.

    Group 1 sees ``x + u`` and group 2 sees ``u`` for a fresh uniform ``u``,
    so no worker ever receives ``x`` itself.
    """

    def __init__(self, group1: Master, group2: Master, rng=None):
        self.group1 = group1
        self.group2 = group2
        self.rng = rng

    def _check(self):
        for name, g in (("group 1", self.group1), ("group 2", self.group2)):
            p = g.params
            if p is None:
                raise ProtocolError(f"{name} is not connected")
            if not p.z < p.k < p.n:
                raise UsageError(f"{name} needs z < k < n, got {p}")
        if self.group1.ctx.p != self.group2.ctx.p:
            raise UsageError("the two groups work over different fields")
        if (self.group1.cols, self.group1.original_m) != (self.group2.cols, self.group2.original_m):
            raise UsageError("the two groups hold shares of differently shaped matrices")

    async def run_round(self, x, u=None):
        """Return ``A @ x`` as ``A(x+u) - A(u)``; ``u = 0`` is allowed for tests."""
        self._check()
        ctx = self.group1.ctx
        vec = self.group1.check_vector(x)
        if u is None:
            u = ctx.random(vec.size, self.rng)
        u = self.group1.check_vector(u)
        masked = (vec + u) % ctx.p
        try:
            r1, r2 = await asyncio.gather(self.group1.run_round(masked), self.group2.run_round(u))
        except RoundFailure as exc:
            raise RoundFailure(f"hidden-vector round failed: {exc}") from None
        return r1.value - r2.value, r1, r2


# -- convenience wrappers ------------------------------------------------------------

def master_round(addresses, x, **kwargs) -> RoundResult:
    async def run():
        async with Master(addresses, **kwargs) as m:
            return await m.run_round(x)
    return asyncio.run(run())


def master_round_hidden(group1, group2, x, *, u=None, rng=None, **kwargs) -> Matrix:
    async def run():
        async with Master(group1, **kwargs) as g1, Master(group2, **kwargs) as g2:
            value, _, _ = await HiddenVectorSession(g1, g2, rng).run_round(x, u)
            return value
    return asyncio.run(run())
