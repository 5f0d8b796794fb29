"""Worker role: hold one share, multiply its sub-shares by each broadcast vector.

Sub-result ``j`` (1-based) of a round goes out no earlier than ``(j/b) * T_i``
after the TASK arrived, where ``T_i`` is the injected task time for that
round. Sending runs in its own task so a CANCEL is read while the worker
waits.
"""
from __future__ import annotations

import asyncio
import contextlib
import logging
import time

import numpy as np

from ..delay import sample_task_time
from ..errors import ProtocolError, StaircaseError, UsageError
from ..linalg import Matrix, matmul
from ..params import DelayParams
from ..sharing import Share
from . import wire
from .wire import MsgType, WireMessage

log = logging.getLogger(__name__)


def share_info(share: Share) -> wire.ShareInfo:
    p = share.params
    first = share.subshares[0]
    return wire.ShareInfo(share.scheme_code, p.n, p.k, p.z, share.worker_index, share.ctx.p,
                          len(share.subshares), first.rows, first.cols, share.original_m)


class Worker:
    """Serve one share over TCP.

    Parameters
    ----------
    share : Share
        The share this worker holds.
    delay : DelayParams or None
        Injected delay law; ``None`` sends sub-results back to back.
    seed : int
        The task time of round ``r`` is drawn from ``SeedSequence([seed, worker, r])``.
    time_scale : float
        Wall-clock seconds per model second.
    fixed_time : float, optional
        Use this task time every round instead of sampling (scripted stragglers).
    """

    def __init__(self, share: Share, delay: DelayParams | None = None, seed: int = 42,
                 time_scale: float = 1.0, fixed_time: float | None = None):
        if time_scale < 0:
            raise UsageError("time_scale must be non-negative")
        self.share = share
        self.delay = delay
        self.seed = seed
        self.time_scale = time_scale
        self.fixed_time = fixed_time
        self.info = share_info(share)
        self._server: asyncio.base_events.Server | None = None

    def task_time(self, round_id: int) -> float:
        """Model-time duration of this worker's whole task in ``round_id``."""
        if self.fixed_time is not None:
            return self.fixed_time
        if self.delay is None:
            return 0.0
        ss = np.random.SeedSequence([self.seed, self.share.worker_index, round_id])
        return sample_task_time(self.share.params, self.delay, np.random.default_rng(ss))

    async def start(self, host: str = "127.0.0.1", port: int = 0) -> tuple[str, int]:
        self._server = await asyncio.start_server(self._handle, host, port)
        addr = self._server.sockets[0].getsockname()
        return addr[0], addr[1]

    async def serve_forever(self):
        if self._server is None:
            raise ProtocolError("worker not started")
        async with self._server:
            await self._server.serve_forever()

    async def close(self):
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
            self._server = None

    # -- connection handling -----------------------------------------------------

    async def _handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        lock = asyncio.Lock()
        rounds: dict[int, asyncio.Task] = {}

        async def send(msg: WireMessage):
            async with lock:
                writer.write(msg.to_bytes())
                await writer.drain()

        try:
            while True:
                try:
                    msg = await wire.read_message(reader)
                except ProtocolError as exc:
                    await send(WireMessage(MsgType.ERROR, 0, wire.pack_error(exc.exit_code, str(exc))))
                    break
                if msg is None:
                    break
                if msg.type == MsgType.SETUP:
                    await send(WireMessage(MsgType.SETUP, msg.round_id, wire.pack_setup(self.info)))
                elif msg.type == MsgType.TASK:
                    try:
                        x = self._parse_task(msg.payload)
                    except StaircaseError as exc:
                        await send(WireMessage(MsgType.ERROR, msg.round_id,
                                               wire.pack_error(exc.exit_code, str(exc))))
                        continue
                    old = rounds.pop(msg.round_id, None)
                    if old is not None:
                        old.cancel()
                    rounds[msg.round_id] = asyncio.create_task(
                        self._run_round(msg.round_id, x, time.monotonic(), send))
                elif msg.type == MsgType.CANCEL:
                    task = rounds.pop(msg.round_id, None)
                    if task is not None:
                        task.cancel()
                else:
                    text = f"workers do not accept {msg.type.name} messages"
                    await send(WireMessage(MsgType.ERROR, msg.round_id, wire.pack_error(6, text)))
                    break
                for rid in [r for r, t in rounds.items() if t.done()]:
                    del rounds[rid]
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        finally:
            for task in rounds.values():
                task.cancel()
            for task in rounds.values():
                with contextlib.suppress(asyncio.CancelledError, ConnectionError):
                    await task
            writer.close()
            with contextlib.suppress(ConnectionError):
                await writer.wait_closed()

    def _parse_task(self, payload: bytes) -> Matrix:
        p, values = wire.unpack_vector(payload)
        ctx = self.share.ctx
        if p != ctx.p:
            raise UsageError(f"vector is over GF({p}) but the share is over GF({ctx.p})")
        if len(values) != self.info.cols:
            raise UsageError(f"vector has {len(values)} entries, the share has {self.info.cols} columns")
        if any(v >= p for v in values):
            raise UsageError("vector entries must be reduced modulo p")
        return Matrix(ctx.asarray(values).reshape(-1, 1), ctx)

    async def _run_round(self, round_id: int, x: Matrix, started: float, send):
        subs = self.share.subshares
        b = len(subs)
        total = self.task_time(round_id) * self.time_scale
        sent = 0
        try:
            for j, block in enumerate(subs, start=1):
                result = matmul(block, x)
                wait = started + total * j / b - time.monotonic()
                if wait > 0:
                    await asyncio.sleep(wait)
                await send(WireMessage(MsgType.PARTIAL, round_id, wire.pack_partial(j - 1, result.data)))
                sent = j
        except asyncio.CancelledError:
            log.debug("worker %d: round %d cancelled after %d of %d", self.info.worker_index, round_id, sent, b)
        with contextlib.suppress(ConnectionError):
            await send(WireMessage(MsgType.RESULT_ACK, round_id, wire.pack_ack(sent)))


async def worker_serve(share: Share, host: str = "127.0.0.1", port: int = 0, *,
                       delay: DelayParams | None = None, seed: int = 42, time_scale: float = 1.0,
                       ready=None):
    """Run a worker until cancelled. ``ready(host, port)`` is called once bound."""
    w = Worker(share, delay, seed, time_scale)
    bound = await w.start(host, port)
    if ready is not None:
        ready(*bound)
    try:
        await w.serve_forever()
    finally:
        await w.close()
