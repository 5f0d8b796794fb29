"""In-process clusters on the loopback interface, for tests and demos."""
from __future__ import annotations

from collections.abc import Mapping, Sequence

from ..params import DelayParams
from ..sharing import Share
from .master import Master
from .worker import Worker


class LocalCluster:
    """Start one :class:`Worker` per share and connect a :class:`Master`.

    >>> async with LocalCluster(shares, delay=DelayParams(1, 1), time_scale=0.01) as cl:
    ...     result = await cl.master.run_round(x)
    """

    def __init__(self, shares: Sequence[Share], *, delay: DelayParams | None = None, seed: int = 42,
                 time_scale: float = 1.0, fixed_times: Mapping[int, float] | None = None,
                 timeout: float | None = 60.0, on_send=None):
        fixed_times = fixed_times or {}
        self.workers = [Worker(s, delay, seed, time_scale, fixed_times.get(s.worker_index))
                        for s in shares]
        self.timeout = timeout
        self.on_send = on_send
        self.addresses: list[tuple[str, int]] = []
        self.master: Master | None = None

    async def __aenter__(self):
        for w in self.workers:
            self.addresses.append(await w.start())
        self.master = Master(self.addresses, timeout=self.timeout, on_send=self.on_send)
        await self.master.connect()
        return self

    async def __aexit__(self, *exc):
        if self.master is not None:
            await self.master.close()
        for w in self.workers:
            await w.close()
