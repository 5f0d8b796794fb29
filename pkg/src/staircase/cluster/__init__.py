"""Master/worker deployment over TCP with injected straggler delays."""
from .local import LocalCluster
from .master import (HiddenVectorSession, Master, RoundResult, RoundState, master_round,
                     master_round_hidden, parse_address)
from .wire import MsgType, ShareInfo, WireMessage
from .worker import Worker, worker_serve

__all__ = [
    "HiddenVectorSession", "LocalCluster", "Master", "MsgType", "RoundResult", "RoundState",
    "ShareInfo", "WireMessage", "Worker", "master_round", "master_round_hidden",
    "parse_address", "worker_serve",
]
