"""Share files: an SCMX matrix (sub-shares stacked vertically) plus a trailer.

Trailer, little-endian::

    scheme u8 | n u16 | k u16 | z u16 | worker_index u16 | original_m u64
    staircase only: b u32 | present u32 | present x u64 absolute byte offsets

``present`` is the number of leading sub-shares stored, so a worker's
sub-results and truncated prefixes use the same format.
"""
from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError, UsageError
from ..linalg import Matrix, matrix_header_size, read_matrix, write_matrix
from ..params import SystemParams
from .core import SHARE_TYPES, Share, StaircaseShare

_TRAILER = struct.Struct("<BHHHHQ")
_STAIR = struct.Struct("<II")


def share_to_bytes(share: Share) -> bytes:
    buf = io.BytesIO()
    m = share.as_matrix()
    write_matrix(buf, m)
    p = share.params
    buf.write(_TRAILER.pack(share.scheme_code, p.n, p.k, p.z, share.worker_index, share.original_m))
    if isinstance(share, StaircaseShare):
        present = len(share.subshares)
        buf.write(_STAIR.pack(p.b, present))
        rows = share.subshares[0].rows if present else 0
        stride = rows * m.cols * 8
        offsets = [matrix_header_size() + j * stride for j in range(present)]
        buf.write(np.asarray(offsets, dtype="<u8").tobytes())
    return buf.getvalue()


def share_from_bytes(raw: bytes) -> Share:
    fh = io.BytesIO(raw)
    m = read_matrix(fh)
    trailer = fh.read(_TRAILER.size)
    if len(trailer) != _TRAILER.size:
        raise FormatError("share file lacks its trailer")
    code, n, k, z, worker, original_m = _TRAILER.unpack(trailer)
    cls = SHARE_TYPES.get(code)
    if cls is None:
        raise FormatError(f"unknown share scheme {code}")
    try:
        params = SystemParams(n, k, z)
    except UsageError as exc:
        raise FormatError(f"share trailer holds invalid parameters: {exc}") from None
    if not 1 <= worker <= n:
        raise FormatError(f"worker index {worker} outside 1..{n}")
    if cls is StaircaseShare:
        head = fh.read(_STAIR.size)
        if len(head) != _STAIR.size:
            raise FormatError("truncated staircase trailer")
        b, present = _STAIR.unpack(head)
        if b != params.b:
            raise FormatError(f"trailer says b={b} but {params} needs b={params.b}")
        if present == 0 or present > b or m.rows % present:
            raise FormatError(f"{present} sub-shares do not tile a {m.rows}-row share")
        raw_offs = fh.read(8 * present)
        if len(raw_offs) != 8 * present:
            raise FormatError("truncated sub-share offsets")
        offs = np.frombuffer(raw_offs, dtype="<u8")
        rows = m.rows // present
        expected = [matrix_header_size() + j * rows * m.cols * 8 for j in range(present)]
        if [int(o) for o in offs] != expected:
            raise FormatError("sub-share offsets do not match the matrix layout")
    else:
        present, rows = 1, m.rows
    if fh.read(1):
        raise FormatError("trailing bytes after share")
    subs = tuple(Matrix(m.data[j * rows:(j + 1) * rows], m.ctx) for j in range(present))
    return cls(worker, subs, params, original_m)


def save_share(path, share: Share) -> None:
    Path(path).write_bytes(share_to_bytes(share))


def load_share(path) -> Share:
    return share_from_bytes(Path(path).read_bytes())


def save_shares(directory, shares, stem: str = "share") -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for s in shares:
        path = directory / f"{stem}_{s.worker_index:03d}.scs"
        save_share(path, s)
        paths.append(path)
    return paths


def load_shares(directory) -> list[Share]:
    paths = sorted(Path(directory).glob("*.scs"))
    return [load_share(p) for p in paths]
