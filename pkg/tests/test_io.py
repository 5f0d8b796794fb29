import struct

import numpy as np
import pytest

from staircase.errors import FormatError
from staircase.field import FieldContext
from staircase.linalg import Matrix
from staircase.params import SystemParams
from staircase.sharing import (classical_encode, decode_shares, load_share, load_shares, save_shares,
                               share_from_bytes, share_to_bytes, staircase_encode)


@pytest.fixture(params=["classical", "staircase"])
def shares(request, ctx, rng):
    A = Matrix(ctx.random((7, 3), rng), ctx)
    enc = classical_encode if request.param == "classical" else staircase_encode
    return A, enc(A, SystemParams(4, 2, 1), rng=rng)


def test_round_trip(shares):
    _, ss = shares
    for s in ss:
        back = share_from_bytes(share_to_bytes(s))
        assert back == s and type(back) is type(s)


def test_prefix_round_trip(ctx, rng):
    A = Matrix(ctx.random((7, 3), rng), ctx)
    s = staircase_encode(A, SystemParams(4, 2, 1), rng=rng)[1].prefix(3)
    back = share_from_bytes(share_to_bytes(s))
    assert back == s and len(back.subshares) == 3


def test_directory_round_trip(tmp_path, shares):
    A, ss = shares
    paths = save_shares(tmp_path, ss)
    assert [p.name for p in paths] == [f"share_{i:03d}.scs" for i in range(1, 5)]
    loaded = load_shares(tmp_path)
    assert loaded == ss
    assert load_share(paths[0]) == ss[0]


def test_sub_result_files_decode(tmp_path, ctx, rng):
    A = Matrix(ctx.random((6, 4), rng), ctx)
    x = Matrix(ctx.random((4, 1), rng), ctx)
    params = SystemParams(4, 2, 1)
    results = [s.apply(x).prefix(params.subshares_needed(4)) for s in staircase_encode(A, params, rng=rng)]
    save_shares(tmp_path, results)
    assert decode_shares(load_shares(tmp_path), params) == A @ x


def _raw(ss):
    return share_to_bytes(ss[1])


def test_trailer_layout(ctx, rng):
    A = Matrix(ctx.random((2, 1), rng), ctx)
    s = staircase_encode(A, SystemParams(3, 2, 1), rng=rng)[2]
    raw = share_to_bytes(s)
    body = 22 + 8 * 2
    scheme, n, k, z, w, m = struct.unpack_from("<BHHHHQ", raw, body)
    assert (scheme, n, k, z, w, m) == (1, 3, 2, 1, 3, 2)
    b, present = struct.unpack_from("<II", raw, body + 17)
    assert (b, present) == (2, 2)
    offs = np.frombuffer(raw[body + 25:], dtype="<u8").tolist()
    assert offs == [22, 30]


@pytest.mark.parametrize("cut", [1, 5, 20])
def test_truncation_detected(shares, cut):
    raw = _raw(shares[1])
    with pytest.raises(FormatError):
        share_from_bytes(raw[:-cut])


def test_trailing_garbage(shares):
    with pytest.raises(FormatError):
        share_from_bytes(_raw(shares[1]) + b"\0")


def test_bad_trailer_fields(ctx, rng):
    A = Matrix(ctx.random((2, 1), rng), ctx)
    s = staircase_encode(A, SystemParams(3, 2, 1), rng=rng)[0]
    raw = bytearray(share_to_bytes(s))
    body = 22 + 16
    for offset, value, fmt in [(0, 7, "<B"), (1, 1, "<H"), (7, 9, "<H"), (17, 3, "<I"), (25, 99, "<Q")]:
        bad = bytearray(raw)
        struct.pack_into(fmt, bad, body + offset, value)
        with pytest.raises(FormatError):
            share_from_bytes(bytes(bad))


def test_big_field_share(rng):
    ctx = FieldContext(18446744073709551557)
    A = Matrix(ctx.random((3, 2), rng), ctx)
    s = classical_encode(A, SystemParams(3, 2, 1), rng=rng)[0]
    assert share_from_bytes(share_to_bytes(s)) == s
