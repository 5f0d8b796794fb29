import numpy as np
import pytest
from hypothesis import given, strategies as st

from staircase.errors import FieldMismatchError, UsageError
from staircase.field import FieldContext, add, egcd_inverse, inv, is_prime, mul, sub

GF5 = FieldContext(5)
GF7 = FieldContext(7)
BIG = FieldContext(65537)


@pytest.mark.parametrize("a,b,want", [(3, 4, 2), (0, 4, 4)])
def test_add_gf5(a, b, want):
    assert add(GF5(a), GF5(b)) == GF5(want)


def test_add_wraps():
    assert add(BIG(65536), BIG(1)).value == 0


@pytest.mark.parametrize("a,b,want", [(3, 4, 2), (1, 4, 4)])
def test_mul_gf5(a, b, want):
    assert mul(GF5(a), GF5(b)).value == want


def test_mul_by_inverse():
    assert mul(GF5(2), inv(GF5(2))).value == 1


@pytest.mark.parametrize("ctx,a,want", [(GF5, 2, 3), (GF5, 4, 4), (GF7, 3, 5)])
def test_inverse_examples(ctx, a, want):
    assert inv(ctx(a)).value == want
    # brute force oracle
    assert [x for x in range(1, ctx.p) if a * x % ctx.p == 1] == [want]


def test_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        inv(GF5(0))
    with pytest.raises(ZeroDivisionError):
        GF5(1) / GF5(0)


def test_mismatched_contexts():
    with pytest.raises(FieldMismatchError):
        add(GF5(1), GF7(1))
    with pytest.raises(UsageError):
        mul(GF5(1), GF7(1))


def test_sub_and_operators():
    assert sub(GF5(1), GF5(3)).value == 3
    assert (GF5(2) - 3).value == 4
    assert (3 - GF5(4)).value == 4
    assert (-GF5(2)).value == 3
    assert (GF5(3) / GF5(4)).value == 2
    assert (GF5(2) ** 4).value == 1
    assert int(GF5(3)) == 3


@pytest.mark.parametrize("p", [4, 1, 0, 65535, 2**61])
def test_rejects_composite_modulus(p):
    with pytest.raises(UsageError):
        FieldContext(p)


def test_rejects_huge_modulus():
    with pytest.raises(UsageError):
        FieldContext(2**64 + 13)


def test_is_prime_matches_sieve():
    limit = 2000
    sieve = np.ones(limit, dtype=bool)
    sieve[:2] = False
    for i in range(2, int(limit**0.5) + 1):
        sieve[i * i::i] = False
    assert [is_prime(i) for i in range(limit)] == sieve.tolist()
    assert is_prime(2**61 - 1) and is_prime(18446744073709551557)


def test_supports():
    GF5.check_supports(4)
    with pytest.raises(UsageError):
        GF5.check_supports(5)


@given(st.integers(0, 255))
def test_embed_round_trip(v):
    assert BIG.extract(BIG.embed(v)) == v


def test_embed_rejects_out_of_range():
    with pytest.raises(UsageError):
        GF5.embed(5)
    with pytest.raises(UsageError):
        GF5.embed(-1)


triples = st.tuples(st.integers(0, 65536), st.integers(0, 65536), st.integers(0, 65536))


@given(triples)
def test_field_axioms(t):
    a, b, c = (BIG(v) for v in t)
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a + b == b + a and a * b == b * a
    assert a * (b + c) == a * b + a * c


@given(st.integers(1, 65536))
def test_inverse_property(a):
    assert (BIG(a) * BIG(a).inv()).value == 1
    assert egcd_inverse(a, 65537) == pow(a, 65535, 65537)


def test_large_prime_uses_exact_arithmetic():
    p = 18446744073709551557  # largest 64-bit prime
    ctx = FieldContext(p)
    assert ctx.dtype is object
    rng = np.random.default_rng(1)
    a, b = ctx.random((3, 4), rng), ctx.random((4, 2), rng)
    want = [[sum(int(a[i, t]) * int(b[t, j]) for t in range(4)) % p for j in range(2)] for i in range(3)]
    assert ctx.matmul(a, b).tolist() == want


def test_chunked_int64_matmul_matches_python():
    p = 2147483647
    ctx = FieldContext(p)
    assert ctx.dtype is np.int64 and not ctx.dot_is_safe(10)
    rng = np.random.default_rng(2)
    a, b = ctx.random((2, 10), rng), ctx.random((10, 3), rng)
    want = [[sum(int(a[i, t]) * int(b[t, j]) for t in range(10)) % p for j in range(3)] for i in range(2)]
    assert ctx.matmul(a, b).tolist() == want


def test_random_is_uniform_and_seeded():
    rng1, rng2 = np.random.default_rng(5), np.random.default_rng(5)
    x, y = GF5.random(5000, rng1), GF5.random(5000, rng2)
    assert np.array_equal(x, y)
    counts = np.bincount(x, minlength=5)
    assert counts.min() > 850
    os_draw = GF5.random((10, 10))
    assert os_draw.shape == (10, 10) and os_draw.min() >= 0 and os_draw.max() < 5
