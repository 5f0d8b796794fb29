"""Shared brute-force oracles for the codec tests."""
import itertools
from collections import Counter

import numpy as np

from staircase.field import FieldContext
from staircase.linalg import Matrix


def share_tuple(share):
    return tuple(int(v) for sub in share.subshares for v in sub.data.ravel())


def secrecy_counts(encode, params, secrets, n_keys, p=5):
    """For each worker subset of size z, map secret -> Counter of share tuples
    enumerated over every key assignment."""
    ctx = FieldContext(p)
    out = {}
    for subset in itertools.combinations(range(params.n), params.z):
        out[subset] = {}
        for s in secrets:
            A = Matrix(np.array(s, dtype=np.int64).reshape(-1, 1), ctx)
            counts = Counter()
            for keys in itertools.product(range(p), repeat=n_keys):
                shares = encode(A, params, keys=np.array(keys))
                counts[tuple(share_tuple(shares[i]) for i in subset)] += 1
            out[subset][s] = counts
    return out


def secrecy_holds(table) -> bool:
    return all(len({frozenset(c.items()) for c in per_secret.values()}) == 1 for per_secret in table.values())
