"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .errors import UsageError
from .field import FieldContext
from .linalg import Matrix


def check_field_matrix(X, ctx: FieldContext, *, name: str = "X") -> Matrix:
    """Validate ``X`` as a 2-D array of integers in ``[0, p)``."""
    if isinstance(X, Matrix):
        if X.ctx.p != ctx.p:
            raise UsageError(f"{name} lives in GF({X.ctx.p}), expected GF({ctx.p})")
        return X
    arr = check_array(X, dtype=None, ensure_2d=False, ensure_all_finite=True,
                      input_name=name)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise UsageError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise UsageError(f"{name} is empty")
    if arr.dtype.kind == "f":
        if not np.all(arr == np.floor(arr)):
            raise UsageError(f"{name} must hold integers")
        arr = arr.astype(np.int64)
    elif arr.dtype.kind not in "iuO":
        raise UsageError(f"{name} must hold integers, got dtype {arr.dtype}")
    if arr.dtype.kind == "O":
        if not all(isinstance(v, numbers.Integral) for v in arr.ravel()):
            raise UsageError(f"{name} must hold integers")
    if np.any(arr < 0) or np.any(arr >= ctx.p):
        raise UsageError(f"{name} entries must lie in [0, {ctx.p})")
    return Matrix(ctx.asarray(arr, reduce=False), ctx)


def check_generator(random_state):
    """Map ``random_state`` to a numpy Generator, or ``None`` for OS entropy."""
    if random_state is None:
        return None
    if isinstance(random_state, np.random.Generator):
        return random_state
    if isinstance(random_state, (numbers.Integral, np.random.SeedSequence)):
        return np.random.default_rng(random_state)
    raise UsageError(f"random_state must be None, an int or a numpy Generator, got {random_state!r}")


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise UsageError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
