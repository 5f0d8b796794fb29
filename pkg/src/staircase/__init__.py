"""Secure coded computing: classical secret sharing and universal Staircase codes,
with latency analytics, Monte-Carlo experiments and a TCP master/worker runtime."""
from .errors import (FormatError, InsufficientSharesError, IntegrityError, ProtocolError, RoundFailure,
                     SingularMatrixError, StaircaseError, StorageError, UsageError)
from .field import FieldContext, FieldElement
from .linalg import Matrix, inverse, load_matrix, matmul, save_matrix, solve, vandermonde
from .params import DelayParams, SystemParams
from .sharing import (ClassicalShare, ClassicalSharing, StaircaseShare, StaircaseSharing, classical_decode,
                      classical_encode, communication_cost, decode_shares, staircase_decode, staircase_encode)

__version__ = "0.1.0"

__all__ = [
    "ClassicalShare", "ClassicalSharing", "DelayParams", "FieldContext", "FieldElement", "FormatError",
    "InsufficientSharesError", "IntegrityError", "Matrix", "ProtocolError", "RoundFailure",
    "SingularMatrixError", "StaircaseError", "StaircaseShare", "StaircaseSharing", "StorageError",
    "SystemParams", "UsageError", "classical_decode", "classical_encode", "communication_cost",
    "decode_shares", "inverse", "load_matrix", "matmul", "save_matrix", "solve", "staircase_decode",
    "staircase_encode", "vandermonde",
]
