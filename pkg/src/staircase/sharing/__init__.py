from .classical import classical_decode, classical_encode
from .core import ClassicalShare, Share, StaircaseShare
from .estimators import ClassicalSharing, StaircaseSharing
from .io import load_share, load_shares, save_share, save_shares, share_from_bytes, share_to_bytes
from .layout import BlockLayout, StaircaseLayout, classical_layout, staircase_layout
from .staircase import communication_cost, decode_shares, feasible_d, staircase_decode, staircase_encode

__all__ = [
    "BlockLayout",
    "ClassicalShare",
    "ClassicalSharing",
    "Share",
    "StaircaseLayout",
    "StaircaseShare",
    "StaircaseSharing",
    "classical_decode",
    "classical_encode",
    "classical_layout",
    "communication_cost",
    "decode_shares",
    "feasible_d",
    "load_share",
    "load_shares",
    "save_share",
    "save_shares",
    "share_from_bytes",
    "share_to_bytes",
    "staircase_decode",
    "staircase_encode",
    "staircase_layout",
]
