"""Decide whether a finitely generated subgroup of SL_2(Q) acting on the
Bruhat-Tits tree T_p is discrete and free, with independently checkable
certificates."""

__version__ = "0.1.0"

from .axes import AxisRelation, classify_pair, elliptic_product_prediction, pair_pingpong
from .descent import (
    Certificate,
    ReplacementSpec,
    TrackedTuple,
    apply_replacement,
    big_L,
    decide,
    find_improving_move,
    is_minimal,
)
from .exact import Infinity, Mat2, ValidationError, det, mat_inv, mat_mul, trace, vp
from .isometry import Isometry, TrackedElement, is_elliptic, is_hyperbolic, translation_length

__all__ = [
    "AxisRelation",
    "Certificate",
    "Infinity",
    "Isometry",
    "Mat2",
    "ReplacementSpec",
    "TrackedElement",
    "TrackedTuple",
    "ValidationError",
    "apply_replacement",
    "big_L",
    "classify_pair",
    "decide",
    "det",
    "elliptic_product_prediction",
    "find_improving_move",
    "is_elliptic",
    "is_hyperbolic",
    "is_minimal",
    "mat_inv",
    "mat_mul",
    "pair_pingpong",
    "trace",
    "translation_length",
    "vp",
]
