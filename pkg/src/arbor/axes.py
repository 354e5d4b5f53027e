"""Axis interaction of two hyperbolic elements, read off from product lengths.

Given l1, l2 and the lengths P = l(g1 g2), Q = l(g1 g2^{-1}), with
s = min(P, Q) and M = max(P, Q):

    P = Q > l1 + l2                      disjoint, d = (s - l1 - l2) / 2
    P = Q = l1 + l2                      axes share exactly one vertex
    M = l1 + l2, |l1 - l2| < s < l1+l2   overlap, delta = (l1 + l2 - s) / 2
    M = l1 + l2, s <= |l1 - l2|          overlap of at least min(l1, l2)

Anything else cannot come from two hyperbolic elements of a tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .exact import ArborError, ValidationError
from .isometry import Isometry


class InconsistentLengths(ArborError):
    pass


@dataclass(frozen=True)
class AxisRelation:
    kind: str  # "disjoint", "touch", "overlap", "large_overlap"
    d: Optional[int] = None
    delta: Optional[int] = None
    same_orientation: Optional[bool] = None
    delta_lower_bound: Optional[int] = None

    @property
    def pingpong(self) -> bool:
        return self.kind in ("disjoint", "touch", "overlap")

    def to_json(self):
        if self.kind == "disjoint":
            return {"kind": "disjoint", "d": self.d}
        if self.kind == "touch":
            return {"kind": "touch"}
        if self.kind == "overlap":
            return {"kind": "overlap", "delta": self.delta, "sameOrientation": self.same_orientation}
        return {
            "kind": "large_overlap",
            "deltaLowerBound": self.delta_lower_bound,
            "sameOrientation": self.same_orientation,
        }


def relation_from_lengths(l1: int, l2: int, P: int, Q: int) -> AxisRelation:
    if l1 <= 0 or l2 <= 0:
        raise InconsistentLengths(f"non-hyperbolic lengths {l1}, {l2}")
    total = l1 + l2
    s, M = min(P, Q), max(P, Q)
    if s > total:
        if P != Q:
            raise InconsistentLengths(f"disjoint axes need equal products, got {P} and {Q}")
        if (s - total) % 2:
            raise InconsistentLengths(f"odd excess {s - total}")
        return AxisRelation("disjoint", d=(s - total) // 2)
    if M != total:
        raise InconsistentLengths(f"lengths l1={l1} l2={l2} P={P} Q={Q}")
    if s == total:
        return AxisRelation("touch", delta=0)
    if s > abs(l1 - l2):
        if (total - s) % 2:
            raise InconsistentLengths(f"odd overlap from l1={l1} l2={l2} s={s}")
        return AxisRelation("overlap", delta=(total - s) // 2, same_orientation=(P == M))
    return AxisRelation("large_overlap", delta_lower_bound=min(l1, l2), same_orientation=(P == M))


def _check_pair(g1: Isometry, g2: Isometry):
    if g1.p != g2.p:
        raise ValidationError(f"mixed primes {g1.p} and {g2.p}")
    if g1.length == 0 or g2.length == 0:
        raise ValidationError("classify_pair needs two hyperbolic elements")


def classify_pair(g1: Isometry, g2: Isometry) -> AxisRelation:
    _check_pair(g1, g2)
    P = (g1 @ g2).length
    Q = (g1 @ g2.inverse()).length
    return relation_from_lengths(g1.length, g2.length, P, Q)


def pair_pingpong(g1: Isometry, g2: Isometry) -> bool:
    """True iff the axes are disjoint or meet in a path shorter than both lengths."""
    return classify_pair(g1, g2).pingpong


def elliptic_product_prediction(g1: Isometry, g2: Isometry) -> int:
    """Distance from the overlap endpoint q to a vertex fixed by g1 g2."""
    _check_pair(g1, g2)
    if (g1 @ g2).length != 0:
        raise ValidationError("g1 g2 is not elliptic")
    return abs(g1.length - g2.length) // 2
