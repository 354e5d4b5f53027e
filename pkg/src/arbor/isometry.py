"""Determinant-1 rational matrices as isometries of the Bruhat-Tits tree T_p.

Words are tuples of signed 1-based generator labels: ``(5, 1, -3)`` means
h_5 * h_1 * h_3^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Tuple

from .exact import (
    IDENTITY,
    Infinity,
    Mat2,
    ValidationError,
    adjugate,
    det,
    format_rational,
    mat_mul,
    require_prime,
    trace,
    vp,
)

Word = Tuple[int, ...]


def length_from_trace(tr, p: int) -> int:
    v = vp(tr, p)
    if v is Infinity:
        return 0
    return -2 * min(0, v)


@dataclass(frozen=True)
class Isometry:
    """A determinant-1 matrix acting on T_p, with its translation length cached."""

    matrix: Mat2
    p: int
    length: int = field(init=False, compare=False)

    def __post_init__(self):
        require_prime(self.p)
        if not isinstance(self.matrix, Mat2):
            raise ValidationError(f"expected Mat2, got {type(self.matrix).__name__}")
        d = det(self.matrix)
        if d != 1:
            raise ValidationError(f"isometry needs det 1, got {format_rational(d)}")
        object.__setattr__(self, "length", length_from_trace(trace(self.matrix), self.p))

    @classmethod
    def from_rows(cls, rows, p: int) -> "Isometry":
        return cls(Mat2.from_rows(rows), p)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        _same_prime(self.p, other.p)
        return Isometry(mat_mul(self.matrix, other.matrix), self.p)

    def inverse(self) -> "Isometry":
        return Isometry(adjugate(self.matrix), self.p)

    def to_json(self):
        return {"p": self.p, "matrix": self.matrix.to_json()}

    @classmethod
    def from_json(cls, obj) -> "Isometry":
        try:
            return cls(Mat2.from_rows(obj["matrix"]), int(obj["p"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed isometry JSON: {obj!r}") from exc


def translation_length(A: Isometry) -> int:
    return A.length


def is_elliptic(A: Isometry) -> bool:
    return A.length == 0


def is_hyperbolic(A: Isometry) -> bool:
    return A.length > 0


def _same_prime(p: int, q: int):
    if p != q:
        raise ValidationError(f"mixed primes {p} and {q}")


def reduce_word(letters: Iterable[int]) -> Word:
    """Freely reduce: cancel adjacent x, -x pairs."""
    out = []
    for x in letters:
        if x == 0:
            raise ValidationError("word letters are nonzero generator labels")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def invert_word(word: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(word))


def evaluate_word(word: Sequence[int], generators: Sequence[Mat2]) -> Mat2:
    """Multiply out a word over the original generator matrices."""
    result = IDENTITY
    inverses = {}
    for x in word:
        i = abs(x)
        if not 1 <= i <= len(generators):
            raise ValidationError(f"word letter {x} out of range for {len(generators)} generators")
        if x > 0:
            g = generators[i - 1]
        else:
            g = inverses.get(i)
            if g is None:
                g = inverses[i] = adjugate(generators[i - 1])
        result = mat_mul(result, g)
    return result


@dataclass(frozen=True)
class TrackedElement:
    isometry: Isometry
    word: Word

    @classmethod
    def generator(cls, isometry: Isometry, index: int) -> "TrackedElement":
        return cls(isometry, (index,))

    @property
    def matrix(self) -> Mat2:
        return self.isometry.matrix

    @property
    def length(self) -> int:
        return self.isometry.length

    @property
    def p(self) -> int:
        return self.isometry.p


def tracked_mul(x: TrackedElement, y: TrackedElement) -> TrackedElement:
    return TrackedElement(x.isometry @ y.isometry, reduce_word(x.word + y.word))


def tracked_inv(x: TrackedElement) -> TrackedElement:
    return TrackedElement(x.isometry.inverse(), invert_word(x.word))
