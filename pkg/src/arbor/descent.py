"""Product-replacement descent on L(X) and the discrete-and-free decision.

L(X) is the sum of the translation lengths of every g_i and of every
g_i g_j, g_i g_j^{-1} with i < j. The descent repeatedly applies the first
X^j_{S1,S2} (pivot j ascending, then bitmasks (S1, S2) lexicographically)
that strictly lowers L, stopping early when some element is elliptic.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .exact import Mat2, ValidationError, require_prime, vp_int
from .isometry import Isometry, TrackedElement, evaluate_word, tracked_inv, tracked_mul

SCHEMA = "arbor/1"


@dataclass(frozen=True)
class ReplacementSpec:
    """Pivot j and index sets S1, S2 (all 1-based)."""

    j: int
    S1: FrozenSet[int] = frozenset()
    S2: FrozenSet[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "S1", frozenset(self.S1))
        object.__setattr__(self, "S2", frozenset(self.S2))
        if self.j in self.S1 or self.j in self.S2:
            raise ValidationError(f"pivot {self.j} may not appear in S1 or S2")

    def validate(self, n: int):
        for i in (self.j, *self.S1, *self.S2):
            if not 1 <= i <= n:
                raise ValidationError(f"index {i} out of range 1..{n}")

    def to_json(self):
        return {"j": self.j, "S1": sorted(self.S1), "S2": sorted(self.S2)}


@dataclass(frozen=True)
class TrackedTuple:
    elements: Tuple[TrackedElement, ...]
    p: int
    generators: Tuple[Mat2, ...]

    def __post_init__(self):
        if not self.elements:
            raise ValidationError("a tuple needs at least one element")
        for e in self.elements:
            if e.p != self.p:
                raise ValidationError(f"element over p={e.p} in a tuple over p={self.p}")

    @classmethod
    def from_matrices(cls, matrices: Sequence[Mat2], p: int) -> "TrackedTuple":
        require_prime(p)
        gens = tuple(matrices)
        elements = tuple(TrackedElement.generator(Isometry(M, p), i + 1) for i, M in enumerate(gens))
        return cls(elements, p, gens)

    @property
    def n(self) -> int:
        return len(self.elements)

    @property
    def isometries(self) -> List[Isometry]:
        return [e.isometry for e in self.elements]

    def lengths(self) -> List[int]:
        return [e.length for e in self.elements]

    def words_consistent(self) -> bool:
        return all(evaluate_word(e.word, self.generators) == e.matrix for e in self.elements)


def pair_lengths(X: TrackedTuple) -> List[Tuple[int, int, int, int]]:
    """(i, j, l(g_i g_j), l(g_i g_j^{-1})) for i < j, 1-based."""
    g = X.isometries
    out = []
    for i in range(X.n):
        for j in range(i + 1, X.n):
            out.append((i + 1, j + 1, (g[i] @ g[j]).length, (g[i] @ g[j].inverse()).length))
    return out


def big_L(X: TrackedTuple) -> int:
    return sum(X.lengths()) + sum(a + b for _, _, a, b in pair_lengths(X))


def apply_replacement(X: TrackedTuple, r: ReplacementSpec) -> TrackedTuple:
    r.validate(X.n)
    gj = X.elements[r.j - 1]
    gj_inv = tracked_inv(gj)
    new = list(X.elements)
    for i in r.S1 | r.S2:
        e = X.elements[i - 1]
        if i in r.S1:
            e = tracked_mul(gj, e)
        if i in r.S2:
            e = tracked_mul(e, gj_inv)
        new[i - 1] = e
    return TrackedTuple(tuple(new), X.p, X.generators)


# --- integer-scaled matrices for the candidate tables -------------------------
# (a, b, c, d, den, v_p(den)) stands for [[a, b], [c, d]] / den with det = 1.


def _scaled(M: Mat2, p: int):
    den = lcm(M.a11.denominator, M.a12.denominator, M.a21.denominator, M.a22.denominator)
    return (
        M.a11.numerator * (den // M.a11.denominator),
        M.a12.numerator * (den // M.a12.denominator),
        M.a21.numerator * (den // M.a21.denominator),
        M.a22.numerator * (den // M.a22.denominator),
        den,
        vp_int(den, p),
    )


def _mul(X, Y):
    a, b, c, d, den, v = X
    e, f, g, h, den2, v2 = Y
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h, den * den2, v + v2)


def _adj(X):
    a, b, c, d, den, v = X
    return (d, -b, -c, a, den, v)


def _len_num(num: int, vden: int, p: int) -> int:
    """-2 min(0, v_p(num / p^vden * unit)), examining at most vden factors of p."""
    if vden <= 0 or num == 0:
        return 0
    v = 0
    while v < vden and num % p == 0:
        num //= p
        v += 1
    return 2 * (vden - v)


def _len(X, p):
    return _len_num(X[0] + X[3], X[5], p)


def _pair_sum(X, Y, p):
    """l(XY) + l(XY^{-1}) from the two traces alone."""
    a, b, c, d, _, v = X
    e, f, g, h, _, v2 = Y
    return _len_num(a * e + b * g + c * f + d * h, v + v2, p) + _len_num(a * h - b * g - c * f + d * e, v + v2, p)


class CandidateTables:
    """Lookup tables for all X^j_{S1,S2} of one tuple, built lazily per pivot."""

    def __init__(self, X: TrackedTuple):
        self.X = X
        self.p = X.p
        self.n = X.n
        self.scaled = [_scaled(e.matrix, X.p) for e in X.elements]
        self._cache = {}

    def L(self) -> int:
        p, S = self.p, self.scaled
        total = sum(_len(s, p) for s in S)
        for i in range(self.n):
            for k in range(i + 1, self.n):
                total += _pair_sum(S[i], S[k], p)
        return total

    def others(self, j: int) -> List[int]:
        """0-based indices other than the 0-based pivot j; bit a of a mask is others[a]."""
        return [i for i in range(self.n) if i != j]

    def tables(self, j: int):
        hit = self._cache.get(j)
        if hit is not None:
            return hit
        p, S = self.p, self.scaled
        gj = S[j]
        gj_inv = _adj(gj)
        others = self.others(j)
        m = len(others)
        variants = []
        for i in others:
            g = S[i]
            jg = _mul(gj, g)
            variants.append((g, jg, _mul(g, gj_inv), _mul(jg, gj_inv)))
        single = np.zeros((m, 4), dtype=np.int64)
        pair = np.zeros((m, m, 4, 4), dtype=np.int64)
        for a, var in enumerate(variants):
            for t, x in enumerate(var):
                single[a, t] = _len(x, p) + _pair_sum(x, gj, p)
        for a in range(m):
            va = variants[a]
            for b in range(a + 1, m):
                vb = variants[b]
                for s in range(4):
                    for t in range(4):
                        pair[a, b, s, t] = _pair_sum(va[s], vb[t], p)
        result = (_len(gj, p), single, pair)
        self._cache[j] = result
        return result

    def spec_of(self, j: int, m1: int, m2: int) -> ReplacementSpec:
        others = self.others(j)
        S1 = {others[a] + 1 for a in range(len(others)) if (m1 >> a) & 1}
        S2 = {others[a] + 1 for a in range(len(others)) if (m2 >> a) & 1}
        return ReplacementSpec(j + 1, frozenset(S1), frozenset(S2))

    def first_improvement(self, target: int) -> Optional[Tuple[ReplacementSpec, int]]:
        for j in range(self.n):
            base, single, pair = self.tables(j)
            m1, m2, value = kernels.first_improvement(base, single, pair, target)
            if m1 >= 0:
                return self.spec_of(j, m1, m2), value
        return None

    def all_values(self, j: int) -> np.ndarray:
        """L of X^{j+1}_{S1,S2} for every code m1 << m | m2."""
        base, single, pair = self.tables(j)
        return kernels.all_values(base, single, pair)


def find_improving_move(X: TrackedTuple) -> Optional[Tuple[ReplacementSpec, int]]:
    """First strictly improving (spec, new L) in canonical order, or None if X is minimal."""
    tables = CandidateTables(X)
    return tables.first_improvement(tables.L())


def is_minimal(X: TrackedTuple) -> bool:
    return find_improving_move(X) is None


def enumerate_specs(n: int) -> Iterable[ReplacementSpec]:
    """Every (j, S1, S2) in canonical order, including the empty ones."""
    for j in range(n):
        others = [i for i in range(n) if i != j]
        m = len(others)
        for m1 in range(1 << m):
            for m2 in range(1 << m):
                S1 = frozenset(others[a] + 1 for a in range(m) if (m1 >> a) & 1)
                S2 = frozenset(others[a] + 1 for a in range(m) if (m2 >> a) & 1)
                yield ReplacementSpec(j + 1, S1, S2)


@dataclass(frozen=True)
class TraceStep:
    spec: ReplacementSpec
    L: int

    def to_json(self):
        out = self.spec.to_json()
        out["L"] = self.L
        return out


@dataclass
class DescentResult:
    tuple: TrackedTuple
    initial_L: int
    trace: List[TraceStep]
    elliptic_index: Optional[int] = None  # 1-based

    @property
    def final_L(self) -> int:
        return self.trace[-1].L if self.trace else self.initial_L


def descend(X: TrackedTuple, stop_on_elliptic: bool = True, max_steps: Optional[int] = None) -> DescentResult:
    """Run steps (2)-(3) of the decision loop from X.

    With ``stop_on_elliptic`` the loop returns as soon as an element has
    length 0; otherwise it runs to a minimal tuple. Only elements touched by
    the last replacement are re-checked for ellipticity.
    """
    tables = CandidateTables(X)
    L = tables.L()
    result = DescentResult(X, L, [])
    to_check = range(X.n)
    while True:
        if stop_on_elliptic:
            for i in to_check:
                if X.elements[i].length == 0:
                    result.tuple = X
                    result.elliptic_index = i + 1
                    return result
        if max_steps is not None and len(result.trace) >= max_steps:
            break
        move = tables.first_improvement(L)
        if move is None:
            break
        spec, new_L = move
        X = apply_replacement(X, spec)
        result.trace.append(TraceStep(spec, new_L))
        L = new_L
        tables = CandidateTables(X)
        to_check = sorted(i - 1 for i in spec.S1 | spec.S2)
    result.tuple = X
    return result


@dataclass
class Certificate:
    result: str  # "free_discrete" or "not_free_discrete"
    p: int
    generators: Tuple[Mat2, ...]
    initial_L: int
    trace: List[TraceStep]
    final_tuple: TrackedTuple
    witness: Optional[TrackedElement] = None
    witness_index: Optional[int] = None

    @property
    def free_discrete(self) -> bool:
        return self.result == "free_discrete"

    @property
    def conditional_on_conjecture(self) -> bool:
        # minimality implies Ping-Pong only for n <= 3
        return self.free_discrete and len(self.generators) > 3

    def to_json(self):
        return {
            "schema": SCHEMA,
            "result": self.result,
            "p": self.p,
            "n": len(self.generators),
            "generators": [g.to_json() for g in self.generators],
            "initial_L": self.initial_L,
            "trace": [s.to_json() for s in self.trace],
            "final_tuple": [{"matrix": e.matrix.to_json(), "word": list(e.word)} for e in self.final_tuple.elements],
            "witness_index": self.witness_index,
            "witness_word": list(self.witness.word) if self.witness else None,
            "witness_matrix": self.witness.matrix.to_json() if self.witness else None,
            "conditional_on_conjecture": self.conditional_on_conjecture,
        }


def validate_inputs(H: Sequence, p) -> Tuple[Mat2, ...]:
    require_prime(p)
    if len(H) == 0:
        raise ValidationError("need at least one generator")
    mats = []
    for k, M in enumerate(H, start=1):
        if not isinstance(M, Mat2):
            try:
                M = Mat2.from_rows(M)
            except ValidationError as exc:
                raise ValidationError(f"generator {k}: {exc}") from exc
        try:
            Isometry(M, p)
        except ValidationError as exc:
            raise ValidationError(f"generator {k}: {exc}") from exc
        mats.append(M)
    return tuple(mats)


def decide(H: Sequence, p: int) -> Certificate:
    """Decide whether <H> is discrete and free.

    Returns a certificate carrying either the minimal all-hyperbolic tuple
    or an elliptic element with its word in the inputs, plus the full trace.
    """
    mats = validate_inputs(H, p)
    X = TrackedTuple.from_matrices(mats, p)
    run = descend(X, stop_on_elliptic=True)
    if run.elliptic_index is not None:
        w = run.tuple.elements[run.elliptic_index - 1]
        return Certificate("not_free_discrete", p, mats, run.initial_L, run.trace, run.tuple, w, run.elliptic_index)
    return Certificate("free_discrete", p, mats, run.initial_L, run.trace, run.tuple)
