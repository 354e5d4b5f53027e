"""Independent verification of decision certificates.

Nothing here imports the descent code: translation lengths come from the
tree oracle, replacements are replayed with plain matrix products, and
minimality is re-checked by enumerating every X^j_{S1,S2} directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .exact import Mat2, ValidationError, adjugate, det, mat_mul, require_prime
from .isometry import Isometry, evaluate_word
from .tree import check_pingpong, oracle_translation_length

SCHEMA = "arbor/1"


@dataclass
class Verification:
    ok: bool = True
    failures: List[str] = field(default_factory=list)
    messages: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    pingpong: Optional[dict] = None

    def fail(self, invariant: str, message: str):
        self.ok = False
        self.failures.append(invariant)
        self.messages.append(f"{invariant}: {message}")

    def to_json(self):
        return {
            "schema": SCHEMA,
            "verified": self.ok,
            "failed_invariants": self.failures,
            "messages": self.messages,
            "notes": self.notes,
            "pingpong": self.pingpong,
        }


class _Lengths:
    """Oracle translation lengths, memoised on the matrix."""

    def __init__(self, p: int):
        self.p = p
        self._memo: Dict[Mat2, int] = {}

    def __call__(self, M: Mat2) -> int:
        v = self._memo.get(M)
        if v is None:
            v = self._memo[M] = oracle_translation_length(Isometry(M, self.p))
        return v


def _oracle_L(mats: Sequence[Mat2], length: _Lengths) -> int:
    total = sum(length(M) for M in mats)
    for i in range(len(mats)):
        for k in range(i + 1, len(mats)):
            total += length(mat_mul(mats[i], mats[k])) + length(mat_mul(mats[i], adjugate(mats[k])))
    return total


def _replace(mats: List[Mat2], j: int, S1, S2) -> List[Mat2]:
    gj = mats[j - 1]
    gj_inv = adjugate(gj)
    out = list(mats)
    for i in set(S1) | set(S2):
        g = mats[i - 1]
        if i in S1:
            g = mat_mul(gj, g)
        if i in S2:
            g = mat_mul(g, gj_inv)
        out[i - 1] = g
    return out


def oracle_improving_move(mats: Sequence[Mat2], length: _Lengths) -> Optional[Tuple[int, List[int], List[int], int]]:
    """Some (j, S1, S2, L') with L' < L, by exhaustive enumeration; None if minimal."""
    n = len(mats)
    L = _oracle_L(mats, length)

    def pair(x, y):
        return length(mat_mul(x, y)) + length(mat_mul(x, adjugate(y)))

    for j in range(n):
        gj = mats[j]
        gj_inv = adjugate(gj)
        others = [i for i in range(n) if i != j]
        variants = []
        for i in others:
            g = mats[i]
            jg = mat_mul(gj, g)
            variants.append([g, jg, mat_mul(g, gj_inv), mat_mul(jg, gj_inv)])
        single = [[length(x) + pair(x, gj) for x in var] for var in variants]
        m = len(others)
        pairs = {}
        for a in range(m):
            for b in range(a + 1, m):
                pairs[a, b] = [[pair(x, y) for y in variants[b]] for x in variants[a]]
        base = length(gj)
        for m1 in range(1 << m):
            for m2 in range(1 << m):
                types = [((m1 >> a) & 1) | (((m2 >> a) & 1) << 1) for a in range(m)]
                total = base + sum(single[a][types[a]] for a in range(m))
                for (a, b), tab in pairs.items():
                    total += tab[types[a]][types[b]]
                if total < L:
                    S1 = [others[a] + 1 for a in range(m) if (m1 >> a) & 1]
                    S2 = [others[a] + 1 for a in range(m) if (m2 >> a) & 1]
                    return j + 1, S1, S2, total
    return None


def _parse_matrix(obj, where: str) -> Mat2:
    try:
        return Mat2.from_rows(obj)
    except (ValidationError, TypeError) as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def certify(cert: dict, strict: bool = False, cutoff: Optional[int] = None) -> Verification:
    """Check a certificate produced by ``decide``.

    Raises ValidationError when the document itself is malformed; invariant
    failures are collected in the returned Verification.
    """
    if not isinstance(cert, dict):
        raise ValidationError("certificate must be a JSON object")
    if cert.get("schema") != SCHEMA:
        raise ValidationError(f"schema: expected {SCHEMA!r}, got {cert.get('schema')!r}")
    try:
        p = require_prime(cert["p"])
        result = cert["result"]
        gens = [_parse_matrix(g, f"generators[{k}]") for k, g in enumerate(cert["generators"])]
        final = [
            (_parse_matrix(e["matrix"], f"final_tuple[{k}].matrix"), [int(x) for x in e["word"]])
            for k, e in enumerate(cert["final_tuple"])
        ]
        trace = [(int(s["j"]), [int(x) for x in s["S1"]], [int(x) for x in s["S2"]], int(s["L"])) for s in cert["trace"]]
        initial_L = int(cert["initial_L"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed certificate: {exc!r}") from exc
    if result not in ("free_discrete", "not_free_discrete"):
        raise ValidationError(f"result: unknown value {result!r}")

    out = Verification()
    n = len(gens)
    for k, g in enumerate(gens, start=1):
        if det(g) != 1:
            out.fail("generator_det", f"generator {k} has det != 1")
    if len(final) != n:
        out.fail("final_tuple_size", f"{len(final)} elements for {n} generators")
    if not out.ok:
        return out

    length = _Lengths(p)

    # replay the recorded replacements with plain matrix products
    mats = list(gens)
    L_prev = _oracle_L(mats, length)
    if L_prev != initial_L:
        out.fail("initial_L", f"recorded {initial_L}, oracle {L_prev}")
    for step, (j, S1, S2, L_rec) in enumerate(trace, start=1):
        if not 1 <= j <= n or any(not 1 <= i <= n or i == j for i in S1 + S2):
            out.fail("trace_spec", f"step {step} has an invalid index set")
            return out
        mats = _replace(mats, j, S1, S2)
        L_now = _oracle_L(mats, length)
        if L_now != L_rec:
            out.fail("trace_L", f"step {step}: recorded L={L_rec}, oracle {L_now}")
        if L_now >= L_prev:
            out.fail("trace_decrease", f"step {step}: L did not decrease ({L_prev} -> {L_now})")
        L_prev = L_now
    for k, ((M, word), replayed) in enumerate(zip(final, mats), start=1):
        if M != replayed:
            out.fail("final_tuple_replay", f"element {k} differs from the replayed trace")
        if evaluate_word(word, gens) != M:
            out.fail("word_evaluation", f"final element {k}: word does not evaluate to its matrix")

    if result == "not_free_discrete":
        try:
            W = _parse_matrix(cert["witness_matrix"], "witness_matrix")
            word = [int(x) for x in cert["witness_word"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed witness: {exc!r}") from exc
        if det(W) != 1:
            out.fail("witness_det", "witness has det != 1")
            return out
        if evaluate_word(word, gens) != W:
            out.fail("word_evaluation", "witness word does not evaluate to the witness matrix")
        if length(W) != 0:
            out.fail("witness_length", f"witness has translation length {length(W)}, expected 0")
        return out

    finals = [M for M, _ in final]
    for k, M in enumerate(finals, start=1):
        if length(M) == 0:
            out.fail("hyperbolicity", f"final element {k} is elliptic")
    if not out.ok:
        return out
    move = oracle_improving_move(finals, length)
    if move is not None:
        j, S1, S2, L2 = move
        out.fail("minimality", f"X^{j}_{{{S1},{S2}}} lowers L to {L2}")
    report = check_pingpong([Isometry(M, p) for M in finals], strict=strict, cutoff=cutoff)
    out.pingpong = report.to_json()
    if report.status == "fail":
        if n > 3:
            out.fail("pingpong", "minimal all-hyperbolic tuple fails Ping-Pong: counterexample to the minimality conjecture")
        else:
            out.fail("pingpong", "minimal all-hyperbolic tuple fails Ping-Pong (impossible for n <= 3)")
    elif report.status == "indeterminate":
        out.fail("pingpong_indeterminate", "axis overlap beyond the oracle cutoff")
    elif n > 3:
        out.notes.append("decision conditional on the minimality conjecture for n > 3; Ping-Pong confirmed directly")
    return out
