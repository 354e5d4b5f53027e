"""Explicit geometry of the Bruhat-Tits tree T_p over Q_p.

Vertices are homothety classes of Z_p-lattices in Q_p^2. A lattice spanned
by the columns of a rational basis B is put in the canonical form

    [[p^m, x],
     [0,   1]]

where x is reduced modulo p^m Z_(p) to k * p^(m-s) with 0 <= k < p^s. Every
vertex reachable from rational matrices has such a representative, so no
p-adic truncation is ever needed.

This module is an oracle: it never reads traces. Translation lengths,
axes and projections are all measured from the action on vertices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .exact import (
    ArborError,
    Infinity,
    Mat2,
    ValidationError,
    format_rational,
    mat_inv,
    mat_mul,
    require_prime,
    vp_int,
)
from .isometry import Isometry


class OverlapBeyondCutoff(ArborError):
    """Two axes agree on a stretch longer than the oracle cutoff radius."""

    def __init__(self, message, lower_bound=None):
        super().__init__(message)
        self.lower_bound = lower_bound


class InversionObserved(ArborError):
    """An element moved a vertex an odd distance; SL_2 elements never do."""


def _v(x: Fraction, p: int):
    if x == 0:
        return Infinity
    return vp_int(x.numerator, p) - vp_int(x.denominator, p)


def _ppow(p: int, k: int) -> Fraction:
    return Fraction(p ** k) if k >= 0 else Fraction(1, p ** (-k))


def _reduce_mod(x: Fraction, m: int, p: int) -> Fraction:
    """Canonical representative of x modulo p^m Z_(p)."""
    y = x / _ppow(p, m)
    s = vp_int(y.denominator, p)
    if s == 0:
        return Fraction(0)
    ps = p ** s
    rest = y.denominator // ps
    k = (y.numerator * pow(rest, -1, ps)) % ps
    return Fraction(k, ps) * _ppow(p, m)


@dataclass(frozen=True)
class Vertex:
    p: int
    m: int
    x: Fraction

    def basis(self) -> Mat2:
        return Mat2(_ppow(self.p, self.m), self.x, Fraction(0), Fraction(1))

    def to_json(self):
        return self.basis().to_json()

    def __repr__(self):
        return f"Vertex(p={self.p}, m={self.m}, x={format_rational(self.x)})"


def base_vertex(p: int) -> Vertex:
    """The class of the standard lattice Z_p^2."""
    return Vertex(require_prime(p), 0, Fraction(0))


def canonicalize(B: Mat2, p: int) -> Vertex:
    """Vertex of the lattice spanned by the columns of B."""
    c1, c2 = (B.a11, B.a21), (B.a12, B.a22)
    # column with the smaller-valuation bottom entry becomes the second column
    if _v(c1[1], p) < _v(c2[1], p):
        c1, c2 = c2, c1
    if c2[1] == 0:
        raise ValidationError("singular basis matrix")
    ratio = c2[0] / c2[1]
    a = c1[0] - c1[1] * ratio
    if a == 0:
        raise ValidationError("singular basis matrix")
    m = _v(a, p) - _v(c2[1], p)
    return Vertex(p, m, _reduce_mod(ratio, m, p))


def apply(A, v: Vertex) -> Vertex:
    """Image of a vertex under an isometry (or a bare det-1 Mat2)."""
    M = A.matrix if isinstance(A, Isometry) else A
    return canonicalize(mat_mul(M, v.basis()), v.p)


def distance(u: Vertex, w: Vertex) -> int:
    """Difference of the elementary-divisor valuations of the change of basis.

    The change of basis from u to w is [[p^(mw-mu), (xw-xu)/p^mu], [0, 1]].
    """
    if u.p != w.p:
        raise ValidationError(f"mixed primes {u.p} and {w.p}")
    k = w.m - u.m
    off = _v(w.x - u.x, u.p)
    low = min(k, 0, off - u.m if off is not Infinity else 0)
    return k - 2 * low


def neighbors(v: Vertex) -> List[Vertex]:
    """The p+1 vertices at distance 1: index-p sublattices of v's lattice."""
    p = v.p
    B = v.basis()
    out = [canonicalize(mat_mul(B, Mat2.of(p, k, 0, 1)), p) for k in range(p)]
    out.append(canonicalize(mat_mul(B, Mat2.of(1, 0, 0, p)), p))
    return out


def geodesic(u: Vertex, w: Vertex) -> List[Vertex]:
    """Vertex path u..w by greedy descent: each step takes the unique closer neighbour."""
    path = [u]
    d = distance(u, w)
    cur = u
    while d > 0:
        for nb in neighbors(cur):
            if distance(nb, w) == d - 1:
                cur = nb
                break
        else:
            raise ArborError("no neighbour is closer to the target")
        path.append(cur)
        d -= 1
    return path


def _geodesic_frame(u: Vertex, w: Vertex) -> Tuple[Mat2, int]:
    """Basis U of u with w ~ U diag(1, p^d): Smith reduction of the change of basis."""
    p = u.p
    Bu = u.basis()
    scale = _ppow(p, -u.m)
    Bu_inv = Mat2(scale, -u.x * scale, Fraction(0), Fraction(1))
    M = mat_mul(Bu_inv, w.basis())
    entries = [(M.a11, 0, 0), (M.a12, 0, 1), (M.a21, 1, 0), (M.a22, 1, 1)]
    vals = [(_v(e, p), r, c) for e, r, c in entries]
    best = min(vals, key=lambda t: (t[0], t[1], t[2]))
    _, r, c = best
    rows = [[M.a11, M.a12], [M.a21, M.a22]]
    if r == 1:
        rows = [rows[1], rows[0]]
    if c == 1:
        rows = [[rows[0][1], rows[0][0]], [rows[1][1], rows[1][0]]]
    lam = rows[1][0] / rows[0][0]
    U = Mat2.of(1, 0, lam, 1)
    if r == 1:
        U = mat_mul(Mat2.of(0, 1, 1, 0), U)
    return mat_mul(Bu, U), distance(u, w)


def geodesic_point(u: Vertex, w: Vertex, t: int) -> Vertex:
    """The vertex at distance t from u on the geodesic to w (closed form)."""
    frame, d = _geodesic_frame(u, w)
    if not 0 <= t <= d:
        raise ValidationError(f"t={t} outside [0, {d}]")
    return canonicalize(mat_mul(frame, Mat2.of(1, 0, 0, _ppow(u.p, t))), u.p)


def geodesic_fast(u: Vertex, w: Vertex) -> List[Vertex]:
    frame, d = _geodesic_frame(u, w)
    p = u.p
    return [canonicalize(mat_mul(frame, Mat2.of(1, 0, 0, _ppow(p, t))), p) for t in range(d + 1)]


def _as_matrix(A) -> Tuple[Mat2, int]:
    if isinstance(A, Isometry):
        return A.matrix, A.p
    raise ValidationError(f"expected an Isometry, got {type(A).__name__}")


def _displacement(M: Mat2, x: Vertex) -> Tuple[Vertex, int]:
    y = canonicalize(mat_mul(M, x.basis()), x.p)
    d = distance(x, y)
    if d % 2:
        raise InversionObserved(f"odd displacement {d} at {x!r}")
    return y, d


def _descend_to_min_set(M: Mat2, start: Vertex) -> Tuple[Vertex, int]:
    """Midpoint descent x <- mid(x, Mx) until d(x, Mx) stops decreasing."""
    x = start
    y, d = _displacement(M, x)
    while d > 0:
        mid = geodesic_point(x, y, d // 2)
        y2, d2 = _displacement(M, mid)
        if d2 >= d:
            break
        x, y, d = mid, y2, d2
    return x, d


def oracle_translation_length(A: Isometry, start: Optional[Vertex] = None) -> int:
    """min_x d(x, Ax), found by midpoint descent from `start` (default: base vertex)."""
    M, p = _as_matrix(A)
    _, d = _descend_to_min_set(M, start or base_vertex(p))
    return d


def fixed_vertex(A: Isometry, start: Optional[Vertex] = None) -> Vertex:
    """A vertex fixed by an elliptic element: the projection of `start` onto its fixed tree."""
    M, p = _as_matrix(A)
    x, d = _descend_to_min_set(M, start or base_vertex(p))
    if d != 0:
        raise ValidationError(f"element is not elliptic (minimal displacement {d})")
    return x


class AxisFrame:
    """Integer coordinates on the axis of a hyperbolic element.

    The origin sits at coordinate 0 and the element moves coordinate t to
    t + length. Vertex at coordinate q*length + r is A^q applied to the
    r-th vertex of the segment [origin, A origin].
    """

    def __init__(self, A: Isometry, start: Optional[Vertex] = None):
        M, p = _as_matrix(A)
        self.isometry = A
        self.matrix = M
        self.p = p
        x = start or base_vertex(p)
        # the descent lands on the axis; its displacement is the translation length
        on_axis, length = _descend_to_min_set(M, x)
        if length == 0:
            raise ValidationError("axis_frame needs a hyperbolic element")
        self.length = length
        Ax, dx = _displacement(M, x)
        self.origin = geodesic_point(x, Ax, (dx - length) // 2)
        image = apply(M, self.origin)
        if distance(self.origin, image) != length:
            raise ArborError("origin is not on the axis")
        self.segment = geodesic_fast(self.origin, image)
        self._powers: Dict[int, Mat2] = {0: Mat2.identity(), 1: M}
        self._cache: Dict[int, Vertex] = {t: v for t, v in enumerate(self.segment)}

    def _power(self, q: int) -> Mat2:
        M = self._powers.get(q)
        if M is None:
            step = 1 if q > 0 else -1
            if -1 not in self._powers:
                self._powers[-1] = mat_inv(self.matrix)
            M = mat_mul(self._power(q - step), self._powers[step])
            self._powers[q] = M
        return M

    def vertex_at(self, t: int) -> Vertex:
        v = self._cache.get(t)
        if v is None:
            q, r = divmod(t, self.length)
            v = canonicalize(mat_mul(self._power(q), self.segment[r].basis()), self.p)
            self._cache[t] = v
        return v

    def distance_to_axis(self, y: Vertex) -> int:
        return (distance(y, apply(self.matrix, y)) - self.length) // 2

    def project(self, y: Vertex) -> int:
        """Coordinate of the axis vertex closest to y."""
        k = self.distance_to_axis(y)
        r = distance(y, self.origin) - k
        for t in (r, -r):
            if distance(y, self.vertex_at(t)) == k:
                return t
        raise ArborError("projection onto axis not found")

    def coordinate_of(self, w: Vertex) -> int:
        r = distance(w, self.origin)
        for t in (r, -r):
            if self.vertex_at(t) == w:
                return t
        raise ValidationError(f"{w!r} is not on the axis")


def axis_frame(A: Isometry, start: Optional[Vertex] = None) -> AxisFrame:
    return AxisFrame(A, start)


def default_cutoff(lengths: Sequence[int]) -> int:
    return 4 * max(lengths) + 8


def projection_interval(target: AxisFrame, other: AxisFrame, cutoff: Optional[int] = None) -> Tuple[int, int]:
    """Proj of the other axis onto the target axis, as a closed coordinate interval.

    A geodesic segment projects onto the interval between its endpoints'
    projections, so only the sampled endpoints other(-R), other(R) matter.
    R grows by the other's translation length until the interval is the
    same for two consecutive extensions.
    """
    if target.p != other.p:
        raise ValidationError("mixed primes")
    if cutoff is None:
        cutoff = default_cutoff([target.length, other.length])
    step = other.length
    R = step
    history = []
    while True:
        a = target.project(other.vertex_at(-R))
        b = target.project(other.vertex_at(R))
        interval = (min(a, b), max(a, b))
        if interval[1] - interval[0] > cutoff:
            raise OverlapBeyondCutoff(
                f"axes overlap beyond cutoff {cutoff}", lower_bound=interval[1] - interval[0]
            )
        history.append(interval)
        if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
            return interval
        R += step


@dataclass
class PingPongReport:
    status: str  # "pass", "fail" or "indeterminate"
    diagnostics: List[dict]

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self):
        return {"status": self.status, "diagnostics": self.diagnostics}


def check_pingpong(elements: Sequence[Isometry], strict: bool = False, cutoff: Optional[int] = None) -> PingPongReport:
    """Test the tree Ping-Pong hypotheses on a tuple of hyperbolic elements.

    For each axis, the union of projections of all other axes must fit in
    an open segment of length l(g_i): diameter <= l - 1 (or l - 2 with
    ``strict``).
    """
    frames = [AxisFrame(g) for g in elements]
    if cutoff is None:
        cutoff = default_cutoff([f.length for f in frames])
    slack = 2 if strict else 1
    diagnostics = []
    status = "pass"
    for i, fi in enumerate(frames):
        lo, hi = None, None
        try:
            for j, fj in enumerate(frames):
                if i == j:
                    continue
                a, b = projection_interval(fi, fj, cutoff)
                lo = a if lo is None else min(lo, a)
                hi = b if hi is None else max(hi, b)
        except OverlapBeyondCutoff:
            diagnostics.append({"i": i + 1, "l": fi.length, "union_diameter": None, "pass": None})
            status = "indeterminate" if status != "fail" else status
            continue
        diameter = 0 if lo is None else hi - lo
        ok = diameter <= fi.length - slack
        diagnostics.append({"i": i + 1, "l": fi.length, "union_diameter": diameter, "pass": ok})
        if not ok:
            status = "fail"
    return PingPongReport(status, diagnostics)


@dataclass
class MeasuredAxes:
    """Geometric relation between two axes, measured on the tree."""

    kind: str  # "disjoint", "overlap" or "beyond_cutoff"
    distance: int = 0
    delta: int = 0
    same_orientation: Optional[bool] = None
    interval: Optional[Tuple[int, int]] = None  # overlap on the first axis, in its coordinates


def measure_axes(f1: AxisFrame, f2: AxisFrame, cutoff: Optional[int] = None) -> MeasuredAxes:
    try:
        lo, hi = projection_interval(f1, f2, cutoff)
    except OverlapBeyondCutoff:
        # f2's origin projects into the overlap; one of its f1-neighbours is also shared
        t = f1.project(f2.origin)
        same = None
        for s in (1, -1):
            a, b = f1.vertex_at(t), f1.vertex_at(t + s)
            if f2.distance_to_axis(a) == 0 and f2.distance_to_axis(b) == 0:
                same = (f2.coordinate_of(b) > f2.coordinate_of(a)) == (s > 0)
                break
        return MeasuredAxes("beyond_cutoff", same_orientation=same)
    v1 = f1.vertex_at(lo)
    if f2.distance_to_axis(v1) > 0:
        t2 = f2.project(v1)
        return MeasuredAxes("disjoint", distance=distance(v1, f2.vertex_at(t2)), interval=(lo, lo))
    same = None
    if hi > lo:
        same = f2.coordinate_of(f1.vertex_at(hi)) > f2.coordinate_of(v1)
    return MeasuredAxes("overlap", delta=hi - lo, same_orientation=same, interval=(lo, hi))


@dataclass
class ProductPrediction:
    """l(g1 g2) predicted from measured axis geometry."""

    case: str  # "1", "2", "3i", "3ii", "3iii" or "indeterminate"
    length: Optional[int]
    measured: MeasuredAxes
    delta_prime: Optional[int] = None


def predict_product_length(g1: Isometry, g2: Isometry, cutoff: Optional[int] = None) -> ProductPrediction:
    """Measure how the axes of g1, g2 meet and apply the product-length case analysis.

    Opposite orientations with overlap exactly min(l1, l2) need the overlap
    of the shorter element's image of the other axis, measured on the
    conjugate g1 g2 g1^{-1} (or g2 g1 g2^{-1}), whose axis is that image.
    """
    f1, f2 = AxisFrame(g1), AxisFrame(g2)
    l1, l2 = f1.length, f2.length
    if cutoff is None:
        cutoff = default_cutoff([l1, l2])
    m = measure_axes(f1, f2, cutoff)
    if m.kind == "disjoint":
        return ProductPrediction("1", l1 + l2 + 2 * m.distance, m)
    if m.kind == "overlap" and m.delta == 0:
        return ProductPrediction("2", l1 + l2, m)
    if m.same_orientation is None:
        return ProductPrediction("indeterminate", None, m)
    if m.same_orientation:
        return ProductPrediction("2", l1 + l2, m)
    low = min(l1, l2)
    if m.kind == "overlap" and m.delta < low:
        return ProductPrediction("3i", l1 + l2 - 2 * m.delta, m)
    if m.kind == "beyond_cutoff" or m.delta > low:
        return ProductPrediction("3ii", abs(l1 - l2), m)
    if l1 <= l2:
        base, conj = f2, AxisFrame(g1 @ g2 @ g1.inverse())
    else:
        base, conj = f1, AxisFrame(g2 @ g1 @ g2.inverse())
    m2 = measure_axes(base, conj, cutoff)
    half = abs(l1 - l2)
    if m2.kind == "beyond_cutoff":
        return ProductPrediction("3iii", 0, m, delta_prime=None)
    dp = m2.delta if m2.kind == "overlap" else 0
    if m2.kind == "disjoint":
        raise ArborError("shifted axis does not meet the original axis")
    length = half - 2 * dp if 2 * dp < half else 0
    return ProductPrediction("3iii", length, m, delta_prime=dp)


def elliptic_product_offset(g1: Isometry, g2: Isometry, cutoff: Optional[int] = None) -> Tuple[Vertex, Vertex, int]:
    """(q, fixed vertex of g1 g2 nearest q, their distance) for hyperbolic g1, g2 with elliptic product.

    The axes meet with opposite orientations along [p, q], where g1
    translates p towards q; in g1's axis coordinates q is the upper end.
    """
    f1, f2 = AxisFrame(g1), AxisFrame(g2)
    _, hi = projection_interval(f1, f2, cutoff)
    q = f1.vertex_at(hi)
    fv = fixed_vertex(g1 @ g2, start=q)
    return q, fv, distance(q, fv)
