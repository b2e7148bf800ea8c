"""
Bands in R^3 and their regular homotopy calculus.

Geometry is exact: points, framings and rotations are Fractions. The
linking number of two closed polygons is half the signed count of their
crossings in a projection along +z; a crossing counts +1 when (over
tangent, under tangent, +z) is right-handed. Projections that are not
generic are retried after small rational rotations from a fixed schedule.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from .dependencies import DomainError, get_context
from .gf2 import BitVector
from .homology import cohomology_class
from .schemas import BandRelation, Parity
from .triangulation import Triangulation

logger = logging.getLogger(__name__)

Point = Tuple[Fraction, Fraction, Fraction]
Matrix3 = Tuple[Point, Point, Point]

MAX_PROJECTION_RETRIES = 24
MODEL_NAMES = {0: "S0", 1: "S1", 2: "S2", 3: "S-1"}


class BandError(DomainError):
    """Invalid knot data, intersecting curves or offsets that collide"""


class DegenerateProjection(BandError):
    """No generic projection among the tried directions"""


# vectors

def _vec(p) -> Point:
    return (Fraction(p[0]), Fraction(p[1]), Fraction(p[2]))


def _add(a: Point, b: Point) -> Point:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _scale(t, a: Point) -> Point:
    return (t * a[0], t * a[1], t * a[2])


def _dot(a: Point, b: Point) -> Fraction:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a: Point, b: Point) -> Point:
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _is_zero(a: Point) -> bool:
    return a[0] == 0 and a[1] == 0 and a[2] == 0


def _point_segment_sq(p: Point, a: Point, b: Point) -> Fraction:
    ab = _sub(b, a)
    t = _dot(_sub(p, a), ab) / _dot(ab, ab)
    t = min(max(t, Fraction(0)), Fraction(1))
    q = _add(a, _scale(t, ab))
    d = _sub(p, q)
    return _dot(d, d)


def segment_distance_sq(a: Point, b: Point, c: Point, d: Point) -> Fraction:
    """Exact squared distance between segments ab and cd"""
    u, v, w = _sub(b, a), _sub(d, c), _sub(a, c)
    best = min(_point_segment_sq(a, c, d), _point_segment_sq(b, c, d),
               _point_segment_sq(c, a, b), _point_segment_sq(d, a, b))
    uu, uv, vv, uw, vw = _dot(u, u), _dot(u, v), _dot(v, v), _dot(u, w), _dot(v, w)
    den = uu * vv - uv * uv
    if den != 0:
        s = (uv * vw - vv * uw) / den
        t = (uu * vw - uv * uw) / den
        if 0 < s < 1 and 0 < t < 1:
            gap = _sub(_add(a, _scale(s, u)), _add(c, _scale(t, v)))
            best = min(best, _dot(gap, gap))
    return best


def _bbox(a: Point, b: Point) -> Tuple[Point, Point]:
    return (tuple(min(x, y) for x, y in zip(a, b)), tuple(max(x, y) for x, y in zip(a, b)))


def _bbox_gap_sq(box1, box2) -> Fraction:
    gap = Fraction(0)
    for k in range(3):
        delta = max(box1[0][k] - box2[1][k], box2[0][k] - box1[1][k], Fraction(0))
        gap += delta * delta
    return gap


def _segments(curve: Sequence[Point]) -> List[Tuple[Point, Point]]:
    return [(curve[i], curve[(i + 1) % len(curve)]) for i in range(len(curve))]


def _check_polygon(curve: Sequence[Point], what: str) -> None:
    n = len(curve)
    if n < 3:
        raise BandError(f"{what} needs at least 3 vertices, got {n}")
    segs = _segments(curve)
    for i, (a, b) in enumerate(segs):
        if a == b:
            raise BandError(f"{what} repeats vertex {i}")
    for i in range(n):
        u = _sub(segs[i][1], segs[i][0])
        v = _sub(segs[(i + 1) % n][1], segs[(i + 1) % n][0])
        if _is_zero(_cross(u, v)) and _dot(u, v) < 0:
            raise BandError(f"{what} folds back on itself at vertex {(i + 1) % n}")
    boxes = [_bbox(a, b) for a, b in segs]
    for i, j in itertools.combinations(range(n), 2):
        if j == i + 1 or (i == 0 and j == n - 1):
            continue
        if _bbox_gap_sq(boxes[i], boxes[j]) > 0:
            continue
        if segment_distance_sq(*segs[i], *segs[j]) == 0:
            raise BandError(f"{what} intersects itself between segments {i} and {j}")


def _check_disjoint(c1: Sequence[Point], c2: Sequence[Point]) -> None:
    s1, s2 = _segments(c1), _segments(c2)
    boxes2 = [_bbox(a, b) for a, b in s2]
    for i, (a, b) in enumerate(s1):
        box = _bbox(a, b)
        for j, (c, d) in enumerate(s2):
            if _bbox_gap_sq(box, boxes2[j]) > 0:
                continue
            if segment_distance_sq(a, b, c, d) == 0:
                raise BandError(f"curves intersect (segments {i} and {j})")


# knots

@dataclass(frozen=True)
class FramedPLKnot:
    points: Tuple[Point, ...]
    framing: Tuple[Point, ...]
    return_sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(_vec(p) for p in self.points))
        object.__setattr__(self, "framing", tuple(_vec(f) for f in self.framing))
        if self.return_sign not in (1, -1):
            raise BandError(f"return sign must be +1 or -1, got {self.return_sign}")
        if len(self.framing) != len(self.points):
            raise BandError(f"{len(self.points)} points but {len(self.framing)} framing vectors")
        _check_polygon(self.points, "core")
        n = len(self.points)
        for i, f in enumerate(self.framing):
            if _is_zero(f):
                raise BandError(f"framing vector {i} is zero")
            for seg in ((self.points[i - 1], self.points[i]), (self.points[i], self.points[(i + 1) % n])):
                if _is_zero(_cross(f, _sub(seg[1], seg[0]))):
                    raise BandError(f"framing vector {i} is tangent to an incident segment")

    @property
    def mobius(self) -> bool:
        return self.return_sign == -1

    def __len__(self) -> int:
        return len(self.points)


def mirror(k: FramedPLKnot) -> FramedPLKnot:
    """Reflection in the plane z = 0"""
    return FramedPLKnot(
        tuple((p[0], p[1], -p[2]) for p in k.points),
        tuple((f[0], f[1], -f[2]) for f in k.framing),
        k.return_sign,
    )


def _rational(x: float, denominator: int = 1000) -> Fraction:
    return Fraction(round(x * denominator), denominator)


def twisted_circle(k: int, segments: Optional[int] = None) -> FramedPLKnot:
    """
    Round circle in the xy-plane with a framing that turns k half turns,
    right-handed about the tangent for k > 0. The framing at angle theta is
    cos(phi) z + sin(phi) r with phi = k * theta / 2.
    """
    n = segments or 6 * abs(k) + 8
    if n < 4 * abs(k) + 4:
        raise BandError(f"{n} segments are too few for {k} half twists")
    points, framing = [], []
    for i in range(n):
        theta = 2 * math.pi * i / n
        phi = k * math.pi * i / n
        p = (_rational(math.cos(theta)), _rational(math.sin(theta)), Fraction(0))
        c, s = _rational(math.cos(phi)), _rational(math.sin(phi))
        points.append(p)
        framing.append((s * p[0], s * p[1], c))
    return FramedPLKnot(tuple(points), tuple(framing), -1 if k % 2 else 1)


def _min_nonadjacent_sq(curve: Sequence[Point]) -> Fraction:
    segs = _segments(curve)
    n = len(segs)
    boxes = [_bbox(a, b) for a, b in segs]
    best: Optional[Fraction] = None
    for i, j in itertools.combinations(range(n), 2):
        if j == i + 1 or (i == 0 and j == n - 1):
            continue
        if best is not None and _bbox_gap_sq(boxes[i], boxes[j]) >= best:
            continue
        dist = segment_distance_sq(*segs[i], *segs[j])
        if best is None or dist < best:
            best = dist
    if best is None:
        # a triangle has no non-adjacent pairs; fall back to the shortest edge
        best = min(_dot(_sub(b, a), _sub(b, a)) for a, b in segs)
    return best


def default_epsilon(k: FramedPLKnot) -> Fraction:
    """Largest power of 1/2 with eps^2 * max|f|^2 <= D^2 / 16 (D: minimum feature size)."""
    limit = _min_nonadjacent_sq(k.points) / 16
    fmax = max(_dot(f, f) for f in k.framing)
    eps = Fraction(1)
    while eps * eps * fmax > limit:
        eps /= 2
    return eps


def boundary_curves(k: FramedPLKnot, epsilon: Optional[Fraction] = None) -> List[Tuple[Point, ...]]:
    """
    core +- eps * framing, oriented like the core: two curves for an
    annulus, one curve of doubled length for a Mobius band.
    """
    eps = default_epsilon(k) if epsilon is None else Fraction(epsilon)
    if eps <= 0:
        raise BandError(f"offset must be positive, got {eps}")
    plus = tuple(_add(p, _scale(eps, f)) for p, f in zip(k.points, k.framing))
    minus = tuple(_sub(p, _scale(eps, f)) for p, f in zip(k.points, k.framing))
    curves = [plus, minus] if k.return_sign == 1 else [plus + minus]
    try:
        for c in curves:
            _check_polygon(c, "offset curve")
            _check_disjoint(k.points, c)
        if len(curves) == 2:
            _check_disjoint(plus, minus)
    except BandError as exc:
        raise BandError(f"offset {eps} too large: {exc}") from exc
    return curves


# projection and linking

def rational_rotation(tx=0, ty=0, tz=0) -> Matrix3:
    """Rz * Ry * Rx with each angle given by the tangent of its half angle."""

    def cs(t):
        t = Fraction(t)
        return (1 - t * t) / (1 + t * t), 2 * t / (1 + t * t)

    cx, sx = cs(tx)
    cy, sy = cs(ty)
    cz, sz = cs(tz)
    one, zero = Fraction(1), Fraction(0)
    rx = ((one, zero, zero), (zero, cx, -sx), (zero, sx, cx))
    ry = ((cy, zero, sy), (zero, one, zero), (-sy, zero, cy))
    rz = ((cz, -sz, zero), (sz, cz, zero), (zero, zero, one))
    return _matmul(rz, _matmul(ry, rx))


def _matmul(a: Matrix3, b: Matrix3) -> Matrix3:
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)) for i in range(3))


def _rotate(m: Matrix3, p: Point) -> Point:
    return tuple(_dot(m[i], p) for i in range(3))


def projection_schedule() -> List[Matrix3]:
    """Identity first, then small rational tilts"""
    schedule = [rational_rotation()]
    for i in range(MAX_PROJECTION_RETRIES):
        schedule.append(rational_rotation(Fraction(1, 7 + 4 * i), Fraction(1, 11 + 6 * i), Fraction(i, 5 + i)))
    return schedule


def _cross2(u, v) -> Fraction:
    return u[0] * v[1] - u[1] * v[0]


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _crossing_sum(c1: Sequence[Point], c2: Sequence[Point]) -> int:
    """Signed crossings between two projected curves; raises DegenerateProjection."""
    s1, s2 = _segments(c1), _segments(c2)
    boxes2 = [((min(c[0], d[0]), min(c[1], d[1])), (max(c[0], d[0]), max(c[1], d[1]))) for c, d in s2]
    crossings = set()
    total = 0
    for a, b in s1:
        r = (b[0] - a[0], b[1] - a[1])
        if r == (0, 0):
            raise DegenerateProjection("a segment projects to a point")
        lo = (min(a[0], b[0]), min(a[1], b[1]))
        hi = (max(a[0], b[0]), max(a[1], b[1]))
        for (c, d), (blo, bhi) in zip(s2, boxes2):
            if lo[0] > bhi[0] or blo[0] > hi[0] or lo[1] > bhi[1] or blo[1] > hi[1]:
                continue
            s = (d[0] - c[0], d[1] - c[1])
            if s == (0, 0):
                raise DegenerateProjection("a segment projects to a point")
            den = _cross2(r, s)
            ca = (c[0] - a[0], c[1] - a[1])
            if den == 0:
                if _cross2(ca, r) == 0:
                    raise DegenerateProjection("collinear projected segments")
                continue
            t = _cross2(ca, s) / den
            u = _cross2(ca, r) / den
            if t < 0 or t > 1 or u < 0 or u > 1:
                continue
            if t in (0, 1) or u in (0, 1):
                raise DegenerateProjection("a vertex projects onto a crossing")
            point = (a[0] + t * r[0], a[1] + t * r[1])
            if point in crossings:
                raise DegenerateProjection("two crossings coincide")
            crossings.add(point)
            z1 = a[2] + t * (b[2] - a[2])
            z2 = c[2] + u * (d[2] - c[2])
            if z1 == z2:
                raise DegenerateProjection("curves meet at a crossing")
            total += _sign(den) if z1 > z2 else -_sign(den)
    return total


def linking_number(c1: Sequence[Sequence], c2: Sequence[Sequence], rotation: Optional[Matrix3] = None) -> int:
    """Half the signed crossing count of c1 with c2; both curves closed polygons."""
    p1 = tuple(_vec(p) for p in c1)
    p2 = tuple(_vec(p) for p in c2)
    for c in (p1, p2):
        if len(c) < 3:
            raise BandError("closed curves need at least 3 vertices")
    _check_disjoint(p1, p2)

    candidates = [rotation] if rotation is not None else projection_schedule()
    for attempt, m in enumerate(candidates):
        r1 = [_rotate(m, p) for p in p1]
        r2 = [_rotate(m, p) for p in p2]
        try:
            total = _crossing_sum(r1, r2)
        except DegenerateProjection as exc:
            logger.debug(f"Projection {attempt} not generic: {exc}")
            continue
        if total % 2:
            raise BandError(f"odd crossing sum {total}; curves are not closed")
        if attempt:
            logger.debug(f"Generic projection found after {attempt} retries")
        return total // 2
    raise DegenerateProjection(f"no generic projection among {len(candidates)} directions")


def half_twists(k: FramedPLKnot, epsilon: Optional[Fraction] = None) -> int:
    """Linking number of the core with its coherently oriented boundary"""
    total = sum(linking_number(k.points, c) for c in boundary_curves(k, epsilon))
    if (total % 2 == 1) != k.mobius:
        raise BandError(f"half twist count {total} disagrees with the return sign {k.return_sign}")
    return total


def half_twists_mod4(k: FramedPLKnot, epsilon: Optional[Fraction] = None) -> int:
    return half_twists(k, epsilon) % 4


# band models

@dataclass(frozen=True)
class BandFlags:
    core_orientable_in_m: bool
    odd_self_homotopy: bool
    ambient_orientable: bool = False

    def __post_init__(self):
        if self.odd_self_homotopy and self.ambient_orientable:
            raise BandError("odd self-homotopies need a non-orientable ambient manifold")
        if self.ambient_orientable and not self.core_orientable_in_m:
            raise BandError("every core preserves orientation in an orientable ambient manifold")


@dataclass(frozen=True)
class BandModel:
    twist: int
    flags: BandFlags

    @property
    def mobius(self) -> bool:
        return self.twist % 2 == 1


class BandClassification(NamedTuple):
    class_count: int
    classes: List[List[str]]
    reparametrized: List[List[str]]


def add_half_twists(model: BandModel, k: int) -> BandModel:
    """Add k local half twists"""
    return BandModel(model.twist + k, model.flags)


def reduce_model(model: BandModel) -> str:
    """The model among S-1, S0, S1, S2 with the same twist mod 4"""
    return MODEL_NAMES[model.twist % 4]


def classify_bands(flags: BandFlags) -> BandClassification:
    if not flags.core_orientable_in_m:
        return BandClassification(3, [["S0"], ["S2"], ["S1", "S-1"]], [["S0", "S2"]])
    if flags.odd_self_homotopy:
        return BandClassification(3, [["S0"], ["S2"], ["S1", "S-1"]], [])
    return BandClassification(4, [["S0"], ["S1"], ["S2"], ["S-1"]], [])


def bands_equivalent(m1: BandModel, m2: BandModel) -> BandRelation:
    if m1.flags != m2.flags:
        raise BandError("bands with different flags cannot be compared")
    if m1.mobius != m2.mobius:
        return BandRelation.INCOMPARABLE
    a, b = reduce_model(m1), reduce_model(m2)
    classification = classify_bands(m1.flags)
    for group in classification.classes:
        if a in group and b in group:
            return BandRelation.EQUIVALENT
    for group in classification.reparametrized:
        if a in group and b in group:
            return BandRelation.EQUIVALENT_UP_TO_REPARAMETRIZATION
    return BandRelation.INEQUIVALENT


# kink action

class KinkIsotropy(NamedTuple):
    subgroup: List[BitVector]
    class_count: int
    w1: BitVector


def kink_isotropy(F: Triangulation, parity: Parity) -> KinkIsotropy:
    """
    Isotropy of the kink action of H^1(F) on regular homotopy classes of a surface.

    w1 is the class of the local-orientation transport cocycle from
    triangulation.w1_cochain. It vanishes exactly when the orientation double
    cover splits into two sheets.
    """
    if F.dim != 2:
        raise BandError(f"kink isotropy needs a surface, got dimension {F.dim}")
    ctx = get_context(F)
    parity = Parity(parity)
    b1 = len(ctx.cobases[1])
    w1 = cohomology_class(ctx, 1, ctx.w1_cochain)
    zero = BitVector.zeros(b1)
    if parity == Parity.EVEN:
        return KinkIsotropy([zero], 1 << b1, w1)
    if ctx.orientable:
        raise BandError(f"odd classes exist only on non-orientable surfaces; {ctx.triangulation.label} is orientable")
    if w1.is_zero():
        raise BandError("w1 of a non-orientable surface vanished; the surface data is inconsistent")
    return KinkIsotropy([zero, w1], 1 << (b1 - 1), w1)


# figure X bundles

X_BUNDLE_TABLE: Dict[Tuple[int, int, int, int], int] = {
    (1, 2, 3, 4): 0,
    (2, 3, 4, 1): 1,
    (3, 4, 1, 2): 2,
    (4, 1, 2, 3): 3,
    (2, 1, 4, 3): 4,
    (1, 4, 3, 2): 5,
    (4, 3, 2, 1): 6,
    (3, 2, 1, 4): 7,
}

FIBER8 = {
    0: ("torus", "solid torus"),
    2: ("Klein bottle", "solid torus"),
    4: ("torus", "solid Klein bottle"),
    6: ("Klein bottle", "solid Klein bottle"),
}


class XBundleClass(NamedTuple):
    index: int
    orientable: bool
    fiber8: Optional[Tuple[str, str]]


def x_bundle_elements() -> List[Tuple[int, int, int, int]]:
    """The symmetries of the figure X, ordered by bundle index"""
    return sorted(X_BUNDLE_TABLE, key=X_BUNDLE_TABLE.get)


def preserves_figure8(perm: Sequence[int]) -> bool:
    image = {frozenset((perm[0], perm[3])), frozenset((perm[1], perm[2]))}
    return image == {frozenset((1, 4)), frozenset((2, 3))}


def classify_x_bundle(perm: Sequence[int]) -> XBundleClass:
    key = tuple(int(v) for v in perm)
    if key not in X_BUNDLE_TABLE:
        raise BandError(f"{list(key)} is not a symmetry of the figure X")
    index = X_BUNDLE_TABLE[key]
    return XBundleClass(index, index <= 3, FIBER8.get(index))


def structure_group(index: int) -> List[Tuple[int, int, int, int]]:
    """The cyclic group generated by the monodromy of bundle `index`"""
    generators = x_bundle_elements()
    if not 0 <= index < len(generators):
        raise BandError(f"bundle index must be in 0..7, got {index}")
    g = generators[index]
    group = [(1, 2, 3, 4)]
    current = g
    while current != (1, 2, 3, 4):
        group.append(current)
        current = tuple(g[v - 1] for v in current)
    return sorted(group)
