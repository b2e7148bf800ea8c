"""
Mod-2 simplicial homology and cohomology of a triangulated closed manifold.

Cup and cap products use the global vertex order: a simplex [v0 ... vd]
has front k-face [v0 ... vk] and back face [vk ... vd]. The fundamental
cycle is the sum of all top simplices, which is a cycle mod 2 whether or
not the manifold is orientable.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .dependencies import DomainError
from .gf2 import BitMatrix, BitVector, GF2Error, kernel_basis, quotient_basis, solve
from .telemetry import create_span
from .triangulation import Simplex, Triangulation, is_orientable, validate, w1_cochain

logger = logging.getLogger(__name__)


class HomologyError(DomainError):
    """Non-cycle input, context mismatch or failed duality"""


@dataclass(frozen=True)
class ChainComplexMod2:
    simplices: Tuple[Tuple[Simplex, ...], ...]
    boundaries: Tuple[BitMatrix, ...]

    @classmethod
    def from_triangulation(cls, T: Triangulation) -> "ChainComplexMod2":
        simplices = T.skeleton
        index = T.face_index
        boundaries = [BitMatrix.zeros(0, len(simplices[0]))]
        for k in range(1, T.dim + 1):
            arr = np.zeros((len(simplices[k - 1]), len(simplices[k])), dtype=np.uint8)
            for j, s in enumerate(simplices[k]):
                for p in range(len(s)):
                    arr[index[k - 1][s[:p] + s[p + 1:]], j] = 1
            boundaries.append(BitMatrix(arr))
        return cls(simplices, tuple(boundaries))

    @property
    def dim(self) -> int:
        return len(self.simplices) - 1

    def size(self, k: int) -> int:
        return len(self.simplices[k])

    def boundary(self, k: int, chain: BitVector) -> BitVector:
        if chain.length != self.size(k):
            raise HomologyError(f"{k}-chain has length {chain.length}, expected {self.size(k)}")
        return self.boundaries[k] @ chain

    def coboundary(self, k: int, cochain: BitVector) -> BitVector:
        if cochain.length != self.size(k):
            raise HomologyError(f"{k}-cochain has length {cochain.length}, expected {self.size(k)}")
        if k == self.dim:
            return BitVector([])
        return self.boundaries[k + 1].T @ cochain

    def chain(self, k: int, simplices: Sequence[Sequence[int]]) -> BitVector:
        lookup = {s: i for i, s in enumerate(self.simplices[k])}
        indices = []
        for s in simplices:
            key = tuple(sorted(s))
            if key not in lookup:
                raise HomologyError(f"{list(key)} is not a {k}-simplex of the complex")
            indices.append(lookup[key])
        return BitVector.from_indices(self.size(k), indices)

    def simplices_of(self, k: int, chain: BitVector) -> List[Simplex]:
        return [self.simplices[k][i] for i in chain.support()]


@dataclass(frozen=True)
class HomologyClass:
    dimension: int
    coords: BitVector
    context_hash: str

    def __add__(self, other: "HomologyClass") -> "HomologyClass":
        _same_space(self, other)
        return HomologyClass(self.dimension, self.coords + other.coords, self.context_hash)

    def is_zero(self) -> bool:
        return self.coords.is_zero()

    def __repr__(self) -> str:
        return f"H{self.dimension}[{self.coords.to_string()}]"


def _same_space(a: HomologyClass, b: HomologyClass) -> None:
    if a.context_hash != b.context_hash:
        raise HomologyError(f"classes belong to different manifolds ({a.context_hash} vs {b.context_hash})")
    if a.dimension != b.dimension:
        raise HomologyError(f"cannot combine H{a.dimension} and H{b.dimension} classes")


@dataclass(frozen=True)
class HomologyContext:
    triangulation: Triangulation
    complex: ChainComplexMod2
    bases: Tuple[Tuple[BitVector, ...], ...]
    cobases: Tuple[Tuple[BitVector, ...], ...]
    fundamental_cycle: BitVector
    w1_cochain: BitVector
    w1_vector: BitVector
    orientable: bool
    context_hash: str
    pairing_table: Optional[Tuple[Tuple[BitVector, ...], ...]] = None
    coords: Tuple[Callable[[BitVector], BitVector], ...] = field(default=(), repr=False, compare=False)
    cocoords: Tuple[Callable[[BitVector], BitVector], ...] = field(default=(), repr=False, compare=False)
    front: Tuple[np.ndarray, ...] = field(default=(), repr=False, compare=False)
    back: Tuple[np.ndarray, ...] = field(default=(), repr=False, compare=False)
    duality: Tuple[BitMatrix, ...] = field(default=(), repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.triangulation.dim

    @property
    def betti(self) -> Tuple[int, ...]:
        return tuple(len(b) for b in self.bases)

    def zero(self, k: int) -> HomologyClass:
        return HomologyClass(k, BitVector.zeros(self.betti[k]), self.context_hash)

    def basis_class(self, k: int, i: int) -> HomologyClass:
        return HomologyClass(k, BitVector.from_indices(self.betti[k], [i]), self.context_hash)

    def classes(self, k: int) -> List[HomologyClass]:
        """All classes of H_k in lexicographic coordinate order"""
        b = self.betti[k]
        return [HomologyClass(k, BitVector.from_int(mask, b), self.context_hash) for mask in range(1 << b)]

    def with_pairing_table(self, table: Sequence[Sequence[BitVector]]) -> "HomologyContext":
        """A copy answering intersect_H2 from the given table (used to corrupt the law in tests)."""
        return dataclasses.replace(self, pairing_table=tuple(tuple(row) for row in table))


def _front_back(T: Triangulation) -> Tuple[Tuple[np.ndarray, ...], Tuple[np.ndarray, ...]]:
    index = T.face_index
    fronts, backs = [], []
    for k in range(T.dim + 1):
        fronts.append(np.array([index[k][s[:k + 1]] for s in T.top_simplices], dtype=np.int64))
        backs.append(np.array([index[T.dim - k][s[k:]] for s in T.top_simplices], dtype=np.int64))
    return tuple(fronts), tuple(backs)


def build_context(T: Triangulation) -> HomologyContext:
    report = validate(T)
    if not report.valid:
        raise HomologyError(f"cannot build homology of invalid triangulation {T.label}: {report.issues[0].message}")

    with create_span("homology.build_context", {"manifold": T.label, "dim": T.dim}):
        cx = ChainComplexMod2.from_triangulation(T)
        d = T.dim
        bases, coords, cobases, cocoords = [], [], [], []
        for k in range(d + 1):
            n_k = cx.size(k)
            cycles = kernel_basis(cx.boundaries[k])
            bnds = cx.boundaries[k + 1].columns() if k < d else []
            q = quotient_basis(cycles, bnds, length=n_k)
            bases.append(tuple(q.basis))
            coords.append(q.coords)

            cocycles = kernel_basis(cx.boundaries[k + 1].T) if k < d else kernel_basis(BitMatrix.zeros(0, n_k))
            cobnds = cx.boundaries[k].T.columns() if k > 0 else []
            cq = quotient_basis(cocycles, cobnds, length=n_k)
            cobases.append(tuple(cq.basis))
            cocoords.append(cq.coords)

        fundamental = BitVector([1] * cx.size(d))
        if not cx.boundary(d, fundamental).is_zero():
            raise HomologyError(f"sum of top simplices of {T.label} is not a cycle")

        w1 = w1_cochain(T)
        w1_vector = BitVector([w1.dot(z) for z in bases[1]])
        fronts, backs = _front_back(T)

        ctx = HomologyContext(
            triangulation=T,
            complex=cx,
            bases=tuple(bases),
            cobases=tuple(cobases),
            fundamental_cycle=fundamental,
            w1_cochain=w1,
            w1_vector=w1_vector,
            orientable=is_orientable(T),
            context_hash=T.context_hash,
            coords=tuple(coords),
            cocoords=tuple(cocoords),
            front=fronts,
            back=backs,
        )
        ctx = dataclasses.replace(ctx, duality=tuple(_duality_matrix(ctx, k) for k in range(d + 1)))
        if d == 3:
            ctx = dataclasses.replace(ctx, pairing_table=_pairing_table(ctx))

    logger.info(f"Built homology of {T.label}: betti={ctx.betti}, orientable={ctx.orientable}")
    return ctx


def _duality_matrix(ctx: HomologyContext, k: int) -> BitMatrix:
    """Columns are H_(d-k) coordinates of the cap products of the H^k cobasis."""
    d = ctx.dim
    columns = [ctx.coords[d - k](cap_fundamental(ctx, alpha, k)) for alpha in ctx.cobases[k]]
    return BitMatrix.from_columns(columns, ctx.betti[d - k])


def _pairing_table(ctx: HomologyContext) -> Tuple[Tuple[BitVector, ...], ...]:
    b2 = ctx.betti[2]
    duals = [cocycle_from_coords(ctx, 1, pd_inverse_H2(ctx, ctx.basis_class(2, i))) for i in range(b2)]
    table = []
    for i in range(b2):
        row = []
        for j in range(b2):
            chain = cap_fundamental(ctx, cup11(ctx, duals[i], duals[j]), 2)
            row.append(ctx.coords[1](chain))
        table.append(tuple(row))
    return tuple(table)


def class_of_cycle(ctx: HomologyContext, k: int, chain: BitVector) -> HomologyClass:
    if not 0 <= k <= ctx.dim:
        raise HomologyError(f"no homology in degree {k}")
    if chain.length != ctx.complex.size(k):
        raise HomologyError(f"{k}-chain has length {chain.length}, expected {ctx.complex.size(k)}")
    if not ctx.complex.boundary(k, chain).is_zero():
        raise HomologyError(f"{k}-chain is not a cycle")
    try:
        coords = ctx.coords[k](chain)
    except GF2Error as exc:
        raise HomologyError(f"{k}-cycle could not be expressed in the homology basis") from exc
    return HomologyClass(k, coords, ctx.context_hash)


def cohomology_class(ctx: HomologyContext, k: int, cochain: BitVector) -> BitVector:
    """Coordinates of a k-cocycle in the H^k cobasis"""
    if not 0 <= k <= ctx.dim:
        raise HomologyError(f"no cohomology in degree {k}")
    if cochain.length != ctx.complex.size(k):
        raise HomologyError(f"{k}-cochain has length {cochain.length}, expected {ctx.complex.size(k)}")
    if not ctx.complex.coboundary(k, cochain).is_zero():
        raise HomologyError(f"{k}-cochain is not a cocycle")
    return ctx.cocoords[k](cochain)


def representative(ctx: HomologyContext, cls: HomologyClass) -> BitVector:
    """The basis combination representing a class"""
    _check_class(ctx, cls)
    return sum((ctx.bases[cls.dimension][i] for i in cls.coords.support()), BitVector.zeros(ctx.complex.size(cls.dimension)))


def cocycle_from_coords(ctx: HomologyContext, k: int, coords: BitVector) -> BitVector:
    if coords.length != len(ctx.cobases[k]):
        raise HomologyError(f"H^{k} coordinates have length {coords.length}, expected {len(ctx.cobases[k])}")
    return sum((ctx.cobases[k][i] for i in coords.support()), BitVector.zeros(ctx.complex.size(k)))


def kronecker_matrix(ctx: HomologyContext, k: int) -> BitMatrix:
    """Evaluation of the H^k cobasis on the H_k basis"""
    values = [[alpha.dot(z) for z in ctx.bases[k]] for alpha in ctx.cobases[k]]
    return BitMatrix(np.array(values, dtype=np.uint8).reshape(len(ctx.cobases[k]), len(ctx.bases[k])))


def cup(ctx: HomologyContext, alpha: BitVector, p: int, beta: BitVector, q: int) -> BitVector:
    """Cup product of a p-cochain and a q-cochain on (p+q)-simplices"""
    cx = ctx.complex
    if p + q > ctx.dim:
        raise HomologyError(f"cup degree {p + q} exceeds dimension {ctx.dim}")
    if alpha.length != cx.size(p) or beta.length != cx.size(q):
        raise HomologyError("cochain lengths do not match the complex")
    target = cx.simplices[p + q]
    index_p = ctx.triangulation.face_index[p]
    index_q = ctx.triangulation.face_index[q]
    front = np.array([index_p[s[:p + 1]] for s in target], dtype=np.int64)
    back = np.array([index_q[s[p:]] for s in target], dtype=np.int64)
    return BitVector(alpha.bits[front] & beta.bits[back])


def cup11(ctx: HomologyContext, alpha: BitVector, beta: BitVector) -> BitVector:
    return cup(ctx, alpha, 1, beta, 1)


def cap_fundamental(ctx: HomologyContext, alpha: BitVector, k: int) -> BitVector:
    """Cap of a k-cochain with the fundamental cycle: each top simplex adds alpha(front) times its back face."""
    if not 0 <= k <= ctx.dim:
        raise HomologyError(f"no cochains in degree {k}")
    if alpha.length != ctx.complex.size(k):
        raise HomologyError(f"{k}-cochain has length {alpha.length}, expected {ctx.complex.size(k)}")
    out = np.zeros(ctx.complex.size(ctx.dim - k), dtype=np.uint8)
    np.bitwise_xor.at(out, ctx.back[k], alpha.bits[ctx.front[k]])
    return BitVector(out)


def pd_inverse_H2(ctx: HomologyContext, H: HomologyClass) -> BitVector:
    """H^1 coordinates of the class whose cap with the fundamental cycle is H."""
    _check_class(ctx, H, 2)
    if ctx.dim != 3:
        raise HomologyError("H2 duality needs a 3-manifold")
    x = solve(ctx.duality[1], H.coords)
    if x is None:
        raise HomologyError(f"class {H} has no Poincare dual; the duality map is not onto")
    return x


def intersect_H2(ctx: HomologyContext, H: HomologyClass, H2: HomologyClass) -> HomologyClass:
    _check_class(ctx, H, 2)
    _check_class(ctx, H2, 2)
    if ctx.pairing_table is None:
        raise HomologyError("intersection pairing needs a 3-manifold")
    acc = BitVector.zeros(ctx.betti[1])
    for i in H.coords.support():
        for j in H2.coords.support():
            acc = acc + ctx.pairing_table[i][j]
    return HomologyClass(1, acc, ctx.context_hash)


def intersection_cycle(ctx: HomologyContext, H: HomologyClass, H2: HomologyClass) -> BitVector:
    """Chain-level intersection of two H2 classes, computed without the table."""
    a = cocycle_from_coords(ctx, 1, pd_inverse_H2(ctx, H))
    b = cocycle_from_coords(ctx, 1, pd_inverse_H2(ctx, H2))
    return cap_fundamental(ctx, cup11(ctx, a, b), 2)


def evaluate_w1(ctx: HomologyContext, delta: HomologyClass) -> int:
    _check_class(ctx, delta, 1)
    return delta.coords.dot(ctx.w1_vector)


def _check_class(ctx: HomologyContext, cls: HomologyClass, k: Optional[int] = None) -> None:
    if cls.context_hash != ctx.context_hash:
        raise HomologyError(f"class belongs to manifold {cls.context_hash}, not {ctx.context_hash}")
    if k is not None and cls.dimension != k:
        raise HomologyError(f"expected an H{k} class, got H{cls.dimension}")
    if cls.coords.length != ctx.betti[cls.dimension]:
        raise HomologyError(f"H{cls.dimension} coordinates have length {cls.coords.length}, expected {ctx.betti[cls.dimension]}")

