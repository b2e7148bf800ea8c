"""
Chain-level immersion data and the total invariant psi.

An immersion is represented by the 2-cycle carried by its image, the
1-cycle of its double points and the integer n (the Euler characteristic
mod 2 of the source surface, or the Z/8 residue of its ball components in
the orientable variant). Geometric maps are never meshed.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

from .cobordgroup import CobordismElement, CobordismGroup
from .dependencies import DomainError
from .gf2 import BitVector, solve
from .homology import (
    HomologyContext,
    HomologyError,
    class_of_cycle,
    evaluate_w1,
    intersect_H2,
    representative,
)
from .schemas import ComponentKind, ComponentModel

logger = logging.getLogger(__name__)

TORUS = "torus"
KLEIN_BOTTLE = "Klein bottle"
BOY_SURFACE = "RP2 (Boy)"
NOISE_SIMPLICES = 3


class ImmersionError(DomainError):
    """Non-cycle data, overlapping supports or a group without a manifold"""


@dataclass(frozen=True)
class ImmersionComponent:
    kind: ComponentKind
    surface: Optional[str] = None
    n_share: int = 0

    def to_model(self) -> ComponentModel:
        return ComponentModel(kind=self.kind, surface=self.surface, n_share=self.n_share)


@dataclass(frozen=True)
class ImmersionData:
    image_chain: BitVector
    double_locus: BitVector
    n: int = 0
    label: str = ""
    components: Tuple[ImmersionComponent, ...] = field(default=(), compare=False)

    @property
    def chi_mod2(self) -> int:
        return self.n % 2


class Decomposition(NamedTuple):
    embedding: ImmersionData
    kinked_tube: ImmersionData
    ball: ImmersionData


def _context(G: CobordismGroup) -> HomologyContext:
    if G.ctx is None:
        raise ImmersionError(f"group {G.context_hash} has no manifold attached")
    return G.ctx


def empty_immersion(G: CobordismGroup, label: str = "empty") -> ImmersionData:
    cx = _context(G).complex
    return ImmersionData(BitVector.zeros(cx.size(2)), BitVector.zeros(cx.size(1)), 0, label)


def psi(G: CobordismGroup, imm: ImmersionData) -> CobordismElement:
    """(class of the image, class of the double locus, n reduced mod the group modulus)"""
    ctx = _context(G)
    try:
        h = class_of_cycle(ctx, 2, imm.image_chain)
    except HomologyError as exc:
        raise ImmersionError(f"image chain of {imm.label or 'immersion'}: {exc}") from exc
    try:
        d = class_of_cycle(ctx, 1, imm.double_locus)
    except HomologyError as exc:
        raise ImmersionError(f"double locus of {imm.label or 'immersion'}: {exc}") from exc
    if imm.n < 0:
        raise ImmersionError(f"n must be non-negative, got {imm.n}")
    return CobordismElement(h, d, imm.n % G.modulus)


def cobordant(G: CobordismGroup, a: ImmersionData, b: ImmersionData) -> bool:
    return psi(G, a) == psi(G, b)


def disjoint_union(G: CobordismGroup, a: ImmersionData, b: ImmersionData) -> ImmersionData:
    """
    Union of two immersions in general position. The double locus gains the
    basis representative of the intersection of the two image classes.
    """
    ctx = _context(G)
    overlap = (a.image_chain & b.image_chain).support()
    if overlap:
        triangle = ctx.complex.simplices[2][overlap[0]]
        raise ImmersionError(f"image supports overlap on triangle {list(triangle)}")
    ha = psi(G, a).h
    hb = psi(G, b).h
    twist = intersect_H2(ctx, ha, hb)
    twist_cycle = representative(ctx, twist)
    label = f"{a.label or 'a'}+{b.label or 'b'} [twist {twist.coords.to_string() or '-'}]"
    return ImmersionData(
        image_chain=a.image_chain + b.image_chain,
        double_locus=a.double_locus + b.double_locus + twist_cycle,
        n=a.n + b.n,
        label=label,
        components=a.components + b.components,
    )


def _support_euler(ctx: HomologyContext, chain: BitVector) -> int:
    triangles = ctx.complex.simplices_of(2, chain)
    edges = {e for t in triangles for e in ((t[0], t[1]), (t[0], t[2]), (t[1], t[2]))}
    vertices = {v for t in triangles for v in t}
    return len(vertices) - len(edges) + len(triangles)


def _tube_chain(ctx: HomologyContext, loop: BitVector) -> BitVector:
    """Boundary of the tetrahedra meeting the loop: a null-homologous surface around it."""
    T = ctx.triangulation
    edges = set(ctx.complex.simplices_of(1, loop))
    around = [i for i, s in enumerate(T.top_simplices)
              if any((s[p], s[q]) in edges for p in range(len(s)) for q in range(p + 1, len(s)))]
    top = ctx.complex.chain(ctx.dim, [T.top_simplices[i] for i in around])
    return ctx.complex.boundary(ctx.dim, top)


def kinked_tube_surface(G: CobordismGroup, d) -> str:
    """Torus when w1 vanishes on the class, Klein bottle otherwise."""
    ctx = _context(G)
    return KLEIN_BOTTLE if evaluate_w1(ctx, d) else TORUS


def boy_component(G: CobordismGroup, copies: int = 1) -> ImmersionData:
    """Copies of the generator of the cobordism group of R^3 placed in a ball."""
    base = empty_immersion(G)
    share = copies % G.modulus
    return ImmersionData(base.image_chain, base.double_locus, share, f"boy x{copies}",
                         (ImmersionComponent(ComponentKind.BALL, BOY_SURFACE, share),))


def _normal_form(G: CobordismGroup, target: CobordismElement) -> Decomposition:
    ctx = _context(G)
    G.code(target)
    empty = empty_immersion(G)

    f_chain = representative(ctx, target.h)
    n_f = _support_euler(ctx, f_chain) % 2 if not target.h.is_zero() else 0
    embedding = ImmersionData(
        f_chain, empty.double_locus, n_f, "embedding",
        (ImmersionComponent(ComponentKind.EMBEDDING, None, n_f),) if not target.h.is_zero() else (),
    )

    if target.d.is_zero():
        tube = ImmersionData(empty.image_chain, empty.double_locus, 0, "tube")
    else:
        loop = representative(ctx, target.d)
        surface = kinked_tube_surface(G, target.d)
        tube = ImmersionData(_tube_chain(ctx, loop), loop, 0, "tube",
                             (ImmersionComponent(ComponentKind.KINKED_TUBE, surface, 0),))

    share = (target.n - n_f) % G.modulus
    ball = boy_component(G, share) if share else ImmersionData(empty.image_chain, empty.double_locus, 0, "ball")
    return Decomposition(embedding, tube, ball)


def realize(G: CobordismGroup, target: CobordismElement) -> ImmersionData:
    """
    Data whose invariant is the target: an embedded surface carrying h, a
    kinked tube around a loop carrying d, and Boy components in a ball
    making up the remaining n.
    """
    f, tube, ball = _normal_form(G, target)
    components = f.components + tube.components + ball.components
    imm = ImmersionData(
        image_chain=f.image_chain + tube.image_chain + ball.image_chain,
        double_locus=f.double_locus + tube.double_locus + ball.double_locus,
        n=(f.n + ball.n) % G.modulus,
        label=f"realize{target!r}",
        components=components,
    )
    logger.debug(f"Realized {target!r} with {len(components)} components")
    return imm


def decompose(G: CobordismGroup, imm: ImmersionData) -> Decomposition:
    """Normal form f + h + g of an immersion; the parts' invariants compose to psi(imm)."""
    return _normal_form(G, psi(G, imm))


def push_off(G: CobordismGroup, h, avoid: BitVector) -> Optional[BitVector]:
    """A cycle in class h with no triangle in the support of avoid, or None if there is none."""
    ctx = _context(G)
    rep = representative(ctx, h)
    blocked = avoid.support()
    if not (rep & avoid).support():
        return rep
    boundary = ctx.complex.boundaries[ctx.dim]
    A = boundary.take_rows(blocked)
    b = BitVector(rep.bits[list(blocked)])
    w = solve(A, b)
    if w is None:
        return None
    return rep + boundary @ w


def random_immersion(
    G: CobordismGroup,
    rng: random.Random,
    avoid: Optional[BitVector] = None,
    label: str = "",
) -> Optional[ImmersionData]:
    """
    A random element realized with boundaries added to its chains; the
    image avoids the given triangles when possible.
    """
    ctx = _context(G)
    cx = ctx.complex
    target = G.from_code(rng.randrange(G.order))
    base = realize(G, target)
    image = base.image_chain
    tets = BitVector.from_indices(cx.size(3), rng.sample(range(cx.size(3)), rng.randint(0, NOISE_SIMPLICES)))
    triangles = BitVector.from_indices(cx.size(2), rng.sample(range(cx.size(2)), rng.randint(0, NOISE_SIMPLICES)))
    image = image + cx.boundary(3, tets)
    locus = base.double_locus + cx.boundary(2, triangles)
    if avoid is not None and (image & avoid).support():
        pushed = push_off(G, psi(G, base).h, avoid)
        if pushed is None:
            return None
        image = pushed
    return ImmersionData(image, locus, base.n, label or f"random{target!r}", base.components)
