"""
The group of triples (h, d, n) in H2 x H1 x Z/m under the twisted law

    (h, d, n) * (h', d', n') = (h + h', d + d' + h.h', n + n')

where h.h' is the intersection pairing H2 x H2 -> H1. m is 2 for
non-orientable manifolds and 8 for the orientable comparison variant.

Internally an element is the integer code ((h * 2^b1) + d) * m + n with h
and d read as bit masks (coordinate i is bit i), which orders elements
lexicographically by (h, d, n) and lets whole Cayley tables be built with
numpy.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .dependencies import DomainError, get_exhaustive_bound, get_sample_count, get_sample_seed, get_structure_bound
from .gf2 import BitVector
from .homology import HomologyClass, HomologyContext
from .schemas import AxiomCheck, GroupElementModel, Variant, VerificationMode, VerificationReport
from .telemetry import add_span_attributes, create_span

logger = logging.getLogger(__name__)

MODULUS = {Variant.NONORIENTABLE: 2, Variant.ORIENTABLE: 8}
CHUNK_ROWS = 256


class GroupError(DomainError):
    """Foreign element, unsupported variant or exceeded bound"""


@dataclass(frozen=True)
class CobordismElement:
    h: HomologyClass
    d: HomologyClass
    n: int

    def to_model(self) -> GroupElementModel:
        return GroupElementModel(h=self.h.coords.to_string(), d=self.d.coords.to_string(), n=self.n)

    def __repr__(self) -> str:
        return f"({self.h.coords.to_string() or '-'}, {self.d.coords.to_string() or '-'}, {self.n})"


@dataclass(frozen=True)
class CobordismGroup:
    variant: Variant
    dim_h2: int
    dim_h1: int
    pairing: Tuple[Tuple[int, ...], ...]
    context_hash: str
    ctx: Optional[HomologyContext] = field(default=None, repr=False, compare=False)

    @classmethod
    def from_context(cls, ctx: HomologyContext, variant: Optional[Variant] = None) -> "CobordismGroup":
        if ctx.dim != 3:
            raise GroupError(f"cobordism groups are defined for 3-manifolds, got dimension {ctx.dim}")
        if variant is None:
            variant = Variant.ORIENTABLE if ctx.orientable else Variant.NONORIENTABLE
        variant = Variant(variant)
        if variant == Variant.NONORIENTABLE and ctx.orientable:
            raise GroupError(f"{ctx.triangulation.label} is orientable; use the orientable variant")
        if variant == Variant.ORIENTABLE and not ctx.orientable:
            raise GroupError(f"{ctx.triangulation.label} is not orientable; use the nonorientable variant")
        b2, b1 = ctx.betti[2], ctx.betti[1]
        pairing = tuple(tuple(ctx.pairing_table[i][j].to_int() for j in range(b2)) for i in range(b2))
        return cls(variant, b2, b1, pairing, ctx.context_hash, ctx)

    @property
    def modulus(self) -> int:
        return MODULUS[self.variant]

    @property
    def order(self) -> int:
        return (1 << self.dim_h2) * (1 << self.dim_h1) * self.modulus

    # codes

    def encode(self, h: int, d: int, n: int) -> int:
        return ((h << self.dim_h1) + d) * self.modulus + n

    def decode(self, code: int) -> Tuple[int, int, int]:
        n = code % self.modulus
        rest = code // self.modulus
        return rest >> self.dim_h1, rest & ((1 << self.dim_h1) - 1), n

    def _decode_array(self, codes: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = codes % self.modulus
        rest = codes // self.modulus
        return rest >> self.dim_h1, rest & ((1 << self.dim_h1) - 1), n

    def _encode_array(self, h: np.ndarray, d: np.ndarray, n: np.ndarray) -> np.ndarray:
        return ((h << self.dim_h1) + d) * self.modulus + n

    def twist(self, h1: int, h2: int) -> int:
        """Intersection of two H2 masks as an H1 mask"""
        acc = 0
        for i in range(self.dim_h2):
            if (h1 >> i) & 1:
                for j in range(self.dim_h2):
                    if (h2 >> j) & 1:
                        acc ^= self.pairing[i][j]
        return acc

    def _twist_array(self, h1: np.ndarray, h2: np.ndarray) -> np.ndarray:
        h1, h2 = np.broadcast_arrays(h1, h2)
        acc = np.zeros(h1.shape, dtype=np.int64)
        for i in range(self.dim_h2):
            bit_i = (h1 >> i) & 1
            for j in range(self.dim_h2):
                if self.pairing[i][j]:
                    acc ^= (bit_i & ((h2 >> j) & 1)) * self.pairing[i][j]
        return acc

    def _compose_codes(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        ha, da, na = self._decode_array(a)
        hb, db, nb = self._decode_array(b)
        return self._encode_array(ha ^ hb, da ^ db ^ self._twist_array(ha, hb), (na + nb) % self.modulus)

    def _inverse_codes(self, a: np.ndarray) -> np.ndarray:
        h, d, n = self._decode_array(a)
        return self._encode_array(h, d ^ self._twist_array(h, h), (-n) % self.modulus)

    # elements

    def _class(self, k: int, mask: int) -> HomologyClass:
        length = self.dim_h2 if k == 2 else self.dim_h1
        return HomologyClass(k, BitVector.from_int(mask, length), self.context_hash)

    def from_code(self, code: int) -> CobordismElement:
        if not 0 <= code < self.order:
            raise GroupError(f"element code {code} outside a group of order {self.order}")
        h, d, n = self.decode(code)
        return CobordismElement(self._class(2, h), self._class(1, d), n)

    def code(self, a: CobordismElement) -> int:
        self._check(a)
        return self.encode(a.h.coords.to_int(), a.d.coords.to_int(), a.n)

    def element(self, h, d, n: int) -> CobordismElement:
        """Build an element from bit strings, bit vectors or homology classes."""
        hc = self._coerce(2, h)
        dc = self._coerce(1, d)
        if not 0 <= int(n) < self.modulus:
            raise GroupError(f"n={n} outside Z/{self.modulus}")
        return CobordismElement(hc, dc, int(n))

    def from_model(self, model: GroupElementModel) -> CobordismElement:
        """Read a serialized element back; n must already lie in 0..modulus-1."""
        return self.element(model.h, model.d, model.n)

    def _coerce(self, k: int, value) -> HomologyClass:
        length = self.dim_h2 if k == 2 else self.dim_h1
        if isinstance(value, HomologyClass):
            cls = value
        elif isinstance(value, BitVector):
            cls = HomologyClass(k, value, self.context_hash)
        elif isinstance(value, str):
            cls = HomologyClass(k, BitVector.from_string(value), self.context_hash)
        else:
            raise GroupError(f"cannot read an H{k} class from {type(value).__name__}")
        if cls.dimension != k or cls.coords.length != length:
            raise GroupError(f"H{k} coordinates need length {length}, got {cls.coords.length}")
        if cls.context_hash != self.context_hash:
            raise GroupError(f"class belongs to manifold {cls.context_hash}, not {self.context_hash}")
        return cls

    def _check(self, a: CobordismElement) -> None:
        if not isinstance(a, CobordismElement):
            raise GroupError(f"expected a CobordismElement, got {type(a).__name__}")
        for cls, k, length in ((a.h, 2, self.dim_h2), (a.d, 1, self.dim_h1)):
            if cls.context_hash != self.context_hash:
                raise GroupError(f"element belongs to manifold {cls.context_hash}, not {self.context_hash}")
            if cls.dimension != k or cls.coords.length != length:
                raise GroupError(f"malformed H{k} component {cls}")
        if not 0 <= a.n < self.modulus:
            raise GroupError(f"n={a.n} outside Z/{self.modulus}")

    def identity(self) -> CobordismElement:
        return self.from_code(0)

    def elements(self) -> Iterator[CobordismElement]:
        """All elements in lexicographic (h, d, n) order"""
        for code in range(self.order):
            yield self.from_code(code)


def compose(G: CobordismGroup, a: CobordismElement, b: CobordismElement) -> CobordismElement:
    ca, cb = G.code(a), G.code(b)
    ha, da, na = G.decode(ca)
    hb, db, nb = G.decode(cb)
    return G.from_code(G.encode(ha ^ hb, da ^ db ^ G.twist(ha, hb), (na + nb) % G.modulus))


def inverse(G: CobordismGroup, a: CobordismElement) -> CobordismElement:
    h, d, n = G.decode(G.code(a))
    return G.from_code(G.encode(h, d ^ G.twist(h, h), (-n) % G.modulus))


def power(G: CobordismGroup, a: CobordismElement, k: int) -> CobordismElement:
    if k < 0:
        return power(G, inverse(G, a), -k)
    result = G.identity()
    base = a
    while k:
        if k & 1:
            result = compose(G, result, base)
        base = compose(G, base, base)
        k >>= 1
    return result


def order_of(G: CobordismGroup, a: CobordismElement) -> int:
    identity = G.identity()
    x = a
    k = 1
    while x != identity:
        x = compose(G, x, a)
        k += 1
        if k > G.order:
            raise GroupError(f"element {a} has no finite order within the group order {G.order}")
    return k


def group_order(G: CobordismGroup) -> int:
    return G.order


def structure(G: CobordismGroup, bound: Optional[int] = None) -> List[int]:
    """
    Invariant factors (ascending) from the image sizes of a -> a^(2^k).

    If s_k = log2 |G^(2^k)| then s_k - s_(k+1) counts the cyclic factors of
    order greater than 2^k.
    """
    bound = bound or get_structure_bound()
    if G.order > bound:
        raise GroupError(f"group order {G.order} exceeds the structure bound {bound}")
    with create_span("cobordgroup.structure", {"order": G.order, "variant": G.variant.value}):
        codes = np.arange(G.order, dtype=np.int64)
        h, d, n = G._decode_array(codes)
        sizes = []
        while True:
            size = len(np.unique(G._encode_array(h, d, n)))
            sizes.append(size.bit_length() - 1)
            if size == 1:
                break
            # a*a = (0, h.h, 2n)
            h, d, n = np.zeros_like(h), G._twist_array(h, h), (2 * n) % G.modulus
        above = [sizes[k] - (sizes[k + 1] if k + 1 < len(sizes) else 0) for k in range(len(sizes))]
        factors = []
        for k in range(len(above)):
            count = above[k] - (above[k + 1] if k + 1 < len(above) else 0)
            factors.extend([1 << (k + 1)] * count)
    return sorted(factors)


def exponent(G: CobordismGroup) -> int:
    factors = structure(G)
    return max(factors) if factors else 1


def disk_subgroup(G: CobordismGroup) -> List[CobordismElement]:
    """Classes representable inside a ball: (0, 0, n)"""
    return [G.from_code(G.encode(0, 0, n)) for n in range(G.modulus)]


def cayley_table(G: CobordismGroup, bound: Optional[int] = None) -> np.ndarray:
    bound = bound or get_exhaustive_bound()
    if G.order > bound:
        raise GroupError(f"group order {G.order} exceeds the exhaustive bound {bound}")
    codes = np.arange(G.order, dtype=np.int64)
    table = np.empty((G.order, G.order), dtype=np.int64)
    for start in range(0, G.order, CHUNK_ROWS):
        rows = codes[start:start + CHUNK_ROWS]
        table[start:start + len(rows)] = G._compose_codes(rows[:, None], codes[None, :])
    return table


def element_label(G: CobordismGroup, code: int) -> str:
    a = G.from_code(code)
    return f"{a.h.coords.to_string()}|{a.d.coords.to_string()}|{a.n}"


def cayley_csv(G: CobordismGroup, bound: int) -> str:
    if G.order > bound:
        raise GroupError(f"Cayley CSV is limited to order {bound}, group has order {G.order}")
    table = cayley_table(G, max(bound, G.order))
    labels = [element_label(G, c) for c in range(G.order)]
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["*"] + labels)
    for code, row in enumerate(table):
        writer.writerow([labels[code]] + [labels[int(c)] for c in row])
    return buffer.getvalue()


def _models(G: CobordismGroup, codes: Sequence[int]) -> List[GroupElementModel]:
    return [G.from_code(int(c)).to_model() for c in codes]


def _check(name: str, mismatches: np.ndarray, checked: int, witness) -> AxiomCheck:
    if mismatches.size == 0:
        return AxiomCheck(name=name, passed=True, checked=checked)
    return AxiomCheck(name=name, passed=False, checked=checked, counterexample=witness(mismatches[0]))


def verify_axioms(
    G: CobordismGroup,
    mode: VerificationMode = VerificationMode.EXHAUSTIVE,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    bound: Optional[int] = None,
) -> VerificationReport:
    """
    Check identity, inverses, commutativity, associativity and that
    (h, d, n) -> h is a homomorphism whose kernel composes untwisted.
    Exhaustive mode walks the full Cayley table; sampled mode draws
    seeded random triples.
    """
    mode = VerificationMode(mode)
    with create_span("cobordgroup.verify_axioms", {"order": G.order, "mode": mode.value}):
        if mode == VerificationMode.EXHAUSTIVE:
            checks = _verify_exhaustive(G, bound or get_exhaustive_bound())
            samples, seed = None, None
        else:
            samples = samples or get_sample_count()
            seed = get_sample_seed() if seed is None else seed
            checks = _verify_sampled(G, samples, seed)
        passed = all(c.passed for c in checks)
        add_span_attributes({"passed": passed})
    if passed:
        logger.info(f"Group axioms hold for order {G.order} ({mode.value})")
    else:
        failed = [c.name for c in checks if not c.passed]
        logger.warning(f"Group axioms fail for order {G.order}: {', '.join(failed)}")
    return VerificationReport(
        context_hash=G.context_hash, variant=G.variant, mode=mode, order=G.order,
        samples=samples, seed=seed, passed=passed, checks=checks,
    )


def _verify_exhaustive(G: CobordismGroup, bound: int) -> List[AxiomCheck]:
    N = G.order
    C = cayley_table(G, bound)
    codes = np.arange(N, dtype=np.int64)
    H, D, _ = G._decode_array(codes)
    checks = []

    bad = np.flatnonzero((C[0, :] != codes) | (C[:, 0] != codes))
    checks.append(_check("identity", bad, N, lambda a: _models(G, [0, a])))

    inv = G._inverse_codes(codes)
    bad = np.flatnonzero(C[codes, inv] != 0)
    checks.append(_check("inverse", bad, N, lambda a: _models(G, [a, inv[a]])))

    pairs = np.argwhere(C != C.T)
    checks.append(_check("commutativity", pairs, N * N, lambda p: _models(G, p)))

    assoc_bad = np.empty((0, 3), dtype=np.int64)
    for a in range(N):
        left = C[C[a, :], :]
        right = C[a, C]
        diff = np.argwhere(left != right)
        if diff.size:
            assoc_bad = np.array([[a, diff[0][0], diff[0][1]]])
            break
    checks.append(_check("associativity", assoc_bad, N ** 3, lambda t: _models(G, t)))

    hc, _, _ = G._decode_array(C)
    pairs = np.argwhere(hc != (H[:, None] ^ H[None, :]))
    checks.append(_check("projection_homomorphism", pairs, N * N, lambda p: _models(G, p)))

    kernel = np.flatnonzero(H == 0)
    sub = C[np.ix_(kernel, kernel)]
    _, dk, _ = G._decode_array(sub)
    pairs = np.argwhere(dk != (D[kernel][:, None] ^ D[kernel][None, :]))
    checks.append(_check("kernel_untwisted", pairs, len(kernel) ** 2,
                         lambda p: _models(G, [kernel[p[0]], kernel[p[1]]])))
    return checks


def _verify_sampled(G: CobordismGroup, samples: int, seed: int) -> List[AxiomCheck]:
    rng = np.random.default_rng(seed)
    a, b, c = (rng.integers(0, G.order, size=samples, dtype=np.int64) for _ in range(3))
    ab = G._compose_codes(a, b)
    checks = []

    e = np.zeros_like(a)
    bad = np.flatnonzero((G._compose_codes(e, a) != a) | (G._compose_codes(a, e) != a))
    checks.append(_check("identity", bad, samples, lambda i: _models(G, [0, a[i]])))

    inv = G._inverse_codes(a)
    bad = np.flatnonzero(G._compose_codes(a, inv) != 0)
    checks.append(_check("inverse", bad, samples, lambda i: _models(G, [a[i], inv[i]])))

    bad = np.flatnonzero(ab != G._compose_codes(b, a))
    checks.append(_check("commutativity", bad, samples, lambda i: _models(G, [a[i], b[i]])))

    bad = np.flatnonzero(G._compose_codes(ab, c) != G._compose_codes(a, G._compose_codes(b, c)))
    checks.append(_check("associativity", bad, samples, lambda i: _models(G, [a[i], b[i], c[i]])))

    ha, da, _ = G._decode_array(a)
    hb, db, _ = G._decode_array(b)
    hab, dab, _ = G._decode_array(ab)
    bad = np.flatnonzero(hab != (ha ^ hb))
    checks.append(_check("projection_homomorphism", bad, samples, lambda i: _models(G, [a[i], b[i]])))

    ka = G._encode_array(np.zeros_like(ha), da, a % G.modulus)
    kb = G._encode_array(np.zeros_like(hb), db, b % G.modulus)
    _, dk, _ = G._decode_array(G._compose_codes(ka, kb))
    bad = np.flatnonzero(dk != (da ^ db))
    checks.append(_check("kernel_untwisted", bad, samples, lambda i: _models(G, [ka[i], kb[i]])))
    return checks


def synthetic_group(
    dim_h2: int,
    dim_h1: int,
    seed: int = 0,
    variant: Variant = Variant.NONORIENTABLE,
) -> CobordismGroup:
    """A group with a random symmetric pairing, for verification beyond catalog sizes."""
    rng = np.random.default_rng(seed)
    pairing = [[0] * dim_h2 for _ in range(dim_h2)]
    for i in range(dim_h2):
        for j in range(i, dim_h2):
            value = int(rng.integers(0, 1 << dim_h1)) if dim_h1 else 0
            pairing[i][j] = pairing[j][i] = value
    return CobordismGroup(Variant(variant), dim_h2, dim_h1, tuple(tuple(r) for r in pairing),
                          f"synthetic-{dim_h2}-{dim_h1}-{seed}")


def with_pairing(G: CobordismGroup, pairing: Sequence[Sequence[int]]) -> CobordismGroup:
    """Same group data with a replaced pairing (masks); no symmetry check."""
    return CobordismGroup(G.variant, G.dim_h2, G.dim_h1, tuple(tuple(int(v) for v in r) for r in pairing),
                          G.context_hash, G.ctx)
